//! `dataslicer` subcommands. JSON goes to stdout, diagnostics to stderr.
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use dataslicer_core::query::{load_dataset, to_sql_template, Dataset, DatasetSchema};
use dataslicer_core::{build_graph, load_graph, parse_session_log, save_graph, DataSliceGraph, DataSpecification};
use dataslicer_service::api::{self, ApiError, EvaluateRequest, MatchRequest, RecommendRequest};
use dataslicer_service::AppState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dataslicer", version, about = "Task-aware data slice recommender")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a data slice graph from a session log.
    BuildGraph {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        task: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graph nodes nearest to a specification.
    Match {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(short = 'M', default_value_t = api::DEFAULT_M)]
        m: usize,
    },
    /// Recommend interesting slices downstream of a specification.
    Recommend {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, requires = "schema")]
        data: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(short = 'M', default_value_t = api::DEFAULT_M)]
        m: usize,
        /// Interestingness threshold in milliseconds; defaults to
        /// `DATASLICER_T` or 3000.
        #[arg(short = 'T')]
        t: Option<u64>,
    },
    /// Evaluate a specification over a CSV dataset.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Print the SQL template instead of the result table.
        #[arg(long)]
        sql_only: bool,
    },
    /// Serve the HTTP API over a graph file.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, requires = "schema")]
        data: Option<PathBuf>,
        #[arg(long, requires = "data")]
        schema: Option<PathBuf>,
    },
}

/// A failure reading or interpreting input files.
#[derive(Debug)]
pub struct DataError(pub String);

impl From<ApiError> for DataError {
    fn from(e: ApiError) -> Self {
        DataError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|e| DataError(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<DataSliceGraph, DataError> {
    load_graph(&read(path)?).map_err(|e| DataError(format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<DataSpecification, DataError> {
    serde_json::from_str(&read(path)?).map_err(|e| DataError(format!("{}: {e}", path.display())))
}

fn read_schema(path: &Path) -> Result<DatasetSchema, DataError> {
    DatasetSchema::from_json(&read(path)?).map_err(|e| DataError(format!("{}: {e}", path.display())))
}

fn read_dataset(data: &Path, schema: &Path) -> Result<Dataset, DataError> {
    let schema = read_schema(schema)?;
    let file = std::fs::File::open(data).map_err(|e| DataError(format!("{}: {e}", data.display())))?;
    load_dataset(std::io::BufReader::new(file), schema).map_err(|e| DataError(format!("{}: {e}", data.display())))
}

/// Parse `argv` (program name first) and execute, writing to the given
/// streams. Returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if argv.len() <= 1 {
        let _ = writeln!(err, "{}", <Cli as clap::CommandFactory>::command().render_help());
        return EXIT_USAGE;
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if informational {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(DataError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn emit(out: &mut dyn Write, body: &str) -> Result<(), DataError> {
    writeln!(out, "{body}").map_err(|e| DataError(format!("stdout: {e}")))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), DataError> {
    match command {
        Command::BuildGraph { log, task, out: dest } => {
            let sequences =
                parse_session_log(&read(&log)?).map_err(|e| DataError(format!("{}: {e}", log.display())))?;
            let graph = build_graph(&sequences, &task).map_err(|e| DataError(e.to_string()))?;
            std::fs::write(&dest, save_graph(&graph)).map_err(|e| DataError(format!("{}: {e}", dest.display())))?;
            let _ = writeln!(
                err,
                "built {:?} graph from {} sessions: {} nodes, {} edges",
                task,
                sequences.len(),
                graph.node_count(),
                graph.edge_count()
            );
            emit(
                out,
                &api::to_json(&serde_json::json!({
                    "taskType": graph.task_type,
                    "mode": graph.mode(),
                    "sessions": sequences.len(),
                    "nodes": graph.node_count(),
                    "edges": graph.edge_count(),
                    "out": dest.display().to_string(),
                })),
            )
        }
        Command::Match { graph, spec, m } => {
            let graph = read_graph(&graph)?;
            let req = MatchRequest {
                spec: read_spec(&spec)?,
                m,
            };
            emit(out, &api::match_body(&graph, &req)?)
        }
        Command::Recommend {
            graph,
            spec,
            data,
            schema,
            m,
            t,
        } => {
            let graph = read_graph(&graph)?;
            let schema = match (&data, &schema) {
                (Some(d), Some(h)) => Some(read_dataset(d, h)?.schema().clone()),
                (None, Some(h)) => Some(read_schema(h)?),
                _ => None,
            };
            let threshold = api::threshold_from_env()?;
            let req = RecommendRequest {
                spec: read_spec(&spec)?,
                user_pref: None,
                m: Some(m),
                t,
                dataset: None,
            };
            emit(out, &api::recommend_body(&graph, &req, schema.as_ref(), threshold)?)
        }
        Command::Eval {
            data,
            schema,
            spec,
            sql_only,
        } => {
            let spec = read_spec(&spec)?;
            if sql_only {
                let schema = read_schema(&schema)?;
                let sql = to_sql_template(&spec, &schema).map_err(|e| DataError(e.to_string()))?;
                return emit(out, &sql);
            }
            let dataset = read_dataset(&data, &schema)?;
            let _ = writeln!(err, "{}: {} rows", dataset.name(), dataset.row_count());
            emit(out, &api::evaluate_body(&dataset, &EvaluateRequest { spec })?)
        }
        Command::Serve {
            port,
            graph,
            data,
            schema,
        } => {
            let loaded = read_graph(&graph)?;
            let dir = graph
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map(Path::to_path_buf);
            let state = AppState::new(dir, api::threshold_from_env()?);
            state.insert_graph(loaded, Some(graph.clone()))?;
            if let (Some(d), Some(h)) = (&data, &schema) {
                state.insert_dataset(read_dataset(d, h)?)?;
            }
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            let _ = writeln!(err, "listening on http://{addr}");
            let _ = err.flush();
            let runtime = tokio::runtime::Runtime::new().map_err(|e| DataError(e.to_string()))?;
            runtime
                .block_on(dataslicer_service::serve(addr, Arc::new(state)))
                .map_err(|e| DataError(format!("{addr}: {e}")))
        }
    }
}
