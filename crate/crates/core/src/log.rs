//! Line-delimited session logs.
//!
//! Each non-blank line is one JSON document:
//!
//! ```json
//! {"sessionId": "s1", "role": "expert", "taskType": "outliers",
//!  "timestampMs": 1700000000000, "dwellMs": 4200,
//!  "spec": {"x": "longitude", "y": "latitude", "layers": ["AVG(magnitude)"],
//!           "filters": [], "grouping": ["place"]},
//!  "visual": {"chartType": "map-scatter"}}
//! ```

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::LogError;
use crate::graph::{Role, SessionEvent, SessionSequence};
use crate::spec::DataSpecification;
use crate::visual::VisualSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogEvent {
    pub session_id: String,
    pub role: Role,
    pub task_type: String,
    pub timestamp_ms: i64,
    pub dwell_ms: u64,
    pub spec: DataSpecification,
    #[serde(default)]
    pub visual: VisualSpec,
}

impl LogEvent {
    pub fn parse(line: &str, line_no: usize) -> Result<LogEvent, LogError> {
        let event: LogEvent = serde_json::from_str(line).map_err(|e| LogError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        event.spec.validate().map_err(|e| LogError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        Ok(event)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log events serialize")
    }
}

/// Group events into sessions ordered by session id; events within a
/// session are stably sorted by timestamp.
pub fn sequences_from_events(events: Vec<LogEvent>) -> Result<Vec<SessionSequence>, LogError> {
    let mut sessions: BTreeMap<String, SessionSequence> = BTreeMap::new();
    for ev in events {
        let seq = sessions
            .entry(ev.session_id.clone())
            .or_insert_with(|| SessionSequence {
                session_id: ev.session_id.clone(),
                role: ev.role,
                task_type: ev.task_type.clone(),
                events: Vec::new(),
            });
        if seq.role != ev.role {
            return Err(LogError::InconsistentSession {
                session: ev.session_id,
                reason: "role changes within the session".into(),
            });
        }
        if seq.task_type != ev.task_type {
            return Err(LogError::InconsistentSession {
                session: ev.session_id,
                reason: format!("task type changes from {:?} to {:?}", seq.task_type, ev.task_type),
            });
        }
        seq.events.push(SessionEvent {
            spec: ev.spec,
            visual: ev.visual,
            dwell_ms: ev.dwell_ms,
            timestamp_ms: ev.timestamp_ms,
        });
    }
    Ok(sessions
        .into_values()
        .map(|mut s| {
            s.events.sort_by_key(|e| e.timestamp_ms);
            s
        })
        .collect())
}

pub fn parse_session_log(text: &str) -> Result<Vec<SessionSequence>, LogError> {
    let events = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| LogEvent::parse(l, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    sequences_from_events(events)
}

pub fn read_session_log<R: BufRead>(reader: R) -> Result<Vec<SessionSequence>, LogError> {
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| LogError::Format {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if !line.trim().is_empty() {
            events.push(LogEvent::parse(&line, i + 1)?);
        }
    }
    sequences_from_events(events)
}

/// Per-event flag: dwell at or above the threshold.
pub fn mark_interesting(seq: &SessionSequence, threshold_ms: u64) -> Vec<bool> {
    seq.events.iter().map(|e| e.dwell_ms >= threshold_ms).collect()
}

pub fn to_log_events(seq: &SessionSequence) -> Vec<LogEvent> {
    seq.events
        .iter()
        .map(|e| LogEvent {
            session_id: seq.session_id.clone(),
            role: seq.role,
            task_type: seq.task_type.clone(),
            timestamp_ms: e.timestamp_ms,
            dwell_ms: e.dwell_ms,
            spec: e.spec.clone(),
            visual: e.visual.clone(),
        })
        .collect()
}

/// Serialize sequences back to log text, one event per line.
pub fn to_log_lines(sequences: &[SessionSequence]) -> String {
    let mut out = String::new();
    for ev in sequences.iter().flat_map(to_log_events) {
        out.push_str(&ev.to_line());
        out.push('\n');
    }
    out
}
