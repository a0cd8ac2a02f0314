//! Navigation operations: single-step edits between data specifications.
//!
//! Replacing a field is never one operation; it is a removal followed by
//! an addition.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::field::{ComplexOp, FieldExpr};
use crate::spec::{AbstractSpec, DataSpecification, FilterPredicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SelectTarget {
    X,
    Y,
    Layer,
}

/// Location of a field inside a specification, for complex-field edits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    X,
    Y,
    Layer,
    Filter,
    Grouping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NavOp {
    /// Adds a filter on `field`. Empty `predicates` adds an unbounded placeholder.
    AddFilter {
        field: FieldExpr,
        #[serde(default)]
        predicates: Vec<FilterPredicate>,
    },
    /// Removes every predicate on `field`; `predicates` records what was
    /// removed so the operation can be inverted.
    RemoveFilter {
        field: FieldExpr,
        #[serde(default)]
        predicates: Vec<FilterPredicate>,
    },
    AddSelectField {
        target: SelectTarget,
        field: FieldExpr,
    },
    RemoveSelectField {
        target: SelectTarget,
        field: FieldExpr,
    },
    AddGroupField {
        field: FieldExpr,
    },
    RemoveGroupField {
        field: FieldExpr,
    },
    /// Wraps `target` into a complex field with `operand`; `position` is
    /// the side `target` ends up on.
    AddComplexOp {
        part: Part,
        target: FieldExpr,
        op: ComplexOp,
        operand: FieldExpr,
        position: Side,
    },
    /// Replaces the complex field `target` by its `keep` child.
    RemoveComplexOp {
        part: Part,
        target: FieldExpr,
        keep: Side,
    },
}

impl NavOp {
    pub fn kind(&self) -> &'static str {
        match self {
            NavOp::AddFilter { .. } => "AddFilter",
            NavOp::RemoveFilter { .. } => "RemoveFilter",
            NavOp::AddSelectField { .. } => "AddSelectField",
            NavOp::RemoveSelectField { .. } => "RemoveSelectField",
            NavOp::AddGroupField { .. } => "AddGroupField",
            NavOp::RemoveGroupField { .. } => "RemoveGroupField",
            NavOp::AddComplexOp { .. } => "AddComplexOp",
            NavOp::RemoveComplexOp { .. } => "RemoveComplexOp",
        }
    }

    pub fn inverse(&self) -> Result<NavOp, SpecError> {
        Ok(match self.clone() {
            NavOp::AddFilter { field, predicates } => NavOp::RemoveFilter { field, predicates },
            NavOp::RemoveFilter { field, predicates } => NavOp::AddFilter { field, predicates },
            NavOp::AddSelectField { target, field } => NavOp::RemoveSelectField { target, field },
            NavOp::RemoveSelectField { target, field } => NavOp::AddSelectField { target, field },
            NavOp::AddGroupField { field } => NavOp::RemoveGroupField { field },
            NavOp::RemoveGroupField { field } => NavOp::AddGroupField { field },
            NavOp::AddComplexOp {
                part,
                target,
                op,
                operand,
                position,
            } => NavOp::RemoveComplexOp {
                part,
                target: wrap(target, op, operand, position),
                keep: position,
            },
            NavOp::RemoveComplexOp { part, target, keep } => {
                let FieldExpr::Complex(op, l, r) = target else {
                    return Err(inapplicable(self, "target is not a complex field"));
                };
                let (kept, operand) = match keep {
                    Side::Left => (*l, *r),
                    Side::Right => (*r, *l),
                };
                NavOp::AddComplexOp {
                    part,
                    target: kept,
                    op,
                    operand,
                    position: keep,
                }
            }
        })
    }

    /// Canonical ordering key: part (filters, select, grouping, complex
    /// edits), then select target, then field rendering.
    fn order_key(&self) -> (u8, u8, String) {
        match self {
            NavOp::AddFilter { field, .. } | NavOp::RemoveFilter { field, .. } => (0, 0, field.render()),
            NavOp::AddSelectField { target, field } | NavOp::RemoveSelectField { target, field } => {
                (1, *target as u8, field.render())
            }
            NavOp::AddGroupField { field } | NavOp::RemoveGroupField { field } => (2, 0, field.render()),
            NavOp::AddComplexOp { part, target, .. } | NavOp::RemoveComplexOp { part, target, .. } => {
                (3, *part as u8, target.render())
            }
        }
    }
}

impl fmt::Display for NavOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NavOp::AddFilter { field, .. }
            | NavOp::RemoveFilter { field, .. }
            | NavOp::AddGroupField { field }
            | NavOp::RemoveGroupField { field } => write!(f, "{}({})", self.kind(), field),
            NavOp::AddSelectField { target, field } | NavOp::RemoveSelectField { target, field } => {
                write!(f, "{}({:?}, {})", self.kind(), target, field)
            }
            NavOp::AddComplexOp {
                part,
                target,
                op,
                operand,
                ..
            } => write!(f, "{}({:?}, {} {} {})", self.kind(), part, target, op.symbol(), operand),
            NavOp::RemoveComplexOp { part, target, keep } => {
                write!(f, "{}({:?}, {}, keep {:?})", self.kind(), part, target, keep)
            }
        }
    }
}

fn wrap(target: FieldExpr, op: ComplexOp, operand: FieldExpr, position: Side) -> FieldExpr {
    match position {
        Side::Left => FieldExpr::complex(op, target, operand),
        Side::Right => FieldExpr::complex(op, operand, target),
    }
}

fn inapplicable(op: &NavOp, reason: impl Into<String>) -> SpecError {
    SpecError::InapplicableOp {
        op: op.to_string(),
        reason: reason.into(),
    }
}

/// Apply one operation. Only the tuple part the operation addresses changes.
pub fn apply_nav_op(spec: &DataSpecification, op: &NavOp) -> Result<DataSpecification, SpecError> {
    let mut out = spec.clone();
    match op {
        NavOp::AddFilter { field, predicates } => {
            if spec.has_filter_on(field) {
                return Err(inapplicable(op, "filter already present"));
            }
            if let Some(p) = predicates.iter().find(|p| &p.field != field) {
                return Err(inapplicable(op, format!("predicate {p} is on a different field")));
            }
            if predicates.is_empty() {
                out.filters.push(FilterPredicate::placeholder(field.clone()));
            } else {
                out.filters.extend(predicates.iter().cloned());
            }
        }
        NavOp::RemoveFilter { field, .. } => {
            if !spec.has_filter_on(field) {
                return Err(inapplicable(op, "no filter on this field"));
            }
            out.filters.retain(|p| &p.field != field);
        }
        NavOp::AddSelectField { target, field } => match target {
            SelectTarget::X | SelectTarget::Y => {
                let (slot, other) = match target {
                    SelectTarget::X => (&mut out.x, &spec.y),
                    _ => (&mut out.y, &spec.x),
                };
                if slot.is_some() {
                    return Err(inapplicable(op, "axis already holds a field"));
                }
                if other.as_ref() == Some(field) {
                    return Err(inapplicable(op, "field is already on the other axis"));
                }
                *slot = Some(field.clone());
            }
            SelectTarget::Layer => {
                if spec.layers.contains(field) {
                    return Err(inapplicable(op, "layer already present"));
                }
                out.layers.push(field.clone());
            }
        },
        NavOp::RemoveSelectField { target, field } => match target {
            SelectTarget::X | SelectTarget::Y => {
                let slot = if *target == SelectTarget::X {
                    &mut out.x
                } else {
                    &mut out.y
                };
                if slot.as_ref() != Some(field) {
                    return Err(inapplicable(op, "axis does not hold this field"));
                }
                *slot = None;
            }
            SelectTarget::Layer => {
                let before = out.layers.len();
                out.layers.retain(|l| l != field);
                if out.layers.len() == before {
                    return Err(inapplicable(op, "layer not present"));
                }
            }
        },
        NavOp::AddGroupField { field } => {
            if spec.grouping.contains(field) {
                return Err(inapplicable(op, "grouping field already present"));
            }
            out.grouping.push(field.clone());
        }
        NavOp::RemoveGroupField { field } => {
            let before = out.grouping.len();
            out.grouping.retain(|g| g != field);
            if out.grouping.len() == before {
                return Err(inapplicable(op, "grouping field not present"));
            }
        }
        NavOp::AddComplexOp {
            part,
            target,
            op: cop,
            operand,
            position,
        } => {
            let replacement = wrap(target.clone(), *cop, operand.clone(), *position);
            replace_in_part(&mut out, op, *part, target, replacement)?;
        }
        NavOp::RemoveComplexOp { part, target, keep } => {
            let FieldExpr::Complex(_, l, r) = target else {
                return Err(inapplicable(op, "target is not a complex field"));
            };
            let kept = match keep {
                Side::Left => (**l).clone(),
                Side::Right => (**r).clone(),
            };
            replace_in_part(&mut out, op, *part, target, kept)?;
        }
    }
    Ok(out)
}

fn replace_in_part(
    spec: &mut DataSpecification,
    op: &NavOp,
    part: Part,
    from: &FieldExpr,
    to: FieldExpr,
) -> Result<(), SpecError> {
    let missing = || inapplicable(op, format!("{from} not present in {part:?}"));
    let duplicate = || inapplicable(op, format!("{to} already present in {part:?}"));
    match part {
        Part::X | Part::Y => {
            let (slot, other) = if part == Part::X {
                (&mut spec.x, &spec.y)
            } else {
                (&mut spec.y, &spec.x)
            };
            if slot.as_ref() != Some(from) {
                return Err(missing());
            }
            if other.as_ref() == Some(&to) {
                return Err(duplicate());
            }
            *slot = Some(to);
        }
        Part::Layer | Part::Grouping => {
            let list = if part == Part::Layer {
                &mut spec.layers
            } else {
                &mut spec.grouping
            };
            if list.contains(&to) {
                return Err(duplicate());
            }
            let slot = list.iter_mut().find(|f| *f == from).ok_or_else(missing)?;
            *slot = to;
        }
        Part::Filter => {
            if !spec.has_filter_on(from) {
                return Err(missing());
            }
            if spec.has_filter_on(&to) {
                return Err(duplicate());
            }
            let aggregated = to.is_aggregated();
            for p in spec.filters.iter_mut().filter(|p| &p.field == from) {
                p.field = to.clone();
                p.aggregated = aggregated;
            }
        }
    }
    Ok(())
}

/// Canonical edit script from `a` to `b`.
///
/// Works on descriptors: filters on the same field with different
/// constants produce no operation. Removals come first in descending key
/// order, then additions in ascending key order, so that
/// `diff_ops(b, a)` is the reversed, element-wise inverse of `diff_ops(a, b)`.
pub fn diff_ops(a: &DataSpecification, b: &DataSpecification) -> Vec<NavOp> {
    let mut removals = Vec::new();
    let mut additions = Vec::new();

    let concrete = |spec: &DataSpecification, d: &FieldExpr| -> Vec<FilterPredicate> {
        spec.filters_on(d).filter(|p| !p.is_placeholder()).cloned().collect()
    };
    let fa = a.filter_descriptors();
    let fb = b.filter_descriptors();
    for d in fa.difference(&fb) {
        removals.push(NavOp::RemoveFilter {
            field: d.clone(),
            predicates: concrete(a, d),
        });
    }
    for d in fb.difference(&fa) {
        additions.push(NavOp::AddFilter {
            field: d.clone(),
            predicates: concrete(b, d),
        });
    }

    for (target, from, to) in [(SelectTarget::X, &a.x, &b.x), (SelectTarget::Y, &a.y, &b.y)] {
        if from != to {
            if let Some(field) = from {
                removals.push(NavOp::RemoveSelectField {
                    target,
                    field: field.clone(),
                });
            }
            if let Some(field) = to {
                additions.push(NavOp::AddSelectField {
                    target,
                    field: field.clone(),
                });
            }
        }
    }

    let la: BTreeSet<_> = a.layers.iter().collect();
    let lb: BTreeSet<_> = b.layers.iter().collect();
    for field in la.difference(&lb) {
        removals.push(NavOp::RemoveSelectField {
            target: SelectTarget::Layer,
            field: (*field).clone(),
        });
    }
    for field in lb.difference(&la) {
        additions.push(NavOp::AddSelectField {
            target: SelectTarget::Layer,
            field: (*field).clone(),
        });
    }

    let ga: BTreeSet<_> = a.grouping.iter().collect();
    let gb: BTreeSet<_> = b.grouping.iter().collect();
    for field in ga.difference(&gb) {
        removals.push(NavOp::RemoveGroupField {
            field: (*field).clone(),
        });
    }
    for field in gb.difference(&ga) {
        additions.push(NavOp::AddGroupField {
            field: (*field).clone(),
        });
    }

    removals.sort_by_key(|op| std::cmp::Reverse(op.order_key()));
    additions.sort_by_key(NavOp::order_key);
    removals.extend(additions);
    removals
}

/// Edit script between two abstract specifications, with descriptor-only
/// filter payloads.
pub fn diff_abstract(a: &AbstractSpec, b: &AbstractSpec) -> Vec<NavOp> {
    diff_ops(&a.embed(), &b.embed())
}

/// Fold a script over a specification.
pub fn replay(spec: &DataSpecification, ops: &[NavOp]) -> Result<DataSpecification, SpecError> {
    ops.iter().try_fold(spec.clone(), |s, op| apply_nav_op(&s, op))
}
