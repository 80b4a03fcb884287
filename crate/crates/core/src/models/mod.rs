//! IRs for arithmetic formulas and layered algebraic branching programs,
//! together with structural validators for the model classes the crate
//! works with: syntactic multilinear, read-once, oblivious/ROABP,
//! strict-interval and interval-formula restrictions.

mod abp;
mod census;
mod formula;

pub use abp::{Abp, Edge, EdgeLabel, RoabpReport, StrictIntervalReport};
pub use census::{gate_census, GateCensus};
pub use formula::{Formula, Node};

/// Verdict of a structural check, with a human-readable witness of the
/// violation when the verdict is negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructReport {
    pub verdict: bool,
    pub witness: Option<String>,
}

impl StructReport {
    pub fn ok() -> Self {
        Self {
            verdict: true,
            witness: None,
        }
    }

    pub fn fail(witness: impl Into<String>) -> Self {
        Self {
            verdict: false,
            witness: Some(witness.into()),
        }
    }
}

/// Inclusive index span `[min, max]`, or `None` for a variable-free part.
pub type Span = Option<(usize, usize)>;

pub(crate) fn span_union(a: Span, b: Span) -> Span {
    match (a, b) {
        (None, s) | (s, None) => s,
        (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
    }
}

pub(crate) fn spans_overlap(a: Span, b: Span) -> bool {
    match (a, b) {
        (Some((a0, a1)), Some((b0, b1))) => a0 <= b1 && b0 <= a1,
        _ => false,
    }
}
