//! Temporal tables, the materialisation engine and the reference chase.

mod chase;
mod eval;
mod table;

use thiserror::Error;

use crate::language::AnalysisError;
use crate::temporal::TemporalError;

pub use chase::{chase, default_cap, EvalStatus};
pub use eval::{
    answer_via_reduction, answers, apply_rule, apply_shape, certain_answer, eval_nonrecursive, CanonicalModel,
};
pub use table::{coalesce_table, project, temporal_join, union_tables, TemporalTable, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("temporal ordering violated at row {row}")]
    Toa { row: usize },
    #[error("table is not coalesced")]
    NotCoalesced,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("rule is not in normal form: {0}")]
    NotNormal(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{pred}` used with arity {found}, expected {expected}")]
    Arity { pred: String, expected: usize, found: usize },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
}
