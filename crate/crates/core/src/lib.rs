//! Interval-based DatalogMTL: temporal algebra, language, reasoning engine,
//! SQL rewriting, CSV ingestion and complexity reductions.

pub mod engine;
pub mod ingest;
pub mod language;
pub mod oracle;
pub mod reductions;
pub mod sqlgen;
pub mod temporal;

pub use engine::*;
pub use language::*;
pub use temporal::*;
