//! Independent reference implementations used by the test suites: exact
//! grid point sets, a direct-semantics interpreter, naive table operations
//! and seeded random generators.

pub mod gen;
pub mod grid;
pub mod interp;
pub mod invariants;
pub mod naive;
pub mod suites;

pub use grid::{Grid, GridSet};
pub use interp::{interpret, Interpretation};
