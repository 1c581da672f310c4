//! Surface syntax, AST, normalisation and static analyses.

pub mod analysis;
pub mod ast;
pub mod normalize;
pub mod parser;

pub use analysis::*;
pub use ast::*;
pub use normalize::*;
pub use parser::*;
