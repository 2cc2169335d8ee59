pub mod combinators;
pub mod eval;
pub mod goaltype;
pub mod graph;
pub mod json;
pub mod prover;
pub mod psgraph;
pub mod protocol;
pub mod cli;
