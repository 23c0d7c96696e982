pub mod eval;
pub mod gen;
pub mod infer;
pub mod train;
