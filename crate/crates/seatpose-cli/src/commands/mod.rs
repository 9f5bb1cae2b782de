pub mod eval;
pub mod infer;
pub mod report;
pub mod simulate;
pub mod sync;
pub mod train;
