pub mod error;
pub mod ipm;
pub mod isolation;
pub mod lp;
pub mod matching;
pub mod scalar;
pub mod sdd;
pub mod stream;
pub mod vertex_cover;
