pub mod lang;
pub mod math;
pub mod theory;
pub mod vcgen;
pub mod prover;
pub mod pipeline;
