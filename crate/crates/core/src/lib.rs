//! Correlation clustering on complete signed graphs through a multiplicative
//! weights covering LP over open triangles and pivot-based rounding.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod hash;
pub mod logspace;
pub mod lp;
pub mod oracles;
pub(crate) mod par;
pub mod pipeline;
pub mod rounding;
pub mod triangles;
