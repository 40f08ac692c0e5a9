use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::futaki::FutakiReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("malformed polytope: {0}")]
    Malformed(String),
    #[error("facet {index} has non-primitive normal {normal:?}")]
    NonPrimitiveNormal { index: usize, normal: Vec<i64> },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {0:?} is not in the open interior of the polytope")]
    OutsideInterior(Vec<f64>),
    #[error("quadrature order {0} is outside the supported range 1..=60")]
    UnsupportedOrder(usize),
    #[error("interior grid is empty for margin {0}")]
    EmptyGrid(f64),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("query {0:?} is outside the sample hull")]
    OutsideSampleHull(Vec<f64>),
    #[error("polytope is not reflexive (all supports must equal 1)")]
    NotReflexive,
    #[error("polytope is not Delzant")]
    NotDelzant,
    #[error("no nontrivial compactly supported deformation exists in dimension 1")]
    NoDeformationInDimensionOne,
    #[error("support box is too close to the boundary: {0}")]
    SupportNearBoundary(String),
    #[error("background is not a soliton on the support box (residual {0:e})")]
    NotSoliton(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("soliton vector field solver did not converge after {} iterations", .0.iterations.len())]
    NoConvergence(Box<FutakiReport>),
}
