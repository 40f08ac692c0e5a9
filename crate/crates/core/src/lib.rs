//! Torus-invariant almost-Kähler metrics on Delzant polytopes.
//!
//! A metric of involutive type is carried entirely by the symmetric matrix
//! field `H(z)` on the moment polytope. This crate evaluates its Chern
//! curvature, the modified Chern scalar curvature attached to an affine
//! Hamiltonian potential `f(z) = a·z + a₀`, the Donaldson–Futaki invariant of
//! the polytope, and builds compactly supported deformations `H + tD` that
//! preserve the soliton equation while breaking integrability.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x < y)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod curvature;
pub mod deform;
mod error;
pub mod field;
pub mod futaki;
pub mod linalg;
pub(crate) mod math;
pub mod polytope;
pub mod quadrature;
pub mod solve;

pub use curvature::{CurvatureSample, SolitonVector};
pub use error::{Error, Result};
pub use field::{FieldJet, MetricField, Provenance, SharedField};
pub use polytope::{DelzantPolytope, Facet, UnimodularMap};
pub use quadrature::QuadratureScheme;
