//! Finite-difference time-domain solver for fully anisotropic electric and
//! magnetic media on a staggered lattice.
//!
//! Materials are piecewise constant per primary cell. D/E live on the
//! low-side faces of each cell and B/H on its low-side edges. Two
//! constitutive inversion schemes are provided: a first-order same-cell
//! inversion and a second-order averaged inversion whose global material
//! matrices are symmetric positive definite, which makes the leapfrog
//! neutrally stable under the spectral-radius time-step bound.
//!
//! All arithmetic is in normalized units (c = ε0 = μ0 = 1).

// `!(x > 0.0)` rejects NaN along with non-positive values; 3×3 tensor
// algebra reads best with index loops.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod boundary;
pub mod cloak;
pub mod lattice;
pub mod materials;
pub mod solver;
pub mod source;

mod error;

pub use error::{Error, Result};
pub use lattice::{Axis, AxisBoundary, BoundaryKind, Component, FieldKind, FieldSet, YeeGrid};
pub use materials::{MaterialGrid, Tensor3};
pub use solver::{SchemeKind, Simulation};
