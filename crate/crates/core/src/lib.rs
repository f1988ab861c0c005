//! Quadrature-based feature maps for shift-invariant kernels.
//!
//! A shift-invariant kernel `k(x, y) = k(x - y)` is the Fourier transform of its
//! spectral density, so any quadrature rule `{(ω_i, a_i)}` for that density gives
//! an approximation `k̃(u) = Σ a_i cos(ω_iᵀ u)` and, when every `a_i ≥ 0`, an
//! explicit feature map `z(x) = [√a_i cos(ω_iᵀx), √a_i sin(ω_iᵀx)]`.
//!
//! The crate builds such rules deterministically (Gauss-Hermite tensor grids,
//! Smolyak sparse grids, weight-proportional subsamples, NNLS moment-matching and
//! data-reweighted rules), provides random Fourier and Halton baselines, and
//! measures how well each one reproduces the exact kernel.
//!
//! All numeric types are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom of this file name the common instantiations.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod featuremaps;
pub mod grids;
pub mod harness;
pub mod kernels;
pub mod quad1d;
pub mod rng;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use featuremaps::{AnovaFeatureMap, FeatureMap, KernelApprox, Method};
pub use grids::{GridQuadrature, MultiIndex};
pub use kernels::{AnovaKernel, GaussianKernel, ShiftInvariantKernel};
pub use quad1d::{QuadratureRule1D, SymTriDiag};
pub use scalar::Scalar;
pub use solvers::NnlsSolution;

pub type QuadratureRule1D64 = QuadratureRule1D<f64>;
pub type QuadratureRule1D32 = QuadratureRule1D<f32>;
pub type GridQuadrature64 = GridQuadrature<f64>;
pub type GridQuadrature32 = GridQuadrature<f32>;
pub type FeatureMap64 = FeatureMap<f64>;
pub type FeatureMap32 = FeatureMap<f32>;
pub type AnovaFeatureMap64 = AnovaFeatureMap<f64>;
pub type GaussianKernel64 = GaussianKernel<f64>;
pub type AnovaKernel64 = AnovaKernel<f64>;
pub type NnlsSolution64 = NnlsSolution<f64>;
