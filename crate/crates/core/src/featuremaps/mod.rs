//! Quadrature rules packaged as kernel approximations and explicit feature maps.

mod anova;
mod baselines;
mod fast;
pub mod normal;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grids::{GridJson, GridQuadrature};
use crate::scalar::{dot, Scalar};

pub use anova::{anova_compose, AnovaFeatureMap};
pub use baselines::{halton_point, primes, qmc_halton, radical_inverse, rff, MAX_HALTON_DIM};
pub use fast::{embed_grid_fast, FastEmbedding, MAX_DISTINCT_VALUES};

/// How a feature map's quadrature was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rff,
    Qmc,
    Dense,
    Sparse,
    Subsampled,
    #[serde(alias = "poly_exact")]
    PolyExact,
    Reweighted,
    Anova,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Rff,
        Method::Qmc,
        Method::Dense,
        Method::Sparse,
        Method::Subsampled,
        Method::PolyExact,
        Method::Reweighted,
        Method::Anova,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rff => "rff",
            Method::Qmc => "qmc",
            Method::Dense => "dense",
            Method::Sparse => "sparse",
            Method::Subsampled => "subsampled",
            Method::PolyExact => "poly-exact",
            Method::Reweighted => "reweighted",
            Method::Anova => "anova",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| Error::Argument(format!("unknown method '{s}'")))
    }
}

/// Anything that approximates a shift-invariant kernel through `k̃(x - y)`.
pub trait KernelApprox<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn approx_diff(&self, u: &[T]) -> T;

    /// `k̃(r v)` for each `r` in `radii`.
    fn approx_along(&self, direction: &[T], radii: &[T]) -> Vec<T> {
        radii
            .iter()
            .map(|&r| {
                let u: Vec<T> = direction.iter().map(|&v| v * r).collect();
                self.approx_diff(&u)
            })
            .collect()
    }

    fn approx_kernel(&self, x: &[T], y: &[T]) -> Result<T> {
        for v in [x, y] {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
            }
        }
        let u: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        Ok(self.approx_diff(&u))
    }
}

/// A quadrature rule for the unit spectrum plus the bandwidth that rescales
/// its frequencies, `ω ← √(2γ) ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    grid: GridQuadrature<T>,
    method: Method,
    gamma: T,
    /// Scaled frequencies, row-major `D × d`.
    freqs: Vec<T>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct FeatureMapJson {
    pub d: usize,
    #[serde(rename = "D")]
    pub count: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub nonnegative: bool,
    pub provenance: String,
    pub method: Method,
    pub gamma: f64,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(grid: GridQuadrature<T>, method: Method, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Argument(format!("bandwidth gamma must be positive, got {gamma}")));
        }
        let scale = (T::lit(2.0) * gamma).sqrt();
        let freqs = grid.points_flat().iter().map(|&w| w * scale).collect();
        Ok(Self { grid, method, gamma, freqs })
    }

    pub fn grid(&self) -> &GridQuadrature<T> {
        &self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Number of quadrature points `D` (the embedding has `2D` columns).
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn frequency(&self, i: usize) -> &[T] {
        let d = self.grid.dim();
        &self.freqs[i * d..(i + 1) * d]
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &[T]> {
        self.freqs.chunks_exact(self.grid.dim())
    }

    /// `[√a_i cos(ω_iᵀx)]_i ⧺ [√a_i sin(ω_iᵀx)]_i`; requires nonnegative weights.
    pub fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        let roots = self.sqrt_weights()?;
        if x.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch { expected: self.grid.dim(), got: x.len() });
        }
        let proj: Vec<T> = self.frequencies().map(|f| dot(f, x)).collect();
        Ok(assemble(&roots, &proj))
    }

    pub(crate) fn sqrt_weights(&self) -> Result<Vec<T>> {
        if !self.grid.nonnegative() {
            let min_weight = self.grid.min_weight().map_or(0.0, |w| w.to_f64_lossy());
            return Err(Error::UnsupportedEmbedding { min_weight });
        }
        Ok(self.grid.weights().iter().map(|w| w.sqrt()).collect())
    }

    pub(crate) fn to_json_repr(&self) -> FeatureMapJson {
        let g: GridJson = self.grid.to_json_repr();
        FeatureMapJson {
            d: g.d,
            count: g.count,
            points: g.points,
            weights: g.weights,
            nonnegative: g.nonnegative,
            provenance: g.provenance,
            method: self.method,
            gamma: self.gamma.to_f64_lossy(),
        }
    }

    pub(crate) fn from_json_repr(raw: FeatureMapJson) -> Result<Self> {
        let grid = GridQuadrature::from_json_repr(GridJson {
            d: raw.d,
            count: raw.count,
            points: raw.points,
            weights: raw.weights,
            nonnegative: raw.nonnegative,
            provenance: raw.provenance,
        })?;
        Self::new(grid, raw.method, T::lit(raw.gamma))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json_repr()).expect("plain data serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_repr(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn assemble<T: Scalar>(roots: &[T], proj: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * roots.len());
    out.extend(roots.iter().zip(proj).map(|(&r, &p)| r * p.cos()));
    out.extend(roots.iter().zip(proj).map(|(&r, &p)| r * p.sin()));
    out
}

impl<T: Scalar> KernelApprox<T> for FeatureMap<T> {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn approx_diff(&self, u: &[T]) -> T {
        self.frequencies()
            .zip(self.grid.weights())
            .fold(T::zero(), |acc, (f, &a)| acc + a * dot(f, u).cos())
    }

    fn approx_along(&self, direction: &[T], radii: &[T]) -> Vec<T> {
        let proj: Vec<T> = self.frequencies().map(|f| dot(f, direction)).collect();
        radii
            .iter()
            .map(|&r| {
                proj.iter()
                    .zip(self.grid.weights())
                    .fold(T::zero(), |acc, (&p, &a)| acc + a * (p * r).cos())
            })
            .collect()
    }
}

/// Free-function form of [`KernelApprox::approx_kernel`].
pub fn approx_kernel<T: Scalar, A: KernelApprox<T> + ?Sized>(fm: &A, x: &[T], y: &[T]) -> Result<T> {
    fm.approx_kernel(x, y)
}

/// Free-function form of [`FeatureMap::embed`].
pub fn embed<T: Scalar>(fm: &FeatureMap<T>, x: &[T]) -> Result<Vec<T>> {
    fm.embed(x)
}
