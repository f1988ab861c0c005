//! Exact kernels: the Gaussian kernel and sparse ANOVA sums of Gaussian products.

use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// A kernel that depends only on the displacement `u = x - y`.
pub trait ShiftInvariantKernel<T: Scalar>: Sync {
    fn eval_diff(&self, u: &[T]) -> T;

    fn eval(&self, x: &[T], y: &[T]) -> T {
        let u: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        self.eval_diff(&u)
    }
}

/// `k(u) = exp(-γ ‖u‖²)`. With `γ = 1/2` the spectral density is exactly the
/// standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel<T> {
    gamma: T,
}

impl<T: Scalar> GaussianKernel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Argument(format!("bandwidth gamma must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// The properly scaled kernel `γ = 1/2`.
    pub fn unit() -> Self {
        Self { gamma: T::lit(0.5) }
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Factor mapping standard-normal frequencies onto this kernel's spectrum.
    pub fn frequency_scale(&self) -> T {
        (T::lit(2.0) * self.gamma).sqrt()
    }

    /// One-dimensional factor `exp(-γ t²)`.
    #[inline]
    pub fn eval_1d(&self, t: T) -> T {
        (-self.gamma * t * t).exp()
    }
}

impl<T: Scalar> ShiftInvariantKernel<T> for GaussianKernel<T> {
    fn eval_diff(&self, u: &[T]) -> T {
        eval_gaussian(self, u)
    }
}

pub fn eval_gaussian<T: Scalar>(k: &GaussianKernel<T>, u: &[T]) -> T {
    let sq: T = u.iter().map(|&v| v * v).sum();
    (-k.gamma * sq).exp()
}

/// Hypergraph statistics of an ANOVA kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnovaStats {
    /// `max |S|`
    pub rank: usize,
    /// `max_i #{S ∋ i}`
    pub degree: usize,
    /// `|𝒮|`
    pub size: usize,
}

/// `k(x, y) = Σ_{S ∈ 𝒮} Π_{i ∈ S} k₁(x_i - y_i)` with a Gaussian `k₁`.
///
/// Subsets are stored 0-based and sorted; the JSON form is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AnovaKernel<T> {
    dim: usize,
    subsets: Vec<Vec<usize>>,
    base: GaussianKernel<T>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnovaJson {
    d: usize,
    gamma: f64,
    subsets: Vec<Vec<usize>>,
}

impl<T: Scalar> AnovaKernel<T> {
    /// Builds a kernel from 0-based index sets.
    pub fn new(dim: usize, subsets: Vec<Vec<usize>>, base: GaussianKernel<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("ANOVA dimension must be positive".into()));
        }
        if subsets.is_empty() {
            return Err(Error::Argument("ANOVA kernel needs at least one subset".into()));
        }
        let mut clean = Vec::with_capacity(subsets.len());
        for (n, mut s) in subsets.into_iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Argument(format!("ANOVA subset {n} is empty")));
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Argument(format!("ANOVA subset {n} repeats an index")));
            }
            if let Some(&bad) = s.iter().find(|&&i| i >= dim) {
                return Err(Error::Argument(format!(
                    "ANOVA subset {n} has index {} outside 1..={dim}",
                    bad + 1
                )));
            }
            clean.push(s);
        }
        Ok(Self { dim, subsets: clean, base })
    }

    /// `m` random subsets of `rank` distinct indices each.
    pub fn random(dim: usize, m: usize, rank: usize, base: GaussianKernel<T>, seed: u64) -> Result<Self> {
        if rank == 0 || rank > dim {
            return Err(Error::Argument(format!("subset size {rank} not in 1..={dim}")));
        }
        let mut rng = rng::seeded(seed);
        let subsets = (0..m).map(|_| sample(&mut rng, dim, rank).into_vec()).collect();
        Self::new(dim, subsets, base)
    }

    /// Every `patch × patch` window of a `side × side` image, row-major pixels.
    pub fn image_patches(side: usize, patch: usize, base: GaussianKernel<T>) -> Result<Self> {
        if patch == 0 || patch > side {
            return Err(Error::Argument(format!("patch {patch} does not fit image side {side}")));
        }
        let mut subsets = Vec::new();
        for r0 in 0..=side - patch {
            for c0 in 0..=side - patch {
                let s = (r0..r0 + patch)
                    .flat_map(|r| (c0..c0 + patch).map(move |c| r * side + c))
                    .collect();
                subsets.push(s);
            }
        }
        Self::new(side * side, subsets, base)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn base(&self) -> &GaussianKernel<T> {
        &self.base
    }

    pub fn stats(&self) -> AnovaStats {
        anova_stats(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: AnovaJson = serde_json::from_str(s)?;
        let subsets = raw
            .subsets
            .into_iter()
            .enumerate()
            .map(|(n, s)| {
                s.into_iter()
                    .map(|i| {
                        i.checked_sub(1).ok_or_else(|| {
                            Error::Argument(format!("ANOVA subset {n} uses index 0; indices are 1-based"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.d, subsets, GaussianKernel::new(T::lit(raw.gamma))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let raw = AnovaJson {
            d: self.dim,
            gamma: self.base.gamma.to_f64_lossy(),
            subsets: self
                .subsets
                .iter()
                .map(|s| s.iter().map(|i| i + 1).collect())
                .collect(),
        };
        serde_json::to_string(&raw).expect("plain data serializes")
    }
}

impl<T: Scalar> ShiftInvariantKernel<T> for AnovaKernel<T> {
    fn eval_diff(&self, u: &[T]) -> T {
        self.subsets
            .iter()
            .map(|s| s.iter().fold(T::one(), |acc, &i| acc * self.base.eval_1d(u[i])))
            .sum()
    }
}

/// Checked form of the ANOVA evaluation.
pub fn eval_anova<T: Scalar>(k: &AnovaKernel<T>, x: &[T], y: &[T]) -> Result<T> {
    for v in [x, y] {
        if v.len() != k.dim {
            return Err(Error::DimensionMismatch { expected: k.dim, got: v.len() });
        }
    }
    Ok(k.eval(x, y))
}

pub fn anova_stats<T>(k: &AnovaKernel<T>) -> AnovaStats {
    let mut membership = vec![0usize; k.dim];
    for s in &k.subsets {
        for &i in s {
            membership[i] += 1;
        }
    }
    AnovaStats {
        rank: k.subsets.iter().map(Vec::len).max().unwrap_or(0),
        degree: membership.into_iter().max().unwrap_or(0),
        size: k.subsets.len(),
    }
}
