//! Synthetic Gaussian-mixture data.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// `n` rows from an equal-weight mixture of `k` unit-covariance Gaussians whose
/// means are the vertices of a regular simplex with edge `side`.
pub fn gaussian_mixture(n: usize, d: usize, k: usize, side: f64, seed: u64) -> Result<Dataset> {
    if k == 0 || k > d {
        return Err(Error::Argument(format!("mixture needs 1 <= components <= d, got {k} and d={d}")));
    }
    // Scaled basis vectors e_i·side/√2 are pairwise `side` apart.
    let offset = side / std::f64::consts::SQRT_2;
    let mut rng = rng::seeded(seed);
    let rows = (0..n)
        .map(|_| {
            let c = rng.random_range(0..k);
            (0..d)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if j == c { z + offset } else { z }
                })
                .collect()
        })
        .collect();
    Dataset::from_rows(rows)
}

/// The 40-dimensional, 4-component, edge-2 mixture used for reweighting checks.
pub fn speech_like_mixture(n: usize, seed: u64) -> Result<Dataset> {
    gaussian_mixture(n, 40, 4, 2.0, seed)
}
