//! Random Fourier features and Halton quasi-Monte-Carlo features.

use rand_distr::{Distribution, StandardNormal};

use super::normal::inverse_normal_cdf;
use super::{FeatureMap, Method};
use crate::error::{Error, Result};
use crate::grids::GridQuadrature;
use crate::rng;
use crate::scalar::Scalar;

/// Largest dimension the built-in prime table supports.
pub const MAX_HALTON_DIM: usize = 1000;

/// `D` i.i.d. draws from the kernel's spectrum, each with weight `1/D`.
pub fn rff<T: Scalar>(d: usize, count: usize, gamma: T, seed: u64) -> Result<FeatureMap<T>> {
    if d == 0 || count == 0 {
        return Err(Error::Argument("rff needs d >= 1 and D >= 1".into()));
    }
    let mut rng = rng::seeded(seed);
    let points: Vec<T> = (0..count * d).map(|_| T::lit(StandardNormal.sample(&mut rng))).collect();
    let w = T::one() / T::from_usize_lossy(count);
    let grid = GridQuadrature::new(d, points, vec![w; count], format!("rff D={count} seed={seed}"))?;
    FeatureMap::new(grid, Method::Rff, gamma)
}

/// The first `n` primes.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    acc
}

/// Unscrambled Halton point `index` (1-based) in `[0, 1)^d`.
pub fn halton_point(index: u64, bases: &[u64]) -> Vec<f64> {
    bases.iter().map(|&b| radical_inverse(index, b)).collect()
}

/// First `D` Halton points (indices `1..=D`) mapped through `Φ⁻¹`, weight `1/D`.
pub fn qmc_halton<T: Scalar>(d: usize, count: usize, gamma: T) -> Result<FeatureMap<T>> {
    if d == 0 || d > MAX_HALTON_DIM {
        return Err(Error::Argument(format!("Halton dimension {d} outside 1..={MAX_HALTON_DIM}")));
    }
    if count == 0 {
        return Err(Error::Argument("qmc needs D >= 1".into()));
    }
    let bases = primes(d);
    let mut points = Vec::with_capacity(count * d);
    for i in 1..=count as u64 {
        points.extend(halton_point(i, &bases).into_iter().map(|u| T::lit(inverse_normal_cdf(u))));
    }
    let w = T::one() / T::from_usize_lossy(count);
    let grid = GridQuadrature::new(d, points, vec![w; count], format!("qmc halton D={count}"))?;
    FeatureMap::new(grid, Method::Qmc, gamma)
}
