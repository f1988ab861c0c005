use super::{GridQuadrature, DEFAULT_POINT_CAP};
use crate::error::{Error, Result};
use crate::quad1d::{gauss_hermite, QuadratureRule1D};
use crate::scalar::Scalar;

/// Tensor product of one rule per coordinate; weights are products of the
/// per-coordinate weights. The last coordinate varies fastest.
pub fn tensor_grid<T: Scalar>(rules: &[&QuadratureRule1D<T>], cap: u64) -> Result<GridQuadrature<T>> {
    let dim = rules.len();
    if dim == 0 {
        return Err(Error::Argument("tensor grid needs at least one coordinate".into()));
    }
    let count = rules
        .iter()
        .try_fold(1u64, |acc, r| acc.checked_mul(r.len() as u64))
        .filter(|&c| c <= cap);
    let Some(count) = count else {
        let desc = rules.iter().map(|r| r.len().to_string()).collect::<Vec<_>>().join("·");
        return Err(Error::SizeLimit { what: "tensor grid points".into(), count: desc, cap });
    };
    let count = count as usize;
    let mut points = Vec::with_capacity(count * dim);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; dim];
    for _ in 0..count {
        let mut w = T::one();
        for (j, r) in rules.iter().enumerate() {
            points.push(r.nodes()[idx[j]]);
            w = w * r.weights()[idx[j]];
        }
        weights.push(w);
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < rules[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    GridQuadrature::new(dim, points, weights, "tensor")
}

/// `L^d`-point tensor grid of the `L`-point Gauss-Hermite rule.
pub fn dense_grid<T: Scalar>(l: usize, d: usize) -> Result<GridQuadrature<T>> {
    dense_grid_with_cap(l, d, DEFAULT_POINT_CAP)
}

pub fn dense_grid_with_cap<T: Scalar>(l: usize, d: usize, cap: u64) -> Result<GridQuadrature<T>> {
    if d == 0 {
        return Err(Error::Argument("dense grid dimension must be positive".into()));
    }
    let fits = u32::try_from(d)
        .ok()
        .and_then(|d| (l as u64).checked_pow(d))
        .is_some_and(|c| c <= cap);
    if !fits {
        return Err(Error::SizeLimit { what: "dense grid points L^d".into(), count: format!("{l}^{d}"), cap });
    }
    let rule = gauss_hermite::<T>(l)?;
    let rules = vec![&rule; d];
    let mut g = tensor_grid(&rules, cap)?;
    g.set_provenance(format!("dense L={l} d={d}"));
    Ok(g)
}
