//! Smolyak sparse grids built from Gauss-Hermite rules of size `2^m`.
//!
//! With `G^L` the `L`-point rule and `Δ_0 = G^1`, `Δ_m = G^{2^m} - G^{2^{m-1}}`,
//! the level-`A` grid is `Σ_{𝟏ᵀ𝐦 ≤ A} Δ_{m_1} ⊗ … ⊗ Δ_{m_d}`. Hermite rules of
//! different sizes do not nest, so points coincide only by accident (the origin
//! and `±1` are shared between `G^1`, `G^2` and the higher differences). Merged
//! weights that cancel exactly are removed.

use super::{merge_points, GridQuadrature, MultiIndex, DEFAULT_POINT_CAP};
use crate::error::{Error, Result};
use crate::quad1d::{gauss_hermite, MAX_GAUSS_HERMITE_POINTS};
use crate::scalar::Scalar;

/// Relative size below which a merged weight counts as an exact cancellation.
const CANCELLATION_TOL: f64 = 1e-12;

/// Signed one-dimensional difference rule `Δ_m` as `(node, weight)` pairs.
pub fn sparse_level_rule<T: Scalar>(level: u32) -> Result<Vec<(T, T)>> {
    let size = |m: u32| 1usize << m;
    if level >= usize::BITS || size(level) > MAX_GAUSS_HERMITE_POINTS {
        return Err(Error::Argument(format!("sparse grid level {level} needs more than {MAX_GAUSS_HERMITE_POINTS} nodes")));
    }
    let fine = gauss_hermite::<T>(size(level))?;
    let mut out: Vec<(T, T)> = fine.nodes().iter().copied().zip(fine.weights().iter().copied()).collect();
    if level > 0 {
        let coarse = gauss_hermite::<T>(size(level - 1))?;
        for (&x, &w) in coarse.nodes().iter().zip(coarse.weights()) {
            match out.iter_mut().find(|(y, _)| *y == x) {
                Some(slot) => slot.1 = slot.1 - w,
                None => out.push((x, -w)),
            }
        }
        out.retain(|(_, w)| *w != T::zero());
    }
    Ok(out)
}

pub fn sparse_grid<T: Scalar>(level: u32, d: usize) -> Result<GridQuadrature<T>> {
    sparse_grid_with_cap(level, d, DEFAULT_POINT_CAP)
}

pub fn sparse_grid_with_cap<T: Scalar>(level: u32, d: usize, cap: u64) -> Result<GridQuadrature<T>> {
    if d == 0 {
        return Err(Error::Argument("sparse grid dimension must be positive".into()));
    }
    let deltas = (0..=level).map(sparse_level_rule::<T>).collect::<Result<Vec<_>>>()?;
    let indices = MultiIndex::all_up_to(d, level);

    let mut enumerated: u64 = 0;
    for m in &indices {
        let terms = m
            .entries()
            .iter()
            .try_fold(1u64, |acc, &mi| acc.checked_mul(deltas[mi as usize].len() as u64));
        enumerated = terms.and_then(|t| enumerated.checked_add(t)).unwrap_or(u64::MAX);
        if enumerated > cap {
            return Err(Error::SizeLimit {
                what: format!("sparse grid terms (A={level}, d={d})"),
                count: format!(">{cap}"),
                cap,
            });
        }
    }

    let mut items = Vec::with_capacity(enumerated as usize);
    for m in &indices {
        let support = m.support();
        let sizes: Vec<usize> = support.iter().map(|&(_, lvl)| deltas[lvl as usize].len()).collect();
        let terms: usize = sizes.iter().product();
        for flat in 0..terms {
            let mut rem = flat;
            let mut point = vec![T::zero(); d];
            let mut w = T::one();
            for (k, &(coord, lvl)) in support.iter().enumerate() {
                let (x, a) = deltas[lvl as usize][rem % sizes[k]];
                rem /= sizes[k];
                point[coord] = x;
                w = w * a;
            }
            items.push((point, w));
        }
    }

    let tol = T::lit(CANCELLATION_TOL);
    let merged = merge_points(d, items)?;
    let mut points = Vec::with_capacity(merged.len() * d);
    let mut weights = Vec::with_capacity(merged.len());
    for (p, w, abs_sum) in merged {
        if w.abs() > tol * abs_sum {
            points.extend(p);
            weights.push(w);
        }
    }
    GridQuadrature::new(d, points, weights, format!("sparse A={level} d={d}"))
}
