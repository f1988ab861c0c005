//! Weight-proportional subsampling of nonnegative grids.
//!
//! Draws are i.i.d. with replacement; every draw carries weight `1/D` and
//! repeated draws of the same point are merged, so the result is an unbiased
//! estimate of the parent rule with at most `D` points.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::GridQuadrature;
use crate::error::{Error, Result};
use crate::quad1d::QuadratureRule1D;
use crate::rng;
use crate::scalar::Scalar;

fn categorical<T: Scalar>(weights: &[T]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights.iter().map(|w| w.to_f64_lossy()))
        .map_err(|e| Error::Contract(format!("cannot sample from weights: {e}")))
}

pub fn subsample_grid<T: Scalar>(g: &GridQuadrature<T>, count: usize, seed: u64) -> Result<GridQuadrature<T>> {
    if !g.nonnegative() {
        return Err(Error::Contract("subsampling requires nonnegative weights".into()));
    }
    if count == 0 {
        return Err(Error::Argument("subsample size must be at least 1".into()));
    }
    let dist = categorical(g.weights())?;
    let mut rng = rng::seeded(seed);
    let mut hits = vec![0usize; g.len()];
    let mut order = Vec::new();
    for _ in 0..count {
        let i = dist.sample(&mut rng);
        if hits[i] == 0 {
            order.push(i);
        }
        hits[i] += 1;
    }
    let inv = T::one() / T::from_usize_lossy(count);
    let mut points = Vec::with_capacity(order.len() * g.dim());
    let mut weights = Vec::with_capacity(order.len());
    for i in order {
        points.extend_from_slice(g.point(i));
        weights.push(T::from_usize_lossy(hits[i]) * inv);
    }
    GridQuadrature::new(g.dim(), points, weights, format!("subsampled D={count} seed={seed} of [{}]", g.provenance()))
}

/// Subsample of the `d`-fold tensor grid of `rule` without materializing it.
///
/// Each coordinate is drawn independently from the one-dimensional weights,
/// which is the same distribution as drawing tensor points by product weight.
pub fn subsample_dense<T: Scalar>(rule: &QuadratureRule1D<T>, d: usize, count: usize, seed: u64) -> Result<GridQuadrature<T>> {
    if d == 0 || count == 0 {
        return Err(Error::Argument("subsample needs d >= 1 and D >= 1".into()));
    }
    let dist = categorical(rule.weights())?;
    let mut rng = rng::seeded(seed);
    let inv = T::one() / T::from_usize_lossy(count);
    let draws = (0..count).map(|_| {
        let p: Vec<T> = (0..d).map(|_| rule.nodes()[dist.sample(&mut rng)]).collect();
        (p, inv)
    });
    let draws: Vec<_> = draws.collect();
    GridQuadrature::from_merged(d, draws, format!("subsampled dense L={} d={d} D={count} seed={seed}", rule.len()))
}
