//! Multi-dimensional quadrature point sets for the standard normal spectrum.

mod dense;
mod exactness;
mod sparse;
mod subsample;

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use dense::{dense_grid, dense_grid_with_cap, tensor_grid};
pub use exactness::{
    analytic_normal_moment, exactness_residual, exactness_residual_with_cap, MomentSystem,
};
pub use sparse::{sparse_grid, sparse_grid_with_cap, sparse_level_rule};
pub use subsample::{subsample_dense, subsample_grid};

/// Default cap on constructed grid points.
pub const DEFAULT_POINT_CAP: u64 = 10_000_000;
/// Default cap on moment constraints `C(d + R, d)`.
pub const DEFAULT_CONSTRAINT_CAP: u64 = 1_000_000;
/// Coordinates closer than this are treated as the same node when merging.
pub const MERGE_RESOLUTION: f64 = 1e-12;

/// Point set `ω_i ∈ ℝᵈ` with weights `a_i`, approximating `∫ Λ(ω) f(ω) dω` by
/// `Σ a_i f(ω_i)` for the standard normal `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridQuadrature<T> {
    dim: usize,
    /// Row-major `D × d`.
    points: Vec<T>,
    weights: Vec<T>,
    provenance: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct GridJson {
    pub d: usize,
    #[serde(rename = "D")]
    pub count: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub nonnegative: bool,
    pub provenance: String,
}

impl<T: Scalar> GridQuadrature<T> {
    /// Wraps row-major points and weights. Does not normalize or merge.
    pub fn new(dim: usize, points: Vec<T>, weights: Vec<T>, provenance: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("grid dimension must be positive".into()));
        }
        if points.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch { expected: weights.len() * dim, got: points.len() });
        }
        if points.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::Argument("grid points and weights must be finite".into()));
        }
        Ok(Self { dim, points, weights, provenance: provenance.into() })
    }

    /// Builds a grid from `(point, weight)` pairs, summing the weights of
    /// points that coincide to [`MERGE_RESOLUTION`]. First-seen order is kept.
    pub fn from_merged<I>(dim: usize, items: I, provenance: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<T>, T)>,
    {
        let merged = merge_points(dim, items)?;
        let mut points = Vec::with_capacity(merged.len() * dim);
        let mut weights = Vec::with_capacity(merged.len());
        for (p, w, _) in merged {
            points.extend(p);
            weights.push(w);
        }
        Self::new(dim, points, weights, provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points `D`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn points_flat(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn set_provenance(&mut self, provenance: impl Into<String>) {
        self.provenance = provenance.into();
    }

    pub fn weight_sum(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn min_weight(&self) -> Option<T> {
        self.weights.iter().copied().reduce(T::min)
    }

    /// True iff every weight is `>= 0`.
    pub fn nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= T::zero())
    }

    /// Whether two rows coincide to [`MERGE_RESOLUTION`].
    pub fn has_duplicates(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.len());
        self.points().any(|p| !seen.insert(merge_key(p)))
    }

    /// Drops points whose weight is not strictly positive.
    pub fn retain_positive(&self) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (p, &w) in self.points().zip(&self.weights) {
            if w > T::zero() {
                points.extend_from_slice(p);
                weights.push(w);
            }
        }
        Self { dim: self.dim, points, weights, provenance: self.provenance.clone() }
    }

    /// Same points with new weights.
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.dim, self.points.clone(), weights, self.provenance.clone())
    }

    /// Distinct values taken by each coordinate (sorted), if every coordinate
    /// has at most `cap` of them.
    pub fn coordinate_values(&self, cap: usize) -> Option<Vec<Vec<T>>> {
        let mut out = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mut vals: Vec<T> = Vec::new();
            for p in self.points() {
                let v = p[j];
                if !vals.contains(&v) {
                    if vals.len() == cap {
                        return None;
                    }
                    vals.push(v);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            out.push(vals);
        }
        Some(out)
    }

    pub(crate) fn to_json_repr(&self) -> GridJson {
        GridJson {
            d: self.dim,
            count: self.len(),
            points: self.points().map(|p| p.iter().map(|v| v.to_f64_lossy()).collect()).collect(),
            weights: self.weights.iter().map(|v| v.to_f64_lossy()).collect(),
            nonnegative: self.nonnegative(),
            provenance: self.provenance.clone(),
        }
    }

    pub(crate) fn from_json_repr(raw: GridJson) -> Result<Self> {
        if raw.count != raw.weights.len() || raw.count != raw.points.len() {
            return Err(Error::Argument(format!(
                "grid JSON declares D = {} but has {} points and {} weights",
                raw.count,
                raw.points.len(),
                raw.weights.len()
            )));
        }
        let mut points = Vec::with_capacity(raw.count * raw.d);
        for p in &raw.points {
            if p.len() != raw.d {
                return Err(Error::DimensionMismatch { expected: raw.d, got: p.len() });
            }
            points.extend(p.iter().map(|&v| T::lit(v)));
        }
        let grid = Self::new(raw.d, points, raw.weights.iter().map(|&v| T::lit(v)).collect(), raw.provenance)?;
        if grid.nonnegative() != raw.nonnegative {
            return Err(Error::Argument("grid JSON 'nonnegative' flag disagrees with weights".into()));
        }
        Ok(grid)
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

/// A multi-index `𝐦 ∈ ℕᵈ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `𝟏ᵀ𝐦`
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `(coordinate, exponent)` pairs of the non-zero entries.
    pub fn support(&self) -> Vec<(usize, u32)> {
        self.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect()
    }

    /// Every multi-index in `ℕᵈ` with `𝟏ᵀ𝐦 <= total`, graded then reverse-lexicographic.
    pub fn all_up_to(dim: usize, total: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for t in 0..=total {
            let mut cur = vec![0u32; dim];
            compositions(&mut cur, 0, t, &mut |m| out.push(MultiIndex(m.to_vec())));
        }
        out
    }
}

fn compositions(cur: &mut [u32], pos: usize, remaining: u32, f: &mut dyn FnMut(&[u32])) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        f(cur);
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        compositions(cur, pos + 1, remaining - e, f);
    }
    cur[pos] = 0;
}

/// `C(n, k)` if it fits in `u64`.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

pub(crate) fn merge_key<T: Scalar>(p: &[T]) -> Vec<i64> {
    p.iter()
        .map(|v| (v.to_f64_lossy() / MERGE_RESOLUTION).round() as i64)
        .collect()
}

/// Merged `(point, weight, Σ|contribution|)` triples in first-seen order.
pub(crate) fn merge_points<T, I>(dim: usize, items: I) -> Result<Vec<(Vec<T>, T, T)>>
where
    T: Scalar,
    I: IntoIterator<Item = (Vec<T>, T)>,
{
    let mut map: IndexMap<Vec<i64>, (Vec<T>, T, T)> = IndexMap::new();
    for (p, w) in items {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        let entry = map.entry(merge_key(&p)).or_insert_with(|| (p, T::zero(), T::zero()));
        entry.1 = entry.1 + w;
        entry.2 = entry.2 + w.abs();
    }
    Ok(map.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_enumeration_counts() {
        for (d, r) in [(1, 4), (3, 3), (5, 2), (25, 2)] {
            let all = MultiIndex::all_up_to(d, r);
            assert_eq!(all.len() as u64, binomial((d + r as usize) as u64, d as u64).unwrap());
            let set: std::collections::HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.iter().all(|m| m.total() <= r && m.dim() == d));
        }
        assert_eq!(binomial(27, 2), Some(351));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn json_round_trip() {
        let g = GridQuadrature::new(2, vec![0.0, 1.0, -1.0, 0.5], vec![0.25, 0.75], "test").unwrap();
        let back = GridQuadrature::<f64>::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back, g);
        let v: serde_json::Value = serde_json::from_str(&g.to_json_string()).unwrap();
        for key in ["d", "D", "points", "weights", "nonnegative", "provenance"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let bad = r#"{"d":1,"D":2,"points":[[0.0]],"weights":[1.0],"nonnegative":true,"provenance":""}"#;
        assert!(GridQuadrature::<f64>::from_json_str(bad).is_err());
        let lying = r#"{"d":1,"D":1,"points":[[0.0]],"weights":[-1.0],"nonnegative":true,"provenance":""}"#;
        assert!(GridQuadrature::<f64>::from_json_str(lying).is_err());
    }

    #[test]
    fn merging_accumulates() {
        let g = GridQuadrature::from_merged(
            1,
            vec![(vec![1.0], 0.5), (vec![1.0 + 1e-14], 0.25), (vec![2.0], 0.25)],
            "",
        )
        .unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.weights(), &[0.75, 0.25]);
        assert!(!g.has_duplicates());
    }
}
