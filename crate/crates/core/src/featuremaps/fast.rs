//! Embedding for grids whose coordinates take few distinct values.
//!
//! Each data column is multiplied once by each distinct frequency value of that
//! coordinate; projections are then sums of table lookups. The summation order
//! matches [`FeatureMap::embed`], so rows are bit-identical to it.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{assemble, FeatureMap};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Per-coordinate distinct-value cap for the table path.
pub const MAX_DISTINCT_VALUES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct FastEmbedding<T> {
    /// One `2D`-long feature row per input row.
    pub rows: Vec<Vec<T>>,
    /// False when the distinct-value cap was exceeded and plain `embed` was used.
    pub used_fast: bool,
}

/// Per coordinate: the distinct scaled frequency values and, for each point,
/// the index of its value.
struct Tables<T> {
    values: Vec<Vec<T>>,
    index: Vec<u8>,
}

fn tables<T: Scalar>(fm: &FeatureMap<T>) -> Option<Tables<T>> {
    let d = fm.grid().dim();
    let count = fm.len();
    let mut values: Vec<Vec<T>> = vec![Vec::new(); d];
    let mut lookup: Vec<HashMap<u64, u8>> = vec![HashMap::new(); d];
    let mut index = vec![0u8; count * d];
    for (i, f) in fm.frequencies().enumerate() {
        for (j, &v) in f.iter().enumerate() {
            let key = v.to_f64_lossy().to_bits();
            let k = match lookup[j].get(&key) {
                Some(&k) => k,
                None => {
                    if values[j].len() == MAX_DISTINCT_VALUES {
                        return None;
                    }
                    let k = values[j].len() as u8;
                    values[j].push(v);
                    lookup[j].insert(key, k);
                    k
                }
            };
            index[i * d + j] = k;
        }
    }
    Some(Tables { values, index })
}

/// Embeds every row of `data`, using multiplication tables when the grid allows.
pub fn embed_grid_fast<T: Scalar>(fm: &FeatureMap<T>, data: &[Vec<T>]) -> Result<FastEmbedding<T>> {
    let roots = fm.sqrt_weights()?;
    let d = fm.grid().dim();
    if let Some(x) = data.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let Some(tab) = tables(fm) else {
        let rows = data
            .par_iter()
            .map(|x| {
                let proj: Vec<T> = fm.frequencies().map(|f| dot(f, x)).collect();
                assemble(&roots, &proj)
            })
            .collect();
        return Ok(FastEmbedding { rows, used_fast: false });
    };
    let rows = data
        .par_iter()
        .map(|x| {
            let products: Vec<Vec<T>> = tab
                .values
                .iter()
                .zip(x)
                .map(|(vals, &xj)| vals.iter().map(|&v| v * xj).collect())
                .collect();
            let proj: Vec<T> = tab
                .index
                .chunks_exact(d)
                .map(|idx| {
                    idx.iter()
                        .zip(&products)
                        .fold(T::zero(), |acc, (&k, p)| acc + p[k as usize])
                })
                .collect();
            assemble(&roots, &proj)
        })
        .collect();
    Ok(FastEmbedding { rows, used_fast: true })
}
