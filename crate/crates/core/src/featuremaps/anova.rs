//! Feature maps for sparse ANOVA kernels, one sub-map per subset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureMap, FeatureMapJson, KernelApprox};
use crate::error::{Error, Result};
use crate::kernels::AnovaKernel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaFeatureMap<T> {
    dim: usize,
    /// 0-based, sorted, one per sub-map.
    subsets: Vec<Vec<usize>>,
    sub_maps: Vec<FeatureMap<T>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnovaMapJson {
    d: usize,
    subsets: Vec<Vec<usize>>,
    maps: Vec<FeatureMapJson>,
}

/// Builds one sub-map per subset of `k` with `ctor(|S|, d_s)`.
pub fn anova_compose<T, F>(k: &AnovaKernel<T>, mut ctor: F, d_s: usize) -> Result<AnovaFeatureMap<T>>
where
    T: Scalar,
    F: FnMut(usize, usize) -> Result<FeatureMap<T>>,
{
    let gamma = k.base().gamma();
    let sub_maps = k
        .subsets()
        .iter()
        .map(|s| {
            let fm = ctor(s.len(), d_s)?;
            if (fm.gamma() - gamma).abs() > T::lit(1e-12) * gamma {
                return Err(Error::Argument(format!(
                    "sub-map bandwidth {} differs from the kernel's {gamma}",
                    fm.gamma()
                )));
            }
            Ok(fm)
        })
        .collect::<Result<Vec<_>>>()?;
    AnovaFeatureMap::new(k.dim(), k.subsets().to_vec(), sub_maps)
}

impl<T: Scalar> AnovaFeatureMap<T> {
    pub fn new(dim: usize, subsets: Vec<Vec<usize>>, sub_maps: Vec<FeatureMap<T>>) -> Result<Self> {
        if subsets.len() != sub_maps.len() {
            return Err(Error::DimensionMismatch { expected: subsets.len(), got: sub_maps.len() });
        }
        for (s, fm) in subsets.iter().zip(&sub_maps) {
            if fm.grid().dim() != s.len() {
                return Err(Error::DimensionMismatch { expected: s.len(), got: fm.grid().dim() });
            }
            if s.iter().any(|&i| i >= dim) {
                return Err(Error::Argument(format!("subset index outside 1..={dim}")));
            }
        }
        Ok(Self { dim, subsets, sub_maps })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn sub_maps(&self) -> &[FeatureMap<T>] {
        &self.sub_maps
    }

    /// Total quadrature points over all sub-maps.
    pub fn len(&self) -> usize {
        self.sub_maps.iter().map(FeatureMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenated sub-embeddings of `x_S`.
    pub fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut out = Vec::with_capacity(2 * self.len());
        for (s, fm) in self.subsets.iter().zip(&self.sub_maps) {
            let xs: Vec<T> = s.iter().map(|&i| x[i]).collect();
            out.extend(fm.embed(&xs)?);
        }
        Ok(out)
    }

    pub fn to_json_string(&self) -> String {
        let raw = AnovaMapJson {
            d: self.dim,
            subsets: self.subsets.iter().map(|s| s.iter().map(|i| i + 1).collect()).collect(),
            maps: self.sub_maps.iter().map(FeatureMap::to_json_repr).collect(),
        };
        serde_json::to_string(&raw).expect("plain data serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: AnovaMapJson = serde_json::from_str(s)?;
        let subsets = raw
            .subsets
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|i| i.checked_sub(1).ok_or_else(|| Error::Argument("subset indices are 1-based".into())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let maps = raw.maps.into_iter().map(FeatureMap::from_json_repr).collect::<Result<Vec<_>>>()?;
        Self::new(raw.d, subsets, maps)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

impl<T: Scalar> KernelApprox<T> for AnovaFeatureMap<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn approx_diff(&self, u: &[T]) -> T {
        self.subsets
            .iter()
            .zip(&self.sub_maps)
            .fold(T::zero(), |acc, (s, fm)| {
                let us: Vec<T> = s.iter().map(|&i| u[i]).collect();
                acc + fm.approx_diff(&us)
            })
    }
}
