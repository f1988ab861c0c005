//! Method builders and parameter sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use super::dataset::{load_csv, sample_pairs, Dataset};
use super::metrics::{error_curve, rms_error, Displacements};
use super::synthetic::gaussian_mixture;
use super::ErrorReport;
use crate::error::{Error, Result};
use crate::featuremaps::{anova_compose, qmc_halton, rff, AnovaFeatureMap, FeatureMap, KernelApprox, Method};
use crate::grids::{dense_grid, sparse_grid, subsample_dense};
use crate::kernels::{AnovaKernel, GaussianKernel, ShiftInvariantKernel};
use crate::quad1d::gauss_hermite;
use crate::rng;
use crate::solvers::{bisect_lambda, construct_poly_exact, reweight, BisectOptions, PolyExactOptions};

/// Gauss-Hermite points per coordinate for subsampled and reweighted grids.
pub const DEFAULT_SUBSAMPLE_L: usize = 11;
pub const DEFAULT_DENSE_L: usize = 2;
pub const DEFAULT_LEVEL: u32 = 2;
pub const DEFAULT_DEGREE: u32 = 2;
pub const DEFAULT_N_EVAL: usize = 100_000;
pub const DEFAULT_PAIRS: usize = 500;
/// Reweighting draws this many candidates per target point.
pub const CANDIDATE_FACTOR: usize = 4;
/// Rows of the synthetic mixture used when reweighting without a dataset.
pub const SYNTHETIC_ROWS: usize = 10_000;

/// Everything a builder needs besides the method tag.
#[derive(Debug, Clone)]
pub struct BuildParams {
    pub d: usize,
    /// Requested point count (candidate count for poly-exact).
    pub count: usize,
    pub gamma: f64,
    pub l: Option<usize>,
    pub level: u32,
    pub degree: u32,
    pub lambda: Option<f64>,
    pub target: Option<usize>,
    pub pairs: usize,
    pub seed: u64,
}

impl BuildParams {
    pub fn new(d: usize, count: usize, gamma: f64, seed: u64) -> Self {
        Self {
            d,
            count,
            gamma,
            l: None,
            level: DEFAULT_LEVEL,
            degree: DEFAULT_DEGREE,
            lambda: None,
            target: None,
            pairs: DEFAULT_PAIRS,
            seed,
        }
    }
}

/// Stream offsets so that building, pair sampling and evaluation never share draws.
const STREAM_PAIRS: u64 = 1;
const STREAM_HELDOUT: u64 = 2;
const STREAM_DATA: u64 = 3;

fn stream_seed(seed: u64, stream: u64) -> u64 {
    use rand::RngCore;
    rng::derived(seed, stream).next_u64()
}

/// Builds a map for a Gaussian kernel of bandwidth `p.gamma` over `p.d` dims.
/// `data` is only used by the reweighted method.
pub fn build_map(method: Method, p: &BuildParams, data: Option<&Dataset>) -> Result<FeatureMap<f64>> {
    let gamma = p.gamma;
    let kernel = GaussianKernel::new(gamma)?;
    let grid = match method {
        Method::Rff => return rff(p.d, p.count, gamma, p.seed),
        Method::Qmc => return qmc_halton(p.d, p.count, gamma),
        Method::Dense => dense_grid(p.l.unwrap_or(DEFAULT_DENSE_L), p.d)?,
        Method::Sparse => sparse_grid(p.level, p.d)?,
        Method::Subsampled => {
            let rule = gauss_hermite(p.l.unwrap_or(DEFAULT_SUBSAMPLE_L))?;
            subsample_dense(&rule, p.d, p.count, p.seed)?
        }
        Method::PolyExact => construct_poly_exact(p.d, p.degree, p.count, p.seed, PolyExactOptions::default())?,
        Method::Reweighted => {
            let owned;
            let data = match data {
                Some(ds) => ds,
                None => {
                    owned = gaussian_mixture(SYNTHETIC_ROWS, p.d, 4.min(p.d), 2.0, stream_seed(p.seed, STREAM_DATA))?;
                    &owned
                }
            };
            if data.dim() != p.d {
                return Err(Error::DimensionMismatch { expected: p.d, got: data.dim() });
            }
            let target = p.target.unwrap_or(p.count);
            let rule = gauss_hermite(p.l.unwrap_or(DEFAULT_SUBSAMPLE_L))?;
            let candidates = subsample_dense(&rule, p.d, CANDIDATE_FACTOR * target, p.seed)?;
            let pairs = sample_pairs(data, p.pairs, stream_seed(p.seed, STREAM_PAIRS))?;
            let scale = kernel.frequency_scale();
            let fitted = match p.lambda {
                Some(lambda) => reweight(&candidates, &pairs, &kernel, scale, lambda)?,
                None => bisect_lambda(&candidates, &pairs, &kernel, scale, target, BisectOptions::default())?.rule,
            };
            fitted.grid
        }
        Method::Anova => {
            return Err(Error::Argument("anova maps are composed from another method; pass an ANOVA kernel".into()))
        }
    };
    FeatureMap::new(grid, method, gamma)
}

/// Composes per-subset maps of `method`, each with `p.count` points.
pub fn build_anova_map(method: Method, kernel: &AnovaKernel<f64>, p: &BuildParams) -> Result<AnovaFeatureMap<f64>> {
    if method == Method::Reweighted {
        return Err(Error::Argument("reweighted sub-maps are not supported for ANOVA kernels".into()));
    }
    let mut n = 0u64;
    anova_compose(
        kernel,
        |dim, ds| {
            let mut sub = p.clone();
            sub.d = dim;
            sub.count = ds;
            sub.gamma = kernel.base().gamma();
            sub.seed = stream_seed(p.seed, 100 + n);
            n += 1;
            build_map(method, &sub, None)
        },
        p.count,
    )
}

/// Either kind of map a sweep can build.
#[derive(Debug, Clone)]
pub enum AnyMap {
    Plain(FeatureMap<f64>),
    Anova(AnovaFeatureMap<f64>),
}

impl AnyMap {
    /// Quadrature points (summed over sub-maps).
    pub fn len(&self) -> usize {
        match self {
            AnyMap::Plain(m) => m.len(),
            AnyMap::Anova(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reads either a feature-map or an ANOVA-map JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match FeatureMap::from_json_str(&text) {
            Ok(m) => Ok(AnyMap::Plain(m)),
            Err(plain) => AnovaFeatureMap::from_json_str(&text).map(AnyMap::Anova).map_err(|_| plain),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        match self {
            AnyMap::Plain(m) => m.save(path),
            AnyMap::Anova(m) => m.save(path),
        }
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            AnyMap::Plain(m) => m.embed(x),
            AnyMap::Anova(m) => m.embed(x),
        }
    }
}

impl KernelApprox<f64> for AnyMap {
    fn dim(&self) -> usize {
        match self {
            AnyMap::Plain(m) => m.dim(),
            AnyMap::Anova(m) => m.dim(),
        }
    }

    fn approx_diff(&self, u: &[f64]) -> f64 {
        match self {
            AnyMap::Plain(m) => m.approx_diff(u),
            AnyMap::Anova(m) => m.approx_diff(u),
        }
    }

    fn approx_along(&self, direction: &[f64], radii: &[f64]) -> Vec<f64> {
        match self {
            AnyMap::Plain(m) => m.approx_along(direction, radii),
            AnyMap::Anova(m) => m.approx_along(direction, radii),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnyKernel {
    Gaussian(GaussianKernel<f64>),
    Anova(AnovaKernel<f64>),
}

impl ShiftInvariantKernel<f64> for AnyKernel {
    fn eval_diff(&self, u: &[f64]) -> f64 {
        match self {
            AnyKernel::Gaussian(k) => k.eval_diff(u),
            AnyKernel::Anova(k) => k.eval_diff(u),
        }
    }
}

/// Held-out pairs for RMS error: drawn from `data` on its own stream.
pub fn heldout_pairs(data: &Dataset, n: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    sample_pairs(data, n, stream_seed(seed, STREAM_HELDOUT))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub d: usize,
    #[serde(rename = "D", default)]
    pub counts: Vec<usize>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "M")]
    pub diameters: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
    #[serde(rename = "L", default)]
    pub l: Option<usize>,
    #[serde(default = "default_level")]
    pub level: u32,
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(rename = "target_D", default)]
    pub target: Option<usize>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// CSV dataset for reweighting and RMS on held-out pairs.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// ANOVA kernel JSON; every method is then composed per subset.
    #[serde(default)]
    pub anova: Option<PathBuf>,
}

fn default_gamma() -> f64 {
    0.5
}
fn default_n_eval() -> usize {
    DEFAULT_N_EVAL
}
fn default_level() -> u32 {
    DEFAULT_LEVEL
}
fn default_degree() -> u32 {
    DEFAULT_DEGREE
}
fn default_pairs() -> usize {
    DEFAULT_PAIRS
}

impl SweepConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, why: &str| Err(Error::Config(format!("`{k}`: {why}")));
        if self.methods.is_empty() {
            return bad("methods", "must list at least one method");
        }
        if self.d == 0 {
            return bad("d", "must be positive");
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return bad("gamma", "must be positive");
        }
        if self.diameters.is_empty() || self.diameters.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return bad("M", "must be a non-empty list of nonnegative diameters");
        }
        if self.seeds.is_empty() {
            return bad("seeds", "must list at least one seed");
        }
        if self.n_eval == 0 {
            return bad("n_eval", "must be positive");
        }
        if self.counts.contains(&0) {
            return bad("D", "entries must be positive");
        }
        if self.degree % 2 == 1 {
            return bad("degree", "must be even");
        }
        let sized = self.methods.iter().any(|m| !matches!(m, Method::Dense | Method::Sparse));
        if sized && self.counts.is_empty() {
            return bad("D", "required by the listed methods");
        }
        if self.methods.contains(&Method::Anova) {
            return bad("methods", "use the `anova` key to compose another method");
        }
        Ok(())
    }

    fn counts_for(&self, m: Method) -> Vec<usize> {
        match m {
            Method::Dense | Method::Sparse => vec![0],
            _ => self.counts.clone(),
        }
    }
}

/// One row per (method, D, seed, M) in config order. Timing columns aside,
/// the output depends only on the config.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<ErrorReport>> {
    cfg.validate()?;
    let data = cfg.data.as_ref().map(load_csv).transpose()?;
    if let Some(ds) = &data {
        if ds.dim() != cfg.d {
            return Err(Error::Config(format!("`data` has {} columns but `d` is {}", ds.dim(), cfg.d)));
        }
    }
    let anova = cfg.anova.as_ref().map(AnovaKernel::<f64>::load).transpose()?;
    if let Some(k) = &anova {
        if k.dim() != cfg.d {
            return Err(Error::Config(format!("`anova` kernel has d={} but `d` is {}", k.dim(), cfg.d)));
        }
    }
    let gauss = GaussianKernel::new(cfg.gamma)?;

    let mut out = Vec::new();
    for &method in &cfg.methods {
        for count in cfg.counts_for(method) {
            for &seed in &cfg.seeds {
                let mut p = BuildParams::new(cfg.d, count, cfg.gamma, seed);
                p.l = cfg.l;
                p.level = cfg.level;
                p.degree = cfg.degree;
                p.lambda = cfg.lambda;
                p.target = cfg.target;
                p.pairs = cfg.pairs;

                let started = Instant::now();
                let (map, kernel) = match &anova {
                    Some(k) => (AnyMap::Anova(build_anova_map(method, k, &p)?), AnyKernel::Anova(k.clone())),
                    None => (AnyMap::Plain(build_map(method, &p, data.as_ref())?), AnyKernel::Gaussian(gauss)),
                };
                let build_ms = started.elapsed().as_millis() as u64;

                let started = Instant::now();
                let samples = Displacements::sample(cfg.d, cfg.n_eval, seed)?;
                let stats = error_curve(&map, &kernel, &cfg.diameters, &samples)?;
                let heldout_rms = match &data {
                    Some(ds) => Some(rms_error(&map, &kernel, &heldout_pairs(ds, cfg.n_eval, seed)?)?),
                    None => None,
                };
                let embed_ms = started.elapsed().as_millis() as u64;

                for (&m, s) in cfg.diameters.iter().zip(&stats) {
                    out.push(ErrorReport {
                        method,
                        d: cfg.d,
                        count: map.len(),
                        gamma: cfg.gamma,
                        diameter: m,
                        max_err: s.max,
                        rms_err: heldout_rms.unwrap_or(s.rms),
                        n_eval: cfg.n_eval,
                        seed,
                        build_ms,
                        embed_ms,
                    });
                }
            }
        }
    }
    Ok(out)
}

