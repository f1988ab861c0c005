//! Data-adaptive reweighting of candidate frequencies.
//!
//! Given sampled pairs `(x_l, y_l)` the weights solve
//! `min (1/n)‖M a - b‖² + λ 𝟏ᵀa, a >= 0` with `M_{l,i} = cos(ω_iᵀ(x_l - y_l))`
//! and `b_l = k(x_l - y_l)`. Scaling by `n/2` turns this into NNLS with the
//! constant linear term `nλ/2`. Weights are not renormalized.

use super::nnls::{nnls_shifted, Matrix, NnlsOptions, NnlsSolution, DEFAULT_NNLS_TOL};
use crate::error::{Error, Result};
use crate::grids::GridQuadrature;
use crate::kernels::ShiftInvariantKernel;
use crate::scalar::{dot, Scalar};

/// Reweighted rule together with the data it was fitted on.
#[derive(Debug, Clone)]
pub struct Reweighted<T> {
    pub grid: GridQuadrature<T>,
    pub lambda: T,
    /// `(1/n)‖M a - b‖²` on the fitting pairs.
    pub mse: T,
}

/// Assembles `M` (pairs × candidates) and `b`. `freq_scale` maps the unit
/// spectrum onto the kernel's (`√(2γ)` for a Gaussian of bandwidth `γ`).
pub fn reweight_matrix<T: Scalar, K: ShiftInvariantKernel<T>>(
    candidates: &GridQuadrature<T>,
    pairs: &[(Vec<T>, Vec<T>)],
    kernel: &K,
    freq_scale: T,
) -> Result<(Matrix<T>, Vec<T>)> {
    if pairs.is_empty() {
        return Err(Error::Argument("reweighting needs at least one pair".into()));
    }
    if candidates.is_empty() {
        return Err(Error::Argument("reweighting needs at least one candidate".into()));
    }
    let d = candidates.dim();
    let mut data = Vec::with_capacity(pairs.len() * candidates.len());
    let mut b = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        if x.len() != d || y.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len().max(y.len()) });
        }
        let u: Vec<T> = x.iter().zip(y).map(|(&a, &c)| (a - c) * freq_scale).collect();
        data.extend(candidates.points().map(|w| dot(w, &u).cos()));
        b.push(kernel.eval_diff(&x.iter().zip(y).map(|(&a, &c)| a - c).collect::<Vec<_>>()));
    }
    Ok((Matrix::new(pairs.len(), candidates.len(), data)?, b))
}

fn solve<T: Scalar>(m: &Matrix<T>, b: &[T], lambda: T) -> Result<NnlsSolution<T>> {
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(Error::Argument(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    let shift = T::from_usize_lossy(m.rows()) * lambda * T::lit(0.5);
    nnls_shifted(m, b, shift, NnlsOptions { tol: T::lit(DEFAULT_NNLS_TOL), max_iter: None })
}

fn to_rule<T: Scalar>(candidates: &GridQuadrature<T>, rows: usize, sol: &NnlsSolution<T>, lambda: T) -> Result<Reweighted<T>> {
    let n = T::from_usize_lossy(rows);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (p, &a) in candidates.points().zip(&sol.a) {
        if a > T::zero() {
            points.extend_from_slice(p);
            weights.push(a);
        }
    }
    let total: T = weights.iter().copied().sum();
    let grid = GridQuadrature::new(
        candidates.dim(),
        points,
        weights,
        format!("reweighted lambda={lambda} sum_a={total} from [{}]", candidates.provenance()),
    )?;
    Ok(Reweighted { grid, lambda, mse: sol.residual_norm * sol.residual_norm / n })
}

/// Fits weights for fixed `λ`; points with `a = 0` are dropped.
pub fn reweight<T: Scalar, K: ShiftInvariantKernel<T>>(
    candidates: &GridQuadrature<T>,
    pairs: &[(Vec<T>, Vec<T>)],
    kernel: &K,
    freq_scale: T,
    lambda: T,
) -> Result<Reweighted<T>> {
    let (m, b) = reweight_matrix(candidates, pairs, kernel, freq_scale)?;
    let sol = solve(&m, &b, lambda)?;
    to_rule(candidates, m.rows(), &sol, lambda)
}

#[derive(Debug, Clone, Copy)]
pub struct BisectOptions<T> {
    /// Initial upper end of the search interval; doubled until feasible.
    pub lambda_hi: T,
    pub iters: usize,
}

impl<T: Scalar> Default for BisectOptions<T> {
    fn default() -> Self {
        Self { lambda_hi: T::lit(1e-3), iters: 30 }
    }
}

/// Result of [`bisect_lambda`].
#[derive(Debug, Clone)]
pub struct Bisected<T> {
    pub rule: Reweighted<T>,
    /// Largest evaluated `λ` whose support still exceeded the target, with that support.
    pub below: Option<(T, usize)>,
}

/// Bisects `λ` so that at most `target` points survive, returning the
/// largest-support feasible solution seen.
pub fn bisect_lambda<T: Scalar, K: ShiftInvariantKernel<T>>(
    candidates: &GridQuadrature<T>,
    pairs: &[(Vec<T>, Vec<T>)],
    kernel: &K,
    freq_scale: T,
    target: usize,
    opts: BisectOptions<T>,
) -> Result<Bisected<T>> {
    if target == 0 {
        return Err(Error::Argument("target point count must be at least 1".into()));
    }
    let (m, b) = reweight_matrix(candidates, pairs, kernel, freq_scale)?;
    let nnz = |s: &NnlsSolution<T>| s.a.iter().filter(|&&a| a > T::zero()).count();

    let zero = solve(&m, &b, T::zero())?;
    if nnz(&zero) <= target {
        return Ok(Bisected { rule: to_rule(candidates, m.rows(), &zero, T::zero())?, below: None });
    }
    let mut lo = (T::zero(), nnz(&zero));
    let mut hi = opts.lambda_hi.max(T::min_positive_value());
    let mut hi_sol = solve(&m, &b, hi)?;
    let mut doublings = 0;
    while nnz(&hi_sol) > target {
        lo = (hi, nnz(&hi_sol));
        hi = hi + hi;
        hi_sol = solve(&m, &b, hi)?;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Contract("lambda search did not reach the target support".into()));
        }
    }
    let mut best = (hi, hi_sol);
    for _ in 0..opts.iters {
        let mid = (lo.0 + best.0) * T::lit(0.5);
        let sol = solve(&m, &b, mid)?;
        let k = nnz(&sol);
        if k <= target {
            best = (mid, sol);
        } else {
            lo = (mid, k);
        }
    }
    Ok(Bisected { rule: to_rule(candidates, m.rows(), &best.1, best.0)?, below: Some(lo) })
}
