//! Random-candidate rules made exact on all polynomials up to degree `R` by NNLS.

use rand_distr::{Distribution, StandardNormal};

use super::nnls::{nnls_shifted, Matrix, NnlsOptions};
use crate::error::{Error, Result};
use crate::grids::{GridQuadrature, MomentSystem, DEFAULT_CONSTRAINT_CAP};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct PolyExactOptions {
    /// Largest accepted moment error of the constructed rule.
    pub exactness_tol: f64,
    pub nnls_tol: f64,
    pub constraint_cap: u64,
}

impl Default for PolyExactOptions {
    fn default() -> Self {
        Self { exactness_tol: 1e-8, nnls_tol: 1e-12, constraint_cap: DEFAULT_CONSTRAINT_CAP }
    }
}

/// Draws `count` candidates from `N(0, I_d)` and solves the moment system
/// `Σ_i a_i Π ω_i^{r} = E[Π ω^{r}]`, `Σ r <= R`, for `a >= 0`.
///
/// The returned grid keeps only the strictly positive weights.
pub fn construct_poly_exact<T: Scalar>(
    d: usize,
    degree: u32,
    count: usize,
    seed: u64,
    opts: PolyExactOptions,
) -> Result<GridQuadrature<T>> {
    if degree % 2 == 1 {
        return Err(Error::Argument(format!("exactness degree must be even, got {degree}")));
    }
    if d == 0 || count == 0 {
        return Err(Error::Argument("need d >= 1 and at least one candidate".into()));
    }
    let system = MomentSystem::new(d, degree, opts.constraint_cap)?;
    let mut rng = rng::seeded(seed);
    let candidates: Vec<Vec<T>> = (0..count)
        .map(|_| (0..d).map(|_| T::lit(StandardNormal.sample(&mut rng))).collect())
        .collect();
    let columns: Vec<Vec<T>> = candidates.iter().map(|p| system.column(p)).collect();
    let m = Matrix::from_columns(&columns)?;
    let b = system.moments::<T>();
    let sol = nnls_shifted(&m, &b, T::zero(), NnlsOptions { tol: T::lit(opts.nnls_tol), max_iter: None })?;

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (p, &a) in candidates.iter().zip(&sol.a) {
        if a > T::zero() {
            points.extend_from_slice(p);
            weights.push(a);
        }
    }
    let mut grid = GridQuadrature::new(d, points, weights, "")?;
    let residual = system
        .residuals(&grid)?
        .into_iter()
        .fold(T::zero(), |acc, r| acc.max(r.abs()))
        .to_f64_lossy();
    if !(residual <= opts.exactness_tol) {
        return Err(Error::ConstructionFailed { residual, tolerance: opts.exactness_tol });
    }
    grid.set_provenance(format!(
        "poly-exact d={d} R={degree} candidates={count} seed={seed} constraints={} residual={residual:e}",
        system.len()
    ));
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::exactness_residual;
    use approx::assert_abs_diff_eq;

    #[test]
    fn degree_zero_normalizes() {
        let g = construct_poly_exact::<f64>(3, 0, 10, 1, PolyExactOptions::default()).unwrap();
        assert_abs_diff_eq!(g.weight_sum(), 1.0, epsilon = 1e-12);
        assert!(g.nonnegative());
    }

    #[test]
    fn one_dimensional_degree_four() {
        let g = construct_poly_exact::<f64>(1, 4, 50, 3, PolyExactOptions::default()).unwrap();
        assert!(exactness_residual(&g, 4).unwrap() <= 1e-8);
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert!(g.len() <= 50);
    }

    #[test]
    fn paper_configuration_has_351_constraints() {
        let sys = MomentSystem::new(25, 2, DEFAULT_CONSTRAINT_CAP).unwrap();
        assert_eq!(sys.len(), 351);
    }

    #[test]
    fn too_few_candidates_fails_loudly() {
        let err = construct_poly_exact::<f64>(3, 4, 5, 1, PolyExactOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ConstructionFailed { .. }), "{err}");
        assert!(construct_poly_exact::<f64>(3, 3, 50, 1, PolyExactOptions::default()).is_err());
    }
}
