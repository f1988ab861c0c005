//! Empirical kernel-approximation error.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featuremaps::KernelApprox;
use crate::kernels::ShiftInvariantKernel;
use crate::rng;

/// Displacements `u = M s v` with `v` uniform on the unit sphere and `s`
/// uniform on `[0, 1]`; stored unscaled so every `M` reuses the same draws.
#[derive(Debug, Clone)]
pub struct Displacements {
    dim: usize,
    directions: Vec<f64>,
    fractions: Vec<f64>,
}

impl Displacements {
    pub fn sample(dim: usize, n: usize, seed: u64) -> Result<Self> {
        if dim == 0 || n == 0 {
            return Err(Error::Argument("displacement sampling needs d >= 1 and n >= 1".into()));
        }
        let mut rng = rng::seeded(seed);
        let mut directions = Vec::with_capacity(n * dim);
        let mut fractions = Vec::with_capacity(n);
        for _ in 0..n {
            let v = loop {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
                }
            };
            directions.extend(v);
            fractions.push(rng.random::<f64>());
        }
        Ok(Self { dim, directions, fractions })
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.dim..(i + 1) * self.dim]
    }
}

/// Max and RMS of `|k(u) - k̃(u)|` over one sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub max: f64,
    pub rms: f64,
}

/// Errors at each diameter in `diameters`. `max` is the running maximum over
/// all diameters up to the current one, so the curve never decreases in `M`;
/// `rms` is over the current diameter's samples.
pub fn error_curve<A, K>(fm: &A, kernel: &K, diameters: &[f64], samples: &Displacements) -> Result<Vec<ErrorStats>>
where
    A: KernelApprox<f64> + ?Sized,
    K: ShiftInvariantKernel<f64> + ?Sized,
{
    if fm.dim() != samples.dim() {
        return Err(Error::DimensionMismatch { expected: fm.dim(), got: samples.dim() });
    }
    if diameters.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::Argument("diameters must be finite and nonnegative".into()));
    }
    let k = diameters.len();
    // Per sample: absolute error at every diameter.
    let errs: Vec<Vec<f64>> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let v = samples.direction(i);
            let radii: Vec<f64> = diameters.iter().map(|&m| m * samples.fractions[i]).collect();
            let approx = fm.approx_along(v, &radii);
            radii
                .iter()
                .zip(approx)
                .map(|(&r, a)| {
                    let u: Vec<f64> = v.iter().map(|&x| x * r).collect();
                    (kernel.eval_diff(&u) - a).abs()
                })
                .collect()
        })
        .collect();

    let n = samples.len() as f64;
    let mut stats: Vec<ErrorStats> = (0..k)
        .map(|c| {
            let mut max = 0.0f64;
            let mut sq = 0.0;
            for row in &errs {
                max = max.max(row[c]);
                sq += row[c] * row[c];
            }
            ErrorStats { max, rms: (sq / n).sqrt() }
        })
        .collect();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| diameters[a].total_cmp(&diameters[b]));
    let mut running = 0.0f64;
    for &c in &order {
        running = running.max(stats[c].max);
        stats[c].max = running;
    }
    Ok(stats)
}

/// `max |k(u) - k̃(u)|` over `n` displacements with `‖u‖ <= M`.
pub fn max_error_empirical<A, K>(fm: &A, kernel: &K, diameter: f64, n: usize, seed: u64) -> Result<f64>
where
    A: KernelApprox<f64> + ?Sized,
    K: ShiftInvariantKernel<f64> + ?Sized,
{
    let samples = Displacements::sample(fm.dim(), n, seed)?;
    Ok(error_curve(fm, kernel, &[diameter], &samples)?[0].max)
}

/// Running-maximum error curve over `diameters` on one shared sample set.
pub fn max_error_curve<A, K>(fm: &A, kernel: &K, diameters: &[f64], n: usize, seed: u64) -> Result<Vec<f64>>
where
    A: KernelApprox<f64> + ?Sized,
    K: ShiftInvariantKernel<f64> + ?Sized,
{
    let samples = Displacements::sample(fm.dim(), n, seed)?;
    Ok(error_curve(fm, kernel, diameters, &samples)?.into_iter().map(|s| s.max).collect())
}

/// `sqrt(mean (k(x - y) - k̃(x - y))²)` over the pairs.
pub fn rms_error<A, K>(fm: &A, kernel: &K, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64>
where
    A: KernelApprox<f64> + ?Sized,
    K: ShiftInvariantKernel<f64> + ?Sized,
{
    if pairs.is_empty() {
        return Err(Error::Argument("rms_error needs at least one pair".into()));
    }
    let sq: Vec<f64> = pairs
        .par_iter()
        .map(|(x, y)| {
            let e = kernel.eval(x, y) - fm.approx_kernel(x, y)?;
            Ok(e * e)
        })
        .collect::<Result<_>>()?;
    Ok((sq.iter().sum::<f64>() / pairs.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::poly_bound;
    use crate::featuremaps::{rff, FeatureMap, Method};
    use crate::grids::{dense_grid, GridQuadrature};
    use crate::kernels::GaussianKernel;

    #[test]
    fn zero_diameter_sees_weight_sum() {
        let g = GridQuadrature::new(2, vec![0.0, 0.0, 1.0, 1.0], vec![0.5, 0.3], "short").unwrap();
        let fm = FeatureMap::new(g, Method::Dense, 0.5).unwrap();
        let e = max_error_empirical(&fm, &GaussianKernel::unit(), 0.0, 50, 1).unwrap();
        assert!((e - 0.2).abs() < 1e-15);
    }

    #[test]
    fn exact_rule_respects_bound() {
        let fm = FeatureMap::new(dense_grid::<f64>(8, 2).unwrap(), Method::Dense, 0.5).unwrap();
        let e = max_error_empirical(&fm, &GaussianKernel::unit(), 0.5, 10_000, 2).unwrap();
        assert!(e <= poly_bound(1.0, 0.5, 14).unwrap());
    }

    #[test]
    fn curve_is_monotone_and_rms_below_max() {
        let fm = rff::<f64>(3, 30, 0.5, 4).unwrap();
        let k = GaussianKernel::unit();
        let samples = Displacements::sample(3, 2000, 5).unwrap();
        let ms = [2.0, 0.5, 1.0, 3.0, 0.1];
        let curve = error_curve(&fm, &k, &ms, &samples).unwrap();
        let mut sorted: Vec<(f64, f64)> = ms.iter().zip(&curve).map(|(&m, s)| (m, s.max)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(sorted.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(curve.iter().all(|s| s.rms <= s.max));
        for (&m, s) in ms.iter().zip(&curve) {
            let single = error_curve(&fm, &k, &[m], &samples).unwrap()[0];
            assert!(single.max <= s.max);
            assert_eq!(single.rms, s.rms);
        }
    }

    #[test]
    fn samples_lie_in_the_ball() {
        let s = Displacements::sample(4, 500, 9).unwrap();
        for i in 0..s.len() {
            let norm: f64 = s.direction(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((0.0..1.0).contains(&s.fractions[i]));
        }
    }

    #[test]
    fn rms_examples() {
        let k = GaussianKernel::unit();
        let exact = FeatureMap::new(GridQuadrature::new(1, vec![0.0], vec![1.0], "o").unwrap(), Method::Dense, 0.5).unwrap();
        let same = vec![(vec![1.0], vec![1.0]); 3];
        assert_eq!(rms_error(&exact, &k, &same).unwrap(), 0.0);
        let one = [(vec![0.0], vec![1.0])];
        let want = (1.0 - (-0.5f64).exp()).abs();
        assert!((rms_error(&exact, &k, &one).unwrap() - want).abs() < 1e-15);
        assert!(rms_error(&exact, &k, &[]).is_err());
    }
}
