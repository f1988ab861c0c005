//! Polynomial moment constraints against the standard normal density.

use rayon::prelude::*;

use super::{binomial, GridQuadrature, MultiIndex, DEFAULT_CONSTRAINT_CAP};
use crate::error::{Error, Result};
use crate::quad1d::normal_moment;
use crate::scalar::Scalar;

/// `∫ N(0, I)(ω) Π ω_l^{r_l} dω = Π (r_l - 1)!!` when every `r_l` is even, else 0.
pub fn analytic_normal_moment(r: &MultiIndex) -> f64 {
    r.entries().iter().map(|&e| normal_moment(e)).product()
}

/// All monomials `Π ω_l^{r_l}` with `Σ r_l <= R` together with their exact
/// normal moments. Row order follows [`MultiIndex::all_up_to`].
#[derive(Debug, Clone)]
pub struct MomentSystem {
    dim: usize,
    degree: u32,
    support: Vec<Vec<(usize, u32)>>,
    moments: Vec<f64>,
}

impl MomentSystem {
    pub fn new(dim: usize, degree: u32, cap: u64) -> Result<Self> {
        let count = binomial((dim + degree as usize) as u64, dim as u64);
        match count {
            Some(c) if c <= cap => {}
            _ => {
                return Err(Error::SizeLimit {
                    what: format!("moment constraints C(d+R, d) for d={dim} R={degree}"),
                    count: count.map_or_else(|| "overflow".into(), |c| c.to_string()),
                    cap,
                })
            }
        }
        let all = MultiIndex::all_up_to(dim, degree);
        let moments = all.iter().map(analytic_normal_moment).collect();
        let support = all.iter().map(MultiIndex::support).collect();
        Ok(Self { dim, degree, support, moments })
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn moments<T: Scalar>(&self) -> Vec<T> {
        self.moments.iter().map(|&m| T::lit(m)).collect()
    }

    fn power_table<T: Scalar>(&self, point: &[T]) -> Vec<T> {
        let stride = self.degree as usize + 1;
        let mut pow = Vec::with_capacity(self.dim * stride);
        for &x in point {
            let mut acc = T::one();
            pow.push(acc);
            for _ in 0..self.degree {
                acc = acc * x;
                pow.push(acc);
            }
        }
        pow
    }

    #[inline]
    fn monomial<T: Scalar>(&self, pow: &[T], row: usize) -> T {
        let stride = self.degree as usize + 1;
        self.support[row]
            .iter()
            .fold(T::one(), |acc, &(l, e)| acc * pow[l * stride + e as usize])
    }

    /// Column of monomial values for one point.
    pub fn column<T: Scalar>(&self, point: &[T]) -> Vec<T> {
        let pow = self.power_table(point);
        (0..self.len()).map(|r| self.monomial(&pow, r)).collect()
    }

    /// `Σ_i a_i Π ω_i^{r} - moment(r)` for every row.
    pub fn residuals<T: Scalar>(&self, g: &GridQuadrature<T>) -> Result<Vec<T>> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: g.dim() });
        }
        let tables: Vec<Vec<T>> = g.points().map(|p| self.power_table(p)).collect();
        Ok((0..self.len())
            .into_par_iter()
            .map(|r| {
                let s = tables
                    .iter()
                    .zip(g.weights())
                    .fold(T::zero(), |acc, (pow, &w)| acc + w * self.monomial(pow, r));
                s - T::lit(self.moments[r])
            })
            .collect())
    }
}

/// Largest absolute moment error over all monomials of total degree `<= R`.
pub fn exactness_residual<T: Scalar>(g: &GridQuadrature<T>, degree: u32) -> Result<T> {
    exactness_residual_with_cap(g, degree, DEFAULT_CONSTRAINT_CAP)
}

pub fn exactness_residual_with_cap<T: Scalar>(g: &GridQuadrature<T>, degree: u32, cap: u64) -> Result<T> {
    let sys = MomentSystem::new(g.dim(), degree, cap)?;
    Ok(sys.residuals(g)?.into_iter().fold(T::zero(), |m, r| m.max(r.abs())))
}
