//! Closed-form error bounds and sample counts.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Subgaussian parameter of the spectrum of `exp(-γ‖u‖²)`: `√(2γ)`.
pub fn subgaussian_parameter<T: Scalar>(gamma: T) -> T {
    (T::lit(2.0) * gamma).sqrt()
}

/// Uniform error bound `3 (e b² M² / R)^{R/2}` for a nonnegative rule exact to
/// even degree `R` over a region of diameter `M`.
pub fn poly_bound<T: Scalar>(b: T, m: T, r: u32) -> Result<T> {
    if r < 2 || r % 2 == 1 {
        return Err(Error::Argument(format!("exactness degree must be even and >= 2, got {r}")));
    }
    let base = T::E() * b * b * m * m / T::from_u32(r).expect("u32");
    Ok(T::lit(3.0) * base.powi((r / 2) as i32))
}

/// Sparse-grid bound `2^d (12 e b² M² / A)^A`, or `None` when `A < 24 e b² M²`.
pub fn sparse_bound<T: Scalar>(b: T, m: T, level: u32, d: usize) -> Option<T> {
    let ebm = T::E() * b * b * m * m;
    let a = T::from_u32(level).expect("u32");
    if level == 0 || a < T::lit(24.0) * ebm {
        return None;
    }
    let two_d = T::lit(2.0).powi(d as i32);
    Some(two_d * (T::lit(12.0) * ebm / a).powi(level as i32))
}

/// Exact sample-count formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    /// `C(d + R, d)`
    pub poly_constraints: BigUint,
    /// `L^d`
    pub dense: BigUint,
    /// `3^A C(d + A, A)`
    pub sparse_bound: BigUint,
}

pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn counts(d: u64, r: u64, level: u64, l: u64) -> Counts {
    Counts {
        poly_constraints: binomial_big(d + r, d),
        dense: BigUint::from(l).pow(d as u32),
        sparse_bound: BigUint::from(3u32).pow(level as u32) * binomial_big(d + level, level),
    }
}
