//! One-dimensional Gaussian quadrature for the standard normal density.
//!
//! Nodes and weights come from the Golub-Welsch construction: the nodes are the
//! eigenvalues of the Jacobi matrix of the orthogonal polynomial family and the
//! weights are the squared first components of the unit eigenvectors (scaled by
//! the total mass). For the probabilists' Hermite family the nodes are then
//! polished by Newton steps on the orthonormal recurrence and the weights are
//! recomputed as Christoffel numbers, which keeps tiny tail weights accurate in
//! the relative sense.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported Gauss-Hermite rule.
pub const MAX_GAUSS_HERMITE_POINTS: usize = 200;

/// Relative deflation tolerance of the eigen solver used for built-in rules.
pub const EIGEN_TOL: f64 = 1e-14;

/// Tolerance `base`, widened to the precision actually available in `T`.
#[inline]
pub(crate) fn scaled_tol<T: Scalar>(base: f64, factor: f64) -> T {
    T::lit(base).max(T::epsilon() * T::lit(factor))
}

/// Symmetric tridiagonal matrix stored by its diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTriDiag<T> {
    diagonal: Vec<T>,
    off_diagonal: Vec<T>,
}

impl<T: Scalar> SymTriDiag<T> {
    pub fn new(diagonal: Vec<T>, off_diagonal: Vec<T>) -> Result<Self> {
        let n = diagonal.len();
        if n == 0 {
            return Err(Error::Argument("tridiagonal matrix must have n >= 1".into()));
        }
        if off_diagonal.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, got: off_diagonal.len() });
        }
        if diagonal.iter().chain(&off_diagonal).any(|v| !v.is_finite()) {
            return Err(Error::Argument("tridiagonal entries must be finite".into()));
        }
        Ok(Self { diagonal, off_diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[T] {
        &self.off_diagonal
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diagonal[i] * v[i];
                if i > 0 {
                    acc = acc + self.off_diagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.off_diagonal[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        let d: T = self.diagonal.iter().map(|&x| x * x).sum();
        let e: T = self.off_diagonal.iter().map(|&x| x * x).sum();
        (d + e + e).sqrt()
    }
}

/// Eigenvalues (ascending) and the first component of each unit eigenvector.
pub fn sym_tridiag_eigen<T: Scalar>(m: &SymTriDiag<T>, tol: T) -> Result<(Vec<T>, Vec<T>)> {
    let (values, z) = implicit_ql(m, tol, 1)?;
    Ok((values, z.into_iter().map(|col| col[0]).collect()))
}

/// Eigenvalues (ascending) and full unit eigenvectors, one `Vec` per eigenvalue.
pub fn sym_tridiag_eigen_vectors<T: Scalar>(
    m: &SymTriDiag<T>,
    tol: T,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    implicit_ql(m, tol, m.dim())
}

/// Implicit QL with Wilkinson-type shifts. Accumulates the first `rows` rows of
/// the eigenvector matrix; returns eigenpairs sorted ascending with each
/// eigenvector truncated to those rows.
fn implicit_ql<T: Scalar>(m: &SymTriDiag<T>, tol: T, rows: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    if !(tol > T::zero()) {
        return Err(Error::Argument("eigen tolerance must be positive".into()));
    }
    let n = m.dim();
    let tol = tol.max(T::epsilon());
    let two = T::lit(2.0);
    let mut d = m.diagonal.clone();
    let mut e = m.off_diagonal.clone();
    e.push(T::zero());
    // z[k * n + i] = component k of eigenvector i
    let mut z = vec![T::zero(); rows * n];
    for k in 0..rows {
        z[k * n + k] = T::one();
    }

    let cap = 100 * n;
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= tol * dd || e[mm].abs() <= T::min_positive_value() {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            total += 1;
            if total > cap {
                return Err(Error::EigenNoConvergence { iterations: total - 1 });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let signed_r = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = d[mm] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[mm] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..rows {
                    let row = &mut z[k * n..(k + 1) * n];
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[mm] = T::zero();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..rows).map(|k| z[k * n + i]).collect())
        .collect();
    Ok((values, vectors))
}

/// A one-dimensional quadrature rule for a probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> QuadratureRule1D<T> {
    /// Validates nodes (strictly increasing) and weights (positive, unit mass).
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Argument("quadrature rule needs at least one node".into()));
        }
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), got: weights.len() });
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Contract("quadrature nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::Contract("quadrature weights must be strictly positive".into()));
        }
        let total: T = weights.iter().copied().sum();
        let tol = scaled_tol::<T>(1e-12, 16.0 * nodes.len() as f64);
        if (total - T::one()).abs() > tol {
            return Err(Error::Contract(format!("quadrature weights sum to {total}, not 1")));
        }
        Ok(Self { nodes, weights })
    }

    /// Golub-Welsch rule from a three-term recurrence.
    ///
    /// The monic orthogonal polynomials satisfy
    /// `p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x)`; `alpha` holds
    /// `alpha_0..alpha_{L-1}`, `beta` holds `beta_1..beta_{L-1}` and `mass` is the
    /// total mass of the measure (1 for a probability density).
    pub fn from_recurrence(alpha: &[T], beta: &[T], mass: T) -> Result<Self> {
        if beta.iter().any(|&b| !(b > T::zero())) {
            return Err(Error::Argument("recurrence coefficients beta_k must be positive".into()));
        }
        let jacobi = SymTriDiag::new(alpha.to_vec(), beta.iter().map(|b| b.sqrt()).collect())?;
        let (nodes, first) = sym_tridiag_eigen(&jacobi, scaled_tol::<T>(EIGEN_TOL, 4.0))?;
        let weights: Vec<T> = first.iter().map(|&v| mass * v * v).collect();
        let total: T = weights.iter().copied().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::new(nodes, weights)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `Σ_l a_l f(ω_l)`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// Free-function form of [`QuadratureRule1D::integrate`].
pub fn integrate_1d<T: Scalar, F: Fn(T) -> T>(rule: &QuadratureRule1D<T>, f: F) -> T {
    rule.integrate(f)
}

/// Evaluates the orthonormal probabilists' Hermite polynomials `p_{L-1}`, `p_L`
/// at `x` together with `Σ_{k<L} p_k(x)^2`.
fn hermite_orthonormal<T: Scalar>(l: usize, x: T) -> (T, T, T) {
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut sum_sq = T::one();
    for k in 0..l {
        // p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1)
        let next = (x * cur - T::from_usize_lossy(k).sqrt() * prev)
            / T::from_usize_lossy(k + 1).sqrt();
        prev = cur;
        cur = next;
        if k + 1 < l {
            sum_sq = sum_sq + cur * cur;
        }
    }
    (prev, cur, sum_sq)
}

/// `L`-point Gauss-Hermite rule for the standard normal density `N(0, 1)`.
///
/// Exact for every polynomial of degree `<= 2L - 1`.
pub fn gauss_hermite<T: Scalar>(l: usize) -> Result<QuadratureRule1D<T>> {
    if !(1..=MAX_GAUSS_HERMITE_POINTS).contains(&l) {
        return Err(Error::Argument(format!(
            "Gauss-Hermite point count {l} outside 1..={MAX_GAUSS_HERMITE_POINTS}"
        )));
    }
    if l == 1 {
        return QuadratureRule1D::new(vec![T::zero()], vec![T::one()]);
    }
    let jacobi = SymTriDiag::new(
        vec![T::zero(); l],
        (1..l).map(|k| T::from_usize_lossy(k).sqrt()).collect(),
    )?;
    let (mut nodes, _) = sym_tridiag_eigen(&jacobi, scaled_tol::<T>(EIGEN_TOL, 4.0))?;

    let sqrt_l = T::from_usize_lossy(l).sqrt();
    let mut weights = Vec::with_capacity(l);
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let (pm1, p, _) = hermite_orthonormal(l, *x);
            let deriv = sqrt_l * pm1;
            if deriv != T::zero() {
                *x = *x - p / deriv;
            }
        }
        let (_, _, sum_sq) = hermite_orthonormal(l, *x);
        weights.push(T::one() / sum_sq);
    }

    // Enforce exact mirror symmetry about 0.
    for i in 0..l / 2 {
        let j = l - 1 - i;
        let half = T::lit(0.5);
        let x = (nodes[j] - nodes[i]) * half;
        let w = (weights[i] + weights[j]) * half;
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if l % 2 == 1 {
        nodes[l / 2] = T::zero();
    }
    let total: T = weights.iter().copied().sum();
    for w in weights.iter_mut() {
        *w = *w / total;
    }
    QuadratureRule1D::new(nodes, weights)
}

/// `E[ω^p]` for `ω ~ N(0, 1)`: `(p-1)!!` for even `p`, else 0.
pub fn normal_moment(p: u32) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    double_factorial(p as i64 - 1)
}

/// `n!! = n (n-2) (n-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}
