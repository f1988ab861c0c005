//! Lawson-Hanson active-set NNLS.
//!
//! Solves `min ½‖M a - b‖² + sᵀa` subject to `a >= 0`, where the linear term
//! `s` is zero for plain NNLS and a constant shift for ℓ1-penalized problems.
//! The passive-set subproblems are solved through the normal equations
//! `M_Pᵀ M_P a_P = M_Pᵀ b - s_P` with an incrementally extended Cholesky factor
//! and one step of refinement against the true residual.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Default relative tolerance on the dual (gradient) vector.
pub const DEFAULT_NNLS_TOL: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds the matrix whose columns are `columns`.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = vec![T::zero(); rows * columns.len()];
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, got: c.len() });
            }
            for (i, &v) in c.iter().enumerate() {
                data[i * columns.len() + j] = v;
            }
        }
        Self::new(rows, columns.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![T::zero(); self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution<T> {
    pub a: Vec<T>,
    /// `‖M a - b‖`
    pub residual_norm: T,
    /// Indices with `a_i == 0`.
    pub active_set: Vec<usize>,
    /// Outer (variable-entering) iterations.
    pub iterations: usize,
    /// `½‖M a - b‖² + sᵀa` after each outer iteration, starting from `a = 0`.
    pub objective_history: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct NnlsOptions<T> {
    pub tol: T,
    /// Outer iteration cap; `None` means `3 p`.
    pub max_iter: Option<usize>,
}

impl<T: Scalar> Default for NnlsOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(DEFAULT_NNLS_TOL), max_iter: None }
    }
}

/// `min ‖M a - b‖` subject to `a >= 0`.
pub fn nnls<T: Scalar>(m: &Matrix<T>, b: &[T], tol: T) -> Result<NnlsSolution<T>> {
    nnls_shifted(m, b, T::zero(), NnlsOptions { tol, max_iter: None })
}

/// `min ½‖M a - b‖² + shift · 𝟏ᵀa` subject to `a >= 0`.
pub fn nnls_shifted<T: Scalar>(m: &Matrix<T>, b: &[T], shift: T, opts: NnlsOptions<T>) -> Result<NnlsSolution<T>> {
    let (n, p) = (m.rows(), m.cols());
    if n == 0 || p == 0 {
        return Err(Error::Argument("NNLS needs a non-empty matrix".into()));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::Argument("NNLS tolerance must be positive".into()));
    }
    if shift < T::zero() {
        return Err(Error::Argument("NNLS linear shift must be nonnegative".into()));
    }
    Solver::new(m, b, shift, opts).run()
}

/// `max_i` of the KKT violation, relative to `‖Mᵀb‖`. Zero at an exact optimum.
pub fn kkt_violation<T: Scalar>(m: &Matrix<T>, b: &[T], shift: T, a: &[T]) -> T {
    let mt = m.transpose();
    let ma = m.mul_vec(a);
    let r: Vec<T> = ma.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let scale = norm_or_one((0..mt.rows()).map(|j| dot(mt.row(j), b)));
    (0..mt.rows())
        .map(|j| {
            let g = dot(mt.row(j), &r) + shift;
            if a[j] > T::zero() { g.abs() } else { (-g).max(T::zero()) }
        })
        .fold(T::zero(), T::max)
        / scale
}

fn norm_or_one<T: Scalar>(it: impl Iterator<Item = T>) -> T {
    let s: T = it.map(|v| v * v).sum::<T>().sqrt();
    if s > T::zero() { s } else { T::one() }
}

struct Solver<'a, T> {
    b: &'a [T],
    /// `Mᵀ`, so each column of `M` is a contiguous row here.
    mt: Matrix<T>,
    shift: T,
    opts: NnlsOptions<T>,
    passive: Vec<usize>,
    /// Gram matrix of the passive columns, `k × k` row-major in passive order.
    gram: Vec<T>,
    /// Lower Cholesky factor of `gram`.
    chol: Vec<T>,
}

impl<'a, T: Scalar> Solver<'a, T> {
    fn new(m: &Matrix<T>, b: &'a [T], shift: T, opts: NnlsOptions<T>) -> Self {
        Self { b, mt: m.transpose(), shift, opts, passive: Vec::new(), gram: Vec::new(), chol: Vec::new() }
    }

    fn column(&self, j: usize) -> &[T] {
        self.mt.row(j)
    }

    fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r = self.b.to_vec();
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::zero() {
                for (ri, &mij) in r.iter_mut().zip(self.column(j)) {
                    *ri = *ri - mij * xj;
                }
            }
        }
        r
    }

    fn objective(&self, r: &[T], x: &[T]) -> T {
        let half = T::lit(0.5);
        half * dot(r, r) + self.shift * x.iter().copied().sum::<T>()
    }

    /// `Mᵀ r - shift` for every column.
    fn dual(&self, r: &[T]) -> Vec<T> {
        (0..self.mt.rows())
            .into_par_iter()
            .map(|j| dot(self.column(j), r) - self.shift)
            .collect()
    }

    /// Extends the factorization with column `j`; returns `false` (and leaves
    /// the state untouched) when `j` is numerically dependent on the passive set.
    fn try_add(&mut self, j: usize) -> bool {
        let k = self.passive.len();
        let cj = self.column(j);
        let g: Vec<T> = self.passive.iter().map(|&i| dot(self.column(i), cj)).collect();
        let gjj = dot(cj, cj);
        let mut y = vec![T::zero(); k];
        for i in 0..k {
            let s = (0..i).fold(g[i], |acc, t| acc - self.chol[i * k + t] * y[t]);
            y[i] = s / self.chol[i * k + i];
        }
        let d2 = gjj - dot(&y, &y);
        if !(d2 > T::epsilon() * T::lit(1e3) * gjj) || !(gjj > T::zero()) {
            return false;
        }
        let k1 = k + 1;
        let mut gram = vec![T::zero(); k1 * k1];
        let mut chol = vec![T::zero(); k1 * k1];
        for r in 0..k {
            gram[r * k1..r * k1 + k].copy_from_slice(&self.gram[r * k..(r + 1) * k]);
            chol[r * k1..r * k1 + k].copy_from_slice(&self.chol[r * k..(r + 1) * k]);
            gram[r * k1 + k] = g[r];
        }
        gram[k * k1..k * k1 + k].copy_from_slice(&g);
        gram[k * k1 + k] = gjj;
        chol[k * k1..k * k1 + k].copy_from_slice(&y);
        chol[k * k1 + k] = d2.sqrt();
        self.gram = gram;
        self.chol = chol;
        self.passive.push(j);
        true
    }

    /// Drops passive entries where `keep` is false and refactors.
    fn retain(&mut self, keep: &[bool]) {
        let k = self.passive.len();
        let idx: Vec<usize> = (0..k).filter(|&i| keep[i]).collect();
        let k2 = idx.len();
        let mut gram = vec![T::zero(); k2 * k2];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                gram[r * k2 + c] = self.gram[i * k + j];
            }
        }
        self.passive = idx.iter().map(|&i| self.passive[i]).collect();
        self.gram = gram;
        self.refactor();
    }

    fn refactor(&mut self) {
        let k = self.passive.len();
        let mut l = vec![T::zero(); k * k];
        for i in 0..k {
            for j in 0..=i {
                let s = (0..j).fold(self.gram[i * k + j], |acc, t| acc - l[i * k + t] * l[j * k + t]);
                if i == j {
                    l[i * k + i] = s.max(T::min_positive_value()).sqrt();
                } else {
                    l[i * k + j] = s / l[j * k + j];
                }
            }
        }
        self.chol = l;
    }

    fn chol_solve(&self, rhs: &[T]) -> Vec<T> {
        let k = self.passive.len();
        let l = &self.chol;
        let mut y = vec![T::zero(); k];
        for i in 0..k {
            let s = (0..i).fold(rhs[i], |acc, t| acc - l[i * k + t] * y[t]);
            y[i] = s / l[i * k + i];
        }
        for i in (0..k).rev() {
            let s = (i + 1..k).fold(y[i], |acc, t| acc - l[t * k + i] * y[t]);
            y[i] = s / l[i * k + i];
        }
        y
    }

    /// Unconstrained minimizer on the passive set.
    fn solve_passive(&self) -> Vec<T> {
        let rhs: Vec<T> = self.passive.iter().map(|&j| dot(self.column(j), self.b) - self.shift).collect();
        let mut s = self.chol_solve(&rhs);
        // refine against the true residual b - M_P s
        let n = self.b.len();
        let mut r = self.b.to_vec();
        for (&j, &sj) in self.passive.iter().zip(&s) {
            let c = self.column(j);
            for i in 0..n {
                r[i] = r[i] - c[i] * sj;
            }
        }
        let g: Vec<T> = self.passive.iter().map(|&j| dot(self.column(j), &r) - self.shift).collect();
        let delta = self.chol_solve(&g);
        for (si, di) in s.iter_mut().zip(delta) {
            *si = *si + di;
        }
        s
    }

    fn run(mut self) -> Result<NnlsSolution<T>> {
        let p = self.mt.rows();
        let cap = self.opts.max_iter.unwrap_or(3 * p);
        let scale = norm_or_one((0..p).map(|j| dot(self.column(j), self.b)));
        let tol_w = self.opts.tol * scale;

        let mut x = vec![T::zero(); p];
        let mut in_passive = vec![false; p];
        let mut rejected = vec![false; p];
        let mut r = self.b.to_vec();
        let mut history = vec![self.objective(&r, &x)];
        let mut iterations = 0usize;

        loop {
            let w = self.dual(&r);
            let candidate = (0..p)
                .filter(|&j| !in_passive[j] && !rejected[j] && w[j] > tol_w)
                .max_by(|&a, &b| w[a].partial_cmp(&w[b]).expect("finite dual").then(b.cmp(&a)));
            let Some(j) = candidate else { break };
            if iterations >= cap {
                let residual_norm = dot(&r, &r).sqrt();
                return Err(Error::NnlsNoConvergence {
                    iterations,
                    residual_norm: residual_norm.to_f64_lossy(),
                    best: x.iter().map(|v| v.to_f64_lossy()).collect(),
                });
            }
            if !self.try_add(j) {
                rejected[j] = true;
                continue;
            }
            let s = self.solve_passive();
            if !(*s.last().expect("just added") > T::zero()) {
                // the entering variable cannot move off its bound: numerically degenerate
                let mut keep = vec![true; self.passive.len()];
                *keep.last_mut().expect("non-empty") = false;
                self.retain(&keep);
                rejected[j] = true;
                continue;
            }
            in_passive[j] = true;
            iterations += 1;

            let mut s = s;
            loop {
                if s.iter().all(|&v| v > T::zero()) {
                    for (&i, &v) in self.passive.iter().zip(&s) {
                        x[i] = v;
                    }
                    break;
                }
                // step from x toward s until the first passive variable hits zero
                let mut alpha = T::one();
                let mut blocking = 0;
                for (k, (&i, &v)) in self.passive.iter().zip(&s).enumerate() {
                    if v <= T::zero() {
                        let a = x[i] / (x[i] - v);
                        if a < alpha {
                            alpha = a;
                            blocking = k;
                        }
                    }
                }
                let mut keep = vec![true; self.passive.len()];
                for (k, (&i, &v)) in self.passive.iter().zip(&s).enumerate() {
                    x[i] = x[i] + alpha * (v - x[i]);
                    if k == blocking || x[i] <= T::zero() {
                        x[i] = T::zero();
                        in_passive[i] = false;
                        keep[k] = false;
                    }
                }
                self.retain(&keep);
                if self.passive.is_empty() {
                    break;
                }
                s = self.solve_passive();
            }
            r = self.residual(&x);
            history.push(self.objective(&r, &x));
            rejected.iter_mut().for_each(|v| *v = false);
        }

        let residual_norm = dot(&r, &r).sqrt();
        let active_set = (0..p).filter(|&j| x[j] == T::zero()).collect();
        Ok(NnlsSolution { a: x, residual_norm, active_set, iterations, objective_history: history })
    }
}
