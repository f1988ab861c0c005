//! NNLS and the rule constructors built on it.

mod nnls;
mod poly_exact;
mod reweight;

pub use nnls::{kkt_violation, nnls, nnls_shifted, Matrix, NnlsOptions, NnlsSolution, DEFAULT_NNLS_TOL};
pub use poly_exact::{construct_poly_exact, PolyExactOptions};
pub use reweight::{bisect_lambda, reweight, reweight_matrix, BisectOptions, Bisected, Reweighted};
