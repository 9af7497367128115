//! Entrywise ℓᵖ-minimal generalized inverses of wide matrices.
//!
//! The crate covers four layers:
//!
//! * [`matrix`]: a row-major dense matrix, Cholesky of the Gram matrix `AAᵀ`,
//!   the Moore–Penrose pseudoinverse of a full-row-rank matrix and the affine
//!   projection onto `{x : Ax = b}`.
//! * [`solver`]: `min ‖x‖_p s.t. Ax = b` for `1 ≤ p ≤ 2` with a relaxed
//!   Douglas–Rachford (ADMM) splitting, an enumeration oracle for tiny
//!   instances and a KKT certificate of ℓ¹ optimality and uniqueness.
//! * [`geninv`]: column-by-column assembly of the sparse pseudoinverse,
//!   `ginv_p`, the pseudoinverse and the random-submatrix baseline.
//! * [`theory`]: `erfc`, its inverse, `θ(t)`, Monte-Carlo `D_p(t; n)`, `t*`
//!   and the concentration value `α*`.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(missing_debug_implementations)]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod geninv;
pub mod matrix;
pub mod prox;
pub mod rng;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use geninv::{
    ginv_p, mpp_inverse, spinv, submatrix_inverse, submatrix_inverse_on, validate, Check,
    GenInverse, Method, ValidationReport,
};
pub use matrix::{affine_project, cholesky_gram, mpp, DenseMatrix, GramFactor, LuFactor};
pub use prox::prox_lp_scalar;
pub use rng::{gaussian_matrix, SeededRng};
pub use solver::{
    certify, lp_norm, solve_bp, solve_bp_factored, solve_oracle, BpSolution, SolveStatus, SolverConfig,
};
pub use theory::{
    alpha_star, alpha_star_l1_limit_explicit, dist_to_dual_ball, erfc, erfc_inv, monte_carlo_d,
    t_star, theta, theta_prime, DEstimate, DSampler, Horizon, TStar, TStarUnit, TheoryMethod,
    TheoryQuery, TheoryResult,
};
