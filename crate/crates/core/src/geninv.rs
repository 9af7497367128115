//! Assembly of full generalized inverses and their diagnostics.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{cholesky_gram, mpp_with_factor, support_size, DenseMatrix, GramFactor, LuFactor};
use crate::rng::SeededRng;
use crate::solver::{certify, solve_bp_factored, BpSolution, SolveStatus, SolverConfig};

/// Consecutive singular draws after which [`submatrix_inverse`] gives up.
pub const SUBMATRIX_MAX_ATTEMPTS: usize = 100;
/// Bound on `‖AXA − A‖_F / ‖A‖_F` every method must meet.
pub const GEN_INVERSE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", content = "p", rename_all = "snake_case"))]
pub enum Method {
    Mpp,
    Spinv,
    GinvP(f64),
    Submatrix,
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Method::Mpp => f.write_str("mpp"),
            Method::Spinv => f.write_str("spinv"),
            Method::GinvP(p) => write!(f, "ginv_p({p})"),
            Method::Submatrix => f.write_str("submatrix"),
        }
    }
}

/// A generalized inverse `X` (n × m) of `A` with per-column diagnostics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenInverse {
    pub x: DenseMatrix,
    pub method: Method,
    pub per_column_support: Vec<usize>,
    pub frobenius_sq: f64,
    pub entrywise_l1: f64,
    /// `‖AXA − A‖_F / ‖A‖_F`.
    pub gen_inverse_residual: f64,
    pub per_column_status: Vec<SolveStatus>,
    /// Solver iterations per column (zero for closed forms).
    pub per_column_iterations: Vec<usize>,
}

impl GenInverse {
    fn assemble(
        a: &DenseMatrix,
        x: DenseMatrix,
        method: Method,
        statuses: Vec<SolveStatus>,
        iterations: Vec<usize>,
        rel_threshold: f64,
    ) -> Self {
        let per_column_support = (0..x.cols()).map(|j| x.column_support(j, rel_threshold)).collect();
        let gen_inverse_residual = gen_inverse_residual(a, &x);
        Self {
            frobenius_sq: x.frobenius_sq(),
            entrywise_l1: x.entrywise_l1(),
            per_column_support,
            gen_inverse_residual,
            per_column_status: statuses,
            per_column_iterations: iterations,
            x,
            method,
        }
    }

    pub fn total_support(&self) -> usize {
        self.per_column_support.iter().sum()
    }

    /// True when some column is flagged as possibly non-unique; experiment
    /// drivers exclude such trials.
    pub fn has_nonunique_risk(&self) -> bool {
        self.per_column_status.contains(&SolveStatus::CertifiedNonuniqueRisk)
    }

    pub fn all_certified_unique(&self) -> bool {
        self.per_column_status.iter().all(|s| *s == SolveStatus::CertifiedUnique)
    }

    pub fn any_max_iters(&self) -> bool {
        self.per_column_status.contains(&SolveStatus::MaxIters)
    }

    /// `(n/m)‖X‖_F²` for `A ∈ ℝ^{m×n}`.
    pub fn frobenius_sq_scaled(&self) -> f64 {
        let (n, m) = self.x.shape();
        self.frobenius_sq * n as f64 / m as f64
    }
}

fn gen_inverse_residual(a: &DenseMatrix, x: &DenseMatrix) -> f64 {
    let axa = a.matmul(x).and_then(|ax| ax.matmul(a)).expect("shapes checked by caller");
    let num = axa.sub(a).expect("same shape").frobenius_norm();
    let den = a.frobenius_norm();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn check_wide(a: &DenseMatrix) -> Result<()> {
    let (m, n) = a.shape();
    if m == 0 || m > n {
        return Err(Error::Dimension(format!("expected a wide matrix with 1 <= m <= n, got {m}x{n}")));
    }
    Ok(())
}

/// The Moore–Penrose pseudoinverse wrapped with diagnostics.
pub fn mpp_inverse(a: &DenseMatrix) -> Result<GenInverse> {
    check_wide(a)?;
    let factor = cholesky_gram(a)?;
    let x = mpp_with_factor(a, &factor);
    let m = a.rows();
    Ok(GenInverse::assemble(
        a,
        x,
        Method::Mpp,
        vec![SolveStatus::Converged; m],
        vec![0; m],
        SolverConfig::default().sparsity_rel_threshold,
    ))
}

/// The sparse pseudoinverse: column `i` minimizes `‖x‖₁` subject to `Ax = eᵢ`.
pub fn spinv(a: &DenseMatrix, cfg: &SolverConfig) -> Result<GenInverse> {
    let mut g = columnwise(a, 1.0, cfg)?;
    g.method = Method::Spinv;
    Ok(g)
}

/// Column-wise `min ‖x‖_p s.t. Ax = eᵢ` for `1 ≤ p ≤ 2`.
pub fn ginv_p(a: &DenseMatrix, p: f64, cfg: &SolverConfig) -> Result<GenInverse> {
    columnwise(a, p, cfg)
}

fn solve_column(
    a: &DenseMatrix,
    factor: &GramFactor,
    i: usize,
    p: f64,
    cfg: &SolverConfig,
) -> Result<(BpSolution, SolveStatus)> {
    let mut e = vec![0.0; a.rows()];
    e[i] = 1.0;
    let sol = solve_bp_factored(a, factor, &e, p, cfg)?;
    let status = if p == 1.0 && sol.status != SolveStatus::MaxIters { certify(a, &sol, cfg)? } else { sol.status };
    Ok((sol, status))
}

fn columnwise(a: &DenseMatrix, p: f64, cfg: &SolverConfig) -> Result<GenInverse> {
    check_wide(a)?;
    cfg.validate()?;
    let factor = cholesky_gram(a)?;
    let (m, n) = a.shape();

    #[cfg(feature = "parallel")]
    let columns: Vec<Result<(BpSolution, SolveStatus)>> = {
        use rayon::prelude::*;
        (0..m).into_par_iter().map(|i| solve_column(a, &factor, i, p, cfg)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let columns: Vec<Result<(BpSolution, SolveStatus)>> =
        (0..m).map(|i| solve_column(a, &factor, i, p, cfg)).collect();

    let mut x = DenseMatrix::zeros(n, m);
    let mut statuses = Vec::with_capacity(m);
    let mut iterations = Vec::with_capacity(m);
    for (i, col) in columns.into_iter().enumerate() {
        let (sol, status) = col?;
        x.set_column(i, &sol.x);
        statuses.push(status);
        iterations.push(sol.iterations);
    }
    Ok(GenInverse::assemble(a, x, Method::GinvP(p), statuses, iterations, cfg.sparsity_rel_threshold))
}

/// Inverts a uniformly random invertible `m × m` column submatrix and pads
/// the remaining rows with zeros. Singular draws are redrawn.
pub fn submatrix_inverse(a: &DenseMatrix, rng: &mut SeededRng) -> Result<GenInverse> {
    check_wide(a)?;
    let (m, n) = a.shape();
    for _ in 0..SUBMATRIX_MAX_ATTEMPTS {
        let subset = rng.subset(n, m);
        match submatrix_inverse_on(a, &subset) {
            Ok(g) => return Ok(g),
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SubmatrixFailure { attempts: SUBMATRIX_MAX_ATTEMPTS })
}

/// Submatrix inverse on a given set of `m` distinct columns.
pub fn submatrix_inverse_on(a: &DenseMatrix, subset: &[usize]) -> Result<GenInverse> {
    check_wide(a)?;
    let (m, n) = a.shape();
    if subset.len() != m || subset.iter().any(|&j| j >= n) {
        return Err(Error::Dimension(format!("need {m} column indices below {n}, got {subset:?}")));
    }
    let lu = LuFactor::new(&a.select_columns(subset))?;
    let inv = lu.inverse();
    let mut x = DenseMatrix::zeros(n, m);
    for (k, &row) in subset.iter().enumerate() {
        for j in 0..m {
            x.set(row, j, inv.get(k, j));
        }
    }
    Ok(GenInverse::assemble(
        a,
        x,
        Method::Submatrix,
        vec![SolveStatus::Converged; m],
        vec![0; m],
        SolverConfig::default().sparsity_rel_threshold,
    ))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub gen_inverse_residual: f64,
    pub right_inverse_residual: f64,
    pub frobenius_sq: f64,
    pub entrywise_l1: f64,
    pub per_column_support: Vec<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Recomputes the identities and summaries of `g` against `a`.
pub fn validate(a: &DenseMatrix, g: &GenInverse) -> Result<ValidationReport> {
    let (m, n) = a.shape();
    if g.x.shape() != (n, m) {
        return Err(Error::Dimension(format!(
            "inverse of shape {:?} for a {}x{} matrix",
            g.x.shape(),
            m,
            n
        )));
    }
    let residual = gen_inverse_residual(a, &g.x);
    let right = a.matmul(&g.x)?.sub(&DenseMatrix::identity(m))?.frobenius_norm();
    let frob = g.x.frobenius_sq();
    let l1 = g.x.entrywise_l1();
    let threshold = SolverConfig::default().sparsity_rel_threshold;
    let support: Vec<usize> = (0..m).map(|j| support_size(&g.x.column(j), threshold)).collect();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);

    let mut checks = vec![
        Check {
            name: "AXA = A".into(),
            value: residual,
            tolerance: GEN_INVERSE_TOLERANCE,
            passed: residual <= GEN_INVERSE_TOLERANCE,
        },
        Check {
            name: "AX = I".into(),
            value: right,
            tolerance: GEN_INVERSE_TOLERANCE,
            passed: right <= GEN_INVERSE_TOLERANCE,
        },
        Check {
            name: "frobenius_sq consistent".into(),
            value: rel(g.frobenius_sq, frob),
            tolerance: 1e-10,
            passed: rel(g.frobenius_sq, frob) <= 1e-10 || (frob == 0.0 && g.frobenius_sq == 0.0),
        },
        Check {
            name: "entrywise_l1 consistent".into(),
            value: rel(g.entrywise_l1, l1),
            tolerance: 1e-10,
            passed: rel(g.entrywise_l1, l1) <= 1e-10 || (l1 == 0.0 && g.entrywise_l1 == 0.0),
        },
    ];
    let census_ok = support == g.per_column_support;
    checks.push(Check {
        name: "support census consistent".into(),
        value: support.iter().sum::<usize>() as f64,
        tolerance: 0.0,
        passed: census_ok,
    });
    Ok(ValidationReport {
        checks,
        gen_inverse_residual: residual,
        right_inverse_residual: right,
        frobenius_sq: frob,
        entrywise_l1: l1,
        per_column_support: support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mpp;
    use crate::rng::gaussian_matrix;
    use crate::solver::solve_oracle;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn max_entry_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn spinv_of_identity() {
        let g = spinv(&DenseMatrix::identity(3), &cfg()).unwrap();
        assert!(max_entry_diff(&g.x, &DenseMatrix::identity(3)) <= 1e-12);
        assert_eq!(g.per_column_support, vec![1, 1, 1]);
        assert_eq!(g.method, Method::Spinv);
        assert!(g.all_certified_unique());
    }

    #[test]
    fn spinv_matches_columnwise_oracle() {
        let a = mat(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]);
        let g = spinv(&a, &cfg()).unwrap();
        let expect = mat(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        assert!(max_entry_diff(&g.x, &expect) <= 1e-9);
        for i in 0..2 {
            let mut e = [0.0; 2];
            e[i] = 1.0;
            let o = solve_oracle(&a, &e, 1.0).unwrap();
            for (k, v) in o.x.iter().enumerate() {
                assert!((g.x.get(k, i) - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn ginv_p_examples() {
        let a = mat(&[&[2.0, 1.0]]);
        let g = ginv_p(&a, 1.0, &cfg()).unwrap();
        assert!(max_entry_diff(&g.x, &mat(&[&[0.5], &[0.0]])) <= 1e-10);

        let g = ginv_p(&DenseMatrix::identity(3), 1.5, &cfg()).unwrap();
        assert!(max_entry_diff(&g.x, &DenseMatrix::identity(3)) <= 1e-10);
        assert_eq!(g.method, Method::GinvP(1.5));
    }

    #[test]
    fn ginv_p_endpoints_agree_with_named_inverses() {
        let a = gaussian_matrix(&mut SeededRng::new(3), 6, 15).unwrap();
        let two = ginv_p(&a, 2.0, &cfg()).unwrap();
        assert!(max_entry_diff(&two.x, &mpp(&a).unwrap()) <= 1e-6);
        let one = ginv_p(&a, 1.0, &cfg()).unwrap();
        let sp = spinv(&a, &cfg()).unwrap();
        assert!(max_entry_diff(&one.x, &sp.x) <= 1e-6);
    }

    #[test]
    fn submatrix_inverse_on_forced_subset() {
        let a = mat(&[&[1.0, 0.0, 5.0], &[0.0, 1.0, 7.0]]);
        let seed = (0..1000u64).find(|&s| SeededRng::new(s).subset(3, 2) == [0, 1]).unwrap();
        let g = submatrix_inverse(&a, &mut SeededRng::new(seed)).unwrap();
        let expect = mat(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        assert!(max_entry_diff(&g.x, &expect) <= 1e-15);
        assert_eq!(g.method, Method::Submatrix);
        assert_eq!(submatrix_inverse_on(&a, &[0, 1]).unwrap().x, g.x);
    }

    #[test]
    fn submatrix_resamples_singular_draws_and_gives_up() {
        // a subset is invertible only if it contains column 3
        let a = mat(&[&[1.0, 2.0, 3.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let g = submatrix_inverse(&a, &mut rng).unwrap();
            assert_eq!(g.x.get(3, 1), 1.0);
            assert_eq!(g.total_support(), 2);
            assert!(g.gen_inverse_residual <= 1e-12);
        }
        let dead = mat(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]]);
        assert_eq!(
            submatrix_inverse(&dead, &mut rng).unwrap_err(),
            Error::SubmatrixFailure { attempts: SUBMATRIX_MAX_ATTEMPTS }
        );
    }

    #[test]
    fn shape_errors() {
        let tall = DenseMatrix::zeros(3, 2);
        assert!(matches!(spinv(&tall, &cfg()), Err(Error::Dimension(_))));
        assert!(matches!(mpp_inverse(&tall), Err(Error::Dimension(_))));
        let a = mat(&[&[1.0, 0.0, 5.0], &[0.0, 1.0, 7.0]]);
        assert!(matches!(submatrix_inverse_on(&a, &[0, 3]), Err(Error::Dimension(_))));
        let g = mpp_inverse(&a).unwrap();
        let other = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(validate(&other, &g), Err(Error::Dimension(_))));
    }

    #[test]
    fn validate_pass_and_fail() {
        let a = gaussian_matrix(&mut SeededRng::new(4), 4, 9).unwrap();
        let g = mpp_inverse(&a).unwrap();
        let r = validate(&a, &g).unwrap();
        assert!(r.passed(), "{r:?}");

        let mut zero = g.clone();
        zero.x = DenseMatrix::zeros(9, 4);
        let r = validate(&a, &zero).unwrap();
        assert!(!r.passed());
        let axa = r.checks.iter().find(|c| c.name == "AXA = A").unwrap();
        assert!(!axa.passed);
        assert!((axa.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn generic_spinv_columns_are_m_sparse() {
        for (m, seeds) in [(10usize, 0..50u64), (20, 100..150)] {
            for seed in seeds {
                let a = gaussian_matrix(&mut SeededRng::new(seed), m, 30).unwrap();
                let g = spinv(&a, &cfg()).unwrap();
                assert_eq!(g.per_column_support, vec![m; m], "{m}x30 seed {seed}");
                let r = validate(&a, &g).unwrap();
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn norm_orderings_between_methods() {
        let mut rng = SeededRng::new(99);
        for _ in 0..10 {
            let a = gaussian_matrix(&mut rng, 8, 20).unwrap();
            let sp = spinv(&a, &cfg()).unwrap();
            let mp = mpp_inverse(&a).unwrap();
            let sub = submatrix_inverse(&a, &mut rng).unwrap();
            assert!(sp.entrywise_l1 <= mp.entrywise_l1 + 1e-6);
            assert!(sp.entrywise_l1 <= sub.entrywise_l1 + 1e-6);
            assert!(mp.frobenius_sq <= sp.frobenius_sq + 1e-9);
            assert!(mp.frobenius_sq <= sub.frobenius_sq + 1e-9);
            for g in [&sp, &mp, &sub] {
                assert!(g.gen_inverse_residual <= GEN_INVERSE_TOLERANCE);
            }
            let sub_support = sub.per_column_support.iter().all(|&s| s <= 8);
            assert!(sub_support);
        }
    }

    #[test]
    fn scaled_frobenius_uses_n_over_m() {
        let g = mpp_inverse(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(g.frobenius_sq_scaled(), 3.0);
        let a = mat(&[&[1.0, 1.0]]);
        let g = mpp_inverse(&a).unwrap();
        assert!((g.frobenius_sq_scaled() - 1.0).abs() <= 1e-15);
    }
}
