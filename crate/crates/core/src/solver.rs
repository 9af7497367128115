//! Equality-constrained ℓᵖ minimization, `min ‖x‖_p s.t. Ax = b`.
//!
//! For `p = 2` the minimizer is the pseudoinverse column `Aᵀ(AAᵀ)⁻¹b`. For
//! `1 ≤ p < 2` the solver runs over-relaxed ADMM (Douglas–Rachford on
//! `‖x‖_p^p + ι{Ax = b}`) with the affine projection as one proximal step and
//! the scalar prox of `τ|·|^p` as the other. At `p = 1` it also tries to
//! polish the iterate into an exact basic solution: the `m` coordinates
//! carrying the largest dual/primal mass define a square `A_S`, and the
//! basic solution `A_S⁻¹ b` is accepted as soon as its dual vector
//! `ν = A_S⁻ᵀ sign(x_S)` satisfies `|aᵢᵀν| ≤ 1` off the support, which is
//! exactly the KKT system of the linear program.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{
    cholesky_gram, norm2, norm_inf, support_size, DenseMatrix, GramFactor, LuFactor, Projector,
};
use crate::prox::prox_power;

/// Over-relaxation factor of the splitting iteration.
const RELAXATION: f64 = 1.6;
/// Shrinkage threshold `τ = THRESHOLD_SCALE / ρ`, applied after the
/// right-hand side is rescaled so the least-norm solution peaks at 1.
const THRESHOLD_SCALE: f64 = 0.3;
/// Iterations between two polishing / stopping checks.
const CHECK_EVERY: usize = 10;
/// Slack on `|aᵢᵀν| ≤ 1` accepted when polishing.
const POLISH_SLACK: f64 = 1e-9;
/// Simplex pivots allowed per polishing attempt.
const MAX_PIVOTS: usize = 25;
/// Largest `n` the enumeration oracle accepts.
pub const ORACLE_MAX_COLS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Splitting step ρ; larger values shrink less per iteration.
    pub splitting_step: f64,
    /// `|x_i| ≤ sparsity_rel_threshold · ‖x‖_∞` counts as zero.
    pub sparsity_rel_threshold: f64,
    pub certificate_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            tol_primal: 1e-10,
            tol_dual: 1e-10,
            splitting_step: 1.0,
            sparsity_rel_threshold: 1e-8,
            certificate_margin: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_primal", self.tol_primal),
            ("tol_dual", self.tol_dual),
            ("splitting_step", self.splitting_step),
            ("sparsity_rel_threshold", self.sparsity_rel_threshold),
            ("certificate_margin", self.certificate_margin),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Converged,
    MaxIters,
    CertifiedUnique,
    CertifiedNonuniqueRisk,
    NotCertified,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::CertifiedUnique => "certified_unique",
            SolveStatus::CertifiedNonuniqueRisk => "certified_nonunique_risk",
            SolveStatus::NotCertified => "not_certified",
        }
    }
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One column's minimizer together with its dual vector and diagnostics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BpSolution {
    pub x: Vec<f64>,
    /// ν with `Aᵀν ∈ ∂‖x‖_p`.
    pub dual: Vec<f64>,
    pub p: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub objective: f64,
    pub status: SolveStatus,
    /// The right-hand side `b` the solution was computed for.
    pub rhs: Vec<f64>,
}

pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        norm2(x)
    } else {
        let peak = norm_inf(x);
        if peak == 0.0 {
            return 0.0;
        }
        let s: f64 = x.iter().map(|v| libm::pow(v.abs() / peak, p)).sum();
        peak * libm::pow(s, 1.0 / p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Parameter(format!("exponent p must lie in [1, 2], got {p}")));
    }
    Ok(())
}

fn check_rhs(a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for a matrix with {} rows",
            b.len(),
            a.rows()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("right-hand side has non-finite entries".into()));
    }
    Ok(())
}

/// `min ‖x‖_p s.t. Ax = b` for a wide full-row-rank `A`.
///
/// Non-convergence is not an error: the solution comes back with status
/// [`SolveStatus::MaxIters`] and its residuals.
pub fn solve_bp(a: &DenseMatrix, b: &[f64], p: f64, cfg: &SolverConfig) -> Result<BpSolution> {
    let factor = cholesky_gram(a)?;
    solve_bp_factored(a, &factor, b, p, cfg)
}

/// As [`solve_bp`] with a precomputed factor of `AAᵀ`, shared across columns.
pub fn solve_bp_factored(
    a: &DenseMatrix,
    factor: &GramFactor,
    b: &[f64],
    p: f64,
    cfg: &SolverConfig,
) -> Result<BpSolution> {
    check_exponent(p)?;
    check_rhs(a, b)?;
    cfg.validate()?;
    if factor.size() != a.rows() {
        return Err(Error::Dimension("factor does not match the matrix".into()));
    }
    let (m, n) = a.shape();

    if b.iter().all(|&v| v == 0.0) {
        return Ok(BpSolution {
            x: vec![0.0; n],
            dual: vec![0.0; m],
            p,
            iterations: 0,
            primal_residual: 0.0,
            objective: 0.0,
            status: SolveStatus::Converged,
            rhs: b.to_vec(),
        });
    }

    // least-norm solution q = Aᵀ G⁻¹ b
    let mut w = b.to_vec();
    factor.solve_in_place(&mut w);
    let mut q = vec![0.0; n];
    a.gemv_t(&w, &mut q);

    if p == 2.0 {
        let norm = norm2(&q);
        let dual = w.iter().map(|v| v / norm).collect();
        return Ok(finish(a, b, q, dual, p, 0, SolveStatus::Converged));
    }

    let scale = 1.0 / norm_inf(&q);
    let bs: Vec<f64> = b.iter().map(|v| v * scale).collect();
    q.iter_mut().for_each(|v| *v *= scale);
    let tau = THRESHOLD_SCALE / cfg.splitting_step;
    let proj = Projector { a, factor, b: &bs };

    let mut x = q.clone();
    let mut x_prev = q.clone();
    let mut z = q;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut scratch = vec![0.0; m];
    let mut polisher = if p == 1.0 { Some(Polisher::new(m, n)) } else { None };

    let mut iterations = 0;
    let mut status = SolveStatus::MaxIters;
    for k in 1..=cfg.max_iters {
        iterations = k;
        for i in 0..n {
            v[i] = z[i] - u[i];
        }
        core::mem::swap(&mut x, &mut x_prev);
        proj.apply(&v, &mut scratch, &mut x);
        let mut change_sq = 0.0;
        let mut gap_sq = 0.0;
        for i in 0..n {
            let xi = x[i];
            let d = xi - x_prev[i];
            change_sq += d * d;
            let wi = RELAXATION * xi + (1.0 - RELAXATION) * z[i] + u[i];
            let zi = prox_power(wi, tau, p);
            let g = xi - zi;
            gap_sq += g * g;
            z[i] = zi;
            u[i] = wi - zi;
        }

        if k % CHECK_EVERY != 0 && k != cfg.max_iters {
            continue;
        }
        if let Some(pol) = polisher.as_mut() {
            if let Some((xs, nu)) = pol.attempt(a, &bs, &u, &z, tau) {
                let x_full: Vec<f64> = xs.iter().map(|v| v / scale).collect();
                return Ok(finish(a, b, x_full, nu, p, k, SolveStatus::Converged));
            }
        }
        let xnorm = norm2(&x).max(1.0);
        if libm::sqrt(change_sq) <= cfg.tol_dual * xnorm && libm::sqrt(gap_sq) <= cfg.tol_primal * xnorm {
            a.gemv(&x, &mut scratch);
            let res = scratch.iter().zip(&bs).map(|(r, bi)| (r - bi) * (r - bi)).sum::<f64>();
            if libm::sqrt(res) <= cfg.tol_primal * (1.0 + norm2(&bs)) {
                status = SolveStatus::Converged;
                break;
            }
        }
    }

    let x_full: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let dual = if p == 1.0 {
        // y = u/τ is a subgradient of ‖·‖₁ at z; ν is its least-squares preimage under Aᵀ
        let y: Vec<f64> = u.iter().map(|v| v / tau).collect();
        least_squares_dual(a, factor, &y)
    } else {
        let g = lp_gradient(&x_full, p);
        least_squares_dual(a, factor, &g)
    };
    Ok(finish(a, b, x_full, dual, p, iterations, status))
}

fn finish(
    a: &DenseMatrix,
    b: &[f64],
    x: Vec<f64>,
    dual: Vec<f64>,
    p: f64,
    iterations: usize,
    status: SolveStatus,
) -> BpSolution {
    let mut r = vec![0.0; a.rows()];
    a.gemv(&x, &mut r);
    let primal_residual = libm::sqrt(r.iter().zip(b).map(|(ri, bi)| (ri - bi) * (ri - bi)).sum::<f64>());
    let objective = lp_norm(&x, p);
    BpSolution { x, dual, p, iterations, primal_residual, objective, status, rhs: b.to_vec() }
}

/// `argmin_ν ‖Aᵀν − y‖₂ = G⁻¹ A y`.
fn least_squares_dual(a: &DenseMatrix, factor: &GramFactor, y: &[f64]) -> Vec<f64> {
    let mut nu = vec![0.0; a.rows()];
    a.gemv(y, &mut nu);
    factor.solve_in_place(&mut nu);
    nu
}

/// Gradient of `‖x‖_p` for `1 < p < 2`.
fn lp_gradient(x: &[f64], p: f64) -> Vec<f64> {
    let norm = lp_norm(x, p);
    if norm == 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| libm::pow(v.abs() / norm, p - 1.0).copysign(*v) * (*v != 0.0) as u8 as f64).collect()
}

/// Support-guessing polish step for `p = 1`.
struct Polisher {
    order: Vec<usize>,
    score: Vec<f64>,
    previous: Vec<usize>,
    last_failed: Vec<usize>,
    corr: Vec<f64>,
    m: usize,
}

impl Polisher {
    fn new(m: usize, n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            score: vec![0.0; n],
            previous: Vec::new(),
            last_failed: Vec::new(),
            corr: vec![0.0; n],
            m,
        }
    }

    /// Tries the basic solution on the `m` most active coordinates once that
    /// guess has been stable across two consecutive checks.
    fn attempt(
        &mut self,
        a: &DenseMatrix,
        b: &[f64],
        u: &[f64],
        z: &[f64],
        tau: f64,
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        let m = self.m;
        let n = u.len();
        for i in 0..n {
            self.score[i] = (u[i].abs() + z[i].abs()) / tau;
        }
        for (k, o) in self.order.iter_mut().enumerate() {
            *o = k;
        }
        let score = &self.score;
        if m < n {
            self.order
                .select_nth_unstable_by(m - 1, |&i, &j| score[j].partial_cmp(&score[i]).unwrap_or(core::cmp::Ordering::Equal));
        }
        let mut support: Vec<usize> = self.order[..m].to_vec();
        support.sort_unstable();
        let stable = support == self.previous;
        self.previous.clone_from(&support);
        if !stable || support == self.last_failed {
            return None;
        }
        let guess_signs: Vec<f64> = support.iter().map(|&j| sign(u[j])).collect();
        let accepted = crossover(a, b, support.clone(), &guess_signs, &mut self.corr, MAX_PIVOTS);
        if accepted.is_none() {
            self.last_failed = support;
        }
        accepted
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Primal simplex pivots on `min 1ᵀ(x⁺ + x⁻) s.t. A(x⁺ − x⁻) = b`, started
/// from the basis `support` and stopped after `max_pivots`.
///
/// The basis carries a sign per column (which of `x⁺`, `x⁻` is basic); its
/// dual is `ν = A_S⁻ᵀ s` and a column `j` prices out when `|aⱼᵀν| > 1`.
/// Returns the optimal `x` and `ν`, or `None` if the basis is singular or
/// the pivot budget runs out.
fn crossover(
    a: &DenseMatrix,
    b: &[f64],
    mut support: Vec<usize>,
    fallback_signs: &[f64],
    corr: &mut [f64],
    max_pivots: usize,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = a.cols();
    let (lu, xs) = basic_solution(a, b, &support)?;
    let mut basis = EtaBasis { lu, etas: Vec::new() };
    let mut signs: Vec<f64> = xs
        .iter()
        .zip(fallback_signs)
        .map(|(&v, &f)| if v != 0.0 { sign(v) } else if f != 0.0 { f } else { 1.0 })
        .collect();
    let mut values: Vec<f64> = xs.iter().zip(&signs).map(|(v, s)| v * s).collect();
    let mut in_support = vec![false; n];
    for &j in &support {
        in_support[j] = true;
    }
    let mut col = vec![0.0; a.rows()];
    for pivot in 0..=max_pivots {
        let nu = basis.solve_transpose(&signs);
        a.gemv_t(&nu, corr);
        // Dantzig pricing; Bland's rule once the budget is half spent
        let bland = pivot > max_pivots / 2;
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..n {
            if in_support[j] {
                continue;
            }
            let c = corr[j].abs();
            if c > 1.0 + POLISH_SLACK {
                if bland {
                    entering = Some((j, c));
                    break;
                }
                if entering.map_or(true, |(_, best)| c > best) {
                    entering = Some((j, c));
                }
            }
        }
        let Some((j, _)) = entering else {
            let (x, nu) = if basis.etas.is_empty() {
                let mut x = vec![0.0; n];
                for ((&k, &v), &s) in support.iter().zip(&values).zip(&signs) {
                    x[k] = v * s;
                }
                (x, nu)
            } else {
                // refactor so the returned point carries no update drift
                let (lu, xs) = basic_solution(a, b, &support)?;
                let mut x = vec![0.0; n];
                for (&k, &v) in support.iter().zip(&xs) {
                    x[k] = v;
                }
                (x, lu.solve_transpose(&signs))
            };
            return Some((x, nu));
        };
        if pivot == max_pivots {
            break;
        }
        let sigma = sign(corr[j]);
        for (i, c) in col.iter_mut().enumerate() {
            *c = a.get(i, j);
        }
        let d = basis.solve(&col);
        let mut leave: Option<(usize, f64)> = None;
        for (k, (&dk, &sk)) in d.iter().zip(&signs).enumerate() {
            let rate = sigma * dk * sk;
            if rate > 1e-12 {
                let ratio = values[k].max(0.0) / rate;
                let better = match leave {
                    None => true,
                    Some((kk, r)) => ratio < r || (bland && ratio == r && support[k] < support[kk]),
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
        }
        // unbounded ray cannot happen for a norm objective; treat as failure
        let (k, step) = leave?;
        for (v, (&dk, &sk)) in values.iter_mut().zip(d.iter().zip(&signs)) {
            *v -= step * sigma * dk * sk;
        }
        in_support[support[k]] = false;
        in_support[j] = true;
        support[k] = j;
        signs[k] = sigma;
        values[k] = step;
        if d[k].abs() <= 1e-10 * d.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())) {
            return None;
        }
        basis.etas.push((k, d));
    }
    None
}

/// `A_S` after a sequence of column replacements, kept as the factor of the
/// initial basis plus one elementary matrix per replacement.
struct EtaBasis {
    lu: LuFactor,
    /// `(k, d)`: column `k` was replaced by `a` with `d = B⁻¹a` at that time.
    etas: Vec<(usize, Vec<f64>)>,
}

impl EtaBasis {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut v = self.lu.solve(rhs);
        for (k, d) in &self.etas {
            let vk = v[*k] / d[*k];
            for (vi, di) in v.iter_mut().zip(d) {
                *vi -= di * vk;
            }
            v[*k] = vk;
        }
        v
    }

    fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let mut u = rhs.to_vec();
        for (k, d) in self.etas.iter().rev() {
            let dot_du: f64 = d.iter().zip(&u).map(|(x, y)| x * y).sum();
            u[*k] = u[*k] - (dot_du - u[*k]) / d[*k];
        }
        self.lu.solve_transpose(&u)
    }
}

fn basic_solution(a: &DenseMatrix, b: &[f64], support: &[usize]) -> Option<(LuFactor, Vec<f64>)> {
    let lu = LuFactor::new(&a.select_columns(support)).ok()?;
    let xs = lu.solve(b);
    Some((lu, xs))
}

/// Exhaustive ground truth for tiny instances (`n ≤ 20`).
///
/// At `p = 1` every `m`-column subset with invertible `A_S` yields a basic
/// solution and the minimum of ‖·‖₁ is attained at one of them. The
/// returned status is [`SolveStatus::CertifiedNonuniqueRisk`] when two
/// distinct basic solutions attain the minimum (then every point on the
/// segment between them is optimal) and [`SolveStatus::CertifiedUnique`]
/// otherwise. At `p = 2` the closed form is exact. For `1 < p < 2`
/// enumeration is not valid and the splitting solver runs with tolerances
/// ten times tighter.
pub fn solve_oracle(a: &DenseMatrix, b: &[f64], p: f64) -> Result<BpSolution> {
    check_exponent(p)?;
    check_rhs(a, b)?;
    let (m, n) = a.shape();
    if n > ORACLE_MAX_COLS {
        return Err(Error::OracleGuard { n, max: ORACLE_MAX_COLS });
    }
    if p > 1.0 {
        let base = SolverConfig::default();
        let cfg = SolverConfig {
            tol_primal: base.tol_primal / 10.0,
            tol_dual: base.tol_dual / 10.0,
            max_iters: base.max_iters * 10,
            ..base
        };
        return solve_bp(a, b, p, &cfg);
    }
    cholesky_gram(a)?;

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut tie = false;
    for support in Combinations::new(n, m) {
        let Some((lu, xs)) = basic_solution(a, b, &support) else { continue };
        let mut x = vec![0.0; n];
        for (&j, &v) in support.iter().zip(&xs) {
            x[j] = v;
        }
        let cost = lp_norm(&x, 1.0);
        let tol = 1e-9 * (1.0 + cost);
        match &best {
            Some((c, _, _)) if cost > *c + tol => {}
            Some((c, bx, _)) if cost >= *c - tol => {
                let dist = x.iter().zip(bx).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                if dist > 1e-9 * (1.0 + norm_inf(bx)) {
                    tie = true;
                }
            }
            _ => {
                let signs: Vec<f64> = xs.iter().map(|v| sign(*v)).collect();
                let nu = lu.solve_transpose(&signs);
                tie = false;
                best = Some((cost, x, nu));
            }
        }
    }
    let (_, x, nu) = best.ok_or_else(|| Error::Numerical("no invertible column subset".into()))?;
    let status = if tie { SolveStatus::CertifiedNonuniqueRisk } else { SolveStatus::CertifiedUnique };
    Ok(finish(a, b, x, nu, 1.0, 0, status))
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self { n, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// KKT certificate of ℓ¹ optimality and uniqueness.
///
/// With `S` the numerical support of `x`, solves `A_Sᵀν = sign(x_S)` in the
/// least-squares (minimum-norm) sense. Returns
/// [`SolveStatus::CertifiedUnique`] when the on-support equations hold to
/// `certificate_margin`, `A_S` has full column rank and every off-support
/// correlation `|aᵢᵀν|` is at most `1 − certificate_margin`;
/// [`SolveStatus::CertifiedNonuniqueRisk`] when the largest off-support
/// correlation lies within the margin of 1; [`SolveStatus::NotCertified`]
/// otherwise. The check is sufficient, not necessary.
pub fn certify(a: &DenseMatrix, sol: &BpSolution, cfg: &SolverConfig) -> Result<SolveStatus> {
    if sol.p != 1.0 {
        return Err(Error::Parameter(format!("the certificate is defined for p = 1 only, got p = {}", sol.p)));
    }
    let (m, n) = a.shape();
    if sol.x.len() != n {
        return Err(Error::Dimension(format!("solution of length {} for {} columns", sol.x.len(), n)));
    }
    let peak = norm_inf(&sol.x);
    let support: Vec<usize> =
        (0..n).filter(|&i| peak > 0.0 && sol.x[i].abs() > cfg.sparsity_rel_threshold * peak).collect();
    if support.is_empty() {
        if sol.rhs.iter().any(|&v| v != 0.0) {
            return Err(Error::Inconsistent("empty support for a non-zero right-hand side".into()));
        }
        return Ok(SolveStatus::CertifiedUnique);
    }
    if support.len() > m {
        return Ok(SolveStatus::NotCertified);
    }
    let signs: Vec<f64> = support.iter().map(|&i| sign(sol.x[i])).collect();
    // A_S has full column rank iff the Gram matrix A_Sᵀ A_S is positive definite.
    let a_s_t = a.select_columns(&support).transpose();
    let Ok(gram) = cholesky_gram(&a_s_t) else {
        return Ok(SolveStatus::NotCertified);
    };
    // minimum-norm ν = A_S (A_Sᵀ A_S)⁻¹ s
    let mut w = signs.clone();
    gram.solve_in_place(&mut w);
    let nu = a_s_t.mul_t_vec(&w)?;
    let corr = a.mul_t_vec(&nu)?;

    let on_support = support.iter().zip(&signs).fold(0.0_f64, |acc, (&i, s)| acc.max((corr[i] - s).abs()));
    if on_support > cfg.certificate_margin {
        return Ok(SolveStatus::NotCertified);
    }
    let mut in_support = vec![false; n];
    for &i in &support {
        in_support[i] = true;
    }
    let worst = (0..n).filter(|&i| !in_support[i]).fold(0.0_f64, |acc, i| acc.max(corr[i].abs()));
    Ok(if worst <= 1.0 - cfg.certificate_margin {
        SolveStatus::CertifiedUnique
    } else if worst <= 1.0 + cfg.certificate_margin {
        SolveStatus::CertifiedNonuniqueRisk
    } else {
        SolveStatus::NotCertified
    })
}

/// Number of entries of `x` above the relative sparsity threshold.
pub fn census(x: &[f64], cfg: &SolverConfig) -> usize {
    support_size(x, cfg.sparsity_rel_threshold)
}
