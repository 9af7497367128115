//! Concentration predictions for `(n/m)‖X‖_F²` on Gaussian matrices.
//!
//! `D_p(t; n) = (E[dist(h, {‖·‖_{p*} ≤ t})] / √n)²` for `h ~ N(0, I_n)`,
//! `t*` solves `D(t) − (t/2)D'(t) = δ` and `α*² = D(t*) / (δ(δ − D(t*)))`,
//! with `δ = (m − 1)/n`. Closed forms exist in the `n → ∞` limit for
//! `p ∈ {1, 2}`; any `p ∈ [1, 2]` can be evaluated at finite `n` by
//! Monte-Carlo on a common random-number stream.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::prox::solve_power_shrink_from;
use crate::rng::SeededRng;

const FRAC_2_SQRT_PI: f64 = core::f64::consts::FRAC_2_SQRT_PI;
const SQRT_2: f64 = core::f64::consts::SQRT_2;
/// √(2/π)
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const MIN_MC_SAMPLES: usize = 1_000;
const MC_BLOCK: usize = 1_024;
const MAX_DOUBLINGS: usize = 60;

/// Complementary error function `(2/√π)∫_z^∞ e^{−s²} ds`.
pub fn erfc(z: f64) -> f64 {
    libm::erfc(z)
}

/// Inverse of [`erfc`] on `(0, 2)`: bracketing bisection refined by Newton
/// steps with `erfc'(z) = −(2/√π)e^{−z²}`.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::Domain(format!("erfc_inv needs 0 < y < 2, got {y}")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y > 1.0 {
        return erfc_inv(2.0 - y).map(|z| -z);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while erfc(hi) > y {
        lo = hi;
        hi *= 2.0;
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = erfc(z) - y;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let d = -FRAC_2_SQRT_PI * libm::exp(-z * z);
        let mut next = z - f / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - z).abs();
        z = next;
        if step <= 4.0 * f64::EPSILON * z || hi - lo <= 4.0 * f64::EPSILON * z {
            break;
        }
    }
    Ok(z)
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `θ(t) = E(|h| − t)₊²` for a standard normal `h`:
/// `(t² + 1)·erfc(t/√2) − √(2/π)·t·e^{−t²/2}`.
pub fn theta(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok((t * t + 1.0) * erfc(t / SQRT_2) - SQRT_2_OVER_PI * libm::exp(-0.5 * t * t) * t)
}

/// `θ'(t) = 2t·erfc(t/√2) − 2√(2/π)·e^{−t²/2}`.
pub fn theta_prime(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(2.0 * t * erfc(t / SQRT_2) - 2.0 * SQRT_2_OVER_PI * libm::exp(-0.5 * t * t))
}

/// Euclidean distance from `h` to the ball `{‖·‖_{p*} ≤ t}`, `p* = p/(p−1)`.
pub fn dist_to_dual_ball(h: &[f64], p: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Parameter(format!("exponent p must lie in [1, 2], got {p}")));
    }
    Ok(dist_unchecked(h, p, t))
}

fn dist_unchecked(h: &[f64], p: f64, t: f64) -> f64 {
    if p == 1.0 {
        libm::sqrt(clip_dist_sq(h, t))
    } else if p == 2.0 {
        let norm = libm::sqrt(h.iter().map(|v| v * v).sum::<f64>());
        (norm - t).max(0.0)
    } else {
        lq_ball_dist(h, p / (p - 1.0), t)
    }
}

#[inline]
fn clip_dist_sq(h: &[f64], t: f64) -> f64 {
    h.iter()
        .map(|v| {
            let e = v.abs() - t;
            if e > 0.0 {
                e * e
            } else {
                0.0
            }
        })
        .sum()
}

/// Distance to the ℓ^q ball of radius `t` for `2 < q < ∞`.
///
/// The projection has coordinates `yᵢ` solving `y + μq·y^{q−1} = |hᵢ|/t`
/// (radius rescaled to 1); the multiplier `μ > 0` makes `Σ yᵢ^q = 1`.
/// `Σ yᵢ^q` is close to a power of `μ`, so Newton runs on its logarithm
/// against `log μ`, started from the large-`μ` asymptote (an upper bound on
/// the root) and safeguarded by a bracket.
fn lq_ball_dist(h: &[f64], q: f64, t: f64) -> f64 {
    if t == 0.0 {
        return libm::sqrt(h.iter().map(|v| v * v).sum::<f64>());
    }
    let a: Vec<f64> = h.iter().map(|v| v.abs() / t).collect();
    let peak = a.iter().fold(0.0_f64, |acc, v| acc.max(*v));
    if peak == 0.0 {
        return 0.0;
    }
    let norm_q = peak * libm::pow(a.iter().map(|v| libm::pow(v / peak, q)).sum::<f64>(), 1.0 / q);
    if norm_q <= 1.0 {
        return 0.0;
    }
    let e = q - 1.0;
    // coordinate roots move monotonically in μ; the previous ones warm-start Newton
    let mut y = a.clone();
    let eval = |mu: f64, y: &mut [f64]| -> (f64, f64) {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (yi, &ai) in y.iter_mut().zip(&a) {
            let v = solve_power_shrink_from(ai, mu * q, e, *yi);
            *yi = v;
            if v > 0.0 {
                let ve = libm::pow(v, e);
                s += ve * v;
                let dy = -q * ve / (1.0 + mu * q * e * ve / v);
                ds += q * ve * dy;
            }
        }
        // Σ yᵢ^q − 1 and d log Σ yᵢ^q / d log μ
        (s - 1.0, mu * ds / s)
    };
    let r = q / e;
    let asym = libm::pow(a.iter().map(|v| libm::pow(v / peak, r)).sum::<f64>(), 1.0 / r) * peak / q;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, libm::log(asym));
    let mut s = hi;
    for _ in 0..200 {
        let (f, slope) = eval(libm::exp(s), &mut y);
        if f.abs() <= 1e-14 {
            break;
        }
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let mut next = if slope < 0.0 { s - libm::log1p(f) / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if lo.is_finite() { 0.5 * (lo + hi) } else { hi - 1.0 };
        }
        if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
            s = next;
            break;
        }
        s = next;
    }
    eval(libm::exp(s), &mut y);
    let d2: f64 = a.iter().zip(&y).map(|(ai, yi)| (ai - yi) * (ai - yi)).sum();
    t * libm::sqrt(d2)
}

/// Problem size: a finite `n` or the `n → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Horizon {
    Finite(usize),
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryQuery {
    pub p: f64,
    /// `δ = (m − 1)/n`.
    pub delta: f64,
    pub horizon: Horizon,
    pub mc_samples: usize,
    pub seed: u64,
    /// Use `θ(t) = E[dist²]/n` as a control variate (finite `n`, `p = 1`).
    pub control_variate: bool,
}

impl TheoryQuery {
    pub fn limit(p: f64, delta: f64) -> Self {
        Self { p, delta, horizon: Horizon::Limit, mc_samples: 100_000, seed: 0, control_variate: false }
    }

    pub fn finite(p: f64, delta: f64, n: usize) -> Self {
        Self { horizon: Horizon::Finite(n), ..Self::limit(p, delta) }
    }

    pub fn with_samples(mut self, mc_samples: usize) -> Self {
        self.mc_samples = mc_samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.p) {
            return Err(Error::Parameter(format!("p must lie in [1, 2], got {}", self.p)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.mc_samples < MIN_MC_SAMPLES {
            return Err(Error::Parameter(format!(
                "mc_samples must be at least {MIN_MC_SAMPLES}, got {}",
                self.mc_samples
            )));
        }
        if self.horizon == Horizon::Finite(0) {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TheoryMethod {
    ClosedFormLimit,
    MonteCarloFiniteN,
}

/// Unit of a reported `t*`. The `p = 2` limit is only meaningful as `t*/√n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TStarUnit {
    Absolute,
    NormalizedBySqrtN,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TStar {
    pub value: f64,
    pub unit: TStarUnit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryResult {
    pub t_star: f64,
    pub t_star_unit: TStarUnit,
    pub d_at_tstar: f64,
    pub alpha_star: f64,
    pub alpha_star_sq: f64,
    pub method: TheoryMethod,
    /// Monte-Carlo standard error of `D(t*)`; zero for closed forms.
    pub stderr: f64,
    /// False for `1 < p < 2`, where the lower bound on `−t*D'(t*)` that the
    /// concentration statement assumes is not established.
    pub hypothesis_verified: bool,
}

/// Monte-Carlo estimate of `D(t)` and its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    sy: f64,
    syy: f64,
    sc: f64,
    scc: f64,
    syc: f64,
}

impl Moments {
    fn push(&mut self, y: f64, c: f64) {
        self.n += 1.0;
        self.sy += y;
        self.syy += y * y;
        self.sc += c;
        self.scc += c * c;
        self.syc += y * c;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sy += o.sy;
        self.syy += o.syy;
        self.sc += o.sc;
        self.scc += o.scc;
        self.syc += o.syc;
    }
}

/// Common-random-number sampler for `D_p(t; n)`.
///
/// Every evaluation replays the same Gaussian vectors (block `k` is drawn
/// from the `k`-th child stream of the query seed), so estimates at
/// different `t` share their noise. At `p = 2` only `‖h‖` matters and the
/// norms are cached.
#[derive(Debug, Clone)]
pub struct DSampler {
    p: f64,
    n: usize,
    samples: usize,
    seed: u64,
    control_variate: bool,
    norms: Option<Vec<f64>>,
}

impl DSampler {
    pub fn new(q: &TheoryQuery) -> Result<Self> {
        q.validate()?;
        let Horizon::Finite(n) = q.horizon else {
            return Err(Error::Parameter("Monte-Carlo estimation needs a finite n".into()));
        };
        let mut s = Self {
            p: q.p,
            n,
            samples: q.mc_samples,
            seed: q.seed,
            control_variate: q.control_variate && q.p == 1.0,
            norms: None,
        };
        if q.p == 2.0 {
            let blocks = s.block_count();
            let per_block = map_blocks(blocks, |b| {
                let mut rng = SeededRng::new(s.seed).derive(b as u64);
                let mut h = vec![0.0; n];
                (0..s.block_len(b))
                    .map(|_| {
                        rng.fill_standard_normal(&mut h);
                        libm::sqrt(h.iter().map(|v| v * v).sum::<f64>())
                    })
                    .collect::<Vec<f64>>()
            });
            s.norms = Some(per_block.into_iter().flatten().collect());
        }
        Ok(s)
    }

    fn block_count(&self) -> usize {
        self.samples.div_ceil(MC_BLOCK)
    }

    fn block_len(&self, b: usize) -> usize {
        MC_BLOCK.min(self.samples - b * MC_BLOCK)
    }

    /// Estimates `D(t)` at every `t` in one pass over the samples.
    pub fn eval(&self, ts: &[f64]) -> Result<Vec<DEstimate>> {
        for &t in ts {
            check_t(t)?;
        }
        let sqrt_n = libm::sqrt(self.n as f64);
        let moments: Vec<Moments> = if let Some(norms) = &self.norms {
            ts.iter()
                .map(|&t| {
                    let mut mo = Moments::default();
                    for &r in norms {
                        let d = (r - t).max(0.0) / sqrt_n;
                        mo.push(d, d * d);
                    }
                    mo
                })
                .collect()
        } else {
            let per_block = map_blocks(self.block_count(), |b| {
                let mut rng = SeededRng::new(self.seed).derive(b as u64);
                let mut h = vec![0.0; self.n];
                let mut mo = vec![Moments::default(); ts.len()];
                for _ in 0..self.block_len(b) {
                    rng.fill_standard_normal(&mut h);
                    for (k, &t) in ts.iter().enumerate() {
                        let d2 = if self.p == 1.0 {
                            clip_dist_sq(&h, t)
                        } else {
                            let d = dist_unchecked(&h, self.p, t);
                            d * d
                        };
                        let c = d2 / self.n as f64;
                        mo[k].push(libm::sqrt(c), c);
                    }
                }
                mo
            });
            let mut total = vec![Moments::default(); ts.len()];
            for block in &per_block {
                for (acc, mo) in total.iter_mut().zip(block) {
                    acc.merge(mo);
                }
            }
            total
        };
        Ok(ts.iter().zip(moments).map(|(&t, mo)| self.finish(t, &mo)).collect())
    }

    fn finish(&self, t: f64, mo: &Moments) -> DEstimate {
        let n = mo.n;
        let mean_y = mo.sy / n;
        let var_y = ((mo.syy - n * mean_y * mean_y) / (n - 1.0)).max(0.0);
        let (mean, var) = if self.control_variate {
            let mean_c = mo.sc / n;
            let var_c = ((mo.scc - n * mean_c * mean_c) / (n - 1.0)).max(0.0);
            let cov = (mo.syc - n * mean_y * mean_c) / (n - 1.0);
            if var_c > 0.0 {
                let beta = cov / var_c;
                // E[c] = θ(t) exactly
                let th = theta(t).unwrap_or(0.0);
                (mean_y - beta * (mean_c - th), (var_y - cov * cov / var_c).max(0.0))
            } else {
                (mean_y, var_y)
            }
        } else {
            (mean_y, var_y)
        };
        DEstimate { estimate: mean * mean, stderr: 2.0 * mean.abs() * libm::sqrt(var / n) }
    }
}

#[cfg(feature = "parallel")]
fn map_blocks<T: Send, F: Fn(usize) -> T + Sync + Send>(blocks: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..blocks).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_blocks<T, F: Fn(usize) -> T>(blocks: usize, f: F) -> Vec<T> {
    (0..blocks).map(f).collect()
}

/// `(estimate, stderr)` of `D_p(t; n)`; the estimator squares the sample
/// mean of `dist/√n`.
pub fn monte_carlo_d(q: &TheoryQuery, t: f64) -> Result<(f64, f64)> {
    let e = DSampler::new(q)?.eval(&[t])?[0];
    Ok((e.estimate, e.stderr))
}

/// `g(t) = D(t) − (t/2)D'(t) − δ` with a central difference for `D'`.
fn g_value(sampler: &DSampler, t: f64, delta: f64) -> Result<(f64, DEstimate)> {
    let h = (1e-2 * t).max(1e-3);
    if t - h >= 0.0 {
        let e = sampler.eval(&[t - h, t, t + h])?;
        let slope = (e[2].estimate - e[0].estimate) / (2.0 * h);
        Ok((e[1].estimate - 0.5 * t * slope - delta, e[1]))
    } else {
        let e = sampler.eval(&[t, t + h])?;
        let slope = (e[1].estimate - e[0].estimate) / h;
        Ok((e[0].estimate - 0.5 * t * slope - delta, e[0]))
    }
}

/// Root of `D(t) − (t/2)D'(t) = δ`.
///
/// In the limit: `√2·erfc⁻¹(δ)` for `p = 1` and the normalized `t*/√n = 1 − δ`
/// for `p = 2`. At finite `n`: bisection on the Monte-Carlo `g(t)` after a
/// doubling search from `t = 1`.
pub fn t_star(q: &TheoryQuery) -> Result<TStar> {
    q.validate()?;
    match q.horizon {
        Horizon::Limit => limit_t_star(q.p, q.delta),
        Horizon::Finite(_) => {
            let sampler = DSampler::new(q)?;
            finite_t_star(&sampler, q.delta).map(|(t, _)| TStar { value: t, unit: TStarUnit::Absolute })
        }
    }
}

fn limit_t_star(p: f64, delta: f64) -> Result<TStar> {
    if p == 1.0 {
        Ok(TStar { value: SQRT_2 * erfc_inv(delta)?, unit: TStarUnit::Absolute })
    } else if p == 2.0 {
        Ok(TStar { value: 1.0 - delta, unit: TStarUnit::NormalizedBySqrtN })
    } else {
        Err(Error::Parameter(format!("no closed-form limit for p = {p}; use a finite n")))
    }
}

fn finite_t_star(sampler: &DSampler, delta: f64) -> Result<(f64, DEstimate)> {
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut g_hi, _) = g_value(sampler, hi, delta)?;
    let mut doublings = 0;
    while g_hi > 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::Numerical(format!(
                "no sign change of D(t) - (t/2)D'(t) - delta up to t = {hi} (g = {g_hi})"
            )));
        }
        lo = hi;
        hi *= 2.0;
        g_hi = g_value(sampler, hi, delta)?.0;
        doublings += 1;
    }
    if lo == 0.0 {
        let g0 = g_value(sampler, 0.0, delta)?.0;
        if g0 <= 0.0 {
            return Err(Error::Numerical(format!("D(0) - delta = {g0} is not positive")));
        }
    }
    while hi - lo > 1e-7 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if g_value(sampler, mid, delta)?.0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let d = sampler.eval(&[t])?[0];
    Ok((t, d))
}

/// `t*`, `D(t*)` and `α* = √(D(t*) / (δ(δ − D(t*))))`.
pub fn alpha_star(q: &TheoryQuery) -> Result<TheoryResult> {
    q.validate()?;
    let delta = q.delta;
    let (t, d, stderr, method) = match q.horizon {
        Horizon::Limit => {
            let ts = limit_t_star(q.p, delta)?;
            // p = 2: D(t*) → (1 − t*/√n)² = δ²;  p = 1: D(t*) → θ(t*)
            let d = if q.p == 2.0 { delta * delta } else { theta(ts.value)? };
            (ts, d, 0.0, TheoryMethod::ClosedFormLimit)
        }
        Horizon::Finite(_) => {
            let sampler = DSampler::new(q)?;
            let (t, e) = finite_t_star(&sampler, delta)?;
            (TStar { value: t, unit: TStarUnit::Absolute }, e.estimate, e.stderr, TheoryMethod::MonteCarloFiniteN)
        }
    };
    if !(d > 0.0 && d < delta) {
        return Err(Error::Numerical(format!("D(t*) = {d} outside (0, delta = {delta})")));
    }
    let alpha_star_sq = d / (delta * (delta - d));
    Ok(TheoryResult {
        t_star: t.value,
        t_star_unit: t.unit,
        d_at_tstar: d,
        alpha_star: libm::sqrt(alpha_star_sq),
        alpha_star_sq,
        method,
        stderr,
        hypothesis_verified: q.p == 1.0 || q.p == 2.0,
    })
}

/// Limiting `α*₁(δ)` in its explicit form
/// `√(1/(√(2/π)e^{−t²/2}t − δt²) − 1/δ)` with `t = √2·erfc⁻¹(δ)`.
pub fn alpha_star_l1_limit_explicit(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let t = SQRT_2 * erfc_inv(delta)?;
    let denom = SQRT_2_OVER_PI * libm::exp(-0.5 * t * t) * t - delta * t * t;
    Ok(libm::sqrt(1.0 / denom - 1.0 / delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Composite Simpson rule for `(2/√π)∫_z^{z+12} e^{−s²} ds`.
    fn erfc_quadrature(z: f64) -> f64 {
        let (a, b, k) = (z, z + 12.0, 200_000);
        let h = (b - a) / k as f64;
        let f = |s: f64| (-s * s).exp();
        let mut acc = f(a) + f(b);
        for i in 1..k {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        FRAC_2_SQRT_PI * acc * h / 3.0
    }

    #[test]
    fn erfc_examples() {
        assert_eq!(erfc(0.0), 1.0);
        for z in [0.5, 1.0, 2.0] {
            assert!(erfc(z) <= (-z * z).exp());
        }
        let oracle = erfc_quadrature(core::f64::consts::FRAC_1_SQRT_2);
        assert_abs_diff_eq!(erfc(core::f64::consts::FRAC_1_SQRT_2), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle, 0.317_310_507_862_914_1, epsilon = 1e-12);
    }

    #[test]
    fn erfc_against_quadrature_and_reflection() {
        for k in -12..=12 {
            let z = 0.5 * k as f64;
            let oracle = if z >= 0.0 { erfc_quadrature(z) } else { 2.0 - erfc_quadrature(-z) };
            assert_abs_diff_eq!(erfc(z), oracle, epsilon = 1e-12);
            assert_abs_diff_eq!(erfc(z) + erfc(-z), 2.0, epsilon = 1e-15);
            // 2 − erfc(−6) is below half an ulp of 2
            assert!(erfc(z) > 0.0 && (erfc(z) < 2.0 || z < -5.5));
        }
    }

    #[test]
    fn erfc_inv_examples() {
        assert_eq!(erfc_inv(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(erfc_inv(erfc(1.3)).unwrap(), 1.3, epsilon = 1e-10);
        // bisection on the quadrature oracle
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..45 {
            let mid = 0.5 * (lo + hi);
            if erfc_quadrature(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(erfc_inv(0.5).unwrap(), 0.5 * (lo + hi), epsilon = 1e-10);
        assert_abs_diff_eq!(erfc_inv(0.5).unwrap(), 0.476_936_276_204_469_9, epsilon = 1e-12);
    }

    #[test]
    fn erfc_inv_round_trip_and_domain() {
        for k in 1..=199 {
            let y = 0.01 * k as f64;
            let z = erfc_inv(y).unwrap();
            assert!((erfc(z) - y).abs() <= 1e-10, "y = {y}");
        }
        for y in [0.0, 2.0, -0.1, 2.5, f64::NAN] {
            assert!(matches!(erfc_inv(y), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn theta_examples_and_identity() {
        assert_eq!(theta(0.0).unwrap(), 1.0);
        let t = 1.0;
        let lhs = theta(t).unwrap() - 0.5 * t * theta_prime(t).unwrap();
        assert_abs_diff_eq!(lhs, 0.317_310_507_862_914_1, epsilon = 1e-12);
        assert!(theta(10.0).unwrap() < 1e-20);
        let worst = (0..=50)
            .map(|k| {
                let t = 0.1 * k as f64;
                (theta(t).unwrap() - 0.5 * t * theta_prime(t).unwrap() - erfc(t / SQRT_2)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
        assert!(matches!(theta(-0.1), Err(Error::Domain(_))));
        assert!(matches!(theta_prime(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_is_the_gaussian_expectation() {
        // E(|h| − t)₊² = 2∫_t^∞ (s − t)² φ(s) ds by Simpson
        for t in [0.0, 0.5, 1.7] {
            let (k, b) = (100_000, t + 14.0);
            let h = (b - t) / k as f64;
            let f = |s: f64| 2.0 * (s - t) * (s - t) * (-0.5 * s * s).exp() * SQRT_2_OVER_PI * 0.5;
            let mut acc = f(t) + f(b);
            for i in 1..k {
                acc += f(t + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            assert_abs_diff_eq!(theta(t).unwrap(), acc * h / 3.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn theta_derivative_matches_finite_difference() {
        for t in [0.3, 1.0, 2.5] {
            let h = 1e-5;
            let fd = (theta(t + h).unwrap() - theta(t - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(theta_prime(t).unwrap(), fd, epsilon = 1e-8);
            assert!(theta_prime(t).unwrap() < 0.0);
        }
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist_to_dual_ball(&[3.0, -1.0], 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(dist_to_dual_ball(&[3.0, 4.0], 2.0, 1.0).unwrap(), 4.0);
        for p in [1.0, 1.5, 2.0] {
            assert_eq!(dist_to_dual_ball(&[0.1, -0.2], p, 1.0).unwrap(), 0.0);
        }
        assert!(matches!(dist_to_dual_ball(&[1.0], 1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(dist_to_dual_ball(&[1.0], 2.5, 1.0), Err(Error::Parameter(_))));
    }

    /// Distance from `h ∈ ℝ²` to the boundary of the ℓ^q ball, by scanning
    /// the boundary curve.
    fn scan_lq_dist(h: [f64; 2], q: f64, t: f64) -> f64 {
        let k = 400_000;
        (0..k)
            .map(|i| {
                let th = 2.0 * core::f64::consts::PI * i as f64 / k as f64;
                let (s, c) = th.sin_cos();
                let r = t / (c.abs().powf(q) + s.abs().powf(q)).powf(1.0 / q);
                ((h[0] - r * c).powi(2) + (h[1] - r * s).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn interior_dist_matches_boundary_scan() {
        for (h, p, t) in [([3.0, -1.0], 1.5, 1.0), ([0.4, 2.2], 1.25, 0.7), ([5.0, 5.0], 1.8, 2.0)] {
            let q = p / (p - 1.0);
            let d = dist_to_dual_ball(&h, p, t).unwrap();
            assert_abs_diff_eq!(d, scan_lq_dist(h, q, t), epsilon = 1e-6);
        }
    }

    #[test]
    fn interior_dist_sits_between_endpoints() {
        // for fixed t the ℓ^q balls grow as q decreases towards 2
        let mut rng = SeededRng::new(12);
        let mut h = vec![0.0; 50];
        for _ in 0..20 {
            rng.fill_standard_normal(&mut h);
            let d1 = dist_to_dual_ball(&h, 1.0, 1.0).unwrap();
            let d15 = dist_to_dual_ball(&h, 1.5, 1.0).unwrap();
            let d2 = dist_to_dual_ball(&h, 2.0, 1.0).unwrap();
            assert!(d1 <= d15 + 1e-12 && d15 <= d2 + 1e-12);
        }
    }

    #[test]
    fn query_validation() {
        assert!(TheoryQuery::limit(0.5, 0.5).validate().is_err());
        assert!(TheoryQuery::limit(1.0, 1.0).validate().is_err());
        assert!(TheoryQuery::finite(1.0, 0.5, 10).with_samples(999).validate().is_err());
        assert!(TheoryQuery::finite(1.0, 0.5, 0).validate().is_err());
        assert!(matches!(monte_carlo_d(&TheoryQuery::limit(1.0, 0.5), 1.0), Err(Error::Parameter(_))));
        assert!(matches!(t_star(&TheoryQuery::limit(1.5, 0.5)), Err(Error::Parameter(_))));
    }

    #[test]
    fn monte_carlo_examples() {
        let n = 100.0;
        let q = TheoryQuery::finite(1.0, 0.5, 100).with_seed(1);
        let (d0, s0) = monte_carlo_d(&q, 0.0).unwrap();
        assert!(d0 >= n / (n + 1.0) - 3.0 * s0 && d0 <= 1.0 + 3.0 * s0, "{d0} ± {s0}");
        let (d1, s1) = monte_carlo_d(&q, 1.0).unwrap();
        let th = theta(1.0).unwrap();
        assert!(d1 >= th - 1.0 / n - 3.0 * s1 && d1 <= th + 3.0 * s1, "{d1} ± {s1}");

        let q2 = TheoryQuery::finite(2.0, 0.5, 2000).with_samples(20_000).with_seed(2);
        let (d, s) = monte_carlo_d(&q2, 0.0).unwrap();
        assert!((d - 1.0).abs() <= 3.0 * s + 1.0 / 2000.0, "{d} ± {s}");
    }

    #[test]
    fn control_variate_agrees_and_tightens() {
        let plain = TheoryQuery::finite(1.0, 0.5, 50).with_samples(20_000).with_seed(4);
        let cv = TheoryQuery { control_variate: true, ..plain };
        let (a, sa) = monte_carlo_d(&plain, 1.0).unwrap();
        let (b, sb) = monte_carlo_d(&cv, 1.0).unwrap();
        assert!(sb < sa);
        assert!((a - b).abs() <= 3.0 * sa);
    }

    #[test]
    fn estimates_are_reproducible() {
        let q = TheoryQuery::finite(1.5, 0.5, 30).with_samples(3000).with_seed(8);
        assert_eq!(monte_carlo_d(&q, 0.7).unwrap(), monte_carlo_d(&q, 0.7).unwrap());
        let other = q.with_seed(9);
        assert_ne!(monte_carlo_d(&q, 0.7).unwrap(), monte_carlo_d(&other, 0.7).unwrap());
    }

    #[test]
    fn d1_is_monotone_and_midpoint_convex_on_shared_stream() {
        let q = TheoryQuery::finite(1.0, 0.5, 50).with_samples(20_000).with_seed(3);
        let ts: Vec<f64> = (0..=30).map(|k| 0.1 * k as f64).collect();
        let e = DSampler::new(&q).unwrap().eval(&ts).unwrap();
        for w in e.windows(2) {
            assert!(w[1].estimate <= w[0].estimate + 3.0 * w[0].stderr);
        }
        for w in e.windows(3) {
            assert!(w[1].estimate <= 0.5 * (w[0].estimate + w[2].estimate) + 3.0 * w[1].stderr);
        }
    }

    #[test]
    fn sandwich_for_l1() {
        for n in [50usize, 200] {
            let q = TheoryQuery::finite(1.0, 0.5, n).with_samples(20_000).with_seed(n as u64);
            let ts = [0.5, 1.0, 2.0];
            let e = DSampler::new(&q).unwrap().eval(&ts).unwrap();
            for (t, d) in ts.iter().zip(&e) {
                let th = theta(*t).unwrap();
                let lo = th - 1.0 / n as f64 - 3.0 * d.stderr;
                let hi = th + 3.0 * d.stderr;
                assert!(d.estimate >= lo && d.estimate <= hi, "n={n} t={t}: {} vs [{lo}, {hi}]", d.estimate);
            }
        }
    }

    #[test]
    fn limit_t_star_examples() {
        let t = t_star(&TheoryQuery::limit(1.0, 0.5)).unwrap();
        assert_abs_diff_eq!(t.value, 0.674_489_750_196_081_7, epsilon = 1e-12);
        assert_eq!(t.unit, TStarUnit::Absolute);
        let t = t_star(&TheoryQuery::limit(2.0, 0.3)).unwrap();
        assert_abs_diff_eq!(t.value, 0.7, epsilon = 1e-15);
        assert_eq!(t.unit, TStarUnit::NormalizedBySqrtN);
    }

    #[test]
    fn limit_t_star_solves_the_theta_equation() {
        for k in 1..=9 {
            let delta = 0.1 * k as f64;
            let t = t_star(&TheoryQuery::limit(1.0, delta)).unwrap().value;
            let g = theta(t).unwrap() - 0.5 * t * theta_prime(t).unwrap();
            assert_abs_diff_eq!(g, delta, epsilon = 1e-12);
        }
    }

    #[test]
    fn finite_t_star_near_limit() {
        let q = TheoryQuery::finite(1.0, 0.5, 200).with_samples(20_000).with_seed(5);
        let t = t_star(&q).unwrap();
        assert!((t.value - 0.674_489_75).abs() <= 0.05, "{}", t.value);
    }

    #[test]
    fn alpha_star_limits() {
        let r = alpha_star(&TheoryQuery::limit(2.0, 0.75)).unwrap();
        assert_abs_diff_eq!(r.alpha_star, 2.0, epsilon = 1e-12);
        assert_eq!(r.method, TheoryMethod::ClosedFormLimit);
        let r = alpha_star(&TheoryQuery::limit(2.0, 1e-6)).unwrap();
        assert_abs_diff_eq!(r.alpha_star, 1.0, epsilon = 1e-6);

        let r = alpha_star(&TheoryQuery::limit(1.0, 0.5)).unwrap();
        assert!((r.alpha_star - 1.72).abs() < 0.005, "{}", r.alpha_star);
        assert_abs_diff_eq!(r.alpha_star, alpha_star_l1_limit_explicit(0.5).unwrap(), epsilon = 1e-10);
        assert!(r.hypothesis_verified);
    }

    #[test]
    fn explicit_l1_formula_agrees_on_grid() {
        for k in 1..=9 {
            let delta = 0.1 * k as f64;
            let r = alpha_star(&TheoryQuery::limit(1.0, delta)).unwrap();
            let explicit = alpha_star_l1_limit_explicit(delta).unwrap();
            assert!((r.alpha_star - explicit).abs() <= 1e-9 * explicit, "delta = {delta}");
            let r2 = alpha_star(&TheoryQuery::limit(2.0, delta)).unwrap();
            assert!(r.alpha_star >= r2.alpha_star);
            for res in [r, r2] {
                assert!(res.d_at_tstar > 0.0 && res.d_at_tstar < delta);
                let expect = res.d_at_tstar / (delta * (delta - res.d_at_tstar));
                assert!((res.alpha_star_sq - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn finite_alpha_star_l2_approaches_limit() {
        let q = TheoryQuery::finite(2.0, 0.5, 2000).with_samples(20_000).with_seed(6);
        let r = alpha_star(&q).unwrap();
        assert!((r.alpha_star - core::f64::consts::SQRT_2).abs() <= 0.05, "{}", r.alpha_star);
        assert_eq!(r.method, TheoryMethod::MonteCarloFiniteN);
        assert!(r.stderr > 0.0);
    }

    #[test]
    fn finite_alpha_star_l1_cross_checks_limit() {
        let q = TheoryQuery::finite(1.0, 0.5, 2000).with_samples(2_000).with_seed(7);
        let r = alpha_star(&q).unwrap();
        let lim = alpha_star_l1_limit_explicit(0.5).unwrap();
        assert!((r.alpha_star - lim).abs() <= 0.05, "{} vs {lim}", r.alpha_star);
    }

    #[test]
    fn interior_exponent_is_flagged_unverified() {
        let q = TheoryQuery::finite(1.5, 0.5, 50).with_samples(1_000).with_seed(1);
        let r = alpha_star(&q).unwrap();
        assert!(!r.hypothesis_verified);
        let lo = alpha_star(&TheoryQuery::limit(2.0, 0.5)).unwrap().alpha_star;
        let hi = alpha_star_l1_limit_explicit(0.5).unwrap();
        assert!(r.alpha_star > lo - 0.1 && r.alpha_star < hi + 0.1, "{}", r.alpha_star);
    }
}
