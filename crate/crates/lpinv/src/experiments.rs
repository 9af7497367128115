//! Experiment drivers behind the figures.
//!
//! Every output is a pure function of the spec and its base seed, except
//! the `wall_time_ms` column of trial records. Trial `t` of every cell uses
//! the matrix stream keyed by `child_seed(base_seed, t)`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lpinv_core::{
    alpha_star, gaussian_matrix, ginv_p, mpp_inverse, spinv, submatrix_inverse, DenseMatrix, GenInverse, SeededRng,
    SolverConfig, TStarUnit, TheoryQuery, TheoryResult,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::{support_pattern, write_csv, write_json, write_matrix, write_text};
use crate::plot;
use crate::stats::{mean_sd, Quartiles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Fig1Sparsity,
    Fig2Boxplot,
    Fig3Means,
    Fig4Realizations,
    Concentration,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 5] = [
        ExperimentName::Fig1Sparsity,
        ExperimentName::Fig2Boxplot,
        ExperimentName::Fig3Means,
        ExperimentName::Fig4Realizations,
        ExperimentName::Concentration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Fig1Sparsity => "fig1_sparsity",
            ExperimentName::Fig2Boxplot => "fig2_boxplot",
            ExperimentName::Fig3Means => "fig3_means",
            ExperimentName::Fig4Realizations => "fig4_realizations",
            ExperimentName::Concentration => "concentration",
        }
    }

    /// Accepts the full names and the short forms `fig1` … `fig4`.
    pub fn parse(s: &str) -> Option<Self> {
        let short = match s {
            "fig1" => Some(ExperimentName::Fig1Sparsity),
            "fig2" => Some(ExperimentName::Fig2Boxplot),
            "fig3" => Some(ExperimentName::Fig3Means),
            "fig4" => Some(ExperimentName::Fig4Realizations),
            _ => None,
        };
        short.or_else(|| Self::ALL.into_iter().find(|n| n.as_str() == s))
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    /// Concentration grids; `fig1`/`fig2` use `n_values[0]` as the width.
    pub n_values: Vec<usize>,
    pub delta_values: Vec<f64>,
    pub p: f64,
    /// Trials per cell; for `fig2` the submatrix draws per repetition.
    pub trials: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Fixed row count for `fig1`/`fig2`; concentration grids use
    /// `m = round(δn) + 1`.
    pub m: Option<usize>,
    /// Independent matrices in `fig2`.
    pub repetitions: usize,
    /// Monte-Carlo samples for finite-`n` theory (`1 < p < 2`).
    pub mc_samples: usize,
}

/// Partial spec from a config file or flags; present fields override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOverrides {
    pub name: Option<ExperimentName>,
    pub n_values: Option<Vec<usize>>,
    pub delta_values: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub trials: Option<usize>,
    pub base_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub m: Option<usize>,
    pub repetitions: Option<usize>,
    pub mc_samples: Option<usize>,
}

impl ExperimentSpec {
    pub fn defaults(name: ExperimentName) -> Self {
        let deltas: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let base = ExperimentSpec {
            name,
            n_values: vec![100, 200, 500],
            delta_values: deltas,
            p: 2.0,
            trials: 10,
            base_seed: 1,
            output_dir: PathBuf::from("out").join(name.as_str()),
            m: None,
            repetitions: 1,
            mc_samples: 10_000,
        };
        match name {
            ExperimentName::Fig1Sparsity => ExperimentSpec {
                n_values: vec![30],
                delta_values: vec![],
                p: 1.0,
                trials: 1,
                m: Some(10),
                ..base
            },
            ExperimentName::Fig2Boxplot => ExperimentSpec {
                n_values: vec![30],
                delta_values: vec![],
                p: 1.0,
                trials: 100,
                m: Some(20),
                repetitions: 5,
                ..base
            },
            ExperimentName::Fig3Means => base,
            ExperimentName::Fig4Realizations => ExperimentSpec { delta_values: vec![0.4], ..base },
            ExperimentName::Concentration => ExperimentSpec { n_values: vec![500], delta_values: vec![0.5], ..base },
        }
    }

    /// Overrides every field present in `o` except `name`, which selects
    /// the defaults and is resolved by the caller.
    pub fn apply(mut self, o: SpecOverrides) -> Self {
        if let Some(v) = o.n_values {
            self.n_values = v;
        }
        if let Some(v) = o.delta_values {
            self.delta_values = v;
        }
        if let Some(v) = o.p {
            self.p = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.base_seed {
            self.base_seed = v;
        }
        if let Some(v) = o.output_dir {
            self.output_dir = v;
        }
        if o.m.is_some() {
            self.m = o.m;
        }
        if let Some(v) = o.repetitions {
            self.repetitions = v;
        }
        if let Some(v) = o.mc_samples {
            self.mc_samples = v;
        }
        self
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |msg: String| Err(AppError::Usage(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(1.0..=2.0).contains(&self.p) {
            return bad(format!("p must lie in [1, 2], got {}", self.p));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad(format!("n_values must be non-empty and positive, got {:?}", self.n_values));
        }
        if let Some(d) = self.delta_values.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return bad(format!("every delta must lie in (0, 1), got {d}"));
        }
        match self.name {
            ExperimentName::Fig1Sparsity | ExperimentName::Fig2Boxplot => {
                let (m, n) = (self.m.unwrap_or(0), self.n_values[0]);
                if m == 0 || m > n {
                    return bad(format!("need 1 <= m <= n, got m = {m}, n = {n}"));
                }
                if self.repetitions == 0 {
                    return bad("repetitions must be at least 1".into());
                }
            }
            _ => {
                if self.delta_values.is_empty() {
                    return bad("delta_values must be non-empty".into());
                }
                if self.mc_samples < 1000 {
                    return bad(format!("mc_samples must be at least 1000, got {}", self.mc_samples));
                }
            }
        }
        Ok(())
    }
}

/// `m = round(δn) + 1`, so that `δ = (m − 1)/n` up to rounding.
pub fn rows_for(delta: f64, n: usize) -> usize {
    (delta * n as f64).round() as usize + 1
}

pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    SeededRng::child_seed(base_seed, trial as u64)
}

pub fn trial_matrix(base_seed: u64, trial: usize, m: usize, n: usize) -> AppResult<DenseMatrix> {
    Ok(gaussian_matrix(&mut SeededRng::new(trial_seed(base_seed, trial)), m, n)?)
}

/// Inverse used by the concentration experiments: the MPP at `p = 2`,
/// spinv at `p = 1` and column-wise ℓᵖ minimization otherwise.
pub fn lp_inverse(a: &DenseMatrix, p: f64, cfg: &SolverConfig) -> AppResult<GenInverse> {
    Ok(if p == 2.0 {
        mpp_inverse(a)?
    } else if p == 1.0 {
        spinv(a, cfg)?
    } else {
        ginv_p(a, p, cfg)?
    })
}

/// Trials whose uniqueness is not certified (`p = 1`) or whose solver ran
/// out of iterations are kept in the records but left out of cell
/// statistics.
pub fn is_excluded(g: &GenInverse, p: f64) -> bool {
    if p == 1.0 {
        !g.all_certified_unique()
    } else {
        g.any_max_iters()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// `(m − 1)/n` as realized.
    pub delta: f64,
    pub p: f64,
    pub method: String,
    pub frobenius_sq_scaled: f64,
    pub entrywise_l1: f64,
    pub total_support: usize,
    pub excluded: bool,
    pub wall_time_ms: f64,
}

pub fn run_trial(base_seed: u64, trial: usize, m: usize, n: usize, p: f64, cfg: &SolverConfig) -> AppResult<TrialRecord> {
    let a = trial_matrix(base_seed, trial, m, n)?;
    let start = Instant::now();
    let g = lp_inverse(&a, p, cfg)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(TrialRecord {
        seed: trial_seed(base_seed, trial),
        m,
        n,
        delta: (m - 1) as f64 / n as f64,
        p,
        method: g.method.to_string(),
        frobenius_sq_scaled: g.frobenius_sq_scaled(),
        entrywise_l1: g.entrywise_l1,
        total_support: g.total_support(),
        excluded: is_excluded(&g, p),
        wall_time_ms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub p: f64,
    pub n: usize,
    pub m: usize,
    pub delta_nominal: f64,
    pub delta: f64,
    pub trials: usize,
    /// Trials entering `mean`/`sd`; `rows + excluded = trials`.
    pub rows: usize,
    pub excluded: usize,
    /// Missing when every trial of the cell was excluded.
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub alpha_star_sq: f64,
    pub rel_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub p: f64,
    pub delta: f64,
    /// `inf` for the closed-form limit.
    pub n: String,
    pub t_star: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub alpha_star: f64,
    pub alpha_star_sq: f64,
    pub stderr: f64,
    pub t_star_unit: String,
}

impl TheoryRow {
    fn new(p: f64, delta: f64, n: Option<usize>, r: &TheoryResult) -> Self {
        TheoryRow {
            p,
            delta,
            n: n.map_or_else(|| "inf".to_string(), |n| n.to_string()),
            t_star: r.t_star,
            d: r.d_at_tstar,
            alpha_star: r.alpha_star,
            alpha_star_sq: r.alpha_star_sq,
            stderr: r.stderr,
            t_star_unit: match r.t_star_unit {
                TStarUnit::Absolute => "absolute".into(),
                TStarUnit::NormalizedBySqrtN => "normalized_by_sqrt_n".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub p: f64,
    pub n: usize,
    pub delta: f64,
    pub mean: Option<f64>,
    pub alpha_star_sq: f64,
    pub rel_deviation: Option<f64>,
}

/// Prediction for `(n/m)‖X‖_F²`: the closed-form limit at `p ∈ {1, 2}`,
/// finite-`n` Monte-Carlo otherwise.
pub fn theory_for(p: f64, delta: f64, n: usize, mc_samples: usize, seed: u64) -> AppResult<(TheoryResult, Option<usize>)> {
    if p == 1.0 || p == 2.0 {
        Ok((alpha_star(&TheoryQuery::limit(p, delta))?, None))
    } else {
        let q = TheoryQuery::finite(p, delta, n).with_samples(mc_samples).with_seed(seed);
        Ok((alpha_star(&q)?, Some(n)))
    }
}

pub fn summarize_cell(records: &[TrialRecord], delta_nominal: f64, alpha_star_sq: f64) -> CellSummary {
    let first = &records[0];
    let kept: Vec<f64> = records.iter().filter(|r| !r.excluded).map(|r| r.frobenius_sq_scaled).collect();
    let (mean, sd) = match mean_sd(&kept) {
        Some((mu, s)) => (Some(mu), s),
        None => (None, None),
    };
    CellSummary {
        p: first.p,
        n: first.n,
        m: first.m,
        delta_nominal,
        delta: first.delta,
        trials: records.len(),
        rows: kept.len(),
        excluded: records.len() - kept.len(),
        mean,
        sd,
        alpha_star_sq,
        rel_deviation: mean.map(|mu| (mu - alpha_star_sq) / alpha_star_sq),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationOutput {
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
    pub theory: Vec<TheoryRow>,
}

/// Runs every `(n, δ)` cell of the grid and writes `records.csv`,
/// `summary.csv`, `theory.csv`, `deviation.csv` and `plot.gp`.
pub fn run_concentration(spec: &ExperimentSpec) -> AppResult<ConcentrationOutput> {
    spec.validate()?;
    let cfg = SolverConfig::default();
    let mut records = Vec::new();
    let mut cells = Vec::new();
    let mut theory = Vec::new();
    for &n in &spec.n_values {
        for &delta in &spec.delta_values {
            let m = rows_for(delta, n);
            if m > n {
                return Err(AppError::Usage(format!("delta = {delta} gives m = {m} > n = {n}")));
            }
            let exact = (m - 1) as f64 / n as f64;
            let cell: Vec<TrialRecord> = (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(spec.base_seed, t, m, n, spec.p, &cfg))
                .collect::<AppResult<_>>()?;
            let (th, th_n) = theory_for(spec.p, exact, n, spec.mc_samples, spec.base_seed)?;
            let row = TheoryRow::new(spec.p, exact, th_n, &th);
            if !theory.contains(&row) {
                theory.push(row);
            }
            cells.push(summarize_cell(&cell, delta, th.alpha_star_sq));
            records.extend(cell);
        }
    }
    let dir = &spec.output_dir;
    write_csv(&dir.join("records.csv"), &records)?;
    write_csv(&dir.join("summary.csv"), &cells)?;
    write_csv(&dir.join("theory.csv"), &theory)?;
    let deviation: Vec<DeviationRow> = cells
        .iter()
        .map(|c| DeviationRow {
            p: c.p,
            n: c.n,
            delta: c.delta,
            mean: c.mean,
            alpha_star_sq: c.alpha_star_sq,
            rel_deviation: c.rel_deviation,
        })
        .collect();
    write_csv(&dir.join("deviation.csv"), &deviation)?;
    let script = match spec.name {
        ExperimentName::Fig4Realizations => plot::realizations(spec),
        _ => plot::means(spec),
    };
    write_text(&dir.join("plot.gp"), &script)?;
    Ok(ConcentrationOutput { records, cells, theory })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Summary {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub spinv_total_support: usize,
    pub spinv_per_column_support: Vec<usize>,
    pub spinv_all_certified_unique: bool,
    pub mpp_total_support: usize,
    pub spinv_entrywise_l1: f64,
    pub mpp_entrywise_l1: f64,
    pub spinv_frobenius_sq: f64,
    pub mpp_frobenius_sq: f64,
}

/// One Gaussian matrix, its MPP and its spinv, with their support patterns.
pub fn run_fig1(spec: &ExperimentSpec) -> AppResult<Fig1Summary> {
    spec.validate()?;
    let (m, n) = (spec.m.unwrap_or(10), spec.n_values[0]);
    let cfg = SolverConfig::default();
    let a = gaussian_matrix(&mut SeededRng::new(spec.base_seed), m, n)?;
    let mp = mpp_inverse(&a)?;
    let sp = spinv(&a, &cfg)?;
    let dir = &spec.output_dir;
    write_matrix(&dir.join("A.csv"), &a)?;
    write_matrix(&dir.join("mpp.csv"), &mp.x)?;
    write_matrix(&dir.join("spinv.csv"), &sp.x)?;
    write_text(&dir.join("support_mpp.txt"), &support_pattern(&mp.x, cfg.sparsity_rel_threshold))?;
    write_text(&dir.join("support_spinv.txt"), &support_pattern(&sp.x, cfg.sparsity_rel_threshold))?;
    let summary = Fig1Summary {
        m,
        n,
        seed: spec.base_seed,
        spinv_total_support: sp.total_support(),
        spinv_per_column_support: sp.per_column_support.clone(),
        spinv_all_certified_unique: sp.all_certified_unique(),
        mpp_total_support: mp.total_support(),
        spinv_entrywise_l1: sp.entrywise_l1,
        mpp_entrywise_l1: mp.entrywise_l1,
        spinv_frobenius_sq: sp.frobenius_sq,
        mpp_frobenius_sq: mp.frobenius_sq,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    write_text(&dir.join("plot.gp"), &plot::support(m, n))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub experiment: usize,
    pub draw: usize,
    pub submatrix_frobenius: f64,
    pub spinv_frobenius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Experiment {
    pub experiment: usize,
    pub seed: u64,
    pub spinv_frobenius: f64,
    pub spinv_all_certified_unique: bool,
    pub submatrix: Quartiles,
    /// `max / median` of the submatrix norms.
    pub tail_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Summary {
    pub m: usize,
    pub n: usize,
    pub draws: usize,
    pub experiments: Vec<Fig2Experiment>,
}

#[derive(Debug, Clone)]
pub struct Fig2Draws {
    pub a: DenseMatrix,
    pub spinv: GenInverse,
    /// Frobenius norms (not squared) of the submatrix inverses.
    pub submatrix_norms: Vec<f64>,
}

/// One repetition of fig2: the matrix and the submatrix draws come from the
/// same stream keyed by `seed`.
pub fn fig2_draws(seed: u64, m: usize, n: usize, draws: usize, cfg: &SolverConfig) -> AppResult<Fig2Draws> {
    let mut rng = SeededRng::new(seed);
    let a = gaussian_matrix(&mut rng, m, n)?;
    let sp = spinv(&a, cfg)?;
    let submatrix_norms = (0..draws)
        .map(|_| submatrix_inverse(&a, &mut rng).map(|g| g.frobenius_sq.sqrt()))
        .collect::<Result<_, _>>()?;
    Ok(Fig2Draws { a, spinv: sp, submatrix_norms })
}

/// Repeated: one Gaussian matrix, its spinv and `trials` random submatrix
/// inverses; Frobenius norms (not squared) are compared.
pub fn run_fig2(spec: &ExperimentSpec) -> AppResult<Fig2Summary> {
    spec.validate()?;
    let (m, n) = (spec.m.unwrap_or(20), spec.n_values[0]);
    let cfg = SolverConfig::default();
    let mut rows = Vec::new();
    let mut experiments = Vec::new();
    for r in 0..spec.repetitions {
        let seed = trial_seed(spec.base_seed, r);
        let draws = fig2_draws(seed, m, n, spec.trials, &cfg)?;
        let sp_norm = draws.spinv.frobenius_sq.sqrt();
        for (d, &norm) in draws.submatrix_norms.iter().enumerate() {
            rows.push(NormRow { experiment: r, draw: d, submatrix_frobenius: norm, spinv_frobenius: sp_norm });
        }
        let q = Quartiles::of(&draws.submatrix_norms);
        experiments.push(Fig2Experiment {
            experiment: r,
            seed,
            spinv_frobenius: sp_norm,
            spinv_all_certified_unique: draws.spinv.all_certified_unique(),
            tail_ratio: q.max / q.median,
            submatrix: q,
        });
    }
    let dir = &spec.output_dir;
    write_csv(&dir.join("norms.csv"), &rows)?;
    let summary = Fig2Summary { m, n, draws: spec.trials, experiments };
    write_json(&dir.join("summary.json"), &summary)?;
    write_text(&dir.join("plot.gp"), &plot::boxplot(spec.repetitions))?;
    Ok(summary)
}

/// What an experiment produced, for printing.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentReport {
    Fig1(Fig1Summary),
    Fig2(Fig2Summary),
    Concentration(ConcentrationOutput),
}

pub fn run(spec: &ExperimentSpec) -> AppResult<ExperimentReport> {
    match spec.name {
        ExperimentName::Fig1Sparsity => run_fig1(spec).map(ExperimentReport::Fig1),
        ExperimentName::Fig2Boxplot => run_fig2(spec).map(ExperimentReport::Fig2),
        _ => run_concentration(spec).map(ExperimentReport::Concentration),
    }
}

pub fn output_files(spec: &ExperimentSpec) -> Vec<PathBuf> {
    let names: &[&str] = match spec.name {
        ExperimentName::Fig1Sparsity => {
            &["A.csv", "mpp.csv", "spinv.csv", "support_mpp.txt", "support_spinv.txt", "summary.json", "plot.gp"]
        }
        ExperimentName::Fig2Boxplot => &["norms.csv", "summary.json", "plot.gp"],
        _ => &["records.csv", "summary.csv", "theory.csv", "deviation.csv", "plot.gp"],
    };
    names.iter().map(|f| Path::new(&spec.output_dir).join(f)).collect()
}
