//! Command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpinv_core::{alpha_star, ginv_p, mpp_inverse, spinv, validate, GenInverse, SolverConfig, TheoryQuery};

use crate::error::{AppError, AppResult};
use crate::experiments::{self, ExperimentName, ExperimentReport, ExperimentSpec, SpecOverrides};
use crate::io::{read_matrix, write_matrix};
use crate::verify;

/// Exit status for invalid arguments or configurations.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for IO, numerical or validation failures.
pub const EXIT_FAILURE: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "lpinv", version, about = "Entrywise lp-minimal generalized inverses of wide matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moore-Penrose pseudoinverse.
    Mpp(InOut),
    /// Entrywise l1-minimal (sparse) pseudoinverse.
    Spinv(InOut),
    /// Entrywise lp-minimal generalized inverse, 1 <= p <= 2.
    Ginv {
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        io: InOut,
    },
    /// Predicted value of (n/m)|X|_F^2.
    Theory(TheoryArgs),
    /// Run a named experiment and write its outputs.
    Experiment(ExperimentArgs),
    /// Run the acceptance checks.
    Verify {
        /// Run only these criteria (repeatable).
        #[arg(long = "criterion", value_name = "N")]
        criteria: Vec<u32>,
    },
}

#[derive(Debug, Args)]
pub struct InOut {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long = "out", value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta: f64,
    /// Finite dimension for Monte-Carlo evaluation.
    #[arg(long, conflicts_with = "limit")]
    pub n: Option<usize>,
    /// Closed-form n -> infinity value (p = 1 or p = 2).
    #[arg(long)]
    pub limit: bool,
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the full result as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// fig1_sparsity, fig2_boxplot, fig3_means, fig4_realizations or
    /// concentration (fig1 .. fig4 also accepted).
    pub name: Option<String>,
    /// JSON file with spec fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
}

impl ExperimentArgs {
    /// Defaults for the resolved name, then the config file, then flags.
    pub fn resolve(&self) -> AppResult<ExperimentSpec> {
        let config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
                serde_json::from_str::<SpecOverrides>(&text)
                    .map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?
            }
            None => SpecOverrides::default(),
        };
        let name = match &self.name {
            Some(s) => ExperimentName::parse(s).ok_or_else(|| {
                let known: Vec<&str> = ExperimentName::ALL.iter().map(|n| n.as_str()).collect();
                AppError::Usage(format!("unknown experiment {s:?}; expected one of {}", known.join(", ")))
            })?,
            None => config
                .name
                .ok_or_else(|| AppError::Usage("experiment name missing (positional or config \"name\")".into()))?,
        };
        let flags = SpecOverrides {
            name: None,
            n_values: self.n.clone(),
            delta_values: self.delta.clone(),
            p: self.p,
            trials: self.trials,
            base_seed: self.seed,
            output_dir: self.output_dir.clone(),
            m: self.m,
            repetitions: self.repetitions,
            mc_samples: self.mc_samples,
        };
        let spec = ExperimentSpec::defaults(name).apply(config).apply(flags);
        spec.validate()?;
        Ok(spec)
    }
}

fn invert(io: &InOut, f: impl FnOnce(&lpinv_core::DenseMatrix) -> lpinv_core::Result<GenInverse>) -> AppResult<u8> {
    let a = read_matrix(&io.input)?;
    let g = f(&a)?;
    let report = validate(&a, &g)?;
    write_matrix(&io.output, &g.x)?;
    println!(
        "{}: {}x{} -> {}, support {}, |X|_F^2 {:.6}, |X|_1 {:.6}, residual {:.3e}",
        g.method,
        a.rows(),
        a.cols(),
        io.output.display(),
        g.total_support(),
        g.frobenius_sq,
        g.entrywise_l1,
        g.gen_inverse_residual
    );
    for c in &report.checks {
        if !c.passed {
            eprintln!("check failed: {} = {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
        }
    }
    Ok(if report.passed() { 0 } else { EXIT_FAILURE })
}

fn theory(args: &TheoryArgs) -> AppResult<u8> {
    let q = match (args.limit, args.n) {
        (_, Some(n)) => TheoryQuery::finite(args.p, args.delta, n),
        (true, None) => TheoryQuery::limit(args.p, args.delta),
        (false, None) => return Err(AppError::Usage("give --n N or --limit".into())),
    };
    let q = q.with_samples(args.mc_samples).with_seed(args.seed);
    let r = alpha_star(&q)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        println!("t_star = {}", r.t_star);
        println!("D = {}", r.d_at_tstar);
        println!("stderr = {}", r.stderr);
        println!("alpha_star = {}", r.alpha_star);
        println!("alpha_star_sq = {}", r.alpha_star_sq);
        if !r.hypothesis_verified {
            println!("note: concentration hypothesis not established for 1 < p < 2");
        }
    }
    Ok(0)
}

fn experiment(args: &ExperimentArgs) -> AppResult<u8> {
    let spec = args.resolve()?;
    match experiments::run(&spec)? {
        ExperimentReport::Fig1(s) => println!(
            "{}: {}x{}, spinv support {} (mpp {}), all certified unique: {}",
            spec.name, s.m, s.n, s.spinv_total_support, s.mpp_total_support, s.spinv_all_certified_unique
        ),
        ExperimentReport::Fig2(s) => {
            for e in &s.experiments {
                println!(
                    "{}: experiment {}: spinv {:.4}, submatrix median {:.4}, max {:.4}",
                    spec.name, e.experiment, e.spinv_frobenius, e.submatrix.median, e.submatrix.max
                );
            }
        }
        ExperimentReport::Concentration(out) => {
            for c in &out.cells {
                let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{}: p={} n={} m={} delta={:.4}: mean {} sd {} over {}/{} (theory {:.4})",
                    spec.name,
                    c.p,
                    c.n,
                    c.m,
                    c.delta,
                    show(c.mean),
                    show(c.sd),
                    c.rows,
                    c.trials,
                    c.alpha_star_sq
                );
            }
        }
    }
    for f in experiments::output_files(&spec) {
        println!("wrote {}", f.display());
    }
    Ok(0)
}

fn run_verify(criteria: &[u32]) -> AppResult<u8> {
    let ids: Vec<u32> = if criteria.is_empty() { verify::CRITERIA.to_vec() } else { criteria.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !verify::CRITERIA.contains(id)) {
        return Err(AppError::Usage(format!("no criterion {bad}; valid are 1 to {}", verify::CRITERIA.len())));
    }
    let mut suite = verify::Suite::new();
    let mut failed = 0;
    for id in ids {
        let o = suite.run(id);
        println!("{o}");
        failed += usize::from(!o.passed);
    }
    Ok(if failed == 0 { 0 } else { EXIT_FAILURE })
}

pub fn execute(cli: &Cli) -> AppResult<u8> {
    let cfg = SolverConfig::default();
    match &cli.command {
        Command::Mpp(io) => invert(io, mpp_inverse),
        Command::Spinv(io) => invert(io, |a| spinv(a, &cfg)),
        Command::Ginv { p, io } => invert(io, |a| ginv_p(a, *p, &cfg)),
        Command::Theory(args) => theory(args),
        Command::Experiment(args) => experiment(args),
        Command::Verify { criteria } => run_verify(criteria),
    }
}

/// Parses arguments, runs the command and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                AppError::Usage(_) => EXIT_USAGE,
                AppError::Core(lpinv_core::Error::Parameter(_)) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            })
        }
    }
}
