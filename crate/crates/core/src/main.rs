use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use slm_ag::analytics::{theoretical_ccdf, ComplexityModel};
use slm_ag::harness::{
    db_grid, emit, empirical_ccdf, fig7_compare, k_curve, reproduce_table, run_config, OutputFormat, TableId,
};
use slm_ag::signal::from_db;
use slm_ag::slm::{Scheme, SlmConfig, DEFAULT_REMAINING_STAGES};
use slm_ag::Result;

const QUICK_TRIALS: u64 = 10_000;

#[derive(Parser)]
#[command(name = "slm-ag", version, about = "SLM PAPR reduction with adaptive generation: simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo cost and PAPR statistics for one configuration.
    Simulate {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reproduce one of the reference complexity tables (I, II, III or IV).
    Table {
        which: TableId,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Analytic vs simulated relative AG cost at the Nyquist rate.
    Fig7 {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        oversample: usize,
        /// Largest candidate count; the curve covers U = 2..=u-max.
        #[arg(long, default_value_t = 16)]
        u_max: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cost K(a)/T of producing the first a outputs of an N-point IFFT.
    Kcurve {
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Expected AG cost from the Gaussian model.
    Analyze {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        oversample: usize,
        #[arg(long, default_value_t = 16)]
        u: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Empirical CCDF of the selected PAPR.
    Ccdf {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 4.0)]
        from_db: f64,
        #[arg(long, default_value_t = 13.0)]
        to_db: f64,
        #[arg(long, default_value_t = 0.1)]
        step_db: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long, default_value = "conventional")]
    scheme: Scheme,
    /// Data subcarriers.
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    #[arg(long, default_value_t = 16)]
    u: usize,
    /// Use adaptive generation (default).
    #[arg(long, overrides_with = "no_ag")]
    ag: bool,
    #[arg(long, overrides_with = "ag")]
    no_ag: bool,
    /// Remaining stages after the common part (Lim).
    #[arg(long, default_value_t = DEFAULT_REMAINING_STAGES)]
    r: u32,
    /// HPA saturation threshold (Baxley).
    #[arg(long, default_value_t = 8.0)]
    gamma0_db: f64,
}

impl SchemeArgs {
    fn config(&self) -> SlmConfig {
        SlmConfig::new(self.scheme, self.n, self.oversample, self.u)
            .with_ag(!self.no_ag)
            .with_remaining_stages(self.r)
            .with_gamma0_db(self.gamma0_db)
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// 10^4 trials and doubled table tolerances.
    #[arg(long)]
    quick: bool,
    /// Re-run every trial in the other form and fail on any disagreement.
    #[arg(long)]
    verify: bool,
}

impl RunArgs {
    fn trials(&self) -> u64 {
        if self.quick {
            QUICK_TRIALS
        } else {
            self.trials
        }
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

impl OutArgs {
    fn emit<S: Serialize, R: Serialize>(&self, spec: &S, rows: &[R]) -> Result<()> {
        emit(self.out.as_deref(), self.format, spec, rows)
    }
}

#[derive(Serialize)]
struct RunSpec<'a> {
    config: &'a SlmConfig,
    trials: u64,
    master_seed: u64,
    verify: bool,
}

#[derive(Serialize)]
struct SimulationRow {
    scheme: Scheme,
    n: usize,
    oversample: usize,
    u: usize,
    ag: bool,
    trials: u64,
    unit: String,
    mean_cost: f64,
    stderr: f64,
    mean_papr_db: f64,
    abort_fraction: f64,
    verified_trials: u64,
}

#[derive(Serialize)]
struct AnalyzeRow {
    u: usize,
    expected_cost_t: f64,
    relative: f64,
    error_bound: f64,
    mean_samples: Option<f64>,
    truncated_mass: Option<f64>,
}

#[derive(Serialize)]
struct CcdfRow {
    papr_db: f64,
    ccdf: f64,
    gaussian_model: f64,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { scheme, run, out } => {
            let cfg = scheme.config();
            let trials = run.trials();
            let o = run_config(&cfg, trials, run.seed, run.verify)?;
            let later: u64 = o.report.aborts.iter().sum();
            let row = SimulationRow {
                scheme: cfg.scheme,
                n: cfg.n_data,
                oversample: cfg.oversampling,
                u: cfg.candidates,
                ag: cfg.ag,
                trials,
                unit: o.report.unit.to_string(),
                mean_cost: o.report.mean(),
                stderr: o.report.stderr(),
                mean_papr_db: o.papr_db.iter().sum::<f64>() / o.papr_db.len() as f64,
                abort_fraction: later as f64 / (trials * cfg.candidates as u64) as f64,
                verified_trials: o.verified_trials,
            };
            let spec = RunSpec { config: &cfg, trials, master_seed: run.seed, verify: run.verify };
            out.emit(&spec, &[row])?;
            Ok(true)
        }
        Command::Table { which, run, out } => {
            let table = reproduce_table(which, run.trials(), run.seed, run.quick, run.verify)?;
            let meta =
                serde_json::json!({"table": which, "trials": table.trials, "seed": table.seed, "quick": run.quick});
            // Keep stdout machine-readable when the rows go there.
            if out.out.is_some() {
                print!("{table}");
            } else {
                eprint!("{table}");
            }
            out.emit(&meta, &table.rows)?;
            Ok(table.all_within_tolerance())
        }
        Command::Fig7 { n, oversample, u_max, run, out } => {
            let us: Vec<usize> = (2..=u_max).collect();
            let pts = fig7_compare(n, oversample, &us, run.trials(), run.seed)?;
            out.emit(&serde_json::json!({"n": n, "trials": run.trials(), "seed": run.seed}), &pts)?;
            Ok(true)
        }
        Command::Kcurve { n, out } => {
            out.emit(&serde_json::json!({"n": n}), &k_curve(n)?)?;
            Ok(true)
        }
        Command::Analyze { n, oversample, u, out } => {
            let model = ComplexityModel::new(n, oversample)?;
            let rows = (1..=u)
                .map(|k| {
                    let est = model.expected_ag_cost(k)?;
                    let pmf = if k >= 2 { Some(model.pmf(k)?) } else { None };
                    Ok(AnalyzeRow {
                        u: k,
                        expected_cost_t: est.value,
                        relative: est.relative(),
                        error_bound: est.error_bound,
                        mean_samples: pmf.as_ref().map(|d| d.mean()),
                        truncated_mass: pmf.as_ref().map(|d| d.truncated_mass),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.emit(&serde_json::json!({"n": n, "u": u}), &rows)?;
            Ok(true)
        }
        Command::Ccdf { scheme, run, from_db: lo, to_db: hi, step_db, out } => {
            let cfg = scheme.config();
            let o = run_config(&cfg, run.trials(), run.seed, run.verify)?;
            let rows: Vec<CcdfRow> = empirical_ccdf(&o.papr_db, &db_grid(lo, hi, step_db))
                .into_iter()
                .map(|p| CcdfRow {
                    papr_db: p.papr_db,
                    ccdf: p.ccdf,
                    gaussian_model: theoretical_ccdf(from_db(p.papr_db), cfg.n_data, cfg.candidates),
                })
                .collect();
            let spec = RunSpec { config: &cfg, trials: run.trials(), master_seed: run.seed, verify: run.verify };
            out.emit(&spec, &rows)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some rows are outside tolerance");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
