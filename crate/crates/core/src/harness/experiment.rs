use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::ComplexityReport;
use crate::error::{Result, SlmError};
use crate::signal::{map_qam16, random_bits, stream_rng, to_db, SymbolSequence};
use crate::slm::{run_slm, Scheme, SlmConfig, SlmResult};

/// Trials handed to one worker at a time. Results are merged in chunk order,
/// so the output does not depend on the number of threads.
const CHUNK: u64 = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub configs: Vec<SlmConfig>,
    pub trials: u64,
    pub master_seed: u64,
    /// Re-run every trial in the other form and check the AG contract.
    #[serde(default)]
    pub verify: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(SlmError::Config("at least one trial is required".into()));
        }
        if self.configs.is_empty() {
            return Err(SlmError::Config("no configurations given".into()));
        }
        self.configs.iter().try_for_each(SlmConfig::validate)
    }
}

/// Everything measured for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigOutcome {
    pub config: SlmConfig,
    pub report: ComplexityReport,
    /// PAPR of the selected candidate per trial, in dB.
    #[serde(skip)]
    pub papr_db: Vec<f64>,
    /// Trials checked against the other form (zero unless verifying).
    pub verified_trials: u64,
}

/// The random 16-QAM data block of trial `trial`.
pub fn data_block(n_data: usize, seed: u64, trial: u64) -> Result<SymbolSequence> {
    map_qam16(&random_bits(4 * n_data, &mut stream_rng(seed, trial, 0)))
}

/// Checks that two runs of the same block in opposite forms agree.
pub fn check_equivalent(ag: &SlmResult, base: &SlmResult) -> Result<()> {
    if ag.selected_u != base.selected_u {
        return Err(SlmError::Mismatch(format!(
            "selected candidate {} with AG vs {} without",
            ag.selected_u, base.selected_u
        )));
    }
    if ag.selected_signal != base.selected_signal || ag.papr.to_bits() != base.papr.to_bits() {
        return Err(SlmError::Mismatch(format!("candidate {} samples differ", ag.selected_u)));
    }
    if ag.cost.total() > base.cost.total() {
        return Err(SlmError::Mismatch(format!(
            "AG cost {} exceeds baseline cost {}",
            ag.cost.total(),
            base.cost.total()
        )));
    }
    Ok(())
}

/// Runs trial `trial` of `cfg`; with `verify`, also runs the opposite form.
pub fn run_trial(cfg: &SlmConfig, seed: u64, trial: u64, verify: bool) -> Result<SlmResult> {
    let x = data_block(cfg.n_data, seed, trial)?;
    let cfg = cfg.clone().with_seed(seed).with_trial(trial);
    let result = run_slm(&x, &cfg)?;
    if verify {
        let other = run_slm(&x, &cfg.clone().with_ag(!cfg.ag))?;
        let (ag, base) = if cfg.ag { (&result, &other) } else { (&other, &result) };
        check_equivalent(ag, base).map_err(|e| SlmError::Mismatch(format!("trial {trial}, {cfg:?}: {e}")))?;
    }
    Ok(result)
}

fn check_counts(cfg: &SlmConfig, counts: &[usize]) -> Result<()> {
    cfg.validate()?;
    if counts.is_empty() || counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SlmError::Config(format!("candidate counts {counts:?} must be increasing")));
    }
    if *counts.last().unwrap() != cfg.candidates {
        return Err(SlmError::Config(format!("largest candidate count must equal U = {}", cfg.candidates)));
    }
    if cfg.scheme == Scheme::Baxley && counts.len() > 1 {
        // A shorter Baxley run falls back (and, under AG, finishes its parked
        // transforms) at a different point, so it is not a prefix of a longer one.
        return Err(SlmError::Config("Baxley runs cannot be split into prefixes".into()));
    }
    counts.iter().try_for_each(|&k| {
        let mut c = cfg.clone();
        c.candidates = k;
        c.validate()
    })
}

/// Runs `cfg` once per trial and reports every prefix `U' in counts` of the
/// candidate list. Candidate `u` never depends on later candidates in the
/// sequential schemes, so a run with `U` candidates contains the run with
/// `U' < U` candidates as its first `U'` traces.
pub fn run_sweep(
    cfg: &SlmConfig,
    counts: &[usize],
    trials: u64,
    seed: u64,
    verify: bool,
) -> Result<Vec<ConfigOutcome>> {
    check_counts(cfg, counts)?;
    if trials == 0 {
        return Err(SlmError::Config("at least one trial is required".into()));
    }
    let len = cfg.transform_len();
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Vec<ConfigOutcome>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Vec<ConfigOutcome>> {
            let mut outcomes: Vec<ConfigOutcome> = Vec::with_capacity(counts.len());
            for trial in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let r = run_trial(cfg, seed, trial, verify)?;
                if outcomes.is_empty() {
                    outcomes = counts
                        .iter()
                        .map(|&k| {
                            let mut c = cfg.clone().with_seed(seed);
                            c.candidates = k;
                            ConfigOutcome {
                                config: c,
                                report: ComplexityReport::for_run(&r.cost, k, len),
                                papr_db: Vec::new(),
                                verified_trials: 0,
                            }
                        })
                        .collect();
                }
                for o in &mut outcomes {
                    let k = o.config.candidates;
                    o.report.record(&r.cost)?;
                    let best = r.cost.candidates[..k.min(r.cost.candidates.len())]
                        .iter()
                        .filter_map(|c| c.papr)
                        .fold(f64::INFINITY, f64::min);
                    // Baxley may stop before U; its selection is the result's.
                    let papr = if k == cfg.candidates { r.papr } else { best };
                    o.papr_db.push(to_db(papr));
                    o.verified_trials += verify as u64;
                }
            }
            Ok(outcomes)
        })
        .collect::<Result<_>>()?;

    let mut merged = partials.into_iter();
    let mut total = merged.next().expect("at least one chunk");
    for part in merged {
        for (acc, o) in total.iter_mut().zip(part) {
            acc.report.merge(&o.report)?;
            acc.papr_db.extend(o.papr_db);
            acc.verified_trials += o.verified_trials;
        }
    }
    Ok(total)
}

pub fn run_config(cfg: &SlmConfig, trials: u64, seed: u64, verify: bool) -> Result<ConfigOutcome> {
    Ok(run_sweep(cfg, &[cfg.candidates], trials, seed, verify)?.remove(0))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ConfigOutcome>> {
    spec.validate()?;
    spec.configs.iter().map(|cfg| run_config(cfg, spec.trials, spec.master_seed, spec.verify)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub papr_db: f64,
    /// Fraction of trials whose selected PAPR exceeds `papr_db`.
    pub ccdf: f64,
}

/// Empirical `Pr(PAPR > x)` on `grid`.
pub fn empirical_ccdf(papr_db: &[f64], grid: &[f64]) -> Vec<CcdfPoint> {
    let mut sorted = papr_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&x| {
            let at_most = sorted.partition_point(|&v| v <= x);
            CcdfPoint { papr_db: x, ccdf: (sorted.len() - at_most) as f64 / sorted.len() as f64 }
        })
        .collect()
}

/// `lo, lo + step, ..., hi` without accumulating rounding error.
pub fn db_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}
