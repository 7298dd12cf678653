//! Selected-mapping schemes, each in a baseline form and an adaptive
//! generation (AG) form.
//!
//! The AG form generates a candidate one sample at a time and abandons it as
//! soon as a sample's normalized power reaches the current threshold. Both
//! forms of a scheme perform the same arithmetic per sample, so they select
//! the same candidate with bit-identical samples; only the metered cost
//! differs.

mod baxley;
mod conventional;
mod lim;
mod wang;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlmError};
use crate::ifft::full_ifft;
use crate::signal::{
    is_power_of_two, oversample, random_phase_vector, random_quarter_turns, stream_rng, to_db, Sample, SignalSequence,
    SymbolSequence,
};

pub use baxley::{slm_baxley, slm_baxley_ag};
pub use conventional::{slm_conventional, slm_conventional_ag};
pub use lim::{slm_lim, slm_lim_ag};
pub use wang::{conversion_catalog, slm_wang, slm_wang_ag, ConversionKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Conventional,
    Lim,
    Wang,
    Baxley,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Conventional, Scheme::Lim, Scheme::Wang, Scheme::Baxley];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Conventional => "conventional",
            Scheme::Lim => "lim",
            Scheme::Wang => "wang",
            Scheme::Baxley => "baxley",
        }
    }

    pub fn cost_unit(self) -> CostUnit {
        match self {
            Scheme::Wang => CostUnit::ComplexAdditions,
            _ => CostUnit::T,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = SlmError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SlmError::Config(format!("unknown scheme `{s}`")))
    }
}

/// Unit in which a scheme's cost is reported. `T` is one full IFFT of the
/// oversampled length; Wang's conversions are counted in complex additions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostUnit {
    T,
    #[serde(rename = "complex_additions")]
    ComplexAdditions,
}

impl fmt::Display for CostUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostUnit::T => "T",
            CostUnit::ComplexAdditions => "complex_additions",
        })
    }
}

pub const DEFAULT_REMAINING_STAGES: u32 = 5;
pub const WANG_CANDIDATE_COUNTS: [usize; 3] = [4, 8, 12];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlmConfig {
    /// Data subcarriers per block.
    pub n_data: usize,
    pub oversampling: usize,
    /// Number of candidates `U`, including the unrotated one.
    pub candidates: usize,
    pub scheme: Scheme,
    pub ag: bool,
    /// Stages left after the common part (Lim only).
    pub remaining_stages: u32,
    /// HPA saturation threshold in dB (Baxley only).
    pub gamma0_db: f64,
    /// Seed for the candidate rotation vectors.
    pub seed: u64,
    /// Stream index combined with `seed`; the harness uses the trial index.
    #[serde(default)]
    pub trial: u64,
}

impl SlmConfig {
    pub fn new(scheme: Scheme, n_data: usize, oversampling: usize, candidates: usize) -> Self {
        Self {
            n_data,
            oversampling,
            candidates,
            scheme,
            ag: false,
            remaining_stages: DEFAULT_REMAINING_STAGES,
            gamma0_db: 8.0,
            seed: 0,
            trial: 0,
        }
    }

    pub fn with_ag(mut self, ag: bool) -> Self {
        self.ag = ag;
        self
    }

    pub fn with_remaining_stages(mut self, r: u32) -> Self {
        self.remaining_stages = r;
        self
    }

    pub fn with_gamma0_db(mut self, db: f64) -> Self {
        self.gamma0_db = db;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trial(mut self, trial: u64) -> Self {
        self.trial = trial;
        self
    }

    /// Oversampled transform length `N = N_data * L`.
    pub fn transform_len(&self) -> usize {
        self.n_data * self.oversampling
    }

    /// `N log2 N` c-points per full transform.
    pub fn c_points_per_t(&self) -> u64 {
        let n = self.transform_len();
        n as u64 * n.trailing_zeros() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_data < 2 || !is_power_of_two(self.n_data) {
            return Err(SlmError::Config(format!("subcarrier count {} is not a power of two >= 2", self.n_data)));
        }
        if !is_power_of_two(self.oversampling) {
            return Err(SlmError::Config(format!("oversampling factor {} is not a power of two", self.oversampling)));
        }
        if self.candidates == 0 {
            return Err(SlmError::Config("at least one candidate is required".into()));
        }
        if self.candidates > 0xffff {
            return Err(SlmError::Config(format!("{} candidates is too many", self.candidates)));
        }
        match self.scheme {
            Scheme::Wang if !WANG_CANDIDATE_COUNTS.contains(&self.candidates) => Err(SlmError::Config(format!(
                "Wang's scheme supports U in {:?}, got {}",
                WANG_CANDIDATE_COUNTS, self.candidates
            ))),
            Scheme::Lim => {
                let bits = self.transform_len().trailing_zeros();
                if self.remaining_stages == 0 || self.remaining_stages > bits {
                    Err(SlmError::Config(format!("remaining stages r={} outside [1, {bits}]", self.remaining_stages)))
                } else {
                    Ok(())
                }
            }
            Scheme::Baxley if self.gamma0_db.is_nan() || self.gamma0_db <= 0.0 => {
                Err(SlmError::Config(format!("gamma0 = {} dB must be positive", self.gamma0_db)))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn check(&self, scheme: Scheme, ag: bool, input_len: usize) -> Result<()> {
        self.validate()?;
        if self.scheme != scheme || self.ag != ag {
            return Err(SlmError::Config(format!(
                "configuration is for {}{} but the {}{} routine was called",
                self.scheme,
                if self.ag { "+AG" } else { "" },
                scheme,
                if ag { "+AG" } else { "" },
            )));
        }
        let expected = if scheme == Scheme::Wang { self.transform_len() } else { self.n_data };
        if input_len != expected {
            return Err(SlmError::InputShape(format!(
                "input length {input_len} does not match the expected {expected}"
            )));
        }
        Ok(())
    }

    /// Oversampled spectrum of candidate `u` (`u = 1` is unrotated).
    pub(crate) fn candidate_spectrum(&self, x: &SymbolSequence, u: usize) -> Result<SymbolSequence> {
        let phase = random_phase_vector(u, x.len(), &mut stream_rng(self.seed, self.trial, u as u64));
        oversample(&x.rotate(&phase)?, self.oversampling)
    }

    /// Per-sub-transform factors for Lim's intermediate-stage rotation.
    pub(crate) fn block_factors(&self, u: usize, blocks: usize) -> Vec<Sample> {
        if u <= 1 {
            vec![Sample::new(1.0, 0.0); blocks]
        } else {
            random_quarter_turns(blocks, &mut stream_rng(self.seed, self.trial, u as u64))
        }
    }
}

/// What happened to one candidate during a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateTrace {
    pub u: usize,
    /// Samples produced before generation stopped (`a_u`); `N` if completed.
    pub generated: usize,
    /// Native-unit cost attributed to this candidate, including any resume.
    pub cost: u64,
    pub aborted: bool,
    /// Linear threshold in force while generating (`inf` before any candidate
    /// has completed).
    pub threshold: f64,
    /// Full PAPR (linear) if the candidate was completed.
    pub papr: Option<f64>,
}

/// Metered cost of one SLM run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunCost {
    pub unit: CostUnit,
    /// c-points in one full transform; converts c-point totals into `T`.
    pub c_points_per_t: u64,
    /// Cost shared by all candidates (Lim's common stages).
    pub common: u64,
    pub candidates: Vec<CandidateTrace>,
}

impl RunCost {
    fn new(unit: CostUnit, cfg: &SlmConfig) -> Self {
        Self { unit, c_points_per_t: cfg.c_points_per_t(), common: 0, candidates: Vec::new() }
    }

    /// Raw total in c-points or complex additions.
    pub fn total(&self) -> u64 {
        self.common + self.candidates.iter().map(|c| c.cost).sum::<u64>()
    }

    /// Raw total if only the first `count` candidates had been evaluated.
    /// Valid for the sequential schemes, where candidate `u` never depends on
    /// later ones.
    pub fn prefix_total(&self, count: usize) -> u64 {
        self.common + self.candidates.iter().take(count).map(|c| c.cost).sum::<u64>()
    }

    /// Converts a raw amount into the reporting unit.
    pub fn native(&self, raw: u64) -> f64 {
        match self.unit {
            CostUnit::T => raw as f64 / self.c_points_per_t as f64,
            CostUnit::ComplexAdditions => raw as f64,
        }
    }

    pub fn total_native(&self) -> f64 {
        self.native(self.total())
    }
}

/// Intermediate minimum PAPR, the abort threshold of the AG forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaState {
    gamma: f64,
    best_u: usize,
}

impl Default for GammaState {
    fn default() -> Self {
        Self { gamma: f64::INFINITY, best_u: 0 }
    }
}

impl GammaState {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn best_u(&self) -> usize {
        self.best_u
    }

    /// Strict-less-than update, so the first of several equal PAPRs wins.
    pub fn offer(&mut self, u: usize, papr: f64) -> bool {
        if papr < self.gamma {
            self.gamma = papr;
            self.best_u = u;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlmResult {
    pub selected_u: usize,
    pub selected_signal: SignalSequence,
    /// Denominator shared by every candidate's PAPR.
    pub reference_power: f64,
    pub papr: f64,
    pub papr_db: f64,
    pub cost: RunCost,
}

impl SlmResult {
    fn new(u: usize, samples: Vec<Sample>, reference_power: f64, cost: RunCost) -> Result<Self> {
        let selected_signal = SignalSequence::new(samples, u);
        let papr = selected_signal.papr_against(reference_power)?;
        Ok(Self { selected_u: u, selected_signal, reference_power, papr, papr_db: to_db(papr), cost })
    }
}

/// Abort test shared by every AG loop.
#[inline]
pub(crate) fn exceeds(sample: Sample, reference_power: f64, threshold: f64) -> bool {
    sample.norm_sqr() / reference_power >= threshold
}

pub(crate) fn positive_power(p: f64) -> Result<f64> {
    if p > 0.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(SlmError::Degenerate(format!("block power {p} is not positive")))
    }
}

/// Runs whichever scheme and form `cfg` describes on the data block `x`.
pub fn run_slm(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    match (cfg.scheme, cfg.ag) {
        (Scheme::Conventional, false) => slm_conventional(x, cfg),
        (Scheme::Conventional, true) => slm_conventional_ag(x, cfg),
        (Scheme::Lim, false) => slm_lim(x, cfg),
        (Scheme::Lim, true) => slm_lim_ag(x, cfg),
        (Scheme::Wang, ag) => {
            cfg.validate()?;
            let (x1, _) = full_ifft(&oversample(x, cfg.oversampling)?)?;
            if ag {
                slm_wang_ag(&x1, cfg)
            } else {
                slm_wang(&x1, cfg)
            }
        }
        (Scheme::Baxley, false) => slm_baxley(x, cfg),
        (Scheme::Baxley, true) => slm_baxley_ag(x, cfg),
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::signal::{map_qam16, random_bits};

    pub fn data_block(n_data: usize, seed: u64, trial: u64) -> SymbolSequence {
        map_qam16(&random_bits(4 * n_data, &mut stream_rng(seed, trial, 0))).unwrap()
    }

    /// Checks the AG/baseline contract on one block and returns both results.
    pub fn assert_equivalent(x: &SymbolSequence, cfg: &SlmConfig) -> (SlmResult, SlmResult) {
        let base = run_slm(x, &cfg.clone().with_ag(false)).unwrap();
        let ag = run_slm(x, &cfg.clone().with_ag(true)).unwrap();
        assert_eq!(base.selected_u, ag.selected_u, "{cfg:?}");
        assert_eq!(base.selected_signal, ag.selected_signal);
        assert_eq!(base.papr.to_bits(), ag.papr.to_bits());
        assert!(ag.cost.total() <= base.cost.total(), "{} > {}", ag.cost.total(), base.cost.total());
        (base, ag)
    }
}
