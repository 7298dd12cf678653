use super::{exceeds, positive_power, CandidateTrace, GammaState, RunCost, Scheme, SlmConfig, SlmResult};
use crate::error::Result;
use crate::ifft::LazyIfft;
use crate::signal::{mean_power, peak_power, Sample, SymbolSequence};

/// Generates every candidate with a full IFFT and keeps the lowest PAPR.
pub fn slm_conventional(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    cfg.check(Scheme::Conventional, false, x.len())?;
    let mut graph = LazyIfft::new(cfg.transform_len())?;
    let mut cost = RunCost::new(Scheme::Conventional.cost_unit(), cfg);
    let mut gamma = GammaState::default();
    let mut reference = 0.0;
    let mut best: Vec<Sample> = Vec::new();

    for u in 1..=cfg.candidates {
        graph.load(cfg.candidate_spectrum(x, u)?.symbols())?;
        let spent = graph.run_full();
        if u == 1 {
            reference = positive_power(mean_power(graph.outputs()))?;
        }
        let papr = peak_power(graph.outputs()) / reference;
        let threshold = gamma.gamma();
        if gamma.offer(u, papr) {
            best.clear();
            best.extend_from_slice(graph.outputs());
        }
        cost.candidates.push(CandidateTrace {
            u,
            generated: graph.len(),
            cost: spent,
            aborted: false,
            threshold,
            papr: Some(papr),
        });
    }
    SlmResult::new(gamma.best_u(), best, reference, cost)
}

/// Conventional SLM with adaptive generation: candidates after the first are
/// produced in bit-reversed order and dropped at the first sample whose
/// normalized power reaches the running minimum PAPR.
pub fn slm_conventional_ag(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    cfg.check(Scheme::Conventional, true, x.len())?;
    let mut graph = LazyIfft::new(cfg.transform_len())?;
    let mut cost = RunCost::new(Scheme::Conventional.cost_unit(), cfg);
    let mut gamma = GammaState::default();
    let mut reference = 0.0;
    let mut best: Vec<Sample> = Vec::new();

    for u in 1..=cfg.candidates {
        graph.load(cfg.candidate_spectrum(x, u)?.symbols())?;
        let threshold = gamma.gamma();
        if u == 1 {
            // Nothing to compare against yet: the first block is always complete.
            graph.run_full();
            reference = positive_power(mean_power(graph.outputs()))?;
        } else {
            let mut aborted = false;
            while graph.produced() < graph.len() {
                let (_, value, _) = graph.next_output()?;
                if exceeds(value, reference, threshold) {
                    aborted = true;
                    break;
                }
            }
            if aborted {
                cost.candidates.push(CandidateTrace {
                    u,
                    generated: graph.produced(),
                    cost: graph.c_points(),
                    aborted: true,
                    threshold,
                    papr: None,
                });
                continue;
            }
        }
        let papr = peak_power(graph.outputs()) / reference;
        let improved = gamma.offer(u, papr);
        debug_assert!(improved);
        best.clear();
        best.extend_from_slice(graph.outputs());
        cost.candidates.push(CandidateTrace {
            u,
            generated: graph.len(),
            cost: graph.c_points(),
            aborted: false,
            threshold,
            papr: Some(papr),
        });
    }
    SlmResult::new(gamma.best_u(), best, reference, cost)
}
