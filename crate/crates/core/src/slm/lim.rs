//! Intermediate-stage SLM: the first `n - r` IFFT stages are shared, each
//! candidate rotates the outputs of the `2^r` sub-transforms at that stage by
//! a quarter-turn factor and runs the last `r` stages on its own.
//!
//! Multiplying sub-transform `b` by a constant equals rotating every input
//! `X(k)` with `k mod 2^r = bitrev_r(b)` by that constant, so each candidate
//! is an ordinary unit-magnitude frequency-domain rotation of `X`.

use super::{exceeds, positive_power, CandidateTrace, GammaState, RunCost, Scheme, SlmConfig, SlmResult};
use crate::error::{Result, SlmError};
use crate::ifft::{LazyIfft, StageSplit};
use crate::signal::{mean_power, oversample, peak_power, Sample, SymbolSequence};

fn setup(x: &SymbolSequence, cfg: &SlmConfig, ag: bool) -> Result<(StageSplit, LazyIfft, RunCost)> {
    cfg.check(Scheme::Lim, ag, x.len())?;
    let split = StageSplit::new(&oversample(x, cfg.oversampling)?, cfg.remaining_stages)?;
    let mut cost = RunCost::new(Scheme::Lim.cost_unit(), cfg);
    cost.common = split.common_cost();
    Ok((split, LazyIfft::new(cfg.transform_len())?, cost))
}

fn seed_candidate(split: &StageSplit, cfg: &SlmConfig, u: usize, graph: &mut LazyIfft) -> Result<()> {
    if u == 1 {
        return split.resume(None, graph);
    }
    let factors = cfg.block_factors(u, split.sub_transforms());
    let equivalent = split.equivalent_spectrum_phase(&factors);
    if equivalent.iter().any(|p| (p.norm() - 1.0).abs() > 1e-12) {
        return Err(SlmError::Construction(format!(
            "candidate {u} does not correspond to a unit-magnitude spectral rotation"
        )));
    }
    split.resume(Some(&factors), graph)
}

pub fn slm_lim(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    let (split, mut graph, mut cost) = setup(x, cfg, false)?;
    let mut gamma = GammaState::default();
    let mut reference = 0.0;
    let mut best: Vec<Sample> = Vec::new();

    for u in 1..=cfg.candidates {
        seed_candidate(&split, cfg, u, &mut graph)?;
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

pub fn slm_lim_ag(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    let (split, mut graph, mut cost) = setup(x, cfg, true)?;
    let mut gamma = GammaState::default();
    let mut reference = 0.0;
    let mut best: Vec<Sample> = Vec::new();

    for u in 1..=cfg.candidates {
        seed_candidate(&split, cfg, u, &mut graph)?;
        let threshold = gamma.gamma();
        if u == 1 {
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
        gamma.offer(u, papr);
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
