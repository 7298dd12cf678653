//! Threshold SLM: candidates are tried in order and the first whose PAPR is
//! below the amplifier saturation level `gamma0` is sent. If none qualifies,
//! the lowest-PAPR candidate is sent.
//!
//! The threshold is relative to the ensemble mean power `E|x(n)|^2`, which
//! for unit-energy symbols on `N` data subcarriers is `N` with the
//! unnormalized transform. It is known before any sample is generated, so the
//! AG form can test samples against it directly. Individual blocks carry more
//! or less energy than this, which is what puts the cost numbers where they are.

use super::{exceeds, positive_power, CandidateTrace, GammaState, RunCost, Scheme, SlmConfig, SlmResult};
use crate::error::Result;
use crate::ifft::LazyIfft;
use crate::signal::{from_db, peak_power, Sample, SymbolSequence, MEAN_SYMBOL_ENERGY};

fn reference_power(x: &SymbolSequence) -> Result<f64> {
    positive_power(x.len() as f64 * MEAN_SYMBOL_ENERGY)
}

pub fn slm_baxley(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    cfg.check(Scheme::Baxley, false, x.len())?;
    let gamma0 = from_db(cfg.gamma0_db);
    let reference = reference_power(x)?;
    let mut graph = LazyIfft::new(cfg.transform_len())?;
    let mut cost = RunCost::new(Scheme::Baxley.cost_unit(), cfg);
    let mut fallback = GammaState::default();
    let mut best: Vec<Sample> = Vec::new();

    for u in 1..=cfg.candidates {
        graph.load(cfg.candidate_spectrum(x, u)?.symbols())?;
        let spent = graph.run_full();
        let papr = peak_power(graph.outputs()) / reference;
        cost.candidates.push(CandidateTrace {
            u,
            generated: graph.len(),
            cost: spent,
            aborted: false,
            threshold: gamma0,
            papr: Some(papr),
        });
        if papr < gamma0 {
            return SlmResult::new(u, graph.outputs().to_vec(), reference, cost);
        }
        if fallback.offer(u, papr) {
            best.clear();
            best.extend_from_slice(graph.outputs());
        }
    }
    SlmResult::new(fallback.best_u(), best, reference, cost)
}

/// AG form: every candidate, including the first, is generated lazily against
/// the fixed threshold `gamma0`. Disqualified graphs are kept so that, if no
/// candidate qualifies, they can be finished and the minimum selected.
pub fn slm_baxley_ag(x: &SymbolSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    cfg.check(Scheme::Baxley, true, x.len())?;
    let gamma0 = from_db(cfg.gamma0_db);
    let reference = reference_power(x)?;
    let mut cost = RunCost::new(Scheme::Baxley.cost_unit(), cfg);
    let mut parked: Vec<LazyIfft> = Vec::with_capacity(cfg.candidates);

    for u in 1..=cfg.candidates {
        let mut graph = LazyIfft::new(cfg.transform_len())?;
        graph.load(cfg.candidate_spectrum(x, u)?.symbols())?;
        let mut aborted = false;
        while graph.produced() < graph.len() {
            let (_, value, _) = graph.next_output()?;
            if exceeds(value, reference, gamma0) {
                aborted = true;
                break;
            }
        }
        if !aborted {
            let papr = peak_power(graph.outputs()) / reference;
            cost.candidates.push(CandidateTrace {
                u,
                generated: graph.len(),
                cost: graph.c_points(),
                aborted: false,
                threshold: gamma0,
                papr: Some(papr),
            });
            return SlmResult::new(u, graph.outputs().to_vec(), reference, cost);
        }
        cost.candidates.push(CandidateTrace {
            u,
            generated: graph.produced(),
            cost: graph.c_points(),
            aborted: true,
            threshold: gamma0,
            papr: None,
        });
        parked.push(graph);
    }

    // Nobody qualified: finish the parked transforms and take the minimum.
    let mut fallback = GammaState::default();
    for (graph, trace) in parked.iter_mut().zip(cost.candidates.iter_mut()) {
        trace.cost += graph.run_full();
        let papr = peak_power(graph.outputs()) / reference;
        trace.papr = Some(papr);
        fallback.offer(trace.u, papr);
    }
    let best = parked[fallback.best_u() - 1].outputs().to_vec();
    SlmResult::new(fallback.best_u(), best, reference, cost)
}
