//! Conversion-matrix SLM: one IFFT produces `x`, every other candidate is a
//! sparse circular combination of four shifted copies of `x`.
//!
//! With taps `t_m = j^{e_m} / 2` at offsets `d = (0, a, N/2, N/2 + a)` the
//! candidate is `x'(n) = sum_m t_m x(n + d_m)`, whose spectrum is `X(k) P(k)`
//! with `P(k) = sum_m t_m e^{j 2 pi k d_m / N}`. Only tap patterns with
//! `|P(k)| = 1` are used. `a = N/4` gives the classic quarter-shift kernels,
//! but those collapse to a couple of distinct PAPR shapes, so the catalog
//! spreads `a` over `(0, N/2)`.
//! Tap products are sign swaps plus an exact halving, so each output sample
//! costs three complex additions.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::{exceeds, positive_power, CandidateTrace, GammaState, RunCost, Scheme, SlmConfig, SlmResult};
use crate::error::{Result, SlmError};
use crate::ifft::GenerationOrder;
use crate::signal::{peak_power, quarter_turn, Sample, SignalSequence};

pub const ADDITIONS_PER_SAMPLE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConversionKernel {
    /// Circular offset `a` of the second tap; taps sit at `0, a, N/2, N/2 + a`.
    shift: usize,
    /// Tap `m` is `j^{exponents[m]} / 2`.
    exponents: [u8; 4],
}

#[inline]
fn rotate(v: Sample, e: u8) -> Sample {
    match e & 3 {
        0 => v,
        1 => Sample::new(-v.im, v.re),
        2 => -v,
        _ => Sample::new(v.im, -v.re),
    }
}

impl ConversionKernel {
    /// Builds a kernel for blocks of length `len` and checks `|P(k)| = 1`.
    pub fn new(len: usize, shift: usize, exponents: [u8; 4]) -> Result<Self> {
        if len < 4 || !len.is_multiple_of(2) || shift >= len / 2 {
            return Err(SlmError::Construction(format!("shift {shift} is not usable for block length {len}")));
        }
        let kernel = Self { shift, exponents };
        for (k, p) in kernel.frequency_response(len).iter().enumerate() {
            if (p.norm() - 1.0).abs() > 1e-9 {
                return Err(SlmError::Construction(format!(
                    "kernel {exponents:?} @ {shift} has |P({k})| = {} != 1",
                    p.norm()
                )));
            }
        }
        Ok(kernel)
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn exponents(&self) -> [u8; 4] {
        self.exponents
    }

    pub fn offsets(&self, len: usize) -> [usize; 4] {
        [0, self.shift, len / 2, len / 2 + self.shift]
    }

    pub fn taps(&self) -> [Sample; 4] {
        self.exponents.map(|e| quarter_turn(e as u64) * 0.5)
    }

    /// Equivalent frequency-domain rotation `P(k) = sum_m t_m e^{j 2 pi k d_m / N}`.
    pub fn frequency_response(&self, len: usize) -> Vec<Sample> {
        let taps = self.taps();
        let offsets = self.offsets(len);
        (0..len)
            .map(|k| {
                taps.iter()
                    .zip(offsets)
                    .map(|(t, d)| {
                        let ang = std::f64::consts::TAU * ((k * d) % len) as f64 / len as f64;
                        t * Sample::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    /// Output sample `n` of the converted sequence.
    #[inline]
    pub fn sample(&self, x: &[Sample], n: usize) -> Sample {
        let len = x.len();
        let half = len / 2;
        let e = self.exponents;
        let acc = rotate(x[n], e[0]) + rotate(x[(n + self.shift) % len], e[1]);
        let acc = acc + rotate(x[(n + half) % len], e[2]);
        let acc = acc + rotate(x[(n + half + self.shift) % len], e[3]);
        acc * 0.5
    }
}

pub const MAX_CONVERSIONS: usize = 11;

/// Kernels for candidates `2..=12` at block length `len`. Kernel `i` uses
/// shift `a_i = (i + 1) N / 24`, with the tap pattern alternating between
/// `(1, j^e, -1, j^e)/2` and `(1, j^e, 1, -j^e)/2`.
pub fn conversion_catalog(len: usize) -> Result<Vec<ConversionKernel>> {
    (0..MAX_CONVERSIONS)
        .map(|i| {
            let shift = ((i + 1) * len / 24).clamp(1, len / 2 - 1);
            let e1 = (i / 2 % 2) as u8;
            let exps = if i % 2 == 0 { [0, e1, 2, e1] } else { [0, e1, 0, e1 + 2] };
            ConversionKernel::new(len, shift, exps)
        })
        .collect()
}

fn cached_catalog(len: usize) -> Result<Arc<Vec<ConversionKernel>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<ConversionKernel>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.read().expect("catalog cache poisoned").get(&len) {
        return Ok(c.clone());
    }
    let built = Arc::new(conversion_catalog(len)?);
    cache.write().expect("catalog cache poisoned").insert(len, built.clone());
    Ok(built)
}

fn setup(x1: &SignalSequence, cfg: &SlmConfig, ag: bool) -> Result<(Arc<Vec<ConversionKernel>>, f64)> {
    cfg.check(Scheme::Wang, ag, x1.len())?;
    let catalog = cached_catalog(x1.len())?;
    if catalog.len() + 1 < cfg.candidates {
        return Err(SlmError::Construction(format!(
            "only {} conversion kernels available for U = {}",
            catalog.len(),
            cfg.candidates
        )));
    }
    Ok((catalog, positive_power(x1.mean_power())?))
}

fn first_candidate(x1: &SignalSequence, reference: f64) -> (CandidateTrace, f64) {
    let papr = x1.peak_power() / reference;
    let trace = CandidateTrace {
        u: 1,
        generated: x1.len(),
        cost: 0,
        aborted: false,
        threshold: f64::INFINITY,
        papr: Some(papr),
    };
    (trace, papr)
}

/// `x1` is the full IFFT of the oversampled block; its cost is not counted.
pub fn slm_wang(x1: &SignalSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    let (catalog, reference) = setup(x1, cfg, false)?;
    let len = x1.len();
    let mut cost = RunCost::new(Scheme::Wang.cost_unit(), cfg);
    let mut gamma = GammaState::default();
    let (trace, papr1) = first_candidate(x1, reference);
    cost.candidates.push(trace);
    gamma.offer(1, papr1);
    let mut best = x1.samples().to_vec();
    let mut buf = vec![Sample::new(0.0, 0.0); len];

    for u in 2..=cfg.candidates {
        let kernel = catalog[u - 2];
        for (n, slot) in buf.iter_mut().enumerate() {
            *slot = kernel.sample(x1.samples(), n);
        }
        let papr = peak_power(&buf) / reference;
        let threshold = gamma.gamma();
        if gamma.offer(u, papr) {
            best.copy_from_slice(&buf);
        }
        cost.candidates.push(CandidateTrace {
            u,
            generated: len,
            cost: ADDITIONS_PER_SAMPLE * len as u64,
            aborted: false,
            threshold,
            papr: Some(papr),
        });
    }
    SlmResult::new(gamma.best_u(), best, reference, cost)
}

/// AG form: each converted candidate is produced sample by sample and dropped
/// once a sample reaches the running minimum PAPR. Samples are visited in the
/// same bit-reversed order as the lazy IFFT; a natural-order scan meets the
/// first peak much later because neighbouring oversampled samples are
/// strongly correlated.
pub fn slm_wang_ag(x1: &SignalSequence, cfg: &SlmConfig) -> Result<SlmResult> {
    let (catalog, reference) = setup(x1, cfg, true)?;
    let len = x1.len();
    let order = GenerationOrder::new(len)?;
    let mut cost = RunCost::new(Scheme::Wang.cost_unit(), cfg);
    let mut gamma = GammaState::default();
    let (trace, papr1) = first_candidate(x1, reference);
    cost.candidates.push(trace);
    gamma.offer(1, papr1);
    let mut best = x1.samples().to_vec();
    let mut buf = vec![Sample::new(0.0, 0.0); len];

    for u in 2..=cfg.candidates {
        let kernel = catalog[u - 2];
        let threshold = gamma.gamma();
        let mut generated = 0;
        let mut aborted = false;
        for &n in order.as_slice() {
            let v = kernel.sample(x1.samples(), n);
            buf[n] = v;
            generated += 1;
            if exceeds(v, reference, threshold) {
                aborted = true;
                break;
            }
        }
        let papr = if aborted { None } else { Some(peak_power(&buf) / reference) };
        if let Some(p) = papr {
            gamma.offer(u, p);
            best.copy_from_slice(&buf);
        }
        cost.candidates.push(CandidateTrace {
            u,
            generated,
            cost: ADDITIONS_PER_SAMPLE * generated as u64,
            aborted,
            threshold,
            papr,
        });
    }
    SlmResult::new(gamma.best_u(), best, reference, cost)
}
