//! Radix-2 decimation-in-time inverse FFT that can be evaluated one output at
//! a time.
//!
//! The butterfly graph has `log2 N + 1` stages. Stage 0 holds the inputs in
//! bit-reversed order, stage `n` holds `x(0..N)` in natural order. Every node
//! computed at stages `1..=n` is one *c-point*; a full transform costs
//! `N log2 N` of them regardless of twiddle values.
//!
//! The ancestors of output `x(i)` at stage `s` are exactly the `2^(n-s)` nodes
//! whose index is congruent to `i` modulo `2^s`. Each stage is therefore
//! stored class-major (node `i` at position `(i mod 2^s) * 2^(n-s) + (i >> s)`)
//! and memoized per residue class: one class of stage `s` is computed from one
//! class of stage `s-1` with a single twiddle factor, in a contiguous loop.
//! Node values do not depend on the order in which classes are filled, so lazy
//! and full evaluation agree bit for bit.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Result, SlmError};
use crate::signal::{is_power_of_two, Sample, SignalSequence, SymbolSequence};

/// `e^{+j 2 pi m / N}` for `m` in `0..N/2`.
#[derive(Debug)]
pub struct Twiddles {
    len: usize,
    table: Vec<Sample>,
}

impl Twiddles {
    fn build(len: usize) -> Self {
        let table = (0..len / 2)
            .map(|m| {
                if m == 0 {
                    Sample::new(1.0, 0.0)
                } else {
                    let (s, c) = (std::f64::consts::TAU * m as f64 / len as f64).sin_cos();
                    Sample::new(c, s)
                }
            })
            .collect();
        Self { len, table }
    }

    /// Shared table for transform length `len`, built on first use.
    pub fn for_len(len: usize) -> Arc<Twiddles> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Twiddles>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.read().expect("twiddle cache poisoned").get(&len) {
            return Arc::clone(t);
        }
        let mut w = cache.write().expect("twiddle cache poisoned");
        Arc::clone(w.entry(len).or_insert_with(|| Arc::new(Twiddles::build(len))))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

pub fn bit_reverse(value: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        value.reverse_bits() >> (usize::BITS - bits)
    }
}

fn log2_checked(len: usize) -> Result<u32> {
    if len < 2 || !is_power_of_two(len) {
        return Err(SlmError::InputShape(format!("transform length {len} is not a power of two >= 2")));
    }
    Ok(len.trailing_zeros())
}

/// Output visitation order `0, N/2, N/4, 3N/4, ...` (bit reversal of `0..N`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationOrder {
    order: Vec<usize>,
}

impl GenerationOrder {
    pub fn new(len: usize) -> Result<Self> {
        let bits = log2_checked(len)?;
        Ok(Self { order: (0..len).map(|a| bit_reverse(a, bits)).collect() })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }
}

/// Running count of computed c-points for one transform of length `N`.
/// One c-point is `t = T / (N log2 N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CPointMeter {
    count: u64,
    per_transform: u64,
}

impl CPointMeter {
    pub fn new(len: usize) -> Self {
        let bits = len.trailing_zeros() as u64;
        Self { count: 0, per_transform: len as u64 * bits }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `N log2 N`, the c-points in one full transform.
    pub fn per_transform(&self) -> u64 {
        self.per_transform
    }

    pub fn in_t(&self) -> f64 {
        self.count as f64 / self.per_transform as f64
    }

    fn add(&mut self, c_points: u64) {
        self.count += c_points;
        debug_assert!(self.count <= self.per_transform);
    }
}

/// Closed-form c-point cost of producing the first `a` outputs in
/// bit-reversed order:
/// `sum_{k=0}^{n-1} 2^k + sum_{k=0}^{n-1} floor((a-1)/2^k) 2^k`.
pub fn k_of_a(a: usize, len: usize) -> Result<u64> {
    let bits = log2_checked(len)?;
    k_of_a_last_stages(a, len, bits)
}

/// Same count restricted to the last `stages` stages of the graph.
pub fn k_of_a_last_stages(a: usize, len: usize, stages: u32) -> Result<u64> {
    let bits = log2_checked(len)?;
    if a == 0 || a > len {
        return Err(SlmError::InputShape(format!("output count {a} outside [1, {len}]")));
    }
    if stages > bits {
        return Err(SlmError::InputShape(format!("{stages} stages requested from a {bits}-stage transform")));
    }
    let m = (a - 1) as u64;
    Ok((0..stages).map(|k| (1 + (m >> k)) << k).sum())
}

/// Lazily evaluated butterfly graph with per-class memoization and an exact
/// c-point meter. One instance is reused across candidates via [`load`] and
/// [`resume_from`].
///
/// [`load`]: LazyIfft::load
/// [`resume_from`]: LazyIfft::resume_from
#[derive(Debug, Clone)]
pub struct LazyIfft {
    twiddles: Arc<Twiddles>,
    bits: u32,
    len: usize,
    /// Stages at or below `floor` are fully populated and never recomputed.
    floor: u32,
    stages: Vec<Vec<Sample>>,
    computed: Vec<Vec<bool>>,
    produced: usize,
    meter: CPointMeter,
}

impl LazyIfft {
    pub fn new(len: usize) -> Result<Self> {
        let bits = log2_checked(len)?;
        Ok(Self {
            twiddles: Twiddles::for_len(len),
            bits,
            len,
            floor: 0,
            stages: vec![vec![Sample::new(0.0, 0.0); len]; bits as usize + 1],
            computed: (0..=bits).map(|s| vec![false; 1 << s]).collect(),
            produced: 0,
            meter: CPointMeter::new(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn log2_len(&self) -> u32 {
        self.bits
    }

    fn reset(&mut self, floor: u32) {
        self.floor = floor;
        for (s, flags) in self.computed.iter_mut().enumerate() {
            flags.fill(s as u32 <= floor);
        }
        self.produced = 0;
        self.meter = CPointMeter::new(self.len);
    }

    /// Stages natural-order spectrum `x` at stage 0 and clears all memo state.
    pub fn load(&mut self, x: &[Sample]) -> Result<()> {
        if x.len() != self.len {
            return Err(SlmError::InputShape(format!(
                "input length {} does not match transform length {}",
                x.len(),
                self.len
            )));
        }
        let bits = self.bits;
        for (i, slot) in self.stages[0].iter_mut().enumerate() {
            *slot = x[bit_reverse(i, bits)];
        }
        self.reset(0);
        Ok(())
    }

    /// Seeds stage `stage` with class-major node values (as produced by
    /// [`StageSplit`]) and clears all memo state above it.
    pub fn resume_from(&mut self, stage: u32, values: &[Sample]) -> Result<()> {
        if stage > self.bits || values.len() != self.len {
            return Err(SlmError::InputShape(format!(
                "cannot seed stage {stage} of a {}-stage graph with {} values",
                self.bits,
                values.len()
            )));
        }
        self.stages[stage as usize].copy_from_slice(values);
        self.reset(stage);
        Ok(())
    }

    fn compute_class(&mut self, stage: usize, class: usize) {
        let half = 1usize << (stage - 1);
        let parent = class & (half - 1);
        let negate = class & half != 0;
        let run = self.len >> stage;
        let w = self.twiddles.table[parent << (self.bits as usize - stage)];
        let (lower, upper) = self.stages.split_at_mut(stage);
        let src = &lower[stage - 1][parent * 2 * run..(parent + 1) * 2 * run];
        let dst = &mut upper[0][class * run..(class + 1) * run];
        if negate {
            for (d, pair) in dst.iter_mut().zip(src.chunks_exact(2)) {
                *d = pair[0] - pair[1] * w;
            }
        } else {
            for (d, pair) in dst.iter_mut().zip(src.chunks_exact(2)) {
                *d = pair[0] + pair[1] * w;
            }
        }
        self.computed[stage][class] = true;
        self.meter.add(run as u64);
    }

    fn ensure(&mut self, stage: usize, class: usize) {
        if stage as u32 <= self.floor || self.computed[stage][class] {
            return;
        }
        self.ensure(stage - 1, class & ((1 << (stage - 1)) - 1));
        self.compute_class(stage, class);
    }

    /// Whether node `index` of stage `stage` holds its final value.
    pub fn is_computed(&self, stage: u32, index: usize) -> bool {
        stage <= self.floor || self.computed[stage as usize][index & ((1 << stage) - 1)]
    }

    /// Computes only the missing ancestors of the next output in bit-reversed
    /// order. Returns `(n, x(n), c-points added)`.
    pub fn next_output(&mut self) -> Result<(usize, Sample, u64)> {
        if self.produced == self.len {
            return Err(SlmError::Exhausted(self.len));
        }
        let index = bit_reverse(self.produced, self.bits);
        let before = self.meter.count();
        self.ensure(self.bits as usize, index);
        self.produced += 1;
        Ok((index, self.stages[self.bits as usize][index], self.meter.count() - before))
    }

    pub fn produced(&self) -> usize {
        self.produced
    }

    /// Computes every remaining node. Returns the c-points this added.
    pub fn run_full(&mut self) -> u64 {
        let before = self.meter.count();
        for stage in (self.floor as usize + 1)..=self.bits as usize {
            for class in 0..1usize << stage {
                if !self.computed[stage][class] {
                    self.compute_class(stage, class);
                }
            }
        }
        self.produced = self.len;
        self.meter.count() - before
    }

    /// Computes all nodes up to and including `stage`.
    pub fn run_to_stage(&mut self, stage: u32) -> u64 {
        let before = self.meter.count();
        let top = stage.min(self.bits) as usize;
        for s in (self.floor as usize + 1)..=top {
            for class in 0..1usize << s {
                if !self.computed[s][class] {
                    self.compute_class(s, class);
                }
            }
        }
        self.meter.count() - before
    }

    /// Class-major node values of one stage.
    pub fn stage_values(&self, stage: u32) -> &[Sample] {
        &self.stages[stage as usize]
    }

    /// `x(0..N)` in natural order. Only meaningful once every output exists.
    pub fn outputs(&self) -> &[Sample] {
        &self.stages[self.bits as usize]
    }

    pub fn meter(&self) -> CPointMeter {
        self.meter
    }

    pub fn c_points(&self) -> u64 {
        self.meter.count()
    }
}

/// Complete unnormalized inverse DFT through the butterfly graph, returning
/// the signal and the meter (always `N log2 N`).
pub fn full_ifft(x: &SymbolSequence) -> Result<(SignalSequence, CPointMeter)> {
    let mut graph = LazyIfft::new(x.len())?;
    graph.load(x.symbols())?;
    graph.run_full();
    Ok((SignalSequence::new(graph.outputs().to_vec(), 1), graph.meter()))
}

/// Transform split after stage `n - r`: the first `n - r` stages are shared by
/// all candidates, the last `r` stages run per candidate (fully or lazily).
#[derive(Debug, Clone)]
pub struct StageSplit {
    len: usize,
    bits: u32,
    remaining: u32,
    common: Vec<Sample>,
    common_cost: u64,
}

impl StageSplit {
    pub fn new(x: &SymbolSequence, remaining: u32) -> Result<Self> {
        let mut graph = LazyIfft::new(x.len())?;
        let bits = graph.log2_len();
        if remaining == 0 || remaining > bits {
            return Err(SlmError::InputShape(format!("remaining stage count {remaining} outside [1, {bits}]")));
        }
        graph.load(x.symbols())?;
        let common_cost = graph.run_to_stage(bits - remaining);
        Ok(Self { len: x.len(), bits, remaining, common: graph.stage_values(bits - remaining).to_vec(), common_cost })
    }

    pub fn split_stage(&self) -> u32 {
        self.bits - self.remaining
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    /// Class-major node values at the split stage.
    pub fn common_values(&self) -> &[Sample] {
        &self.common
    }

    /// c-points spent on the shared stages, `(n - r) N`.
    pub fn common_cost(&self) -> u64 {
        self.common_cost
    }

    /// Number of independent sub-transforms at the split stage, `2^r`.
    pub fn sub_transforms(&self) -> usize {
        1 << self.remaining
    }

    /// Seeds `graph` with the common stage values, each sub-transform output
    /// multiplied by `block_factors[b]` when given.
    pub fn resume(&self, block_factors: Option<&[Sample]>, graph: &mut LazyIfft) -> Result<()> {
        match block_factors {
            None => graph.resume_from(self.split_stage(), &self.common),
            Some(f) => {
                if f.len() != self.sub_transforms() {
                    return Err(SlmError::InputShape(format!(
                        "{} block factors for {} sub-transforms",
                        f.len(),
                        self.sub_transforms()
                    )));
                }
                let mask = self.sub_transforms() - 1;
                let rotated: Vec<Sample> = self.common.iter().enumerate().map(|(p, v)| v * f[p & mask]).collect();
                graph.resume_from(self.split_stage(), &rotated)
            }
        }
    }

    /// Frequency-domain vector equivalent to multiplying sub-transform `b` by
    /// `block_factors[b]`: sub-transform `b` only sees the inputs
    /// `X(k)` with `k mod 2^r = bitrev_r(b)`.
    pub fn equivalent_spectrum_phase(&self, block_factors: &[Sample]) -> Vec<Sample> {
        let mask = self.sub_transforms() - 1;
        (0..self.len).map(|k| block_factors[bit_reverse(k & mask, self.remaining)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::stream_rng;
    use rand::Rng;

    fn naive_idft(x: &[Sample]) -> Vec<Sample> {
        let n = x.len();
        (0..n)
            .map(|t| {
                x.iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let ang = std::f64::consts::TAU * ((k * t) % n) as f64 / n as f64;
                        v * Sample::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    fn random_block(len: usize, seed: u64) -> Vec<Sample> {
        let mut rng = stream_rng(seed, 0, 0);
        (0..len).map(|_| Sample::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    /// Node-granular memo graph used as an independent cost oracle.
    struct NodeOracle {
        done: Vec<Vec<bool>>,
        count: u64,
    }

    impl NodeOracle {
        fn new(bits: u32) -> Self {
            Self { done: vec![vec![false; 1 << bits]; bits as usize + 1], count: 0 }
        }

        fn touch(&mut self, stage: usize, i: usize) {
            if stage == 0 || self.done[stage][i] {
                return;
            }
            let h = 1 << (stage - 1);
            self.touch(stage - 1, i);
            self.touch(stage - 1, i ^ h);
            self.done[stage][i] = true;
            self.count += 1;
        }
    }

    #[test]
    fn eight_point_costs_match_worked_example() {
        let mut g = LazyIfft::new(8).unwrap();
        g.load(&random_block(8, 1)).unwrap();
        let steps: Vec<(usize, u64)> = (0..3).map(|_| g.next_output().map(|(i, _, c)| (i, c)).unwrap()).collect();
        assert_eq!(steps, vec![(0, 7), (4, 1), (2, 3)]);
        assert_eq!(g.c_points(), 11);
        g.run_full();
        assert_eq!(g.c_points(), 24);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(k_of_a(1, 8).unwrap(), 7);
        assert_eq!(k_of_a(2, 8).unwrap(), 8);
        assert_eq!(k_of_a(3, 8).unwrap(), 11);
        assert_eq!(k_of_a(8, 8).unwrap(), 24);
        assert_eq!(k_of_a(64, 128).unwrap(), 448);
        assert!(k_of_a(0, 8).is_err());
        assert!(k_of_a(9, 8).is_err());
        assert!(k_of_a(3, 12).is_err());
    }

    #[test]
    fn lazy_cost_matches_node_oracle() {
        for bits in 1..=7u32 {
            let len = 1usize << bits;
            let mut g = LazyIfft::new(len).unwrap();
            g.load(&random_block(len, 2)).unwrap();
            let mut oracle = NodeOracle::new(bits);
            for a in 1..=len {
                let (idx, _, _) = g.next_output().unwrap();
                oracle.touch(bits as usize, idx);
                assert_eq!(g.c_points(), oracle.count, "N={len} a={a}");
                for s in 1..=bits {
                    for i in 0..len {
                        assert_eq!(g.is_computed(s, i), oracle.done[s as usize][i]);
                    }
                }
            }
            assert!(matches!(g.next_output(), Err(SlmError::Exhausted(_))));
        }
    }

    #[test]
    fn full_transform_matches_direct_sum() {
        let x = random_block(16, 3);
        let (sig, meter) = full_ifft(&SymbolSequence::new(x.clone()).unwrap()).unwrap();
        assert_eq!(meter.count(), 64);
        let want = naive_idft(&x);
        let scale = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in sig.samples().iter().zip(&want) {
            assert!((a - b).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let (sig, _) = full_ifft(&SymbolSequence::new(vec![Sample::new(0.0, 0.0); 32]).unwrap()).unwrap();
        assert!(sig.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lazy_outputs_are_bitwise_equal_to_full() {
        let x = random_block(256, 4);
        let (full, _) = full_ifft(&SymbolSequence::new(x.clone()).unwrap()).unwrap();
        let mut g = LazyIfft::new(256).unwrap();
        g.load(&x).unwrap();
        let mut out = vec![Sample::new(f64::NAN, 0.0); 256];
        while let Ok((i, v, _)) = g.next_output() {
            out[i] = v;
        }
        assert_eq!(out.as_slice(), full.samples());
    }

    #[test]
    fn generation_order_is_bit_reversal() {
        let order = GenerationOrder::new(8).unwrap();
        assert_eq!(order.as_slice(), &[0, 4, 2, 6, 1, 5, 3, 7]);
    }

    #[test]
    fn stage_split_costs() {
        let x = SymbolSequence::new(random_block(64, 5)).unwrap();
        let split = StageSplit::new(&x, 2).unwrap();
        assert_eq!(split.common_cost(), 4 * 64);
        let mut g = LazyIfft::new(64).unwrap();
        split.resume(None, &mut g).unwrap();
        assert_eq!(g.run_full(), 2 * 64);
        let (full, _) = full_ifft(&x).unwrap();
        assert_eq!(g.outputs(), full.samples());

        let whole = StageSplit::new(&x, 6).unwrap();
        assert_eq!(whole.common_cost(), 0);
        whole.resume(None, &mut g).unwrap();
        assert_eq!(g.run_full(), 6 * 64);

        assert!(StageSplit::new(&x, 0).is_err());
        assert!(StageSplit::new(&x, 7).is_err());
    }

    #[test]
    fn lazy_resume_cost_counts_only_last_stages() {
        let x = SymbolSequence::new(random_block(128, 6)).unwrap();
        for r in 1..=7u32 {
            let split = StageSplit::new(&x, r).unwrap();
            let mut g = LazyIfft::new(128).unwrap();
            split.resume(None, &mut g).unwrap();
            let mut oracle = NodeOracle::new(7);
            // Everything below the split counts as already computed.
            for s in 1..=(7 - r) as usize {
                oracle.done[s].fill(true);
            }
            for a in 1..=128 {
                let (idx, _, _) = g.next_output().unwrap();
                oracle.touch(7, idx);
                let expect: u64 = (0..r).map(|k| (1 + ((a as u64 - 1) >> k)) << k).sum();
                assert_eq!(g.c_points(), expect, "r={r} a={a}");
                assert_eq!(g.c_points(), oracle.count);
                assert_eq!(k_of_a_last_stages(a, 128, r).unwrap(), expect);
            }
        }
    }

    #[test]
    fn block_rotation_equals_spectral_rotation() {
        let len = 64;
        let x = SymbolSequence::new(random_block(len, 7)).unwrap();
        let split = StageSplit::new(&x, 3).unwrap();
        let mut rng = stream_rng(7, 1, 1);
        let factors = crate::signal::random_quarter_turns(split.sub_transforms(), &mut rng);
        let mut g = LazyIfft::new(len).unwrap();
        split.resume(Some(&factors), &mut g).unwrap();
        g.run_full();
        let phase = split.equivalent_spectrum_phase(&factors);
        assert!(phase.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        let rotated: Vec<Sample> = x.symbols().iter().zip(&phase).map(|(a, b)| a * b).collect();
        let want = naive_idft(&rotated);
        for (a, b) in g.outputs().iter().zip(&want) {
            assert!((a - b).norm() < 1e-9 * len as f64);
        }
    }
}
