//! Baseband building blocks shared by every SLM scheme: 16-QAM mapping,
//! zero-insertion oversampling, power and PAPR measurement, and the
//! quarter-turn phase rotation vectors used to build candidates.
//!
//! Transforms in this crate use the unnormalized inverse DFT
//! `x(n) = sum_k X(k) e^{+j 2 pi k n / N}`. PAPR is scale invariant, so the
//! missing `1/N` factor never changes a selection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SlmError};

pub type Sample = Complex64;

/// Gray-coded 16-QAM levels per axis, indexed by the two bits `(b0 << 1) | b1`.
/// `00 -> +1`, `01 -> +3`, `10 -> -1`, `11 -> -3`; adjacent levels differ in one bit.
const QAM16_LEVELS: [f64; 4] = [1.0, 3.0, -1.0, -3.0];

/// Average symbol energy of the scaled constellation.
pub const MEAN_SYMBOL_ENERGY: f64 = 1.0;

fn qam16_scale() -> f64 {
    1.0 / 10f64.sqrt()
}

/// All 16 constellation points in bit-index order (I bits high, Q bits low).
pub fn qam16_alphabet() -> [Sample; 16] {
    let s = qam16_scale();
    std::array::from_fn(|idx| Sample::new(QAM16_LEVELS[idx >> 2] * s, QAM16_LEVELS[idx & 3] * s))
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Frequency-domain block `X(0..N)` together with the oversampling factor
/// that produced it (1 for a plain data block).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    symbols: Vec<Sample>,
    oversampling: usize,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<Sample>) -> Result<Self> {
        Self::with_oversampling(symbols, 1)
    }

    fn with_oversampling(symbols: Vec<Sample>, oversampling: usize) -> Result<Self> {
        if !is_power_of_two(symbols.len()) {
            return Err(SlmError::InputShape(format!("symbol block length {} is not a power of two", symbols.len())));
        }
        if symbols.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(SlmError::InputShape("symbol block contains a non-finite value".into()));
        }
        Ok(Self { symbols, oversampling })
    }

    pub fn symbols(&self) -> &[Sample] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// `sum_k |X(k)|^2`. With the unnormalized inverse transform this equals
    /// the time-domain mean power `(1/N) sum_n |x(n)|^2`.
    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Element-wise product with a phase vector of the same length.
    pub fn rotate(&self, phase: &PhaseVector) -> Result<Self> {
        if phase.len() != self.len() {
            return Err(SlmError::InputShape(format!(
                "phase vector length {} does not match block length {}",
                phase.len(),
                self.len()
            )));
        }
        let symbols = self.symbols.iter().zip(phase.entries()).map(|(x, p)| x * p).collect();
        Ok(Self { symbols, oversampling: self.oversampling })
    }
}

/// Maps `4 * N_data` bits onto Gray-coded, unit-average-power 16-QAM symbols.
/// Each group of four bits is `(i1, i0, q1, q0)`.
pub fn map_qam16(bits: &[bool]) -> Result<SymbolSequence> {
    if !bits.len().is_multiple_of(4) {
        return Err(SlmError::InputShape(format!("bit count {} is not divisible by 4", bits.len())));
    }
    let alphabet = qam16_alphabet();
    let symbols = bits
        .chunks_exact(4)
        .map(|b| {
            let idx = (b[0] as usize) << 3 | (b[1] as usize) << 2 | (b[2] as usize) << 1 | b[3] as usize;
            alphabet[idx]
        })
        .collect();
    SymbolSequence::new(symbols)
}

pub fn random_bits<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<bool> {
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word: u64 = rng.random();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|i| word >> i & 1 == 1));
    }
    bits
}

/// Zero insertion at the middle of the spectrum: the lower half of the band
/// stays at the start, the upper half moves to the end, and the
/// `(L - 1) * N_data` bins in between are zero.
pub fn oversample(x: &SymbolSequence, factor: usize) -> Result<SymbolSequence> {
    if !is_power_of_two(factor) {
        return Err(SlmError::InputShape(format!("oversampling factor {factor} is not a power of two")));
    }
    if factor == 1 {
        return Ok(x.clone());
    }
    let n = x.len();
    let total = n * factor;
    let mut out = vec![Sample::new(0.0, 0.0); total];
    let half = n / 2;
    out[..half].copy_from_slice(&x.symbols[..half]);
    out[total - (n - half)..].copy_from_slice(&x.symbols[half..]);
    SymbolSequence::with_oversampling(out, x.oversampling * factor)
}

/// Unit-magnitude rotation vector `P^u`. Index `u = 1` is the all-one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    entries: Vec<Sample>,
    index: usize,
}

impl PhaseVector {
    pub fn identity(len: usize) -> Self {
        Self { entries: vec![Sample::new(1.0, 0.0); len], index: 1 }
    }

    pub fn from_entries(entries: Vec<Sample>, index: usize) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|p| (p.norm() - 1.0).abs() > 1e-12) {
            return Err(SlmError::Construction(format!("phase entry {bad} does not have unit magnitude")));
        }
        Ok(Self { entries, index })
    }

    pub fn entries(&self) -> &[Sample] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

/// `j^k` for `k` in `0..4`.
pub fn quarter_turn(k: u64) -> Sample {
    match k & 3 {
        0 => Sample::new(1.0, 0.0),
        1 => Sample::new(0.0, 1.0),
        2 => Sample::new(-1.0, 0.0),
        _ => Sample::new(0.0, -1.0),
    }
}

/// I.i.d. uniform draws from `{+1, +j, -1, -j}`.
pub fn random_quarter_turns<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Sample> {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let word: u64 = rng.random();
        let take = (len - out.len()).min(32);
        out.extend((0..take).map(|i| quarter_turn(word >> (2 * i))));
    }
    out
}

/// Candidate rotation vector for index `u`. `u = 1` yields the all-one vector
/// without touching `rng`.
pub fn random_phase_vector<R: Rng + ?Sized>(u: usize, n_data: usize, rng: &mut R) -> PhaseVector {
    if u <= 1 {
        return PhaseVector::identity(n_data);
    }
    PhaseVector { entries: random_quarter_turns(n_data, rng), index: u }
}

/// Independent, reproducible random stream for `(seed, trial, slot)`.
/// Slot 0 is reserved for data bits, slots `u >= 1` for candidate `u`.
pub fn stream_rng(seed: u64, trial: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial << 16 | (slot & 0xffff));
    rng
}

/// A time-domain block with its mean power cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSequence {
    samples: Vec<Sample>,
    mean_power: f64,
    source_u: usize,
}

impl SignalSequence {
    pub fn new(samples: Vec<Sample>, source_u: usize) -> Self {
        let mean_power = mean_power(&samples);
        Self { samples, mean_power, source_u }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    pub fn source_u(&self) -> usize {
        self.source_u
    }

    pub fn peak_power(&self) -> f64 {
        peak_power(&self.samples)
    }

    /// Peak power over an externally supplied reference power. SLM uses the
    /// original block's mean power for every candidate.
    pub fn papr_against(&self, reference_power: f64) -> Result<f64> {
        if reference_power.is_nan() || reference_power <= 0.0 {
            return Err(SlmError::Degenerate(format!("reference power {reference_power} is not positive")));
        }
        Ok(self.peak_power() / reference_power)
    }
}

pub fn mean_power(samples: &[Sample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

pub fn peak_power(samples: &[Sample]) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max)
}

/// `max |x(n)|^2 / mean |x(n)|^2` using the block's own mean power.
pub fn papr(x: &SignalSequence) -> Result<f64> {
    x.papr_against(x.mean_power)
}

pub fn papr_db(x: &SignalSequence) -> Result<f64> {
    papr(x).map(to_db)
}
