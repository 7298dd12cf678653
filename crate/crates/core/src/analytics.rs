//! Expected AG cost under the Gaussian signal model.
//!
//! At the Nyquist rate the normalized sample powers of a candidate are
//! modelled as i.i.d. unit exponentials, so `Pr(|x|^2 < gamma) = 1 - e^{-gamma}`.
//! Given the running minimum PAPR `gamma` of the previous candidates, the
//! number of samples `A_u` produced before candidate `u` stops is geometric,
//! censored at `N`. Averaging over the distribution of the running minimum
//! gives the pmf of `A_u`; weighting with the lazy IFFT cost `K(a)` gives the
//! expected cost of a whole run.
//!
//! Nothing here applies to oversampled signals, whose samples are correlated.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Result, SlmError};
use crate::ifft::k_of_a;
use crate::signal::is_power_of_two;

/// Default absolute tolerance for the pmf integrals.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Upper bound on the tail mass dropped by truncating the integrals.
const TAIL_CUT: f64 = 1e-8;

/// `Gamma(gamma) = 1 - e^{-gamma}`, the chance that one sample stays below
/// `gamma`. Zero for `gamma <= 0`.
pub fn big_gamma(gamma: f64) -> f64 {
    if gamma <= 0.0 {
        0.0
    } else {
        -(-gamma).exp_m1()
    }
}

/// The per-sample law at threshold `gamma` for blocks of `n` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    pub n: usize,
    pub gamma: f64,
}

impl GammaLaw {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n == 0 || gamma.is_nan() || gamma < 0.0 {
            return Err(SlmError::InputShape(format!("need n >= 1 and gamma >= 0, got n={n}, gamma={gamma}")));
        }
        Ok(Self { n, gamma })
    }

    pub fn below(&self) -> f64 {
        big_gamma(self.gamma)
    }

    /// Probability that a whole block stays below `gamma`.
    pub fn block_below(&self) -> f64 {
        self.below().powi(self.n as i32)
    }
}

/// `Pr(A_u = a | gamma)`: the first `a - 1` samples pass and sample `a` fails,
/// or, for `a = N`, the first `N - 1` pass.
pub fn conditional_pmf(a: usize, gamma: f64, n: usize) -> Result<f64> {
    if a == 0 || a > n {
        return Err(SlmError::InputShape(format!("a = {a} outside [1, {n}]")));
    }
    let g = big_gamma(gamma);
    let head = g.powi(a as i32 - 1);
    Ok(if a == n { head } else { head * (1.0 - g) })
}

/// CDF of the minimum PAPR over `u_minus_1` independent candidates.
pub fn running_min_papr_cdf(gamma: f64, u_minus_1: usize, n: usize) -> f64 {
    let block = big_gamma(gamma).powi(n as i32);
    -(u_minus_1 as f64 * (-block).ln_1p()).exp_m1()
}

/// Density of the running minimum: the derivative of [`running_min_papr_cdf`].
pub fn running_min_papr_pdf(gamma: f64, u_minus_1: usize, n: usize) -> f64 {
    if gamma <= 0.0 || u_minus_1 == 0 {
        return 0.0;
    }
    let g = big_gamma(gamma);
    let block = g.powi(n as i32);
    let survivors = (1.0 - block).powi(u_minus_1 as i32 - 1);
    u_minus_1 as f64 * survivors * n as f64 * g.powi(n as i32 - 1) * (-gamma).exp()
}

/// `Pr(PAPR > gamma)` for the best of `candidates` independent blocks of `n`
/// Gaussian samples.
pub fn theoretical_ccdf(gamma: f64, n: usize, candidates: usize) -> f64 {
    let block = big_gamma(gamma).powi(n as i32);
    (candidates as f64 * (-block).ln_1p()).exp()
}

/// Smallest `gamma` with `1 - F(gamma) <= cut` for the running minimum.
fn upper_limit(u_minus_1: usize, n: usize, cut: f64) -> f64 {
    // (1 - G^N)^m = cut  =>  G = (1 - cut^{1/m})^{1/N}
    let c = cut.powf(1.0 / u_minus_1 as f64);
    let log_g = (-c).ln_1p() / n as f64;
    -(-log_g.exp_m1()).ln()
}

/// Distribution of `A_u`, the number of samples produced by candidate `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuDistribution {
    pub u: usize,
    pub n: usize,
    /// `pmf[a - 1] = Pr(A_u = a)`, renormalized to sum to one.
    pub pmf: Vec<f64>,
    /// Per-entry absolute error estimates (after renormalization).
    pub errors: Vec<f64>,
    /// Running-minimum mass below PAPR 1, excluded by the integration range.
    pub truncated_mass: f64,
    /// Mass above the upper integration limit.
    pub tail_mass: f64,
    pub upper_limit: f64,
}

impl AuDistribution {
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }
}

/// Integrates `Pr(A_u = a | gamma)` against the running-minimum density over
/// `gamma in [1, gamma_max]` for every `a`.
///
/// A PAPR is never below one, so the range starts at 1; the small model mass
/// below it is reported in `truncated_mass` and the pmf is renormalized.
pub fn pmf_au(u: usize, n: usize, tolerance: f64) -> Result<AuDistribution> {
    if u < 2 || n < 2 {
        return Err(SlmError::InputShape(format!("need u >= 2 and n >= 2, got u={u}, n={n}")));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(SlmError::Config(format!("tolerance {tolerance} must be positive")));
    }
    let m = u - 1;
    let hi = upper_limit(m, n, TAIL_CUT.min(tolerance / 10.0)).max(1.0);
    let per_entry = tolerance / n as f64;
    let mut pmf = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut evaluations = 0usize;
    for a in 1..=n {
        let out = quadrature::double_exponential::integrate(
            |g| conditional_pmf(a, g, n).unwrap_or(0.0) * running_min_papr_pdf(g, m, n),
            1.0,
            hi,
            per_entry,
        );
        evaluations += out.num_function_evaluations as usize;
        if !out.integral.is_finite() || out.error_estimate > per_entry.max(1e-12) * 10.0 {
            return Err(SlmError::Numeric {
                reason: format!("pmf entry a={a} of A_{u} (N={n})"),
                estimate: out.integral,
                error: out.error_estimate,
                evaluations,
            });
        }
        pmf.push(out.integral.max(0.0));
        errors.push(out.error_estimate);
    }

    let truncated_mass = running_min_papr_cdf(1.0, m, n);
    let tail_mass = 1.0 - running_min_papr_cdf(hi, m, n);
    let sum: f64 = pmf.iter().sum();
    // The conditional pmf sums to one, so the integrals must add up to the
    // density's mass over the same range.
    let expected = running_min_papr_cdf(hi, m, n) - truncated_mass;
    let err_sum: f64 = errors.iter().sum();
    if (sum - expected).abs() > 10.0 * tolerance.max(err_sum) {
        return Err(SlmError::Numeric {
            reason: format!("A_{u} (N={n}) mass {sum} disagrees with CDF difference {expected}"),
            estimate: sum,
            error: err_sum,
            evaluations,
        });
    }
    for (p, e) in pmf.iter_mut().zip(errors.iter_mut()) {
        *p /= sum;
        *e /= sum;
    }
    Ok(AuDistribution { u, n, pmf, errors, truncated_mass, tail_mass, upper_limit: hi })
}

/// Expected cost in units of `T` together with a bound on the quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostEstimate {
    pub candidates: usize,
    pub value: f64,
    pub error_bound: f64,
}

impl CostEstimate {
    /// Cost relative to generating all `U` candidates in full.
    pub fn relative(&self) -> f64 {
        self.value / self.candidates as f64
    }
}

/// Analytic AG cost model for conventional SLM at the Nyquist rate, with the
/// `A_u` distributions cached per `u`.
#[derive(Debug)]
pub struct ComplexityModel {
    n: usize,
    tolerance: f64,
    /// `K(a) / T` for `a = 1..=N`.
    k_over_t: Vec<f64>,
    cache: RwLock<HashMap<usize, Arc<AuDistribution>>>,
}

impl ComplexityModel {
    pub fn new(n: usize, oversampling: usize) -> Result<Self> {
        Self::with_tolerance(n, oversampling, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(n: usize, oversampling: usize, tolerance: f64) -> Result<Self> {
        if oversampling != 1 {
            return Err(SlmError::Config(format!(
                "the Gaussian model holds only at the Nyquist rate, got oversampling {oversampling}"
            )));
        }
        if n < 2 || !is_power_of_two(n) {
            return Err(SlmError::Config(format!("block length {n} is not a power of two >= 2")));
        }
        let t = (n as u64 * n.trailing_zeros() as u64) as f64;
        let k_over_t = (1..=n).map(|a| k_of_a(a, n).map(|k| k as f64 / t)).collect::<Result<_>>()?;
        Ok(Self { n, tolerance, k_over_t, cache: RwLock::new(HashMap::new()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pmf(&self, u: usize) -> Result<Arc<AuDistribution>> {
        if let Some(d) = self.cache.read().expect("pmf cache poisoned").get(&u) {
            return Ok(d.clone());
        }
        let d = Arc::new(pmf_au(u, self.n, self.tolerance)?);
        self.cache.write().expect("pmf cache poisoned").insert(u, d.clone());
        Ok(d)
    }

    /// `T + sum_{u=2}^{U} sum_a K(a) Pr(A_u = a)`, in units of `T`.
    pub fn expected_ag_cost(&self, candidates: usize) -> Result<CostEstimate> {
        if candidates == 0 {
            return Err(SlmError::Config("at least one candidate is required".into()));
        }
        let mut value = 1.0;
        let mut error_bound = 0.0;
        for u in 2..=candidates {
            let d = self.pmf(u)?;
            for ((p, e), k) in d.pmf.iter().zip(&d.errors).zip(&self.k_over_t) {
                value += k * p;
                error_bound += k * e;
            }
            error_bound += d.truncated_mass + d.tail_mass;
        }
        Ok(CostEstimate { candidates, value, error_bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_law_basics() {
        assert_eq!(big_gamma(0.0), 0.0);
        assert_eq!(big_gamma(-1.0), 0.0);
        assert!((big_gamma(2f64.ln()) - 0.5).abs() < 1e-15);
        assert!(big_gamma(50.0) <= 1.0);
        let law = GammaLaw::new(4, 2f64.ln()).unwrap();
        assert!((law.block_below() - 1.0 / 16.0).abs() < 1e-15);
        assert!(GammaLaw::new(0, 1.0).is_err());
    }

    #[test]
    fn conditional_pmf_substitution() {
        let g = 2f64.ln();
        assert!((conditional_pmf(1, g, 64).unwrap() - 0.5).abs() < 1e-15);
        assert!((conditional_pmf(2, g, 64).unwrap() - 0.25).abs() < 1e-15);
        assert!((conditional_pmf(64, g, 64).unwrap() - 0.5f64.powi(63)).abs() < 1e-30);
        assert_eq!(conditional_pmf(1, 0.0, 8).unwrap(), 1.0);
        assert_eq!(conditional_pmf(3, 0.0, 8).unwrap(), 0.0);
        assert!(conditional_pmf(0, 1.0, 8).is_err());
        assert!(conditional_pmf(9, 1.0, 8).is_err());
    }

    #[test]
    fn single_competitor_density_is_max_of_exponentials() {
        for g in [0.5, 2.0, 4.0, 7.0] {
            let want = 64.0 * big_gamma(g).powi(63) * (-g).exp();
            assert!((running_min_papr_pdf(g, 1, 64) - want).abs() < 1e-12 * want.max(1e-300));
        }
    }

    #[test]
    fn density_is_derivative_of_cdf() {
        for m in [1, 3, 15] {
            for g in [1.5, 3.0, 4.5, 6.0] {
                let h = 1e-6;
                let fd = (running_min_papr_cdf(g + h, m, 64) - running_min_papr_cdf(g - h, m, 64)) / (2.0 * h);
                assert!((fd - running_min_papr_pdf(g, m, 64)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn upper_limit_leaves_requested_tail() {
        for m in [1, 7, 31] {
            let hi = upper_limit(m, 64, 1e-8);
            let tail = 1.0 - running_min_papr_cdf(hi, m, 64);
            assert!((tail - 1e-8).abs() < 1e-12, "m={m}: {tail}");
        }
    }

    #[test]
    fn one_candidate_costs_one_transform() {
        let model = ComplexityModel::new(64, 1).unwrap();
        assert_eq!(model.expected_ag_cost(1).unwrap().value, 1.0);
        assert!(matches!(ComplexityModel::new(64, 4), Err(SlmError::Config(_))));
    }

    #[test]
    fn pmfs_are_normalized_and_shrink_with_u() {
        let model = ComplexityModel::new(64, 1).unwrap();
        let mut prev = f64::INFINITY;
        for u in 2..=8 {
            let d = model.pmf(u).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-12);
            assert!(d.pmf.iter().all(|p| *p >= 0.0));
            assert!(d.truncated_mass < 1e-10);
            assert!(d.mean() <= prev);
            prev = d.mean();
        }
    }

    #[test]
    fn theoretical_ccdf_limits() {
        assert!((theoretical_ccdf(0.0, 64, 1) - 1.0).abs() < 1e-15);
        assert!(theoretical_ccdf(40.0, 64, 16) < 1e-12);
        assert!(theoretical_ccdf(8.0, 64, 16) < theoretical_ccdf(8.0, 64, 1));
    }
}
