use serde::Serialize;

use super::experiment::run_sweep;
use crate::analytics::ComplexityModel;
use crate::error::{Result, SlmError};
use crate::ifft::k_of_a;
use crate::slm::{Scheme, SlmConfig};

/// Cost of producing the first `a` outputs of an `N`-point lazy IFFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KPoint {
    pub a: usize,
    pub k: u64,
    pub k_over_t: f64,
    /// `a / N`, the cost if every output were equally expensive.
    pub linear: f64,
}

pub fn k_curve(n: usize) -> Result<Vec<KPoint>> {
    let t = (n as u64 * n.trailing_zeros() as u64) as f64;
    (1..=n)
        .map(|a| {
            let k = k_of_a(a, n)?;
            Ok(KPoint { a, k, k_over_t: k as f64 / t, linear: a as f64 / n as f64 })
        })
        .collect()
}

/// Analytic and simulated AG cost of conventional SLM, both relative to `U T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig7Point {
    pub u: usize,
    pub analytic: f64,
    pub analytic_error: f64,
    pub simulated: f64,
    pub simulated_stderr: f64,
    pub trials: u64,
}

/// Compares the Gaussian model with simulation at the Nyquist rate. All
/// counts come from one simulated sweep at `max(us)` candidates.
pub fn fig7_compare(n: usize, oversampling: usize, us: &[usize], trials: u64, seed: u64) -> Result<Vec<Fig7Point>> {
    let model = ComplexityModel::new(n, oversampling)?;
    let mut counts = us.to_vec();
    counts.sort_unstable();
    counts.dedup();
    if counts.first().is_none_or(|&u| u < 2) {
        return Err(SlmError::Config(format!("candidate counts {us:?} must all be >= 2")));
    }
    let u_max = *counts.last().unwrap();
    let cfg = SlmConfig::new(Scheme::Conventional, n, oversampling, u_max).with_ag(true);
    let sweep = run_sweep(&cfg, &counts, trials, seed, false)?;
    counts
        .iter()
        .zip(sweep)
        .map(|(&u, o)| {
            let est = model.expected_ag_cost(u)?;
            Ok(Fig7Point {
                u,
                analytic: est.relative(),
                analytic_error: est.error_bound / u as f64,
                simulated: o.report.mean() / u as f64,
                simulated_stderr: o.report.stderr() / u as f64,
                trials,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_curve_endpoints() {
        let c = k_curve(8).unwrap();
        assert_eq!(c.iter().map(|p| p.k).collect::<Vec<_>>()[..3], [7, 8, 11]);
        assert_eq!(c[7].k_over_t, 1.0);
    }

    #[test]
    fn fig7_refuses_oversampling() {
        assert!(matches!(fig7_compare(64, 4, &[2], 10, 0), Err(SlmError::Config(_))));
        assert!(fig7_compare(64, 1, &[1, 2], 10, 0).is_err());
    }

    #[test]
    fn fig7_small_run() {
        let pts = fig7_compare(16, 1, &[4, 2], 200, 1).unwrap();
        assert_eq!(pts.iter().map(|p| p.u).collect::<Vec<_>>(), [2, 4]);
        for p in &pts {
            assert!(p.analytic < 1.0 && p.simulated < 1.0);
        }
        assert!(pts[1].analytic < pts[0].analytic);
    }
}
