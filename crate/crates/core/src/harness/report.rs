use serde::Serialize;

use crate::error::{Result, SlmError};
use crate::slm::{CostUnit, RunCost};

/// Cost statistics over many trials of one configuration.
///
/// Totals are kept as exact integers, so [`merge`](Self::merge) is
/// associative and commutative and the mean does not depend on how trials
/// were split between workers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub unit: CostUnit,
    pub c_points_per_t: u64,
    pub candidates: usize,
    /// Length of the generated sequences (`N * L`).
    pub sequence_len: usize,
    trials: u64,
    sum: u128,
    sum_sq: u128,
    /// Raw per-trial costs in recording order.
    #[serde(skip)]
    per_trial: Vec<u64>,
    /// `aborts[u - 1]`: trials in which candidate `u` was abandoned.
    pub aborts: Vec<u64>,
    /// `generated[u - 1][a - 1]`: trials in which candidate `u` produced
    /// exactly `a` samples before stopping.
    #[serde(skip)]
    generated: Vec<Vec<u64>>,
}

impl ComplexityReport {
    pub fn new(unit: CostUnit, c_points_per_t: u64, candidates: usize, sequence_len: usize) -> Self {
        Self {
            unit,
            c_points_per_t,
            candidates,
            sequence_len,
            trials: 0,
            sum: 0,
            sum_sq: 0,
            per_trial: Vec::new(),
            aborts: vec![0; candidates],
            generated: vec![vec![0; sequence_len]; candidates],
        }
    }

    /// Empty report shaped for runs of `cost`, counting its first `candidates`.
    pub fn for_run(cost: &RunCost, candidates: usize, sequence_len: usize) -> Self {
        Self::new(cost.unit, cost.c_points_per_t, candidates, sequence_len)
    }

    /// Records one trial, counting only the first `self.candidates` candidates
    /// of `cost` (a run of a larger `U` stands in for its prefixes).
    pub fn record(&mut self, cost: &RunCost) -> Result<()> {
        if cost.unit != self.unit || cost.c_points_per_t != self.c_points_per_t {
            return Err(SlmError::Config("run cost does not match the report's unit".into()));
        }
        let raw = cost.prefix_total(self.candidates);
        self.trials += 1;
        self.sum += raw as u128;
        self.sum_sq += raw as u128 * raw as u128;
        self.per_trial.push(raw);
        for c in cost.candidates.iter().take(self.candidates) {
            if c.aborted {
                self.aborts[c.u - 1] += 1;
            }
            if (1..=self.sequence_len).contains(&c.generated) {
                self.generated[c.u - 1][c.generated - 1] += 1;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if (self.unit, self.c_points_per_t, self.candidates, self.sequence_len)
            != (other.unit, other.c_points_per_t, other.candidates, other.sequence_len)
        {
            return Err(SlmError::Config("cannot merge reports of different shapes".into()));
        }
        self.trials += other.trials;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.per_trial.extend_from_slice(&other.per_trial);
        for (a, b) in self.aborts.iter_mut().zip(&other.aborts) {
            *a += b;
        }
        for (row, other_row) in self.generated.iter_mut().zip(&other.generated) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
        Ok(())
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn per_trial(&self) -> &[u64] {
        &self.per_trial
    }

    /// Histogram of `A_u` for candidate `u` (index `a - 1`).
    pub fn generated_histogram(&self, u: usize) -> &[u64] {
        &self.generated[u - 1]
    }

    fn scale(&self) -> f64 {
        match self.unit {
            CostUnit::T => self.c_points_per_t as f64,
            CostUnit::ComplexAdditions => 1.0,
        }
    }

    /// Mean cost per trial in the reporting unit.
    pub fn mean(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.trials as f64 / self.scale()
    }

    /// Standard error of [`mean`](Self::mean).
    pub fn stderr(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let n = self.trials as u128;
        // n * sum_sq - sum^2 is exact and non-negative.
        let spread = n * self.sum_sq - self.sum * self.sum;
        let variance = spread as f64 / (n * (n - 1)) as f64;
        (variance / n as f64).sqrt() / self.scale()
    }

    /// Mean number of samples produced by candidate `u`.
    pub fn mean_generated(&self, u: usize) -> f64 {
        let row = &self.generated[u - 1];
        let count: u64 = row.iter().sum();
        let total: u64 = row.iter().enumerate().map(|(i, c)| (i as u64 + 1) * c).sum();
        total as f64 / count as f64
    }
}
