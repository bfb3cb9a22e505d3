//! Termination limits, convergence records and function-evaluation
//! accounting.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitness values below this are reported as exactly zero.
pub const REPORT_PRECISION: f64 = 1e-8;

/// Applies the reporting truncation. Only output layers call this; all
/// comparisons inside the optimizers use raw values.
pub fn truncate_for_report(value: f64) -> f64 {
    if value.abs() < REPORT_PRECISION {
        0.0
    } else {
        value
    }
}

/// Termination contract. At least one limit must be set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunBudget {
    pub max_generations: Option<u64>,
    pub max_fes: Option<u64>,
    pub max_wall_ms: Option<u64>,
}

impl RunBudget {
    pub fn generations(n: u64) -> Self {
        RunBudget {
            max_generations: Some(n),
            ..Default::default()
        }
    }

    pub fn fes(n: u64) -> Self {
        RunBudget {
            max_fes: Some(n),
            ..Default::default()
        }
    }

    pub fn wall_ms(ms: u64) -> Self {
        RunBudget {
            max_wall_ms: Some(ms),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let limits = [
            ("max_generations", self.max_generations),
            ("max_fes", self.max_fes),
            ("max_wall_ms", self.max_wall_ms),
        ];
        if limits.iter().all(|(_, v)| v.is_none()) {
            return Err(Error::config("budget", "no limit is set"));
        }
        for (name, v) in limits {
            if v == Some(0) {
                return Err(Error::config("budget", format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn wall_limit(&self) -> Option<Duration> {
        self.max_wall_ms.map(Duration::from_millis)
    }
}

/// One row of a convergence log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub generation: u64,
    pub best_fitness: f64,
    pub cumulative_fes: u64,
    pub elapsed_ms: f64,
}

/// Checks the log invariants: best fitness non-increasing, FEs strictly
/// increasing.
pub fn is_monotone(records: &[ConvergenceRecord]) -> bool {
    records.windows(2).all(|w| {
        w[1].best_fitness <= w[0].best_fitness && w[1].cumulative_fes > w[0].cumulative_fes
    })
}

/// Running FE counter. Each event is the size of one evaluated batch.
#[derive(Debug, Clone, Default)]
pub struct FeLedger {
    events: Vec<u64>,
    total: u64,
}

impl FeLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, batch: u64) -> u64 {
        self.events.push(batch);
        self.total += batch;
        self.total
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn events(&self) -> &[u64] {
        &self.events
    }
}

/// Cumulative counts over a sequence of batch sizes.
pub fn fe_accounting(events: &[u64]) -> Vec<u64> {
    events
        .iter()
        .scan(0u64, |acc, &e| {
            *acc += e;
            Some(*acc)
        })
        .collect()
}

/// FEs spent by one executor run: the initial population plus one batch per
/// generation.
pub const fn executor_fes(population: u64, generations: u64) -> u64 {
    population * (generations + 1)
}

/// Closed-form total of a generation-limited meta run: `max_generations - 1`
/// normal generations followed by one generation at `power_up` times the
/// executor generation budget.
pub const fn metade_fes(
    meta_population: u64,
    exec_population: u64,
    exec_generations: u64,
    max_generations: u64,
    power_up: u64,
) -> u64 {
    let normal = meta_population * executor_fes(exec_population, exec_generations);
    let powered = meta_population * executor_fes(exec_population, power_up * exec_generations);
    normal * (max_generations - 1) + powered
}

/// Wall-clock helper shared by the run loops.
#[derive(Debug, Clone, Copy)]
pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch(Instant::now())
    }

    pub fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_needs_a_positive_limit() {
        assert!(RunBudget::default().validate().is_err());
        assert!(RunBudget::fes(0).validate().is_err());
        assert!(RunBudget::generations(3).validate().is_ok());
        let b = RunBudget {
            max_generations: Some(3),
            max_wall_ms: Some(0),
            ..Default::default()
        };
        assert!(b.validate().is_err());
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_for_report(9.9e-9), 0.0);
        assert_eq!(truncate_for_report(1e-8), 1e-8);
        assert_eq!(truncate_for_report(3.5), 3.5);
    }

    #[test]
    fn accounting() {
        assert!(fe_accounting(&[]).is_empty());
        assert_eq!(fe_accounting(&[3, 4, 5]), vec![3, 7, 12]);
        assert_eq!(metade_fes(10, 20, 50, 3, 5), 10 * 20 * 51 * 2 + 10 * 20 * 251);
        assert_eq!(metade_fes(10, 20, 50, 3, 5), 70_600);

        let mut ledger = FeLedger::new();
        for e in [10, 20, 30] {
            ledger.record(e);
        }
        assert_eq!(ledger.total(), 60);
        assert_eq!(*fe_accounting(ledger.events()).last().unwrap(), 60);
    }
}
