//! Doubling-then-bisection search for the smallest population that meets the
//! success criterion.

use serde::{Deserialize, Serialize};

use crate::engine::{run_batch, GpConfig, RunStats};
use crate::error::{GpError, Result};
use crate::problems::ProblemSpec;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BisectionConfig {
    pub runs_per_trial: usize,
    /// Relative width `(hi - lo) / lo` at which the search stops.
    pub tolerance: f64,
    pub population_cap: usize,
    pub initial_population: usize,
    pub repetitions: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            runs_per_trial: 50,
            tolerance: 1.0 / 16.0,
            population_cap: 1 << 20,
            initial_population: 4,
            repetitions: 30,
        }
    }
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(GpError::Config(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.initial_population < 1 || self.population_cap <= self.initial_population {
            return Err(GpError::Config(format!(
                "need 1 <= initial population ({}) < cap ({})",
                self.initial_population, self.population_cap
            )));
        }
        if self.runs_per_trial < 1 || self.repetitions < 1 {
            return Err(GpError::Config(
                "runs per trial and repetitions must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectOutcome<T> {
    /// Smallest size at which the predicate was observed to succeed.
    pub n: usize,
    /// Payload returned by the predicate at `n`.
    pub at_n: T,
    /// Every `(size, success)` pair evaluated, in order.
    pub trace: Vec<(usize, bool)>,
}

fn round_up(n: usize, step: usize) -> usize {
    n.div_ceil(step) * step
}

/// Search over sizes that are multiples of `step`. The predicate returns
/// `(success, payload)`; it is assumed monotone in `n`.
pub fn bisect<T>(
    initial: usize,
    cap: usize,
    tolerance: f64,
    step: usize,
    mut pred: impl FnMut(usize) -> Result<(bool, T)>,
) -> Result<BisectOutcome<T>> {
    let step = step.max(1);
    let cap = round_up(cap, step);
    let mut trace = Vec::new();
    let mut n = round_up(initial.max(1), step);
    let mut lo = 0usize;
    let (mut hi, mut at_hi) = loop {
        let (ok, payload) = pred(n)?;
        trace.push((n, ok));
        if ok {
            break (n, payload);
        }
        if n >= cap {
            return Err(GpError::CapReached { cap, trace });
        }
        lo = n;
        n = round_up((n * 2).min(cap), step);
    };
    while lo > 0 && (hi - lo) as f64 > tolerance * lo as f64 {
        let mid = round_up(lo + (hi - lo) / 2, step);
        if mid <= lo || mid >= hi {
            break;
        }
        let (ok, payload) = pred(mid)?;
        trace.push((mid, ok));
        if ok {
            hi = mid;
            at_hi = payload;
        } else {
            lo = mid;
        }
    }
    Ok(BisectOutcome {
        n: hi,
        at_n: at_hi,
        trace,
    })
}

/// One bisection over population size for `problem`. Sizes are even; each
/// predicate evaluation runs `runs_per_trial` runs on streams derived from
/// `rng` and the size under test. Success means the mean best-of-run correct
/// building-block count is at least `m - 1`.
pub fn bisect_min_popsize(
    problem: &ProblemSpec,
    template: &GpConfig,
    bis: &BisectionConfig,
    rng: SeededRng,
) -> Result<BisectOutcome<Vec<RunStats>>> {
    bis.validate()?;
    let m = problem.m();
    let threshold = m.saturating_sub(1) as f64;
    bisect(
        bis.initial_population.max(2),
        bis.population_cap,
        bis.tolerance,
        2,
        |n| {
            let mut cfg = template.clone();
            cfg.population_size = n;
            let stats = run_batch(problem, &cfg, bis.runs_per_trial, rng.derive(&[n as u64]))?;
            let mean = stats
                .iter()
                .map(|s| s.best_correct_bb_count as f64)
                .sum::<f64>()
                / stats.len() as f64;
            Ok((mean >= threshold, stats))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(t: usize) -> impl FnMut(usize) -> Result<(bool, ())> {
        move |n| Ok((n >= t, ()))
    }

    #[test]
    fn threshold_37() {
        let r = bisect(1, 1 << 20, 1.0 / 16.0, 1, oracle(37)).unwrap();
        assert!(
            r.n >= 37 && r.n <= (37.0f64 * 17.0 / 16.0).ceil() as usize,
            "{}",
            r.n
        );
    }

    #[test]
    fn always_true_returns_initial() {
        let r = bisect(4, 1 << 20, 1.0 / 16.0, 1, |_| Ok((true, ()))).unwrap();
        assert_eq!(r.n, 4);
        assert_eq!(r.trace, vec![(4, true)]);
    }

    #[test]
    fn always_false_hits_cap() {
        match bisect(4, 100, 1.0 / 16.0, 1, |_| Ok((false, ()))) {
            Err(GpError::CapReached { cap, trace }) => {
                assert_eq!(cap, 100);
                assert_eq!(trace.last(), Some(&(100, false)));
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn even_steps() {
        let r = bisect(4, 1 << 20, 1.0 / 16.0, 2, oracle(37)).unwrap();
        assert_eq!(r.n % 2, 0);
        assert!(r.n >= 37);
        assert!(r.trace.iter().all(|&(n, _)| n % 2 == 0));
    }
}
