//! Monte Carlo estimators, threshold searches, output and validation.
//!
//! Trial `i` of every estimator draws from `RngStream::new(seed, i)`.
//! Ambiguous hull verdicts are excluded from numerator and denominator and
//! counted; more than 0.1% of them is an error.

pub mod acceptance;
pub mod output;
pub mod threshold;
pub mod validate;
pub mod walks;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::{EstimateCI, DEFAULT_CONFIDENCE};
use crate::harness::run_trials;
use crate::hull::VerdictKind;
use crate::stochastic::RngStream;

pub use threshold::{find_alpha_half, find_n_half, ThresholdBracket};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    pub confidence: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: None,
            confidence: DEFAULT_CONFIDENCE,
        }
    }
}

/// Largest tolerated share of ambiguous verdicts.
pub const MAX_AMBIGUOUS_RATE: f64 = 1e-3;

/// Proportion of `target` verdicts among the non-ambiguous ones.
pub fn tally(kinds: &[VerdictKind], target: VerdictKind, confidence: f64) -> Result<EstimateCI> {
    let total = kinds.len() as u64;
    let ambiguous = kinds.iter().filter(|k| **k == VerdictKind::Ambiguous).count() as u64;
    if ambiguous as f64 > MAX_AMBIGUOUS_RATE * total as f64 {
        return Err(Error::AmbiguousRate {
            ambiguous,
            trials: total,
        });
    }
    let hits = kinds.iter().filter(|k| **k == target).count() as u64;
    EstimateCI::proportion(hits, total - ambiguous, ambiguous, confidence)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    Ok(())
}

fn collect_kinds<F>(trials: u64, opts: &RunOptions, f: F) -> Result<Vec<VerdictKind>>
where
    F: Fn(u64) -> Result<VerdictKind> + Sync + Send,
{
    run_trials(trials, opts.workers, f)?.into_iter().collect()
}

/// Trial-by-trial verdicts over a list of coupled parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledRun {
    pub params: Vec<f64>,
    pub estimates: Vec<EstimateCI>,
    /// `verdicts[trial][param]`.
    pub verdicts: Vec<Vec<VerdictKind>>,
    /// Trials where the indicator moves against the coupling's order.
    pub violations: u64,
}

/// Counts trials whose `target` indicator, read along the parameter list
/// with ambiguous entries skipped, ever switches from off to on.
fn count_violations(verdicts: &[Vec<VerdictKind>], target: VerdictKind) -> u64 {
    verdicts
        .iter()
        .filter(|row| {
            let flags: Vec<bool> = row
                .iter()
                .filter(|k| **k != VerdictKind::Ambiguous)
                .map(|k| *k == target)
                .collect();
            flags.windows(2).any(|w| !w[0] && w[1])
        })
        .count() as u64
}

fn coupled<F>(
    params: Vec<f64>,
    trials: u64,
    opts: &RunOptions,
    target: VerdictKind,
    forbidden_rise: VerdictKind,
    f: F,
) -> Result<CoupledRun>
where
    F: Fn(u64) -> Result<Vec<VerdictKind>> + Sync + Send,
{
    check_trials(trials)?;
    let verdicts: Vec<Vec<VerdictKind>> = run_trials(trials, opts.workers, f)?
        .into_iter()
        .collect::<Result<_>>()?;
    let estimates = (0..params.len())
        .map(|j| {
            let column: Vec<VerdictKind> = verdicts.iter().map(|row| row[j]).collect();
            tally(&column, target, opts.confidence)
        })
        .collect::<Result<_>>()?;
    let violations = count_violations(&verdicts, forbidden_rise);
    Ok(CoupledRun {
        params,
        estimates,
        verdicts,
        violations,
    })
}

/// `p(n, alpha)`: probability that the origin is extremal for Brownian
/// motion observed at Poisson(alpha) times in `[0, 1]`.
pub fn estimate_extremal_probability(
    n: usize,
    alpha: f64,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EstimateCI> {
    check_trials(trials)?;
    if n == 0 || !(alpha > 0.0) {
        return Err(invalid("need n >= 1 and alpha > 0"));
    }
    let kinds = collect_kinds(trials, opts, |i| {
        walks::extremal_trial(n, alpha, &mut RngStream::new(seed, i).rng())
    })?;
    tally(&kinds, VerdictKind::Extremal, opts.confidence)
}

/// Estimates at increasing `alphas` under Poisson thinning; the extremal
/// indicator is non-increasing in `alpha` on every trial.
pub fn estimate_extremal_coupled(
    n: usize,
    alphas: &[f64],
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<CoupledRun> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    coupled(
        alphas.to_vec(),
        trials,
        opts,
        VerdictKind::Extremal,
        VerdictKind::Extremal,
        |i| walks::coupled_extremal_trial(n, alphas, &mut RngStream::new(seed, i).rng()),
    )
}

/// Probability that the origin is extremal for the first `steps` steps of
/// the simple random walk on `Z^n`.
pub fn estimate_discrete_probability(
    n: usize,
    steps: usize,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EstimateCI> {
    check_trials(trials)?;
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    let kinds = collect_kinds(trials, opts, |i| {
        walks::lattice_extremal_trial(n, steps, &mut RngStream::new(seed, i).rng())
    })?;
    tally(&kinds, VerdictKind::Extremal, opts.confidence)
}

/// Estimates for increasing step counts on prefixes of one walk per trial.
pub fn estimate_discrete_coupled(
    n: usize,
    steps: &[usize],
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<CoupledRun> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    let params = steps.iter().map(|&s| s as f64).collect();
    coupled(
        params,
        trials,
        opts,
        VerdictKind::Extremal,
        VerdictKind::Extremal,
        |i| walks::coupled_lattice_trial(n, steps, &mut RngStream::new(seed, i).rng()),
    )
}

/// Probability that `S_j` is an extremal point of `conv{S_1, ..., S_N}`.
pub fn intermediate_point_probability(
    n: usize,
    steps: usize,
    j: usize,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EstimateCI> {
    check_trials(trials)?;
    if j == 0 || j >= steps {
        return Err(invalid(format!("need 1 <= j < N, got j = {j}, N = {steps}")));
    }
    let kinds = collect_kinds(trials, opts, |i| {
        walks::intermediate_trial(n, steps, j, &mut RngStream::new(seed, i).rng())
    })?;
    tally(&kinds, VerdictKind::Extremal, opts.confidence)
}

/// Probability that the origin is interior to the hull of Brownian motion
/// started at distance `offset`, observed at a rate-`rate` Poisson process
/// on `[0, horizon]`.
pub fn offset_start_probability(
    n: usize,
    offset: f64,
    horizon: f64,
    rate: f64,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EstimateCI> {
    Ok(offset_start_coupled(n, offset, &[horizon], rate, trials, seed, opts)?
        .estimates
        .remove(0))
}

/// Interior probabilities for increasing horizons on one master path per
/// trial; the interior indicator is non-decreasing in the horizon.
pub fn offset_start_coupled(
    n: usize,
    offset: f64,
    horizons: &[f64],
    rate: f64,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<CoupledRun> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    if !(offset > 0.0) || horizons.iter().any(|m| !(*m > 0.0)) || !(rate > 0.0) {
        return Err(invalid("offset, horizons and rate must be positive"));
    }
    let run = coupled(
        horizons.to_vec(),
        trials,
        opts,
        VerdictKind::Interior,
        VerdictKind::Extremal,
        |i| walks::offset_start_trial(n, offset, horizons, rate, &mut RngStream::new(seed, i).rng()),
    )?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_excludes_and_limits_ambiguous() {
        use VerdictKind::*;
        let mut kinds = vec![Extremal; 1500];
        kinds.extend(vec![Interior; 500]);
        kinds.push(Ambiguous);
        let e = tally(&kinds, Extremal, DEFAULT_CONFIDENCE).unwrap();
        assert_eq!((e.trials, e.successes, e.ambiguous_count), (2000, Some(1500), 1));
        kinds.extend(vec![Ambiguous; 3]);
        assert!(matches!(
            tally(&kinds, Extremal, DEFAULT_CONFIDENCE),
            Err(Error::AmbiguousRate { .. })
        ));
    }

    #[test]
    fn violations_detect_rises() {
        use VerdictKind::*;
        let rows = vec![
            vec![Extremal, Interior, Interior],
            vec![Extremal, Ambiguous, Extremal],
            vec![Interior, Extremal, Interior],
        ];
        assert_eq!(count_violations(&rows, Extremal), 1);
    }

    #[test]
    fn few_points_are_extremal() {
        let opts = RunOptions::default();
        let e = estimate_extremal_probability(3, 0.01, 2000, 1, &opts).unwrap();
        assert!(e.estimate >= 0.99);
        for steps in [0, 1, 2, 3] {
            let e = estimate_discrete_probability(3, steps, 300, 1, &opts).unwrap();
            assert_eq!(e.estimate, 1.0);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = RunOptions {
            workers: Some(1),
            ..RunOptions::default()
        };
        let three = RunOptions {
            workers: Some(3),
            ..RunOptions::default()
        };
        let a = estimate_extremal_probability(2, 20.0, 500, 9, &one).unwrap();
        let b = estimate_extremal_probability(2, 20.0, 500, 9, &three).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn offset_start_far_away_is_never_interior() {
        let e = offset_start_probability(2, 100.0, 1.0, 50.0, 500, 2, &RunOptions::default()).unwrap();
        assert_eq!(e.estimate, 0.0);
    }
}
