//! The release criteria as runnable checks.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_discrete_coupled, estimate_extremal_coupled, tally, RunOptions};
use crate::certificates::{block_count, build_dyadic_witness, certify_extremal, dyadic_grid, DyadicClock};
use crate::closedform::{
    bridge_positive_probability, discrete_bridge_bound, discrete_walk_bound, stay_positive_probability, wendel_f64,
};
use crate::error::Result;
use crate::estimate::EstimateCI;
use crate::harness::run_trials;
use crate::hull::{brute_force_classify, classify_origin, VerdictKind};
use crate::sphere::{
    default_s_max, estimate_clock_mean, estimate_covering_mean, estimate_inverse_square_norm, CoveringConfig,
    StepControl,
};
use crate::stochastic::{
    fill_gaussian, sample_bridge, sample_brownian, sample_lattice_walk, sample_poisson_times, uniform_grid, RngStream,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// A stated target that disagrees with an exact identity checked
    /// alongside it; reported, but not gating.
    pub known_deviation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub checks: Vec<SubCheck>,
    pub seconds: f64,
}

impl CriterionReport {
    /// Every sub-check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Every sub-check passed or is a recorded deviation.
    pub fn gate_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.known_deviation)
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let tag = match (c.passed, c.known_deviation) {
                    (true, _) => "ok",
                    (false, true) => "FAIL*",
                    (false, false) => "FAIL",
                };
                format!("{} [{tag}] {}", c.name, c.detail)
            })
            .collect();
        format!(
            "criterion {:>2} {status} ({:.1}s) {}: {}",
            self.id,
            self.seconds,
            self.title,
            parts.join("; ")
        )
    }
}

fn check(name: &str, passed: bool, detail: String) -> SubCheck {
    SubCheck {
        name: name.to_string(),
        passed,
        detail,
        known_deviation: false,
    }
}

fn runtime_check(start: Instant, limit_seconds: f64) -> SubCheck {
    let s = start.elapsed().as_secs_f64();
    check("runtime", s < limit_seconds, format!("{s:.1}s < {limit_seconds}s"))
}

fn report(id: u32, title: &str, start: Instant, checks: Vec<SubCheck>) -> CriterionReport {
    CriterionReport {
        id,
        title: title.to_string(),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn proportion<F>(trials: u64, opts: &RunOptions, f: F) -> Result<EstimateCI>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let hits = run_trials(trials, opts.workers, f)?.into_iter().filter(|h| *h).count() as u64;
    EstimateCI::proportion(hits, trials, 0, opts.confidence)
}

fn fmt_ci(e: &EstimateCI) -> String {
    format!("{:.5} [{:.5}, {:.5}]", e.estimate, e.ci_low, e.ci_high)
}

/// Independent base seed for criterion `id`, so no two criteria share streams.
pub fn criterion_seed(seed: u64, id: u64) -> u64 {
    seed ^ id.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub type WendelFn = fn(usize, usize) -> Result<f64>;

/// Gaussian point clouds against the exact non-absorption probability.
pub fn wendel_agreement(seed: u64, trials: u64, opts: &RunOptions, wendel: WendelFn) -> Result<Vec<SubCheck>> {
    let mut checks = Vec::new();
    for (cell, (n, big_n)) in [2usize, 3, 4]
        .iter()
        .flat_map(|&n| [5usize, 10, 20].map(move |m| (n, m)))
        .enumerate()
    {
        let cell_seed = seed.wrapping_add(cell as u64);
        let kinds = run_trials(trials, opts.workers, |i| {
            let mut rng = RngStream::new(cell_seed, i).rng();
            let pts: Vec<Vec<f64>> = (0..big_n).map(|_| fill_gaussian(n, &mut rng)).collect();
            classify_origin(&pts, None).map(|v| v.kind())
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let e = tally(&kinds, VerdictKind::Extremal, opts.confidence)?;
        let exact = wendel(n, big_n)?;
        checks.push(check(
            &format!("n={n},N={big_n}"),
            e.contains(exact),
            format!("{} vs {exact:.5}", fmt_ci(&e)),
        ));
    }
    Ok(checks)
}

pub fn criterion_1(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 1);
    let mut checks = wendel_agreement(seed, 100_000, opts, wendel_f64)?;
    checks.push(runtime_check(start, 120.0));
    Ok(report(
        1,
        "Gaussian clouds vs exact non-absorption probability",
        start,
        checks,
    ))
}

/// `B(t) > 0` at every Poisson time of a 1-D Brownian path.
fn positive_at_poisson(alpha: f64, seed: u64, i: u64) -> bool {
    let mut rng = RngStream::new(seed, i).rng();
    let times = sample_poisson_times(alpha, &mut rng).expect("alpha is positive");
    let mut x = 0.0;
    let mut last = 0.0;
    for t in times.event_times {
        x += (t - last).sqrt() * fill_gaussian(1, &mut rng)[0];
        last = t;
        if x <= 0.0 {
            return false;
        }
    }
    true
}

pub fn criterion_2(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 2);
    let alpha = 100.0;
    let e = proportion(100_000, opts, |i| positive_at_poisson(alpha, seed, i))?;
    let exact = stay_positive_probability(alpha)?;
    let big = 1e4;
    let ratio = stay_positive_probability(big)? * (std::f64::consts::PI * big).sqrt();
    let checks = vec![
        check("alpha=100", e.contains(exact), format!("{} vs {exact:.5}", fmt_ci(&e))),
        check(
            "alpha=1e4 ratio",
            (0.99..=1.01).contains(&ratio),
            format!("S * sqrt(pi alpha) = {ratio:.5}"),
        ),
        runtime_check(start, 60.0),
    ];
    Ok(report(2, "stay-positive probability at Poisson times", start, checks))
}

pub fn criterion_3(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 3);
    let alpha = 50.0;
    let e = proportion(100_000, opts, |i| {
        let mut rng = RngStream::new(seed, i).rng();
        let times = sample_poisson_times(alpha, &mut rng).expect("alpha is positive");
        let mut grid = vec![0.0];
        grid.extend(times.event_times.iter().copied().filter(|&t| t > 0.0 && t < 1.0));
        grid.dedup();
        grid.push(1.0);
        let bridge = sample_bridge(1, 1.0, &[0.0], &[0.0], &grid, &mut rng).expect("valid grid");
        bridge.points[1..bridge.points.len() - 1].iter().all(|p| p[0] > 0.0)
    })?;
    let exact = bridge_positive_probability(alpha)?;
    let checks = vec![
        check("alpha=50", e.contains(exact), format!("{} vs {exact:.6}", fmt_ci(&e))),
        runtime_check(start, 60.0),
    ];
    Ok(report(3, "bridge positivity at Poisson times", start, checks))
}

/// Frequency with which the discretized 0-0 bridge on `[0, 1]` exceeds `level`.
pub fn bridge_grid_exceedance(
    points: usize,
    level: f64,
    trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EstimateCI> {
    let grid = uniform_grid(1.0, points);
    proportion(trials, opts, |i| {
        let mut rng = RngStream::new(seed, i).rng();
        let b = sample_bridge(1, 1.0, &[0.0], &[0.0], &grid, &mut rng).expect("valid grid");
        b.points.iter().any(|p| p[0] > level)
    })
}

pub fn criterion_4(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 4);
    let level = 0.75;
    let e = bridge_grid_exceedance(1 << 12, level, 100_000, seed, opts)?;
    let tail = (-2.0 * level * level).exp();
    let checks = vec![
        check(
            "P(max > 0.75)",
            e.estimate >= tail - 0.02 && e.estimate <= tail,
            format!("{:.5} in [{:.5}, {tail:.5}]", e.estimate, tail - 0.02),
        ),
        runtime_check(start, 120.0),
    ];
    Ok(report(4, "discretized bridge maximum", start, checks))
}

pub fn criterion_5(seed: u64, _opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 5);
    let instances = 1000;
    let mut agree = 0;
    let mut ambiguous = 0;
    let mut mismatches = Vec::new();
    for i in 0..instances {
        let mut rng = RngStream::new(seed, i).rng();
        let n = 2 + (i % 3) as usize;
        let count = rng.random_range(1..=10);
        let pts: Vec<Vec<f64>> = (0..count).map(|_| fill_gaussian(n, &mut rng)).collect();
        let fast = classify_origin(&pts, None)?.kind();
        let exact = brute_force_classify(&pts)?.kind();
        if fast == VerdictKind::Ambiguous {
            ambiguous += 1;
        } else if fast == exact {
            agree += 1;
        } else {
            mismatches.push(i);
        }
    }
    let decided = instances - ambiguous;
    let rate = ambiguous as f64 / instances as f64;
    let checks = vec![
        check(
            "agreement",
            mismatches.is_empty(),
            format!("{agree}/{decided} decided instances agree, mismatches {mismatches:?}"),
        ),
        check("ambiguous rate", rate < 1e-3, format!("{ambiguous}/{instances}")),
    ];
    Ok(report(5, "hull verdicts vs exhaustive oracle", start, checks))
}

pub fn criterion_6(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 6);
    let (n, m, alpha) = (50, 5, 50.0);
    let outcomes = run_trials(10_000, opts.workers, |i| -> Result<(bool, VerdictKind)> {
        let mut rng = RngStream::new(seed, i).rng();
        let times = sample_poisson_times(alpha, &mut rng)?;
        let grid = dyadic_grid(m, DyadicClock::Unit, &times.event_times);
        let path = sample_brownian(n, &grid, &mut rng)?;
        let witness = build_dyadic_witness(&path, m, DyadicClock::Unit)?;
        let certified = certify_extremal(path.walk_points(), &witness).is_some();
        let kind = classify_origin(path.walk_points(), None)?.kind();
        Ok((certified, kind))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let certified = outcomes.iter().filter(|o| o.0).count();
    let unsound = outcomes.iter().filter(|o| o.0 && o.1 == VerdictKind::Interior).count();
    let interior = outcomes.iter().filter(|o| o.1 == VerdictKind::Interior).count();
    let checks = vec![check(
        "soundness",
        unsound == 0,
        format!("{unsound} certified-but-interior; {certified} certificates, {interior} interior verdicts in 10000"),
    )];
    Ok(report(6, "certificate soundness", start, checks))
}

pub fn criterion_7(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 7);
    let n = 100;
    let m = block_count(n, crate::certificates::DEFAULT_C_PARAM)?;
    let trials = 10_000u64;
    let grid = dyadic_grid(m, DyadicClock::Proof, &[]);
    let samples = run_trials(trials, opts.workers, |i| -> Result<(f64, Vec<f64>)> {
        let mut rng = RngStream::new(seed, i).rng();
        let path = sample_brownian(n, &grid, &mut rng)?;
        let w = build_dyadic_witness(&path, m, DyadicClock::Proof)?;
        let norm = w.v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ps = (0..m)
            .map(|k| {
                let b = path.value_at((k as f64).exp2())?;
                Ok(b.iter().zip(&w.v).map(|(x, y)| x * y).sum())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((norm, ps))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let inside = samples.iter().filter(|s| s.0 > 0.5 && s.0 < 2.0).count() as f64 / trials as f64;
    let mut checks = vec![check(
        "P(1/2 < |v| < 2)",
        inside >= 0.999,
        format!("{inside:.5} >= 0.999"),
    )];
    let nf = trials as f64;
    for k in 0..m {
        let p: Vec<f64> = samples.iter().map(|s| s.1[k]).collect();
        let mean = p.iter().sum::<f64>() / nf;
        let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let m4 = p.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        let rel_se = ((m4 - var * var) / nf).sqrt() / var;
        let bound = (k as f64 + 2.0).exp2();
        checks.push(check(
            &format!("Var p_{k}"),
            var <= bound * (1.0 + 3.0 * rel_se),
            format!("{var:.4} <= {bound} * (1 + 3 * {rel_se:.4})"),
        ));
    }
    Ok(report(7, &format!("witness statistics (n=100, m={m})"), start, checks))
}

pub fn criterion_8(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 8);
    let (n, t) = (5, 0.5);
    let clock = estimate_clock_mean(
        n,
        t,
        10_000,
        seed,
        StepControl::default(),
        opts.workers,
        opts.confidence,
    )?;
    let exact = (n as f64 * t).exp();
    let stated = exact + 1.0;
    let sigma = clock.sigma();
    let g = estimate_inverse_square_norm(n, 1_000_000, seed.wrapping_add(1), opts.confidence)?;
    let mut stated_check = check(
        "E[T(t)] vs e^{nt}+1",
        (clock.estimate - stated).abs() <= 3.0 * sigma,
        format!(
            "{:.4} +- {sigma:.4} vs {stated:.4} ({:+.1} sigma)",
            clock.estimate,
            (clock.estimate - stated) / sigma
        ),
    );
    stated_check.known_deviation = true;
    let checks = vec![
        stated_check,
        check(
            "E[T(t)] vs e^{nt}",
            (clock.estimate - exact).abs() <= 3.0 * sigma,
            format!(
                "{:.4} vs {exact:.4} ({:+.1} sigma)",
                clock.estimate,
                (clock.estimate - exact) / sigma
            ),
        ),
        check("E[1/|G|^2]", g.contains(1.0 / 3.0), format!("{} vs 1/3", fmt_ci(&g))),
    ];
    Ok(report(8, "time-change moments (n=5, t=0.5)", start, checks))
}

pub fn criterion_9(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 9);
    let mut checks = Vec::new();
    for n in [3usize, 4, 6] {
        let ln = (n as f64).ln();
        let e = estimate_covering_mean(
            n,
            1000,
            seed.wrapping_add(n as u64),
            &CoveringConfig::default(),
            opts.workers,
            opts.confidence,
        )?;
        let censor_rate = e.censored as f64 / 1000.0;
        checks.push(check(
            &format!("n={n} mean"),
            e.mean.estimate >= 1e-2 / ln && e.mean.estimate <= 1e2 * ln,
            format!(
                "{} in [{:.4}, {:.1}], bracket width {:.3}",
                fmt_ci(&e.mean),
                1e-2 / ln,
                1e2 * ln,
                e.mean_bracket_width
            ),
        ));
        checks.push(check(
            &format!("n={n} censoring"),
            censor_rate < 0.01,
            format!("{} of 1000 at s_max = {:.1}", e.censored, default_s_max(n)),
        ));
    }
    checks.push(runtime_check(start, 600.0));
    Ok(report(9, "hemisphere covering time", start, checks))
}

pub fn criterion_10(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 10);
    let (n, steps, trials) = (5usize, 1000usize, 10_000u64);
    let walk = proportion(trials, opts, |i| {
        let mut rng = RngStream::new(seed, i).rng();
        let theta = fill_gaussian(n, &mut rng);
        let path = sample_lattice_walk(n, steps, &mut rng).expect("valid walk");
        path.walk_points()
            .iter()
            .all(|s| s.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>() > 0.0)
    })?;
    let half = steps / 2;
    let bridge = proportion(trials, opts, |i| {
        let mut rng = RngStream::new(seed.wrapping_add(1), i).rng();
        let mut increments: Vec<i32> = (0..steps).map(|j| if j < half { 1 } else { -1 }).collect();
        increments.shuffle(&mut rng);
        let mut s = 0;
        increments.iter().all(|d| {
            s += d;
            s >= 0
        })
    })?;
    let walk_bound = discrete_walk_bound(n, steps)?;
    let bridge_bound = discrete_bridge_bound(steps)?;
    let sigma = (bridge_bound * (1.0 - bridge_bound) / trials as f64).sqrt();
    let exact_bridge = 1.0 / (half as f64 + 1.0);
    let checks = vec![
        check(
            "walk",
            walk.estimate <= walk_bound,
            format!("{:.5} <= {walk_bound:.5}", walk.estimate),
        ),
        check(
            "bridge",
            bridge.estimate <= bridge_bound + 3.0 * sigma,
            format!("{:.5} <= {bridge_bound:.5} + 3 * {sigma:.5}", bridge.estimate),
        ),
        check(
            "bridge exact",
            bridge.contains(exact_bridge),
            format!("{} vs 1/(N/2 + 1) = {exact_bridge:.5}", fmt_ci(&bridge)),
        ),
    ];
    Ok(report(
        10,
        "projected lattice walk and bridge positivity",
        start,
        checks,
    ))
}

pub fn criterion_11(seed: u64, opts: &RunOptions) -> Result<CriterionReport> {
    let start = Instant::now();
    let seed = criterion_seed(seed, 11);
    let thin = estimate_extremal_coupled(2, &[5.0, 10.0, 20.0, 40.0], 1000, seed, opts)?;
    let prefix = estimate_discrete_coupled(2, &[4, 16, 64, 256], 1000, seed.wrapping_add(1), opts)?;
    let show = |r: &super::CoupledRun| {
        r.estimates
            .iter()
            .map(|e| format!("{:.3}", e.estimate))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let checks = vec![
        check(
            "thinning",
            thin.violations == 0,
            format!("{} violations, p = {}", thin.violations, show(&thin)),
        ),
        check(
            "prefix",
            prefix.violations == 0,
            format!("{} violations, p = {}", prefix.violations, show(&prefix)),
        ),
    ];
    Ok(report(11, "monotone couplings", start, checks))
}

pub fn all_criteria(seed: u64, opts: &RunOptions) -> Result<Vec<CriterionReport>> {
    let runs: [fn(u64, &RunOptions) -> Result<CriterionReport>; 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    runs.iter().map(|f| f(seed, opts)).collect()
}
