//! Property and acceptance checks grouped by module. Failed checks are
//! collected; an error inside one check is recorded as its failure.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::acceptance::{self, bridge_grid_exceedance, wendel_agreement, WendelFn};
use super::output::{write_csv, ResultRow};
use super::{
    estimate_discrete_coupled, estimate_discrete_probability, estimate_extremal_coupled, estimate_extremal_probability,
    intermediate_point_probability, offset_start_coupled, offset_start_probability, RunOptions,
};
use crate::certificates::{
    block_count, build_dyadic_witness, build_dyadic_witness_with_c, certify_extremal, check_event_a, dyadic_grid,
    DyadicClock,
};
use crate::closedform::{
    bridge_max_tail, bridge_positive_probability, discrete_walk_bound, stay_positive_probability, wendel_f64,
};
use crate::error::{invalid, Result};
use crate::estimate::{wilson_interval, z_for_confidence, EstimateCI};
use crate::harness::run_trials;
use crate::hull::{brute_force_classify, classify_origin, separating_margin, VerdictKind};
use crate::sphere::{
    estimate_covering_mean, estimate_inverse_square_norm, simulate_time_change, CoveringConfig, StepControl,
};
use crate::stochastic::{
    fill_gaussian, sample_bridge, sample_brownian, sample_lattice_walk, sample_poisson_times, RngStream,
};

pub const SUITES: [&str; 8] = [
    "stochastic",
    "hull",
    "certificates",
    "closedform",
    "sphere",
    "experiments",
    "acceptance",
    "all",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Failed against a stated target that conflicts with an exact identity
    /// which itself passed.
    KnownDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let status = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::KnownDeviation => "DEVIATION",
        };
        format!(
            "{status:<9} {}/{} ({:.1}s): {}",
            self.suite, self.name, self.seconds, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub outcomes: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.outcomes.iter().filter(|o| o.status == CheckStatus::Fail).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateConfig {
    pub seed: u64,
    pub opts: RunOptions,
    /// Exact Wendel probability used by the Monte Carlo comparison.
    pub wendel: WendelFn,
}

impl ValidateConfig {
    pub fn new(seed: u64, opts: RunOptions) -> Self {
        ValidateConfig {
            seed,
            opts,
            wendel: wendel_f64,
        }
    }
}

struct Recorder<'a> {
    suite: &'static str,
    out: &'a mut Vec<CheckOutcome>,
}

impl Recorder<'_> {
    fn run<F: FnOnce() -> Result<(bool, String)>>(&mut self, name: &str, f: F) {
        let start = Instant::now();
        let (status, detail) = match f() {
            Ok((true, d)) => (CheckStatus::Pass, d),
            Ok((false, d)) => (CheckStatus::Fail, d),
            Err(e) => (CheckStatus::Fail, format!("error: {e}")),
        };
        self.out.push(CheckOutcome {
            suite: self.suite.to_string(),
            name: name.to_string(),
            status,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

type SuiteFn = fn(&ValidateConfig, &mut Recorder);

/// Runs the suite named by `selector` (see [`SUITES`]).
pub fn validate(selector: &str, config: &ValidateConfig) -> Result<ValidationReport> {
    let runs: Vec<(&'static str, SuiteFn)> = vec![
        ("stochastic", stochastic_suite),
        ("hull", hull_suite),
        ("certificates", certificates_suite),
        ("closedform", closedform_suite),
        ("sphere", sphere_suite),
        ("experiments", experiments_suite),
        ("acceptance", acceptance_suite),
    ];
    if !SUITES.contains(&selector) {
        return Err(invalid(format!(
            "unknown suite {selector:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    let mut outcomes = Vec::new();
    for (name, suite) in runs {
        if selector == "all" || selector == name {
            let mut rec = Recorder {
                suite: name,
                out: &mut outcomes,
            };
            suite(config, &mut rec);
        }
    }
    Ok(ValidationReport {
        seed: config.seed,
        outcomes,
    })
}

fn z(config: &ValidateConfig) -> Result<f64> {
    z_for_confidence(config.opts.confidence)
}

/// Mean and standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn within(value: f64, target: f64, se: f64, z: f64) -> bool {
    (value - target).abs() <= z * se
}

fn random_cloud<R: Rng + ?Sized>(rng: &mut R, integer: bool) -> Vec<Vec<f64>> {
    let n = rng.random_range(1..=4);
    let count = rng.random_range(1..=10);
    (0..count)
        .map(|_| {
            if integer {
                (0..n).map(|_| rng.random_range(-2i32..=2) as f64).collect()
            } else {
                fill_gaussian(n, rng)
            }
        })
        .collect()
}

fn stochastic_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let seed = config.seed;
    rec.run("reproducibility", || {
        let grid = [0.0, 0.1, 0.5, 1.0];
        for i in 0..100 {
            let draw = || -> Result<_> {
                let mut rng = RngStream::new(seed, i).rng();
                Ok((
                    sample_brownian(3, &grid, &mut rng)?,
                    sample_poisson_times(40.0, &mut rng)?,
                    sample_bridge(2, 1.0, &[1.0, 0.0], &[0.0, 2.0], &grid, &mut rng)?,
                    sample_lattice_walk(4, 50, &mut rng)?,
                ))
            };
            if draw()? != draw()? {
                return Ok((false, format!("stream {i} differs between calls")));
            }
        }
        Ok((true, "100 streams bit-identical".into()))
    });
    rec.run("brownian sub-grid consistency", || {
        let z = z(config)?;
        let fine = [0.0, 0.1, 0.25, 0.4, 0.7, 1.0];
        let coarse = [0.0, 0.25, 1.0];
        let mut details = Vec::new();
        let mut ok = true;
        for (label, grid, a, b) in [("fine", &fine[..], 2usize, 5usize), ("sub", &coarse[..], 1, 2)] {
            let pairs = run_trials(100_000, config.opts.workers, |i| {
                let mut rng = RngStream::new(seed.wrapping_add(1), i).rng();
                let p = sample_brownian(1, grid, &mut rng).expect("valid grid");
                (p.points[a][0], p.points[b][0])
            })?;
            let stats: [(&str, Vec<f64>, f64); 4] = [
                ("E[B(.25)^2]", pairs.iter().map(|p| p.0 * p.0).collect(), 0.25),
                ("E[B(1)^2]", pairs.iter().map(|p| p.1 * p.1).collect(), 1.0),
                ("E[B(.25)B(1)]", pairs.iter().map(|p| p.0 * p.1).collect(), 0.25),
                ("E[B(1)]", pairs.iter().map(|p| p.1).collect(), 0.0),
            ];
            for (name, xs, target) in stats {
                let (m, se) = mean_se(&xs);
                ok &= within(m, target, se, z);
                details.push(format!("{label} {name} {m:.4}"));
            }
        }
        Ok((ok, details.join(", ")))
    });
    rec.run("bridge pinning", || {
        let grid = [0.0, 0.3, 0.9, 2.0];
        for i in 0..1000 {
            let mut rng = RngStream::new(seed.wrapping_add(2), i).rng();
            let a = fill_gaussian(3, &mut rng);
            let b: Vec<f64> = fill_gaussian(3, &mut rng).iter().map(|x| x * 1e3).collect();
            let path = sample_bridge(3, 2.0, &a, &b, &grid, &mut rng)?;
            if path.points[0] != a || *path.points.last().unwrap() != b {
                return Ok((false, format!("stream {i} drifted")));
            }
        }
        Ok((true, "1000 bridges pinned exactly".into()))
    });
    rec.run("lattice parity", || {
        for i in 0..1000 {
            let mut rng = RngStream::new(seed.wrapping_add(3), i).rng();
            let n = rng.random_range(1..=6);
            let steps = rng.random_range(0..=200);
            let walk = sample_lattice_walk(n, steps, &mut rng)?;
            let parity: i64 = walk.points[steps].iter().map(|&x| (x as i64).rem_euclid(2)).sum();
            if parity % 2 != (steps % 2) as i64 {
                return Ok((false, format!("stream {i}: n={n}, N={steps}")));
            }
        }
        Ok((true, "1000 walks".into()))
    });
    rec.run("poisson counts", || {
        let z = z(config)?;
        let mut ok = true;
        let mut details = Vec::new();
        for alpha in [3.0, 25.0, 60.0] {
            let counts = run_trials(50_000, config.opts.workers, |i| {
                let mut rng = RngStream::new(seed.wrapping_add(4), i).rng();
                sample_poisson_times(alpha, &mut rng).map(|p| p.count() as f64)
            })?
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let (m, se) = mean_se(&counts);
            let (_, var_se) = mean_se(&counts.iter().map(|c| (c - alpha).powi(2)).collect::<Vec<_>>());
            let var = counts.iter().map(|c| (c - alpha).powi(2)).sum::<f64>() / counts.len() as f64;
            ok &= within(m, alpha, se, z) && within(var, alpha, var_se, z);
            details.push(format!("alpha={alpha}: mean {m:.3}, var {var:.3}"));
        }
        Ok((ok, details.join(", ")))
    });
}

fn hull_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let seed = config.seed;
    rec.run("oracle equivalence", || {
        let (mut agree, mut ambiguous, mut mismatch) = (0, 0, Vec::new());
        for i in 0..2000u64 {
            let mut rng = RngStream::new(seed.wrapping_add(10), i).rng();
            let pts = random_cloud(&mut rng, i % 2 == 1);
            let fast = classify_origin(&pts, None)?.kind();
            let exact = brute_force_classify(&pts)?.kind();
            match (fast, exact) {
                (VerdictKind::Ambiguous, _) | (_, VerdictKind::Ambiguous) => ambiguous += 1,
                (a, b) if a == b => agree += 1,
                _ => mismatch.push(i),
            }
        }
        Ok((
            mismatch.is_empty(),
            format!("{agree} agree, {ambiguous} ambiguous, mismatches {mismatch:?} (Gaussian and integer instances)"),
        ))
    });
    rec.run("witness validity", || {
        for i in 0..2000u64 {
            let mut rng = RngStream::new(seed.wrapping_add(11), i).rng();
            let pts = random_cloud(&mut rng, i % 2 == 1);
            let v = classify_origin(&pts, None)?;
            if let Some(w) = v.witness() {
                if separating_margin(&pts, w)? < -v.tolerance {
                    return Ok((false, format!("instance {i}")));
                }
            }
        }
        Ok((true, "2000 instances".into()))
    });
    rec.run("scale invariance", || {
        for i in 0..500u64 {
            let mut rng = RngStream::new(seed.wrapping_add(12), i).rng();
            let pts = random_cloud(&mut rng, i % 2 == 1);
            let base = classify_origin(&pts, None)?.kind();
            for c in [1e-6, 1e-3, 7.5, 1e6] {
                let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| x * c).collect()).collect();
                if classify_origin(&scaled, None)?.kind() != base {
                    return Ok((false, format!("instance {i}, c = {c}")));
                }
            }
        }
        Ok((true, "500 instances x 4 scales".into()))
    });
    rec.run("add-point monotonicity", || {
        let mut flips = 0;
        for i in 0..2000u64 {
            let mut rng = RngStream::new(seed.wrapping_add(13), i).rng();
            let mut pts = random_cloud(&mut rng, i % 2 == 1);
            let n = pts[0].len();
            let before = classify_origin(&pts, None)?.kind();
            pts.push(if i % 2 == 1 {
                (0..n).map(|_| rng.random_range(-2i32..=2) as f64).collect()
            } else {
                fill_gaussian(n, &mut rng)
            });
            let after = classify_origin(&pts, None)?.kind();
            if before == VerdictKind::Interior && after == VerdictKind::Extremal {
                return Ok((false, format!("instance {i} went Interior -> Extremal")));
            }
            flips += (before == VerdictKind::Extremal && after == VerdictKind::Interior) as u32;
        }
        Ok((true, format!("2000 pairs, {flips} Extremal -> Interior")))
    });
}

fn certificates_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let seed = config.seed;
    rec.run("soundness", || {
        let (n, m) = (20, 3);
        let results = run_trials(2000, config.opts.workers, |i| -> Result<(bool, bool)> {
            let mut rng = RngStream::new(seed.wrapping_add(20), i).rng();
            let times = sample_poisson_times(30.0, &mut rng)?;
            let path = sample_brownian(n, &dyadic_grid(m, DyadicClock::Unit, &times.event_times), &mut rng)?;
            let w = build_dyadic_witness(&path, m, DyadicClock::Unit)?;
            let pts = path.walk_points();
            match certify_extremal(pts, &w) {
                Some(v) => Ok((
                    true,
                    separating_margin(pts, &v)? > 0.0 && classify_origin(pts, None)?.kind() != VerdictKind::Interior,
                )),
                None => Ok((false, true)),
            }
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let issued = results.iter().filter(|r| r.0).count();
        let bad = results.iter().filter(|r| !r.1).count();
        Ok((
            bad == 0,
            format!("{bad} unsound of {issued} certificates in 2000 trials"),
        ))
    });
    rec.run("witness gaussianity (n=10)", || {
        let (n, m) = (10usize, 3usize);
        let grid = dyadic_grid(m, DyadicClock::Proof, &[]);
        let vs = run_trials(10_000, config.opts.workers, |i| -> Result<Vec<f64>> {
            let mut rng = RngStream::new(seed.wrapping_add(21), i).rng();
            let path = sample_brownian(n, &grid, &mut rng)?;
            Ok(build_dyadic_witness(&path, m, DyadicClock::Proof)?.v)
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        // Family-wise level over n means and n(n+1)/2 covariance entries.
        let tests = n + n * (n + 1) / 2;
        let zf = z_for_confidence(1.0 - (1.0 - config.opts.confidence) / tests as f64)?;
        let mut worst = 0.0f64;
        for a in 0..n {
            let (mu, se) = mean_se(&vs.iter().map(|v| v[a]).collect::<Vec<_>>());
            worst = worst.max(mu.abs() / se);
            for b in a..n {
                let prods: Vec<f64> = vs.iter().map(|v| v[a] * v[b]).collect();
                let (c, se) = mean_se(&prods);
                let target = if a == b { 1.0 / n as f64 } else { 0.0 };
                worst = worst.max((c - target).abs() / se);
            }
        }
        Ok((
            worst <= zf,
            format!("largest deviation {worst:.2} se over {tests} entries, limit {zf:.2}"),
        ))
    });
    rec.run("expectation and variance bounds (n=100)", || {
        let z = z(config)?;
        let n = 100;
        let m = block_count(n, crate::certificates::DEFAULT_C_PARAM)?;
        let grid = dyadic_grid(m, DyadicClock::Proof, &[]);
        let ps = run_trials(10_000, config.opts.workers, |i| -> Result<Vec<f64>> {
            let mut rng = RngStream::new(seed.wrapping_add(22), i).rng();
            let path = sample_brownian(n, &grid, &mut rng)?;
            let w = build_dyadic_witness(&path, m, DyadicClock::Proof)?;
            (0..m)
                .map(|k| {
                    Ok(path
                        .value_at((k as f64).exp2())?
                        .iter()
                        .zip(&w.v)
                        .map(|(x, y)| x * y)
                        .sum())
                })
                .collect()
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut ok = true;
        let mut details = Vec::new();
        for k in 0..m {
            let p: Vec<f64> = ps.iter().map(|r| r[k]).collect();
            let (mean, se) = mean_se(&p);
            let lower = (k as f64 - 1.0).exp2().sqrt() * (n as f64 / m as f64).sqrt();
            let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (p.len() as f64 - 1.0);
            let (_, var_se) = mean_se(&p.iter().map(|x| (x - mean).powi(2)).collect::<Vec<_>>());
            let vbound = (k as f64 + 2.0).exp2();
            ok &= mean >= lower - z * se && var <= vbound + z * var_se;
            details.push(format!("k={k}: E {mean:.3} >= {lower:.3}, Var {var:.3} <= {vbound}"));
        }
        Ok((ok, details.join(", ")))
    });
    rec.run("event A frequency (n=100, c=0.05)", || {
        let (n, c) = (100, 0.05);
        let m = block_count(n, c)?;
        let grid = dyadic_grid(m, DyadicClock::Proof, &[]);
        let hits = run_trials(10_000, config.opts.workers, |i| -> Result<bool> {
            let mut rng = RngStream::new(seed.wrapping_add(23), i).rng();
            let path = sample_brownian(n, &grid, &mut rng)?;
            let w = build_dyadic_witness_with_c(&path, c, DyadicClock::Proof)?;
            check_event_a(&path, &w)
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let freq = hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64;
        Ok((freq >= 0.99, format!("{freq:.4} >= 0.99 with m = {m}")))
    });
}

/// Monte Carlo of the closed forms; `wendel` is the exact function under test.
fn closedform_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let seed = config.seed;
    let opts = &config.opts;
    rec.run("wendel vs Gaussian clouds", || {
        let checks = wendel_agreement(seed.wrapping_add(30), 20_000, opts, config.wendel)?;
        let ok = checks.iter().all(|c| c.passed);
        let detail = checks
            .iter()
            .map(|c| format!("{} {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Ok((ok, detail))
    });
    rec.run("wendel identities", || {
        let mut ok = true;
        for n in 1..=6 {
            for big_n in 1..=64 {
                let w = (config.wendel)(n, big_n)?;
                ok &= big_n > n || w == 1.0;
                ok &= big_n == 1 || w <= (config.wendel)(n, big_n - 1)?;
                ok &= n == 1 || w >= (config.wendel)(n - 1, big_n)?;
            }
        }
        Ok((ok, "equal to 1 for N <= n, monotone on n <= 6, N <= 64".into()))
    });
    rec.run("stay-positive vs Monte Carlo (alpha=100)", || {
        let e = proportion_at(20_000, opts, |i| {
            let mut rng = RngStream::new(seed.wrapping_add(31), i).rng();
            let times = sample_poisson_times(100.0, &mut rng).expect("alpha is positive");
            let mut grid = vec![0.0];
            grid.extend(times.event_times);
            grid.dedup();
            let path = sample_brownian(1, &grid, &mut rng).expect("valid grid");
            path.walk_points().iter().all(|p| p[0] > 0.0)
        })?;
        let exact = stay_positive_probability(100.0)?;
        Ok((
            e.contains(exact),
            format!("{:.5} [{:.5}, {:.5}] vs {exact:.5}", e.estimate, e.ci_low, e.ci_high),
        ))
    });
    rec.run("stay-positive asymptotics", || {
        let r4 = stay_positive_probability(1e4)? * (std::f64::consts::PI * 1e4).sqrt();
        let r5 = stay_positive_probability(1e5)? * (std::f64::consts::PI * 1e5).sqrt();
        Ok((
            (r4 - 1.0).abs() < 0.01 && (r5 - 1.0).abs() < 0.01,
            format!("{r4:.5}, {r5:.5}"),
        ))
    });
    rec.run("bridge positivity vs Monte Carlo (alpha=50)", || {
        let e = proportion_at(20_000, opts, |i| {
            let mut rng = RngStream::new(seed.wrapping_add(32), i).rng();
            let times = sample_poisson_times(50.0, &mut rng).expect("alpha is positive");
            let mut grid = vec![0.0];
            grid.extend(times.event_times.iter().copied().filter(|&t| t > 0.0 && t < 1.0));
            grid.dedup();
            grid.push(1.0);
            let b = sample_bridge(1, 1.0, &[0.0], &[0.0], &grid, &mut rng).expect("valid grid");
            b.points[1..b.points.len() - 1].iter().all(|p| p[0] > 0.0)
        })?;
        let exact = bridge_positive_probability(50.0)?;
        Ok((
            e.contains(exact),
            format!("{:.5} [{:.5}, {:.5}] vs {exact:.5}", e.estimate, e.ci_low, e.ci_high),
        ))
    });
    rec.run("bridge positivity asymptotics", || {
        let r2 = bridge_positive_probability(100.0)? * 100.0;
        let r3 = bridge_positive_probability(1000.0)? * 1000.0;
        Ok((
            (r2 - 1.0).abs() < 0.2 && (r3 - 1.0).abs() < 0.07,
            format!("{r2:.4}, {r3:.4}"),
        ))
    });
    rec.run("bridge maximum vs Monte Carlo (grid 2^10)", || {
        let e = bridge_grid_exceedance(1 << 10, 1.0, 20_000, seed.wrapping_add(33), opts)?;
        let tail = bridge_max_tail(1.0, 1.0)?;
        Ok((
            e.estimate >= tail - 0.02 && e.estimate <= tail,
            format!("{:.5} in [{:.5}, {tail:.5}]", e.estimate, tail - 0.02),
        ))
    });
    rec.run("projected walk bound (n=5, N=1000)", || {
        let e = proportion_at(2000, opts, |i| {
            let mut rng = RngStream::new(seed.wrapping_add(34), i).rng();
            let theta = fill_gaussian(5, &mut rng);
            let walk = sample_lattice_walk(5, 1000, &mut rng).expect("valid walk");
            walk.walk_points()
                .iter()
                .all(|s| s.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>() > 0.0)
        })?;
        let bound = discrete_walk_bound(5, 1000)?;
        Ok((e.estimate <= bound, format!("{:.4} <= {bound:.4}", e.estimate)))
    });
}

fn proportion_at<F>(trials: u64, opts: &RunOptions, f: F) -> Result<EstimateCI>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let hits = run_trials(trials, opts.workers, f)?.into_iter().filter(|h| *h).count() as u64;
    EstimateCI::proportion(hits, trials, 0, opts.confidence)
}

fn sphere_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let seed = config.seed;
    rec.run("path invariants", || {
        for i in 0..20 {
            let p = simulate_time_change(
                5,
                2.0,
                StepControl::default(),
                RngStream::new(seed.wrapping_add(40), i).rng(),
            )?;
            let unit = p
                .directions
                .iter()
                .all(|d| (d.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
            let mono = p.spherical_times.windows(2).all(|w| w[1] > w[0])
                && p.log_euclidean_times.windows(2).all(|w| w[1] > w[0]);
            if !unit || !mono || p.log_euclidean_times[0] != 0.0 {
                return Ok((false, format!("path {i}")));
            }
        }
        Ok((true, "20 paths: unit directions, increasing clocks".into()))
    });
    rec.run("trapezoid convergence (n=5)", || {
        // Fine path at half the default step against its every-other-point
        // subsample, which is the default grid.
        let h = StepControl::default().h / 2.0;
        let rel = run_trials(200, config.opts.workers, |i| -> Result<f64> {
            let p = simulate_time_change(
                5,
                2.0,
                StepControl { h },
                RngStream::new(seed.wrapping_add(41), i).rng(),
            )?;
            let usable = (p.len() - 1) / 2 * 2;
            let trimmed = crate::sphere::TimeChangedPath {
                spherical_times: p.spherical_times[..=usable].to_vec(),
                directions: p.directions[..=usable].to_vec(),
                log_euclidean_times: p.log_euclidean_times[..=usable].to_vec(),
                scaled_radii: p.scaled_radii[..=usable].to_vec(),
                ..p
            };
            let fine = trimmed.coarse_spherical_time(1)?;
            Ok((trimmed.coarse_spherical_time(2)? - fine) / fine)
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mean_abs = rel.iter().map(|r| r.abs()).sum::<f64>() / rel.len() as f64;
        let bias = rel.iter().sum::<f64>() / rel.len() as f64;
        let worst = rel.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        Ok((
            mean_abs < 0.01,
            format!("mean |change| {mean_abs:.2e} < 1%, mean change {bias:.1e}, largest {worst:.2e} over 200 paths"),
        ))
    });
    rec.run("inverse square norm (n=5)", || {
        let e = estimate_inverse_square_norm(5, 1_000_000, seed.wrapping_add(42), config.opts.confidence)?;
        Ok((
            e.contains(1.0 / 3.0),
            format!("{:.5} [{:.5}, {:.5}]", e.estimate, e.ci_low, e.ci_high),
        ))
    });
    rec.run("hemisphere criterion (n=3)", || {
        let (mut agree, mut skipped) = (0, 0);
        for i in 0..1000u64 {
            let mut rng = RngStream::new(seed.wrapping_add(43), i).rng();
            let count = rng.random_range(1..=10);
            let dirs: Vec<Vec<f64>> = (0..count)
                .map(|_| {
                    let g = fill_gaussian(3, &mut rng);
                    let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    g.iter().map(|x| x / r).collect()
                })
                .collect();
            let (a, b) = (
                classify_origin(&dirs, None)?.kind(),
                brute_force_classify(&dirs)?.kind(),
            );
            if a == VerdictKind::Ambiguous || b == VerdictKind::Ambiguous {
                skipped += 1;
            } else if a != b {
                return Ok((false, format!("direction set {i} disagrees")));
            } else {
                agree += 1;
            }
        }
        Ok((true, format!("{agree} agree, {skipped} ambiguous")))
    });
    rec.run("rotation invariance (n=3)", || {
        let rotation = vec![vec![0.36, 0.48, -0.8], vec![-0.8, 0.6, 0.0], vec![0.48, 0.64, 0.6]];
        let rotated = CoveringConfig {
            rotation: Some(rotation),
            ..CoveringConfig::default()
        };
        let conf = config.opts.confidence;
        let a = estimate_covering_mean(
            3,
            400,
            seed.wrapping_add(44),
            &CoveringConfig::default(),
            config.opts.workers,
            conf,
        )?;
        let b = estimate_covering_mean(3, 400, seed.wrapping_add(45), &rotated, config.opts.workers, conf)?;
        let same = estimate_covering_mean(3, 50, seed.wrapping_add(44), &rotated, config.opts.workers, conf)?;
        let base = estimate_covering_mean(
            3,
            50,
            seed.wrapping_add(44),
            &CoveringConfig::default(),
            config.opts.workers,
            conf,
        )?;
        let se = (a.mean.sigma().powi(2) + b.mean.sigma().powi(2)).sqrt();
        let diff = a.mean.estimate - b.mean.estimate;
        let ok = diff.abs() <= z(config)? * se
            && (same.mean.estimate - base.mean.estimate).abs() < 1e-9 * base.mean.estimate;
        Ok((
            ok,
            format!(
                "means {:.4} vs {:.4} ({:+.2} se); same-stream rotated mean {:.6} vs {:.6}",
                a.mean.estimate,
                b.mean.estimate,
                diff / se,
                same.mean.estimate,
                base.mean.estimate
            ),
        ))
    });
}

/// `P(S_1, ..., S_N all >= 0)` for the simple walk on `Z`, by dynamic programming.
pub fn one_dimensional_nonnegative_probability(steps: usize) -> f64 {
    let mut dist = vec![0.0; steps + 2];
    dist[0] = 1.0;
    for _ in 0..steps {
        let mut next = vec![0.0; steps + 2];
        for (x, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[x + 1] += 0.5 * p;
            if x > 0 {
                next[x - 1] += 0.5 * p;
            }
        }
        dist = next;
    }
    dist.iter().sum()
}

fn experiments_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let seed = config.seed;
    let opts = &config.opts;
    rec.run("wilson coverage", || {
        let trials_each = 1000u64;
        let z = z(config)?;
        let mut ok = true;
        let mut details = Vec::new();
        for p in [0.01, 0.5, 0.9] {
            let binom = Binomial::new(trials_each, p).map_err(|e| invalid(e.to_string()))?;
            let mut rng = RngStream::new(seed.wrapping_add(50), (p * 1000.0) as u64).rng();
            let covered = (0..10_000)
                .filter(|_| {
                    let (lo, hi) = wilson_interval(binom.sample(&mut rng), trials_each, z);
                    lo <= p && p <= hi
                })
                .count() as f64
                / 10_000.0;
            ok &= (covered - opts.confidence).abs() <= 0.01;
            details.push(format!("p={p}: {covered:.4}"));
        }
        Ok((ok, format!("{} vs nominal {:.4}", details.join(", "), opts.confidence)))
    });
    rec.run("coupled monotonicity", || {
        let thin = estimate_extremal_coupled(2, &[5.0, 10.0, 20.0, 40.0], 300, seed.wrapping_add(51), opts)?;
        let prefix = estimate_discrete_coupled(2, &[4, 16, 64, 256], 300, seed.wrapping_add(52), opts)?;
        let offset = offset_start_coupled(2, 1.0, &[2.0, 8.0, 32.0], 20.0, 300, seed.wrapping_add(53), opts)?;
        let v = (thin.violations, prefix.violations, offset.violations);
        Ok((
            v == (0, 0, 0),
            format!("violations: thinning {}, prefix {}, offset horizon {}", v.0, v.1, v.2),
        ))
    });
    rec.run("determinism across workers", || {
        let one = RunOptions {
            workers: Some(1),
            ..*opts
        };
        let three = RunOptions {
            workers: Some(3),
            ..*opts
        };
        let bytes = |o: &RunOptions| -> Result<Vec<u8>> {
            let e = estimate_extremal_probability(3, 30.0, 2000, seed.wrapping_add(54), o)?;
            let mut buf = Vec::new();
            write_csv(
                &[ResultRow::from_estimate("estimate-p", 3, "alpha", 30.0, &e, seed, 0.0)],
                &mut buf,
            )?;
            Ok(buf)
        };
        Ok((bytes(&one)? == bytes(&three)?, "1 vs 3 workers".into()))
    });
    rec.run("csv and json round trip", || {
        let e = estimate_discrete_probability(2, 20, 200, seed.wrapping_add(55), opts)?;
        let rows = vec![
            ResultRow::from_estimate("estimate-discrete", 2, "N", 20.0, &e, seed, 0.125),
            ResultRow::from_estimate(
                "covering",
                3,
                "s_max",
                100.0 * 3f64.ln(),
                &EstimateCI::mean(&[0.1, 0.7, 1.0 / 3.0], opts.confidence)?,
                seed,
                1e-9,
            ),
        ];
        let mut csv_buf = Vec::new();
        write_csv(&rows, &mut csv_buf)?;
        let mut json_buf = Vec::new();
        super::output::write_json(&rows, &mut json_buf)?;
        let ok = super::output::read_csv(csv_buf.as_slice())? == rows
            && super::output::read_json(json_buf.as_slice())? == rows;
        Ok((ok, "2 rows".into()))
    });
    rec.run("one-dimensional lattice oracle (N=100)", || {
        let e = estimate_discrete_probability(1, 100, 100_000, seed.wrapping_add(56), opts)?;
        let exact = 2.0 * one_dimensional_nonnegative_probability(100);
        Ok((
            e.contains(exact),
            format!("{:.5} [{:.5}, {:.5}] vs {exact:.5}", e.estimate, e.ci_low, e.ci_high),
        ))
    });
    rec.run("too few points", || {
        let mut ok = true;
        for steps in 0..=3 {
            ok &= estimate_discrete_probability(3, steps, 200, seed, opts)?.estimate == 1.0;
        }
        ok &= intermediate_point_probability(3, 6, 3, 200, seed, opts)?.estimate == 1.0;
        let small = estimate_extremal_probability(3, 0.01, 2000, seed, opts)?;
        ok &= small.estimate >= 0.99;
        Ok((
            ok,
            format!(
                "lattice N <= n, intermediate 2n points, alpha = 0.01 gives {:.4}",
                small.estimate
            ),
        ))
    });
    rec.run("intermediate point center vs end (n=2, N=64)", || {
        let end = intermediate_point_probability(2, 64, 1, 5000, seed.wrapping_add(57), opts)?;
        let mid = intermediate_point_probability(2, 64, 32, 5000, seed.wrapping_add(58), opts)?;
        let se = (end.sigma().powi(2) + mid.sigma().powi(2)).sqrt();
        let gap = end.estimate - mid.estimate;
        Ok((
            gap > z(config)? * se,
            format!(
                "j=1 {:.4}, j=32 {:.4}, gap {:.1} se",
                end.estimate,
                mid.estimate,
                gap / se
            ),
        ))
    });
    rec.run("offset-start scaling", || {
        let (l, m, rate, c) = (1.0, 4.0, 10.0, 3.0);
        let a = offset_start_probability(2, l, m, rate, 4000, seed.wrapping_add(59), opts)?;
        let b = offset_start_probability(2, c * l, c * c * m, rate / (c * c), 4000, seed.wrapping_add(60), opts)?;
        let far = offset_start_probability(2, 100.0, 1.0, 50.0, 500, seed.wrapping_add(61), opts)?;
        let se = (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
        let ok = (a.estimate - b.estimate).abs() <= z(config)? * se && far.estimate == 0.0;
        Ok((
            ok,
            format!(
                "(L, M) {:.4} vs (cL, c^2 M) {:.4}; L=100, M=1 gives {}",
                a.estimate, b.estimate, far.estimate
            ),
        ))
    });
}

fn acceptance_suite(config: &ValidateConfig, rec: &mut Recorder) {
    let runs: [fn(u64, &RunOptions) -> Result<acceptance::CriterionReport>; 11] = [
        acceptance::criterion_1,
        acceptance::criterion_2,
        acceptance::criterion_3,
        acceptance::criterion_4,
        acceptance::criterion_5,
        acceptance::criterion_6,
        acceptance::criterion_7,
        acceptance::criterion_8,
        acceptance::criterion_9,
        acceptance::criterion_10,
        acceptance::criterion_11,
    ];
    for (k, run) in runs.iter().enumerate() {
        let start = Instant::now();
        let outcome = match run(config.seed, &config.opts) {
            Ok(r) => {
                let status = if r.passed() {
                    CheckStatus::Pass
                } else if r.gate_passed() {
                    CheckStatus::KnownDeviation
                } else {
                    CheckStatus::Fail
                };
                let detail = r
                    .checks
                    .iter()
                    .map(|c| format!("{}: {}", c.name, c.detail))
                    .collect::<Vec<_>>()
                    .join("; ");
                (status, format!("{}: {detail}", r.title))
            }
            Err(e) => (CheckStatus::Fail, format!("error: {e}")),
        };
        rec.out.push(CheckOutcome {
            suite: rec.suite.to_string(),
            name: format!("criterion {}", k + 1),
            status: outcome.0,
            detail: outcome.1,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}
