//! Spherical Brownian motion through the time change `T'(t) = |B(T(t))|^2`,
//! `T(0) = 1`, and its hemisphere covering time.
//!
//! The Euclidean path is advanced on the geometric clock `T -> T (1 + h)` in
//! scaled form `b = B(T) / sqrt(T)`:
//!
//! ```text
//! b' = (b + sqrt(h) Z) / sqrt(1 + h)
//! ```
//!
//! and the spherical clock `s = int dT / |B(T)|^2` accumulates by the
//! trapezoid rule, `ds = (h/2) (1/|b|^2 + 1/((1+h) |b'|^2))`. Clocks are kept
//! as logarithms since `T` grows like `exp(n s)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::EstimateCI;
use crate::harness::run_trials;
use crate::hull::{IncrementalHull, VerdictKind};
use crate::stochastic::{fill_gaussian, RngStream};

pub const DEFAULT_STEP: f64 = 1.0 / 64.0;

/// Tolerance for covering checks on unit directions.
const COVERING_TOL: f64 = 1e-9;

/// Smallest `|b|^2` accepted before reporting underflow.
const MIN_SCALED_NORM_SQ: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Relative Euclidean clock increment per step.
    pub h: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { h: DEFAULT_STEP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeChangedPath {
    pub n: usize,
    pub step: StepControl,
    /// `s_0 = 0 < s_1 < ...`
    pub spherical_times: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// `ln T_k`, with `ln T_0 = 0`.
    pub log_euclidean_times: Vec<f64>,
    /// `|B(T_k)| / sqrt(T_k)`.
    pub scaled_radii: Vec<f64>,
}

impl TimeChangedPath {
    pub fn len(&self) -> usize {
        self.spherical_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spherical_times.is_empty()
    }

    /// `T_k`; overflows to infinity for very long paths.
    pub fn euclidean_time(&self, k: usize) -> f64 {
        self.log_euclidean_times[k].exp()
    }

    /// `ln T(s)`, interpolated linearly in `s` between samples.
    pub fn log_clock_at(&self, s: f64) -> Result<f64> {
        let times = &self.spherical_times;
        let last = *times.last().expect("paths hold the initial sample");
        if !(s >= 0.0 && s <= last) {
            return Err(invalid(format!("spherical time {s} outside [0, {last}]")));
        }
        let k = times.partition_point(|&t| t < s);
        if times[k] == s {
            return Ok(self.log_euclidean_times[k]);
        }
        let (s0, s1) = (times[k - 1], times[k]);
        let (l0, l1) = (self.log_euclidean_times[k - 1], self.log_euclidean_times[k]);
        Ok(l0 + (l1 - l0) * (s - s0) / (s1 - s0))
    }

    pub fn clock_at(&self, s: f64) -> Result<f64> {
        Ok(self.log_clock_at(s)?.exp())
    }

    /// Spherical clock at the last sample recomputed by the trapezoid rule on
    /// every `stride`-th Euclidean grid point.
    pub fn coarse_spherical_time(&self, stride: usize) -> Result<f64> {
        if stride == 0 || !(self.len() - 1).is_multiple_of(stride) {
            return Err(invalid(format!(
                "stride {stride} does not divide {} steps",
                self.len() - 1
            )));
        }
        let ratio = (stride as f64 * (1.0 + self.step.h).ln()).exp();
        let mut s = 0.0;
        let mut k = 0;
        while k + stride < self.len() {
            let (ra, rb) = (self.scaled_radii[k], self.scaled_radii[k + stride]);
            s += 0.5 * (ratio - 1.0) * (1.0 / (ra * ra) + 1.0 / (ratio * rb * rb));
            k += stride;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub s: f64,
    pub log_clock: f64,
    pub direction: Vec<f64>,
    pub scaled_radius: f64,
}

/// Step-by-step generator of the time-changed path.
pub struct TimeChangeStepper<R: Rng> {
    rng: R,
    h: f64,
    b: Vec<f64>,
    norm_sq: f64,
    s: f64,
    log_clock: f64,
    started: bool,
    rotation: Option<Vec<Vec<f64>>>,
}

fn check_rotation(n: usize, rotation: &[Vec<f64>]) -> Result<()> {
    if rotation.len() != n || rotation.iter().any(|r| r.len() != n) {
        return Err(invalid("rotation must be an n x n matrix"));
    }
    for i in 0..n {
        for j in 0..n {
            let d: f64 = (0..n).map(|k| rotation[i][k] * rotation[j][k]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (d - target).abs() > 1e-10 {
                return Err(invalid("rotation matrix is not orthogonal"));
            }
        }
    }
    Ok(())
}

impl<R: Rng> TimeChangeStepper<R> {
    /// The Euclidean path starts from `B(1) ~ N(0, Id)`. A `rotation` is
    /// applied to the reported directions.
    pub fn new(n: usize, step: StepControl, rotation: Option<Vec<Vec<f64>>>, mut rng: R) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("the time change needs n >= 3, got {n}")));
        }
        if !(step.h > 0.0) || !step.h.is_finite() {
            return Err(invalid(format!("step must be positive, got {}", step.h)));
        }
        if let Some(r) = &rotation {
            check_rotation(n, r)?;
        }
        let b = fill_gaussian(n, &mut rng);
        let norm_sq = b.iter().map(|x| x * x).sum();
        Ok(TimeChangeStepper {
            rng,
            h: step.h,
            b,
            norm_sq,
            s: 0.0,
            log_clock: 0.0,
            started: false,
            rotation,
        })
    }

    fn sample(&self) -> Result<TimeSample> {
        if !(self.norm_sq >= MIN_SCALED_NORM_SQ) || !self.norm_sq.is_finite() {
            return Err(Error::Underflow {
                log_clock: self.log_clock,
            });
        }
        let r = self.norm_sq.sqrt();
        let mut direction: Vec<f64> = self.b.iter().map(|x| x / r).collect();
        if let Some(rot) = &self.rotation {
            direction = rot
                .iter()
                .map(|row| row.iter().zip(&direction).map(|(a, b)| a * b).sum())
                .collect();
        }
        Ok(TimeSample {
            s: self.s,
            log_clock: self.log_clock,
            direction,
            scaled_radius: r,
        })
    }

    /// The initial sample on the first call, then one Euclidean step per call.
    pub fn next_sample(&mut self) -> Result<TimeSample> {
        if !self.started {
            self.started = true;
            return self.sample();
        }
        let h = self.h;
        let root_h = h.sqrt();
        let shrink = 1.0 / (1.0 + h).sqrt();
        let z = fill_gaussian(self.b.len(), &mut self.rng);
        for (bi, zi) in self.b.iter_mut().zip(&z) {
            *bi = (*bi + root_h * zi) * shrink;
        }
        let old = self.norm_sq;
        self.norm_sq = self.b.iter().map(|x| x * x).sum();
        self.s += 0.5 * h * (1.0 / old + 1.0 / ((1.0 + h) * self.norm_sq));
        self.log_clock += (1.0 + h).ln();
        self.sample()
    }
}

/// Samples until the spherical clock reaches `s_max` (the last sample may
/// overshoot it by one step).
pub fn simulate_time_change<R: Rng>(n: usize, s_max: f64, step: StepControl, rng: R) -> Result<TimeChangedPath> {
    if !(s_max >= 0.0) || !s_max.is_finite() {
        return Err(invalid(format!("s_max must be finite and >= 0, got {s_max}")));
    }
    let mut stepper = TimeChangeStepper::new(n, step, None, rng)?;
    let mut path = TimeChangedPath {
        n,
        step,
        spherical_times: Vec::new(),
        directions: Vec::new(),
        log_euclidean_times: Vec::new(),
        scaled_radii: Vec::new(),
    };
    loop {
        let sample = stepper.next_sample()?;
        path.spherical_times.push(sample.s);
        path.log_euclidean_times.push(sample.log_clock);
        path.scaled_radii.push(sample.scaled_radius);
        path.directions.push(sample.direction);
        if sample.s >= s_max {
            return Ok(path);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckSchedule {
    pub first: f64,
    /// Ratio between consecutive check times.
    pub factor: f64,
}

impl Default for CheckSchedule {
    fn default() -> Self {
        CheckSchedule {
            first: 0.01,
            factor: 1.25,
        }
    }
}

impl CheckSchedule {
    /// `first * factor^j` below `s_max`, followed by `s_max`.
    pub fn times(&self, s_max: f64) -> Result<Vec<f64>> {
        if !(self.first > 0.0) || !(self.factor > 1.0) {
            return Err(invalid("check schedule needs first > 0 and factor > 1"));
        }
        let mut times = Vec::new();
        let mut j = 0;
        loop {
            let t = self.first * self.factor.powi(j);
            if t >= s_max {
                break;
            }
            times.push(t);
            j += 1;
        }
        times.push(s_max);
        Ok(times)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoveringConfig {
    /// Censoring horizon; `None` uses `100 ln n`.
    pub s_max: Option<f64>,
    pub schedule: CheckSchedule,
    pub step: StepControl,
    /// Orthogonal matrix applied to every direction.
    pub rotation: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringOutcome {
    /// Midpoint of `bracket`; `None` when censored.
    pub tau1: Option<f64>,
    /// Previous and detecting check times.
    pub bracket: Option<(f64, f64)>,
    pub censored: bool,
    pub hull_checks: usize,
    pub ambiguous_checks: usize,
    pub final_point_count: usize,
}

pub fn default_s_max(n: usize) -> f64 {
    100.0 * (n as f64).ln()
}

/// Runs the covering checks over samples produced by `next`, which must
/// yield nondecreasing spherical times.
pub fn detect_covering<F>(n: usize, mut next: F, s_max: f64, schedule: &CheckSchedule) -> Result<CoveringOutcome>
where
    F: FnMut() -> Result<TimeSample>,
{
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(invalid(format!("s_max must be positive, got {s_max}")));
    }
    let checks = schedule.times(s_max)?;
    let mut hull = IncrementalHull::new(n, COVERING_TOL)?;
    let mut pending = Some(next()?);
    let mut outcome = CoveringOutcome {
        tau1: None,
        bracket: None,
        censored: true,
        hull_checks: 0,
        ambiguous_checks: 0,
        final_point_count: 0,
    };
    let mut previous = 0.0;
    let mut classified_count = 0;
    for &check in &checks {
        while let Some(sample) = pending.take() {
            if sample.s > check {
                pending = Some(sample);
                break;
            }
            hull.push(&sample.direction)?;
            pending = Some(next()?);
        }
        if hull.len() > classified_count {
            classified_count = hull.len();
            outcome.hull_checks += 1;
            match hull.classify().kind() {
                VerdictKind::Interior => {
                    outcome.tau1 = Some(0.5 * (previous + check));
                    outcome.bracket = Some((previous, check));
                    outcome.censored = false;
                    outcome.final_point_count = hull.len();
                    return Ok(outcome);
                }
                VerdictKind::Ambiguous => outcome.ambiguous_checks += 1,
                VerdictKind::Extremal => {}
            }
        }
        previous = check;
    }
    outcome.final_point_count = hull.len();
    Ok(outcome)
}

pub fn covering_time<R: Rng>(n: usize, rng: R, config: &CoveringConfig) -> Result<CoveringOutcome> {
    let s_max = config.s_max.unwrap_or_else(|| default_s_max(n));
    let mut stepper = TimeChangeStepper::new(n, config.step, config.rotation.clone(), rng)?;
    detect_covering(n, || stepper.next_sample(), s_max, &config.schedule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringEstimate {
    /// Mean of `tau1` with censored trials counted at `s_max`: a lower bound
    /// for the mean when anything is censored.
    pub mean: EstimateCI,
    /// Mean over the uncensored trials only.
    pub uncensored_mean: Option<EstimateCI>,
    pub censored: u64,
    pub s_max: f64,
    /// Average width of the detection brackets.
    pub mean_bracket_width: f64,
    pub ambiguous_checks: u64,
    /// A single trial gives no spread estimate.
    pub degenerate: bool,
}

pub fn estimate_covering_mean(
    n: usize,
    trials: u64,
    seed: u64,
    config: &CoveringConfig,
    workers: Option<usize>,
    confidence: f64,
) -> Result<CoveringEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let s_max = config.s_max.unwrap_or_else(|| default_s_max(n));
    let outcomes = run_trials(trials, workers, |i| {
        covering_time(n, RngStream::new(seed, i).rng(), config)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let censored = outcomes.iter().filter(|o| o.censored).count() as u64;
    if censored == trials {
        return Err(Error::AllCensored {
            trials: trials as usize,
            s_max,
        });
    }
    let lower: Vec<f64> = outcomes.iter().map(|o| o.tau1.unwrap_or(s_max)).collect();
    let uncensored: Vec<f64> = outcomes.iter().filter_map(|o| o.tau1).collect();
    let widths: Vec<f64> = outcomes.iter().filter_map(|o| o.bracket.map(|(a, b)| b - a)).collect();
    Ok(CoveringEstimate {
        mean: EstimateCI::mean(&lower, confidence)?,
        uncensored_mean: Some(EstimateCI::mean(&uncensored, confidence)?),
        censored,
        s_max,
        mean_bracket_width: widths.iter().sum::<f64>() / widths.len() as f64,
        ambiguous_checks: outcomes.iter().map(|o| o.ambiguous_checks as u64).sum(),
        degenerate: trials == 1,
    })
}

/// Mean Euclidean clock `T(t)` over independent paths.
pub fn estimate_clock_mean(
    n: usize,
    t: f64,
    trials: u64,
    seed: u64,
    step: StepControl,
    workers: Option<usize>,
    confidence: f64,
) -> Result<EstimateCI> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let clocks = run_trials(trials, workers, |i| {
        simulate_time_change(n, t, step, RngStream::new(seed, i).rng()).and_then(|p| p.clock_at(t))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    EstimateCI::mean(&clocks, confidence)
}

/// Monte Carlo `E[1/|G|^2]` for standard Gaussian `G` in `R^n`; the exact
/// value is `1/(n-2)`.
pub fn estimate_inverse_square_norm(n: usize, draws: u64, seed: u64, confidence: f64) -> Result<EstimateCI> {
    if n < 3 {
        return Err(invalid("E[1/|G|^2] is finite only for n >= 3"));
    }
    if draws == 0 {
        return Err(invalid("draws must be at least 1"));
    }
    let mut rng = RngStream::new(seed, 0).rng();
    let samples: Vec<f64> = (0..draws)
        .map(|_| 1.0 / fill_gaussian(n, &mut rng).iter().map(|x| x * x).sum::<f64>())
        .collect();
    EstimateCI::mean(&samples, confidence)
}
