//! Seedable sampling of the stochastic objects used throughout the crate:
//! Gaussian vectors, Brownian paths on explicit grids, Brownian bridges,
//! Poisson point processes on `[0, 1]` and simple random walks on `Z^n`.
//!
//! Every sampler takes a `&mut impl Rng`. Reproducible, independent streams
//! come from [`RngStream`], which keys a ChaCha8 generator by
//! `(seed, stream_index)`; one stream is used per Monte Carlo trial so trials
//! can run on any worker in any order.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{invalid, Error, Result};

/// Generator handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

/// Above this intensity the Poisson sampler switches from count inversion to
/// exponential inter-arrival gaps.
const POISSON_INVERSION_MAX: f64 = 30.0;

/// Identifies one deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// A sampled path anchored at the origin: `times[0] = 0`, `points[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    pub dimension: usize,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl WalkPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample taken at exactly `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.binary_search_by(|probe| probe.total_cmp(&t)).ok()
    }

    /// Value at exactly time `t`.
    pub fn value_at(&self, t: f64) -> Result<&[f64]> {
        self.index_of(t)
            .map(|i| self.points[i].as_slice())
            .ok_or(Error::MissingTime(t))
    }

    /// All points except the anchor at time zero.
    pub fn walk_points(&self) -> &[Vec<f64>] {
        &self.points[1..]
    }
}

/// Event times of a Poisson process on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSample {
    pub intensity: f64,
    pub event_times: Vec<f64>,
}

impl PoissonSample {
    pub fn count(&self) -> usize {
        self.event_times.len()
    }
}

/// Brownian bridge on `[0, horizon]` pinned to `start` and `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    pub horizon: f64,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(fill_gaussian(n, rng))
}

pub(crate) fn fill_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidGrid(format!("grid starts at {} instead of 0", grid[0])));
    }
    check_increasing(grid)
}

fn check_increasing(grid: &[f64]) -> Result<()> {
    if let Some(bad) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite time {bad}")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "times not strictly increasing: {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Standard Brownian motion in `R^n` observed on `grid` (which must start at 0).
pub fn sample_brownian<R: Rng + ?Sized>(n: usize, grid: &[f64], rng: &mut R) -> Result<WalkPath> {
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    check_grid(grid)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut current = vec![0.0; n];
    points.push(current.clone());
    for w in grid.windows(2) {
        let sd = (w[1] - w[0]).sqrt();
        for x in current.iter_mut() {
            *x += sd * rng.sample::<f64, _>(StandardNormal);
        }
        points.push(current.clone());
    }
    Ok(WalkPath {
        dimension: n,
        times: grid.to_vec(),
        points,
    })
}

/// Poisson process of intensity `alpha` on `[0, 1]`; event times are sorted
/// and lie in the open interval.
pub fn sample_poisson_times<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<PoissonSample> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("intensity must be positive and finite, got {alpha}")));
    }
    let event_times = if alpha <= POISSON_INVERSION_MAX {
        let count = poisson_count_by_inversion(alpha, rng);
        let mut times: Vec<f64> = (0..count).map(|_| rng.sample::<f64, _>(Open01)).collect();
        times.sort_by(f64::total_cmp);
        times
    } else {
        let mut times = Vec::with_capacity(alpha.ceil() as usize + 16);
        let mut t = 0.0;
        loop {
            t += rng.sample::<f64, _>(Exp1) / alpha;
            if t >= 1.0 {
                break;
            }
            times.push(t);
        }
        times
    };
    Ok(PoissonSample {
        intensity: alpha,
        event_times,
    })
}

fn poisson_count_by_inversion<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut k = 0usize;
    let mut pmf = (-alpha).exp();
    let mut cdf = pmf;
    while u > cdf {
        k += 1;
        pmf *= alpha / k as f64;
        if pmf == 0.0 {
            break;
        }
        cdf += pmf;
    }
    k
}

/// Brownian bridge from `start` at time 0 to `end` at `horizon`, observed on
/// `grid`. The grid must lie in `[0, horizon]` and contain both endpoints.
pub fn sample_bridge<R: Rng + ?Sized>(
    n: usize,
    horizon: f64,
    start: &[f64],
    end: &[f64],
    grid: &[f64],
    rng: &mut R,
) -> Result<BridgePath> {
    if n == 0 || start.len() != n || end.len() != n {
        return Err(invalid("bridge endpoints must be n-vectors with n >= 1"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    check_grid(grid)?;
    if *grid.last().unwrap() != horizon {
        return Err(Error::InvalidGrid(format!(
            "grid must end at the horizon {horizon}, ends at {}",
            grid.last().unwrap()
        )));
    }
    let free = sample_brownian(n, grid, rng)?;
    let terminal = free.points.last().unwrap().clone();
    let last = grid.len() - 1;
    let points = grid
        .iter()
        .zip(&free.points)
        .enumerate()
        .map(|(k, (&t, w))| {
            if k == 0 {
                return start.to_vec();
            }
            if k == last {
                return end.to_vec();
            }
            let s = t / horizon;
            (0..n)
                .map(|j| start[j] + s * (end[j] - start[j]) + w[j] - s * terminal[j])
                .collect()
        })
        .collect();
    Ok(BridgePath {
        horizon,
        start: start.to_vec(),
        end: end.to_vec(),
        times: grid.to_vec(),
        points,
    })
}

/// Simple random walk on `Z^n` with `steps` steps; times are `0, 1, ..., steps`.
pub fn sample_lattice_walk<R: Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> Result<WalkPath> {
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let choices = u32::try_from(2 * n).map_err(|_| invalid("dimension too large"))?;
    let mut points = Vec::with_capacity(steps + 1);
    let mut current = vec![0.0; n];
    points.push(current.clone());
    for _ in 0..steps {
        let r = rng.random_range(0..choices) as usize;
        current[r / 2] += if r.is_multiple_of(2) { 1.0 } else { -1.0 };
        points.push(current.clone());
    }
    Ok(WalkPath {
        dimension: n,
        times: (0..=steps).map(|k| k as f64).collect(),
        points,
    })
}

/// Inserts Brownian values at `new_times`, each drawn from the bridge law
/// given the bracketing samples already on the path. Times are processed in
/// the order given; each must lie strictly inside the path's span and must not
/// duplicate an existing time.
pub fn refine_brownian<R: Rng + ?Sized>(path: &WalkPath, new_times: &[f64], rng: &mut R) -> Result<WalkPath> {
    let mut out = path.clone();
    for &t in new_times {
        if !t.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite refinement time {t}")));
        }
        let first = *out.times.first().ok_or_else(|| invalid("empty path"))?;
        let last = *out.times.last().unwrap();
        if t <= first || t >= last {
            let dup = t == first || t == last;
            return Err(Error::InvalidGrid(if dup {
                format!("time {t} is already on the path")
            } else {
                format!("time {t} outside the span [{first}, {last}]")
            }));
        }
        let hi = match out.times.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(_) => return Err(Error::InvalidGrid(format!("time {t} is already on the path"))),
            Err(i) => i,
        };
        let lo = hi - 1;
        let (s, u) = (out.times[lo], out.times[hi]);
        let w = (t - s) / (u - s);
        let sd = ((t - s) * (u - t) / (u - s)).sqrt();
        let value: Vec<f64> = out.points[lo]
            .iter()
            .zip(&out.points[hi])
            .map(|(a, b)| a + w * (b - a) + sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        out.times.insert(hi, t);
        out.points.insert(hi, value);
    }
    Ok(out)
}

/// Evenly spaced grid with `points` entries on `[0, horizon]`; the last entry
/// is exactly `horizon`.
pub fn uniform_grid(horizon: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let intervals = (points - 1) as f64;
            let mut grid: Vec<f64> = (0..points).map(|k| horizon * k as f64 / intervals).collect();
            *grid.last_mut().unwrap() = horizon;
            grid
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(i: u64) -> StreamRng {
        RngStream::new(20240611, i).rng()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn gaussian_vector_is_reproducible() {
        let a = gaussian_vector(3, &mut stream(7)).unwrap();
        let b = gaussian_vector(3, &mut stream(7)).unwrap();
        let c = gaussian_vector(3, &mut stream(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(gaussian_vector(0, &mut stream(7)).is_err());
    }

    #[test]
    fn gaussian_first_coordinate_moments() {
        let mut rng = stream(1);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| gaussian_vector(2, &mut rng).unwrap()[0])
            .collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.004, "mean {m}");
        // sd of the sample variance is sqrt(2/N) ~ 0.0014; 0.005 is > 3 sd.
        assert!((v - 1.0).abs() < 0.005, "variance {v}");
    }

    #[test]
    fn brownian_single_point_grid() {
        let p = sample_brownian(4, &[0.0], &mut stream(0)).unwrap();
        assert_eq!(p.points, vec![vec![0.0; 4]]);
    }

    #[test]
    fn brownian_rejects_bad_grids() {
        let mut rng = stream(0);
        assert!(sample_brownian(1, &[0.0, 0.5, 0.5], &mut rng).is_err());
        assert!(sample_brownian(1, &[0.0, 0.7, 0.2], &mut rng).is_err());
        assert!(sample_brownian(1, &[0.1, 0.7], &mut rng).is_err());
        assert!(sample_brownian(1, &[], &mut rng).is_err());
    }

    #[test]
    fn brownian_endpoint_variance_and_covariance() {
        let trials = 100_000;
        let mut ends = Vec::with_capacity(trials);
        let mut cov = 0.0;
        let mut rng = stream(2);
        for _ in 0..trials {
            let p = sample_brownian(1, &[0.0, 0.5, 1.0], &mut rng).unwrap();
            ends.push(p.points[2][0]);
            cov += p.points[1][0] * p.points[2][0];
        }
        let (_, v) = mean_var(&ends);
        cov /= trials as f64;
        assert!((v - 1.0).abs() < 0.02, "variance {v}");
        assert!((cov - 0.5).abs() < 0.02, "covariance {cov}");
    }

    #[test]
    fn poisson_count_mean_and_void_probability() {
        let trials = 100_000;
        let mut rng = stream(3);
        let mut total = 0usize;
        let mut empty = 0usize;
        for _ in 0..trials {
            let s = sample_poisson_times(10.0, &mut rng).unwrap();
            assert!(s.event_times.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.event_times.iter().all(|t| (0.0..=1.0).contains(t)));
            total += s.count();
            empty += (s.count() == 0) as usize;
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 10.0).abs() < 0.03, "mean count {mean}");
        let p0 = (-10.0f64).exp();
        let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
        let observed = empty as f64 / trials as f64;
        assert!((observed - p0).abs() <= 3.0 * sigma + 1.0 / trials as f64);
    }

    #[test]
    fn poisson_gap_method_has_poisson_moments() {
        let trials = 20_000;
        let mut rng = stream(4);
        let counts: Vec<f64> = (0..trials)
            .map(|_| sample_poisson_times(80.0, &mut rng).unwrap().count() as f64)
            .collect();
        let (m, v) = mean_var(&counts);
        let se = (80.0 / trials as f64).sqrt();
        assert!((m - 80.0).abs() < 4.0 * se, "mean {m}");
        assert!((v - 80.0).abs() < 4.0, "variance {v}");
    }

    #[test]
    fn poisson_rejects_nonpositive_intensity() {
        assert!(sample_poisson_times(0.0, &mut stream(0)).is_err());
        assert!(sample_poisson_times(-1.0, &mut stream(0)).is_err());
    }

    #[test]
    fn bridge_endpoints_are_exact() {
        let a = [0.3, -1.7];
        let b = [2.0 / 3.0, 0.1];
        let two = sample_bridge(2, 2.5, &a, &b, &[0.0, 2.5], &mut stream(5)).unwrap();
        assert_eq!(two.points, vec![a.to_vec(), b.to_vec()]);
        let grid = uniform_grid(2.5, 17);
        let many = sample_bridge(2, 2.5, &a, &b, &grid, &mut stream(5)).unwrap();
        assert_eq!(many.points[0], a.to_vec());
        assert_eq!(many.points[16], b.to_vec());
    }

    #[test]
    fn bridge_rejects_grid_outside_horizon() {
        let z = [0.0];
        assert!(sample_bridge(1, 1.0, &z, &z, &[0.0, 0.5, 1.5], &mut stream(0)).is_err());
        assert!(sample_bridge(1, 1.0, &z, &z, &[0.0, 0.5], &mut stream(0)).is_err());
    }

    #[test]
    fn bridge_midpoint_variance() {
        let trials = 100_000;
        let mut rng = stream(6);
        let z = [0.0];
        let mids: Vec<f64> = (0..trials)
            .map(|_| {
                sample_bridge(1, 1.0, &z, &z, &[0.0, 0.5, 1.0], &mut rng)
                    .unwrap()
                    .points[1][0]
            })
            .collect();
        let (_, v) = mean_var(&mids);
        assert!((v - 0.25).abs() < 0.01, "variance {v}");
    }

    #[test]
    fn bridge_grid_max_exceedance_is_below_continuous_tail() {
        // Continuous tail exp(-2 u^2); the discrete maximum misses excursions
        // between grid points, which to first order shifts the level up by
        // 0.5826 * sqrt(dt).
        let trials = 100_000;
        let grid = uniform_grid(1.0, 64);
        let z = [0.0];
        let mut rng = stream(7);
        let hits = (0..trials)
            .filter(|_| {
                let b = sample_bridge(1, 1.0, &z, &z, &grid, &mut rng).unwrap();
                b.points.iter().any(|p| p[0] > 1.0)
            })
            .count();
        let p = hits as f64 / trials as f64;
        let shift = 0.5826 * (1.0f64 / 63.0).sqrt();
        let corrected = (-2.0 * (1.0 + shift) * (1.0 + shift)).exp();
        assert!(p <= (-2.0f64).exp(), "p = {p}");
        assert!((p - corrected).abs() < 0.02, "p = {p}, corrected = {corrected}");
    }

    #[test]
    fn lattice_walk_basics() {
        let w = sample_lattice_walk(3, 0, &mut stream(0)).unwrap();
        assert_eq!(w.points, vec![vec![0.0; 3]]);
        let mut rng = stream(8);
        let mut seen = std::collections::HashMap::new();
        for _ in 0..40_000 {
            let w = sample_lattice_walk(2, 1, &mut rng).unwrap();
            *seen.entry(format!("{:?}", w.points[1])).or_insert(0usize) += 1;
        }
        assert_eq!(seen.len(), 4);
        for (k, c) in seen {
            let f = c as f64 / 40_000.0;
            assert!((f - 0.25).abs() < 0.01, "{k}: {f}");
        }
    }

    #[test]
    fn lattice_walk_returns_to_origin_half_the_time_after_two_steps() {
        let trials = 100_000;
        let mut rng = stream(9);
        let back = (0..trials)
            .filter(|_| sample_lattice_walk(1, 2, &mut rng).unwrap().points[2][0] == 0.0)
            .count();
        let p = back as f64 / trials as f64;
        assert!((p - 0.5).abs() < 0.005, "p = {p}");
    }

    #[test]
    fn refine_with_no_times_is_identity() {
        let mut rng = stream(10);
        let p = sample_brownian(2, &[0.0, 0.3, 1.0], &mut rng).unwrap();
        assert_eq!(refine_brownian(&p, &[], &mut rng).unwrap(), p);
    }

    #[test]
    fn refine_rejects_duplicates_and_out_of_span() {
        let mut rng = stream(11);
        let p = sample_brownian(1, &[0.0, 1.0], &mut rng).unwrap();
        assert!(refine_brownian(&p, &[0.5, 0.5], &mut rng).is_err());
        assert!(refine_brownian(&p, &[1.0], &mut rng).is_err());
        assert!(refine_brownian(&p, &[1.5], &mut rng).is_err());
    }

    #[test]
    fn refine_midpoint_follows_bridge_law() {
        let trials = 100_000;
        let b = 1.3;
        let base = WalkPath {
            dimension: 1,
            times: vec![0.0, 1.0],
            points: vec![vec![0.0], vec![b]],
        };
        let mut rng = stream(12);
        let mids: Vec<f64> = (0..trials)
            .map(|_| {
                let r = refine_brownian(&base, &[0.5], &mut rng).unwrap();
                assert_eq!(r.points[0], vec![0.0]);
                assert_eq!(r.points[2], vec![b]);
                r.points[1][0]
            })
            .collect();
        let (m, v) = mean_var(&mids);
        let se = (0.25 / trials as f64).sqrt();
        assert!((m - b / 2.0).abs() < 3.0 * se, "mean {m}");
        assert!((v - 0.25).abs() < 0.01, "variance {v}");
    }

    #[test]
    fn refined_subgrid_matches_direct_sampling() {
        // Sample on [0, 1], refine at 0.25 and 0.75, compare moments of the
        // refined value at 0.75 with the direct marginal N(0, 0.75).
        let trials = 100_000;
        let mut rng = stream(13);
        let xs: Vec<f64> = (0..trials)
            .map(|_| {
                let p = sample_brownian(1, &[0.0, 1.0], &mut rng).unwrap();
                let r = refine_brownian(&p, &[0.75, 0.25], &mut rng).unwrap();
                r.value_at(0.75).unwrap()[0]
            })
            .collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 3.0 * (0.75 / trials as f64).sqrt());
        let se_var = 0.75 * (2.0 / trials as f64).sqrt();
        assert!((v - 0.75).abs() < 3.0 * se_var, "variance {v}");
    }
}
