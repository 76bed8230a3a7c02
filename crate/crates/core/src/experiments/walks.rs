//! Single-trial kernels. Each takes the trial's own generator.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::hull::{classify_origin, VerdictKind};
use crate::stochastic::{fill_gaussian, sample_brownian, sample_lattice_walk, sample_poisson_times, WalkPath};

/// Brownian motion in `R^n` observed at 0 and at Poisson(alpha) times in `[0, 1]`.
pub fn brownian_at_poisson<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<WalkPath> {
    let times = sample_poisson_times(alpha, rng)?;
    let mut grid = Vec::with_capacity(times.count() + 1);
    grid.push(0.0);
    grid.extend(times.event_times);
    grid.dedup();
    sample_brownian(n, &grid, rng)
}

fn verdict(points: &[Vec<f64>], n: usize) -> Result<VerdictKind> {
    if points.is_empty() {
        return Ok(VerdictKind::Extremal);
    }
    debug_assert_eq!(points[0].len(), n);
    Ok(classify_origin(points, None)?.kind())
}

/// Verdict for the origin against `conv{0, B(t_1), ..., B(t_N)}`.
pub fn extremal_trial<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<VerdictKind> {
    let path = brownian_at_poisson(n, alpha, rng)?;
    verdict(path.walk_points(), n)
}

/// One master Poisson process at the largest intensity, thinned by
/// independent uniform marks: the point set for a smaller `alpha` is a
/// subset of the one for a larger `alpha`. `alphas` must be increasing.
pub fn coupled_extremal_trial<R: Rng + ?Sized>(n: usize, alphas: &[f64], rng: &mut R) -> Result<Vec<VerdictKind>> {
    check_increasing(alphas)?;
    let alpha_max = *alphas.last().expect("checked non-empty");
    let path = brownian_at_poisson(n, alpha_max, rng)?;
    let marks: Vec<f64> = (0..path.walk_points().len()).map(|_| rng.random::<f64>()).collect();
    alphas
        .iter()
        .map(|&alpha| {
            let keep = alpha / alpha_max;
            let pts: Vec<Vec<f64>> = path
                .walk_points()
                .iter()
                .zip(&marks)
                .filter(|(_, &u)| u < keep)
                .map(|(p, _)| p.clone())
                .collect();
            verdict(&pts, n)
        })
        .collect()
}

/// Verdict for the origin against `conv{S_0 = 0, S_1, ..., S_N}`.
pub fn lattice_extremal_trial<R: Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> Result<VerdictKind> {
    let walk = sample_lattice_walk(n, steps, rng)?;
    verdict(walk.walk_points(), n)
}

/// Prefixes of one walk; `steps` must be increasing.
pub fn coupled_lattice_trial<R: Rng + ?Sized>(n: usize, steps: &[usize], rng: &mut R) -> Result<Vec<VerdictKind>> {
    let as_f64: Vec<f64> = steps.iter().map(|&s| s as f64).collect();
    check_increasing(&as_f64)?;
    let walk = sample_lattice_walk(n, *steps.last().expect("checked non-empty"), rng)?;
    steps.iter().map(|&s| verdict(&walk.points[1..=s], n)).collect()
}

/// Points `S_i - S_j` for `i = 1..=N`, `i != j`: the verdict for `S_j`
/// against `conv{S_1, ..., S_N}`.
pub fn intermediate_points(walk: &WalkPath, j: usize) -> Vec<Vec<f64>> {
    let center = &walk.points[j];
    walk.points
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(i, _)| *i != j)
        .map(|(_, p)| p.iter().zip(center).map(|(a, b)| a - b).collect())
        .collect()
}

pub fn intermediate_trial<R: Rng + ?Sized>(n: usize, steps: usize, j: usize, rng: &mut R) -> Result<VerdictKind> {
    if j == 0 || j >= steps {
        return Err(invalid(format!("need 1 <= j < N, got j = {j}, N = {steps}")));
    }
    let walk = sample_lattice_walk(n, steps, rng)?;
    verdict(&intermediate_points(&walk, j), n)
}

/// Brownian motion from `L e_1` observed at time 0 and at the points of a
/// rate-`rate` Poisson process on `[0, M]`, for each horizon in `horizons`
/// (increasing) on one master path. Returns the verdict for the origin
/// against the hull of the observed points.
pub fn offset_start_trial<R: Rng + ?Sized>(
    n: usize,
    offset: f64,
    horizons: &[f64],
    rate: f64,
    rng: &mut R,
) -> Result<Vec<VerdictKind>> {
    check_increasing(horizons)?;
    if !(offset > 0.0) || !(rate > 0.0) {
        return Err(invalid("offset and rate must be positive"));
    }
    let m_max = *horizons.last().expect("checked non-empty");
    if !(horizons[0] > 0.0) {
        return Err(invalid("horizons must be positive"));
    }
    // Poisson(rate * M) points on [0, M] are M times Poisson(rate * M) points on [0, 1].
    let times = sample_poisson_times(rate * m_max, rng)?;
    let mut points = Vec::with_capacity(times.count() + 1);
    let mut start = vec![0.0; n];
    start[0] = offset;
    points.push(start.clone());
    let mut current = start;
    let mut last = 0.0;
    let mut cut = Vec::with_capacity(times.count());
    for u in times.event_times {
        let t = u * m_max;
        let dt = t - last;
        let z = fill_gaussian(n, rng);
        for (c, zi) in current.iter_mut().zip(&z) {
            *c += dt.sqrt() * zi;
        }
        points.push(current.clone());
        cut.push(t);
        last = t;
    }
    horizons
        .iter()
        .map(|&m| {
            let count = 1 + cut.partition_point(|&t| t <= m);
            Ok(classify_origin(&points[..count], None)?.kind())
        })
        .collect()
}

fn check_increasing(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid("parameter list is empty"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("parameter list must be strictly increasing"));
    }
    Ok(())
}
