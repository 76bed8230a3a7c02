//! Nearest point of a polytope `conv{p_i}` to the origin by Frank-Wolfe with
//! away steps and exact line search.
//!
//! With `x = sum_i w_i p_i`, the Frank-Wolfe gap `|x|^2 - min_i <x, p_i>`
//! bounds `(|x|^2 - |x*|^2) / 2`, and `|x - x*|^2 <= |x|^2 - |x*|^2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Recompute the iterate from the weights every this many steps.
const RESYNC_EVERY: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNormResult {
    /// Nearest point of the hull found.
    pub q: Vec<f64>,
    /// Convex weights over the input points, `q = sum_i weights[i] * points[i]`.
    pub weights: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
    /// Frank-Wolfe duality gap at exit.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    /// Norm accuracy reached (scaled gap or tiny iterate).
    Converged,
    /// Every point has positive inner product with the iterate and the
    /// iterate's margin is at least half optimal.
    Separated,
    /// Iterate norm fell below the requested floor.
    NearOrigin,
    MaxIter,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Rule {
    /// Stop when `gap <= tol * |x| / 2` or `|x| <= tol`, which yields
    /// `|x| - |x*| <= tol`.
    Accuracy { tol: f64 },
    /// Stop once the iterate separates every point with at least half the
    /// optimal margin, or its norm drops below `floor`.
    Separation { floor: f64 },
}

pub(crate) struct Run {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub gap: f64,
    pub min_dot: f64,
    pub iterations: usize,
    pub stop: Stop,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(points: &[Vec<f64>], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        if w > 0.0 {
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi += w * pi;
            }
        }
    }
    x
}

/// Core loop. `warm` may be shorter than `points`; missing weights are zero.
pub(crate) fn frank_wolfe(points: &[Vec<f64>], warm: Option<&[f64]>, rule: Rule, max_iter: usize) -> Run {
    let m = points.len();
    let dim = points[0].len();
    let mut weights = vec![0.0; m];
    let warm_mass = warm
        .map(|w| w.iter().take(m).filter(|v| **v > 0.0).sum::<f64>())
        .unwrap_or(0.0);
    if warm_mass > 0.0 {
        for (dst, &src) in weights.iter_mut().zip(warm.unwrap()) {
            *dst = if src > 0.0 { src / warm_mass } else { 0.0 };
        }
    } else {
        let start = (0..m)
            .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
            .unwrap();
        weights[start] = 1.0;
    }
    let mut x = combine(points, &weights, dim);
    let mut dots = vec![0.0; m];
    let mut iterations = 0;
    loop {
        for (d, p) in dots.iter_mut().zip(points) {
            *d = dot(&x, p);
        }
        let xx = dot(&x, &x);
        let (s, min_dot) = dots
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &d)| if d < acc.1 { (i, d) } else { acc });
        let gap = xx - min_dot;
        let norm = xx.sqrt();
        let stop = match rule {
            Rule::Accuracy { tol } if gap <= 0.5 * tol * norm || norm <= tol => Some(Stop::Converged),
            Rule::Separation { .. } if min_dot > 0.0 && gap <= 0.5 * xx => Some(Stop::Separated),
            Rule::Separation { floor } if norm <= floor => Some(Stop::NearOrigin),
            _ if iterations >= max_iter => Some(Stop::MaxIter),
            _ => None,
        };
        if let Some(stop) = stop {
            return Run {
                x,
                weights,
                gap,
                min_dot,
                iterations,
                stop,
            };
        }
        iterations += 1;

        let (a, max_active) = dots.iter().enumerate().filter(|(i, _)| weights[*i] > 0.0).fold(
            (usize::MAX, f64::NEG_INFINITY),
            |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
        );
        let away_gap = max_active - xx;
        let use_away = a != usize::MAX && away_gap > gap && weights[a] < 1.0;

        if use_away {
            let wa = weights[a];
            let gamma_max = wa / (1.0 - wa);
            let dir: Vec<f64> = x.iter().zip(&points[a]).map(|(xi, pi)| xi - pi).collect();
            let dd = dot(&dir, &dir);
            if dd <= 0.0 {
                weights[a] = 0.0;
                continue;
            }
            let gamma = (away_gap / dd).clamp(0.0, gamma_max);
            for w in weights.iter_mut() {
                *w *= 1.0 + gamma;
            }
            if gamma >= gamma_max {
                weights[a] = 0.0;
            } else {
                weights[a] -= gamma;
            }
            for (xi, di) in x.iter_mut().zip(&dir) {
                *xi += gamma * di;
            }
        } else {
            let dir: Vec<f64> = points[s].iter().zip(&x).map(|(pi, xi)| pi - xi).collect();
            let dd = dot(&dir, &dir);
            if dd <= 0.0 {
                // The iterate already sits on the best vertex.
                return Run {
                    x,
                    weights,
                    gap: 0.0,
                    min_dot,
                    iterations,
                    stop: match rule {
                        Rule::Accuracy { .. } => Stop::Converged,
                        Rule::Separation { .. } if min_dot > 0.0 => Stop::Separated,
                        Rule::Separation { .. } => Stop::NearOrigin,
                    },
                };
            }
            let gamma = (gap / dd).clamp(0.0, 1.0);
            for w in weights.iter_mut() {
                *w *= 1.0 - gamma;
            }
            weights[s] += gamma;
            for (xi, di) in x.iter_mut().zip(&dir) {
                *xi += gamma * di;
            }
        }

        if iterations % RESYNC_EVERY == 0 {
            let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
            for w in weights.iter_mut() {
                *w = if *w > 0.0 { *w / total } else { 0.0 };
            }
            x = combine(points, &weights, dim);
        }
    }
}

pub(crate) fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| invalid("at least one point is required"))?;
    let dim = first.len();
    if dim == 0 {
        return Err(invalid("points must have dimension at least 1"));
    }
    if points.iter().any(|p| p.len() != dim) {
        return Err(invalid("points have inconsistent dimensions"));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("points must be finite"));
    }
    Ok(dim)
}

/// Minimum-norm point of `conv(points)`.
///
/// On success `|q| - |q*| <= tol`, where `q*` is the exact nearest point.
/// Hitting `max_iter` first returns [`Error::NotConverged`] carrying the best
/// iterate.
pub fn min_norm_point(points: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<MinNormResult> {
    check_points(points)?;
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let run = frank_wolfe(points, None, Rule::Accuracy { tol }, max_iter);
    let norm = dot(&run.x, &run.x).sqrt();
    let result = MinNormResult {
        q: run.x,
        weights: run.weights,
        norm,
        iterations: run.iterations,
        gap: run.gap,
    };
    match run.stop {
        Stop::MaxIter => Err(Error::NotConverged {
            iterations: result.iterations,
            gap: result.gap,
            best: Box::new(result),
        }),
        _ => Ok(result),
    }
}
