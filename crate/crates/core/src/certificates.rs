//! Explicit separating direction built from dyadic Brownian increments.
//!
//! With blocks `v_i = B(2^i) - B(2^(i-1))` for `i = 0..m`, the witness is
//!
//! ```text
//! v = (1/sqrt m) * sum_i v_i / (sqrt n * sqrt(2^(i-1)))
//! ```
//!
//! which is centered Gaussian with covariance `Id/n`. The construction lives
//! on the dyadic times `2^-1, 1, ..., 2^(m-1)`; [`DyadicClock::Unit`] maps
//! those onto `(0, 1]` by the factor `2^-(m-1)` and rescales values by
//! Brownian scaling so that `v` is the same random vector on either clock.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stochastic::WalkPath;

pub const DEFAULT_C_PARAM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DyadicClock {
    /// Times `2^-1, 1, 2, ..., 2^(m-1)`.
    Proof,
    /// Proof times multiplied by `2^-(m-1)`, ending at 1.
    Unit,
}

impl DyadicClock {
    /// Factor from proof times to this clock.
    pub fn time_scale(self, m: usize) -> f64 {
        match self {
            DyadicClock::Proof => 1.0,
            DyadicClock::Unit => (-(m as f64 - 1.0)).exp2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicWitness {
    pub m: usize,
    /// Constant the block count was derived from, when it was.
    pub c_param: Option<f64>,
    pub clock: DyadicClock,
    pub v: Vec<f64>,
    /// `v_i = B(2^i) - B(2^(i-1))` in the proof clock.
    pub block_vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinBound {
    pub variance_sum: f64,
    pub l: f64,
    pub t: f64,
    /// `exp(-t^2)`.
    pub bound: f64,
    /// `t < sqrt(variance_sum) / (2 L)`.
    pub valid: bool,
}

/// `m = max(1, floor(c n / ln n))`.
pub fn block_count(n: usize, c_param: f64) -> Result<usize> {
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(c_param > 0.0) || !c_param.is_finite() {
        return Err(invalid(format!("c must be positive, got {c_param}")));
    }
    if n == 1 {
        return Ok(1);
    }
    let nf = n as f64;
    Ok(((c_param * nf / nf.ln()).floor() as usize).max(1))
}

/// `2^-1, 1, ..., 2^(m-1)` scaled to `clock`.
pub fn dyadic_times(m: usize, clock: DyadicClock) -> Vec<f64> {
    let scale = clock.time_scale(m);
    (0..=m).map(|i| (i as f64 - 1.0).exp2() * scale).collect()
}

/// Sorted union of `{0}`, the dyadic times and `extra`.
pub fn dyadic_grid(m: usize, clock: DyadicClock, extra: &[f64]) -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend(dyadic_times(m, clock));
    grid.extend_from_slice(extra);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn build_dyadic_witness(path: &WalkPath, m: usize, clock: DyadicClock) -> Result<DyadicWitness> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let n = path.dimension;
    let times = dyadic_times(m, clock);
    let value_scale = 1.0 / clock.time_scale(m).sqrt();
    let values: Vec<&[f64]> = times.iter().map(|&t| path.value_at(t)).collect::<Result<_>>()?;
    let block_vectors: Vec<Vec<f64>> = values
        .windows(2)
        .map(|w| w[1].iter().zip(w[0]).map(|(b, a)| (b - a) * value_scale).collect())
        .collect();
    let mut v = vec![0.0; n];
    for (i, block) in block_vectors.iter().enumerate() {
        let w = 1.0 / (m as f64 * n as f64 * (i as f64 - 1.0).exp2()).sqrt();
        for (vk, bk) in v.iter_mut().zip(block) {
            *vk += w * bk;
        }
    }
    Ok(DyadicWitness {
        m,
        c_param: None,
        clock,
        v,
        block_vectors,
    })
}

/// Witness with `m` derived from `c_param` and the path dimension.
pub fn build_dyadic_witness_with_c(path: &WalkPath, c_param: f64, clock: DyadicClock) -> Result<DyadicWitness> {
    let m = block_count(path.dimension, c_param)?;
    let mut w = build_dyadic_witness(path, m, clock)?;
    w.c_param = Some(c_param);
    Ok(w)
}

/// `<v, B(2^k)> > (1/2) sqrt(n/m) sqrt(2^(k-1))` for every `k = 0..m`,
/// with `B` read in the proof clock.
pub fn check_event_a(path: &WalkPath, witness: &DyadicWitness) -> Result<bool> {
    let m = witness.m;
    let scale = witness.clock.time_scale(m);
    let value_scale = 1.0 / scale.sqrt();
    let base = 0.5 * (path.dimension as f64 / m as f64).sqrt();
    for k in 0..m {
        let b = path.value_at((k as f64).exp2() * scale)?;
        let p = dot(b, &witness.v) * value_scale;
        if !(p > base * ((k as f64 - 1.0).exp2()).sqrt()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bernstein-type deviation bound `exp(-t^2)`, valid for
/// `0 < t < sqrt(variance_sum) / (2L)`.
pub fn bernstein_tail(variance_sum: f64, l: f64, t: f64) -> Result<BernsteinBound> {
    if !(variance_sum > 0.0) || !variance_sum.is_finite() {
        return Err(invalid(format!("variance sum must be positive, got {variance_sum}")));
    }
    if !(l > 1.0) || !l.is_finite() {
        return Err(invalid(format!("L must exceed 1, got {l}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok(BernsteinBound {
        variance_sum,
        l,
        t,
        bound: (-t * t).exp(),
        valid: t < variance_sum.sqrt() / (2.0 * l),
    })
}

/// Returns `v` when `<v, X_i> > 0` for every point, with no tolerance.
pub fn certify_extremal(points: &[Vec<f64>], witness: &DyadicWitness) -> Option<Vec<f64>> {
    points
        .iter()
        .all(|p| dot(p, &witness.v) > 0.0)
        .then(|| witness.v.clone())
}
