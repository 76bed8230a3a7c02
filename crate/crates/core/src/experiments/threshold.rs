//! Searches for the parameter at which the extremal probability crosses 1/2.
//!
//! Every probe reuses the same seed (common random numbers). The search
//! expands by factors of 4 until both sides of 1/2 are seen with intervals
//! excluding 1/2, then bisects on the log scale until the bracket ratio is
//! at most 2, the midpoint cannot be decided at the given trial count, or
//! the probe budget runs out.

use serde::{Deserialize, Serialize};

use super::{estimate_discrete_probability, estimate_extremal_probability, RunOptions};
use crate::error::Result;
use crate::estimate::EstimateCI;

pub const DEFAULT_MAX_PROBES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub value: f64,
    pub estimate: EstimateCI,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    /// `"alpha"` or `"N"`.
    pub parameter: String,
    /// Largest probed value whose interval lies above 1/2.
    pub low: Option<Probe>,
    /// Smallest probed value whose interval lies below 1/2.
    pub high: Option<Probe>,
    pub trials_per_probe: u64,
    pub probes: Vec<Probe>,
    /// Both sides found.
    pub complete: bool,
    pub diagnostic: Option<String>,
}

impl ThresholdBracket {
    pub fn ratio(&self) -> Option<f64> {
        Some(self.high.as_ref()?.value / self.low.as_ref()?.value)
    }

    pub fn midpoint(&self) -> Option<f64> {
        Some((self.high.as_ref()?.value * self.low.as_ref()?.value).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Above,
    Below,
    Undecided,
}

fn side(e: &EstimateCI) -> Side {
    if e.ci_low > 0.5 {
        Side::Above
    } else if e.ci_high < 0.5 {
        Side::Below
    } else {
        Side::Undecided
    }
}

struct Search<F: FnMut(f64) -> Result<EstimateCI>> {
    estimate: F,
    integer: bool,
    min_value: f64,
    max_probes: usize,
    probes: Vec<Probe>,
    low: Option<Probe>,
    high: Option<Probe>,
}

impl<F: FnMut(f64) -> Result<EstimateCI>> Search<F> {
    fn snap(&self, v: f64) -> f64 {
        if self.integer {
            v.round().max(self.min_value)
        } else {
            v.max(self.min_value)
        }
    }

    fn exhausted(&self) -> bool {
        self.probes.len() >= self.max_probes
    }

    /// Probes `v` and updates the bracket.
    fn probe(&mut self, v: f64) -> Result<Side> {
        if let Some(p) = self.probes.iter().find(|p| p.value == v) {
            return Ok(side(&p.estimate));
        }
        let estimate = (self.estimate)(v)?;
        let s = side(&estimate);
        let probe = Probe { value: v, estimate };
        match s {
            Side::Above if self.low.as_ref().is_none_or(|l| l.value < v) => self.low = Some(probe.clone()),
            Side::Below if self.high.as_ref().is_none_or(|h| h.value > v) => self.high = Some(probe.clone()),
            _ => {}
        }
        self.probes.push(probe);
        Ok(s)
    }

    fn narrow_enough(&self) -> bool {
        match (&self.low, &self.high) {
            (Some(l), Some(h)) => h.value / l.value <= 2.0 || (self.integer && h.value - l.value <= 1.0),
            _ => false,
        }
    }

    fn interior_point(&self, a: f64, b: f64) -> Option<f64> {
        let v = self.snap((a * b).sqrt());
        (v > a && v < b).then_some(v)
    }

    fn run(mut self, start: f64, parameter: &str, trials: u64) -> Result<ThresholdBracket> {
        let mut diagnostic = None;
        let mut v = self.snap(start);
        while self.high.is_none() && !self.exhausted() {
            self.probe(v)?;
            v = self.snap(v * 4.0);
        }
        v = self.snap(start / 4.0);
        while self.low.is_none() && !self.exhausted() {
            if self.probes.iter().any(|p| p.value == v) && v <= self.min_value {
                diagnostic = Some(format!("no probe above 1/2 down to {}", self.min_value));
                break;
            }
            self.probe(v)?;
            v = self.snap(v / 4.0);
        }
        while !self.narrow_enough() && !self.exhausted() {
            let (Some(l), Some(h)) = (self.low.as_ref().map(|p| p.value), self.high.as_ref().map(|p| p.value)) else {
                break;
            };
            let Some(mid) = self.interior_point(l, h) else { break };
            if self.probe(mid)? == Side::Undecided {
                let quarters = [self.interior_point(l, mid), self.interior_point(mid, h)];
                let before = (l, h);
                for q in quarters.into_iter().flatten() {
                    if !self.exhausted() {
                        self.probe(q)?;
                    }
                }
                let after = (self.low.as_ref().unwrap().value, self.high.as_ref().unwrap().value);
                if after == before {
                    diagnostic = Some(format!("midpoint {mid} undecidable at {trials} trials per probe"));
                    break;
                }
            }
        }
        let complete = self.low.is_some() && self.high.is_some();
        if !complete && diagnostic.is_none() {
            diagnostic = Some(format!("probe budget of {} exhausted", self.max_probes));
        }
        if complete && !self.narrow_enough() && diagnostic.is_none() && self.exhausted() {
            diagnostic = Some(format!("probe budget of {} exhausted before ratio 2", self.max_probes));
        }
        Ok(ThresholdBracket {
            parameter: parameter.to_string(),
            low: self.low,
            high: self.high,
            trials_per_probe: trials,
            probes: self.probes,
            complete,
            diagnostic,
        })
    }
}

/// Bracket for `alpha(n)`, where `p(n, alpha)` crosses 1/2.
pub fn find_alpha_half(
    n: usize,
    trials: u64,
    seed: u64,
    max_probes: usize,
    opts: &RunOptions,
) -> Result<ThresholdBracket> {
    let search = Search {
        estimate: |alpha| estimate_extremal_probability(n, alpha, trials, seed, opts),
        integer: false,
        min_value: 1e-3,
        max_probes,
        probes: Vec::new(),
        low: None,
        high: None,
    };
    search.run(4.0, "alpha", trials)
}

/// Bracket for the step count at which the lattice extremal probability
/// crosses 1/2.
pub fn find_n_half(n: usize, trials: u64, seed: u64, max_probes: usize, opts: &RunOptions) -> Result<ThresholdBracket> {
    let search = Search {
        estimate: |steps: f64| estimate_discrete_probability(n, steps as usize, trials, seed, opts),
        integer: true,
        min_value: 1.0,
        max_probes,
        probes: Vec::new(),
        low: None,
        high: None,
    };
    search.run(4.0 * n as f64, "N", trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::one_dimensional_extremal_probability;

    #[test]
    fn one_dimensional_bracket_contains_exact_crossing() {
        // Solve 2 S(alpha) - exp(-alpha) = 1/2 by bisection.
        let (mut a, mut b) = (0.1f64, 100.0f64);
        for _ in 0..100 {
            let m = (a * b).sqrt();
            if one_dimensional_extremal_probability(m).unwrap() > 0.5 {
                a = m;
            } else {
                b = m;
            }
        }
        let bracket = find_alpha_half(1, 4000, 3, DEFAULT_MAX_PROBES, &RunOptions::default()).unwrap();
        assert!(bracket.complete, "{bracket:?}");
        assert!(bracket.low.as_ref().unwrap().value <= a && b <= bracket.high.as_ref().unwrap().value);
    }

    #[test]
    fn discrete_bracket_is_ordered() {
        let bracket = find_n_half(1, 2000, 4, DEFAULT_MAX_PROBES, &RunOptions::default()).unwrap();
        assert!(bracket.complete);
        let (l, h) = (bracket.low.unwrap(), bracket.high.unwrap());
        assert!(l.value < h.value);
        assert!(l.estimate.ci_low > 0.5 && h.estimate.ci_high < 0.5);
    }

    #[test]
    fn tiny_budget_gives_partial_bracket() {
        let bracket = find_alpha_half(2, 200, 5, 1, &RunOptions::default()).unwrap();
        assert!(!bracket.complete);
        assert!(bracket.diagnostic.is_some());
    }
}
