//! Monte Carlo proportions and means with confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

/// Two-sided coverage of `±3` standard deviations.
pub const DEFAULT_CONFIDENCE: f64 = 0.997_300_203_936_739_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub estimate: f64,
    /// Trials entering the estimate (ambiguous trials excluded).
    pub trials: u64,
    /// Present for proportions.
    pub successes: Option<u64>,
    /// Present for means: unbiased sample variance.
    pub sample_variance: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub ambiguous_count: u64,
}

/// Standard normal quantile for a two-sided interval of level `confidence`.
pub fn z_for_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 * (1.0 + confidence)))
}

/// Wilson score interval `(low, high)` for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

impl EstimateCI {
    pub fn proportion(successes: u64, trials: u64, ambiguous: u64, confidence: f64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("a proportion needs at least one trial"));
        }
        if successes > trials {
            return Err(invalid("successes exceed trials"));
        }
        let z = z_for_confidence(confidence)?;
        let (ci_low, ci_high) = wilson_interval(successes, trials, z);
        Ok(EstimateCI {
            estimate: successes as f64 / trials as f64,
            trials,
            successes: Some(successes),
            sample_variance: None,
            ci_low,
            ci_high,
            confidence,
            ambiguous_count: ambiguous,
        })
    }

    /// Normal interval with the sample variance; a single sample gives a
    /// degenerate interval.
    pub fn mean(samples: &[f64], confidence: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("a mean needs at least one sample"));
        }
        let z = z_for_confidence(confidence)?;
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half = z * (var / n).sqrt();
        Ok(EstimateCI {
            estimate: mean,
            trials: samples.len() as u64,
            successes: None,
            sample_variance: Some(var),
            ci_low: mean - half,
            ci_high: mean + half,
            confidence,
            ambiguous_count: 0,
        })
    }

    /// Standard error implied by the interval at its confidence level.
    pub fn sigma(&self) -> f64 {
        let z = z_for_confidence(self.confidence).unwrap_or(3.0);
        0.5 * (self.ci_high - self.ci_low) / z
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_confidence_is_three_sigma() {
        assert!((z_for_confidence(DEFAULT_CONFIDENCE).unwrap() - 3.0).abs() < 1e-9);
        assert!(z_for_confidence(1.0).is_err());
    }

    #[test]
    fn wilson_contains_estimate_and_stays_in_unit_interval() {
        for (s, t) in [(0, 10), (10, 10), (3, 7), (1, 100_000)] {
            let e = EstimateCI::proportion(s, t, 0, DEFAULT_CONFIDENCE).unwrap();
            assert!(0.0 <= e.ci_low && e.ci_low <= e.estimate && e.estimate <= e.ci_high && e.ci_high <= 1.0);
        }
        // Known value: 5/10 at z = 1.96 is (0.2366, 0.7634).
        let (lo, hi) = wilson_interval(5, 10, 1.959963984540054);
        assert!((lo - 0.236_593).abs() < 1e-5 && (hi - 0.763_407).abs() < 1e-5);
    }

    #[test]
    fn mean_interval() {
        let e = EstimateCI::mean(&[1.0, 2.0, 3.0, 4.0], DEFAULT_CONFIDENCE).unwrap();
        assert_eq!(e.estimate, 2.5);
        assert!((e.sample_variance.unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((e.sigma() - (5.0f64 / 12.0).sqrt()).abs() < 1e-9);
        let single = EstimateCI::mean(&[7.0], DEFAULT_CONFIDENCE).unwrap();
        assert_eq!((single.ci_low, single.ci_high), (7.0, 7.0));
    }

    #[test]
    fn rejects_empty_inputs() {
        assert!(EstimateCI::proportion(0, 0, 0, DEFAULT_CONFIDENCE).is_err());
        assert!(EstimateCI::proportion(3, 2, 0, DEFAULT_CONFIDENCE).is_err());
        assert!(EstimateCI::mean(&[], DEFAULT_CONFIDENCE).is_err());
    }
}
