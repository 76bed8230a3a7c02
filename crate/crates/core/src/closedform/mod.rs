//! Closed-form probabilities used as ground truth for the simulations.

mod quadrature;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

pub use quadrature::gauss_legendre;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per Gauss-Legendre panel.
    pub node_count: usize,
    /// Integrate in `theta` with `w = sin^2 theta`, which removes both
    /// endpoint singularities of the arcsine weight.
    pub substitution: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 64,
            substitution: true,
        }
    }
}

/// Absolute accuracy targeted by the adaptive quadrature.
const QUAD_TOL: f64 = 1e-13;

/// `P(0 not in conv)` for `N` symmetric absolutely continuous points in
/// `R^n`: `2^-(N-1) * sum_{k<n} C(N-1, k)`.
pub fn wendel(n: usize, big_n: usize) -> Result<BigRational> {
    if n == 0 || big_n == 0 {
        return Err(invalid("wendel needs n >= 1 and N >= 1"));
    }
    let top = big_n - 1;
    let mut binom = BigInt::one();
    let mut sum = BigInt::zero();
    for k in 0..n.min(big_n) {
        sum += &binom;
        binom = binom * BigInt::from(top - k) / BigInt::from(k + 1);
    }
    Ok(BigRational::new(sum, BigInt::one() << top))
}

pub fn wendel_f64(n: usize, big_n: usize) -> Result<f64> {
    Ok(wendel(n, big_n)?.to_f64().unwrap_or(0.0))
}

/// `P(B(t) > 0 at every point of a Poisson(alpha) process on [0,1])`,
/// i.e. `E[exp(-alpha W)]` for arcsine-distributed `W`.
pub fn stay_positive_probability(alpha: f64) -> Result<f64> {
    stay_positive_probability_with(alpha, QuadratureSpec::default())
}

pub fn stay_positive_probability_with(alpha: f64, quad: QuadratureSpec) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    if quad.node_count < 2 {
        return Err(invalid("quadrature needs at least 2 nodes"));
    }
    let rule = quadrature::Rule::new(quad.node_count);
    let pi = std::f64::consts::PI;
    if quad.substitution {
        let f = |theta: f64| {
            let s = theta.sin();
            (-alpha * s * s).exp()
        };
        Ok(2.0 / pi * rule.adaptive(&f, 0.0, 0.5 * pi, QUAD_TOL))
    } else {
        let f = |w: f64| {
            let d = w * (1.0 - w);
            if d > 0.0 {
                (-alpha * w).exp() / d.sqrt()
            } else {
                0.0
            }
        };
        Ok(rule.adaptive(&f, 0.0, 1.0, QUAD_TOL) / pi)
    }
}

/// `P(extremal)` for the 1-D walk at Poisson times: all points on one side
/// of the origin, `2 S(alpha) - exp(-alpha)`.
pub fn one_dimensional_extremal_probability(alpha: f64) -> Result<f64> {
    Ok(2.0 * stay_positive_probability(alpha)? - (-alpha).exp())
}

/// `exp(-alpha) + sum_{k>=1} Poisson(alpha; k) / k`, the probability that a
/// 0-0 bridge on `[0,1]` is positive at all Poisson(alpha) times. No points
/// counts as positive.
pub fn bridge_positive_probability(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let ln_alpha = alpha.ln();
    let mut sum = (-alpha).exp();
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let term = (kf * ln_alpha - alpha - ln_gamma(kf + 1.0)).exp() / kf;
        sum += term;
        // Past the mode the terms decay at least geometrically with ratio
        // alpha / (k + 1).
        let ratio = alpha / (kf + 1.0);
        if ratio < 1.0 && term / (1.0 - ratio) < 1e-12 * sum {
            break;
        }
        k += 1;
    }
    Ok(sum)
}

/// Density of the maximum of a Brownian bridge from `a` to `b` over
/// `[0, T]`: `4 (y - (a+b)/2) / T * exp(-2 (y-a)(y-b) / T)` above
/// `max(a, b)`, zero elsewhere.
pub fn bridge_max_density(a: f64, b: f64, horizon: f64, y: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if y <= a.max(b) {
        return Ok(0.0);
    }
    Ok(4.0 * (y - 0.5 * (a + b)) / horizon * (-2.0 / horizon * (y - a) * (y - b)).exp())
}

/// `P(max of the 0-0 bridge on [0, T] > u) = exp(-2 u^2 / T)`.
pub fn bridge_max_tail(horizon: f64, u: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(u > 0.0) {
        return Err(invalid(format!("level must be positive, got {u}")));
    }
    let z = u / horizon.sqrt();
    Ok((-2.0 * z * z).exp())
}

/// `10 n / sqrt N`, bounding the stay-positive probability of a projected
/// lattice walk.
pub fn discrete_walk_bound(n: usize, big_n: usize) -> Result<f64> {
    if big_n <= 2 {
        return Err(invalid(format!("N must exceed 2, got {big_n}")));
    }
    Ok(10.0 * n as f64 / (big_n as f64).sqrt())
}

/// `2 ln N / N`, bounding the stay-positive probability of a projected
/// lattice bridge.
pub fn discrete_bridge_bound(big_n: usize) -> Result<f64> {
    if big_n <= 2 {
        return Err(invalid(format!("N must exceed 2, got {big_n}")));
    }
    let nf = big_n as f64;
    Ok(2.0 * nf.ln() / nf)
}

/// Leading-order facet density at `r` in the open simplex (length `n + 1`):
/// `prod_{j=2..n} 1/(alpha r_j) * (1/pi) / sqrt(alpha r_1 * alpha r_{n+1})`.
/// The `1 + O(1/(alpha r_j))` correction factors are dropped.
pub fn facet_density(r: &[f64], alpha: f64, n: usize) -> Result<f64> {
    if n == 0 || r.len() != n + 1 {
        return Err(invalid(format!("r must have n + 1 = {} coordinates", n + 1)));
    }
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if r.iter().any(|x| !(*x > 0.0)) {
        return Err(invalid("r must lie in the open simplex"));
    }
    if (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("coordinates of r must sum to 1"));
    }
    let middle: f64 = r[1..n].iter().map(|x| 1.0 / (alpha * x)).product();
    Ok(middle / std::f64::consts::PI / (alpha * r[0] * alpha * r[n]).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `exp(-x) I_0(x)` by its power series summed in log space.
    fn scaled_bessel_i0(x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        let half = 0.5 * x;
        let mut sum = 0.0;
        let mut k = 0.0f64;
        loop {
            let ln_term = 2.0 * k * half.ln() - 2.0 * ln_gamma(k + 1.0) - x;
            let term = ln_term.exp();
            sum += term;
            if k > half && term < 1e-18 * sum {
                break;
            }
            k += 1.0;
        }
        sum
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn wendel_values() {
        assert_eq!(wendel(1, 1).unwrap(), ratio(1, 1));
        assert_eq!(wendel(2, 3).unwrap(), ratio(3, 4));
        assert_eq!(wendel(3, 10).unwrap(), ratio(46, 512));
        assert!(wendel(0, 3).is_err());
    }

    #[test]
    fn wendel_is_one_for_few_points_and_monotone() {
        for n in 1..=6 {
            for big_n in 1..=64 {
                let w = wendel(n, big_n).unwrap();
                if big_n <= n {
                    assert!(w.is_one());
                }
                if big_n > 1 {
                    assert!(w <= wendel(n, big_n - 1).unwrap());
                }
                if n > 1 {
                    assert!(w >= wendel(n - 1, big_n).unwrap());
                }
            }
        }
    }

    #[test]
    fn stay_positive_matches_bessel_form() {
        for alpha in [0.0, 0.3, 1.0, 7.5, 100.0, 1e3, 1e4, 1e5] {
            let q = stay_positive_probability(alpha).unwrap();
            let exact = scaled_bessel_i0(0.5 * alpha);
            assert!((q - exact).abs() < 1e-10, "alpha {alpha}: {q} vs {exact}");
        }
        assert!((stay_positive_probability(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(stay_positive_probability(-1.0).is_err());
    }

    #[test]
    fn stay_positive_asymptotics() {
        for alpha in [1e4, 1e5] {
            let r = stay_positive_probability(alpha).unwrap() * (std::f64::consts::PI * alpha).sqrt();
            assert!((r - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn raw_arcsine_integrand_is_less_accurate() {
        let quad = QuadratureSpec {
            node_count: 64,
            substitution: false,
        };
        let raw = stay_positive_probability_with(1.0, quad).unwrap();
        let exact = scaled_bessel_i0(0.5);
        let err = (raw - exact).abs();
        assert!(err > 1e-8 && err < 1e-2, "{err}");
    }

    #[test]
    fn bridge_positive_matches_integral_form() {
        // exp(-alpha) * (1 + int_0^alpha (e^t - 1)/t dt), by composite Simpson.
        for alpha in [0.5, 3.0, 50.0, 100.0] {
            let steps = 200_000;
            let h = alpha / steps as f64;
            let f = |t: f64| {
                if t == 0.0 {
                    (-alpha).exp()
                } else {
                    ((t - alpha).exp() - (-alpha).exp()) / t
                }
            };
            let mut s = f(0.0) + f(alpha);
            for i in 1..steps {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            let exact = (-alpha).exp() + s * h / 3.0;
            let v = bridge_positive_probability(alpha).unwrap();
            assert!(
                (v - exact).abs() < 1e-10 * exact.max(1e-3),
                "alpha {alpha}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn bridge_positive_limits() {
        assert!(bridge_positive_probability(1e-9).unwrap() > 1.0 - 1e-8);
        let v = bridge_positive_probability(50.0).unwrap();
        assert!((v * 50.0 - 1.0).abs() < 50f64.powf(-0.5));
        assert!((bridge_positive_probability(100.0).unwrap() * 100.0 - 1.0).abs() < 0.2);
        assert!((bridge_positive_probability(1000.0).unwrap() * 1000.0 - 1.0).abs() < 0.07);
        assert!(bridge_positive_probability(0.0).is_err());
    }

    #[test]
    fn bridge_max_law() {
        assert_eq!(bridge_max_tail(1.0, 1.0).unwrap(), (-2.0f64).exp());
        for (t, u) in [(0.3, 0.7), (2.0, 1.1), (17.0, 0.01)] {
            assert_eq!(
                bridge_max_tail(t, u).unwrap(),
                bridge_max_tail(1.0, u / f64::sqrt(t)).unwrap()
            );
        }
        assert_eq!(bridge_max_density(-1.0, 2.0, 1.0, 0.5).unwrap(), 0.0);
        // The density integrates to the tail.
        let (a, b, t, u) = (0.2, -0.4, 1.5, 0.9);
        let rule = quadrature::Rule::new(32);
        let integral = rule.adaptive(&|y| bridge_max_density(a, b, t, y).unwrap(), u, u + 20.0, 1e-14);
        let tail = (-2.0 / t * (u - a) * (u - b)).exp();
        assert!((integral - tail).abs() < 1e-12);
    }

    #[test]
    fn discrete_bounds() {
        assert_eq!(discrete_walk_bound(5, 1000).unwrap(), 50.0 / 1000f64.sqrt());
        assert_eq!(discrete_bridge_bound(1000).unwrap(), 2.0 * 1000f64.ln() / 1000.0);
        assert!(discrete_walk_bound(5, 2).is_err());
        assert!(discrete_bridge_bound(2).is_err());
    }

    #[test]
    fn facet_density_properties() {
        let v = facet_density(&[0.25, 0.75], 10.0, 1).unwrap();
        assert!((v - 1.0 / std::f64::consts::PI / (2.5f64 * 7.5).sqrt()).abs() < 1e-15);
        for n in 1..5 {
            let r = vec![1.0 / (n + 1) as f64; n + 1];
            let a = facet_density(&r, 20.0, n).unwrap();
            let b = facet_density(&r, 40.0, n).unwrap();
            assert!(a > 0.0 && b < a);
            assert!((b / a - 0.5f64.powi(n as i32)).abs() < 1e-12);
        }
        assert!(facet_density(&[0.0, 1.0], 1.0, 1).is_err());
    }
}
