//! Is the origin an interior point of `conv({0} ∪ points)`?
//!
//! The origin is interior exactly when the directions `u_i = X_i / |X_i|`
//! positively span `R^n`; otherwise some `v != 0` has `<v, X_i> >= 0` for all
//! `i` and the origin is a boundary (extremal) point.
//!
//! [`classify_origin`] first runs Frank-Wolfe with away steps on `conv{u_i}`,
//! which finds a separating direction quickly whenever one exists with a
//! comfortable margin. If that fails it projects `-sum u_i` onto the cone of
//! the directions (non-negative least squares). A small residual together
//! with the smallest singular value of the direction matrix yields a
//! certified lower bound on the radius of a ball around the origin inside the
//! hull; a nonzero residual is itself a separating direction.

mod exact;
pub(crate) mod minnorm;
mod nnls;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub use exact::{brute_force_classify, MAX_DIMENSION, MAX_POINTS};
pub use minnorm::{min_norm_point, MinNormResult};

use crate::error::{invalid, Result};
use minnorm::{check_points, frank_wolfe, Rule, Stop};

/// Relative scale of the default tolerance.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

const SEPARATION_ITERATIONS: usize = 200;
const SEPARATION_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Interior,
    Extremal,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// `depth` is a certified lower bound on the distance from the origin to
    /// the hull boundary.
    Interior {
        depth: f64,
    },
    /// `margin = min_i <witness, X_i> / |witness|`.
    Extremal {
        witness: Vec<f64>,
        margin: f64,
    },
    Ambiguous {
        diagnostic: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullVerdict {
    pub outcome: Outcome,
    /// Absolute tolerance the decision was made with (0 for exact decisions).
    pub tolerance: f64,
}

impl HullVerdict {
    pub fn kind(&self) -> VerdictKind {
        match self.outcome {
            Outcome::Interior { .. } => VerdictKind::Interior,
            Outcome::Extremal { .. } => VerdictKind::Extremal,
            Outcome::Ambiguous { .. } => VerdictKind::Ambiguous,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.kind() == VerdictKind::Interior
    }

    pub fn is_extremal(&self) -> bool {
        self.kind() == VerdictKind::Extremal
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match &self.outcome {
            Outcome::Extremal { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `1e-9` times the largest point norm.
pub fn default_tolerance(points: &[Vec<f64>]) -> f64 {
    DEFAULT_RELATIVE_TOL * points.iter().map(|p| norm(p)).fold(0.0, f64::max)
}

pub(crate) fn separating_margin_unchecked(points: &[Vec<f64>], v: &[f64]) -> f64 {
    let vn = norm(v);
    points.iter().map(|p| dot(p, v) / vn).fold(f64::INFINITY, f64::min)
}

/// `min_i <v, X_i> / |v|`.
pub fn separating_margin(points: &[Vec<f64>], v: &[f64]) -> Result<f64> {
    let dim = check_points(points)?;
    if v.len() != dim {
        return Err(invalid(format!("witness has dimension {}, points have {dim}", v.len())));
    }
    if !v.iter().all(|x| x.is_finite()) || norm(v) == 0.0 {
        return Err(invalid("witness must be a finite nonzero vector"));
    }
    Ok(separating_margin_unchecked(points, v))
}

fn dedup_nonzero(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = points.iter().filter(|p| p.iter().any(|v| *v != 0.0)).cloned().collect();
    kept.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    kept.dedup();
    kept
}

/// Decide for unit directions `units` of the points in `original`.
/// Returns the verdict and the final Frank-Wolfe weights for warm starts.
fn decide(
    original: &[Vec<f64>],
    units: &[Vec<f64>],
    min_point_norm: f64,
    tol: f64,
    warm: Option<&[f64]>,
) -> (HullVerdict, Vec<f64>) {
    let dim = units[0].len();
    let m = units.len();
    let extremal = |witness: Vec<f64>, margin: f64| HullVerdict {
        outcome: Outcome::Extremal { witness, margin },
        tolerance: tol,
    };

    let run = frank_wolfe(
        units,
        warm,
        Rule::Separation {
            floor: SEPARATION_FLOOR,
        },
        SEPARATION_ITERATIONS,
    );
    if run.stop == Stop::Separated || run.min_dot > 0.0 {
        let margin = separating_margin_unchecked(original, &run.x);
        if margin > 0.0 {
            return (extremal(run.x, margin), run.weights);
        }
    }
    let weights = run.weights;

    let gram = DMatrix::from_fn(dim, dim, |i, j| units.iter().map(|u| u[i] * u[j]).sum::<f64>());
    let eig = SymmetricEigen::new(gram);
    let (imin, &lambda_min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("dimension is positive");
    // The Gram eigenvalue carries roundoff of order eps, so its square root
    // would overstate a vanishing singular value; take it from an SVD.
    let sigma = if m >= dim && lambda_min > 0.0 {
        let mat = DMatrix::from_fn(dim, m, |i, j| units[j][i]);
        mat.singular_values().min()
    } else {
        0.0
    };
    let eigvec: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();

    let target: Vec<f64> = (0..dim).map(|k| -units.iter().map(|u| u[k]).sum::<f64>()).collect();
    let proj = nnls::nnls(units, &target);
    let r_norm = norm(&proj.residual);

    if sigma > 0.0 {
        // Every y equals U a with |a| <= |y| / sigma; the positive dependency
        // sum_i w_i u_i = 0 with w_i >= delta lets the coefficients be shifted
        // non-negative, and the sum of the coefficients over |X_i| stays <= 1
        // for |y| below the bound.
        let delta = 1.0 - r_norm / sigma;
        if delta > 0.0 {
            let big_w = m as f64 + proj.coeffs.iter().sum::<f64>() + (m as f64).sqrt() * r_norm / sigma;
            let depth = sigma * min_point_norm / ((m as f64).sqrt() + big_w / delta);
            if depth > tol {
                return (
                    HullVerdict {
                        outcome: Outcome::Interior { depth },
                        tolerance: tol,
                    },
                    weights,
                );
            }
        }
    }

    let mut candidates = vec![run.x, proj.residual];
    candidates.push(eigvec.clone());
    candidates.push(eigvec.iter().map(|v| -v).collect());
    let best = candidates
        .into_iter()
        .filter(|c| norm(c) > 0.0 && c.iter().all(|v| v.is_finite()))
        .map(|c| {
            let margin = separating_margin_unchecked(original, &c);
            (c, margin)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((witness, margin)) if margin >= -tol => {
            let witness = witness.iter().map(|v| v / norm(&witness)).collect();
            (extremal(witness, margin), weights)
        }
        best => (
            HullVerdict {
                outcome: Outcome::Ambiguous {
                    diagnostic: format!(
                        "no certificate within tolerance {tol:e}: sigma_min {sigma:e}, cone residual {r_norm:e}, \
                         best margin {:e}, nnls converged {}",
                        best.map(|b| b.1).unwrap_or(f64::NAN),
                        proj.converged
                    ),
                },
                tolerance: tol,
            },
            weights,
        ),
    }
}

fn unit_directions(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let mut min_norm = f64::INFINITY;
    let units = points
        .iter()
        .map(|p| {
            let n = norm(p);
            min_norm = min_norm.min(n);
            p.iter().map(|v| v / n).collect()
        })
        .collect();
    (units, min_norm)
}

/// Classify the origin against `conv({0} ∪ points)`.
///
/// `tol` is absolute; `None` uses [`default_tolerance`]. Extremal verdicts
/// carry a unit witness whose margin is at least `-tol`.
pub fn classify_origin(points: &[Vec<f64>], tol: Option<f64>) -> Result<HullVerdict> {
    let dim = check_points(points)?;
    let tol = match tol {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(invalid(format!("tolerance must be positive and finite, got {t}"))),
        None => default_tolerance(points),
    };
    let kept = dedup_nonzero(points);
    if kept.is_empty() {
        let mut witness = vec![0.0; dim];
        witness[0] = 1.0;
        return Ok(HullVerdict {
            outcome: Outcome::Extremal { witness, margin: 0.0 },
            tolerance: tol,
        });
    }
    let (units, min_point_norm) = unit_directions(&kept);
    Ok(decide(points, &units, min_point_norm, tol, None).0)
}

/// Growing set of directions, re-classified with warm-started iterations.
#[derive(Debug, Clone)]
pub struct IncrementalHull {
    dim: usize,
    units: Vec<Vec<f64>>,
    weights: Vec<f64>,
    tol: f64,
}

impl IncrementalHull {
    /// `tol` applies to the unit directions.
    pub fn new(dim: usize, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !(tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        Ok(IncrementalHull {
            dim,
            units: Vec::new(),
            weights: Vec::new(),
            tol,
        })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Adds the direction of `point`; the zero vector is ignored.
    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(invalid("point dimension mismatch"));
        }
        let n = norm(point);
        if !n.is_finite() {
            return Err(invalid("points must be finite"));
        }
        if n > 0.0 {
            self.units.push(point.iter().map(|v| v / n).collect());
        }
        Ok(())
    }

    pub fn classify(&mut self) -> HullVerdict {
        if self.units.is_empty() {
            let mut witness = vec![0.0; self.dim];
            witness[0] = 1.0;
            return HullVerdict {
                outcome: Outcome::Extremal { witness, margin: 0.0 },
                tolerance: self.tol,
            };
        }
        let warm = if self.weights.is_empty() {
            None
        } else {
            Some(self.weights.as_slice())
        };
        let (verdict, weights) = decide(&self.units, &self.units, 1.0, self.tol, warm);
        self.weights = weights;
        verdict
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(points: &[Vec<f64>]) -> VerdictKind {
        classify_origin(points, None).unwrap().kind()
    }

    #[test]
    fn quadrant_is_extremal_with_diagonal_witness() {
        let v = classify_origin(&[vec![1.0, 0.0], vec![0.0, 1.0]], None).unwrap();
        let w = v.witness().unwrap();
        assert!(w[0] > 0.0 && w[1] > 0.0);
        assert!((w[0] - w[1]).abs() < 1e-6);
    }

    #[test]
    fn triangle_around_origin_is_interior() {
        let v = classify_origin(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]], None).unwrap();
        match v.outcome {
            Outcome::Interior { depth } => assert!(depth > 0.0 && depth <= 1.0 / 5f64.sqrt() + 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn segment_through_origin_is_extremal() {
        assert_eq!(kind(&[vec![1.0, 0.0], vec![-1.0, 0.0]]), VerdictKind::Extremal);
    }

    #[test]
    fn origin_on_a_face() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![3.0, 2.0]];
        let v = classify_origin(&pts, None).unwrap();
        assert_eq!(v.kind(), VerdictKind::Extremal);
        assert!(separating_margin(&pts, v.witness().unwrap()).unwrap() >= -v.tolerance);
    }

    #[test]
    fn lattice_square_is_interior() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let v = classify_origin(&pts, None).unwrap();
        match v.outcome {
            // The inscribed ball of the square has radius 1/sqrt 2.
            Outcome::Interior { depth } => assert!(depth > 0.0 && depth <= 0.5f64.sqrt() + 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_and_duplicate_points() {
        assert_eq!(kind(&[vec![0.0, 0.0]]), VerdictKind::Extremal);
        assert_eq!(
            kind(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0], vec![-1.0, 0.5]]),
            VerdictKind::Extremal
        );
    }

    #[test]
    fn fewer_points_than_dimension() {
        let pts = vec![vec![1.0, 2.0, 3.0], vec![-3.0, -1.0, -2.0]];
        assert_eq!(kind(&pts), VerdictKind::Extremal);
    }

    #[test]
    fn margin_examples() {
        assert_eq!(
            separating_margin(&[vec![1.0, 0.0], vec![2.0, 0.0]], &[1.0, 0.0]).unwrap(),
            1.0
        );
        let s = 0.5f64.sqrt();
        let m = separating_margin(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[s, s]).unwrap();
        assert!((m - s).abs() < 1e-15);
        let pts = vec![vec![1.0, -2.0], vec![0.3, 0.7]];
        let a = separating_margin(&pts, &[0.2, 0.9]).unwrap();
        let b = separating_margin(&pts, &[1.4, 6.3]).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(separating_margin(&pts, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(classify_origin(&[vec![1.0]], Some(0.0)).is_err());
        assert!(classify_origin(&[vec![1.0]], Some(f64::NAN)).is_err());
    }

    #[test]
    fn incremental_matches_batch() {
        let mut inc = IncrementalHull::new(2, 1e-9).unwrap();
        inc.push(&[1.0, 0.0]).unwrap();
        inc.push(&[0.0, 2.0]).unwrap();
        assert_eq!(inc.classify().kind(), VerdictKind::Extremal);
        inc.push(&[-3.0, -3.0]).unwrap();
        assert_eq!(inc.classify().kind(), VerdictKind::Interior);
        assert_eq!(inc.len(), 3);
    }
}
