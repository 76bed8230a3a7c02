//! Lawson-Hanson active-set solver for `min |A x - b|` subject to `x >= 0`,
//! i.e. the projection of `b` onto the cone spanned by the columns of `A`.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Nnls {
    pub coeffs: Vec<f64>,
    /// `A x - b` at the returned solution.
    pub residual: Vec<f64>,
    pub converged: bool,
}

fn residual(columns: &[Vec<f64>], x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
    for (col, &xi) in columns.iter().zip(x) {
        if xi != 0.0 {
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri += xi * ci;
            }
        }
    }
    r
}

fn least_squares(columns: &[Vec<f64>], support: &[usize], b: &[f64]) -> Vec<f64> {
    let rows = b.len();
    let a = DMatrix::from_fn(rows, support.len(), |i, j| columns[support[j]][i]);
    let rhs = DVector::from_column_slice(b);
    let svd = a.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-13;
    match svd.solve(&rhs, cutoff) {
        Ok(z) => z.iter().copied().collect(),
        Err(_) => vec![0.0; support.len()],
    }
}

/// `columns` are the generators (all of length `b.len()`).
pub(crate) fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Nnls {
    let m = columns.len();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let col_scale = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let grad_tol = 1e-12 * (1.0 + b_norm) * col_scale.max(1.0);
    let max_outer = 3 * m + 50;

    let mut x = vec![0.0; m];
    let mut passive = vec![false; m];
    // Indices whose entry immediately came back nonpositive; skipped until
    // the passive set changes again.
    let mut blocked = vec![false; m];
    let mut converged = false;

    for _ in 0..max_outer {
        let r = residual(columns, &x, b);
        // Negative gradient of |Ax - b|^2 / 2 is -A^T r.
        let candidate = (0..m)
            .filter(|&j| !passive[j] && !blocked[j])
            .map(|j| (j, -columns[j].iter().zip(&r).map(|(c, ri)| c * ri).sum::<f64>()))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((j, _)) = candidate.filter(|(_, w)| *w > grad_tol) else {
            converged = true;
            break;
        };
        passive[j] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            let support: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let z = least_squares(columns, &support, b);
            if z.iter().all(|&v| v > 0.0) {
                x.iter_mut().for_each(|v| *v = 0.0);
                for (&i, &v) in support.iter().zip(&z) {
                    x[i] = v;
                }
                blocked.iter_mut().for_each(|v| *v = false);
                break;
            }
            if inner == 1 && support.len() == 1 && z[0] <= 0.0 {
                // Degenerate entry with a positive gradient but no descent.
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&i, &zi) in support.iter().zip(&z) {
                if zi <= 0.0 {
                    let denom = x[i] - zi;
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (&i, &zi) in support.iter().zip(&z) {
                x[i] += alpha * (zi - x[i]);
            }
            let mut dropped = false;
            for &i in &support {
                if x[i] <= 1e-15 * (1.0 + x[i].abs()) {
                    x[i] = 0.0;
                    passive[i] = false;
                    dropped = true;
                }
            }
            if !dropped || inner > m + 5 {
                // The newly added index cannot enter; fall back to the last
                // feasible point.
                if passive[j] && x[j] == 0.0 {
                    passive[j] = false;
                    blocked[j] = true;
                }
                break;
            }
        }
    }

    let residual = residual(columns, &x, b);
    Nnls {
        coeffs: x,
        residual,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn target_inside_cone_has_zero_residual() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = nnls(&cols, &[2.0, 3.0]);
        assert!(r.converged);
        assert!(norm(&r.residual) < 1e-12);
        assert!((r.coeffs[0] - 2.0).abs() < 1e-12 && (r.coeffs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn target_outside_cone_projects_to_face() {
        let cols = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        // (-1, 2) projects onto the ray through (1,1): <(-1,2),(1,1)>/2 = 0.5.
        let r = nnls(&cols, &[-1.0, 2.0]);
        assert!(r.converged);
        assert!((r.coeffs[0]).abs() < 1e-12);
        assert!((r.coeffs[1] - 0.5).abs() < 1e-12);
        assert!((r.residual[0] - 1.5).abs() < 1e-12 && (r.residual[1] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn target_in_polar_cone_projects_to_origin() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = nnls(&cols, &[-1.0, -2.0]);
        assert!(r.coeffs.iter().all(|c| *c == 0.0));
        assert_eq!(r.residual, vec![1.0, 2.0]);
    }

    #[test]
    fn residual_is_orthogonal_to_active_columns_and_polar() {
        let cols = vec![
            vec![0.6, 0.8, 0.0],
            vec![0.0, 0.6, 0.8],
            vec![0.8, 0.0, 0.6],
            vec![-0.6, 0.0, 0.8],
        ];
        let b = [-1.0, 0.3, -0.2];
        let r = nnls(&cols, &b);
        for (c, &x) in cols.iter().zip(&r.coeffs) {
            let g: f64 = c.iter().zip(&r.residual).map(|(a, b)| a * b).sum();
            // KKT: A^T r >= 0 and complementary slackness.
            assert!(g >= -1e-10, "gradient {g}");
            if x > 0.0 {
                assert!(g.abs() < 1e-10);
            }
        }
    }
}
