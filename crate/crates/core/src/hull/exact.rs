//! Exhaustive classification for small instances in exact integer arithmetic.
//!
//! Every finite `f64` is `m * 2^e`; shifting all coordinates by the smallest
//! exponent turns the instance into an integer one with the same geometry, so
//! all sign tests below are exact.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use super::{separating_margin_unchecked, HullVerdict, Outcome};
use crate::error::{Error, Result};

pub const MAX_DIMENSION: usize = 4;
pub const MAX_POINTS: usize = 12;

fn to_integers(points: &[Vec<f64>]) -> Vec<Vec<BigInt>> {
    let decoded: Vec<Vec<(u64, i16, i8)>> = points
        .iter()
        .map(|p| p.iter().map(|v| Float::integer_decode(*v)).collect())
        .collect();
    let min_exp = decoded
        .iter()
        .flatten()
        .filter(|(m, _, _)| *m != 0)
        .map(|(_, e, _)| *e)
        .min()
        .unwrap_or(0);
    decoded
        .iter()
        .map(|p| {
            p.iter()
                .map(|&(mant, exp, sign)| {
                    if mant == 0 {
                        return BigInt::zero();
                    }
                    let v = BigInt::from(mant) << ((exp - min_exp) as usize);
                    if sign < 0 {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

fn det(rows: &[Vec<BigInt>]) -> BigInt {
    match rows.len() {
        0 => BigInt::from(1),
        1 => rows[0][0].clone(),
        2 => &rows[0][0] * &rows[1][1] - &rows[0][1] * &rows[1][0],
        k => {
            let mut total = BigInt::zero();
            for col in 0..k {
                if rows[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<BigInt>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &rows[0][col] * det(&minor);
                if col % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
    }
}

/// Vector `c` with `<c, x> = det[rows; x]` for every `x`; `rows` has one
/// fewer entry than the dimension.
fn cofactor_normal(rows: &[&Vec<BigInt>], dim: usize) -> Vec<BigInt> {
    let last = rows.len();
    (0..dim)
        .map(|k| {
            let minor: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let d = det(&minor);
            if (last + k).is_multiple_of(2) {
                d
            } else {
                -d
            }
        })
        .collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_f64_scaled(values: &[BigInt]) -> Vec<f64> {
    let bits = values.iter().map(|v| v.bits()).max().unwrap_or(0);
    let shift = bits.saturating_sub(900) as usize;
    values.iter().map(|v| (v >> shift).to_f64().unwrap_or(0.0)).collect()
}

fn rank_basis(points: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigRational>> {
    // Row-reduced basis of the span, in rationals.
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for p in points {
        let mut row: Vec<BigRational> = p.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        for (b, &piv) in basis.iter().zip(&pivots) {
            if !row[piv].is_zero() {
                let f = &row[piv] / &b[piv];
                for k in 0..dim {
                    row[k] = &row[k] - &f * &b[k];
                }
            }
        }
        if let Some(piv) = (0..dim).find(|&k| !row[k].is_zero()) {
            basis.push(row);
            pivots.push(piv);
        }
        if basis.len() == dim {
            break;
        }
    }
    basis
}

fn rational_row_to_integers(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::from(1), |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
    row.iter()
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect()
}

/// Exact verdict for `conv({0} ∪ points)`; requires dimension at most
/// [`MAX_DIMENSION`] and at most [`MAX_POINTS`] points.
pub fn brute_force_classify(points: &[Vec<f64>]) -> Result<HullVerdict> {
    let dim = super::minnorm::check_points(points)?;
    if dim > MAX_DIMENSION || points.len() > MAX_POINTS {
        return Err(Error::InstanceTooLarge {
            dimension: dim,
            count: points.len(),
        });
    }
    let mut ints = to_integers(points);
    ints.retain(|p| p.iter().any(|v| !v.is_zero()));
    ints.sort();
    ints.dedup();

    let extremal = |normal: Vec<BigInt>| {
        let witness = to_f64_scaled(&normal);
        let margin = separating_margin_unchecked(points, &witness);
        HullVerdict {
            outcome: Outcome::Extremal { witness, margin },
            tolerance: 0.0,
        }
    };

    if ints.is_empty() {
        let mut e = vec![BigInt::zero(); dim];
        e[0] = BigInt::from(1);
        return Ok(extremal(e));
    }

    let basis = rank_basis(&ints, dim);
    if basis.len() < dim {
        // Complete the span with unit vectors to n-1 independent rows; the
        // cofactor normal is then orthogonal to every point.
        let mut rows: Vec<Vec<BigInt>> = basis.iter().map(|r| rational_row_to_integers(r)).collect();
        for k in 0..dim {
            if rows.len() == dim - 1 {
                break;
            }
            let mut e = vec![BigInt::zero(); dim];
            e[k] = BigInt::from(1);
            let mut trial = rows.clone();
            trial.push(e.clone());
            if rank_basis(&trial, dim).len() == trial.len() {
                rows.push(e);
            }
        }
        let refs: Vec<&Vec<BigInt>> = rows.iter().collect();
        return Ok(extremal(cofactor_normal(&refs, dim)));
    }

    for subset in ints.iter().combinations(dim - 1) {
        let normal = cofactor_normal(&subset, dim);
        if normal.iter().all(|v| v.is_zero()) {
            continue;
        }
        let signs: Vec<BigInt> = ints.iter().map(|p| dot(&normal, p)).collect();
        if signs.iter().all(|s| !s.is_negative()) {
            return Ok(extremal(normal));
        }
        if signs.iter().all(|s| !s.is_positive()) {
            return Ok(extremal(normal.iter().map(|v| -v).collect()));
        }
    }

    Ok(HullVerdict {
        outcome: Outcome::Interior {
            depth: facet_depth(&ints, points, dim),
        },
        tolerance: 0.0,
    })
}

/// Distance from the origin to the nearest facet of `conv({0} ∪ points)`,
/// for an origin known to be interior.
fn facet_depth(ints: &[Vec<BigInt>], points: &[Vec<f64>], dim: usize) -> f64 {
    let scale = {
        // Integer coordinates are the originals times 2^shift.
        let (a, b) = points
            .iter()
            .flatten()
            .zip(to_integers(points).iter().flatten())
            .find(|(v, _)| **v != 0.0)
            .map(|(v, i)| (*v, i.to_f64().unwrap_or(f64::INFINITY)))
            .unwrap_or((1.0, 1.0));
        b / a
    };
    let mut best = f64::INFINITY;
    for subset in ints.iter().combinations(dim) {
        // f(x) = det[[p_1, 1], ..., [p_n, 1], [x, 1]] = <w, x> + c0.
        let lifted: Vec<Vec<BigInt>> = subset
            .iter()
            .map(|p| p.iter().cloned().chain(std::iter::once(BigInt::from(1))).collect())
            .collect();
        let refs: Vec<&Vec<BigInt>> = lifted.iter().collect();
        let full = cofactor_normal(&refs, dim + 1);
        let (w, c0) = full.split_at(dim);
        if w.iter().all(|v| v.is_zero()) {
            continue;
        }
        let values: Vec<BigInt> = ints.iter().map(|p| dot(w, p) + &c0[0]).collect();
        let nonneg = values.iter().all(|v| !v.is_negative()) && !c0[0].is_negative();
        let nonpos = values.iter().all(|v| !v.is_positive()) && !c0[0].is_positive();
        if nonneg || nonpos {
            let mut all: Vec<BigInt> = w.to_vec();
            all.push(c0[0].clone());
            let f = to_f64_scaled(&all);
            let wn = f[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
            best = best.min(f[dim].abs() / wn / scale);
        }
    }
    best
}
