//! Exhaustive least-squares support selection.

use rayon::prelude::*;

use super::linalg::{cholesky, cholesky_solve, dot, least_squares, projection_residual_sq};
use super::{check_problem, check_set_cap, residual, walk_sets_from, DecodeResult, Outcome, WorkCaps};
use crate::signal::MeasurementMatrix;
use crate::{Error, Result};

/// Support of size `k` minimizing `min_v ||y - A_T v||^2`; ties go to the
/// lexicographically smaller set.
pub fn ml_decode(y: &[f64], a: &MeasurementMatrix, k: usize, caps: &WorkCaps) -> Result<DecodeResult> {
    ml_decode_multi(std::slice::from_ref(&y.to_vec()), a, k, caps)
}

/// Common support for several measurement vectors: minimizes the sum of the
/// per-vector least-squares residuals.
pub fn ml_decode_multi(ys: &[Vec<f64>], a: &MeasurementMatrix, k: usize, caps: &WorkCaps) -> Result<DecodeResult> {
    if ys.is_empty() {
        return Err(Error::config("need at least one measurement vector"));
    }
    for y in ys {
        check_problem(y, a, k)?;
    }
    let sets = check_set_cap(a.m(), k, caps, "least-squares candidate sets")?;
    let m = a.m();
    let yy: Vec<f64> = ys.iter().map(|y| dot(y, y)).collect();
    let bs: Vec<Vec<f64>> = ys.iter().map(|y| a.tr_mul_vec(y)).collect();
    let norms = a.column_norms_sq();

    let best: Vec<Option<(f64, Vec<usize>)>> = (0..=m - k)
        .into_par_iter()
        .map(|first| {
            let mut g = vec![0.0; k * k];
            let mut rhs = vec![0.0; k];
            let mut local: Option<(f64, Vec<usize>)> = None;
            walk_sets_from(first, m, k, &mut |set| {
                for i in 0..k {
                    g[i * k + i] = norms[set[i]];
                    for j in 0..i {
                        g[i * k + j] = dot(a.column(set[i]), a.column(set[j]));
                    }
                }
                let score = if cholesky(&mut g, k) {
                    let mut total = 0.0;
                    for (b, yy) in bs.iter().zip(&yy) {
                        for i in 0..k {
                            rhs[i] = b[set[i]];
                        }
                        let fitted = {
                            let mut v = rhs.clone();
                            cholesky_solve(&g, k, &mut v);
                            dot(&rhs, &v)
                        };
                        total += yy - fitted;
                    }
                    total
                } else {
                    let cols: Vec<&[f64]> = set.iter().map(|&j| a.column(j)).collect();
                    ys.iter().map(|y| projection_residual_sq(&cols, y)).sum()
                };
                if local.as_ref().is_none_or(|(s, _)| score < *s) {
                    local = Some((score, set.to_vec()));
                }
                true
            });
            local
        })
        .collect();

    let (_, set) = best
        .into_iter()
        .flatten()
        .reduce(|acc, cand| if cand.0 < acc.0 { cand } else { acc })
        .expect("at least one candidate set");

    let cols: Vec<&[f64]> = set.iter().map(|&j| a.column(j)).collect();
    let mut total = 0.0;
    let mut witness = None;
    for y in ys {
        match least_squares(&cols, y) {
            Some((v, _)) => {
                total += residual(y, a, &set, &v);
                if ys.len() == 1 {
                    witness = Some(v);
                }
            }
            None => total += projection_residual_sq(&cols, y) / y.len() as f64,
        }
    }
    Ok(DecodeResult {
        outcome: Outcome::Support { indices: set },
        ambiguous: false,
        satisfying_sets: 1,
        witness_values: witness,
        residual: Some(total),
        threshold: None,
        candidates_examined: sets as u64,
    })
}

/// `min_v ||y - A_T v||^2 / n` for one set.
#[cfg(test)]
pub(crate) fn subset_residual(y: &[f64], a: &MeasurementMatrix, set: &[usize]) -> f64 {
    let cols: Vec<&[f64]> = set.iter().map(|&j| a.column(j)).collect();
    projection_residual_sq(&cols, y) / y.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::signal::{assemble_signal, draw_matrix, draw_support, measure, NoiseModel, SignalValues};
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    /// Independent oracle: nalgebra SVD least squares over every subset,
    /// enumerated by bitmask.
    fn brute_force(y: &[f64], a: &MeasurementMatrix, k: usize) -> (Vec<usize>, f64) {
        let n = a.n();
        let m = a.m();
        let yv = DVector::from_column_slice(y);
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut masks: Vec<u32> = (0u32..1 << m).filter(|s| s.count_ones() as usize == k).collect();
        masks.sort_by_key(|mask| (0..m).filter(|j| mask >> j & 1 == 1).collect::<Vec<_>>());
        for mask in masks {
            let set: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
            let sub = DMatrix::from_fn(n, k, |i, c| a.get(i, set[c]));
            let v = sub.clone().svd(true, true).solve(&yv, 1e-12).unwrap();
            let r = (&yv - &sub * v).norm_squared() / n as f64;
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                best = Some((r, set));
            }
        }
        let (r, s) = best.unwrap();
        (s, r)
    }

    fn instance(m: usize, n: usize, k: usize, sigma_z2: f64, seed: u64, t: u64) -> (MeasurementMatrix, Vec<f64>, Vec<usize>) {
        let mut rng = SeedStream::new(seed).rng(0, t);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let w = SignalValues::new(w).unwrap();
        let s = draw_support(m, k, &mut rng).unwrap();
        let x = assemble_signal(&w, &s, m).unwrap();
        let a = draw_matrix(n, m, 1.0, &mut rng).unwrap();
        let y = measure(&a, x.entries(), &NoiseModel::gaussian(sigma_z2).unwrap(), &mut rng).unwrap();
        (a, y, s.sorted())
    }

    #[test]
    fn matches_brute_force_oracle() {
        let caps = WorkCaps::default();
        let mut rng = SeedStream::new(5).rng(9, 0);
        for t in 0..50 {
            let m = rng.random_range(3..=10);
            let k = rng.random_range(1..=3.min(m));
            let n = rng.random_range(k + 1..=k + 8);
            let (a, y, _) = instance(m, n, k, 1.0, 51, t);
            let got = ml_decode(&y, &a, k, &caps).unwrap();
            let (set, res) = brute_force(&y, &a, k);
            assert_eq!(got.support().unwrap(), &set[..], "instance {t} m={m} k={k} n={n}");
            assert!((got.residual.unwrap() - res).abs() < 1e-10, "instance {t}");
        }
    }

    #[test]
    fn noiseless_exact_recovery() {
        let caps = WorkCaps::default();
        for t in 0..40 {
            let m = 6 + (t % 7) as usize;
            let k = 1 + (t % 3) as usize;
            let (a, y, s) = instance(m, 2 * k, k, 0.0, 53, t);
            let r = ml_decode(&y, &a, k, &caps).unwrap();
            assert!(r.recovers(&s), "instance {t}");
            assert!(r.residual.unwrap() < 1e-20);
        }
    }

    #[test]
    fn full_set_when_k_equals_m() {
        let (a, y, _) = instance(3, 6, 3, 1.0, 55, 0);
        let r = ml_decode(&y, &a, 3, &WorkCaps::default()).unwrap();
        assert_eq!(r.support(), Some(&[0usize, 1, 2][..]));
    }

    #[test]
    fn single_vector_multi_matches() {
        let caps = WorkCaps::default();
        for t in 0..10 {
            let (a, y, _) = instance(12, 10, 2, 0.5, 57, t);
            let one = ml_decode(&y, &a, 2, &caps).unwrap();
            let multi = ml_decode_multi(std::slice::from_ref(&y), &a, 2, &caps).unwrap();
            assert_eq!(one, multi);
        }
    }

    #[test]
    fn duplicate_columns_use_fallback() {
        let col = [1.0, 2.0, -1.0, 0.5];
        let other = [0.0, 1.0, 1.0, -2.0];
        let data: Vec<f64> = col.iter().chain(&col).chain(&other).copied().collect();
        let a = MeasurementMatrix::from_columns(4, 3, 1.0, data).unwrap();
        let y: Vec<f64> = col.iter().zip(&other).map(|(c, o)| 2.0 * c + o).collect();
        let r = ml_decode(&y, &a, 2, &WorkCaps::default()).unwrap();
        assert_eq!(r.support(), Some(&[0usize, 2][..]));
    }

    #[test]
    fn refuses_over_cap() {
        let (a, y, _) = instance(50, 10, 3, 1.0, 59, 0);
        let caps = WorkCaps {
            evaluations: 1000.0,
            ..WorkCaps::default()
        };
        assert!(matches!(ml_decode(&y, &a, 3, &caps), Err(Error::WorkCap { .. })));
        assert!(ml_decode_multi(&[], &a, 3, &WorkCaps::default()).is_err());
    }
}
