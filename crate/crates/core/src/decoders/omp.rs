//! Orthogonal matching pursuit.

use super::linalg::{dot, least_squares};
use super::{check_problem, residual, DecodeResult, Outcome};
use crate::signal::MeasurementMatrix;
use crate::{Error, Result};

/// `k` greedy rounds: pick the unused column with the largest `|a_j . r|`
/// (lowest index on ties), then refit all picked columns by least squares.
pub fn omp_decode(y: &[f64], a: &MeasurementMatrix, k: usize) -> Result<DecodeResult> {
    check_problem(y, a, k)?;
    if k > a.n() {
        return Err(Error::config(format!("OMP needs k <= n, got k={k} n={}", a.n())));
    }
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    let mut r = y.to_vec();
    let mut values = Vec::new();
    let mut examined = 0u64;
    for round in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..a.m() {
            if picked.contains(&j) {
                continue;
            }
            examined += 1;
            let c = dot(a.column(j), &r).abs();
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        let (j, _) = best.expect("k <= m leaves a column");
        picked.push(j);
        let cols: Vec<&[f64]> = picked.iter().map(|&p| a.column(p)).collect();
        match least_squares(&cols, y) {
            Some((v, res)) => {
                values = v;
                r = res;
            }
            None => {
                return Ok(DecodeResult {
                    outcome: Outcome::NumericalFailure {
                        reason: format!("column {j} is linearly dependent on the columns chosen before round {round}"),
                    },
                    ambiguous: false,
                    satisfying_sets: 0,
                    witness_values: None,
                    residual: None,
                    threshold: None,
                    candidates_examined: examined,
                });
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| picked[i]);
    let support: Vec<usize> = order.iter().map(|&i| picked[i]).collect();
    let witness: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let res = residual(y, a, &support, &witness);
    Ok(DecodeResult {
        outcome: Outcome::Support { indices: support },
        ambiguous: false,
        satisfying_sets: 1,
        witness_values: Some(witness),
        residual: Some(res),
        threshold: None,
        candidates_examined: examined,
    })
}
