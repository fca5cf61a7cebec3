//! Distance decoding: accept a candidate support when some quantized value
//! vector brings the normalized residual under the rule's threshold.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use super::grid::{build_grid, Lattice};
use super::linalg::{cholesky, cholesky_solve, dot, inverse_diagonal};
use super::{
    binomial, check_problem, check_set_cap, estimate_magnitude, residual, walk_sets_from, DecodeResult,
    DecoderParams, Outcome, SearchMode, WorkCaps,
};
use crate::signal::MeasurementMatrix;
use crate::{Error, Result};

/// Relative slack under which a quadratic-form residual is re-checked directly.
const RECHECK: f64 = 1e-9;

/// Single-index rule: accept `s` if `||y -/+ W_hat a_s||^2 / n` is under the
/// threshold for either sign.
pub fn distance_decode_k1(
    y: &[f64],
    a: &MeasurementMatrix,
    params: &DecoderParams,
    sigma_a2: f64,
    sigma_z2: f64,
) -> Result<DecodeResult> {
    params.validate()?;
    check_problem(y, a, 1)?;
    let thr = params.threshold(sigma_a2, sigma_z2);
    let w_hat = estimate_magnitude(y, sigma_a2, sigma_z2);
    let mut count = 0u64;
    let mut first: Option<(usize, f64, f64)> = None;
    for s in 0..a.m() {
        let mut best: Option<(f64, f64)> = None;
        for sign in [-1.0, 1.0] {
            let v = sign * w_hat;
            let res = residual(y, a, &[s], &[v]);
            if res <= thr && best.is_none_or(|(_, r)| res < r) {
                best = Some((v, res));
            }
        }
        if let Some((v, res)) = best {
            count += 1;
            if first.is_none() {
                first = Some((s, v, res));
            }
        }
    }
    let examined = 2 * a.m() as u64;
    Ok(match first {
        Some((s, v, res)) => DecodeResult {
            outcome: Outcome::Support { indices: vec![s] },
            ambiguous: count > 1,
            satisfying_sets: count,
            witness_values: Some(vec![v]),
            residual: Some(res),
            threshold: Some(thr),
            candidates_examined: examined,
        },
        None => failure(thr, examined),
    })
}

/// `k >= 2` rule over all `C(m, k)` supports and the grid
/// `Q(W_hat + zeta/2, zeta)`.
///
/// Exactly one passing set is a clean success. Several passing sets return
/// the lexicographically smallest one flagged ambiguous; none returns
/// [`Outcome::Failure`].
pub fn distance_decode(
    y: &[f64],
    a: &MeasurementMatrix,
    k: usize,
    params: &DecoderParams,
    sigma_a2: f64,
    sigma_z2: f64,
    caps: &WorkCaps,
) -> Result<DecodeResult> {
    params.validate()?;
    check_problem(y, a, k)?;
    if k < 2 {
        return Err(Error::config("the grid distance decoder needs k >= 2; use the single-index rule for k = 1"));
    }
    let thr = params.threshold(sigma_a2, sigma_z2);
    let w_hat = estimate_magnitude(y, sigma_a2, sigma_z2);
    let r = w_hat + params.zeta / 2.0;
    let sets = check_set_cap(a.m(), k, caps, "distance decoder candidate sets")?;
    match params.search {
        SearchMode::Pruned => {
            let lattice = Lattice::new(r, params.zeta, k)?;
            pruned(y, a, k, lattice, thr, caps)
        }
        SearchMode::Exhaustive => {
            let grid = build_grid(r, params.zeta, k, caps.grid_points)?;
            let estimate = sets * grid.len() as f64;
            if estimate > caps.evaluations {
                return Err(Error::WorkCap {
                    what: "distance decoder rule evaluations",
                    estimate,
                    cap: caps.evaluations,
                });
            }
            let points = grid.points();
            let tasks = scan(a.m(), k, caps, |set, _| {
                let mut best: Option<(usize, f64)> = None;
                for (i, p) in points.iter().enumerate() {
                    let res = residual(y, a, set, p);
                    if res <= thr && best.is_none_or(|(_, b)| res < b) {
                        best = Some((i, res));
                    }
                }
                (points.len() as u64, best.map(|(i, res)| (points[i].clone(), res)))
            })?;
            Ok(reduce(tasks, thr))
        }
    }
}

fn failure(thr: f64, examined: u64) -> DecodeResult {
    DecodeResult {
        outcome: Outcome::Failure,
        ambiguous: true,
        satisfying_sets: 0,
        witness_values: None,
        residual: None,
        threshold: Some(thr),
        candidates_examined: examined,
    }
}

#[derive(Default)]
struct TaskResult {
    count: u64,
    evals: u64,
    first: Option<(Vec<usize>, Vec<f64>, f64)>,
}

/// Runs `eval` over every candidate set, one rayon task per smallest index,
/// enforcing the evaluation cap on the running total.
fn scan<F>(m: usize, k: usize, caps: &WorkCaps, eval: F) -> Result<Vec<TaskResult>>
where
    F: Fn(&[usize], &mut Scratch) -> (u64, Option<(Vec<f64>, f64)>) + Sync,
{
    let total = AtomicU64::new(0);
    let over = AtomicBool::new(false);
    let cap = caps.evaluations;
    let tasks: Vec<TaskResult> = (0..=m - k)
        .into_par_iter()
        .map(|first| {
            let mut out = TaskResult::default();
            let mut scratch = Scratch::new(k);
            walk_sets_from(first, m, k, &mut |set| {
                if over.load(Ordering::Relaxed) {
                    return false;
                }
                let (evals, hit) = eval(set, &mut scratch);
                out.evals += evals;
                let seen = total.fetch_add(evals, Ordering::Relaxed) + evals;
                if seen as f64 > cap {
                    over.store(true, Ordering::Relaxed);
                    return false;
                }
                if let Some((v, res)) = hit {
                    out.count += 1;
                    if out.first.is_none() {
                        out.first = Some((set.to_vec(), v, res));
                    }
                }
                true
            });
            out
        })
        .collect();
    if over.load(Ordering::Relaxed) {
        return Err(Error::WorkCap {
            what: "distance decoder rule evaluations",
            estimate: total.load(Ordering::Relaxed) as f64,
            cap,
        });
    }
    Ok(tasks)
}

fn reduce(tasks: Vec<TaskResult>, thr: f64) -> DecodeResult {
    let count: u64 = tasks.iter().map(|t| t.count).sum();
    let examined: u64 = tasks.iter().map(|t| t.evals).sum();
    match tasks.into_iter().find_map(|t| t.first) {
        Some((set, v, res)) => DecodeResult {
            outcome: Outcome::Support { indices: set },
            ambiguous: count > 1,
            satisfying_sets: count,
            witness_values: Some(v),
            residual: Some(res),
            threshold: Some(thr),
            candidates_examined: examined,
        },
        None => failure(thr, examined),
    }
}

struct Scratch {
    g: Vec<f64>,
    l: Vec<f64>,
    bt: Vec<f64>,
    center: Vec<f64>,
    inv_diag: Vec<f64>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    idx: Vec<i64>,
    v: Vec<f64>,
}

impl Scratch {
    fn new(k: usize) -> Self {
        Self {
            g: vec![0.0; k * k],
            l: vec![0.0; k * k],
            bt: vec![0.0; k],
            center: vec![0.0; k],
            inv_diag: vec![0.0; k],
            lo: vec![0; k],
            hi: vec![0; k],
            idx: vec![0; k],
            v: vec![0.0; k],
        }
    }
}

/// Per set, the residual is the quadratic `(yy - 2 b.v + v'Gv) / n`. Its
/// minimum over all of `R^k` bounds every grid point from below, and the
/// sublevel set at the threshold is an ellipsoid whose bounding box (widened
/// by the `zeta/2` projection shift) holds every lattice index that can pass.
fn pruned(
    y: &[f64],
    a: &MeasurementMatrix,
    k: usize,
    lat: Lattice,
    thr: f64,
    caps: &WorkCaps,
) -> Result<DecodeResult> {
    let n = y.len() as f64;
    let yy = dot(y, y);
    let b = a.tr_mul_vec(y);
    let norms = a.column_norms_sq();
    let cut = thr * (1.0 + RECHECK) + f64::MIN_POSITIVE;
    let tasks = scan(a.m(), k, caps, |set, s| {
        for i in 0..k {
            s.bt[i] = b[set[i]];
            s.g[i * k + i] = norms[set[i]];
            for j in 0..i {
                let gij = dot(a.column(set[i]), a.column(set[j]));
                s.g[i * k + j] = gij;
                s.g[j * k + i] = gij;
            }
        }
        s.l.copy_from_slice(&s.g);
        let boxed = if cholesky(&mut s.l, k) {
            s.center.copy_from_slice(&s.bt);
            cholesky_solve(&s.l, k, &mut s.center);
            let q_min = (yy - dot(&s.bt, &s.center)) / n;
            if q_min > cut {
                return (1, None);
            }
            inverse_diagonal(&s.l, k, &mut s.inv_diag);
            let room = (n * (thr - q_min)).max(0.0) * (1.0 + RECHECK);
            for i in 0..k {
                let half = (room * s.inv_diag[i]).sqrt() + lat.zeta / 2.0;
                s.lo[i] = (((s.center[i] - half) / lat.spacing).ceil() as i64).max(-lat.extent);
                s.hi[i] = (((s.center[i] + half) / lat.spacing).floor() as i64).min(lat.extent);
            }
            true
        } else {
            false
        };
        if !boxed {
            s.lo.iter_mut().for_each(|v| *v = -lat.extent);
            s.hi.iter_mut().for_each(|v| *v = lat.extent);
        }
        if s.lo.iter().zip(&s.hi).any(|(l, h)| l > h) {
            return (1, None);
        }
        let mut evals = 1u64;
        let mut best: Option<(Vec<f64>, f64)> = None;
        s.idx.copy_from_slice(&s.lo);
        'outer: loop {
            if lat.point(&s.idx, &mut s.v) {
                evals += 1;
                let mut quad = 0.0;
                for i in 0..k {
                    let gi = &s.g[i * k..(i + 1) * k];
                    quad += s.v[i] * (dot(gi, &s.v) - 2.0 * s.bt[i]);
                }
                let mut res = (yy + quad) / n;
                if res <= cut {
                    res = residual(y, a, set, &s.v);
                    if res <= thr && best.as_ref().is_none_or(|(_, r)| res < *r) {
                        best = Some((s.v.clone(), res));
                    }
                }
            }
            let mut d = 0;
            loop {
                if d == k {
                    break 'outer;
                }
                s.idx[d] += 1;
                if s.idx[d] <= s.hi[d] {
                    break;
                }
                s.idx[d] = s.lo[d];
                d += 1;
            }
        }
        (evals, best)
    })?;
    Ok(reduce(tasks, thr))
}

/// Rule evaluations an exhaustive scan would need: `C(m, k)` times the grid
/// size bound.
pub fn exhaustive_work_estimate(m: usize, k: usize, w_hat: f64, zeta: f64) -> Result<f64> {
    let lat = Lattice::new(w_hat + zeta / 2.0, zeta, k)?;
    Ok(binomial(m, k) * lat.cardinality_bound())
}
