//! Support decoders: distance decoding over an ε-net of signal values, plus
//! exhaustive least-squares (ML) and OMP baselines.
//!
//! Indices are 0-based throughout.

pub mod distance;
pub mod grid;
mod linalg;
pub mod ml;
pub mod omp;

use serde::{Deserialize, Serialize};

use crate::signal::MeasurementMatrix;
use crate::{Error, Result};

pub use distance::{distance_decode, distance_decode_k1};
pub use grid::{build_grid, Lattice, QuantizationGrid};
pub use linalg::binomial;
pub use ml::{ml_decode, ml_decode_multi};
pub use omp::omp_decode;

/// Which acceptance threshold the distance rule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `sigma_z^2 + eps^2 sigma_a^2`
    #[default]
    FixedK,
    /// `(1 + eps) sigma_z^2 + 2 eps^2 sigma_a^2`
    GrowingK,
}

/// How the `k >= 2` distance decoder visits grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Per candidate set, only grid points that can possibly pass the rule
    /// are evaluated. Same decisions as `Exhaustive`.
    #[default]
    Pruned,
    /// Every grid point against every candidate set.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub epsilon: f64,
    pub zeta: f64,
    #[serde(default)]
    pub rule: Rule,
    /// Replaces the rule's threshold outright when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_override: Option<f64>,
    #[serde(default)]
    pub search: SearchMode,
}

impl DecoderParams {
    pub fn new(epsilon: f64, zeta: f64, rule: Rule) -> Result<Self> {
        let p = Self {
            epsilon,
            zeta,
            rule,
            threshold_override: None,
            search: SearchMode::Pruned,
        };
        p.validate()?;
        Ok(p)
    }

    /// `eps = 0.1 sqrt(sigma_z^2 / sigma_a^2)` and `zeta = eps`.
    pub fn defaults_for(sigma_a2: f64, sigma_z2: f64) -> Result<Self> {
        let eps = 0.1 * (sigma_z2 / sigma_a2).sqrt();
        Self::new(eps, eps, Rule::FixedK)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(Error::config(format!("zeta must be positive, got {}", self.zeta)));
        }
        if let Some(t) = self.threshold_override {
            if !(t >= 0.0) {
                return Err(Error::config(format!("threshold override must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn threshold(&self, sigma_a2: f64, sigma_z2: f64) -> f64 {
        if let Some(t) = self.threshold_override {
            return t;
        }
        let e = self.epsilon;
        match self.rule {
            Rule::FixedK => sigma_z2 + e * e * sigma_a2,
            Rule::GrowingK => (1.0 + e) * sigma_z2 + 2.0 * e * e * sigma_a2,
        }
    }
}

/// Refusal limits for the exponential searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkCaps {
    /// Rule evaluations (candidate sets plus grid points tried).
    pub evaluations: f64,
    /// Materialized grid size.
    pub grid_points: f64,
}

impl Default for WorkCaps {
    fn default() -> Self {
        Self {
            evaluations: 1e8,
            grid_points: grid::DEFAULT_GRID_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Support { indices: Vec<usize> },
    Failure,
    NumericalFailure { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub outcome: Outcome,
    /// Zero or several sets passed the rule.
    pub ambiguous: bool,
    pub satisfying_sets: u64,
    /// Values attached to the returned indices, in the same order.
    pub witness_values: Option<Vec<f64>>,
    /// `||y - sum_j v_j a_{s_j}||^2 / n` at the returned set and values.
    pub residual: Option<f64>,
    pub threshold: Option<f64>,
    pub candidates_examined: u64,
}

impl DecodeResult {
    pub fn support(&self) -> Option<&[usize]> {
        match &self.outcome {
            Outcome::Support { indices } => Some(indices),
            _ => None,
        }
    }

    /// Whether the returned set equals `planted` as a set.
    pub fn recovers(&self, planted: &[usize]) -> bool {
        match self.support() {
            Some(s) => {
                let mut a = s.to_vec();
                let mut b = planted.to_vec();
                a.sort_unstable();
                b.sort_unstable();
                a == b
            }
            None => false,
        }
    }
}

/// `sqrt(| ||y||^2 / n - sigma_z^2 | / sigma_a^2)`.
pub fn estimate_magnitude(y: &[f64], sigma_a2: f64, sigma_z2: f64) -> f64 {
    let n = y.len().max(1) as f64;
    let energy = linalg::dot(y, y) / n;
    ((energy - sigma_z2).abs() / sigma_a2).sqrt()
}

/// `||y - sum_j values_j a_{subset_j}||^2 / n`.
///
/// # Panics
/// If `subset` and `values` differ in length or `y` does not match `a`.
pub fn residual(y: &[f64], a: &MeasurementMatrix, subset: &[usize], values: &[f64]) -> f64 {
    assert_eq!(subset.len(), values.len(), "subset/values length mismatch");
    assert_eq!(y.len(), a.n(), "measurement length mismatch");
    let mut r = y.to_vec();
    for (&j, &v) in subset.iter().zip(values) {
        for (ri, ai) in r.iter_mut().zip(a.column(j)) {
            *ri -= v * ai;
        }
    }
    linalg::dot(&r, &r) / y.len() as f64
}

pub(crate) fn check_problem(y: &[f64], a: &MeasurementMatrix, k: usize) -> Result<()> {
    if y.len() != a.n() {
        return Err(Error::config(format!(
            "measurement vector has length {} but the matrix has {} rows",
            y.len(),
            a.n()
        )));
    }
    if k == 0 || k > a.m() {
        return Err(Error::config(format!("need 1 <= k <= m, got k={} m={}", k, a.m())));
    }
    Ok(())
}

pub(crate) fn check_set_cap(m: usize, k: usize, caps: &WorkCaps, what: &'static str) -> Result<f64> {
    let sets = binomial(m, k);
    if sets > caps.evaluations {
        return Err(Error::WorkCap {
            what,
            estimate: sets,
            cap: caps.evaluations,
        });
    }
    Ok(sets)
}

/// Calls `visit` on every increasing `k`-subset of `0..m` whose smallest
/// element is `first`, in lexicographic order. Stops early when `visit`
/// returns `false`; the return value reports whether the walk completed.
pub(crate) fn walk_sets_from(first: usize, m: usize, k: usize, visit: &mut impl FnMut(&[usize]) -> bool) -> bool {
    let mut set = Vec::with_capacity(k);
    set.push(first);
    if k == 1 {
        return visit(&set);
    }
    for i in 1..k {
        set.push(first + i);
    }
    if set[k - 1] >= m {
        return true;
    }
    loop {
        if !visit(&set) {
            return false;
        }
        // advance positions 1..k; position 0 is pinned to `first`
        let mut pos = k - 1;
        loop {
            if set[pos] < m - (k - pos) {
                set[pos] += 1;
                for q in pos + 1..k {
                    set[q] = set[q - 1] + 1;
                }
                break;
            }
            pos -= 1;
            if pos == 0 {
                return true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walks_cover_all_subsets_in_order() {
        for (m, k) in [(5, 1), (5, 2), (6, 3), (4, 4), (7, 5)] {
            let mut all = Vec::new();
            for first in 0..m {
                walk_sets_from(first, m, k, &mut |s| {
                    all.push(s.to_vec());
                    true
                });
            }
            assert_eq!(all.len() as f64, binomial(m, k), "m={m} k={k}");
            assert!(all.windows(2).all(|w| w[0] < w[1]));
            assert!(all.iter().all(|s| s.windows(2).all(|p| p[0] < p[1]) && s[k - 1] < m));
        }
    }

    #[test]
    fn walk_stops_early() {
        let mut seen = 0;
        let done = walk_sets_from(0, 10, 2, &mut |_| {
            seen += 1;
            seen < 3
        });
        assert!(!done);
        assert_eq!(seen, 3);
    }

    #[test]
    fn magnitude_estimate_formula() {
        assert_eq!(estimate_magnitude(&[0.0; 4], 1.0, 1.0), 1.0);
        assert_eq!(estimate_magnitude(&[1.0, -1.0, 1.0, -1.0], 1.0, 1.0), 0.0);
        assert!((estimate_magnitude(&[3.0, 1.0], 2.0, 1.0) - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn thresholds_by_rule() {
        let mut p = DecoderParams::new(0.5, 0.5, Rule::FixedK).unwrap();
        assert!((p.threshold(2.0, 1.0) - 1.5).abs() < 1e-15);
        p.rule = Rule::GrowingK;
        assert!((p.threshold(2.0, 1.0) - 2.5).abs() < 1e-15);
        p.threshold_override = Some(7.0);
        assert_eq!(p.threshold(2.0, 1.0), 7.0);
        let d = DecoderParams::defaults_for(1.0, 4.0).unwrap();
        assert!((d.epsilon - 0.2).abs() < 1e-15 && d.zeta == d.epsilon);
        assert!(DecoderParams::new(0.0, 0.1, Rule::FixedK).is_err());
        assert!(DecoderParams::new(0.1, -1.0, Rule::FixedK).is_err());
    }

    #[test]
    fn residual_cases() {
        let a = MeasurementMatrix::from_columns(3, 2, 1.0, vec![1.0, 0.0, 2.0, 0.5, 1.0, -1.0]).unwrap();
        let y = a.mul_vec(&[2.0, -3.0]);
        assert!(residual(&y, &a, &[0, 1], &[2.0, -3.0]).abs() < 1e-15);
        assert!(residual(&y, &a, &[1, 0], &[-3.0, 2.0]).abs() < 1e-15);
        let energy = y.iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert_eq!(residual(&y, &a, &[0, 1], &[0.0, 0.0]), energy);
    }

    #[test]
    fn recovers_ignores_order() {
        let r = DecodeResult {
            outcome: Outcome::Support { indices: vec![4, 1] },
            ambiguous: false,
            satisfying_sets: 1,
            witness_values: None,
            residual: None,
            threshold: None,
            candidates_examined: 0,
        };
        assert!(r.recovers(&[1, 4]));
        assert!(!r.recovers(&[1, 3]));
    }
}
