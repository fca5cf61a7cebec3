use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{estimate_error_prob, TrialConfig};
use crate::rng::SeedStream;
use crate::signal::SignalValues;
use crate::thresholds::{c_of_w, ceil_count, Activity};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "m,n,rate_bits,c_w_bits,pe,ci_lo,ci_hi,trials,refusals,decoder,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepPoints {
    /// Explicit `(m, n)` pairs.
    Pairs { pairs: Vec<(usize, usize)> },
    /// Every `m` at every rate, with `n = ceil(log2 m / rate)`.
    Rates { m: Vec<usize>, rates: Vec<f64> },
}

impl SweepPoints {
    pub fn resolve(&self) -> Result<Vec<(usize, usize)>> {
        let pts = match self {
            SweepPoints::Pairs { pairs } => pairs.clone(),
            SweepPoints::Rates { m, rates } => {
                let mut out = Vec::new();
                for &rate in rates {
                    if !(rate > 0.0 && rate.is_finite()) {
                        return Err(Error::config(format!("sweep rates must be positive, got {rate}")));
                    }
                    for &mm in m {
                        if mm < 2 {
                            return Err(Error::config("rate sweeps need m >= 2"));
                        }
                        let n = ceil_count((mm as f64).log2() / rate).max(1);
                        out.push((mm, n as usize));
                    }
                }
                out
            }
        };
        if pts.is_empty() {
            return Err(Error::config("sweep has no points"));
        }
        Ok(pts)
    }
}

/// `base` supplies everything except `m` and `n`; its seed is the master
/// seed from which one seed per point is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: TrialConfig,
    pub points: SweepPoints,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub n: usize,
    pub rate_bits: f64,
    /// Present only for a fixed signal-value vector.
    pub c_w_bits: Option<f64>,
    /// `None` when every trial at this point was refused.
    pub pe: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    /// Decoded (non-refused) trials.
    pub trials: u64,
    pub refusals: u64,
    pub decoder: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl SweepResult {
    /// Header plus one line per row, `\n` terminated.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.m,
                r.n,
                r.rate_bits,
                opt(r.c_w_bits),
                opt(r.pe),
                opt(r.ci_lo),
                opt(r.ci_hi),
                r.trials,
                r.refusals,
                r.decoder,
                r.seed
            )
            .expect("writing to a String");
        }
        s
    }
}

pub fn sweep_phase_transition(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.trials == 0 {
        return Err(Error::config("sweep needs trials >= 1"));
    }
    let points = spec.points.resolve()?;
    let master = SeedStream::new(spec.base.seed);
    let c_w = match &spec.base.signal {
        Activity::Fixed { w } => {
            let md = &spec.base.model;
            Some(c_of_w(&SignalValues::new(w.clone())?, md.sigma_a2, md.sigma_z2)?.bits)
        }
        _ => None,
    };
    let mut rows = Vec::with_capacity(points.len());
    for (i, &(m, n)) in points.iter().enumerate() {
        let mut cfg = spec.base.clone();
        cfg.model.m = m;
        cfg.model.n = n;
        cfg.seed = master.derive(i as u64);
        let (pe, ci_lo, ci_hi, trials, refusals) = match estimate_error_prob(&cfg, spec.trials) {
            Ok(e) => (Some(e.pe.estimate), Some(e.pe.ci_lo), Some(e.pe.ci_hi), e.pe.trials, e.refusals),
            Err(Error::NoData { refusals }) => (None, None, None, 0, refusals),
            Err(e) => return Err(e),
        };
        rows.push(SweepRow {
            m,
            n,
            rate_bits: (m as f64).log2() / n as f64,
            c_w_bits: c_w,
            pe,
            ci_lo,
            ci_hi,
            trials,
            refusals,
            decoder: cfg.decoder.label().to_string(),
            seed: cfg.seed,
        });
    }
    Ok(SweepResult { rows })
}
