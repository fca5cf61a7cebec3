use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify, decode_instance, draw_instance, ErrorEstimate, TrialConfig, TrialOutcome};
use crate::stats::Proportion;
use crate::thresholds::{c_of_w, ceil_count, Activity};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageReport {
    pub m: usize,
    pub n: usize,
    pub rate_bits: f64,
    /// Decoding failures among decoded trials.
    pub failure: ErrorEstimate,
    /// Fraction of drawn value vectors with `c(W) <= rate`, over all trials.
    pub outage: Proportion,
}

impl OutageReport {
    /// Empirical failure minus the outage estimate.
    pub fn gap(&self) -> f64 {
        self.failure.pe.estimate - self.outage.estimate
    }
}

/// Draws `W` from `activity` per trial and runs the template's pipeline at
/// `n = ceil(log2 m / rate)`, recording both the decoding outcome and whether
/// that `W` was in outage.
pub fn run_outage_experiment(
    activity: &Activity,
    template: &TrialConfig,
    rate_bits: f64,
    trials: u64,
) -> Result<OutageReport> {
    activity.require_bounded()?;
    if !(rate_bits > 0.0 && rate_bits.is_finite()) {
        return Err(Error::config(format!("rate must be positive, got {rate_bits}")));
    }
    if trials == 0 {
        return Err(Error::config("need at least one trial"));
    }
    let m = template.model.m;
    if m < 2 {
        return Err(Error::config("outage experiment needs m >= 2"));
    }
    let n = ceil_count((m as f64).log2() / rate_bits).max(1) as usize;
    let mut cfg = template.clone();
    cfg.signal = activity.clone();
    cfg.model.k = activity.k();
    cfg.model.n = n;
    cfg.validate()?;
    let md = cfg.model.clone();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = draw_instance(&cfg, t, 1)?;
            let c = c_of_w(&inst.values[0], md.sigma_a2, md.sigma_z2)?.bits;
            let res = decode_instance(&cfg, &inst);
            let report = classify(t, inst.planted, res)?;
            Ok((report.outcome, c <= rate_bits))
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |o| per_trial.iter().filter(|(x, _)| *x == o).count() as u64;
    let failure = ErrorEstimate::from_counts(
        count(TrialOutcome::Success),
        count(TrialOutcome::Failure),
        count(TrialOutcome::Refused),
    )?;
    let in_outage = per_trial.iter().filter(|(_, o)| *o).count() as u64;
    Ok(OutageReport {
        m,
        n,
        rate_bits,
        failure,
        outage: Proportion::new(in_outage, trials),
    })
}
