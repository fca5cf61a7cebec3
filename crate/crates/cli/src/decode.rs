use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use suprec::decoders::{
    distance_decode, distance_decode_k1, ml_decode, omp_decode, DecodeResult, DecoderParams, Outcome, WorkCaps,
};
use suprec::experiments::DecoderKind;
use suprec::signal::MeasurementMatrix;

use crate::error::{CliError, CliResult};
use crate::list::one_based;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Instance JSON file.
    file: PathBuf,
    /// Expected sparsity; a mismatch with the file is an error.
    #[arg(long)]
    k: Option<usize>,
    /// Overrides the acceptance threshold of the distance rule.
    #[arg(long)]
    threshold: Option<f64>,
    /// Overrides the decoder named in the file.
    #[arg(long)]
    decoder: Option<DecoderKind>,
}

/// On-disk instance: header fields plus `a` (row-major, `n * m`) and `y`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub sigma_a2: f64,
    pub sigma_z2: f64,
    #[serde(default)]
    pub decoder: Option<DecoderKind>,
    #[serde(default)]
    pub params: Option<DecoderParams>,
    #[serde(default)]
    pub caps: Option<WorkCaps>,
    pub a: Vec<f64>,
    pub y: Vec<f64>,
    /// Planted support, 1-based; only used to report `recovered`.
    #[serde(default)]
    pub planted: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
struct Report {
    decoder: &'static str,
    status: &'static str,
    /// 1-based, ascending.
    support: Option<Vec<usize>>,
    ambiguous: bool,
    satisfying_sets: u64,
    residual: Option<f64>,
    threshold: Option<f64>,
    witness_values: Option<Vec<f64>>,
    candidates_examined: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered: Option<bool>,
}

fn load(path: &PathBuf) -> CliResult<InstanceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}

pub fn run(args: Args) -> CliResult<()> {
    let inst = load(&args.file)?;
    if let Some(k) = args.k {
        if k != inst.k {
            return Err(CliError::usage(format!("--k {k} does not match k = {} in the instance file", inst.k)));
        }
    }
    if inst.a.len() != inst.n * inst.m {
        return Err(CliError::usage(format!(
            "matrix has {} entries, expected n * m = {}",
            inst.a.len(),
            inst.n * inst.m
        )));
    }
    if inst.y.len() != inst.n {
        return Err(CliError::usage(format!("y has {} entries, expected n = {}", inst.y.len(), inst.n)));
    }
    if let Some(p) = &inst.planted {
        if p.len() != inst.k || p.iter().any(|&i| i == 0 || i > inst.m) {
            return Err(CliError::usage("planted must list k indices in 1..=m"));
        }
    }
    let a = MeasurementMatrix::from_row_major(inst.n, inst.m, inst.sigma_a2, &inst.a)?;
    let kind = args
        .decoder
        .or(inst.decoder)
        .unwrap_or(if inst.k == 1 { DecoderKind::DistanceK1 } else { DecoderKind::Distance });
    let mut params = match inst.params {
        Some(p) => p,
        None => DecoderParams::defaults_for(inst.sigma_a2, inst.sigma_z2)?,
    };
    if args.threshold.is_some() {
        params.threshold_override = args.threshold;
    }
    params.validate()?;
    let caps = inst.caps.unwrap_or_default();

    let res = match kind {
        DecoderKind::DistanceK1 => {
            if inst.k != 1 {
                return Err(CliError::usage("distance_k1 needs k = 1"));
            }
            distance_decode_k1(&inst.y, &a, &params, inst.sigma_a2, inst.sigma_z2)?
        }
        DecoderKind::Distance => distance_decode(&inst.y, &a, inst.k, &params, inst.sigma_a2, inst.sigma_z2, &caps)?,
        DecoderKind::Ml => ml_decode(&inst.y, &a, inst.k, &caps)?,
        DecoderKind::Omp => omp_decode(&inst.y, &a, inst.k)?,
    };
    let recovered = inst.planted.map(|p| {
        let zero_based: Vec<usize> = p.iter().map(|i| i - 1).collect();
        res.recovers(&zero_based)
    });
    let rep = report(kind, res, recovered);
    println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    Ok(())
}

fn report(kind: DecoderKind, res: DecodeResult, recovered: Option<bool>) -> Report {
    let (status, support, reason) = match &res.outcome {
        Outcome::Support { indices } => {
            let mut s = one_based(indices);
            s.sort_unstable();
            ("support", Some(s), None)
        }
        Outcome::Failure => ("failure", None, None),
        Outcome::NumericalFailure { reason } => ("numerical_failure", None, Some(reason.clone())),
    };
    // witness values follow the returned index order; reorder with the sort
    let witness_values = match (&res.outcome, res.witness_values) {
        (Outcome::Support { indices }, Some(v)) => {
            let mut pairs: Vec<(usize, f64)> = indices.iter().copied().zip(v).collect();
            pairs.sort_by_key(|p| p.0);
            Some(pairs.into_iter().map(|p| p.1).collect())
        }
        (_, v) => v,
    };
    Report {
        decoder: kind.label(),
        status,
        support,
        ambiguous: res.ambiguous,
        satisfying_sets: res.satisfying_sets,
        residual: res.residual,
        threshold: res.threshold,
        witness_values,
        candidates_examined: res.candidates_examined,
        reason,
        recovered,
    }
}
