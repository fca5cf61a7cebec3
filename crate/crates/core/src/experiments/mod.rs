//! Monte Carlo harness: draw instances, decode, and count errors.
//!
//! Trial `t` of a run with master seed `s` uses stream `(s, TRIAL, t)` and
//! draws, in order, the support, the signal values, the matrix and the
//! noise. Aggregation is over trial indices, never over workers.

mod outage;
mod sweep;

pub use outage::{run_outage_experiment, OutageReport};
pub use sweep::{sweep_phase_transition, SweepPoints, SweepResult, SweepRow, SweepSpec, CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{
    distance_decode, distance_decode_k1, ml_decode, ml_decode_multi, omp_decode, DecodeResult, DecoderParams, WorkCaps,
};
use crate::rng::{domain, SeedStream};
use crate::signal::{
    assemble_signal, draw_matrix, draw_support, measure, MeasurementMatrix, NoiseKind, NoiseModel, SignalValues,
};
use crate::stats::Proportion;
use crate::thresholds::Activity;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub sigma_a2: f64,
    pub sigma_z2: f64,
    #[serde(default)]
    pub noise: NoiseKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    DistanceK1,
    Distance,
    Ml,
    Omp,
}

impl DecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            DecoderKind::DistanceK1 => "distance_k1",
            DecoderKind::Distance => "distance",
            DecoderKind::Ml => "ml",
            DecoderKind::Omp => "omp",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance_k1" => Ok(DecoderKind::DistanceK1),
            "distance" => Ok(DecoderKind::Distance),
            "ml" => Ok(DecoderKind::Ml),
            "omp" => Ok(DecoderKind::Omp),
            _ => Err(Error::config(format!(
                "unknown decoder '{s}' (expected distance_k1, distance, ml or omp)"
            ))),
        }
    }
}

/// Whether each trial sees a fresh matrix or one shared realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMode {
    #[default]
    Redraw,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub model: ModelConfig,
    pub signal: Activity,
    pub decoder: DecoderKind,
    /// Distance-decoder parameters; defaults derive from the noise levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DecoderParams>,
    pub seed: u64,
    #[serde(default)]
    pub matrix: MatrixMode,
    #[serde(default)]
    pub caps: WorkCaps,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        let md = &self.model;
        if md.m == 0 || md.n == 0 {
            return Err(Error::config(format!("need m >= 1 and n >= 1, got m={} n={}", md.m, md.n)));
        }
        if md.k == 0 || md.k > md.m {
            return Err(Error::config(format!("need 1 <= k <= m, got k={} m={}", md.k, md.m)));
        }
        if !(md.sigma_a2 > 0.0 && md.sigma_a2.is_finite()) {
            return Err(Error::config("sigma_a^2 must be positive"));
        }
        if !(md.sigma_z2 >= 0.0 && md.sigma_z2.is_finite()) {
            return Err(Error::config("sigma_z^2 must be nonnegative"));
        }
        self.signal.validate()?;
        if self.signal.k() != md.k {
            return Err(Error::config(format!(
                "signal model has k={} but the model config says k={}",
                self.signal.k(),
                md.k
            )));
        }
        match self.decoder {
            DecoderKind::DistanceK1 if md.k != 1 => {
                return Err(Error::config("distance_k1 decoder needs k = 1"));
            }
            DecoderKind::Distance if md.k < 2 => {
                return Err(Error::config("distance decoder needs k >= 2 (use distance_k1)"));
            }
            DecoderKind::Ml | DecoderKind::Omp if md.n < md.k => {
                return Err(Error::config(format!("{} needs n >= k", self.decoder.label())));
            }
            _ => {}
        }
        self.resolved_params()?;
        Ok(())
    }

    pub fn resolved_params(&self) -> Result<DecoderParams> {
        match self.params {
            Some(p) => {
                p.validate()?;
                Ok(p)
            }
            None if matches!(self.decoder, DecoderKind::Ml | DecoderKind::Omp) => {
                // unused by these decoders
                DecoderParams::new(1.0, 1.0, Default::default())
            }
            None => DecoderParams::defaults_for(self.model.sigma_a2, self.model.sigma_z2),
        }
    }

    fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.model.noise, self.model.sigma_z2)
    }
}

/// One drawn problem: `ys` has one entry per measurement vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: MeasurementMatrix,
    pub ys: Vec<Vec<f64>>,
    /// Sorted planted support.
    pub planted: Vec<usize>,
    pub values: Vec<SignalValues>,
}

impl Instance {
    pub fn y(&self) -> &[f64] {
        &self.ys[0]
    }
}

/// Draws trial `index` with `vectors` measurement vectors sharing one support.
pub fn draw_instance(cfg: &TrialConfig, index: u64, vectors: usize) -> Result<Instance> {
    let md = &cfg.model;
    let stream = SeedStream::new(cfg.seed);
    let mut rng = stream.rng(domain::TRIAL, index);
    let support = draw_support(md.m, md.k, &mut rng)?;
    let values: Vec<SignalValues> = (0..vectors).map(|_| cfg.signal.sample(&mut rng)).collect();
    let a = match cfg.matrix {
        MatrixMode::Redraw => draw_matrix(md.n, md.m, md.sigma_a2, &mut rng)?,
        MatrixMode::Fixed => draw_matrix(md.n, md.m, md.sigma_a2, &mut stream.rng(domain::FIXED_MATRIX, 0))?,
    };
    let noise = cfg.noise()?;
    let ys = values
        .iter()
        .map(|w| {
            let x = assemble_signal(w, &support, md.m)?;
            measure(&a, x.entries(), &noise, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance {
        a,
        ys,
        planted: support.sorted(),
        values,
    })
}

/// Runs the configured decoder on the first measurement vector.
pub fn decode_instance(cfg: &TrialConfig, inst: &Instance) -> Result<DecodeResult> {
    let md = &cfg.model;
    let params = cfg.resolved_params()?;
    let y = inst.y();
    match cfg.decoder {
        DecoderKind::DistanceK1 => distance_decode_k1(y, &inst.a, &params, md.sigma_a2, md.sigma_z2),
        DecoderKind::Distance => distance_decode(y, &inst.a, md.k, &params, md.sigma_a2, md.sigma_z2, &cfg.caps),
        DecoderKind::Ml => ml_decode(y, &inst.a, md.k, &cfg.caps),
        DecoderKind::Omp => omp_decode(y, &inst.a, md.k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    Success,
    Failure,
    /// The decoder declined to run (work cap); not a decoding error.
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: u64,
    pub outcome: TrialOutcome,
    pub planted: Vec<usize>,
    pub result: Option<DecodeResult>,
    pub refusal: Option<String>,
}

fn classify(index: u64, planted: Vec<usize>, res: Result<DecodeResult>) -> Result<TrialReport> {
    match res {
        Ok(r) => Ok(TrialReport {
            index,
            outcome: if r.recovers(&planted) {
                TrialOutcome::Success
            } else {
                TrialOutcome::Failure
            },
            planted,
            result: Some(r),
            refusal: None,
        }),
        Err(e @ Error::WorkCap { .. }) => Ok(TrialReport {
            index,
            outcome: TrialOutcome::Refused,
            planted,
            result: None,
            refusal: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

pub fn run_trial(cfg: &TrialConfig, index: u64) -> Result<TrialReport> {
    cfg.validate()?;
    run_trial_with(cfg, index, &|inst| decode_instance(cfg, inst))
}

/// Like [`run_trial`] with a caller-supplied decoder.
pub fn run_trial_with<D>(cfg: &TrialConfig, index: u64, decoder: &D) -> Result<TrialReport>
where
    D: Fn(&Instance) -> Result<DecodeResult> + Sync + ?Sized,
{
    let inst = draw_instance(cfg, index, 1)?;
    let res = decoder(&inst);
    classify(index, inst.planted, res)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// Error frequency over the trials that were actually decoded.
    pub pe: Proportion,
    pub successes: u64,
    pub failures: u64,
    pub refusals: u64,
}

impl ErrorEstimate {
    fn from_counts(successes: u64, failures: u64, refusals: u64) -> Result<Self> {
        let decoded = successes + failures;
        if decoded == 0 {
            return Err(Error::NoData { refusals });
        }
        Ok(Self {
            pe: Proportion::new(failures, decoded),
            successes,
            failures,
            refusals,
        })
    }

    pub fn trials(&self) -> u64 {
        self.successes + self.failures + self.refusals
    }
}

/// Runs `f` on a dedicated pool of `jobs` workers, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::config("--jobs must be at least 1")),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::config(format!("cannot start {j} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn estimate_error_prob(cfg: &TrialConfig, trials: u64) -> Result<ErrorEstimate> {
    cfg.validate()?;
    estimate_error_prob_with(cfg, trials, &|inst| decode_instance(cfg, inst))
}

pub fn estimate_error_prob_with<D>(cfg: &TrialConfig, trials: u64, decoder: &D) -> Result<ErrorEstimate>
where
    D: Fn(&Instance) -> Result<DecodeResult> + Sync + ?Sized,
{
    if trials == 0 {
        return Err(Error::config("need at least one trial"));
    }
    let reports = (0..trials)
        .into_par_iter()
        .map(|t| run_trial_with(cfg, t, decoder).map(|r| r.outcome))
        .collect::<Result<Vec<_>>>()?;
    tally(&reports)
}

fn tally(outcomes: &[TrialOutcome]) -> Result<ErrorEstimate> {
    let count = |o| outcomes.iter().filter(|&&x| x == o).count() as u64;
    ErrorEstimate::from_counts(
        count(TrialOutcome::Success),
        count(TrialOutcome::Failure),
        count(TrialOutcome::Refused),
    )
}

/// `t` measurement vectors per trial sharing one support, decoded jointly by
/// least squares over the summed residuals. The decoder field of `cfg` is
/// ignored. With `t = 1` each trial draws exactly what [`run_trial`] draws.
pub fn run_mmv_trial(t: usize, cfg: &TrialConfig, trials: u64) -> Result<ErrorEstimate> {
    if t == 0 {
        return Err(Error::config("MMV needs t >= 1"));
    }
    let ml_cfg = TrialConfig {
        decoder: DecoderKind::Ml,
        ..cfg.clone()
    };
    ml_cfg.validate()?;
    if trials == 0 {
        return Err(Error::config("need at least one trial"));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| {
            let inst = draw_instance(&ml_cfg, i, t)?;
            let res = ml_decode_multi(&inst.ys, &inst.a, ml_cfg.model.k, &ml_cfg.caps);
            classify(i, inst.planted, res).map(|r| r.outcome)
        })
        .collect::<Result<Vec<_>>>()?;
    tally(&outcomes)
}
