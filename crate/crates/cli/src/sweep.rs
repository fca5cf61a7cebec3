use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use suprec::experiments::{sweep_phase_transition, with_jobs, SweepSpec};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "SUPREC_SEED";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Sweep spec JSON, or a manifest.json from an earlier run.
    spec: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Master seed; takes precedence over SUPREC_SEED and the file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Resolved spec, seed included; feeding this file back reproduces the CSV.
    pub config: SweepSpec,
    pub seed: u64,
    /// "flag", "env" or "file".
    pub seed_source: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
}

fn load_spec(path: &Path) -> CliResult<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::json(path, e))?;
    let spec = match value.get("config") {
        Some(cfg) if value.get("command").is_some() => cfg.clone(),
        _ => value,
    };
    serde_json::from_value(spec).map_err(|e| CliError::json(path, e))
}

fn resolve_seed(flag: Option<u64>, file_seed: u64) -> CliResult<(u64, &'static str)> {
    if let Some(s) = flag {
        return Ok((s, "flag"));
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| CliError::usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok((file_seed, "file")),
    }
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn run(args: Args) -> CliResult<()> {
    let mut spec = load_spec(&args.spec)?;
    let (seed, source) = resolve_seed(args.seed, spec.base.seed)?;
    spec.base.seed = seed;
    spec.base.validate()?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let result = with_jobs(args.jobs, || sweep_phase_transition(&spec))??;
    let csv_path = args.out.join("results.csv");
    write(&csv_path, &result.to_csv())?;

    let manifest = Manifest {
        command: "sweep".into(),
        config: spec,
        seed,
        seed_source: source.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        outputs: vec!["results.csv".into()],
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&args.out.join("manifest.json"), &(text + "\n"))?;

    for r in &result.rows {
        let pe = r.pe.map_or("NA".to_string(), |p| format!("{p:.4}"));
        println!(
            "m={} n={} rate={:.4} pe={pe} trials={} refused={}",
            r.m, r.n, r.rate_bits, r.trials, r.refusals
        );
    }
    println!("wrote {} rows to {}", result.rows.len(), csv_path.display());
    Ok(())
}
