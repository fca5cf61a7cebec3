use serde::Serialize;
use suprec::decoders::WorkCaps;
use suprec::experiments::{run_outage_experiment, with_jobs, DecoderKind, MatrixMode, ModelConfig, TrialConfig};
use suprec::signal::NoiseKind;
use suprec::stats::Proportion;
use suprec::thresholds::Activity;

use crate::error::{CliError, CliResult};
use crate::list::List;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ActivityKind {
    Uniform,
    Fixed,
    Gaussian,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, default_value = "uniform")]
    activity: ActivityKind,
    /// Number of nonzeros for random activities.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    lo: f64,
    #[arg(long, default_value_t = 1.5)]
    hi: f64,
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    /// Values for --activity fixed.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<List<f64>>,
    /// Rate in bits per measurement; n = ceil(log2 m / rate).
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 4096)]
    m: usize,
    #[arg(long, default_value_t = 500)]
    trials: u64,
    #[arg(long, default_value = "ml")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 1.0)]
    sigma_a2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_z2: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize)]
struct Report {
    m: usize,
    n: usize,
    rate_bits: f64,
    decoder: &'static str,
    failure: Proportion,
    refusals: u64,
    bound: f64,
    gap: f64,
}

fn activity(args: &Args) -> CliResult<Activity> {
    let act = match args.activity {
        ActivityKind::Uniform => Activity::Uniform { k: args.k, lo: args.lo, hi: args.hi },
        ActivityKind::Gaussian => Activity::Gaussian { k: args.k, mean: args.mean, sd: args.sd },
        ActivityKind::Fixed => {
            let w = args.w.as_ref().ok_or_else(|| CliError::usage("--activity fixed needs --w"))?;
            Activity::Fixed { w: w.0.clone() }
        }
    };
    act.validate()?;
    Ok(act)
}

pub fn run(args: Args) -> CliResult<()> {
    let act = activity(&args)?;
    let template = TrialConfig {
        model: ModelConfig {
            m: args.m,
            n: 1,
            k: act.k(),
            sigma_a2: args.sigma_a2,
            sigma_z2: args.sigma_z2,
            noise: NoiseKind::Gaussian,
        },
        signal: act.clone(),
        decoder: args.decoder,
        params: None,
        seed: args.seed,
        matrix: MatrixMode::Redraw,
        caps: WorkCaps::default(),
    };
    let rep = with_jobs(args.jobs, || run_outage_experiment(&act, &template, args.rate, args.trials))??;
    let out = Report {
        m: rep.m,
        n: rep.n,
        rate_bits: rep.rate_bits,
        decoder: args.decoder.label(),
        failure: rep.failure.pe,
        refusals: rep.failure.refusals,
        bound: rep.outage.estimate,
        gap: rep.gap(),
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
        return Ok(());
    }
    println!("m = {}, n = {}, rate = {} bits, decoder = {}", out.m, out.n, out.rate_bits, out.decoder);
    println!(
        "failure = {:.4} [{:.4}, {:.4}] over {} decoded trials ({} refused)",
        out.failure.estimate, out.failure.ci_lo, out.failure.ci_hi, out.failure.trials, out.refusals
    );
    println!("bound = {:.4} (fraction of drawn W with c(W) <= rate)", out.bound);
    println!("gap = {:+.4}", out.gap);
    Ok(())
}
