use serde::Serialize;
use suprec::experiments::with_jobs;
use suprec::rng::SeedStream;
use suprec::tail::{empirical_tail, tail_bound, TailQuery, UProfile};

use crate::error::{CliError, CliResult};
use crate::list::List;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value = "10,50,200")]
    n: List<usize>,
    /// Values of (alpha - beta) / gamma.
    #[arg(long, default_value = "1.5,2,4")]
    ratio: List<f64>,
    #[arg(long, default_value = "0.5,1,2")]
    sigma_v2: List<f64>,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Fixed gamma instead of the ratio list.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Standard errors of slack before a cell counts as a violation.
    #[arg(long, default_value_t = 3.0)]
    slack: f64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize)]
struct Cell {
    n: usize,
    gamma: f64,
    ratio: f64,
    sigma_v2: f64,
    profile: &'static str,
    bound: f64,
    empirical: f64,
    std_error: f64,
    pass: bool,
}

pub fn run(args: Args) -> CliResult<()> {
    let gammas: Vec<f64> = match args.gamma {
        Some(g) => vec![g],
        None => args.ratio.0.iter().map(|r| (args.alpha - args.beta) / r).collect(),
    };
    let mut queries = Vec::new();
    for &n in &args.n.0 {
        for &gamma in &gammas {
            for &sigma_v2 in &args.sigma_v2.0 {
                let q = TailQuery { n, alpha: args.alpha, beta: args.beta, gamma, sigma_v2 };
                q.validate()
                    .map_err(|e| CliError::usage(format!("invalid cell n={n} gamma={gamma} sigma_v2={sigma_v2}: {e}")))?;
                queries.push(q);
            }
        }
    }
    let master = SeedStream::new(args.seed);
    let cells = with_jobs(args.jobs, || {
        let mut out = Vec::new();
        for q in &queries {
            let bound = tail_bound(q)?;
            for profile in &UProfile::STANDARD {
                let i = out.len() as u64;
                let est = empirical_tail(q, profile, args.trials, master.derive(i))?;
                let se = est.std_error();
                out.push(Cell {
                    n: q.n,
                    gamma: q.gamma,
                    ratio: (q.alpha - q.beta) / q.gamma,
                    sigma_v2: q.sigma_v2,
                    profile: profile.name(),
                    bound,
                    empirical: est.estimate,
                    std_error: se,
                    pass: est.estimate <= bound + args.slack * se,
                });
            }
        }
        Ok::<_, suprec::Error>(out)
    })??;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&cells).expect("cells serialize"));
    } else {
        println!(
            "{:>5} {:>7} {:>8} {:>12} {:>12} {:>12} verdict",
            "n", "ratio", "sigma_v2", "profile", "bound", "empirical"
        );
        for c in &cells {
            println!(
                "{:>5} {:>7} {:>8} {:>12} {:>12} {:>12} {}",
                c.n,
                format!("{:.4}", c.ratio),
                c.sigma_v2,
                c.profile,
                format!("{:.4e}", c.bound),
                format!("{:.4e}", c.empirical),
                if c.pass { "pass" } else { "FAIL" }
            );
        }
    }
    let violations = cells.iter().filter(|c| !c.pass).count();
    eprintln!("{} cells, {violations} violations", cells.len());
    if violations > 0 {
        return Err(CliError::BoundViolation { violations, cells: cells.len() });
    }
    Ok(())
}
