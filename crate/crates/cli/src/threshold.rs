use serde::Serialize;
use suprec::signal::SignalValues;
use suprec::thresholds::{
    achievable_n, c_of_w, classify_regime, necessary_n_growing, sufficient_n_growing, RegimeTag,
};

use crate::error::{CliError, CliResult};
use crate::list::{one_based, one_based_set, List};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Nonzero signal values, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<List<f64>>,
    #[arg(long, default_value_t = 1.0)]
    sigma_a2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_z2: f64,
    /// Signal dimension.
    #[arg(long)]
    m: Option<usize>,
    /// Sparsity; defaults to the length of --w.
    #[arg(long)]
    k: Option<usize>,
    /// Smallest nonzero magnitude; defaults to min |w|.
    #[arg(long)]
    wmin: Option<f64>,
    /// Largest nonzero magnitude; defaults to max |w|.
    #[arg(long)]
    wmax: Option<f64>,
    /// Rate margin below c(w) for the achievable count.
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    /// Growth of m in k, e.g. "k^log k", "k^2" or "3k".
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize)]
struct Report {
    c_bits: Option<f64>,
    /// 1-based.
    subset: Option<Vec<usize>>,
    achievable_n: Option<u64>,
    sufficient_n: Option<u64>,
    necessary_n: Option<u64>,
    regime: Option<RegimeTag>,
}

pub fn run(args: Args) -> CliResult<()> {
    let w = args.w.map(|l| SignalValues::new(l.0)).transpose()?;
    let k = args.k.or(w.as_ref().map(SignalValues::k));
    if let (Some(k), Some(w)) = (args.k, &w) {
        if k != w.k() {
            return Err(CliError::usage(format!("--k {k} disagrees with {} values in --w", w.k())));
        }
    }
    let w_min = args.wmin.or(w.as_ref().map(SignalValues::w_min));
    let w_max = args.wmax.or(w.as_ref().map(SignalValues::w_max));

    let mut rep = Report {
        c_bits: None,
        subset: None,
        achievable_n: None,
        sufficient_n: None,
        necessary_n: None,
        regime: args.regime.as_deref().map(classify_regime),
    };
    if let Some(w) = &w {
        let c = c_of_w(w, args.sigma_a2, args.sigma_z2)?;
        if let Some(m) = args.m {
            rep.achievable_n = Some(achievable_n(m, c.bits, args.margin)?);
        }
        rep.c_bits = Some(c.bits);
        rep.subset = Some(c.argmin_subset);
    }
    if let (Some(m), Some(k)) = (args.m, k) {
        if let Some(lo) = w_min.filter(|_| k >= 2) {
            rep.sufficient_n = Some(sufficient_n_growing(m, k, lo, args.sigma_a2, args.sigma_z2)?);
        }
        if let Some(hi) = w_max.filter(|_| m > k) {
            rep.necessary_n = Some(necessary_n_growing(m, k, hi, args.sigma_a2, args.sigma_z2)?);
        }
    }
    if rep.c_bits.is_none() && rep.sufficient_n.is_none() && rep.necessary_n.is_none() && rep.regime.is_none() {
        return Err(CliError::usage(
            "nothing to compute: give --w, or --m with --k and --wmin/--wmax, or --regime",
        ));
    }

    if args.json {
        let out = Report {
            subset: rep.subset.as_deref().map(one_based),
            ..rep
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
        return Ok(());
    }
    if let (Some(c), Some(s)) = (rep.c_bits, &rep.subset) {
        println!("c(w) = {c:.5} bits per measurement");
        println!("achieving subset = {}", one_based_set(s));
    }
    if let Some(n) = rep.achievable_n {
        println!("achievable n = {n} (margin {})", args.margin);
    }
    if let Some(n) = rep.sufficient_n {
        println!("sufficient n = {n} (growing k, asymptotic guidance)");
    }
    if let Some(n) = rep.necessary_n {
        println!("necessary n > {n} (growing k, asymptotic guidance)");
    }
    match &rep.regime {
        Some(RegimeTag::Classified { label, sufficient_order, .. }) => {
            println!("regime = {label}, sufficient n of order {sufficient_order}");
        }
        Some(RegimeTag::Unclassified { spec }) => println!("regime = unclassified ({spec})"),
        None => {}
    }
    Ok(())
}
