//! Rate threshold `c(w)` and the sample-complexity formulas derived from it.
//!
//! All logarithms are base 2, so rates are in bits per measurement.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{domain, SeedStream};
use crate::signal::SignalValues;
use crate::stats::Proportion;
use crate::{Error, Result};

/// Largest `k` for which `c(w)` is computed by full subset enumeration.
pub const MAX_EXACT_K: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateThreshold {
    /// `c(w)` in bits per measurement.
    pub bits: f64,
    /// Minimizing subset, 0-based and ascending.
    pub argmin_subset: Vec<usize>,
}

fn check_sigmas(sigma_a2: f64, sigma_z2: f64) -> Result<()> {
    if !(sigma_a2 > 0.0 && sigma_z2 > 0.0) || !sigma_a2.is_finite() || !sigma_z2.is_finite() {
        return Err(Error::config(format!(
            "sigma_a^2 ({sigma_a2}) and sigma_z^2 ({sigma_z2}) must be positive and finite"
        )));
    }
    Ok(())
}

/// Exact `c(w) = min_T (1 / 2|T|) log2(1 + (sigma_a2 / sigma_z2) sum_{j in T} w_j^2)`
/// over all nonempty `T`. Ties go to the lexicographically smallest subset.
pub fn c_of_w(w: &SignalValues, sigma_a2: f64, sigma_z2: f64) -> Result<RateThreshold> {
    check_sigmas(sigma_a2, sigma_z2)?;
    let k = w.k();
    if k > MAX_EXACT_K {
        return Err(Error::config(format!(
            "c(w) enumerates 2^k - 1 subsets; k={k} exceeds the limit of {MAX_EXACT_K}"
        )));
    }
    let snr = sigma_a2 / sigma_z2;
    let sq: Vec<f64> = w.as_slice().iter().map(|v| v * v).collect();

    let mut best_bits = f64::INFINITY;
    let mut best_mask = 0u32;
    for mask in 1u32..(1u32 << k) {
        let energy: f64 = (0..k).filter(|j| mask >> j & 1 == 1).map(|j| sq[j]).sum();
        let size = mask.count_ones() as f64;
        let bits = (snr * energy).ln_1p() / std::f64::consts::LN_2 / (2.0 * size);
        if bits < best_bits || (bits == best_bits && lex_less(mask, best_mask, k)) {
            best_bits = bits;
            best_mask = mask;
        }
    }
    Ok(RateThreshold {
        bits: best_bits,
        argmin_subset: mask_members(best_mask, k),
    })
}

fn mask_members(mask: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|j| mask >> j & 1 == 1).collect()
}

fn lex_less(a: u32, b: u32, k: usize) -> bool {
    mask_members(a, k) < mask_members(b, k)
}

/// Ceiling that ignores round-off just above an integer.
pub(crate) fn ceil_count(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

pub(crate) fn floor_count(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest as u64
    } else {
        x.floor().max(0.0) as u64
    }
}

/// `ceil(log2 m / (c - margin))`: measurements sufficient at rate margin
/// `margin` below the threshold `c`. `margin = 0` gives the boundary count.
pub fn achievable_n(m: usize, c_bits: f64, margin: f64) -> Result<u64> {
    if m < 2 {
        return Err(Error::config("achievable n needs m >= 2"));
    }
    if !(margin >= 0.0 && margin < c_bits) {
        return Err(Error::config(format!(
            "rate margin {margin} must lie in [0, c(w) = {c_bits})"
        )));
    }
    Ok(ceil_count((m as f64).log2() / (c_bits - margin)))
}

/// Growing-`k` sufficient count:
/// `ceil(max_j (6 k log2 k + 2 j log2 m) / log2(j w_min^2 sigma_a2 / sigma_z2 + 1))`.
pub fn sufficient_n_growing(m: usize, k: usize, w_min: f64, sigma_a2: f64, sigma_z2: f64) -> Result<u64> {
    check_sigmas(sigma_a2, sigma_z2)?;
    if k < 2 {
        return Err(Error::config(
            "growing-k sufficient condition needs k >= 2 (log k > 0); use achievable_n for k = 1",
        ));
    }
    if m < k {
        return Err(Error::config(format!("m={m} must be at least k={k}")));
    }
    if !(w_min > 0.0) {
        return Err(Error::config("w_min must be positive"));
    }
    let kf = k as f64;
    let log_m = (m as f64).log2();
    let snr = w_min * w_min * sigma_a2 / sigma_z2;
    let worst = (1..=k)
        .map(|j| {
            let jf = j as f64;
            (6.0 * kf * kf.log2() + 2.0 * jf * log_m) / (jf * snr).ln_1p() * std::f64::consts::LN_2
        })
        .fold(0.0, f64::max);
    Ok(ceil_count(worst))
}

/// Growing-`k` necessary count `floor(2 k log2(m/k) / log2(2 k w_max^2 sigma_a2 / sigma_z2 + 1))`.
/// Any `n` at or below it is insufficient in the asymptotic sense.
pub fn necessary_n_growing(m: usize, k: usize, w_max: f64, sigma_a2: f64, sigma_z2: f64) -> Result<u64> {
    check_sigmas(sigma_a2, sigma_z2)?;
    if k == 0 || m <= k {
        return Err(Error::config(format!("necessary n needs m > k >= 1 (m={m}, k={k})")));
    }
    if !(w_max > 0.0) {
        return Err(Error::config("w_max must be positive"));
    }
    let kf = k as f64;
    let numer = 2.0 * kf * (m as f64 / kf).log2();
    let denom = (2.0 * kf * w_max * w_max * sigma_a2 / sigma_z2).ln_1p() / std::f64::consts::LN_2;
    Ok(floor_count(numer / denom))
}

/// Scaling regimes of `m` against `k` for the growing-`k` sufficient order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `m = k^Omega(log k)`
    MPolyInK,
    /// `e^omega(log k) <= m <= k^o(log k)`
    Mid,
    /// `omega(k) <= m <= e^Theta(log k)`
    Low,
    /// `m = Theta(k)`
    Linear,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::MPolyInK => "m_poly_in_k",
            Regime::Mid => "mid",
            Regime::Low => "low",
            Regime::Linear => "linear",
        }
    }

    pub fn sufficient_order(self) -> &'static str {
        match self {
            Regime::MPolyInK => "k·log m / log k",
            Regime::Mid => "k·log k",
            Regime::Low | Regime::Linear => "k·log m",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RegimeTag {
    Classified {
        regime: Regime,
        label: String,
        sufficient_order: String,
    },
    Unclassified {
        spec: String,
    },
}

/// Classifies a symbolic growth relation of `m` in terms of `k`.
///
/// Recognized forms (whitespace, braces and parentheses are ignored):
/// `k^log k`, `k^loglog k`, `k^c` for a numeric exponent `c > 1`, `k`, `c*k`
/// or `theta(k)`, and the four regime labels themselves. Anything else is
/// reported as unclassified.
pub fn classify_regime(spec: &str) -> RegimeTag {
    let norm: String = spec
        .chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '{' | '}'))
        .collect::<String>()
        .to_ascii_lowercase();
    let norm = norm.strip_prefix("m=").unwrap_or(&norm);

    let regime = match norm {
        "m_poly_in_k" | "k^logk" | "k^lnk" => Some(Regime::MPolyInK),
        "mid" | "k^loglogk" | "k^lnlnk" => Some(Regime::Mid),
        "low" => Some(Regime::Low),
        "linear" | "k" | "thetak" | "Θk" => Some(Regime::Linear),
        other => parse_power(other).or_else(|| parse_linear(other)),
    };
    match regime {
        Some(r) => RegimeTag::Classified {
            regime: r,
            label: r.label().to_string(),
            sufficient_order: r.sufficient_order().to_string(),
        },
        None => RegimeTag::Unclassified {
            spec: spec.to_string(),
        },
    }
}

fn parse_power(s: &str) -> Option<Regime> {
    let exp: f64 = s.strip_prefix("k^")?.parse().ok()?;
    (exp > 1.0 && exp.is_finite()).then_some(Regime::Low)
}

fn parse_linear(s: &str) -> Option<Regime> {
    let coef = s.strip_suffix("*k").or_else(|| s.strip_suffix('k'))?;
    let c: f64 = coef.parse().ok()?;
    (c >= 1.0 && c.is_finite()).then_some(Regime::Linear)
}

/// Distribution of the nonzero values `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activity {
    /// Always the same vector.
    Fixed { w: Vec<f64> },
    /// `k` i.i.d. coordinates uniform on `[lo, hi]`.
    Uniform { k: usize, lo: f64, hi: f64 },
    /// `k` i.i.d. Gaussian coordinates. Unbounded, so refused wherever a
    /// bounded activity is required.
    Gaussian { k: usize, mean: f64, sd: f64 },
}

impl Activity {
    pub fn k(&self) -> usize {
        match self {
            Activity::Fixed { w } => w.len(),
            Activity::Uniform { k, .. } | Activity::Gaussian { k, .. } => *k,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Activity::Gaussian { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.k() == 0 {
            return Err(Error::config("activity must have k >= 1"));
        }
        match self {
            Activity::Fixed { w } => SignalValues::new(w.clone()).map(|_| ()),
            Activity::Uniform { lo, hi, .. } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::config(format!("uniform activity needs lo < hi, got [{lo}, {hi}]")));
                }
                Ok(())
            }
            Activity::Gaussian { sd, .. } => {
                if !(*sd > 0.0) {
                    return Err(Error::config("gaussian activity needs sd > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn require_bounded(&self) -> Result<()> {
        self.validate()?;
        if !self.is_bounded() {
            return Err(Error::config(
                "activity has unbounded support; the outage bound requires bounded support",
            ));
        }
        Ok(())
    }

    /// Draws one value vector. Exact zeros are redrawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SignalValues {
        let w = match self {
            Activity::Fixed { w } => w.clone(),
            Activity::Uniform { k, lo, hi } => (0..*k)
                .map(|_| loop {
                    let v = rng.random_range(*lo..=*hi);
                    if v != 0.0 {
                        break v;
                    }
                })
                .collect(),
            Activity::Gaussian { k, mean, sd } => (0..*k)
                .map(|_| loop {
                    let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                    let v = mean + sd * z;
                    if v != 0.0 {
                        break v;
                    }
                })
                .collect(),
        };
        SignalValues::new(w).expect("activity samples are nonzero and finite")
    }
}

/// Monte Carlo estimate of `P{c(W) <= r}` with a Wilson interval.
pub fn outage_probability(
    activity: &Activity,
    rate_bits: f64,
    sigma_a2: f64,
    sigma_z2: f64,
    trials: u64,
    seed: u64,
) -> Result<Proportion> {
    activity.require_bounded()?;
    check_sigmas(sigma_a2, sigma_z2)?;
    if trials == 0 {
        return Err(Error::config("outage probability needs at least one trial"));
    }
    if activity.k() > MAX_EXACT_K {
        return Err(Error::config(format!("activity k={} exceeds {MAX_EXACT_K}", activity.k())));
    }
    let stream = SeedStream::new(seed);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let w = activity.sample(&mut stream.rng(domain::ACTIVITY, t));
            let c = c_of_w(&w, sigma_a2, sigma_z2).expect("validated inputs");
            u64::from(c.bits <= rate_bits)
        })
        .sum();
    Ok(Proportion::new(hits, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: &[f64]) -> SignalValues {
        SignalValues::new(v.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_thresholds() {
        let c1 = c_of_w(&w(&[1.0]), 1.0, 1.0).unwrap();
        assert!((c1.bits - 0.5).abs() < 1e-15);
        assert_eq!(c1.argmin_subset, vec![0]);

        let c2 = c_of_w(&w(&[1.0, 1.0]), 1.0, 1.0).unwrap();
        assert!((c2.bits - 0.25 * 3f64.log2()).abs() < 1e-15);
        assert!((c2.bits - 0.39624).abs() < 1e-5);
        assert_eq!(c2.argmin_subset, vec![0, 1]);

        // singles: 0.5 log2(1 + 1e4) = 6.64, pair: 0.25 log2(1 + 2e4) = 3.57
        let big = c_of_w(&w(&[100.0, 100.0]), 1.0, 1.0).unwrap();
        assert_eq!(big.argmin_subset, vec![0, 1]);
        assert!((big.bits - 0.25 * 20_001f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn weakest_single_wins_when_unbalanced() {
        // 0.5 log2(1.01) = 0.00718 beats the pair term 0.25 log2(101.01) = 1.66
        let c = c_of_w(&w(&[10.0, 0.1]), 1.0, 1.0).unwrap();
        assert_eq!(c.argmin_subset, vec![1]);
        assert!((c.bits - 0.5 * 1.01f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn tie_break_is_lexicographic() {
        // snr 3, w = (1, 2): {0} gives 0.5 log2(4) = 1 and {0,1} gives
        // 0.25 log2(16) = 1, and both beat {1}
        let c = c_of_w(&w(&[1.0, 2.0]), 3.0, 1.0).unwrap();
        assert_eq!(c.bits, 1.0);
        assert_eq!(c.argmin_subset, vec![0]);
        assert!(lex_less(0b01, 0b11, 2) && lex_less(0b11, 0b10, 2));
    }

    #[test]
    fn refuses_large_k_and_bad_sigmas() {
        assert!(c_of_w(&w(&[1.0; 25]), 1.0, 1.0).is_err());
        assert!(c_of_w(&w(&[1.0]), 0.0, 1.0).is_err());
        assert!(c_of_w(&w(&[1.0]), 1.0, -1.0).is_err());
    }

    #[test]
    fn achievable_counts() {
        assert_eq!(achievable_n(2, 0.5, 0.0).unwrap(), 2);
        let c2 = c_of_w(&w(&[1.0, 1.0]), 1.0, 1.0).unwrap().bits;
        assert_eq!(achievable_n(4096, c2, 0.04624).unwrap(), 35);
        assert_eq!(achievable_n(4096, 0.5, 0.1).unwrap(), 30);
        assert!(achievable_n(4096, 0.5, 0.5).is_err());
        assert!(achievable_n(1, 0.5, 0.1).is_err());
    }

    /// Second, loop-free evaluation of the growing-k expression used as an oracle.
    fn growing_oracle(m: f64, k: f64, w_min: f64) -> f64 {
        let t1 = (6.0 * k * k.log2() + 2.0 * m.log2()) / (w_min * w_min + 1.0).log2();
        let t2 = (6.0 * k * k.log2() + 4.0 * m.log2()) / (2.0 * w_min * w_min + 1.0).log2();
        t1.max(t2)
    }

    #[test]
    fn growing_k_sufficient() {
        let o = growing_oracle(100.0, 2.0, 1.0);
        assert!((o - 25.288).abs() < 1e-3);
        assert_eq!(sufficient_n_growing(100, 2, 1.0, 1.0, 1.0).unwrap(), 26);
        assert_eq!(sufficient_n_growing(100, 2, 1.0, 1.0, 1.0).unwrap(), o.ceil() as u64);

        let small = sufficient_n_growing(100, 2, 1e6, 1.0, 1.0).unwrap();
        assert!(small <= 2, "huge w_min should drive the count to ~0, got {small}");

        let mut prev = 0;
        for m in [2usize, 10, 100, 1_000, 10_000, 100_000, 1_000_000] {
            let n = sufficient_n_growing(m, 2, 1.0, 1.0, 1.0).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        assert!(sufficient_n_growing(100, 1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn growing_k_necessary() {
        // m = 2k: numerator is exactly 2k bits
        let k = 3usize;
        let expect = (2.0 * 3.0 / (6.0f64 + 1.0).log2()).floor() as u64;
        assert_eq!(necessary_n_growing(2 * k, k, 1.0, 1.0, 1.0).unwrap(), expect);

        assert_eq!(necessary_n_growing(4096, 2, 1.0, 1.0, 1.0).unwrap(), 18);
        assert_eq!(necessary_n_growing(4096, 2, 1e9, 1.0, 1.0).unwrap(), 0);
        assert!(necessary_n_growing(2, 2, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn necessary_not_above_achievable_for_single_entry() {
        for m in [4usize, 64, 1024, 1 << 16] {
            for wv in [0.3, 1.0, 2.0, 10.0] {
                let c = c_of_w(&w(&[wv]), 1.0, 1.0).unwrap().bits;
                let ach = achievable_n(m, c, 0.0).unwrap();
                let nec = necessary_n_growing(m, 1, wv, 1.0, 1.0).unwrap();
                assert!(nec <= ach, "m={m} w={wv}: necessary {nec} > achievable {ach}");
            }
        }
    }

    #[test]
    fn regimes() {
        let order = |s: &str| match classify_regime(s) {
            RegimeTag::Classified { sufficient_order, .. } => sufficient_order,
            RegimeTag::Unclassified { .. } => "unclassified".into(),
        };
        assert_eq!(order("k^{log k}"), "k·log m / log k");
        assert_eq!(order("m = k^(log log k)"), "k·log k");
        assert_eq!(order("k^2"), "k·log m");
        assert_eq!(order("3k"), "k·log m");
        assert_eq!(order("linear"), "k·log m");
        assert!(matches!(classify_regime("2^k"), RegimeTag::Unclassified { .. }));
        assert!(matches!(classify_regime("k^0.5"), RegimeTag::Unclassified { .. }));
    }

    #[test]
    fn outage_degenerate_cases() {
        let fixed = Activity::Fixed { w: vec![1.0] };
        assert_eq!(outage_probability(&fixed, 0.4, 1.0, 1.0, 200, 1).unwrap().estimate, 0.0);
        assert_eq!(outage_probability(&fixed, 0.6, 1.0, 1.0, 200, 1).unwrap().estimate, 1.0);
        let gauss = Activity::Gaussian { k: 1, mean: 0.0, sd: 1.0 };
        assert!(outage_probability(&gauss, 0.4, 1.0, 1.0, 10, 1).is_err());
    }

    /// Composite Simpson integral of the uniform density over {w : c(w) <= r}.
    fn outage_quadrature(lo: f64, hi: f64, r: f64) -> f64 {
        let steps = 20_000;
        let h = (hi - lo) / steps as f64;
        let f = |x: f64| if 0.5 * (1.0 + x * x).log2() <= r { 1.0 / (hi - lo) } else { 0.0 };
        let mut acc = f(lo) + f(hi);
        for i in 1..steps {
            acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn outage_matches_quadrature() {
        let q = outage_quadrature(0.5, 1.5, 0.3);
        // indicator integral is exact up to the step hitting the boundary
        let closed = ((2f64.powf(0.6) - 1.0).sqrt() - 0.5) / 1.0;
        assert!((q - closed).abs() < 1e-3, "{q} vs {closed}");
        let act = Activity::Uniform { k: 1, lo: 0.5, hi: 1.5 };
        let est = outage_probability(&act, 0.3, 1.0, 1.0, 100_000, 9).unwrap();
        let se = (q * (1.0 - q) / 1e5).sqrt();
        assert!((est.estimate - q).abs() < 4.0 * se + 1e-3, "{} vs {q}", est.estimate);
        assert!(est.ci_lo <= q && q <= est.ci_hi);
    }

    proptest! {
        #[test]
        fn invariances(ws in prop::collection::vec(0.05f64..5.0, 1..7), signs in any::<u8>(), rot in 0usize..7, lambda in 0.01f64..100.0) {
            let base = c_of_w(&w(&ws), 1.3, 0.7).unwrap().bits;

            let flipped: Vec<f64> = ws.iter().enumerate().map(|(i, v)| if signs >> (i % 8) & 1 == 1 { -v } else { *v }).collect();
            prop_assert_eq!(c_of_w(&w(&flipped), 1.3, 0.7).unwrap().bits, base);

            let mut perm = ws.clone();
            perm.rotate_left(rot % ws.len());
            let pb = c_of_w(&w(&perm), 1.3, 0.7).unwrap().bits;
            prop_assert!((pb - base).abs() <= 1e-15 * base.max(1.0));

            let scaled = c_of_w(&w(&ws), 1.3 * lambda, 0.7 * lambda).unwrap().bits;
            prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1.0));

            for v in &ws {
                prop_assert!(base <= 0.5 * (1.0 + 1.3 * v * v / 0.7).log2() + 1e-15);
            }
        }

        #[test]
        fn monotone_in_each_coordinate(ws in prop::collection::vec(0.05f64..5.0, 1..7), j in 0usize..7, bump in 0.0f64..3.0) {
            let j = j % ws.len();
            let base = c_of_w(&w(&ws), 1.0, 1.0).unwrap().bits;
            let mut up = ws.clone();
            up[j] += bump;
            prop_assert!(c_of_w(&w(&up), 1.0, 1.0).unwrap().bits >= base - 1e-15);
        }
    }
}
