//! Chernoff lower-tail bound for `S_n = (1/n) sum (u_i - V_i)^2` with
//! `V_i ~ N(0, sigma_v2)` and a deterministic sequence `u`.
//!
//! If `(1/n) sum u_i^2` lies in `(alpha - beta, alpha + beta)` then for every
//! `gamma` in `(0, alpha - beta)`:
//!
//! ```text
//! P(S_n <= gamma) <= 2^{-(n/2) log2((alpha - beta) / gamma)}
//! ```
//!
//! The exponent functions below work in natural logs; only the final bound is
//! expressed through powers of two.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{domain, SeedStream};
use crate::stats::Proportion;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma_v2: f64,
}

impl TailQuery {
    pub fn validate(&self) -> Result<()> {
        let Self { n, alpha, beta, gamma, sigma_v2 } = *self;
        if n == 0 {
            return Err(Error::config("tail query needs n >= 1"));
        }
        if !(beta > 0.0 && beta < alpha) {
            return Err(Error::config(format!("need 0 < beta < alpha, got beta={beta}, alpha={alpha}")));
        }
        if !(gamma > 0.0 && gamma < alpha - beta) {
            return Err(Error::config(format!(
                "need gamma in (0, alpha - beta) = (0, {}), got {gamma}",
                alpha - beta
            )));
        }
        if !(sigma_v2 > 0.0) {
            return Err(Error::config("sigma_v^2 must be positive"));
        }
        Ok(())
    }
}

/// `2^{-(n/2) log2((alpha - beta)/gamma)} = ((alpha - beta)/gamma)^{-n/2}`.
pub fn tail_bound(q: &TailQuery) -> Result<f64> {
    q.validate()?;
    let exponent = -(q.n as f64 / 2.0) * ((q.alpha - q.beta) / q.gamma).log2();
    Ok(exponent.exp2())
}

/// Closed-form maximizer of the Chernoff objective over `lambda < 0`:
/// `(2 gamma - theta - sqrt(theta^2 + 4 alpha_s gamma)) / (4 theta gamma)`.
pub fn minimizing_lambda(alpha_s: f64, theta: f64, gamma: f64) -> Result<f64> {
    if !(theta > 0.0 && gamma > 0.0 && alpha_s > 0.0) {
        return Err(Error::config(format!(
            "need alpha_s, theta, gamma > 0 (got {alpha_s}, {theta}, {gamma})"
        )));
    }
    let root = (theta * theta + 4.0 * alpha_s * gamma).sqrt();
    Ok((2.0 * gamma - theta - root) / (4.0 * theta * gamma))
}

/// Per-sample Chernoff objective `lambda gamma - lambda alpha_s / (1 - 2 lambda theta)
/// + (1/2) ln(1 - 2 lambda theta)`, natural log.
pub fn chernoff_objective(lambda: f64, alpha_s: f64, theta: f64, gamma: f64) -> f64 {
    let d = 1.0 - 2.0 * lambda * theta;
    lambda * gamma - lambda * alpha_s / d + 0.5 * d.ln()
}

/// Optimal exponent `Lambda(alpha_s, theta, gamma)` in nats, so that
/// `P(S_n <= gamma) <= exp(-n Lambda)`.
pub fn chernoff_exponent(alpha_s: f64, theta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < alpha_s) {
        return Err(Error::config(format!("need 0 < gamma < alpha_s, got gamma={gamma}, alpha_s={alpha_s}")));
    }
    let lambda = minimizing_lambda(alpha_s, theta, gamma)?;
    Ok(chernoff_objective(lambda, alpha_s, theta, gamma))
}

pub fn chernoff_exponent_bits(alpha_s: f64, theta: f64, gamma: f64) -> Result<f64> {
    Ok(chernoff_exponent(alpha_s, theta, gamma)? / std::f64::consts::LN_2)
}

/// Shapes of the deterministic sequence `u`, each scaled so that
/// `(1/n) sum u_i^2` equals the requested second moment exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UProfile {
    Constant,
    LinearRamp,
    Alternating,
    Explicit(Vec<f64>),
}

impl UProfile {
    pub const STANDARD: [UProfile; 3] = [UProfile::Constant, UProfile::LinearRamp, UProfile::Alternating];

    pub fn name(&self) -> &'static str {
        match self {
            UProfile::Constant => "constant",
            UProfile::LinearRamp => "linear_ramp",
            UProfile::Alternating => "alternating",
            UProfile::Explicit(_) => "explicit",
        }
    }

    pub fn generate(&self, n: usize, second_moment: f64) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            UProfile::Constant => vec![1.0; n],
            UProfile::LinearRamp => (1..=n).map(|i| i as f64).collect(),
            UProfile::Alternating => (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -2.0 }).collect(),
            UProfile::Explicit(u) => return u.clone(),
        };
        let ms = raw.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let scale = (second_moment / ms).sqrt();
        raw.into_iter().map(|v| v * scale).collect()
    }
}

pub fn second_moment(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>() / u.len() as f64
}

/// Monte Carlo frequency of `(1/n) sum (u_i - V_i)^2 <= gamma`.
///
/// Generated profiles are centred on `alpha`. The sequence is rejected if its
/// second moment falls outside the `(alpha - beta, alpha + beta)` window.
pub fn empirical_tail(q: &TailQuery, profile: &UProfile, trials: u64, seed: u64) -> Result<Proportion> {
    q.validate()?;
    if trials < 1_000 {
        return Err(Error::config(format!("empirical tail needs at least 1000 trials, got {trials}")));
    }
    let u = profile.generate(q.n, q.alpha);
    if u.len() != q.n {
        return Err(Error::config(format!("u has length {}, query has n={}", u.len(), q.n)));
    }
    let ms = second_moment(&u);
    if !(ms > q.alpha - q.beta && ms < q.alpha + q.beta) {
        return Err(Error::config(format!(
            "u has second moment {ms}, outside ({}, {})",
            q.alpha - q.beta,
            q.alpha + q.beta
        )));
    }
    Ok(tail_frequency(&u, q.gamma, q.sigma_v2, trials, seed))
}

/// Raw estimator behind [`empirical_tail`], without any window checks.
pub fn tail_frequency(u: &[f64], gamma: f64, sigma_v2: f64, trials: u64, seed: u64) -> Proportion {
    let sd = sigma_v2.sqrt();
    let limit = gamma * u.len() as f64;
    let stream = SeedStream::new(seed);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || stream.rng(domain::TAIL, 0),
            |rng, t| {
                rng.set_stream(t);
                rng.set_word_pos(0);
                let mut acc = 0.0;
                for &ui in u {
                    let v: f64 = StandardNormal.sample(rng);
                    let d = ui - sd * v;
                    acc += d * d;
                    // partial sums only grow
                    if acc > limit {
                        return 0u64;
                    }
                }
                1u64
            },
        )
        .sum();
    Proportion::new(hits, trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(n: usize, gap: f64, gamma: f64, sigma_v2: f64) -> TailQuery {
        // alpha - beta = gap, beta a tenth of alpha
        let alpha = gap / 0.9;
        TailQuery { n, alpha, beta: alpha - gap, gamma, sigma_v2 }
    }

    #[test]
    fn bound_values() {
        let q = query(20, 2.0, 1.0, 1.0);
        let b = tail_bound(&q).unwrap();
        assert!((b - 2f64.powi(-10)).abs() < 1e-18);
        assert!((b - 9.7656e-4).abs() < 1e-8);

        let q40 = TailQuery { n: 40, ..q };
        assert!((tail_bound(&q40).unwrap() - b * b).abs() < 1e-20);

        let near = query(20, 2.0, 2.0 - 1e-12, 1.0);
        assert!((tail_bound(&near).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bound_rejects_bad_queries() {
        assert!(tail_bound(&query(10, 2.0, 2.0, 1.0)).is_err());
        assert!(tail_bound(&query(10, 2.0, 3.0, 1.0)).is_err());
        assert!(tail_bound(&query(0, 2.0, 1.0, 1.0)).is_err());
        assert!(tail_bound(&query(10, 2.0, 1.0, 0.0)).is_err());
        let neg_beta = TailQuery { n: 5, alpha: 2.0, beta: -0.1, gamma: 1.0, sigma_v2: 1.0 };
        assert!(tail_bound(&neg_beta).is_err());
    }

    #[test]
    fn bound_monotone() {
        let mut prev = f64::INFINITY;
        for n in [1, 2, 5, 10, 50, 200] {
            let b = tail_bound(&query(n, 2.0, 1.0, 1.0)).unwrap();
            assert!(b < prev);
            prev = b;
        }
        let mut prev = f64::INFINITY;
        for ratio in [1.1, 1.5, 2.0, 4.0, 10.0] {
            let b = tail_bound(&query(10, ratio, 1.0, 1.0)).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn lambda_closed_form() {
        assert!((minimizing_lambda(2.0, 1.0, 1.0).unwrap() + 0.5).abs() < 1e-15);
        for (a, t, g) in [(2.0, 1.0, 1.0), (3.0, 0.2, 0.5), (1.5, 7.0, 1.2)] {
            assert!(minimizing_lambda(a, t, g).unwrap() < 0.0);
        }
        // large-theta limit is -1/(2 gamma)
        let l = minimizing_lambda(2.0, 1e8, 0.5).unwrap();
        assert!((l + 1.0).abs() < 1e-6, "{l}");
        assert!(minimizing_lambda(2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn exponent_at_optimal_theta() {
        for (a, g) in [(2.0, 1.0), (5.0, 0.3), (1.01, 1.0)] {
            let lam = chernoff_exponent(a, a - g, g).unwrap();
            assert!((lam - 0.5 * (a / g).ln()).abs() < 1e-12, "a={a} g={g}: {lam}");
        }
        assert!(chernoff_exponent(1.0, 1.0, 1.0).is_err());
        // no gap at the optimal noise level; at other levels lambda = 0 is
        // still feasible, so the exponent stays nonnegative
        assert!(chernoff_exponent(1.0 + 1e-9, 1e-9, 1.0).unwrap().abs() < 1e-8);
        assert!(chernoff_exponent(1.0 + 1e-9, 0.7, 1.0).unwrap() > 0.0);
        assert!((chernoff_exponent_bits(2.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
    }

    /// Rearranged closed form of the optimal exponent (second algebraic route).
    fn exponent_rearranged(a: f64, t: f64, g: f64) -> f64 {
        let r = (t * t + 4.0 * a * g).sqrt();
        (a + g) / (2.0 * t) - 0.5 - 2.0 * a * g / (t * (t + r)) + 0.5 * ((t + r) / (2.0 * g)).ln()
    }

    #[test]
    fn exponent_agrees_with_rearranged_closed_form() {
        for a in [1.2, 2.0, 5.0] {
            for g in [0.1, 0.5, 1.0] {
                for t in [0.05, 0.5, 1.0, 3.0, 20.0] {
                    if g >= a {
                        continue;
                    }
                    let direct = chernoff_exponent(a, t, g).unwrap();
                    let other = exponent_rearranged(a, t, g);
                    assert!((direct - other).abs() < 1e-10 * other.abs().max(1.0), "{a} {t} {g}");
                }
            }
        }
    }

    #[test]
    fn exponent_is_max_over_lambda() {
        // golden-section search on lambda < 0 as the oracle
        for (a, t, g) in [(2.0, 1.0, 1.0), (3.0, 0.4, 0.8), (1.5, 4.0, 0.2)] {
            let f = |l: f64| chernoff_objective(l, a, t, g);
            let (mut lo, mut hi) = (-50.0f64, 0.0f64);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..300 {
                let x1 = hi - phi * (hi - lo);
                let x2 = lo + phi * (hi - lo);
                if f(x1) < f(x2) {
                    lo = x1;
                } else {
                    hi = x2;
                }
            }
            let lam_star = minimizing_lambda(a, t, g).unwrap();
            assert!((0.5 * (lo + hi) - lam_star).abs() < 1e-6);
            assert!((f(0.5 * (lo + hi)) - chernoff_exponent(a, t, g).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn theta_sweep_minimum_at_gap() {
        let (a, g) = (2.0, 1.0);
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=10_000 {
            let t = i as f64 * 1e-3;
            let v = chernoff_exponent(a, t, g).unwrap();
            if v < best.0 {
                best = (v, t);
            }
        }
        assert!((best.1 - 1.0).abs() < 2e-3, "argmin theta {}", best.1);
        assert!((best.0 - 0.5 * 2f64.ln()).abs() < 1e-6);
    }

    /// `g(lambda) = -n lambda gamma + lambda sum u^2 / (1 - 2 theta lambda) - (n/2) ln(1 - 2 theta lambda)`
    fn g_of_lambda(lambda: f64, n: f64, alpha_s: f64, theta: f64, gamma: f64) -> f64 {
        let d = 1.0 - 2.0 * theta * lambda;
        -n * lambda * gamma + lambda * n * alpha_s / d - 0.5 * n * d.ln()
    }

    #[test]
    fn stationarity_of_lambda_star() {
        for n in [1.0, 10.0, 100.0] {
            for a in [1.1, 2.0, 6.0] {
                for t in [0.1, 1.0, 5.0] {
                    for g in [0.2, 0.9] {
                        let l = minimizing_lambda(a, t, g).unwrap();
                        // step well inside the distance to the pole at 1/(2 theta)
                        let h = 1e-3 * (l.abs() + 1.0 / (2.0 * t)).min(1.0);
                        let f = |x: f64| g_of_lambda(x, n, a, t, g);
                        let d = (f(l - 2.0 * h) - 8.0 * f(l - h) + 8.0 * f(l + h) - f(l + 2.0 * h)) / (12.0 * h);
                        assert!(d.abs() < 1e-8 * n, "n={n} a={a} t={t} g={g}: g'(lambda*) = {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn exponent_optimal_over_theta_grid() {
        for (a, g) in [(2.0, 1.0), (4.0, 0.5), (1.3, 1.2)] {
            let floor = chernoff_exponent(a, a - g, g).unwrap();
            for i in 1..=400 {
                let t = i as f64 * 0.025;
                assert!(chernoff_exponent(a, t, g).unwrap() >= floor - 1e-13);
            }
        }
    }

    #[test]
    fn profiles_hit_second_moment() {
        for p in UProfile::STANDARD {
            for n in [1, 2, 7, 50] {
                let u = p.generate(n, 3.5);
                assert!((second_moment(&u) - 3.5).abs() < 1e-12, "{p:?} n={n}");
            }
        }
    }

    #[test]
    fn empirical_tail_cases() {
        let q = query(50, 2.0, 1.0, 0.5);
        let bound = tail_bound(&q).unwrap();
        let est = empirical_tail(&q, &UProfile::Constant, 20_000, 3).unwrap();
        assert!(est.estimate <= bound + 3.0 * est.std_error());

        // deterministic gap: sigma_v -> 0 and u^2 mean above gamma
        let gap = TailQuery { n: 30, alpha: 2.0, beta: 0.5, gamma: 1.0, sigma_v2: 1e-12 };
        assert_eq!(empirical_tail(&gap, &UProfile::Alternating, 2_000, 4).unwrap().hits, 0);

        let bad = UProfile::Explicit(vec![5.0; 30]);
        let err = empirical_tail(&gap, &bad, 2_000, 4).unwrap_err();
        assert!(err.to_string().contains("second moment 25"), "{err}");
        assert!(empirical_tail(&gap, &UProfile::Constant, 10, 4).is_err());
    }

    #[test]
    fn vacuous_regime() {
        // gamma far above E[S_n] = mean(u^2) + sigma_v^2: the event is almost
        // sure, and the bound formula evaluated there exceeds 1
        let u = UProfile::Constant.generate(40, 1.0);
        let gamma = 1.0 + 10.0 * 0.5;
        let est = tail_frequency(&u, gamma, 0.5, 5_000, 6);
        assert!(est.estimate > 0.999, "{}", est.estimate);
        let formula = (-(40.0 / 2.0) * (0.9f64 / gamma).log2()).exp2();
        assert!(formula > 1.0);
    }

    #[test]
    fn empirical_tail_deterministic() {
        let q = query(10, 1.5, 1.0, 2.0);
        let a = empirical_tail(&q, &UProfile::LinearRamp, 5_000, 77).unwrap();
        let b = empirical_tail(&q, &UProfile::LinearRamp, 5_000, 77).unwrap();
        assert_eq!(a, b);
    }
}
