//! Binomial proportion estimates with Wilson score intervals.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Self {
        assert!(trials > 0, "proportion over zero trials");
        assert!(hits <= trials);
        let (ci_lo, ci_hi) = wilson_interval(hits, trials, Z95);
        Self {
            hits,
            trials,
            estimate: hits as f64 / trials as f64,
            ci_lo,
            ci_hi,
        }
    }

    /// Plug-in binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        let p = self.estimate;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        // 5/10 at 95%: (0.2366, 0.7634)
        let (lo, hi) = wilson_interval(5, 10, Z95);
        assert!((lo - 0.236_593).abs() < 1e-5, "{lo}");
        assert!((hi - 0.763_407).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn interval_contains_point_at_extremes() {
        for (h, n) in [(0, 1), (1, 1), (0, 500), (500, 500), (3, 1000)] {
            let p = Proportion::new(h, n);
            assert!(p.ci_lo <= p.estimate && p.estimate <= p.ci_hi);
            assert!(p.ci_lo >= 0.0 && p.ci_hi <= 1.0);
        }
        let zero = Proportion::new(0, 100);
        assert_eq!(zero.ci_lo, 0.0);
        assert!(zero.ci_hi > 0.0);
    }
}
