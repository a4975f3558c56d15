//! Statistical harness: parallel trial runner, binomial confidence
//! intervals, and chi-square tests for the distribution claims.
//!
//! With the `parallel` feature (the default) trials fan out across worker
//! threads with rayon; each session stays single-threaded. The sequential
//! runner is always available and produces identical results, since every
//! trial is keyed only by its index.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Run `trials` independent trials, one per index. Parallel when the
/// `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn run_trials<T: Send>(trials: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_trials<T: Send>(trials: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    run_trials_sequential(trials, f)
}

/// Sequential fallback, always available; used by the bench suite to compare
/// against the parallel path.
pub fn run_trials_sequential<T>(trials: u64, f: impl Fn(u64) -> T) -> Vec<T> {
    (0..trials).map(f).collect()
}

/// Count successes over `trials` indexed trials.
pub fn success_rate(trials: u64, f: impl Fn(u64) -> bool + Sync) -> RateEstimate {
    let outcomes = run_trials(trials, |i| f(i));
    let successes = outcomes.iter().filter(|&&b| b).count() as u64;
    RateEstimate::new(successes, trials)
}

/// A binomial proportion with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(trials > 0);
        let rate = successes as f64 / trials as f64;
        let se = (rate * (1.0 - rate) / trials as f64).sqrt();
        let half = 1.96 * se;
        RateEstimate {
            successes,
            trials,
            rate,
            ci_low: (rate - half).max(0.0),
            ci_high: (rate + half).min(1.0),
        }
    }

    /// |rate - p| measured in binomial standard deviations under H0: p.
    pub fn sigmas_from(&self, p: f64) -> f64 {
        let sd = (p * (1.0 - p) / self.trials as f64).sqrt();
        (self.rate - p).abs() / sd
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Upper-tail p-value of the chi-square distribution.
pub fn chi_square_p(statistic: f64, dof: u64) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive dof");
    1.0 - d.cdf(statistic)
}

/// Goodness of fit against the uniform distribution over the given bins.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquareResult {
    let k = counts.len();
    assert!(k >= 2);
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / k as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = (k - 1) as u64;
    ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Two-sample homogeneity test over categorical tables: are both samples
/// drawn from the same distribution? Standard 2 x k contingency statistic.
pub fn chi_square_homogeneity<K: std::hash::Hash + Eq + Clone>(
    sample_a: &HashMap<K, u64>,
    sample_b: &HashMap<K, u64>,
) -> ChiSquareResult {
    let mut keys: Vec<K> = sample_a.keys().cloned().collect();
    for k in sample_b.keys() {
        if !sample_a.contains_key(k) {
            keys.push(k.clone());
        }
    }
    let total_a: u64 = sample_a.values().sum();
    let total_b: u64 = sample_b.values().sum();
    let total = (total_a + total_b) as f64;
    let mut statistic = 0.0;
    let mut bins = 0u64;
    for k in &keys {
        let ca = *sample_a.get(k).unwrap_or(&0) as f64;
        let cb = *sample_b.get(k).unwrap_or(&0) as f64;
        let col = ca + cb;
        if col == 0.0 {
            continue;
        }
        bins += 1;
        let ea = col * total_a as f64 / total;
        let eb = col * total_b as f64 / total;
        if ea > 0.0 {
            statistic += (ca - ea) * (ca - ea) / ea;
        }
        if eb > 0.0 {
            statistic += (cb - eb) * (cb - eb) / eb;
        }
    }
    let dof = bins.saturating_sub(1);
    ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sequential_and_default_runners_agree() {
        let a = run_trials(100, |i| i * i);
        let b = run_trials_sequential(100, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn rate_estimate_basics() {
        let e = RateEstimate::new(500, 1000);
        assert!((e.rate - 0.5).abs() < 1e-12);
        assert!(e.ci_low < 0.5 && e.ci_high > 0.5);
        assert!(e.sigmas_from(0.5) < 0.01);
    }

    #[test]
    fn uniform_fit_accepts_uniform_and_rejects_skew() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[rng.gen_range(0..6)] += 1;
        }
        assert!(chi_square_uniform(&counts).p_value > 0.01);

        let skew = [20_000u64, 10_000, 10_000, 10_000, 5_000, 5_000];
        assert!(chi_square_uniform(&skew).p_value < 1e-6);
    }

    #[test]
    fn homogeneity_detects_difference() {
        let mut a = HashMap::new();
        let mut b = HashMap::new();
        a.insert("x", 5000u64);
        a.insert("y", 5000u64);
        b.insert("x", 5000u64);
        b.insert("y", 5000u64);
        assert!(chi_square_homogeneity(&a, &b).p_value > 0.5);

        b.insert("x", 6000u64);
        b.insert("y", 4000u64);
        assert!(chi_square_homogeneity(&a, &b).p_value < 1e-6);
    }
}
