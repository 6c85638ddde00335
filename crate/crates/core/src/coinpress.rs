//! Adaptive univariate mean estimation by private interval shrinking, and
//! its stratified variants.
//!
//! Each step projects the data onto the current interval widened by a
//! Gaussian tail margin, releases the projected mean with the Gaussian
//! mechanism, and returns a confidence interval around the noisy mean. The
//! final step gets the largest share of the zCDP budget.

use rand::Rng;

use crate::error::{ensure_positive, ensure_unit_open, invalid, Error, Result};
use crate::mean::MeanEstimateResult;
use crate::parity::parity_error;
use crate::privacy::{compose_parallel, sample_gaussian, PrivacyBudget};
use crate::sample::{validate_weights, StratifiedSample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEstimate {
    pub lo: f64,
    pub hi: f64,
}

impl IntervalEstimate {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(invalid(
                "interval",
                format!("need finite lo <= hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoinpressConfig {
    pub interval: IntervalEstimate,
    pub sigma: f64,
    pub rho_schedule: Vec<f64>,
    pub beta: f64,
}

impl CoinpressConfig {
    pub fn new(
        interval: (f64, f64),
        sigma: f64,
        rho_schedule: Vec<f64>,
        beta: f64,
    ) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo < hi) {
            return Err(invalid("interval", format!("need l < r, got [{lo}, {hi}]")));
        }
        ensure_positive("sigma", sigma)?;
        if rho_schedule.is_empty() {
            return Err(invalid("rho_schedule", "need at least one step"));
        }
        for &rho in &rho_schedule {
            ensure_positive("rho_schedule", rho)?;
        }
        ensure_unit_open("beta", beta)?;
        Ok(Self {
            interval: IntervalEstimate::new(lo, hi)?,
            sigma,
            rho_schedule,
            beta,
        })
    }

    /// `t` steps sharing `rho_total` in proportion {1, …, 1, 5}.
    pub fn with_default_schedule(
        interval: (f64, f64),
        sigma: f64,
        t: usize,
        rho_total: f64,
        beta: f64,
    ) -> Result<Self> {
        Self::new(interval, sigma, default_rho_schedule(t, rho_total)?, beta)
    }

    pub fn t(&self) -> usize {
        self.rho_schedule.len()
    }

    pub fn total_rho(&self) -> f64 {
        self.rho_schedule.iter().sum()
    }

    pub fn budget(&self) -> PrivacyBudget {
        PrivacyBudget::Zcdp {
            rho: self.total_rho(),
        }
    }
}

/// Split `rho_total` over `t` steps proportionally to {1, …, 1, 5}.
pub fn default_rho_schedule(t: usize, rho_total: f64) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(invalid("t", "need at least one step"));
    }
    ensure_positive("rho_total", rho_total)?;
    let mut shares = vec![1.0; t];
    shares[t - 1] = 5.0;
    Ok(scale_schedule(&shares, rho_total))
}

/// Rescale arbitrary positive shares so they sum to `rho_total`.
pub fn scale_schedule(shares: &[f64], rho_total: f64) -> Vec<f64> {
    let sum: f64 = shares.iter().sum();
    shares.iter().map(|s| s / sum * rho_total).collect()
}

/// One private improvement of a mean interval; ρ_s-zCDP.
pub fn uvm_step<R: Rng + ?Sized>(
    values: &[f64],
    interval: IntervalEstimate,
    sigma: f64,
    rho_s: f64,
    beta_s: f64,
    rng: &mut R,
) -> Result<IntervalEstimate> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    ensure_positive("sigma", sigma)?;
    ensure_positive("rho_s", rho_s)?;
    ensure_positive("beta_s", beta_s)?;
    let n = values.len() as f64;
    let margin = sigma * (2.0 * (2.0 * n / beta_s).ln()).sqrt();
    let (lo, hi) = (interval.lo - margin, interval.hi + margin);
    let projected_mean = values.iter().map(|x| x.clamp(lo, hi)).sum::<f64>() / n;
    let sensitivity = (interval.hi - interval.lo + 2.0 * margin) / n;
    let noise_var = sensitivity * sensitivity / (2.0 * rho_s);
    let z = projected_mean + sample_gaussian(noise_var.sqrt(), rng);
    let half = (2.0 * (sigma * sigma / n + noise_var) * (2.0 / beta_s).ln()).sqrt();
    IntervalEstimate::new(z - half, z + half)
}

/// Iterated interval shrinking; returns the final midpoint and interval.
///
/// The first t−1 steps each use failure budget β/(4(t−1)) and the last uses β/4.
/// With t = 1 only the final step runs.
pub fn uvm_rec<R: Rng + ?Sized>(
    values: &[f64],
    cfg: &CoinpressConfig,
    rng: &mut R,
) -> Result<(f64, IntervalEstimate)> {
    let t = cfg.t();
    let (last, early) = cfg.rho_schedule.split_last().expect("validated schedule");
    let mut interval = cfg.interval;
    if t > 1 {
        let beta_step = cfg.beta / (4.0 * (t - 1) as f64);
        for &rho in early {
            interval = uvm_step(values, interval, cfg.sigma, rho, beta_step, rng)?;
        }
    }
    interval = uvm_step(values, interval, cfg.sigma, *last, cfg.beta / 4.0, rng)?;
    Ok((interval.midpoint(), interval))
}

/// Coinpress on every stratum with the full budget, aggregated as Σ ωᵢ·μ̂ᵢ.
///
/// The failure budget β is split evenly across strata. The release is
/// (Σρᵢ)-zCDP by parallel composition.
pub fn strat_coinpress<R: Rng + ?Sized>(
    sample: &StratifiedSample,
    cfg: &CoinpressConfig,
    weights: &[f64],
    rng: &mut R,
) -> Result<MeanEstimateResult> {
    validate_weights(weights, sample.k())?;
    let per_stratum = CoinpressConfig {
        beta: cfg.beta / sample.k() as f64,
        ..cfg.clone()
    };
    let per_group = sample
        .strata()
        .iter()
        .map(|s| uvm_rec(&s.values, &per_stratum, rng).map(|(est, _)| (s.key.clone(), est)))
        .collect::<Result<Vec<_>>>()?;
    let global = per_group.iter().zip(weights).map(|((_, m), w)| w * m).sum();
    Ok(MeanEstimateResult {
        global,
        per_group,
        budget_spent: compose_parallel(cfg.budget(), true)?,
    })
}

/// Group weights from a disjoint public holdout, renormalized over the sample's groups.
pub fn holdout_weights(
    sample: &StratifiedSample,
    public_holdout: &StratifiedSample,
) -> Result<Vec<f64>> {
    let counts = sample
        .strata()
        .iter()
        .map(|s| {
            public_holdout
                .strata()
                .iter()
                .find(|h| h.key == s.key)
                .map(|h| h.values.len() as f64)
                .ok_or_else(|| Error::MissingGroupWeight(s.key.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = counts.iter().sum();
    Ok(counts.into_iter().map(|c| c / total).collect())
}

/// [`strat_coinpress`] with weights estimated from a public holdout.
pub fn pub_strat_coinpress<R: Rng + ?Sized>(
    sample: &StratifiedSample,
    cfg: &CoinpressConfig,
    public_holdout: &StratifiedSample,
    rng: &mut R,
) -> Result<MeanEstimateResult> {
    let weights = holdout_weights(sample, public_holdout)?;
    strat_coinpress(sample, cfg, &weights, rng)
}

/// Parity error of per-group and global estimates; the last entry of each slice is the global one.
pub fn parity_error_coinpress(truth: &[f64], estimate: &[f64], omega: f64) -> Result<f64> {
    parity_error(truth, estimate, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use rand_distr::{Distribution, Normal};

    fn normal_sample(n: usize, mu: f64, seed: u64) -> Vec<f64> {
        let mut rng = RngHandle::new(seed, 99).rng();
        let d = Normal::new(mu, 1.0).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn step_margin_and_sensitivity() {
        // n=100, [−10, 10], σ=1, β_s=0.1
        let n = 100.0f64;
        let margin = (2.0 * (2.0 * n / 0.1).ln()).sqrt();
        assert!((margin - 3.898_949_207).abs() < 1e-8);
        let delta = (20.0 + 2.0 * margin) / n;
        assert!((delta - 0.277_978_984).abs() < 1e-8);
    }

    #[test]
    fn step_interval_symmetric_about_release() {
        let xs = normal_sample(100, 0.3, 1);
        let iv = IntervalEstimate::new(-10.0, 10.0).unwrap();
        let out = uvm_step(&xs, iv, 1.0, 0.1, 0.1, &mut RngHandle::new(2, 0).rng()).unwrap();
        let z = out.midpoint();
        assert!(((out.hi - z) - (z - out.lo)).abs() < 1e-12);
    }

    #[test]
    fn step_noiseless_limit() {
        let xs = normal_sample(1000, 0.3, 3);
        let p = xs.iter().sum::<f64>() / xs.len() as f64;
        let iv = IntervalEstimate::new(-100.0, 100.0).unwrap();
        let out = uvm_step(&xs, iv, 1.0, 1e6, 0.1, &mut RngHandle::new(4, 0).rng()).unwrap();
        assert!((out.midpoint() - p).abs() < 1e-3);
        assert!(out.contains(p));
    }

    #[test]
    fn step_rejects_empty() {
        let iv = IntervalEstimate::new(-1.0, 1.0).unwrap();
        assert_eq!(
            uvm_step(&[], iv, 1.0, 1.0, 0.1, &mut RngHandle::new(0, 0).rng()),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn single_step_recursion_uses_quarter_beta() {
        let xs = normal_sample(500, 1.0, 5);
        let cfg = CoinpressConfig::new((-50.0, 50.0), 1.0, vec![0.2], 0.08).unwrap();
        let h = RngHandle::new(6, 0);
        let (est, iv) = uvm_rec(&xs, &cfg, &mut h.rng()).unwrap();
        let direct = uvm_step(&xs, cfg.interval, 1.0, 0.2, 0.02, &mut h.rng()).unwrap();
        assert_eq!(iv, direct);
        assert_eq!(est, direct.midpoint());
        assert!(iv.contains(est));
    }

    #[test]
    fn beta_schedule_sums_to_half() {
        for t in 2..10usize {
            let beta = 0.05;
            let sum = (t - 1) as f64 * beta / (4.0 * (t - 1) as f64) + beta / 4.0;
            assert!((sum - beta / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn recursion_accuracy() {
        let rho_total = 0.25;
        let cfg = CoinpressConfig::with_default_schedule((-100.0, 100.0), 1.0, 4, rho_total, 0.05)
            .unwrap();
        assert_eq!(
            cfg.rho_schedule,
            vec![
                rho_total / 8.0,
                rho_total / 8.0,
                rho_total / 8.0,
                rho_total * 5.0 / 8.0
            ]
        );
        let mut err = 0.0;
        for seed in 0..50 {
            let xs = normal_sample(10_000, 0.5, seed);
            let (est, _) = uvm_rec(&xs, &cfg, &mut RngHandle::new(seed, 1).rng()).unwrap();
            err += (est - 0.5).abs();
        }
        assert!(err / 50.0 <= 0.05, "mae {}", err / 50.0);
    }

    #[test]
    fn config_validation() {
        assert!(CoinpressConfig::new((1.0, 1.0), 1.0, vec![0.1], 0.1).is_err());
        assert!(CoinpressConfig::new((0.0, 1.0), 0.0, vec![0.1], 0.1).is_err());
        assert!(CoinpressConfig::new((0.0, 1.0), 1.0, vec![], 0.1).is_err());
        assert!(CoinpressConfig::new((0.0, 1.0), 1.0, vec![0.1, -0.1], 0.1).is_err());
        assert!(CoinpressConfig::new((0.0, 1.0), 1.0, vec![0.1], 1.0).is_err());
    }

    #[test]
    fn strat_single_group_matches_recursion() {
        let xs = normal_sample(2000, -0.4, 7);
        let s = StratifiedSample::from_groups(vec![xs.clone()]).unwrap();
        let cfg = CoinpressConfig::with_default_schedule((-10.0, 10.0), 1.0, 3, 0.5, 0.05).unwrap();
        let h = RngHandle::new(8, 0);
        let strat = strat_coinpress(&s, &cfg, &[1.0], &mut h.rng()).unwrap();
        let (est, _) = uvm_rec(&xs, &cfg, &mut h.rng()).unwrap();
        assert_eq!(strat.global, est);
        assert_eq!(
            strat.budget_spent,
            PrivacyBudget::Zcdp {
                rho: cfg.total_rho()
            }
        );
    }

    #[test]
    fn strat_rejects_bad_weights() {
        let s = StratifiedSample::from_groups(vec![vec![1.0], vec![2.0]]).unwrap();
        let cfg = CoinpressConfig::with_default_schedule((-10.0, 10.0), 1.0, 2, 0.5, 0.05).unwrap();
        let mut rng = RngHandle::new(0, 0).rng();
        assert!(matches!(
            strat_coinpress(&s, &cfg, &[0.7, 0.7], &mut rng),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn holdout_weights_and_linearity() {
        let s = StratifiedSample::from_groups(vec![
            normal_sample(400, 1.0, 10),
            normal_sample(600, -1.0, 11),
        ])
        .unwrap();
        let cfg = CoinpressConfig::with_default_schedule((-10.0, 10.0), 1.0, 3, 0.5, 0.05).unwrap();
        let same = StratifiedSample::from_groups(vec![vec![0.0; 40], vec![0.0; 60]]).unwrap();
        let h = RngHandle::new(12, 0);
        let a = pub_strat_coinpress(&s, &cfg, &same, &mut h.rng()).unwrap();
        let b = strat_coinpress(&s, &cfg, &s.size_weights(), &mut h.rng()).unwrap();
        assert_eq!(a.per_group, b.per_group);
        assert!((a.global - b.global).abs() < 1e-12);

        let shifted = StratifiedSample::from_groups(vec![vec![0.0; 50], vec![0.0; 50]]).unwrap();
        let c = pub_strat_coinpress(&s, &cfg, &shifted, &mut h.rng()).unwrap();
        let est = c.group_estimates();
        let expected = b.global + 0.1 * (est[0] - est[1]);
        assert!((c.global - expected).abs() < 1e-12);

        let missing = StratifiedSample::from_groups(vec![vec![0.0; 10]]).unwrap();
        assert_eq!(
            pub_strat_coinpress(&s, &cfg, &missing, &mut h.rng()),
            Err(Error::MissingGroupWeight("1".into()))
        );
    }
}
