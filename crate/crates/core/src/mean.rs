//! Clipped-Laplace private means and their stratified aggregate.
//!
//! Every stratum is privatized independently with the full ε (the strata
//! are disjoint, so the overall release stays (ε, 0)-DP), and the global
//! estimate is the size-weighted average of the per-group estimates. No
//! extra budget is spent on the global number.

use rand::Rng;

use crate::error::{ensure_positive, ensure_unit_open, invalid, Error, Result};
use crate::privacy::{compose_parallel, sample_laplace, PrivacyBudget};
use crate::sample::{GroupKey, StratifiedSample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    /// Known bound on |μ|.
    pub r: f64,
    /// Failure-probability knob γ.
    pub gamma: f64,
}

impl ClipConfig {
    pub fn new(r: f64, gamma: f64) -> Result<Self> {
        ensure_positive("R", r)?;
        ensure_unit_open("gamma", gamma)?;
        Ok(Self { r, gamma })
    }

    /// Half-width c = R + √(ln(m/γ)) of the clip interval for a dataset of `m` points.
    pub fn threshold(&self, m: usize) -> f64 {
        self.r + (m as f64 / self.gamma).ln().sqrt()
    }

    /// Laplace scale (2R + 2√(ln(m/γ)))/(m·ε) of the clipped mean.
    pub fn noise_scale(&self, m: usize, epsilon: f64) -> f64 {
        2.0 * self.threshold(m) / (m as f64 * epsilon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimateResult {
    pub global: f64,
    pub per_group: Vec<(GroupKey, f64)>,
    pub budget_spent: PrivacyBudget,
}

impl MeanEstimateResult {
    pub fn group_estimates(&self) -> Vec<f64> {
        self.per_group.iter().map(|(_, v)| *v).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeans {
    pub estimates: Vec<f64>,
    pub budget: PrivacyBudget,
}

/// Symmetric clip to [−c, c] with c = R + √(ln(m/γ)).
pub fn clip(x: f64, cfg: &ClipConfig, m: usize) -> f64 {
    let c = cfg.threshold(m.max(1));
    if x.abs() <= c {
        x
    } else {
        c.copysign(x)
    }
}

/// Clipped empirical mean plus Laplace noise; (ε, 0)-DP.
pub fn private_mean<R: Rng + ?Sized>(
    values: &[f64],
    cfg: &ClipConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = values.len();
    let clipped_mean = values.iter().map(|&x| clip(x, cfg, m)).sum::<f64>() / m as f64;
    Ok(clipped_mean + sample_laplace(cfg.noise_scale(m, epsilon), rng))
}

/// Independent private means per stratum, each at the full ε.
pub fn group_private_means<R: Rng + ?Sized>(
    sample: &StratifiedSample,
    cfg: &ClipConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<GroupMeans> {
    let budget = compose_parallel(PrivacyBudget::pure(epsilon)?, true)?;
    let estimates = sample
        .strata()
        .iter()
        .map(|s| {
            private_mean(&s.values, cfg, epsilon, rng).map_err(|e| match e {
                Error::EmptyDataset => Error::EmptyStratum(s.key.to_string()),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupMeans { estimates, budget })
}

/// Size-weighted average (1/n)·Σ|Gᵢ|·p̂ᵢ.
pub fn stratified_mean(per_group: &[f64], group_sizes: &[usize]) -> Result<f64> {
    if per_group.len() != group_sizes.len() {
        return Err(Error::Shape(format!(
            "{} estimates for {} group sizes",
            per_group.len(),
            group_sizes.len()
        )));
    }
    if per_group.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if group_sizes.contains(&0) {
        return Err(invalid("group_sizes", "every size must be positive"));
    }
    let n: usize = group_sizes.iter().sum();
    let total: f64 = per_group
        .iter()
        .zip(group_sizes)
        .map(|(p, &g)| g as f64 * p)
        .sum();
    Ok(total / n as f64)
}

/// Per-group clipped-Laplace means combined by the true group sizes.
pub fn stratified_laplace<R: Rng + ?Sized>(
    sample: &StratifiedSample,
    cfg: &ClipConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<MeanEstimateResult> {
    let groups = group_private_means(sample, cfg, epsilon, rng)?;
    let global = stratified_mean(&groups.estimates, &sample.sizes())?;
    Ok(MeanEstimateResult {
        global,
        per_group: sample.keys().into_iter().zip(groups.estimates).collect(),
        budget_spent: groups.budget,
    })
}

/// High-probability bound C·ln(1/γ)·(R + √(ln(n/γ)))/(n·ε) on |p̂ − p| for one fresh estimate.
pub fn fresh_error_bound(n: usize, cfg: &ClipConfig, epsilon: f64, c: f64) -> Result<f64> {
    strat_error_bound(n, 1, cfg, epsilon, c)
}

/// Worst-case bound C·ln(1/γ)·√k·(R + √(ln(n/(kγ))))/(n·ε) on |p − p̂_strat|.
pub fn strat_error_bound(
    n: usize,
    k: usize,
    cfg: &ClipConfig,
    epsilon: f64,
    c: f64,
) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("C", c)?;
    if k == 0 || n < k {
        return Err(invalid("n", format!("need n >= k >= 1, got n={n}, k={k}")));
    }
    let (n, k) = (n as f64, k as f64);
    let log_term = (n / (k * cfg.gamma)).ln().sqrt();
    Ok(c * (1.0 / cfg.gamma).ln() * k.sqrt() * (cfg.r + log_term) / (n * epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use rand_distr::{Distribution, Normal};

    fn cfg(r: f64, gamma: f64) -> ClipConfig {
        ClipConfig::new(r, gamma).unwrap()
    }

    #[test]
    fn clip_examples() {
        let c = cfg(1.0, 0.1);
        assert_eq!(clip(0.5, &c, 100), 0.5);
        let expected = 1.0 + 1000f64.ln().sqrt();
        assert!((clip(5.0, &c, 100) - 3.628_260_884_878).abs() < 1e-9);
        assert_eq!(clip(5.0, &c, 100), expected);
        assert_eq!(clip(-5.0, &c, 100), -expected);
    }

    #[test]
    fn config_validation() {
        assert!(ClipConfig::new(0.0, 0.1).is_err());
        assert!(ClipConfig::new(1.0, 1.0).is_err());
        assert!(ClipConfig::new(1.0, 0.0).is_err());
    }

    #[test]
    fn zeros_give_pure_noise() {
        let c = cfg(1.0, 0.05);
        let h = RngHandle::new(5, 0);
        let out = private_mean(&vec![0.0; 50], &c, 1.0, &mut h.rng()).unwrap();
        let noise = sample_laplace(c.noise_scale(50, 1.0), &mut h.rng());
        assert_eq!(out, noise);
    }

    #[test]
    fn empty_inputs_rejected() {
        let c = cfg(1.0, 0.05);
        let mut rng = RngHandle::new(5, 0).rng();
        assert_eq!(
            private_mean(&[], &c, 1.0, &mut rng),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn noiseless_limit_matches_empirical_mean() {
        let c = cfg(1.0, 0.05);
        let mut rng = RngHandle::new(6, 0).rng();
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 - 10.0) / 10.0).collect();
        let p = xs.iter().sum::<f64>() / xs.len() as f64;
        let out = private_mean(&xs, &c, 1e6, &mut rng).unwrap();
        assert!((out - p).abs() < 1e-3);
    }

    #[test]
    fn accuracy_over_seeds() {
        let c = cfg(1.0, 0.05);
        let normal = Normal::new(0.5, 1.0).unwrap();
        let mut total = 0.0;
        for seed in 0..50 {
            let mut rng = RngHandle::new(seed, 1).rng();
            let xs: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
            total += (private_mean(&xs, &c, 1.0, &mut rng).unwrap() - 0.5).abs();
        }
        assert!(total / 50.0 <= 0.05, "mae {}", total / 50.0);
    }

    #[test]
    fn single_stratum_matches_private_mean() {
        let c = cfg(2.0, 0.05);
        let xs = vec![0.1, -0.4, 1.3, 0.7];
        let s = StratifiedSample::from_groups(vec![xs.clone()]).unwrap();
        let h = RngHandle::new(3, 0);
        let g = group_private_means(&s, &c, 0.7, &mut h.rng()).unwrap();
        assert_eq!(
            g.estimates,
            vec![private_mean(&xs, &c, 0.7, &mut h.rng()).unwrap()]
        );
        assert_eq!(g.budget, PrivacyBudget::PureDp { epsilon: 0.7 });
    }

    #[test]
    fn noise_scale_tracks_group_size() {
        let c = cfg(1.0, 0.05);
        let small = c.noise_scale(10, 1.0);
        let large = c.noise_scale(10_000, 1.0);
        let ratio = small / large;
        // 1000x from the size, shrunk by the log factor in the threshold.
        let log_adj = c.threshold(10) / c.threshold(10_000);
        assert!((ratio - 1000.0 * log_adj).abs() < 1e-6);
        assert!(ratio > 500.0 && ratio < 1000.0);
    }

    #[test]
    fn group_means_reproducible() {
        let c = cfg(1.0, 0.05);
        let s = StratifiedSample::from_groups(vec![vec![0.2; 10], vec![0.4; 30]]).unwrap();
        let h = RngHandle::new(8, 2);
        let a = group_private_means(&s, &c, 1.0, &mut h.rng()).unwrap();
        let b = group_private_means(&s, &c, 1.0, &mut h.rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stratified_mean_examples() {
        assert_eq!(stratified_mean(&[2.0, 6.0], &[3, 1]).unwrap(), 3.0);
        assert_eq!(stratified_mean(&[0.0, 3.0, 6.0], &[1, 1, 1]).unwrap(), 3.0);
        assert_eq!(stratified_mean(&[1.5; 4], &[7, 1, 100, 3]).unwrap(), 1.5);
        assert!(matches!(
            stratified_mean(&[1.0], &[1, 2]),
            Err(Error::Shape(_))
        ));
        assert!(stratified_mean(&[1.0], &[0]).is_err());
    }

    #[test]
    fn bound_examples() {
        let c = cfg(1.0, 0.05);
        let fresh = fresh_error_bound(10_000, &c, 1.0, 1.0).unwrap();
        let strat = strat_error_bound(10_000, 4, &c, 1.0, 1.0).unwrap();
        // Independent evaluation of the closed forms.
        assert!((fresh - 1.346_197_912e-3).abs() < 1e-12);
        assert!((strat - 2.569_944_734_6e-3).abs() < 1e-12);
        assert_eq!(strat_error_bound(10_000, 1, &c, 1.0, 1.0).unwrap(), fresh);
        assert!(strat_error_bound(3, 4, &c, 1.0, 1.0).is_err());
    }

    #[test]
    fn strat_bound_nondecreasing_in_k() {
        let c = cfg(1.0, 0.05);
        let n = 2000;
        let mut prev = 0.0;
        for k in 1..=n {
            let b = strat_error_bound(n, k, &c, 1.0, 1.0).unwrap();
            assert!(b >= prev, "k={k}");
            prev = b;
        }
    }
}
