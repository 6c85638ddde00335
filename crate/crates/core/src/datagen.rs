//! Seeded synthetic data: symmetric Dirichlet vectors and Gaussian mixtures
//! whose group sizes follow a Dirichlet draw.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Uniform};

use crate::error::{ensure_positive, invalid, Result};
use crate::sample::{mean, StratifiedSample};
use crate::theory::DirichletParams;

/// Samples ln G for G ~ Gamma(shape, 1) without underflow at small shapes.
///
/// For shape < 1 it uses G = G' · U^(1/shape) with G' ~ Gamma(shape + 1, 1),
/// evaluated in log space.
#[derive(Debug, Clone, Copy)]
pub struct LogGamma {
    base: Gamma<f64>,
    inv_shape: Option<f64>,
}

impl LogGamma {
    pub fn new(shape: f64) -> Result<Self> {
        ensure_positive("shape", shape)?;
        let (base_shape, inv_shape) = if shape < 1.0 {
            (shape + 1.0, Some(1.0 / shape))
        } else {
            (shape, None)
        };
        let base = Gamma::new(base_shape, 1.0).map_err(|e| invalid("shape", e.to_string()))?;
        Ok(Self { base, inv_shape })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.base.sample(rng).ln();
        match self.inv_shape {
            Some(inv) => {
                let u = 1.0 - rng.random::<f64>();
                g + u.ln() * inv
            }
            None => g,
        }
    }
}

/// Symmetric Dirichlet sampler built from normalized Gamma(α, 1) draws.
#[derive(Debug, Clone, Copy)]
pub struct DirichletSampler {
    k: usize,
    log_gamma: LogGamma,
}

impl DirichletSampler {
    pub fn new(params: DirichletParams) -> Result<Self> {
        Ok(Self {
            k: params.k,
            log_gamma: LogGamma::new(params.alpha)?,
        })
    }

    /// Fill `out` (length k) with ln gᵢ of one draw.
    pub fn sample_log_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.k);
        if self.k == 1 {
            out[0] = 0.0;
            return;
        }
        for slot in out.iter_mut() {
            *slot = self.log_gamma.sample(rng);
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = max + out.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        for slot in out.iter_mut() {
            *slot -= log_sum;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut logs = vec![0.0; self.k];
        self.sample_log_into(rng, &mut logs);
        let mut g: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let s: f64 = g.iter().sum();
        g.iter_mut().for_each(|x| *x /= s);
        g
    }
}

pub fn sample_dirichlet<R: Rng + ?Sized>(params: DirichletParams, rng: &mut R) -> Result<Vec<f64>> {
    Ok(DirichletSampler::new(params)?.sample(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub mu_prior_sd: f64,
    pub sigma_range: (f64, f64),
    /// Use |Gᵢ| = n/k instead of Dirichlet-proportional sizes.
    pub equal_sizes: bool,
}

impl MixtureSpec {
    pub fn new(n: usize, k: usize, alpha: f64) -> Self {
        Self {
            n,
            k,
            alpha,
            mu_prior_sd: 1.0,
            sigma_range: (0.1, 2.0),
            equal_sizes: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < self.k {
            return Err(invalid(
                "n",
                format!("need n >= k >= 1, got n={}, k={}", self.n, self.k),
            ));
        }
        ensure_positive("alpha", self.alpha)?;
        ensure_positive("mu_prior_sd", self.mu_prior_sd)?;
        let (lo, hi) = self.sigma_range;
        ensure_positive("sigma_range.lo", lo)?;
        if !(lo < hi) || !hi.is_finite() {
            return Err(invalid(
                "sigma_range",
                format!("need 0 < lo < hi, got ({lo}, {hi})"),
            ));
        }
        Ok(())
    }
}

/// A generated mixture with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub sample: StratifiedSample,
    pub proportions: Vec<f64>,
    pub mus: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl Mixture {
    pub fn sizes(&self) -> Vec<usize> {
        self.sample.sizes()
    }

    pub fn group_means(&self) -> Vec<f64> {
        self.sample.group_means()
    }

    pub fn global_mean(&self) -> f64 {
        self.sample.global_mean()
    }

    /// Mean of the generating distribution with the realized group sizes.
    pub fn population_mean(&self) -> f64 {
        let w = self.sample.size_weights();
        w.iter().zip(&self.mus).map(|(w, m)| w * m).sum()
    }

    /// Standard deviation of the mixture with the realized group sizes.
    pub fn population_sd(&self) -> f64 {
        let w = self.sample.size_weights();
        let mu = self.population_mean();
        w.iter()
            .zip(self.mus.iter().zip(&self.sigmas))
            .map(|(w, (m, s))| w * (s * s + (m - mu).powi(2)))
            .sum::<f64>()
            .sqrt()
    }

    /// An independent draw of `m` points from the same mixture, group labels
    /// sampled by the realized group shares. Groups that receive no points
    /// are absent from the result.
    pub fn sample_holdout<R: Rng + ?Sized>(
        &self,
        m: usize,
        rng: &mut R,
    ) -> Result<StratifiedSample> {
        let k = self.mus.len();
        let mut cumulative = Vec::with_capacity(k);
        let mut acc = 0.0;
        for size in self.sample.sizes() {
            acc += size as f64;
            cumulative.push(acc);
        }
        let mut groups: Vec<Vec<f64>> = vec![Vec::new(); k];
        for _ in 0..m {
            let u = rng.random::<f64>() * acc;
            let g = cumulative.partition_point(|&c| c <= u).min(k - 1);
            let d = Normal::new(self.mus[g], self.sigmas[g]).expect("validated sigma");
            groups[g].push(d.sample(rng));
        }
        let keys = self.sample.keys();
        StratifiedSample::new(
            keys.into_iter()
                .zip(groups)
                .filter(|(_, v)| !v.is_empty())
                .map(|(key, values)| crate::sample::Stratum { key, values })
                .collect(),
        )
    }

    /// Dump as `group_id,value` lines with a header row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "group_id,value")?;
        for s in self.sample.strata() {
            for v in &s.values {
                writeln!(out, "{},{v}", s.key)?;
            }
        }
        Ok(())
    }
}

/// Largest-remainder rounding of `proportions · n` with every part forced to at least 1.
///
/// Parts raised to 1 borrow from the currently largest part.
pub fn round_sizes(proportions: &[f64], n: usize) -> Vec<usize> {
    let k = proportions.len();
    let total: f64 = proportions.iter().sum();
    let raw: Vec<f64> = proportions.iter().map(|p| p / total * n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    for i in 0..k {
        if sizes[i] == 0 {
            let donor = (0..k)
                .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
                .expect("k >= 1");
            sizes[donor] -= 1;
            sizes[i] = 1;
        }
    }
    sizes
}

/// Draw v ~ D(α, k), μᵢ ~ N(0, sd²), σᵢ ~ U(lo, hi), then |Gᵢ| points from N(μᵢ, σᵢ²) per group.
pub fn gaussian_mixture<R: Rng + ?Sized>(spec: &MixtureSpec, rng: &mut R) -> Result<Mixture> {
    spec.validate()?;
    let proportions = if spec.k == 1 {
        vec![1.0]
    } else {
        sample_dirichlet(DirichletParams::new(spec.alpha, spec.k)?, rng)?
    };
    let prior =
        Normal::new(0.0, spec.mu_prior_sd).map_err(|e| invalid("mu_prior_sd", e.to_string()))?;
    let mus: Vec<f64> = (0..spec.k).map(|_| prior.sample(rng)).collect();
    let (lo, hi) = spec.sigma_range;
    let spread = Uniform::new(lo, hi).map_err(|e| invalid("sigma_range", e.to_string()))?;
    let sigmas: Vec<f64> = (0..spec.k).map(|_| spread.sample(rng)).collect();
    let sizes = if spec.equal_sizes {
        round_sizes(&vec![1.0; spec.k], spec.n)
    } else {
        round_sizes(&proportions, spec.n)
    };
    let groups = sizes
        .iter()
        .zip(mus.iter().zip(&sigmas))
        .map(|(&size, (&mu, &sigma))| {
            let d = Normal::new(mu, sigma).expect("sigma validated positive");
            (0..size).map(|_| d.sample(rng)).collect()
        })
        .collect();
    Ok(Mixture {
        sample: StratifiedSample::from_groups(groups)?,
        proportions,
        mus,
        sigmas,
    })
}

/// Sample standard deviation helper shared by metrics.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use proptest::prelude::*;

    #[test]
    fn dirichlet_sums_to_one() {
        let mut rng = RngHandle::new(1, 0).rng();
        for alpha in [0.01, 0.1, 1.0, 10.0] {
            let s = DirichletSampler::new(DirichletParams::new(alpha, 7).unwrap()).unwrap();
            for _ in 0..1000 {
                let g = s.sample(&mut rng);
                assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(g.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn dirichlet_symmetric_mean() {
        let mut rng = RngHandle::new(2, 0).rng();
        let s = DirichletSampler::new(DirichletParams::new(10.0, 3).unwrap()).unwrap();
        let mut acc = [0.0; 3];
        let trials = 10_000;
        for _ in 0..trials {
            for (a, g) in acc.iter_mut().zip(s.sample(&mut rng)) {
                *a += g;
            }
        }
        for a in acc {
            assert!((a / trials as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn small_alpha_is_sparser() {
        let mut rng = RngHandle::new(3, 0).rng();
        let max_mean = |alpha: f64, rng: &mut crate::rng::DpRng| {
            let s = DirichletSampler::new(DirichletParams::new(alpha, 3).unwrap()).unwrap();
            (0..10_000)
                .map(|_| s.sample(rng).into_iter().fold(0.0, f64::max))
                .sum::<f64>()
                / 10_000.0
        };
        let sparse = max_mean(0.1, &mut rng);
        let even = max_mean(10.0, &mut rng);
        assert!(sparse > even + 0.3, "{sparse} vs {even}");
    }

    #[test]
    fn mixture_basics() {
        let spec = MixtureSpec::new(1000, 5, 0.5);
        let mut rng = RngHandle::new(4, 0).rng();
        let m = gaussian_mixture(&spec, &mut rng).unwrap();
        assert_eq!(m.sample.n(), 1000);
        assert!(m.sizes().iter().all(|&s| s >= 1));
        assert!(m.sigmas.iter().all(|&s| (0.1..2.0).contains(&s)));
        let w = m.sample.size_weights();
        let recombined: f64 = w.iter().zip(m.group_means()).map(|(w, g)| w * g).sum();
        assert!((recombined - m.global_mean()).abs() < 1e-12);

        let single = gaussian_mixture(&MixtureSpec::new(50, 1, 1.0), &mut rng).unwrap();
        assert_eq!(single.sizes(), vec![50]);
        assert!(gaussian_mixture(&MixtureSpec::new(3, 4, 1.0), &mut rng).is_err());
    }

    #[test]
    fn mixture_determinism() {
        let spec = MixtureSpec::new(500, 4, 1.0);
        let dump = || {
            let m = gaussian_mixture(&spec, &mut RngHandle::new(9, 1).rng()).unwrap();
            let mut buf = Vec::new();
            m.write_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(dump(), dump());
    }

    #[test]
    fn equal_sizes_switch() {
        let mut spec = MixtureSpec::new(10, 4, 0.2);
        spec.equal_sizes = true;
        let m = gaussian_mixture(&spec, &mut RngHandle::new(1, 1).rng()).unwrap();
        assert_eq!(m.sizes(), vec![3, 3, 2, 2]);
    }

    #[test]
    fn group_means_converge() {
        // |mean(Gᵢ) − μᵢ| within 3σᵢ/√|Gᵢ| for the bulk of groups across seeds.
        let spec = MixtureSpec::new(20_000, 4, 1.0);
        let mut outside = 0;
        let mut total = 0;
        for seed in 0..50 {
            let m = gaussian_mixture(&spec, &mut RngHandle::new(seed, 0).rng()).unwrap();
            for ((g, mu), (sigma, size)) in m
                .group_means()
                .iter()
                .zip(&m.mus)
                .zip(m.sigmas.iter().zip(m.sizes()))
            {
                total += 1;
                if (g - mu).abs() > 3.0 * sigma / (size as f64).sqrt() {
                    outside += 1;
                }
            }
        }
        assert!(outside as f64 <= 0.02 * total as f64, "{outside}/{total}");
    }

    #[test]
    fn holdout_sampling() {
        let spec = MixtureSpec::new(1000, 3, 1.0);
        let mut rng = RngHandle::new(5, 0).rng();
        let m = gaussian_mixture(&spec, &mut rng).unwrap();
        let h = m.sample_holdout(5000, &mut rng).unwrap();
        assert_eq!(h.n(), 5000);
        for (key, p) in m.sample.keys().iter().zip(&m.proportions) {
            if let Some(s) = h.strata().iter().find(|s| &s.key == key) {
                let freq = s.values.len() as f64 / 5000.0;
                assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / 5000.0).sqrt() + 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn rounding_preserves_total(
            props in proptest::collection::vec(0.0f64..1.0, 1..20),
            extra in 0usize..5000,
        ) {
            let k = props.len();
            let n = k + extra;
            let props: Vec<f64> = if props.iter().sum::<f64>() == 0.0 { vec![1.0; k] } else { props };
            let sizes = round_sizes(&props, n);
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            prop_assert!(sizes.iter().all(|&s| s >= 1));
        }
    }
}
