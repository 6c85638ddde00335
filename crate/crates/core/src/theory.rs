//! Bound calculators for the stratification penalty term Σ ln|Gᵢ|, and
//! fitting a symmetric Dirichlet concentration to observed group shares.
//!
//! Under g ~ D(α, k) with |Gᵢ| = gᵢ·n,
//! E[Σ ln|Gᵢ|] = k·(ψ(α) − ψ(kα) + ln n), which sits between the sparse
//! reference (k − 1) + ln(n − k) and the equal-split maximum k·ln(n/k).

use rand::Rng;

use crate::datagen::DirichletSampler;
use crate::error::{ensure_positive, invalid, Result};
use crate::mean::{fresh_error_bound, strat_error_bound, ClipConfig};
use crate::rng::RngHandle;
use crate::special::digamma;

/// Symmetric Dirichlet D(α, k). `k = 1` is accepted as the point mass on (1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletParams {
    pub alpha: f64,
    pub k: usize,
}

impl DirichletParams {
    pub fn new(alpha: f64, k: usize) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        if k == 0 {
            return Err(invalid("k", "need at least one component"));
        }
        Ok(Self { alpha, k })
    }
}

/// k·(ψ(α) − ψ(kα) + ln n).
pub fn thm1_bound(params: DirichletParams, n: usize) -> Result<f64> {
    check_n_k(n, params.k)?;
    let k = params.k as f64;
    Ok(k * (digamma(params.alpha)? - digamma(k * params.alpha)? + (n as f64).ln()))
}

/// k·ln(n/k), the maximum of Σ ln gᵢ over positive parts summing to n.
pub fn lemma1_max(n: usize, k: usize) -> Result<f64> {
    check_n_k(n, k)?;
    let (n, k) = (n as f64, k as f64);
    Ok(k * (n / k).ln())
}

/// (k − 1) + ln(n − k): reference curve for one majority group.
pub fn sparse_ref(n: usize, k: usize) -> Result<f64> {
    if k == 0 || n <= k {
        return Err(invalid("n", format!("need n > k >= 1, got n={n}, k={k}")));
    }
    Ok((k - 1) as f64 + ((n - k) as f64).ln())
}

fn check_n_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || n < k {
        return Err(invalid("n", format!("need n >= k >= 1, got n={n}, k={k}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary {
    pub mean: f64,
    /// Standard deviation across trials (not the standard error).
    pub sd: f64,
    pub trials: usize,
}

impl McSummary {
    pub fn standard_error(&self) -> f64 {
        self.sd / (self.trials as f64).sqrt()
    }
}

/// Monte Carlo estimate of E[Σ ln(gᵢ·n)] with g ~ D(α, k), sizes kept real-valued.
pub fn expected_sum_log_mc<R: Rng + ?Sized>(
    params: DirichletParams,
    n: usize,
    trials: usize,
    rng: &mut R,
) -> Result<McSummary> {
    check_n_k(n, params.k)?;
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let sampler = DirichletSampler::new(params)?;
    let offset = params.k as f64 * (n as f64).ln();
    let mut logs = vec![0.0; params.k];
    // Welford running moments.
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..trials {
        sampler.sample_log_into(rng, &mut logs);
        let x = offset + logs.iter().sum::<f64>();
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let sd = if trials > 1 {
        (m2 / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(McSummary { mean, sd, trials })
}

/// Evaluated bounds for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    pub alpha: Option<f64>,
    pub thm1: Option<f64>,
    pub lemma1_max: f64,
    pub sparse_ref: Option<f64>,
    pub fresh_bound: f64,
    pub strat_bound: f64,
}

pub fn bound_report(
    n: usize,
    k: usize,
    alpha: Option<f64>,
    clip: &ClipConfig,
    epsilon: f64,
    c: f64,
) -> Result<BoundReport> {
    let thm1 = alpha
        .map(|a| DirichletParams::new(a, k).and_then(|p| thm1_bound(p, n)))
        .transpose()?;
    Ok(BoundReport {
        n,
        k,
        alpha,
        thm1,
        lemma1_max: lemma1_max(n, k)?,
        sparse_ref: sparse_ref(n, k).ok(),
        fresh_bound: fresh_error_bound(n, clip, epsilon, c)?,
        strat_bound: strat_error_bound(n, k, clip, epsilon, c)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFit {
    pub alpha: f64,
    /// Total-variation distance between the observed and expected sorted shares.
    pub distance: f64,
    pub saturated: Option<Saturation>,
    /// Shares actually used (floored, renormalized, sorted descending).
    pub proportions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 1e3,
            steps: 25,
        }
    }
}

const SHARE_FLOOR: f64 = 1e-6;

/// Fit a symmetric Dirichlet α to one observed vector of group shares.
///
/// The criterion is the total-variation distance between the observed shares
/// sorted in decreasing order and the Monte Carlo expectation of a sorted
/// D(α, k) draw. Every candidate α reuses the same random stream, and the
/// log-spaced grid is refined twice around the running best.
pub fn fit_dirichlet_alpha(
    proportions: &[f64],
    grid: AlphaGrid,
    draws: usize,
    rng: RngHandle,
) -> Result<AlphaFit> {
    let k = proportions.len();
    if k < 2 {
        return Err(invalid("proportions", "need at least two shares"));
    }
    if proportions.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(invalid(
            "proportions",
            "shares must be finite and nonnegative",
        ));
    }
    let sum: f64 = proportions.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(invalid(
            "proportions",
            format!("shares sum to {sum}, not 1"),
        ));
    }
    ensure_positive("grid.lo", grid.lo)?;
    if !(grid.lo < grid.hi) || grid.steps < 3 {
        return Err(invalid("grid", "need lo < hi and at least 3 steps"));
    }
    if draws == 0 {
        return Err(invalid("draws", "need at least one draw"));
    }

    let mut target: Vec<f64> = proportions.iter().map(|p| p.max(SHARE_FLOOR)).collect();
    let total: f64 = target.iter().sum();
    target.iter_mut().for_each(|p| *p /= total);
    target.sort_by(|a, b| b.total_cmp(a));

    let objective = |alpha: f64| -> Result<f64> {
        let expected = expected_sorted_shares(DirichletParams::new(alpha, k)?, draws, rng)?;
        Ok(0.5
            * expected
                .iter()
                .zip(&target)
                .map(|(e, t)| (e - t).abs())
                .sum::<f64>())
    };

    let (mut lo, mut hi) = (grid.lo, grid.hi);
    let mut best = (f64::NAN, f64::INFINITY);
    let mut saturated = None;
    for pass in 0..3 {
        let points = log_grid(lo, hi, grid.steps);
        for &a in &points {
            let d = objective(a)?;
            if d < best.1 {
                best = (a, d);
            }
        }
        let best_idx = nearest(&points, best.0);
        if pass == 0 {
            if best_idx == 0 {
                saturated = Some(Saturation::Lower);
            } else if best_idx == points.len() - 1 {
                saturated = Some(Saturation::Upper);
            }
            if saturated.is_some() {
                break;
            }
        }
        lo = points[best_idx.saturating_sub(1)];
        hi = points[(best_idx + 1).min(points.len() - 1)];
    }
    Ok(AlphaFit {
        alpha: best.0,
        distance: best.1,
        saturated,
        proportions: target,
    })
}

/// Monte Carlo mean of a D(α, k) draw sorted in decreasing order.
pub fn expected_sorted_shares(
    params: DirichletParams,
    draws: usize,
    rng: RngHandle,
) -> Result<Vec<f64>> {
    let sampler = DirichletSampler::new(params)?;
    let mut r = rng.rng();
    let mut acc = vec![0.0; params.k];
    for _ in 0..draws {
        let mut g = sampler.sample(&mut r);
        g.sort_by(|a, b| b.total_cmp(a));
        acc.iter_mut().zip(&g).for_each(|(a, x)| *a += x);
    }
    acc.iter_mut().for_each(|a| *a /= draws as f64);
    Ok(acc)
}

fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..steps)
        .map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp())
        .collect()
}

fn nearest(points: &[f64], x: f64) -> usize {
    (0..points.len())
        .min_by(|&i, &j| (points[i] - x).abs().total_cmp(&(points[j] - x).abs()))
        .unwrap_or(0)
}
