//! Browser bindings: bound curves over α, Dirichlet draws on the 2-simplex,
//! and a stratified-vs-pooled Laplace comparison on a Gaussian mixture.
//! Every function returns a flat `Float64Array`; layouts are documented per function.

use wasm_bindgen::prelude::*;

use stratdp::datagen::{gaussian_mixture, sample_dirichlet, sample_sd, MixtureSpec};
use stratdp::mean::{private_mean, stratified_laplace, ClipConfig};
use stratdp::parity::{default_omega, normalized_error, parity_error_skipping};
use stratdp::theory::{lemma1_max, sparse_ref, thm1_bound, DirichletParams};
use stratdp::RngHandle;

fn msg(e: stratdp::Error) -> String {
    e.to_string()
}

/// `steps` rows of `[alpha, expected, equal_split_max, sparse_ref]` for α on a
/// log grid over `[alpha_lo, alpha_hi]`. `sparse_ref` is NaN when n ≤ k.
#[wasm_bindgen]
pub fn bound_curves(
    n: usize,
    k: usize,
    alpha_lo: f64,
    alpha_hi: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    if !(alpha_lo > 0.0 && alpha_hi > alpha_lo) || steps < 2 {
        return Err("need 0 < alpha_lo < alpha_hi and steps >= 2".into());
    }
    let top = lemma1_max(n, k).map_err(msg)?;
    let sparse = sparse_ref(n, k).unwrap_or(f64::NAN);
    let (a, b) = (alpha_lo.ln(), alpha_hi.ln());
    let mut out = Vec::with_capacity(4 * steps);
    for i in 0..steps {
        let alpha = (a + (b - a) * i as f64 / (steps - 1) as f64).exp();
        let p = DirichletParams::new(alpha, k).map_err(msg)?;
        out.extend([alpha, thm1_bound(p, n).map_err(msg)?, top, sparse]);
    }
    Ok(out)
}

/// `count` draws from D(α, 3), flattened as `[g1, g2, g3, g1, g2, g3, ...]`.
#[wasm_bindgen]
pub fn dirichlet_draws(alpha: f64, count: usize, seed: u32) -> Result<Vec<f64>, String> {
    let p = DirichletParams::new(alpha, 3).map_err(msg)?;
    let mut rng = RngHandle::new(seed.into(), 0).rng();
    let mut out = Vec::with_capacity(3 * count);
    for _ in 0..count {
        out.extend(sample_dirichlet(p, &mut rng).map_err(msg)?);
    }
    Ok(out)
}

/// Averages over `trials` mixtures of size n with k Dirichlet(α)-sized groups.
///
/// Layout: `[strat_error, pooled_error, strat_parity, pooled_parity]` (means over
/// trials), followed by k rows `[size, true_mean, strat_estimate]` and one
/// final `[pooled_estimate]` taken from the last trial.
#[wasm_bindgen]
pub fn stratification_demo(
    n: usize,
    k: usize,
    alpha: f64,
    epsilon: f64,
    trials: usize,
    seed: u32,
) -> Result<Vec<f64>, String> {
    if trials == 0 {
        return Err("trials must be at least 1".into());
    }
    let clip = ClipConfig::new(3.0, 0.05).map_err(msg)?;
    let omega = default_omega(k);
    let mut sums = [0.0; 4];
    let mut counts = [0usize; 4];
    let mut last = Vec::new();
    for t in 0..trials {
        let h = RngHandle::new(seed.into(), t as u64);
        let mix = gaussian_mixture(&MixtureSpec::new(n, k, alpha), &mut h.derive(1).rng())
            .map_err(msg)?;
        let s = &mix.sample;
        let pooled_values = s.pooled();
        let truth_global = s.global_mean();
        let scale = sample_sd(&pooled_values);
        let mut truth = s.group_means();
        truth.push(truth_global);

        let strat = stratified_laplace(s, &clip, epsilon, &mut h.derive(2).rng()).map_err(msg)?;
        let pooled =
            private_mean(&pooled_values, &clip, epsilon, &mut h.derive(2).rng()).map_err(msg)?;
        let mut strat_est = strat.group_estimates();
        strat_est.push(strat.global);
        let pooled_est = vec![pooled; k + 1];

        let values = [
            normalized_error(strat.global, truth_global, scale),
            normalized_error(pooled, truth_global, scale),
            parity_value(&truth, &strat_est, omega)?,
            parity_value(&truth, &pooled_est, omega)?,
        ];
        for (i, v) in values.into_iter().enumerate() {
            if let Some(v) = v {
                sums[i] += v;
                counts[i] += 1;
            }
        }
        if t + 1 == trials {
            last = s
                .sizes()
                .into_iter()
                .zip(s.group_means())
                .zip(strat.group_estimates())
                .flat_map(|((g, m), e)| [g as f64, m, e])
                .collect();
            last.push(pooled);
        }
    }
    let mut out: Vec<f64> = sums
        .iter()
        .zip(counts)
        .map(|(s, c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect();
    out.extend(last);
    Ok(out)
}

fn parity_value(truth: &[f64], est: &[f64], omega: f64) -> Result<Option<f64>, String> {
    let (p, skipped) = parity_error_skipping(truth, est, omega).map_err(msg)?;
    Ok((skipped < truth.len()).then_some(p))
}
