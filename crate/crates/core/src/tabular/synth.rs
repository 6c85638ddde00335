use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{ensure_positive, Error, Result};
use crate::parity::{default_omega, parity_error_skipping};
use crate::privacy::{compose_parallel, sample_laplace, PrivacyBudget};
use crate::sample::{validate_weights, GroupKey};

use super::dataset::{partition, Partition, TabularDataset};

/// What to do when every noisy marginal of a stratum carries no mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    #[default]
    Error,
    /// Sample that stratum's attributes uniformly.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub data: TabularDataset,
    pub budget: PrivacyBudget,
    /// Noisy marginals that had no mass left after clamping and were replaced by uniform.
    pub uniform_fallbacks: usize,
    /// Strata whose marginals were all empty and were sampled uniformly.
    pub degenerate_strata: usize,
}

/// Group shares |Gᵢ|/n of a partition, keyed for [`strat_histogram_synth`].
pub fn size_weights(p: &Partition) -> Vec<(GroupKey, f64)> {
    let n: usize = p.sizes().iter().sum();
    p.groups
        .iter()
        .map(|(k, rows)| (k.clone(), rows.len() as f64 / n as f64))
        .collect()
}

/// Per-stratum noisy 1-way marginals, sampled independently.
///
/// Each stratum measures every non-group attribute's histogram with Laplace
/// noise at ε/m (m attributes, sensitivity 1), clamps negatives to zero and
/// renormalizes. Strata are disjoint, so the release is (ε, 0)-DP overall.
/// Output records draw a group from `public_weights`, then each attribute
/// from that group's marginals. Attributes are treated as independent
/// within a group, so cross-attribute correlation is not reproduced.
pub fn strat_histogram_synth<R: Rng + ?Sized>(
    data: &TabularDataset,
    group_attrs: &[usize],
    epsilon: f64,
    public_weights: &[(GroupKey, f64)],
    n_out: usize,
    policy: DegeneratePolicy,
    rng: &mut R,
) -> Result<SynthOutput> {
    ensure_positive("epsilon", epsilon)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let schema = data.schema();
    let parts = partition(data, group_attrs)?;
    let weights = align_weights(&parts, public_weights)?;
    let free: Vec<usize> = (0..schema.len())
        .filter(|a| !group_attrs.contains(a))
        .collect();
    let eps_each = epsilon / free.len().max(1) as f64;

    let mut uniform_fallbacks = 0;
    let mut degenerate_strata = 0;
    let mut samplers: Vec<Vec<WeightedIndex<f64>>> = Vec::with_capacity(parts.k());
    for (key, rows) in &parts.groups {
        let mut dists = Vec::with_capacity(free.len());
        let mut empty = 0;
        for &a in &free {
            let mut counts = vec![0.0; schema.domain(a) as usize];
            for &r in rows {
                counts[data.records()[r][a] as usize] += 1.0;
            }
            for c in counts.iter_mut() {
                *c = (*c + sample_laplace(1.0 / eps_each, rng)).max(0.0);
            }
            if counts.iter().sum::<f64>() <= 0.0 {
                empty += 1;
                counts.iter_mut().for_each(|c| *c = 1.0);
            }
            dists.push(WeightedIndex::new(&counts).expect("positive mass"));
        }
        if !free.is_empty() && empty == free.len() {
            if policy == DegeneratePolicy::Error {
                return Err(Error::DegenerateStratum(key.to_string()));
            }
            degenerate_strata += 1;
        } else {
            uniform_fallbacks += empty;
        }
        samplers.push(dists);
    }

    let group_dist =
        WeightedIndex::new(&weights).map_err(|e| Error::InvalidWeights(e.to_string()))?;
    let mut records = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        let g = group_dist.sample(rng);
        let mut rec = vec![0u32; schema.len()];
        for (&a, &v) in group_attrs.iter().zip(&parts.groups[g].0 .0) {
            rec[a] = v;
        }
        for (&a, d) in free.iter().zip(&samplers[g]) {
            rec[a] = d.sample(rng) as u32;
        }
        records.push(rec);
    }
    Ok(SynthOutput {
        data: TabularDataset::new(schema.clone(), records)?,
        // ε/m per attribute composes back to ε; strata compose in parallel.
        budget: compose_parallel(PrivacyBudget::pure(epsilon)?, true)?,
        uniform_fallbacks,
        degenerate_strata,
    })
}

fn align_weights(parts: &Partition, public_weights: &[(GroupKey, f64)]) -> Result<Vec<f64>> {
    if let Some((k, _)) = public_weights
        .iter()
        .find(|(k, _)| !parts.groups.iter().any(|(g, _)| g == k))
    {
        return Err(Error::InvalidWeights(format!(
            "weight given for group `{k}` with no records"
        )));
    }
    let w = parts
        .groups
        .iter()
        .map(|(g, _)| {
            public_weights
                .iter()
                .find(|(k, _)| k == g)
                .map(|(_, w)| *w)
                .ok_or_else(|| Error::MissingGroupWeight(g.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_weights(&w, parts.k())?;
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularParity {
    /// (attribute index, parity error); `None` when every term was undefined.
    pub per_attribute: Vec<(usize, Option<f64>)>,
    /// Mean over attributes with a defined value.
    pub aggregate: f64,
    /// Terms skipped because the true mean was zero.
    pub undefined_terms: usize,
    /// Real groups absent from the synthetic data (estimated as 0).
    pub missing_groups: usize,
}

/// Parity error of per-group attribute means, for every non-group attribute.
pub fn parity_error_tabular(
    real: &TabularDataset,
    synth: &TabularDataset,
    group_attrs: &[usize],
    omega: Option<f64>,
) -> Result<TabularParity> {
    if real.schema() != synth.schema() {
        return Err(Error::Shape("datasets have different schemas".into()));
    }
    if real.is_empty() || synth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rp = partition(real, group_attrs)?;
    let sp = partition(synth, group_attrs)?;
    let omega = omega.unwrap_or_else(|| default_omega(rp.k()));
    let missing_groups = rp
        .groups
        .iter()
        .filter(|(k, _)| !sp.groups.iter().any(|(g, _)| g == k))
        .count();

    let free = (0..real.schema().len()).filter(|a| !group_attrs.contains(a));
    let mut per_attribute = Vec::new();
    let mut undefined_terms = 0;
    for a in free {
        let truth = group_and_global_means(real, &rp, &rp, a);
        let est = group_and_global_means(synth, &sp, &rp, a);
        let (value, skipped) = parity_error_skipping(&truth, &est, omega)?;
        undefined_terms += skipped;
        per_attribute.push((a, (skipped < truth.len()).then_some(value)));
    }
    let defined: Vec<f64> = per_attribute.iter().filter_map(|(_, v)| *v).collect();
    let aggregate = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(TabularParity {
        per_attribute,
        aggregate,
        undefined_terms,
        missing_groups,
    })
}

/// Means of attribute `a` for every group of `order` (0 when absent from `p`), then the global mean.
fn group_and_global_means(
    data: &TabularDataset,
    p: &Partition,
    order: &Partition,
    a: usize,
) -> Vec<f64> {
    let recs = data.records();
    let mut out: Vec<f64> = order
        .groups
        .iter()
        .map(|(key, _)| match p.groups.iter().find(|(g, _)| g == key) {
            Some((_, rows)) => {
                rows.iter().map(|&r| recs[r][a] as f64).sum::<f64>() / rows.len() as f64
            }
            None => 0.0,
        })
        .collect();
    out.push(data.column(a).map(f64::from).sum::<f64>() / data.len() as f64);
    out
}
