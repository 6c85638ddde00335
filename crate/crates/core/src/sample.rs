//! Partitioned real-valued samples.

use std::fmt;

use crate::error::{Error, Result};

/// Identifier of a stratum: the tuple of protected-attribute codes that defines it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey(pub Vec<u32>);

impl GroupKey {
    pub fn single(id: u32) -> Self {
        Self(vec![id])
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("all");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("_")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub key: GroupKey,
    pub values: Vec<f64>,
}

/// A dataset split into disjoint, nonempty strata.
///
/// Disjointness holds by construction: each value is owned by exactly one
/// stratum. Optional public weights are aggregation proportions known
/// without touching the private data.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedSample {
    strata: Vec<Stratum>,
    public_weights: Option<Vec<f64>>,
}

impl StratifiedSample {
    pub fn new(strata: Vec<Stratum>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(s) = strata.iter().find(|s| s.values.is_empty()) {
            return Err(Error::EmptyStratum(s.key.to_string()));
        }
        let mut keys: Vec<&GroupKey> = strata.iter().map(|s| &s.key).collect();
        keys.sort();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Shape("duplicate group key".into()));
        }
        Ok(Self {
            strata,
            public_weights: None,
        })
    }

    pub fn from_groups(groups: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            groups
                .into_iter()
                .enumerate()
                .map(|(i, values)| Stratum {
                    key: GroupKey::single(i as u32),
                    values,
                })
                .collect(),
        )
    }

    pub fn with_public_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, self.k())?;
        self.public_weights = Some(weights);
        Ok(self)
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn public_weights(&self) -> Option<&[f64]> {
        self.public_weights.as_deref()
    }

    pub fn k(&self) -> usize {
        self.strata.len()
    }

    pub fn n(&self) -> usize {
        self.strata.iter().map(|s| s.values.len()).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.strata.iter().map(|s| s.values.len()).collect()
    }

    pub fn keys(&self) -> Vec<GroupKey> {
        self.strata.iter().map(|s| s.key.clone()).collect()
    }

    /// Group proportions |Gᵢ|/n of this sample.
    pub fn size_weights(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.strata
            .iter()
            .map(|s| s.values.len() as f64 / n)
            .collect()
    }

    /// All values, strata concatenated in order.
    pub fn pooled(&self) -> Vec<f64> {
        self.strata
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .collect()
    }

    pub fn group_means(&self) -> Vec<f64> {
        self.strata.iter().map(|s| mean(&s.values)).collect()
    }

    pub fn global_mean(&self) -> f64 {
        let total: f64 = self.strata.iter().flat_map(|s| s.values.iter()).sum();
        total / self.n() as f64
    }

    pub fn into_strata(self) -> Vec<Stratum> {
        self.strata
    }
}

pub(crate) fn validate_weights(weights: &[f64], k: usize) -> Result<()> {
    if weights.len() != k {
        return Err(Error::InvalidWeights(format!(
            "expected {k} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_strata() {
        assert_eq!(
            StratifiedSample::from_groups(vec![vec![1.0], vec![]]),
            Err(Error::EmptyStratum("1".into()))
        );
        assert_eq!(
            StratifiedSample::from_groups(vec![]),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn weights_validation() {
        let s = StratifiedSample::from_groups(vec![vec![1.0], vec![2.0, 3.0]]).unwrap();
        assert!(s.clone().with_public_weights(vec![0.5, 0.5]).is_ok());
        assert!(s.clone().with_public_weights(vec![0.5, 0.6]).is_err());
        assert!(s.clone().with_public_weights(vec![1.5, -0.5]).is_err());
        assert!(s.with_public_weights(vec![1.0]).is_err());
    }

    #[test]
    fn size_accounting() {
        let s = StratifiedSample::from_groups(vec![vec![1.0, 3.0], vec![5.0]]).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.sizes(), vec![2, 1]);
        assert_eq!(s.group_means(), vec![2.0, 5.0]);
        assert_eq!(s.global_mean(), 3.0);
        assert_eq!(GroupKey(vec![1, 0]).to_string(), "1_0");
    }
}
