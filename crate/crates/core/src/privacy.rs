//! Privacy budgets, the Laplace and Gaussian mechanisms, and composition.
//!
//! All logarithms are natural. Budgets are validated on construction, so a
//! `PrivacyBudget` value in hand always satisfies ε > 0, ρ > 0, δ ∈ [0, 1).

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_positive, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrivacyBudget {
    PureDp { epsilon: f64 },
    ApproxDp { epsilon: f64, delta: f64 },
    Zcdp { rho: f64 },
}

impl PrivacyBudget {
    pub fn pure(epsilon: f64) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        Ok(Self::PureDp { epsilon })
    }

    pub fn approx(epsilon: f64, delta: f64) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid("delta", format!("must lie in [0, 1), got {delta}")));
        }
        Ok(Self::ApproxDp { epsilon, delta })
    }

    pub fn zcdp(rho: f64) -> Result<Self> {
        ensure_positive("rho", rho)?;
        Ok(Self::Zcdp { rho })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::PureDp { .. } => "pure-dp",
            Self::ApproxDp { .. } => "approx-dp",
            Self::Zcdp { .. } => "zcdp",
        }
    }
}

impl fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PureDp { epsilon } => write!(f, "({epsilon}, 0)-DP"),
            Self::ApproxDp { epsilon, delta } => write!(f, "({epsilon}, {delta})-DP"),
            Self::Zcdp { rho } => write!(f, "{rho}-zCDP"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Laplace { scale: f64 },
    Gaussian { sd: f64 },
}

/// A privatized value together with the noise distribution that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub value: f64,
    pub mechanism: NoiseKind,
}

/// Draw from the centered Laplace distribution with scale `b` by inverting the CDF.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    // u in (-1/2, 1/2); the open lower end keeps the logarithm finite.
    let u: f64 = loop {
        let u = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            break u;
        }
    };
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

pub fn sample_gaussian<R: Rng + ?Sized>(sd: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

/// `value + Lap(Δf/ε)`, giving (ε, 0)-DP for a query of sensitivity Δf.
pub fn laplace_mechanism<R: Rng + ?Sized>(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<NoiseSample> {
    ensure_positive("sensitivity", sensitivity)?;
    ensure_positive("epsilon", epsilon)?;
    let scale = sensitivity / epsilon;
    Ok(NoiseSample {
        value: value + sample_laplace(scale, rng),
        mechanism: NoiseKind::Laplace { scale },
    })
}

/// `value + N(0, Δf²/(2ρ))`, giving ρ-zCDP.
pub fn gaussian_mechanism<R: Rng + ?Sized>(
    value: f64,
    sensitivity: f64,
    rho: f64,
    rng: &mut R,
) -> Result<NoiseSample> {
    ensure_positive("sensitivity", sensitivity)?;
    ensure_positive("rho", rho)?;
    let sd = (sensitivity * sensitivity / (2.0 * rho)).sqrt();
    Ok(NoiseSample {
        value: value + sample_gaussian(sd, rng),
        mechanism: NoiseKind::Gaussian { sd },
    })
}

/// Sequential composition: parameters add component-wise.
pub fn compose_sequential(budgets: &[PrivacyBudget]) -> Result<PrivacyBudget> {
    let (first, rest) = budgets
        .split_first()
        .ok_or_else(|| invalid("budgets", "at least one budget is required"))?;
    rest.iter().try_fold(*first, |acc, b| match (acc, *b) {
        (PrivacyBudget::PureDp { epsilon: a }, PrivacyBudget::PureDp { epsilon: b }) => {
            Ok(PrivacyBudget::PureDp { epsilon: a + b })
        }
        (
            PrivacyBudget::ApproxDp {
                epsilon: e1,
                delta: d1,
            },
            PrivacyBudget::ApproxDp {
                epsilon: e2,
                delta: d2,
            },
        ) => PrivacyBudget::approx(e1 + e2, d1 + d2),
        (PrivacyBudget::Zcdp { rho: a }, PrivacyBudget::Zcdp { rho: b }) => {
            Ok(PrivacyBudget::Zcdp { rho: a + b })
        }
        (a, b) => Err(Error::IncompatibleBudgets(a.kind(), b.kind())),
    })
}

/// Parallel composition over disjoint inputs: the budget is unchanged.
pub fn compose_parallel(budget: PrivacyBudget, partition_disjoint: bool) -> Result<PrivacyBudget> {
    if partition_disjoint {
        Ok(budget)
    } else {
        Err(Error::DisjointnessViolation)
    }
}

/// (ε, 0)-DP implies ε²/2-zCDP.
pub fn pure_dp_to_zcdp(epsilon: f64) -> Result<PrivacyBudget> {
    ensure_positive("epsilon", epsilon)?;
    PrivacyBudget::zcdp(epsilon * epsilon / 2.0)
}

/// ρ-zCDP to (ε, δ)-DP through the chain ε₀ = √(2ρ), ε = ε₀·√(2 ln(1/δ)).
///
/// This is looser than the usual ρ + 2√(ρ ln(1/δ)) conversion.
pub fn zcdp_to_approx_dp(rho: f64, delta: f64) -> Result<PrivacyBudget> {
    ensure_positive("rho", rho)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let eps0 = (2.0 * rho).sqrt();
    PrivacyBudget::approx(eps0 * (2.0 * (1.0 / delta).ln()).sqrt(), delta)
}

/// Upper bound e^(−α) on Pr[|Y| ≥ α·b] for Y ~ Lap(b).
pub fn laplace_tail_probability(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(invalid("alpha", format!("must be >= 0, got {alpha}")));
    }
    Ok((-alpha).exp())
}
