//! Parity error: normalized per-group errors plus an ω-weighted global term.

use crate::error::{ensure_positive, Error, Result};

/// `ω·|(f_{k+1} − M_{k+1})/f_{k+1}| + Σᵢ |(fᵢ − Mᵢ)/fᵢ|`.
///
/// The slices hold k group values followed by the global value. A zero
/// truth entry makes the normalization undefined and is reported.
pub fn parity_error(truth: &[f64], estimate: &[f64], omega: f64) -> Result<f64> {
    check_shapes(truth, estimate)?;
    ensure_positive("omega", omega)?;
    if let Some(index) = truth.iter().position(|&f| f == 0.0) {
        return Err(Error::UndefinedNormalization { index });
    }
    Ok(terms(truth, estimate, omega).map(|(_, t)| t).sum())
}

/// Like [`parity_error`] but skipping zero-normalized terms; returns the value and the skip count.
pub fn parity_error_skipping(truth: &[f64], estimate: &[f64], omega: f64) -> Result<(f64, usize)> {
    check_shapes(truth, estimate)?;
    ensure_positive("omega", omega)?;
    let mut skipped = 0;
    let mut total = 0.0;
    for (f, t) in terms(truth, estimate, omega) {
        if f == 0.0 {
            skipped += 1;
        } else {
            total += t;
        }
    }
    Ok((total, skipped))
}

/// |estimate − truth| / scale, or `None` when the scale is zero or not finite.
pub fn normalized_error(estimate: f64, truth: f64, scale: f64) -> Option<f64> {
    (scale > 0.0 && scale.is_finite()).then(|| (estimate - truth).abs() / scale)
}

/// Default ω = 1/k.
pub fn default_omega(k: usize) -> f64 {
    1.0 / k.max(1) as f64
}

fn check_shapes(truth: &[f64], estimate: &[f64]) -> Result<()> {
    if truth.len() != estimate.len() {
        return Err(Error::Shape(format!(
            "truth has {} entries, estimate {}",
            truth.len(),
            estimate.len()
        )));
    }
    if truth.len() < 2 {
        return Err(Error::Shape(
            "need k >= 1 group entries plus the global entry".into(),
        ));
    }
    Ok(())
}

fn terms<'a>(
    truth: &'a [f64],
    estimate: &'a [f64],
    omega: f64,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let k = truth.len() - 1;
    truth
        .iter()
        .zip(estimate)
        .enumerate()
        .map(move |(i, (&f, &m))| {
            let w = if i == k { omega } else { 1.0 };
            (f, w * ((f - m) / f).abs())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            parity_error(&[2.0, 4.0, 3.0], &[2.0, 4.0, 3.0], 0.5).unwrap(),
            0.0
        );
        assert_eq!(
            parity_error(&[2.0, 4.0, 3.0], &[1.0, 4.0, 3.0], 0.5).unwrap(),
            0.5
        );
        assert_eq!(
            parity_error(&[2.0, 0.0, 3.0], &[1.0, 4.0, 3.0], 0.5),
            Err(Error::UndefinedNormalization { index: 1 })
        );
        assert!(parity_error(&[1.0, 2.0], &[1.0], 0.5).is_err());
        assert_eq!(
            parity_error_skipping(&[2.0, 0.0, 3.0], &[1.0, 4.0, 3.0], 0.5).unwrap(),
            (0.5, 1)
        );
    }

    #[test]
    fn normalized_error_scale() {
        assert_eq!(normalized_error(1.5, 1.0, 2.0), Some(0.25));
        assert_eq!(normalized_error(1.5, 1.0, 0.0), None);
    }

    proptest! {
        #[test]
        fn scale_invariant(
            pairs in proptest::collection::vec((0.1f64..10.0, -10.0f64..10.0), 2..8),
            scale in 0.01f64..100.0,
        ) {
            let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let est: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let omega = default_omega(truth.len() - 1);
            let a = parity_error(&truth, &est, omega).unwrap();
            let ts: Vec<f64> = truth.iter().map(|x| x * scale).collect();
            let es: Vec<f64> = est.iter().map(|x| x * scale).collect();
            let b = parity_error(&ts, &es, omega).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
