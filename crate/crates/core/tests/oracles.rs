//! Independent numerical oracles for the special functions and closed-form bounds.

use statrs::function::gamma::{digamma as statrs_digamma, ln_gamma};
use stratdp::special::digamma;
use stratdp::theory::{expected_sum_log_mc, lemma1_max, thm1_bound, DirichletParams};
use stratdp::RngHandle;

fn log_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..points).map(move |i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
}

#[test]
fn digamma_recurrence_on_fixed_points() {
    for x in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
        assert!((lhs - 1.0 / x).abs() <= 1e-10, "x={x}");
    }
}

#[test]
fn digamma_matches_central_difference_of_ln_gamma() {
    // Fixed step 1e-5; truncation error stays below 1e-6 for x >= 0.1.
    let h = 1e-5;
    for x in log_grid(0.1, 1e4, 120) {
        let fd = (ln_gamma(x + h) - ln_gamma(x - h)) / (2.0 * h);
        let got = digamma(x).unwrap();
        assert!((got - fd).abs() <= 1e-6, "x={x}: {got} vs {fd}");
    }
}

#[test]
fn digamma_matches_reference_implementation() {
    for x in log_grid(1e-3, 1e6, 200) {
        let got = digamma(x).unwrap();
        let want = statrs_digamma(x);
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1.0),
            "x={x}: {got} vs {want}"
        );
    }
}

#[test]
fn digamma_known_constants() {
    let euler = 0.577_215_664_901_532_9;
    assert!((digamma(1.0).unwrap() + euler).abs() < 1e-13);
    assert!((digamma(0.5).unwrap() + euler + 2.0 * 2f64.ln()).abs() < 1e-13);
}

fn max_log_sum_brute(n: usize, k: usize) -> f64 {
    fn go(n: usize, k: usize, acc: f64) -> f64 {
        if k == 1 {
            return acc + (n as f64).ln();
        }
        (1..=n - (k - 1))
            .map(|g| go(n - g, k - 1, acc + (g as f64).ln()))
            .fold(f64::NEG_INFINITY, f64::max)
    }
    go(n, k, 0.0)
}

#[test]
fn lemma_max_dominates_every_composition() {
    for k in 1..=4 {
        for n in k..=30 {
            let brute = max_log_sum_brute(n, k);
            let bound = lemma1_max(n, k).unwrap();
            assert!(brute <= bound + 1e-12, "n={n}, k={k}");
            if n % k == 0 {
                assert!((brute - bound).abs() <= 1e-12, "n={n}, k={k}");
            } else {
                assert!(brute < bound - 1e-12, "n={n}, k={k}");
            }
        }
    }
}

#[test]
fn thm1_bounds_monte_carlo_on_a_small_grid() {
    for (i, &(alpha, k)) in [(0.2, 2usize), (0.6, 5), (1.0, 10)].iter().enumerate() {
        let p = DirichletParams::new(alpha, k).unwrap();
        let mc = expected_sum_log_mc(p, 10_000, 20_000, &mut RngHandle::new(31, i as u64).rng())
            .unwrap();
        let bound = thm1_bound(p, 10_000).unwrap();
        assert!(
            mc.mean <= bound + 3.0 * mc.standard_error(),
            "alpha={alpha}, k={k}"
        );
    }
}
