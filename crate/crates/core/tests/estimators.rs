use proptest::prelude::*;
use stratdp::coinpress::{strat_coinpress, uvm_rec, CoinpressConfig};
use stratdp::datagen::{gaussian_mixture, MixtureSpec};
use stratdp::mean::{group_private_means, stratified_mean, ClipConfig};
use stratdp::parity::{default_omega, parity_error};
use stratdp::privacy::{compose_parallel, compose_sequential, sample_gaussian};
use stratdp::{PrivacyBudget, RngHandle, StratifiedSample};

proptest! {
    #[test]
    fn sequential_composition_adds_componentwise(eps in proptest::collection::vec(0.01f64..5.0, 1..10)) {
        let pure: Vec<PrivacyBudget> = eps.iter().map(|&e| PrivacyBudget::PureDp { epsilon: e }).collect();
        prop_assert_eq!(compose_sequential(&pure).unwrap(), PrivacyBudget::PureDp { epsilon: eps.iter().sum() });
        let z: Vec<PrivacyBudget> = eps.iter().map(|&e| PrivacyBudget::Zcdp { rho: e }).collect();
        prop_assert_eq!(compose_sequential(&z).unwrap(), PrivacyBudget::Zcdp { rho: eps.iter().sum() });
    }

    #[test]
    fn parallel_composition_is_identity(e in 0.01f64..5.0, d in 1e-9f64..0.1) {
        for b in [PrivacyBudget::PureDp { epsilon: e }, PrivacyBudget::ApproxDp { epsilon: e, delta: d }, PrivacyBudget::Zcdp { rho: e }] {
            prop_assert_eq!(compose_parallel(b, true).unwrap(), b);
        }
    }

    #[test]
    fn group_means_recombine_to_global(groups in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 1..30), 1..8)) {
        let s = StratifiedSample::from_groups(groups).unwrap();
        let combined = stratified_mean(&s.group_means(), &s.sizes()).unwrap();
        let direct = s.pooled().iter().sum::<f64>() / s.n() as f64;
        prop_assert!((combined - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }
}

#[test]
fn noiseless_limit_recovers_empirical_mean() {
    let clip = ClipConfig::new(3.0, 0.05).unwrap();
    let mut rng = RngHandle::new(5, 0).rng();
    for k in [1, 3, 7] {
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..200)
                    .map(|_| i as f64 * 0.3 + sample_gaussian(0.5, &mut rng))
                    .collect()
            })
            .collect();
        let s = StratifiedSample::from_groups(groups).unwrap();
        let g = group_private_means(&s, &clip, 1e6, &mut rng).unwrap();
        let est = stratified_mean(&g.estimates, &s.sizes()).unwrap();
        assert!((est - s.global_mean()).abs() <= 1e-3, "k={k}");
    }
}

#[test]
fn clipping_is_rare_when_means_are_covered() {
    let mus = [-1.5, -0.5, 0.5, 1.5];
    for gamma in [0.01, 0.05] {
        let clip = ClipConfig::new(3.0, gamma).unwrap();
        let trials = 300;
        let clipped = (0..trials)
            .filter(|&t| {
                let mut rng = RngHandle::new(77, t).rng();
                let m = 2_500;
                mus.iter().any(|&mu| {
                    (0..m).any(|_| (mu + sample_gaussian(1.0, &mut rng)).abs() > clip.threshold(m))
                })
            })
            .count();
        let frac = clipped as f64 / trials as f64;
        assert!(
            frac <= 5.0 * mus.len() as f64 * gamma,
            "gamma={gamma}: {frac}"
        );
    }
}

#[test]
fn stratified_coinpress_has_lower_parity_error() {
    let (n, k) = (10_000, 4);
    let (mut strat, mut pooled) = (0.0, 0.0);
    let seeds = 50;
    for seed in 0..seeds {
        let h = RngHandle::new(2024, seed);
        // n/k-sized groups: a Dirichlet draw can leave a group too small for the recursion to localize.
        let spec = MixtureSpec {
            equal_sizes: true,
            ..MixtureSpec::new(n, k, 1.0)
        };
        let mix = gaussian_mixture(&spec, &mut h.derive(1).rng()).unwrap();
        let s = &mix.sample;
        let cfg = CoinpressConfig::new(
            (-100.0, 100.0),
            2f64.max(mix.population_sd()),
            vec![0.05, 0.05, 0.05, 0.25],
            0.1,
        )
        .unwrap();
        let mut truth = s.group_means();
        truth.push(s.global_mean());
        let sc = strat_coinpress(s, &cfg, &s.size_weights(), &mut h.derive(2).rng()).unwrap();
        let mut est = sc.group_estimates();
        est.push(sc.global);
        strat += parity_error(&truth, &est, default_omega(k)).unwrap();
        let (g, _) = uvm_rec(&s.pooled(), &cfg, &mut h.derive(2).rng()).unwrap();
        pooled += parity_error(&truth, &vec![g; k + 1], default_omega(k)).unwrap();
    }
    let (strat, pooled) = (strat / seeds as f64, pooled / seeds as f64);
    assert!(strat < pooled, "{strat} vs {pooled}");
}
