use qht_purity::rng::StreamKey;
use qht_purity::stats;
use qht_purity::tomography::{IdealSampler, SamplerPath};
use qht_purity::*;

#[test]
fn bias_stays_within_class_bound() {
    let state = StateModel::Vacuum;
    let alpha = 0.2;
    let l_min = state.class_norm(alpha, 2.0).unwrap();
    let sampler = IdealSampler::new(state, SamplerPath::Auto).unwrap();
    for (g, delta) in [0.3, 0.4, 0.5].into_iter().enumerate() {
        let est = replicate_estimates(&sampler, 0.9, delta, 400, 400, StreamKey::new(31).grid(g as u64)).unwrap();
        let se = (stats::sample_variance(&est) / est.len() as f64).sqrt();
        let bias = (stats::mean(&est) - state.true_purity()).abs();
        let bound = l_min * (-2.0 * alpha / (delta * delta)).exp();
        assert!(bias <= bound + 3.0 * se, "delta={delta}: bias {bias} > {bound} + 3*{se}");
    }
}

#[test]
fn expected_estimate_for_anisotropic_state_is_phase_average() {
    // A coherent state is not rotation invariant: the phase-blind estimator
    // targets ∫ s |ψ(s)|² / 2π rather than the purity.
    let state = StateModel::Coherent { nbar: 4.0 };
    let target = expected_estimate(&state, 0.05).unwrap();
    assert!(target < state.true_purity());
    let exact = finite_sample_variance(&state, 0.9, 0.4, 500).unwrap();
    assert!((exact.mean - expected_estimate(&state, 0.4).unwrap()).abs() < 1e-6);
}

#[test]
fn finite_variance_matches_monte_carlo() {
    let state = StateModel::Vacuum;
    let (eta, delta, n) = (0.9, 0.3, 400u64);
    let exact = finite_sample_variance(&state, eta, delta, n).unwrap();
    let sampler = IdealSampler::new(state, SamplerPath::Auto).unwrap();
    let est = replicate_estimates(&sampler, eta, delta, n, 2000, StreamKey::new(77)).unwrap();
    let v = stats::sample_variance(&est);
    // relative standard error of a variance from 2000 near-normal draws is about 3%
    assert!((v / exact.variance - 1.0).abs() < 0.12, "{v} vs {}", exact.variance);
    let se = (v / est.len() as f64).sqrt();
    assert!((stats::mean(&est) - exact.mean).abs() < 4.0 * se);
}

#[test]
fn bandwidth_rules_lie_in_unit_interval_and_shrink() {
    let classes = [
        SmoothnessClass::new(0.25, 1.0, 1.0).unwrap(),
        SmoothnessClass::new(0.1, 0.5, 1.0).unwrap(),
        SmoothnessClass::new(0.3, 1.5, 1.0).unwrap(),
        SmoothnessClass::new(0.2, 2.0, 1.0).unwrap(),
    ];
    let ns = [100u64, 1000, 10_000, 100_000, 1_000_000];
    for cls in &classes {
        for eta in [0.8, 0.9, 0.95] {
            let mut rules = vec![BandwidthRule::Adaptive1];
            if cls.r < 2.0 {
                rules.push(BandwidthRule::DeltaOpt);
            } else {
                rules.push(BandwidthRule::DeltaStar);
            }
            for rule in rules {
                let mut last = f64::INFINITY;
                for &n in &ns {
                    let d = rule.resolve(Some(cls), eta, n).unwrap();
                    assert!(d > 0.0 && d < 1.0, "{rule:?} {cls:?} eta={eta} n={n}: {d}");
                    assert!(d <= last, "{rule:?} not nonincreasing at n={n}");
                    last = d;
                }
            }
        }
    }
}

#[test]
fn rate_matches_solver_bandwidth() {
    let cls = SmoothnessClass::new(0.3, 1.2, 2.0).unwrap();
    for n in [1000u64, 100_000] {
        let delta = solve_delta_opt(&cls, 0.9, n).unwrap();
        let rate = theoretical_rate(&cls, 0.9, n, RateSide::Upper).unwrap();
        let x = 1.0 / delta;
        assert!((rate - 4.0 * (-4.0 * 0.3 * x.powf(1.2)).exp()).abs() <= 1e-14 * rate);
    }
}

#[test]
fn kernel_closed_form_and_evenness() {
    let (t, eta) = (3.0, 0.85);
    let a = (1.0 - eta) / 2.0;
    let g0 = kernel_g(0.0, t, eta).unwrap();
    assert!((g0 - (a * t * t).exp_m1() / a).abs() < 1e-10 * g0);
    for y in [0.1, 0.7, 2.3, 9.0] {
        assert!((kernel_g(y, t, eta).unwrap() - kernel_g(-y, t, eta).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let plan = ExperimentPlan {
        state: StateModel::Vacuum,
        eta: 0.9,
        n_grid: vec![200, 400],
        replicates: 8,
        bandwidth_rule: BandwidthRule::DeltaStar,
        class: Some(SmoothnessClass::new(0.2, 2.0, 1.0).unwrap()),
        seed: 2024,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_mse_experiment(&plan).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
