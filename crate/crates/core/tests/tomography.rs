use std::f64::consts::PI;

use qht_purity::rng::{Purpose, StreamKey};
use qht_purity::stats::{ks_distance, ks_two_sample, population_variance};
use qht_purity::tomography::*;
use qht_purity::{Error, StateModel};
use rand::Rng;

const PHASES: [f64; 8] = [0.0, 0.3, 0.7, 1.0, 1.4, 1.9, 2.5, 3.0];

#[test]
fn forward_transform_of_density_matches_char_fn() {
    for state in StateModel::catalog() {
        let x_max = default_x_max(&state);
        for &phi in &PHASES {
            let table = conditional_density(&state, phi, x_max, 2048).unwrap();
            let mut t = -6.0;
            while t <= 6.0 {
                let err = (table.char_fn(t) - state.char_fn_radial(t, phi)).norm();
                assert!(err < 1e-6, "{state} phi={phi} t={t}: {err:e}");
                t += 0.25;
            }
        }
    }
}

#[test]
fn generic_sampler_matches_tabulated_cdf() {
    for state in StateModel::catalog() {
        let sampler = IdealSampler::new(state, SamplerPath::Generic).unwrap();
        // one phase on a table node, one between nodes
        for (k, &phi) in [PI * 64.0 / 256.0, 1.234].iter().enumerate() {
            let mut rng = StreamKey::new(11).grid(k as u64).rng(Purpose::Quadrature);
            let xs: Vec<f64> = (0..100_000).map(|_| sampler.draw_x(phi, &mut rng)).collect();
            let table = conditional_density(&state, phi, default_x_max(&state), 4096).unwrap();
            let d = ks_distance(&xs, |x| table.cdf_at(x));
            assert!(d < 0.01, "{state} phi={phi}: KS {d}");
        }
    }
}

#[test]
fn fast_and_generic_paths_agree_in_distribution() {
    for state in StateModel::catalog() {
        if matches!(state, StateModel::Cat { .. }) {
            continue;
        }
        let key = StreamKey::new(5);
        let fast = IdealSampler::new(state, SamplerPath::Auto).unwrap();
        let generic = IdealSampler::new(state, SamplerPath::Generic).unwrap();
        assert!(!fast.is_generic() && generic.is_generic());
        let a = fast.sample(50_000, &mut key.rng(Purpose::Phase), &mut key.rng(Purpose::Quadrature)).unwrap();
        let key = key.replicate(1);
        let b = generic.sample(50_000, &mut key.rng(Purpose::Phase), &mut key.rng(Purpose::Quadrature)).unwrap();
        let xa: Vec<f64> = a.iter().map(|s| s.x).collect();
        let xb: Vec<f64> = b.iter().map(|s| s.x).collect();
        let d = ks_two_sample(&xa, &xb);
        assert!(d < 0.02, "{state}: two-sample KS {d}");
    }
}

#[test]
fn noisy_char_fn_identity() {
    let n = 100_000;
    let eta = 0.8;
    let noise = NoiseConfig::new(eta).unwrap();
    for state in StateModel::catalog() {
        let sampler = IdealSampler::new(state, SamplerPath::Auto).unwrap();
        let phi = 0.9;
        let key = StreamKey::new(23);
        let mut q = key.rng(Purpose::Quadrature);
        let ideal: Vec<IdealSample> = (0..n).map(|_| IdealSample { x: sampler.draw_x(phi, &mut q), phi }).collect();
        let ys = apply_noise(&ideal, noise, &mut key.rng(Purpose::Noise));
        let mut t = -4.0;
        while t <= 4.0 {
            let (mut re, mut im) = (0.0, 0.0);
            for s in &ys {
                let (sn, cs) = (t * s.y).sin_cos();
                re += cs;
                im += sn;
            }
            let emp = num_complex::Complex64::new(re, im) / n as f64;
            let want = state.char_fn_radial(eta.sqrt() * t, phi) * (-t * t * (1.0 - eta) / 4.0).exp();
            assert!((emp - want).norm() < 4.0 / (n as f64).sqrt(), "{state} t={t}");
            t += 0.5;
        }
    }
}

#[test]
fn vacuum_output_variance() {
    let ys = simulate(&StateModel::Vacuum, NoiseConfig::new(0.9).unwrap(), 100_000, StreamKey::new(3)).unwrap();
    let v = population_variance(&ys.iter().map(|s| s.y).collect::<Vec<_>>());
    // Var(Y) = 0.9 * 0.5 + 0.05; the standard error of the variance is about 0.0022.
    assert!((v - 0.5).abs() < 0.009, "{v}");
    assert!(ys.iter().all(|s| (0.0..PI).contains(&s.phi)));
}

#[test]
fn simulation_is_reproducible() {
    let run = || {
        simulate(&StateModel::Thermal { beta: 1.0 }, NoiseConfig::new(0.9).unwrap(), 500, StreamKey::new(99)).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn noise_vanishes_as_efficiency_approaches_one() {
    let eta = 1.0 - 1e-10;
    let mut rng = StreamKey::new(1).rng(Purpose::Auxiliary);
    let ideal: Vec<IdealSample> = (0..1000).map(|_| IdealSample { x: rng.random::<f64>() - 0.5, phi: 1.0 }).collect();
    let noisy = apply_noise(&ideal, NoiseConfig::new(eta).unwrap(), &mut rng);
    let resid: Vec<f64> = ideal.iter().zip(&noisy).map(|(i, o)| o.y - eta.sqrt() * i.x).collect();
    assert!(population_variance(&resid) < 1e-9);
}

#[test]
fn csv_round_trip_and_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let mut rng = StreamKey::new(8).rng(Purpose::Auxiliary);
    let samples: Vec<HomodyneSample> = (0..1000)
        .map(|_| HomodyneSample { y: (rng.random::<f64>() - 0.5) * 1e3, phi: PI * rng.random::<f64>() })
        .collect();
    write_samples(&samples, &path).unwrap();
    assert_eq!(read_samples(&path).unwrap(), samples);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("y,phi\n") && !text.contains('\r'));

    std::fs::write(&path, "y,phi\n").unwrap();
    assert!(read_samples(&path).unwrap().is_empty());

    std::fs::write(&path, "y,phi\n0.5\n").unwrap();
    assert!(matches!(read_samples(&path), Err(Error::MalformedRow { line: 2, .. })));

    std::fs::write(&path, "y,phi\n0.5,inf\n").unwrap();
    assert!(matches!(read_samples(&path), Err(Error::MalformedRow { .. })));

    assert!(matches!(read_samples(&dir.path().join("missing.csv")), Err(Error::FileNotFound(_))));
}
