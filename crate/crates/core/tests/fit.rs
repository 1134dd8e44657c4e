mod common;

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rotcov::error::Error;
use rotcov::fit::{fit_contrast, synthetic_series, AngularPowerSeries};

fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[test]
fn reference_contrasts_roundtrip() {
    for (r, phi0) in [(0.704, 0.3), (0.610, 1.1)] {
        let f = fit_contrast(&synthetic_series(1.0, r, phi0, 72, 0.0, 0).unwrap()).unwrap();
        assert!((f.r - r).abs() < 1e-10);
        assert!(phase_distance(f.phi0, phi0) < 1e-10);
        assert!(f.residual_rms < 1e-12);
        assert!(!f.clamped);
    }
}

#[test]
fn noisy_roundtrip() {
    for seed in 0..20 {
        let f = fit_contrast(&synthetic_series(3.2, 0.610, 0.4, 72, 0.01, seed).unwrap()).unwrap();
        assert!((f.r - 0.610).abs() < 0.01, "seed {seed}: {}", f.r);
        assert!(f.sigma_r > 0.0 && f.sigma_r < 0.01);
    }
}

#[test]
fn random_noiseless_roundtrips() {
    let mut rng = common::rng(314);
    for _ in 0..100 {
        let a = rng.random_range(0.1..50.0);
        let r = rng.random_range(0.0..1.0);
        let phi0 = rng.random_range(0.0..PI);
        let f = fit_contrast(&synthetic_series(a, r, phi0, 36, 0.0, 0).unwrap()).unwrap();
        assert!((f.a - a).abs() < 1e-9 * a.max(1.0));
        assert!((f.r - r).abs() < 1e-9);
        if r > 1e-6 {
            assert!(phase_distance(f.phi0, phi0) < 1e-9);
        }
    }
}

#[test]
fn rotation_shifts_phase() {
    let base = synthetic_series(2.0, 0.5, 0.2, 40, 0.02, 8).unwrap();
    let f0 = fit_contrast(&base).unwrap();
    for delta_deg in [10.0, 45.0, 123.0] {
        let shifted: Vec<(f64, f64)> = base
            .angles()
            .iter()
            .zip(base.powers())
            .map(|(phi, p)| ((phi.to_degrees() + delta_deg).rem_euclid(360.0), *p))
            .collect();
        let f = fit_contrast(&AngularPowerSeries::from_degrees(&shifted).unwrap()).unwrap();
        assert!((f.a - f0.a).abs() < 1e-9 && (f.r - f0.r).abs() < 1e-9);
        let expected = (f0.phi0 - f64::to_radians(delta_deg)).rem_euclid(PI);
        assert!(phase_distance(f.phi0, expected) < 1e-9);
    }
}

#[test]
fn uncertainty_scales_with_sample_count() {
    let mean_sigma = |n: usize| {
        (0..40)
            .map(|s| {
                fit_contrast(&synthetic_series(1.0, 0.6, 0.0, n, 0.02, 1000 + s).unwrap())
                    .unwrap()
                    .sigma_r
            })
            .sum::<f64>()
            / 40.0
    };
    let small = mean_sigma(50);
    let large = mean_sigma(800);
    let ratio = small / large;
    assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn loading() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let mut f = std::fs::File::create(&good).unwrap();
    writeln!(f, "angle_deg,power_mw").unwrap();
    for k in 0..36 {
        writeln!(
            f,
            "{},{}",
            k * 10,
            1.0 + 0.5 * (2.0 * f64::to_radians(k as f64 * 10.0)).cos()
        )
        .unwrap();
    }
    drop(f);
    let s = AngularPowerSeries::load(&good).unwrap();
    assert_eq!(s.len(), 36);
    assert!((fit_contrast(&s).unwrap().r - 0.5).abs() < 1e-12);

    let two = "angle_deg,power_mw\n0,1\n90,2\n";
    assert!(AngularPowerSeries::read_csv(two.as_bytes()).is_err());
    let bad = "angle_deg,power_mw\n0,1\n10,1\n20,x\n30,1\n40,1\n";
    match AngularPowerSeries::read_csv(bad.as_bytes()) {
        Err(Error::Parse { row, .. }) => assert_eq!(row, 4),
        other => panic!("unexpected {other:?}"),
    }
    let negative = "angle_deg,power_mw\n0,1\n10,1\n20,-1\n30,1\n40,1\n";
    assert!(AngularPowerSeries::read_csv(negative.as_bytes()).is_err());
    assert!(AngularPowerSeries::read_csv("angle,power\n".as_bytes()).is_err());
}

#[test]
fn csv_roundtrip_and_curve() {
    let s = synthetic_series(1.5, 0.704, 0.3, 24, 0.0, 0).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = AngularPowerSeries::read_csv(buf.as_slice()).unwrap();
    let f = fit_contrast(&back).unwrap();
    assert!((f.r - 0.704).abs() < 1e-10);
    let mut curve = Vec::new();
    f.write_curve(360, &mut curve).unwrap();
    let text = String::from_utf8(curve).unwrap();
    assert!(text.starts_with("angle_deg,power_fit_mw\n0,"));
    assert_eq!(text.lines().count(), 361);
    let v: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
    for key in ["a", "r", "phi0", "sigma_r", "residual_rms"] {
        assert!(v.get(key).is_some());
    }
}
