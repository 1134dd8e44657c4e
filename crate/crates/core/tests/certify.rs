mod common;

use rand::Rng;
use rotcov::certify::{
    certify, hoeffding_radius, min_negativity, CertificationStatus, ConfidenceMode, ConfidenceSettings, Statistics,
};
use rotcov::povm::{build_binned_povm, AnglePartition, RoCDevice};
use rotcov::qubit::{tensor, DensityMatrix};
use rotcov::sdp::SdpSettings;
use rotcov::states::{joint_probabilities, make_state, sample_record, NamedState};

fn exact_stats(rho: &DensityMatrix, r: f64, bins: usize) -> Statistics {
    let part = AnglePartition::uniform(bins).unwrap();
    let dev = RoCDevice::new(r).unwrap();
    let povm = build_binned_povm(dev, &part).unwrap();
    let table = joint_probabilities(rho, &povm, &povm).unwrap();
    Statistics::exact(table, part.clone(), part).unwrap()
}

fn perfect() -> RoCDevice {
    RoCDevice::perfect()
}

fn exact_min(stats: &Statistics) -> rotcov::certify::CertificationResult {
    min_negativity(
        stats,
        perfect(),
        perfect(),
        &ConfidenceSettings::exact(),
        &SdpSettings::default(),
    )
    .unwrap()
}

#[test]
fn exact_singlet_is_forced() {
    let res = exact_min(&exact_stats(&make_state(&NamedState::Singlet).unwrap(), 1.0, 8));
    assert_eq!(res.status, CertificationStatus::Entangled);
    assert!(
        (res.min_negativity.unwrap() - 0.5).abs() < 1e-4,
        "{:?}",
        res.min_negativity
    );
    let w = res.witness.unwrap();
    assert!((common::oracle_negativity(&w) - 0.5).abs() < 1e-4);
}

#[test]
fn exact_maximally_mixed_is_inconclusive() {
    let rho = DensityMatrix::maximally_mixed(4).unwrap();
    for (ra, rb) in [(1.0, 1.0), (0.3, 0.8), (0.0, 0.5)] {
        let (da, db) = (RoCDevice::new(ra).unwrap(), RoCDevice::new(rb).unwrap());
        let part = AnglePartition::uniform(4).unwrap();
        let pa = build_binned_povm(da, &part).unwrap();
        let pb = build_binned_povm(db, &part).unwrap();
        let table = joint_probabilities(&rho, &pa, &pb).unwrap();
        let stats = Statistics::exact(table, part.clone(), part).unwrap();
        let res = min_negativity(&stats, da, db, &ConfidenceSettings::exact(), &SdpSettings::default()).unwrap();
        assert_eq!(res.status, CertificationStatus::Inconclusive);
        assert!(res.min_negativity.unwrap() <= 1e-6);
    }
}

#[test]
fn perturbed_cell_is_infeasible() {
    let stats = exact_stats(&make_state(&NamedState::Singlet).unwrap(), 1.0, 4);
    let mut table = stats.table().clone();
    table.set(0, 0, table.get(0, 0) + 0.05);
    let bad = Statistics::exact(table, stats.partition_a().clone(), stats.partition_b().clone()).unwrap();
    let res = exact_min(&bad);
    assert_eq!(res.status, CertificationStatus::InfeasibleData);
    assert!(res.min_negativity.is_none());
    assert!(res.witness.is_none());
}

#[test]
fn bell_diagonal_family_matches_parametric_oracle() {
    for k in 0..=10 {
        let c = k as f64 / 10.0;
        let rho = common::bell_diagonal([-c, -c, -c]).unwrap();
        let got = exact_min(&exact_stats(&rho, 1.0, 8)).min_negativity.unwrap();
        let oracle = common::bell_diagonal_min_negativity(c);
        assert!((got - oracle).abs() < 1e-5, "c={c}: sdp {got}, oracle {oracle}");
    }
}

#[test]
fn witness_reproduces_constraints() {
    let part = AnglePartition::uniform(6).unwrap();
    let dev = RoCDevice::new(0.8).unwrap();
    let povm = build_binned_povm(dev, &part).unwrap();
    let rho = make_state(&NamedState::Werner { f: 0.7 }).unwrap();
    let sdp = SdpSettings::default();
    let table = joint_probabilities(&rho, &povm, &povm).unwrap();
    let exact = Statistics::exact(table.clone(), part.clone(), part.clone()).unwrap();
    let rec = sample_record(&rho, &povm, &povm, 20_000, 5).unwrap();
    let sampled = Statistics::from_record(&rec).unwrap();
    let runs = [
        (exact, ConfidenceSettings::exact()),
        (sampled, ConfidenceSettings::hoeffding(0.95).unwrap()),
    ];
    for (stats, settings) in runs {
        let res = min_negativity(&stats, dev, dev, &settings, &sdp).unwrap();
        let w = res.witness.expect("optimal run has a witness");
        for (i, a) in povm.elements().iter().enumerate() {
            for (j, b) in povm.elements().iter().enumerate() {
                let got = w.expectation(&tensor(a, b).unwrap());
                let p = stats.table().get(i, j);
                let eps = res.epsilon[i * povm.len() + j];
                assert!(
                    (got - p).abs() <= eps + 10.0 * sdp.tol_feas,
                    "cell ({i},{j}): {got} vs {p} ± {eps}"
                );
            }
        }
    }
}

#[test]
fn wider_boxes_never_raise_negativity() {
    let part = AnglePartition::uniform(4).unwrap();
    let dev = RoCDevice::new(0.95).unwrap();
    let povm = build_binned_povm(dev, &part).unwrap();
    let rho = make_state(&NamedState::Singlet).unwrap();
    let rec = sample_record(&rho, &povm, &povm, 100_000, 17).unwrap();
    let sdp = SdpSettings::default();
    let mut last = f64::INFINITY;
    for c in [0.5, 0.9, 0.99, 0.999, 0.999999] {
        let res = certify(&rec, dev, dev, &ConfidenceSettings::hoeffding(c).unwrap(), &sdp).unwrap();
        let v = res.min_negativity.unwrap();
        assert!(v <= last + 1e-7, "c={c}: {v} > {last}");
        last = v;
    }
}

#[test]
fn tiny_record_is_inconclusive() {
    let part = AnglePartition::uniform(8).unwrap();
    let dev = RoCDevice::new(0.9).unwrap();
    let povm = build_binned_povm(dev, &part).unwrap();
    let rho = make_state(&NamedState::Singlet).unwrap();
    let rec = sample_record(&rho, &povm, &povm, 10, 3).unwrap();
    let res = certify(
        &rec,
        dev,
        dev,
        &ConfidenceSettings::hoeffding(0.99).unwrap(),
        &SdpSettings::default(),
    )
    .unwrap();
    assert!((res.epsilon[0] - hoeffding_radius(10, 0.99).unwrap()).abs() < 1e-15);
    assert!(res.epsilon[0] > 0.5);
    assert_eq!(res.status, CertificationStatus::Inconclusive);
}

#[test]
fn sampled_singlet_and_mixture() {
    let part = AnglePartition::uniform(8).unwrap();
    let dev = RoCDevice::new(0.9).unwrap();
    let povm = build_binned_povm(dev, &part).unwrap();
    let settings = ConfidenceSettings::hoeffding(0.99).unwrap();
    let sdp = SdpSettings::default();
    let singlet = sample_record(&make_state(&NamedState::Singlet).unwrap(), &povm, &povm, 1_000_000, 42).unwrap();
    let res = certify(&singlet, dev, dev, &settings, &sdp).unwrap();
    assert_eq!(res.status, CertificationStatus::Entangled);
    assert_eq!(res.mode, ConfidenceMode::Hoeffding);
    let mixture = sample_record(
        &make_state(&NamedState::OrthoMixture).unwrap(),
        &povm,
        &povm,
        1_000_000,
        42,
    )
    .unwrap();
    assert_eq!(
        certify(&mixture, dev, dev, &settings, &sdp).unwrap().status,
        CertificationStatus::Inconclusive
    );
}

#[test]
fn hoeffding_needs_shot_count() {
    let stats = exact_stats(&make_state(&NamedState::Singlet).unwrap(), 1.0, 2);
    let settings = ConfidenceSettings::hoeffding(0.9).unwrap();
    assert!(min_negativity(&stats, perfect(), perfect(), &settings, &SdpSettings::default()).is_err());
}

#[test]
fn hoeffding_coverage() {
    // Bernoulli means with p = 0.3 over n = 2000 draws
    let (n, p, c) = (2000u64, 0.3, 0.9);
    let radius = hoeffding_radius(n, c).unwrap();
    let mut rng = common::rng(99);
    let trials = 2000;
    let mut covered = 0;
    for _ in 0..trials {
        let hits = (0..n).filter(|_| rng.random::<f64>() < p).count();
        if (hits as f64 / n as f64 - p).abs() < radius {
            covered += 1;
        }
    }
    assert!(covered as f64 / trials as f64 >= c);
}

#[test]
fn json_shape() {
    let res = exact_min(&exact_stats(&make_state(&NamedState::Singlet).unwrap(), 1.0, 4));
    let v: serde_json::Value = serde_json::from_str(&res.to_json().unwrap()).unwrap();
    for key in [
        "status",
        "min_negativity",
        "c",
        "epsilon",
        "n",
        "solver_iterations",
        "residuals",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["status"], "ENTANGLED");
}
