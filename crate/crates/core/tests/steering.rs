use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rotcov::povm::RoCDevice;
use rotcov::qubit::{pauli, Axis, DensityMatrix};
use rotcov::states::{make_state, NamedState};
use rotcov::steering::{
    chsh_random_search, chsh_score, correlation_table, pauli_from_roc, steering_functional, BellConfiguration,
    CorrelationTable, SteeringReport,
};

#[test]
fn post_processed_paulis() {
    for r in [1.0, 0.5, 0.37, 1e-3] {
        let p = pauli_from_roc(r).unwrap();
        assert!(p.x.max_abs_diff(&pauli(Axis::X)) < 1e-12);
        assert!(p.y.max_abs_diff(&pauli(Axis::Y)) < 1e-12);
        for m in [&p.x, &p.y, &p.x_unscaled, &p.y_unscaled] {
            assert!(m.is_hermitian(1e-15));
            assert!(m.trace().norm() < 1e-15);
        }
    }
    let half = pauli_from_roc(0.5).unwrap();
    assert!(half.x_unscaled.max_abs_diff(&pauli(Axis::X).scale_real(1.0 / PI)) < 1e-15);
    assert!(pauli_from_roc(0.0).is_err());
}

#[test]
fn werner_tables() {
    for k in 0..=20 {
        let f = k as f64 / 20.0;
        let rho = make_state(&NamedState::Werner { f }).unwrap();
        let known = correlation_table(&rho, 0.8, true).unwrap();
        assert!((known.xx + f).abs() < 1e-12 && (known.yy + f).abs() < 1e-12);
        assert!((steering_functional(&known) - 2.0 * SQRT_2 * f).abs() < 1e-9);
        let unknown = correlation_table(&rho, 0.8, false).unwrap();
        assert!((steering_functional(&unknown) - 2.0 * SQRT_2 * f * 0.8).abs() < 1e-9);
    }
    assert_eq!(steering_functional(&CorrelationTable::zero()), 0.0);
    assert!(CorrelationTable::new(1.1, 0.0, 0.0, 0.0).is_err());
}

#[test]
fn detection_boundary() {
    let step = 1e-3;
    let first_detected = |r: f64, known: bool| {
        (0..=1000)
            .map(|k| k as f64 * step)
            .find(|&f| {
                let rho = make_state(&NamedState::Werner { f }).unwrap();
                SteeringReport::new(correlation_table(&rho, r, known).unwrap(), known).demonstrated
            })
            .unwrap()
    };
    assert!((first_detected(0.9, true) - FRAC_1_SQRT_2).abs() <= step);
    let r = 0.95;
    let f = first_detected(r, false);
    assert!((f * r - FRAC_1_SQRT_2).abs() <= step);
}

#[test]
fn report_json() {
    let rho = make_state(&NamedState::Singlet).unwrap();
    let rep = SteeringReport::new(correlation_table(&rho, 1.0, true).unwrap(), true);
    let v: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
    assert_eq!(v["threshold"], 2.0);
    assert_eq!(v["demonstrated"], true);
    assert_eq!(v["assumptions"], "alice-trusted");
    assert_eq!(v["r_known"], true);
}

#[test]
fn canonical_chsh() {
    let rho = make_state(&NamedState::Singlet).unwrap();
    let s = chsh_score(
        &rho,
        &BellConfiguration::canonical(),
        RoCDevice::perfect(),
        RoCDevice::perfect(),
    )
    .unwrap();
    let expected = (2.0 / PI).powi(2) * 2.0 * SQRT_2;
    assert!((s.abs() - expected).abs() < 1e-12, "{s}");
    let zero = RoCDevice::new(0.0).unwrap();
    let mixed = DensityMatrix::maximally_mixed(4).unwrap();
    for state in [&rho, &mixed] {
        assert!(
            chsh_score(state, &BellConfiguration::canonical(), zero, zero)
                .unwrap()
                .abs()
                < 1e-15
        );
    }
}

#[test]
fn random_search_stays_local() {
    let res = chsh_random_search(100, 20, 1).unwrap();
    assert!(res.max_abs_score <= 2.0 + 1e-6, "{}", res.max_abs_score);
    assert!(res.max_abs_score > 0.5);
    assert_eq!(
        chsh_random_search(10, 5, 3).unwrap(),
        chsh_random_search(10, 5, 3).unwrap()
    );
}
