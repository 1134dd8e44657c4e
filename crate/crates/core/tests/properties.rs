mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use rotcov::certify::hoeffding_radius;
use rotcov::format::round_sig;
use rotcov::povm::{bin_element_between, build_binned_povm, AnglePartition, RoCDevice};
use rotcov::qubit::{identity2, partial_transpose, rotation, ComplexMatrix};
use rotcov::states::{joint_probabilities, make_state, NamedState};
use rotcov::steering::{correlation_table, random_state, steering_functional};

fn edges() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..PI - 0.001, 0..10).prop_map(|mut inner| {
        inner.extend([0.0, PI]);
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        inner
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn binned_povm_is_complete_and_positive(r in 0.0f64..=1.0, e in edges()) {
        let part = AnglePartition::from_edges(&e).unwrap();
        let povm = build_binned_povm(RoCDevice::new(r).unwrap(), &part).unwrap();
        let mut sum = ComplexMatrix::zeros(2).unwrap();
        for el in povm.elements() {
            prop_assert!(common::oracle_eigenvalues(el)[0] >= -1e-14);
            sum = &sum + el;
        }
        prop_assert!(sum.max_abs_diff(&identity2()) < 1e-10);
    }

    #[test]
    fn bins_rotate_covariantly(r in 0.0f64..=1.0, lo in 0.0f64..1.5, w in 0.01f64..1.5, psi in 0.0f64..0.1) {
        let dev = RoCDevice::new(r).unwrap();
        let u = rotation(psi);
        let shifted = bin_element_between(dev, lo + psi, lo + w + psi).unwrap();
        let conj = &(&u.adjoint() * &bin_element_between(dev, lo, lo + w).unwrap()) * &u;
        prop_assert!(shifted.max_abs_diff(&conj) < 1e-12);
    }

    #[test]
    fn partial_transpose_is_trace_preserving_involution(seed in any::<u64>()) {
        let x = common::random_hermitian(4, &mut common::rng(seed));
        let pt = partial_transpose(&x).unwrap();
        prop_assert!((pt.trace() - x.trace()).norm() < 1e-12);
        prop_assert!(partial_transpose(&pt).unwrap().max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn probability_tables_are_distributions(seed in any::<u64>(), ra in 0.0f64..=1.0, rb in 0.0f64..=1.0, e in edges()) {
        let rho = random_state(&mut common::rng(seed), 4).unwrap();
        let part = AnglePartition::from_edges(&e).unwrap();
        let pa = build_binned_povm(RoCDevice::new(ra).unwrap(), &part).unwrap();
        let pb = build_binned_povm(RoCDevice::new(rb).unwrap(), &AnglePartition::uniform(3).unwrap()).unwrap();
        let table = joint_probabilities(&rho, &pa, &pb).unwrap();
        prop_assert!(table.values().iter().all(|&p| p >= 0.0));
        prop_assert!((table.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steering_functional_is_bounded(seed in any::<u64>(), r in 0.05f64..=1.0) {
        let rho = random_state(&mut common::rng(seed), 4).unwrap();
        let known = steering_functional(&correlation_table(&rho, r, true).unwrap());
        let unknown = steering_functional(&correlation_table(&rho, r, false).unwrap());
        prop_assert!(known <= 2.0 * 2f64.sqrt() + 1e-12);
        prop_assert!((unknown - r * known).abs() < 1e-12);
    }

    #[test]
    fn werner_steering_is_linear_in_fidelity(f in 0.0f64..=1.0, r in 0.05f64..=1.0) {
        let rho = make_state(&NamedState::Werner { f }).unwrap();
        let s = steering_functional(&correlation_table(&rho, r, true).unwrap());
        prop_assert!((s - 2.0 * 2f64.sqrt() * f).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_radius_is_monotone(n in 1u64..10_000_000, c in 0.01f64..0.999) {
        let e = hoeffding_radius(n, c).unwrap();
        prop_assert!(hoeffding_radius(n + 1, c).unwrap() < e);
        prop_assert!(hoeffding_radius(n, c + 0.0005).unwrap() > e);
    }

    #[test]
    fn rounding_is_idempotent(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let once = round_sig(x);
        prop_assert_eq!(round_sig(once), once);
        prop_assert!((once - x).abs() <= 1e-11 * x.abs());
    }
}
