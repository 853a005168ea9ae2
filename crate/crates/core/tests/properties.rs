use proptest::prelude::*;

use qsklab::bounds::{dls_lower, falk_bruch_check, phi};
use qsklab::hilbert::{z_string, Operator};
use qsklab::model::{build_hamiltonian, gauge_transform, pair_count, CouplingSample, ModelParams};
use qsklab::observables::correlator_matrix;
use qsklab::spectral::{diagonalize, duhamel2, eigenvalues, expectation_real, make_gibbs};

fn couplings(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.5f64..2.5, pair_count(n))
}

fn state(n: usize, beta: f64, h: f64, gamma: Vec<f64>) -> (Operator, qsklab::spectral::GibbsState) {
    let params = ModelParams::new(n, beta, h, 1.0).unwrap();
    let sample = CouplingSample::new(n, gamma).unwrap();
    let h_op = build_hamiltonian(&params, &sample).unwrap();
    let gibbs = make_gibbs(diagonalize(&h_op).unwrap(), beta).unwrap();
    (h_op, gibbs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn duhamel_is_symmetric_and_below_plain_expectation(
        gamma in couplings(3), beta in 0.1f64..8.0, h in 0.0f64..2.0
    ) {
        let (_, g) = state(3, beta, h, gamma);
        let a = z_string(&[0, 1], 3).unwrap();
        let b = z_string(&[1, 2], 3).unwrap();
        let ab = duhamel2(&g, &a, &b).unwrap();
        let ba = duhamel2(&g, &b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        let aa = duhamel2(&g, &a, &a).unwrap();
        let a2 = expectation_real(&g, &a.product(&a).unwrap()).unwrap();
        prop_assert!(aa <= a2 + 1e-12);
        prop_assert!(aa > 0.0);
    }

    #[test]
    fn falk_bruch_chain_holds(gamma in couplings(3), beta in 0.1f64..10.0, h in 0.0f64..2.0) {
        let (h_op, g) = state(3, beta, h, gamma);
        let a = z_string(&[0, 1], 3).unwrap();
        let chain = falk_bruch_check(&g, &h_op, &a, beta).unwrap();
        prop_assert!(chain.all_satisfied(), "min margin {}", chain.min_margin());
    }

    #[test]
    fn gauge_flips_correlator_signs(
        gamma in couplings(4), signs in prop::collection::vec(prop::bool::ANY, 4),
        beta in 0.1f64..5.0, h in 0.0f64..1.5
    ) {
        let signs: Vec<i8> = signs.iter().map(|&s| if s { 1 } else { -1 }).collect();
        let sample = CouplingSample::new(4, gamma.clone()).unwrap();
        let flipped = gauge_transform(&sample, &signs).unwrap();
        let (_, g) = state(4, beta, h, gamma);
        let (_, gf) = state(4, beta, h, flipped.gamma().to_vec());
        let c = correlator_matrix(&g, 4).unwrap();
        let cf = correlator_matrix(&gf, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = f64::from(signs[i] * signs[j]) * c.zz(i, j);
                prop_assert!((cf.zz(i, j) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gauge_preserves_spectrum(gamma in couplings(4), mask in 0usize..16, h in 0.0f64..1.5) {
        let signs: Vec<i8> = (0..4).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let params = ModelParams::new(4, 1.0, h, 1.0).unwrap();
        let sample = CouplingSample::new(4, gamma).unwrap();
        let flipped = gauge_transform(&sample, &signs).unwrap();
        let e = eigenvalues(&build_hamiltonian(&params, &sample).unwrap()).unwrap();
        let ef = eigenvalues(&build_hamiltonian(&params, &flipped).unwrap()).unwrap();
        for (a, b) in e.iter().zip(&ef) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn phi_is_decreasing_and_above_dls(t in 0.0f64..50.0, dt in 1e-3f64..5.0) {
        let a = phi(t).unwrap();
        let b = phi(t + dt).unwrap();
        prop_assert!(b < a);
        prop_assert!(a <= 1.0);
        prop_assert!(a >= dls_lower(t) - 1e-12);
    }

    #[test]
    fn canonical_text_round_trips(gamma in couplings(5), seed in any::<u64>()) {
        let sample = CouplingSample::new(5, gamma).unwrap();
        let text = sample.to_canonical_text("gaussian", seed);
        let (back, kind, s) = CouplingSample::parse_canonical_text(&text).unwrap();
        prop_assert_eq!(kind, "gaussian");
        prop_assert_eq!(s, seed);
        prop_assert_eq!(back.gamma(), sample.gamma());
    }
}
