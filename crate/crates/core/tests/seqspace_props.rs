use lpspace::seqspace::{
    bp_block_weight, bp_norm, canonical_weights, classify_weights, lp_norm, tensor_norm, weighted_l2_norm, xpw_norm,
    xpw_norm_slice, BpBlock, CanonicalCase, CoefficientTensor, WeightCase, WeightSequence,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn p_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.5), Just(3.0), Just(4.0), Just(6.0), 2.1f64..10.0]
}

prop_compose! {
    fn weighted_pair()(p in p_strategy(), len in 1usize..12)
        (p in Just(p),
         w in prop::collection::vec(0.01f64..=1.0, len),
         x in prop::collection::vec(-5.0f64..5.0, len),
         y in prop::collection::vec(-5.0f64..5.0, len))
        -> (WeightSequence, Vec<f64>, Vec<f64>) {
        (WeightSequence::new(p, w).unwrap(), x, y)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_axioms((w, x, y) in weighted_pair(), c in -4.0f64..4.0) {
        let nx = xpw_norm_slice(&w, &x).unwrap().value;
        let ny = xpw_norm_slice(&w, &y).unwrap().value;
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!(close(xpw_norm_slice(&w, &scaled).unwrap().value, c.abs() * nx, 1e-12));
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(xpw_norm_slice(&w, &sum).unwrap().value <= nx + ny + 1e-12 * (nx + ny).max(1.0));
        let zero = vec![0.0; x.len()];
        prop_assert_eq!(xpw_norm_slice(&w, &zero).unwrap().value, 0.0);
        prop_assert_eq!(nx == 0.0, x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dominates_both_branches((w, x, _) in weighted_pair()) {
        let r = xpw_norm_slice(&w, &x).unwrap();
        let lp = lp_norm(&x, w.p());
        let l2 = weighted_l2_norm(w.weights(), &x);
        prop_assert!(r.value >= lp && r.value >= l2);
        prop_assert_eq!(r.value, r.components[&r.branch]);
        prop_assert!(close(r.value, lp.max(l2), 1e-15));
    }

    #[test]
    fn monotone_in_weights((w, x, _) in weighted_pair(), idx in 0usize..12, bump in 0.0f64..1.0) {
        let i = idx % w.len();
        let mut larger = w.weights().to_vec();
        larger[i] = (larger[i] + bump).min(1.0);
        let bigger = WeightSequence::new(w.p(), larger).unwrap();
        prop_assert!(xpw_norm_slice(&bigger, &x).unwrap().value >= xpw_norm_slice(&w, &x).unwrap().value);
    }

    #[test]
    fn rank_one_tensor_is_xpw((w, x, _) in weighted_pair()) {
        let t = CoefficientTensor::vector(x.clone()).unwrap();
        prop_assert!(close(tensor_norm(&w, &t).unwrap().value, xpw_norm(&w, &t).unwrap().value, 1e-12));
    }

    #[test]
    fn tensor_norm_axis_symmetry(
        p in p_strategy(),
        shape in prop::collection::vec(1usize..4, 2..4),
        seed in prop::collection::vec(-2.0f64..2.0, 27),
        w in prop::collection::vec(0.05f64..=1.0, 3),
        rot in 0usize..3,
    ) {
        let count: usize = shape.iter().product();
        let a = CoefficientTensor::new(shape.clone(), seed[..count].to_vec()).unwrap();
        let w = WeightSequence::new(p, w).unwrap();
        let rank = shape.len();
        let perm: Vec<usize> = (0..rank).map(|k| (k + rot) % rank).collect();
        let b = a.permute_axes(&perm).unwrap();
        prop_assert!(close(tensor_norm(&w, &a).unwrap().value, tensor_norm(&w, &b).unwrap().value, 1e-12));
    }

    #[test]
    fn single_block_bp_norm(p in p_strategy(), n in 1usize..40, coeffs in prop::collection::vec(-3.0f64..3.0, 1..10)) {
        let len = coeffs.len();
        let bp = bp_norm(p, &[BpBlock { n: 3, coeffs: vec![0.0; 2] }, BpBlock { n, coeffs: coeffs.clone() }]).unwrap();
        let v = WeightSequence::constant(p, bp_block_weight(p, n), len).unwrap();
        prop_assert!(close(bp.value, xpw_norm_slice(&v, &coeffs).unwrap().value, 1e-12));
    }
}

#[test]
fn canonical_cases_classify_as_tagged() {
    for p in [2.5, 3.0, 4.0, 8.0] {
        for (case, want) in [
            (CanonicalCase::A, WeightCase::A),
            (CanonicalCase::B, WeightCase::B),
            (CanonicalCase::C, WeightCase::C),
            (CanonicalCase::Star, WeightCase::D),
        ] {
            let w = canonical_weights(p, case, 500).unwrap();
            assert_eq!(classify_weights(&w, &[0.5, 0.1]).unwrap().case, want, "{case} at p = {p}");
        }
    }
}
