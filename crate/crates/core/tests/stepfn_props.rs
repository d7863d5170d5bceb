use lpspace::stepfn::{
    cond_expect, disjoint_sum, dyadic_level, squeeze, Coordinate, CoordinateSpace, StepFunction,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn probs(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    let mut out: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = out[..out.len() - 1].iter().sum();
    *out.last_mut().unwrap() = 1.0 - head;
    out
}

prop_compose! {
    fn coordinate()(raw in prop::collection::vec(0.1f64..1.0, 1..5)) -> Coordinate {
        Coordinate::interval(probs(&raw)).unwrap()
    }
}

prop_compose! {
    /// A function of coordinate 0 alone.
    fn one_coord_fn()(c in coordinate())
        (values in prop::collection::vec(-3.0f64..3.0, c.cells()), c in Just(c)) -> StepFunction {
        StepFunction::on_coordinate(c, values).unwrap()
    }
}

prop_compose! {
    /// A function on two coordinates, depending on a random subset of them.
    fn two_coord_fn()(a in coordinate(), b in coordinate(), mask in 0u8..4)
        (values in prop::collection::vec(-3.0f64..3.0, 16), a in Just(a), b in Just(b), mask in Just(mask))
        -> StepFunction {
        let support: Vec<usize> = (0..2).filter(|i| mask >> i & 1 == 1).collect();
        let n = support.iter().map(|&i| [a.cells(), b.cells()][i]).product::<usize>();
        StepFunction::new(CoordinateSpace::new(vec![a, b]), support, values[..n].to_vec()).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn integrate_is_linear(f in two_coord_fn(), g in two_coord_fn(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let combo = f.scale(a).add(&g.scale(b)).unwrap();
        prop_assert!(close(combo.integrate(), a * f.integrate() + b * g.integrate(), 1e-12));
    }

    #[test]
    fn disjoint_supports_factorize(f in one_coord_fn(), g in one_coord_fn()) {
        // move g onto a second coordinate
        let space = CoordinateSpace::new(vec![f.space().coords[0].clone(), g.space().coords[0].clone()]);
        let f2 = StepFunction::new(space.clone(), vec![0], f.values().to_vec()).unwrap();
        let g2 = StepFunction::new(space, vec![1], g.values().to_vec()).unwrap();
        prop_assert!(close(f2.mul(&g2).unwrap().integrate(), f.integrate() * g.integrate(), 1e-12));
    }

    #[test]
    fn refinement_is_associative_and_representation_free(f in two_coord_fn(), g in two_coord_fn(), h in two_coord_fn()) {
        let left = f.add(&g).unwrap().add(&h).unwrap();
        let right = f.add(&g.add(&h).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-12);
        // adding zero on a finer grid leaves the integral alone
        let refined = f.add(&g.scale(0.0)).unwrap();
        prop_assert!(close(refined.integrate(), f.integrate(), 1e-12));
        prop_assert!(close(refined.lp_norm(3.0).unwrap(), f.lp_norm(3.0).unwrap(), 1e-12));
    }

    #[test]
    fn squeeze_norms_means_and_angles(
        f in one_coord_fn(), g in one_coord_fn(),
        k in prop_oneof![Just(1.0), Just(0.5), Just(0.25), Just(1.0 / 16.0), 0.01f64..1.0],
        p in prop_oneof![Just(3.0), Just(4.0), 1.0f64..8.0],
    ) {
        let (tf, tg) = (squeeze(&f, k, p).unwrap(), squeeze(&g, k, p).unwrap());
        for r in [1.0, 2.0, p] {
            let want = k.powf((p - r) / (r * p)) * f.lp_norm(r).unwrap();
            prop_assert!(close(tf.lp_norm(r).unwrap(), want, 1e-12));
        }
        // the p-norm is preserved exactly
        prop_assert!(close(tf.lp_norm(p).unwrap(), f.lp_norm(p).unwrap(), 1e-12));
        // means and inner products scale by k^{1-1/p} and k^{1-2/p}
        prop_assert!(close(tf.integrate(), k.powf(1.0 - 1.0 / p) * f.integrate(), 1e-12));
        prop_assert!(close(tf.inner(&tg).unwrap(), k.powf(1.0 - 2.0 / p) * f.inner(&g).unwrap(), 1e-12));
        // mean-zero and orthogonality survive
        let centred = f.sub(&StepFunction::constant(f.space().clone(), f.integrate())).unwrap();
        prop_assert!(squeeze(&centred, k, p).unwrap().integrate().abs() <= 1e-12);
    }

    #[test]
    fn disjoint_sum_additivity(f in two_coord_fn(), g in two_coord_fn(), p in 1.0f64..6.0) {
        let s = disjoint_sum(&f, &g, p).unwrap();
        let want = f.lp_norm(p).unwrap().powf(p) + g.lp_norm(p).unwrap().powf(p);
        prop_assert!(close(s.lp_norm(p).unwrap().powf(p), want, 1e-12));
    }

    #[test]
    fn conditional_expectation_contracts(f in two_coord_fn(), keep in prop::collection::vec(0usize..2, 0..2)) {
        let e = cond_expect(&f, &keep);
        prop_assert!(close(e.integrate(), f.integrate(), 1e-12));
        for p in [1.0, 2.0, 4.0] {
            prop_assert!(e.lp_norm(p).unwrap() <= f.lp_norm(p).unwrap() * (1.0 + 1e-12) + 1e-15);
        }
        prop_assert!(cond_expect(&e, &keep).max_abs_diff(&e).unwrap() <= 1e-12);
    }
}

#[test]
fn iterated_disjoint_sum_of_constant_matches_dyadic_normalization() {
    for p in [1.0, 2.0, 3.0, 4.5] {
        let mut f = StepFunction::constant(CoordinateSpace::default(), 1.0);
        for k in 1..=6u32 {
            let zero = f.scale(0.0);
            f = disjoint_sum(&f, &zero, p).unwrap();
            let peak = 2f64.powf(k as f64 / p);
            assert!(close(f.max_abs(), peak, 1e-12));
            assert!(close(f.lp_norm(p).unwrap(), 1.0, 1e-12));
            let u = &dyadic_level(k, p).unwrap()[0];
            assert!(close(u.max_abs(), peak, 1e-12));
        }
    }
}

#[test]
fn dyadic_levels_refine_and_preserve_lp() {
    for p in [1.0, 2.5, 4.0] {
        for k in 0..=6u32 {
            let u = dyadic_level(k, p).unwrap();
            for d in 1..=4u32 {
                let v = dyadic_level(k + d, p).unwrap();
                let scale = 2f64.powf(-(d as f64) / p);
                for (s, us) in u.iter().enumerate() {
                    let block = &v[s << d..(s + 1) << d];
                    let sum = StepFunction::linear_combination(&CoordinateSpace::default(), block, &vec![scale; block.len()])
                        .unwrap();
                    assert!(us.max_abs_diff(&sum).unwrap() <= 1e-12);
                }
            }
            let c: Vec<f64> = (0..u.len()).map(|i| ((i * 7 + 3) % 5) as f64 - 2.0).collect();
            let want = c.iter().map(|x: &f64| x.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            let got = StepFunction::linear_combination(&CoordinateSpace::default(), &u, &c).unwrap().lp_norm(p).unwrap();
            assert!(close(got, want, 1e-12));
        }
    }
}
