use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zassenhaus::builders::{
    affine_2x2, heisenberg_3x3, realize, shift_center, su11_pair, AlgebraPair, Su11Kind,
};
use zassenhaus::coeffs::{g_center, g_left, g_right, g_right_via, phi1, zass_coeff};
use zassenhaus::matcore::{expm, infer_uvc, rel_residual};
use zassenhaus::{CMatrix, Method, Scalar};

fn scalar(bound: f64) -> impl Strategy<Value = Scalar> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| Scalar::new(re, im))
}

fn real_or_complex(bound: f64) -> impl Strategy<Value = Scalar> {
    prop_oneof![
        (-bound..bound).prop_map(|re| Scalar::new(re, 0.0)),
        scalar(bound),
    ]
}

fn small_matrix(dim: usize, scale: f64) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-scale..scale, -scale..scale), dim * dim).prop_map(move |entries| {
        CMatrix::from_fn(dim, |i, j| {
            let (re, im) = entries[i * dim + j];
            Scalar::new(re, im)
        })
    })
}

proptest! {
    #[test]
    fn left_is_right_with_swapped_arguments(u in real_or_complex(4.0), v in real_or_complex(4.0)) {
        prop_assert_eq!(g_left(u, v).value, g_right(v, u).value);
    }

    #[test]
    fn center_relations(u in real_or_complex(3.0), v in real_or_complex(3.0)) {
        prop_assert_eq!(g_center(u, v).value, (-v).exp() * g_left(u, v).value);
        let gr = g_right(u, v).value;
        let via_center = u.exp() * g_center(v, u).value;
        prop_assert!((gr - via_center).norm() <= 1e-13 * (1.0 + gr.norm()));
    }

    #[test]
    fn divided_difference_identity(u in real_or_complex(3.0), v in real_or_complex(3.0)) {
        prop_assume!(v.norm() >= 1e-2);
        let lhs = g_right(u, v).value * v;
        let rhs = phi1(u - v) - phi1(u);
        prop_assert!((lhs - rhs).norm() <= 1e-13, "{lhs} vs {rhs}");
    }

    #[test]
    fn sum_rule(u in real_or_complex(2.0), v in real_or_complex(2.0)) {
        let sum: Scalar = (2..=40).map(|n| zass_coeff(n, u, v)).sum();
        prop_assert!((sum - g_right(u, v).value).norm() <= 1e-10);
    }

    #[test]
    fn expm_inverse(a in small_matrix(3, 1.5)) {
        let prod = &expm(&a).unwrap() * &expm(&-&a).unwrap();
        prop_assert!(rel_residual(&prod, &CMatrix::identity(3)).unwrap() <= 1e-12);
    }

    #[test]
    fn expm_additive_for_commuting_arguments(a in small_matrix(3, 1.0), s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let (s, t) = (Scalar::new(s, 0.0), Scalar::new(t, 0.0));
        let split = &expm(&a.scale(s)).unwrap() * &expm(&a.scale(t)).unwrap();
        let joint = expm(&a.scale(s + t)).unwrap();
        prop_assert!(rel_residual(&split, &joint).unwrap() <= 1e-12);
    }

    #[test]
    fn affine_round_trip(u in real_or_complex(2.5), v in real_or_complex(2.5)) {
        prop_assume!(u.norm() + v.norm() > 1e-3);
        let pair = realize(u, v).unwrap();
        assert_fit(&pair);
    }
}

fn assert_fit(pair: &AlgebraPair) {
    let fit = infer_uvc(pair.x(), pair.y()).unwrap();
    let scale = 1.0 + pair.u().norm() + pair.v().norm() + pair.c().norm();
    let gap = (fit.u - pair.u()).norm() + (fit.v - pair.v()).norm() + (fit.c - pair.c()).norm();
    assert!(gap <= 1e-12 * scale, "{}: {fit:?}", pair.name());
    assert!(fit.fit_residual <= 1e-12, "{}: {fit:?}", pair.name());
}

#[test]
fn series_matches_dispatcher_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let u = Scalar::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let v = Scalar::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (u, v) = if u.norm() > 3.0 || v.norm() > 3.0 {
            (u / u.norm().max(1.0) * 2.9, v / v.norm().max(1.0) * 2.9)
        } else {
            (u, v)
        };
        let dispatched = g_right(u, v).value;
        let series = g_right_via(u, v, Method::Series).value;
        worst = worst.max((series - dispatched).norm() / dispatched.norm());
    }
    assert!(worst <= 1e-11, "worst relative gap {worst:e}");
}

#[test]
fn builder_outputs_round_trip() {
    let r = |x: f64| Scalar::new(x, 0.0);
    let mut pairs = vec![
        affine_2x2(r(1.0), r(2.0), r(1.0), r(1.0)).unwrap(),
        affine_2x2(Scalar::new(0.5, 1.0), r(-1.5), r(2.0), r(1.0)).unwrap(),
        su11_pair(Su11Kind::RaiseSq, 6).unwrap(),
        su11_pair(Su11Kind::LowerSq, 10).unwrap(),
    ];
    let shifted: Vec<AlgebraPair> = pairs
        .iter()
        .map(|p| shift_center(p, r(-1.0)).unwrap())
        .collect();
    pairs.extend(shifted);
    for pair in &pairs {
        assert_fit(pair);
    }
}

#[test]
fn heisenberg_is_flagged_central_and_outside_the_fit() {
    let pair = heisenberg_3x3(Scalar::new(1.0, 0.0)).unwrap();
    assert!(pair.is_central());
    let fit = infer_uvc(pair.x(), pair.y()).unwrap();
    assert!(fit.fit_residual > 0.5);
}
