use logratio_core::interpret::{
    dominance_factor, orthogonal_to_orthonormal, orthonormal_to_orthogonal, Direction,
    SchemeTransform,
};
use logratio_core::models::ModelKind;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::CompCovariates),
        Just(ModelKind::CompResponse),
        Just(ModelKind::WithinComposition),
    ]
}

proptest! {
    #[test]
    fn transform_round_trip(kind in kind(), d in 2usize..12, params in prop::collection::vec(-100.0f64..100.0, 11)) {
        let t = SchemeTransform::new(kind, d).unwrap();
        let p = &params[..d - 1];
        let back = orthogonal_to_orthonormal(&orthonormal_to_orthogonal(p, &t).unwrap(), &t).unwrap();
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300) * 4.0);
        }
    }

    #[test]
    fn transform_is_linear(kind in kind(), d in 2usize..12, a in prop::collection::vec(-10.0f64..10.0, 11), c in -3.0f64..3.0) {
        let t = SchemeTransform::new(kind, d).unwrap();
        let a = &a[..d - 1];
        let scaled: Vec<f64> = a.iter().map(|v| c * v).collect();
        let ta = orthonormal_to_orthogonal(a, &t).unwrap();
        let ts = orthonormal_to_orthogonal(&scaled, &t).unwrap();
        for (x, y) in ta.iter().zip(&ts) {
            prop_assert!((c * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn dominance_is_monotone_with_matching_direction(b in -10.0f64..10.0, db in 0.001f64..2.0) {
        let r = dominance_factor(b);
        prop_assert!(dominance_factor(b + db).delta > r.delta);
        prop_assert!((r.percent_change - 100.0 * (r.delta - 1.0)).abs() < 1e-9);
        let expected = if b > 0.0 { Direction::Increase } else if b < 0.0 { Direction::Decrease } else { Direction::NoChange };
        prop_assert_eq!(r.direction, expected);
        // doubling then halving
        prop_assert!((dominance_factor(b).delta * dominance_factor(-b).delta - 1.0).abs() < 1e-12);
    }
}
