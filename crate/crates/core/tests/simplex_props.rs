use logratio_core::simplex::{
    contrast_matrix, from_coordinates, geometric_mean, normalizing_constant, response_coordinate_z0,
    to_coordinates, variation_matrix, Composition, CoordinateScheme, PivotSpec,
};
use proptest::prelude::*;

fn composition(d: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    d.prop_flat_map(|d| prop::collection::vec(-6.0f64..6.0, d))
        .prop_map(|logs| logs.into_iter().map(f64::exp).collect())
}

fn rows(d: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n)
        .prop_map(|m| m.into_iter().map(|r| r.into_iter().map(f64::exp).collect()).collect())
}

fn comps(rows: &[Vec<f64>]) -> Vec<Composition> {
    rows.iter().map(|r| Composition::new(r.clone()).unwrap()).collect()
}

fn clr(x: &[f64]) -> Vec<f64> {
    let m = x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v.ln() - m).collect()
}

proptest! {
    #[test]
    fn coordinates_ignore_row_scale(x in composition(2..=9), s in 0.01f64..100.0, pivot in 0usize..9) {
        let d = x.len();
        let pivot = PivotSpec::new(pivot % d, d).unwrap();
        let a = Composition::new(x.clone()).unwrap();
        let b = a.scaled(s).unwrap();
        for scheme in [CoordinateScheme::Orthonormal, CoordinateScheme::Orthogonal] {
            let za = to_coordinates(std::slice::from_ref(&a), &pivot, scheme).unwrap();
            let zb = to_coordinates(std::slice::from_ref(&b), &pivot, scheme).unwrap();
            for j in 0..d - 1 {
                prop_assert!((za.values[(0, j)] - zb.values[(0, j)]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn orthonormal_coordinates_preserve_clr_norm(x in composition(2..=9), pivot in 0usize..9) {
        // any pivot gives an isometry, so the coordinate norm is the clr norm
        let d = x.len();
        let c = Composition::new(x.clone()).unwrap();
        let z = to_coordinates(&[c], &PivotSpec::new(pivot % d, d).unwrap(), CoordinateScheme::Orthonormal).unwrap();
        let zn: f64 = (0..d - 1).map(|j| z.values[(0, j)].powi(2)).sum();
        let cn: f64 = clr(&x).iter().map(|v| v * v).sum();
        prop_assert!((zn - cn).abs() <= 1e-10 * cn.max(1.0));
    }

    #[test]
    fn scheme_link(x in composition(2..=9), pivot in 0usize..9) {
        let d = x.len();
        let pivot = PivotSpec::new(pivot % d, d).unwrap();
        let c = vec![Composition::new(x).unwrap()];
        let on = to_coordinates(&c, &pivot, CoordinateScheme::Orthonormal).unwrap();
        let og = to_coordinates(&c, &pivot, CoordinateScheme::Orthogonal).unwrap();
        for i in 1..d {
            let expected = on.values[(0, i - 1)] / (std::f64::consts::LN_2 * normalizing_constant(d, i));
            prop_assert!((og.values[(0, i - 1)] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_recovers_closed_composition(data in (2usize..=8).prop_flat_map(|d| rows(d, 5)), pivot in 0usize..8, total in 0.5f64..1000.0) {
        let d = data[0].len();
        let c = comps(&data);
        for scheme in [CoordinateScheme::Orthonormal, CoordinateScheme::Orthogonal] {
            let block = to_coordinates(&c, &PivotSpec::new(pivot % d, d).unwrap(), scheme).unwrap();
            let back = from_coordinates(&block, total).unwrap();
            for (orig, b) in c.iter().zip(&back) {
                let closed = orig.closure(total).unwrap();
                for (u, v) in closed.parts().iter().zip(b.parts()) {
                    prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-300) * 10.0);
                }
            }
        }
    }

    #[test]
    fn contrasts_are_orthogonal_logcontrasts(d in 2usize..=10, pivot in 0usize..10) {
        let pivot = PivotSpec::new(pivot % d, d).unwrap();
        for scheme in [CoordinateScheme::Orthonormal, CoordinateScheme::Orthogonal] {
            let c = contrast_matrix(&pivot, scheme, d).unwrap();
            for i in 0..d - 1 {
                prop_assert!(c.row(i).sum().abs() < 1e-12);
                for j in 0..i {
                    prop_assert!(c.row(i).dot(&c.row(j)).abs() < 1e-12);
                }
            }
            if scheme == CoordinateScheme::Orthonormal {
                for i in 0..d - 1 {
                    prop_assert!((c.row(i).norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn first_coordinate_is_relative_dominance_of_pivot(x in composition(2..=9), pivot in 0usize..9) {
        let d = x.len();
        let l = pivot % d;
        let rest: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != l).map(|(_, v)| *v).collect();
        let expected = (x[l] / geometric_mean(&rest).unwrap()).log2();
        let c = vec![Composition::new(x).unwrap()];
        let z = to_coordinates(&c, &PivotSpec::new(l, d).unwrap(), CoordinateScheme::Orthogonal).unwrap();
        prop_assert!((z.values[(0, 0)] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn z0_ignores_joint_scale(data in (2usize..=6).prop_flat_map(|d| rows(d, 4)), x0 in prop::collection::vec(0.01f64..100.0, 4), s in 0.1f64..10.0) {
        let c = comps(&data);
        let scaled: Vec<Composition> = c.iter().map(|v| v.scaled(s).unwrap()).collect();
        let x0s: Vec<f64> = x0.iter().map(|v| v * s).collect();
        for scheme in [CoordinateScheme::Orthonormal, CoordinateScheme::Orthogonal] {
            let a = response_coordinate_z0(&x0, &c, scheme).unwrap();
            let b = response_coordinate_z0(&x0s, &scaled, scheme).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn variation_matrix_is_symmetric_and_scale_free(data in (2usize..=6).prop_flat_map(|d| rows(d, 6)), s in prop::collection::vec(0.1f64..10.0, 6)) {
        let c = comps(&data);
        let scaled: Vec<Composition> = c.iter().zip(&s).map(|(v, f)| v.scaled(*f).unwrap()).collect();
        let a = variation_matrix(&c).unwrap();
        let b = variation_matrix(&scaled).unwrap();
        for i in 0..a.dim() {
            prop_assert_eq!(a.get(i, i), 0.0);
            for j in 0..a.dim() {
                prop_assert!(a.get(i, j) >= 0.0);
                prop_assert!((a.get(i, j) - a.get(j, i)).abs() < 1e-12);
                prop_assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-9 * a.get(i, j).max(1.0));
            }
        }
    }
}
