use deblur::multilevel::prolong_image;
use deblur::{build_operator, restrict_image, BoundaryCondition, GaussianPsf64, Image64, OperatorKind};
use proptest::prelude::*;

fn image(p: usize) -> impl Strategy<Value = Image64> {
    prop::collection::vec(-1.0f64..1.0, p * p).prop_map(move |v| Image64::from_fn(p, p, |i, j| v[i + p * j]).unwrap())
}

fn dot(a: &Image64, b: &Image64) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

fn bc() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![
        Just(BoundaryCondition::Zero),
        Just(BoundaryCondition::Periodic),
        Just(BoundaryCondition::Reflexive),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restriction_never_gains_energy(x in image(16)) {
        let r = restrict_image(&x).unwrap();
        prop_assert!(r.norm() <= x.norm() * (1.0 + 1e-14));
    }

    #[test]
    fn prolongation_is_the_adjoint_of_restriction(x in image(16), y in image(8)) {
        let lhs = dot(&restrict_image(&x).unwrap(), &y);
        let rhs = dot(&x, &prolong_image(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn restriction_after_prolongation_is_identity(y in image(8)) {
        let back = restrict_image(&prolong_image(&y).unwrap()).unwrap();
        prop_assert!((back.matrix() - y.matrix()).amax() <= 1e-14);
    }

    #[test]
    fn operator_adjoint_identity(
        x in image(12),
        y in image(12),
        bc in bc(),
        s in 0.5f64..3.0,
        hw in 1usize..5,
    ) {
        let psf = GaussianPsf64::new(hw, s).unwrap();
        let op = build_operator(&psf, bc, 12, 12, OperatorKind::natural_for(bc)).unwrap();
        let lhs = dot(&op.apply(&x, false).unwrap(), &y);
        let rhs = dot(&x, &op.apply(&y, true).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn blur_preserves_mass_under_periodic_boundaries(x in image(16), s in 0.5f64..3.0, hw in 1usize..6) {
        let psf = GaussianPsf64::new(hw, s).unwrap();
        let op = build_operator(&psf, BoundaryCondition::Periodic, 16, 16, OperatorKind::SeparableCirculant).unwrap();
        let before: f64 = x.as_slice().iter().sum();
        let after: f64 = op.apply(&x, false).unwrap().as_slice().iter().sum();
        prop_assert!((before - after).abs() <= 1e-12 * (1.0 + x.norm()));
    }
}
