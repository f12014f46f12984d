mod grassmann {
    use approx::assert_relative_eq;
    use horseshoe_entropy::linalg::*;
    use nalgebra::DMatrix;

    #[test]
    fn identity_preserves_volume() {
        let e = SubspaceBasis::from_columns(&[&[1.0, 2.0, 0.5], &[0.0, 1.0, -1.0]]).unwrap();
        assert_relative_eq!(grassmann_jacobian(&SquareMatrix::identity(3), &e).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn axis_aligned_line() {
        let e = SubspaceBasis::coordinate(2, &[0]).unwrap();
        assert_relative_eq!(grassmann_jacobian(&SquareMatrix::diag(&[2.0, 3.0]), &e).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobian_independent_of_basis_choice() {
        let m = SquareMatrix::from_row_major(3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.2, 0.0, 1.5]).unwrap();
        let a = SubspaceBasis::from_columns(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]).unwrap();
        let b = SubspaceBasis::from_columns(&[&[1.0, 1.0, 2.0], &[2.0, -1.0, 1.0]]).unwrap();
        let (ja, jb) = (grassmann_jacobian(&m, &a).unwrap(), grassmann_jacobian(&m, &b).unwrap());
        assert_relative_eq!(ja, jb, max_relative = 1e-12);
    }

    #[test]
    fn rank_deficient_basis_rejected() {
        assert!(SubspaceBasis::from_columns(&[&[1.0, 2.0], &[2.0, 4.0]]).is_err());
    }

    #[test]
    fn top_k_of_diagonal() {
        let m = SquareMatrix::diag(&[3.0, 2.0, 1.0]);
        assert_eq!(top_k_log_jacobian(&m, 0).unwrap(), 0.0);
        assert_relative_eq!(top_k_log_jacobian(&m, 2).unwrap(), 6f64.ln(), epsilon = 1e-14);
        assert!(top_k_log_jacobian(&m, 4).is_err());
    }

    #[test]
    fn sampled_planes_bounded_by_top_singular_values() {
        let m = SquareMatrix::diag(&[3.0, 2.0, 1.0]);
        let sup = sampled_sup_jacobian(&m, 2, 10_000, 7).unwrap();
        assert!(sup <= 6.0 + 1e-9);
        assert_relative_eq!(sup, 6.0, max_relative = 1e-3);
    }

    #[test]
    fn exterior_power_is_multiplicative() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.2, 0.0, 1.5]);
        let b = DMatrix::from_row_slice(3, 3, &[0.3, 1.0, 2.0, 1.0, 1.0, 0.0, 0.0, -2.0, 1.0]);
        let lhs = exterior_power(&(&a * &b), 2);
        let rhs = exterior_power(&a, 2) * exterior_power(&b, 2);
        assert!((lhs - rhs).norm() < 1e-12);
        assert_relative_eq!(exterior_power(&a, 3)[(0, 0)], a.determinant(), epsilon = 1e-14);
    }

    #[test]
    fn exterior_norm_matches_singular_values() {
        let m = SquareMatrix::from_row_major(3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.2, 0.0, 1.5]).unwrap();
        for k in 1..=3 {
            let via_wedge = SquareMatrix::new(exterior_power(m.as_matrix(), k)).unwrap().operator_norm().ln();
            assert_relative_eq!(via_wedge, top_k_log_jacobian(&m, k).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn cat_map_growth_is_linear_in_n() {
        let cat = SquareMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let c = PeriodicCocycle::single(cat).unwrap();
        let l = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_relative_eq!(top_k_log_growth(&c, 1, 500).unwrap(), 500.0 * l, max_relative = 1e-12);
        assert!(top_k_log_growth(&c, 2, 500).unwrap().abs() < 1e-9);
        assert_eq!(top_k_log_growth(&c, 0, 500).unwrap(), 0.0);
    }
}

mod symplectic {
    use approx::assert_abs_diff_eq;
    use horseshoe_entropy::linalg::*;

    #[test]
    fn defects_of_small_examples() {
        assert_eq!(symplectic_defect(&SquareMatrix::identity(2)).unwrap(), 0.0);
        assert_abs_diff_eq!(symplectic_defect(&SquareMatrix::diag(&[2.0, 0.5])).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(symplectic_defect(&SquareMatrix::diag(&[2.0, 2.0])).unwrap(), 3.0, epsilon = 1e-14);
        assert!(symplectic_defect(&SquareMatrix::identity(3)).is_err());
    }

    #[test]
    fn standard_half_space_maps_to_identity() {
        let l = SubspaceBasis::coordinate(4, &[0, 1]).unwrap();
        let n = lagrangian_to_standard(&l).unwrap();
        assert_eq!(n.matrix, SquareMatrix::identity(4));
    }

    #[test]
    fn line_in_the_plane_gives_inverse_rotation() {
        let theta: f64 = 0.7;
        let l = SubspaceBasis::from_columns(&[&[theta.cos(), theta.sin()]]).unwrap();
        let a = lagrangian_to_standard(&l).unwrap().matrix;
        let expected = SquareMatrix::rotation(-theta);
        for (x, y) in a.to_row_major().iter().zip(expected.to_row_major()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn vertical_half_space() {
        let l = SubspaceBasis::coordinate(4, &[2, 3]).unwrap();
        let n = lagrangian_to_standard(&l).unwrap();
        assert!(symplectic_defect(&n.matrix).unwrap() < 1e-8);
        let image = n.matrix.as_matrix() * l.vectors();
        assert!(image.rows(2, 2).norm() < 1e-12);
    }

    #[test]
    fn non_lagrangian_reports_offending_pair() {
        let l = SubspaceBasis::coordinate(4, &[0, 2]).unwrap();
        let err = lagrangian_to_standard(&l).unwrap_err().to_string();
        assert!(err.contains("ω(e_0, e_1)"), "{err}");
    }
}

mod cocycle {
    use approx::assert_abs_diff_eq;
    use horseshoe_entropy::linalg::*;
    use horseshoe_entropy::Error;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, LN_2};

    fn cat() -> SquareMatrix {
        SquareMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn product_of_identity_is_identity() {
        let c = PeriodicCocycle::single(SquareMatrix::identity(2)).unwrap();
        assert_eq!(cocycle_product(&c, 7).unwrap(), SquareMatrix::identity(2));
        assert_eq!(cocycle_product(&c, 0).unwrap(), SquareMatrix::identity(2));
    }

    #[test]
    fn diagonal_power() {
        let c = PeriodicCocycle::single(SquareMatrix::diag(&[2.0, 0.5])).unwrap();
        assert_eq!(cocycle_product(&c, 3).unwrap(), SquareMatrix::diag(&[8.0, 0.125]));
    }

    #[test]
    fn period_two_product_order() {
        let c = PeriodicCocycle::new(vec![SquareMatrix::diag(&[2.0, 0.5]), SquareMatrix::rotation(FRAC_PI_2)]).unwrap();
        let p = cocycle_product(&c, 2).unwrap().to_row_major();
        let expected = [0.0, -0.5, 2.0, 0.0];
        for (a, b) in p.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn overflowing_product_is_a_range_error() {
        let c = PeriodicCocycle::single(SquareMatrix::diag(&[1e10, 1e-10])).unwrap();
        assert!(matches!(cocycle_product(&c, 40), Err(Error::Range(_))));
    }

    #[test]
    fn cat_map_exponents() {
        let s = lyapunov_exponents_periodic(&PeriodicCocycle::single(cat()).unwrap()).unwrap();
        let l = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_abs_diff_eq!(s.exponents()[0], -l, epsilon = 1e-12);
        assert_abs_diff_eq!(s.exponents()[1], l, epsilon = 1e-12);
        assert_abs_diff_eq!(l, 0.962_423_650_119_206_9, epsilon = 1e-15);
    }

    #[test]
    fn rotation_has_zero_exponents() {
        let s =
            lyapunov_exponents_periodic(&PeriodicCocycle::single(SquareMatrix::rotation(FRAC_PI_3)).unwrap()).unwrap();
        for x in s.exponents() {
            assert_abs_diff_eq!(*x, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn period_two_diagonal_exponents() {
        let c = PeriodicCocycle::new(vec![SquareMatrix::diag(&[4.0, 0.25]), SquareMatrix::diag(&[0.5, 2.0])]).unwrap();
        let s = lyapunov_exponents_periodic(&c).unwrap();
        assert_abs_diff_eq!(s.exponents()[0], -0.5 * LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.exponents()[1], 0.5 * LN_2, epsilon = 1e-15);
    }

    #[test]
    fn huge_periods_stay_finite() {
        let c = PeriodicCocycle::repeated(SquareMatrix::diag(&[1e-10, 1e10]), 100).unwrap();
        let s = lyapunov_exponents_periodic(&c).unwrap();
        assert_abs_diff_eq!(s.exponents()[1], 10f64.ln() * 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.exponents()[0], -10f64.ln() * 10.0, epsilon = 1e-9);
    }

    #[test]
    fn doc_round_trip_and_field_errors() {
        let c = PeriodicCocycle::new(vec![cat(), SquareMatrix::identity(2)]).unwrap();
        let doc = c.to_doc();
        assert_eq!(PeriodicCocycle::from_doc(&doc).unwrap(), c);
        let bad = CocycleDoc { dim: 2, period: 3, factors: doc.factors.clone() };
        assert!(PeriodicCocycle::from_doc(&bad).unwrap_err().to_string().contains("period"));
        let singular = CocycleDoc { dim: 2, period: 1, factors: vec![vec![1.0, 1.0, 1.0, 1.0]] };
        assert!(PeriodicCocycle::from_doc(&singular).is_err());
    }
}

mod properties {
    use horseshoe_entropy::linalg::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn matrix(d: usize) -> impl Strategy<Value = SquareMatrix> {
        prop::collection::vec(-2.0f64..2.0, d * d)
            .prop_map(move |v| SquareMatrix::from_row_major(d, &v).unwrap())
            .prop_filter("invertible", |m| m.det().abs() > 1e-3)
    }

    fn cocycle() -> impl Strategy<Value = PeriodicCocycle> {
        (2usize..=4, 1usize..=3)
            .prop_flat_map(|(d, p)| prop::collection::vec(matrix(d), p).prop_map(|f| PeriodicCocycle::new(f).unwrap()))
    }

    fn near_identity(d: usize) -> impl Strategy<Value = SquareMatrix> {
        prop::collection::vec(-0.3f64..0.3, d * d)
            .prop_map(move |v| SquareMatrix::new(DMatrix::identity(d, d) + DMatrix::from_row_slice(d, d, &v)).unwrap())
            .prop_filter("invertible", |m| m.det().abs() > 0.1)
    }

    fn close(a: &ExponentSpectrum, b: &ExponentSpectrum, tol: f64) -> bool {
        a.exponents().iter().zip(b.exponents()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
    }

    /// Image of the first coordinate half-space under symplectic shears, in a skewed basis.
    fn lagrangian_frame(a: &[f64], b: &[f64], change: &[f64], d: usize) -> DMatrix<f64> {
        let sym = |v: &[f64]| {
            let m = DMatrix::from_row_slice(d, d, v);
            (&m + m.transpose()) * 0.5
        };
        let mut upper = DMatrix::identity(2 * d, 2 * d);
        upper.view_mut((0, d), (d, d)).copy_from(&sym(a));
        let mut lower = DMatrix::identity(2 * d, 2 * d);
        lower.view_mut((d, 0), (d, d)).copy_from(&sym(b));
        let c = DMatrix::identity(d, d) + DMatrix::from_row_slice(d, d, change);
        (upper * lower).columns(0, d) * c
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn conjugation_invariance((c, p) in cocycle().prop_flat_map(|c| { let d = c.dim(); (Just(c), near_identity(d)) })) {
            let a = lyapunov_exponents_periodic(&c).unwrap();
            let b = lyapunov_exponents_periodic(&c.conjugated(&p).unwrap()).unwrap();
            prop_assert!(close(&a, &b, 1e-8), "{a:?} vs {b:?}");
        }

        #[test]
        fn cyclic_invariance(c in cocycle(), shift in 0usize..3) {
            let a = lyapunov_exponents_periodic(&c).unwrap();
            let b = lyapunov_exponents_periodic(&c.rotated(shift)).unwrap();
            prop_assert!(close(&a, &b, 1e-8), "{a:?} vs {b:?}");
        }

        #[test]
        fn complementary_top_k_identity(m in (2usize..=5).prop_flat_map(matrix), k in 0usize..=5) {
            let d = m.dim();
            let k = k.min(d);
            let lhs = top_k_log_jacobian(&m.inverse().unwrap(), d - k).unwrap();
            let rhs = top_k_log_jacobian(&m, k).unwrap() - m.det().abs().ln();
            prop_assert!((lhs - rhs).abs() <= 1e-8, "{lhs} vs {rhs}");
        }

        #[test]
        fn jacobian_below_top_k(m in (2usize..=4).prop_flat_map(matrix), frame in prop::collection::vec(-1.0f64..1.0, 16), k in 1usize..4) {
            let d = m.dim();
            let k = k.min(d);
            let e = DMatrix::from_row_slice(d, k, &frame[..d * k]);
            let Ok(basis) = SubspaceBasis::new(e) else { return Ok(()) };
            let j = grassmann_jacobian(&m, &basis).unwrap();
            let top = top_k_log_jacobian(&m, k).unwrap().exp();
            prop_assert!(j <= top * (1.0 + 1e-12) + 1e-9, "{j} > {top}");
        }

        #[test]
        fn lagrangian_normalizer(
            d in 1usize..=3,
            a in prop::collection::vec(-1.0f64..1.0, 9),
            b in prop::collection::vec(-1.0f64..1.0, 9),
            change in prop::collection::vec(-0.3f64..0.3, 9),
        ) {
            let n = d * d;
            let frame = lagrangian_frame(&a[..n], &b[..n], &change[..n], d);
            let out = lagrangian_to_standard(&SubspaceBasis::new(frame.clone()).unwrap()).unwrap();
            prop_assert!(symplectic_defect(&out.matrix).unwrap() < 1e-8);
            let image = out.matrix.as_matrix() * &frame;
            prop_assert!(image.rows(d, d).norm() <= 1e-8 * frame.norm());
        }
    }
}
