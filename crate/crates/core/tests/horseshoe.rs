use approx::{assert_abs_diff_eq, assert_relative_eq};
use horseshoe_entropy::horseshoe::*;
use horseshoe_entropy::linalg::{ExponentSpectrum, SquareMatrix};
use horseshoe_entropy::symbolic::sft_entropy;
use horseshoe_entropy::Error;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn planar(ell: u64, n: u64) -> ConstructionParams {
    ConstructionParams { n, ..ConstructionParams::planar_example(ell) }
}

fn spatial() -> ConstructionParams {
    ConstructionParams {
        d0: 3,
        k: 2,
        lambda: ExponentSpectrum::new(vec![-0.5, -0.5, 1.0]).unwrap(),
        mu: vec![1.5, -0.8, 1.0 / 1.2],
        eta: 0.2,
        rho: 0.5,
        n: 2,
        ell: 12,
        m: 3,
        c_bound: 1.5,
        translation: None,
    }
}

#[test]
fn planar_scales_at_ell_100() {
    let s = derive_scales(&ConstructionParams::planar_example(100)).unwrap();
    assert_relative_eq!(s.log_lambda_cap[0], -100.0, max_relative = 1e-14);
    assert_relative_eq!(s.log_lambda_cap[1], 100.0, max_relative = 1e-14);
    assert_relative_eq!(s.log_bound, 0.0125f64.ln() + 110.0, max_relative = 1e-14);
    // Oracle: the bound evaluated directly in floating point.
    let half_bound = 0.0125 * 110f64.exp() / 2.0;
    let l = s.l.to_f64().unwrap();
    assert!(l <= half_bound * (1.0 + 1e-12) && l > half_bound - 1.0 - half_bound * 1e-12);
    assert_eq!(s.return_time, 112);
    assert!(s.entropy > 0.9365 && s.entropy < 0.945, "entropy {}", s.entropy);
    let g = entropy_gap(&ConstructionParams::planar_example(100), &s);
    assert!(g.gap < 0.07 && g.gap > 0.0);
}

#[test]
fn planar_entropy_at_ell_1000() {
    let s = derive_scales(&ConstructionParams::planar_example(1000)).unwrap();
    assert!(1.0 - s.entropy < 0.012, "entropy {}", s.entropy);
    // log L ≈ ℓ + 2n + log(η/16)
    assert_relative_eq!(s.log_l, 1010.0 + (0.1f64 / 16.0).ln(), max_relative = 1e-12);
}

#[test]
fn tame_parameters_are_infeasible() {
    let err = derive_scales(&planar(1, 1)).unwrap_err();
    assert!(matches!(err, Error::Infeasible(ref m) if m.contains("L bound")), "{err}");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn scale_coherence() {
    for p in [ConstructionParams::planar_example(100), spatial()] {
        let s = derive_scales(&p).unwrap();
        let (d, k) = (p.d0, p.k);
        let total: f64 = s.log_lambda_cap.iter().sum();
        for i in 0..d {
            let lhs = s.log_lambda_cap[i] + s.log_delta_sides[i];
            if i + 1 == k {
                assert_abs_diff_eq!(lhs, total + s.log_delta_sides[k], epsilon = 1e-9);
            } else {
                assert_abs_diff_eq!(lhs, s.log_delta_sides[(i + 1) % d], epsilon = 1e-9);
            }
            assert!(s.log_delta_sides[i] <= s.log_delta + 1e-12);
        }
    }
}

#[test]
fn entropy_converges_to_delta() {
    let mut last = 0.0;
    for ell in [100u64, 1_000, 10_000] {
        let p = ConstructionParams::planar_example(ell);
        let s = derive_scales(&p).unwrap();
        assert!(s.entropy > last);
        last = s.entropy;
        let t = p.return_time() as f64;
        let (m, n) = (p.m as f64, p.n as f64);
        let bound = (m + 2.0 * n + (p.eta / 16.0).ln().abs()) / t + (m + 2.0 * n) / t;
        assert!(1.0 - s.entropy <= bound, "ell {ell}: gap {} > {bound}", 1.0 - s.entropy);
    }
}

#[test]
fn conservative_pieces_have_unit_determinant() {
    let p = ConstructionParams { mu: vec![2.0, 0.5], c_bound: 2.0, ..ConstructionParams::planar_example(100) };
    assert!(p.is_conservative());
    let model = assemble_model(&p, &derive_scales(&p).unwrap()).unwrap();
    assert!(model.is_conservative());
    assert_eq!(model.return_time(), p.return_time());
    let q = ConstructionParams { mu: vec![2.0, 1.0], c_bound: 2.0, ..p };
    assert!(!assemble_model(&q, &derive_scales(&q).unwrap()).unwrap().is_conservative());
}

/// A point of `R^s_j` from normalised coordinates `u` (last one in `[−1, 1]`
/// picks the position inside the slab).
fn point_in_slice(s: &DerivedScales, l: f64, j: u64, u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut x: Vec<f64> = (0..d).map(|i| u[i] * s.log_delta_sides[i].exp()).collect();
    x[d - 1] = (j as f64 + u[d - 1] / 8.0) / l * s.log_delta_sides[d - 1].exp();
    x
}

fn closed_form_matches_pieces(p: &ConstructionParams) {
    let s = derive_scales(p).unwrap();
    let model = assemble_model(p, &s).unwrap();
    let l = s.l.to_f64().unwrap();
    let lu = s.l.to_u64().unwrap();
    let sides: Vec<f64> = s.log_delta_sides.iter().map(|x| x.exp()).collect();
    let d = p.d0;
    for j in [0, 1, lu / 2, lu - 1] {
        for seed in 0..5 {
            let u: Vec<f64> = (0..d).map(|i| ((seed * 7 + i * 3) % 11) as f64 / 5.5 - 1.0).collect();
            let x = point_in_slice(&s, l, j, &u);
            let stepped = model.evaluate(&x);
            let closed = model.branch_map(j).apply(&x);
            for i in 0..d {
                assert_abs_diff_eq!(stepped[i] / sides[i], closed[i] / sides[i], epsilon = 1e-7);
            }
        }
    }
}

#[test]
fn branch_maps_match_the_composed_pieces() {
    closed_form_matches_pieces(&planar(10, 2));
    closed_form_matches_pieces(&spatial());
}

#[test]
fn branch_linear_part_scales_slices() {
    let p = spatial();
    let s = derive_scales(&p).unwrap();
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, None).unwrap();
    let (d, k) = (p.d0, p.k);
    let log_slab = -(8f64.ln()) - s.log_l;
    for (t, src, c) in model.branch_map(3).linear {
        let expected = if t == 0 {
            rects.log_image_half_sides[0] - rects.log_half_sides[k - 1]
        } else if t == k {
            rects.log_image_half_sides[k] - (rects.log_half_sides[d - 1] + log_slab)
        } else {
            rects.log_half_sides[t] - rects.log_half_sides[src]
        };
        assert_abs_diff_eq!(c.log_abs, expected, epsilon = 1e-9);
    }
}

#[test]
fn linear_limit_is_the_saddle_return() {
    let p = planar(10, 2);
    let s = derive_scales(&p).unwrap();
    let lin = assemble_model(&p, &s).unwrap().linear_limit();
    assert_eq!(lin.evaluate(&[0.0, 0.0]), vec![0.0, 0.0]);
    let x = [0.3, -0.2];
    let z = lin.evaluate(&x);
    assert_relative_eq!(z[0], s.log_lambda_cap[1].exp() * x[1], max_relative = 1e-10);
    assert_relative_eq!(z[1], s.log_lambda_cap[0].exp() * x[0], max_relative = 1e-10);
}

#[test]
fn capped_markov_check_is_all_ones() {
    let p = ConstructionParams::planar_example(100);
    let s = derive_scales(&p).unwrap();
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, Some(64)).unwrap();
    let r = verify_markov_crossings(&model, &rects).unwrap();
    let t = r.matrix.unwrap();
    assert_eq!(t.size(), 64);
    assert!(t.is_all_ones());
    assert_eq!(r.mode, VerificationMode::Exhaustive);
    assert_eq!(r.rows_checked, 64);
}

#[test]
fn full_markov_check_samples_huge_l() {
    let p = ConstructionParams::planar_example(100);
    let s = derive_scales(&p).unwrap();
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, None).unwrap();
    let r = verify_markov_crossings(&model, &rects).unwrap();
    assert_eq!(r.mode, VerificationMode::Sampled);
    assert_eq!(r.rows_checked, 66);
    assert!(r.matrix.is_none());
}

#[test]
fn inflated_eta_breaks_the_branch_window() {
    let p = ConstructionParams::planar_example(100);
    let inflated = ConstructionParams { eta: p.eta * 100.0, ..p.clone() };
    let s = derive_scales(&inflated).unwrap();
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, None).unwrap();
    match verify_markov_crossings(&model, &rects) {
        Err(Error::Geometric { inequality, margin }) => {
            assert!(inequality.contains("branch window"), "{inequality}");
            assert!(margin < 0.0);
        }
        other => panic!("expected a geometric failure, got {other:?}"),
    }
}

#[test]
fn two_branch_horseshoe_is_a_full_two_shift() {
    let p = planar(4, 1);
    let s = derive_scales(&p).unwrap();
    assert_eq!(s.l, BigUint::from(2u32));
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, None).unwrap();
    let t = verify_markov_crossings(&model, &rects).unwrap().matrix.unwrap();
    assert_eq!(t.size(), 2);
    let h = sft_entropy(&t).unwrap().entropy;
    assert_eq!(h, 2f64.ln());
    assert_eq!(model_entropy(&s), h / p.return_time() as f64);
}

#[test]
fn markov_entropy_identity_with_hundreds_of_branches() {
    let p = planar(8, 1);
    let s = derive_scales(&p).unwrap();
    let l = s.l.to_u64().unwrap();
    assert!(l > 100 && l <= 1024, "L = {l}");
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, None).unwrap();
    let t = verify_markov_crossings(&model, &rects).unwrap().matrix.unwrap();
    assert_eq!(sft_entropy(&t).unwrap().entropy / p.return_time() as f64, model_entropy(&s));
}

#[test]
fn slices_nest_and_images_cross() {
    let p = spatial();
    let s = derive_scales(&p).unwrap();
    let rects = RectangleFamily::new(&p, &s, Some(16)).unwrap();
    assert!(rects.slices_nested_and_disjoint());
    for j in 0..16 {
        let st = rects.stable_slice(j);
        assert!(st.iter().all(|&(a, b)| -1.0 <= a && b <= 1.0));
        let un = rects.unstable_slice(j);
        assert!(un[0].0 >= -1.0 && un[0].1 <= 1.0);
        assert!(un[p.k].0 <= -1.0 && un[p.k].1 >= 1.0);
    }
    let model = assemble_model(&p, &s).unwrap();
    assert!(verify_markov_crossings(&model, &rects).unwrap().all_ones);
}

#[test]
fn nonzero_translation_is_detected() {
    let mut p = ConstructionParams::planar_example(100);
    let s = derive_scales(&p).unwrap();
    p.translation = Some(vec![0.5, 0.0]);
    let model = assemble_model(&p, &s).unwrap();
    let rects = RectangleFamily::new(&p, &s, Some(64)).unwrap();
    // Half of δ_1 pushes the last image slices out of R's stable factor.
    match verify_markov_crossings(&model, &rects) {
        Err(Error::Geometric { inequality, .. }) => assert!(inequality.contains("stable containment"), "{inequality}"),
        other => panic!("expected a geometric failure, got {other:?}"),
    }
}

#[test]
fn iterates_of_r_stay_small() {
    let c = iterate_containment(&ConstructionParams::planar_example(100)).unwrap();
    assert!(c.holds, "{c:?}");
}

#[test]
fn conformal_dimension_examples() {
    let d = conformal_hausdorff_dimension(2f64.ln(), -(3f64.ln()), 3f64.ln()).unwrap();
    assert_relative_eq!(d, 2.0 * 2f64.ln() / 3f64.ln(), max_relative = 1e-15);
    assert_abs_diff_eq!(d, 1.26186, epsilon = 1e-5);
    assert_eq!(conformal_hausdorff_dimension(0.0, -1.0, 2.0).unwrap(), 0.0);
    assert!(matches!(conformal_hausdorff_dimension(1.0, 0.0, 1.0), Err(Error::Precondition(_))));
}

#[test]
fn preparation_examples() {
    let t = preparation_targets(&ExponentSpectrum::new(vec![-1.0, 1.0]).unwrap(), 1).unwrap();
    assert_relative_eq!(t.stable_factor, (-1f64).exp());
    assert_relative_eq!(t.unstable_factor, 1f64.exp());
    assert_eq!(t.permutation, SquareMatrix::from_row_major(2, &[0.0, 1.0, 1.0, 0.0]).unwrap());
    let t = preparation_targets(&ExponentSpectrum::new(vec![-2.0, -2.0, 4.0]).unwrap(), 2).unwrap();
    assert_relative_eq!(t.stable_factor, (-2f64).exp());
    assert_relative_eq!(t.unstable_factor, 4f64.exp());
    let pm = t.permutation;
    assert_eq!(pm.det(), 1.0);
    assert_eq!(pm.transpose().mul(&pm), SquareMatrix::identity(3));
    assert!(preparation_targets(&ExponentSpectrum::new(vec![0.0, 1.0]).unwrap(), 1).is_err());
}

#[test]
fn oscillation_profile_is_l_independent() {
    let (a, b) = (oscillation_profile(4), oscillation_profile(64));
    for i in -600..5000 {
        let x = i as f64 / 1000.0;
        if x < 3.5 {
            assert_eq!(a.eval_with_derivative(x), b.eval_with_derivative(x));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasible_parameters_verify(
        ls in 0.2f64..2.0,
        lu in 0.2f64..2.0,
        n in 1u64..6,
        ell in 20u64..400,
        eta in 0.01f64..0.5,
    ) {
        let p = ConstructionParams {
            lambda: ExponentSpectrum::new(vec![-ls, lu]).unwrap(),
            eta,
            n,
            ell,
            ..ConstructionParams::planar_example(ell)
        };
        if let Ok(s) = derive_scales(&p) {
            let total: f64 = s.log_lambda_cap.iter().sum();
            prop_assert!((s.log_lambda_cap[0] + s.log_delta_sides[0] - total - s.log_delta_sides[1]).abs() < 1e-9);
            prop_assert!((s.log_lambda_cap[1] + s.log_delta_sides[1] - s.log_delta_sides[0]).abs() < 1e-9);
            let model = assemble_model(&p, &s).unwrap();
            let rects = RectangleFamily::new(&p, &s, Some(256)).unwrap();
            prop_assert!(verify_markov_crossings(&model, &rects).is_ok());
            prop_assert_eq!(model.is_conservative(), (lu - ls).abs() < 1e-12);
        }
    }
}

mod profile {
    use approx::assert_abs_diff_eq;
    use horseshoe_entropy::horseshoe::*;

    #[test]
    fn identity_windows_repeat() {
        let phi = oscillation_profile(4);
        assert_abs_diff_eq!(phi.eval(0.2 + 3.0), 0.2, epsilon = 1e-15);
        assert_eq!(phi.eval(0.25), 0.25);
        assert_eq!(phi.eval(-0.25), -0.25);
    }

    #[test]
    fn vanishes_outside_support() {
        let phi = oscillation_profile(4);
        assert_eq!(phi.eval(-0.7), 0.0);
        assert_eq!(phi.eval(-0.5), 0.0);
        assert_eq!(phi.eval(3.5), 0.0);
        assert_eq!(phi.eval(100.0), 0.0);
    }

    #[test]
    fn c1_at_the_joins() {
        let phi = oscillation_profile(8);
        for j in 0..8 {
            let x = j as f64;
            for edge in [0.25, 0.5] {
                for s in [1.0, -1.0] {
                    let e = x + s * edge;
                    let h = 1e-7;
                    let (l, r) = (phi.eval(e - h), phi.eval(e + h));
                    assert_abs_diff_eq!(l, r, epsilon = 1e-6);
                    assert_abs_diff_eq!((r - l) / (2.0 * h), phi.derivative(e), epsilon = 1e-5);
                }
            }
        }
    }

    fn grid_sup(l: u64) -> (f64, f64) {
        let phi = oscillation_profile(l);
        let steps = (l as i64 + 1) * 4096;
        (0..steps).map(|i| -1.0 + i as f64 / 4096.0).fold((0.0f64, 0.0f64), |(a, b), x| {
            let (v, dv) = phi.eval_with_derivative(x);
            (a.max(v.abs()), b.max(dv.abs()))
        })
    }

    #[test]
    fn sizes_do_not_depend_on_l() {
        assert_eq!(grid_sup(4), grid_sup(64));
        let (sup, lip) = grid_sup(4);
        assert!(sup <= PHI_SUP && PHI_SUP - sup < 1e-6);
        assert!(lip <= PHI_LIPSCHITZ && PHI_LIPSCHITZ - lip < 1e-6);
    }
}
