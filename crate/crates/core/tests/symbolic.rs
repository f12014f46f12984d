use approx::assert_relative_eq;
use horseshoe_entropy::symbolic::*;
use num_bigint::BigUint;

#[test]
fn entropy_examples() {
    assert_relative_eq!(sft_entropy(&TransitionMatrix::all_ones(2)).unwrap().entropy, 2f64.ln(), max_relative = 1e-12);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert_relative_eq!(sft_entropy(&TransitionMatrix::golden_mean()).unwrap().entropy, phi.ln(), max_relative = 1e-9);
    for l in [3, 17, 64] {
        assert_eq!(sft_entropy(&TransitionMatrix::all_ones(l)).unwrap().entropy, (l as f64).ln());
    }
}

#[test]
fn reducible_matrix_uses_dominant_component() {
    // {0} full 2-shift block feeds into the golden-mean block {2,3}.
    let t =
        TransitionMatrix::new(vec![vec![1, 1, 1, 0], vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![0, 0, 1, 0]]).unwrap();
    let e = sft_entropy(&t).unwrap();
    assert!(e.reducible);
    assert_relative_eq!(e.entropy, 2f64.ln(), max_relative = 1e-9);
}

#[test]
fn rejects_dead_ends() {
    assert!(TransitionMatrix::new(vec![vec![1, 1], vec![0, 0]]).is_err());
    assert!(TransitionMatrix::new(vec![vec![1, 0], vec![1, 0]]).is_err());
    assert!(TransitionMatrix::new(vec![vec![2]]).is_err());
}

#[test]
fn cylinder_examples() {
    assert_eq!(cylinder_count(&TransitionMatrix::all_ones(2), 10).unwrap(), BigUint::from(1024u32));
    assert_eq!(cylinder_count(&TransitionMatrix::golden_mean(), 5).unwrap(), BigUint::from(13u32));
    assert_eq!(cylinder_count(&TransitionMatrix::all_ones(7), 1).unwrap(), BigUint::from(7u32));
}

#[test]
fn metric_examples() {
    let x = ShiftPoint::from_word(&[0, 1, 1, 0], -2, 0);
    assert_eq!(shift_metric(&x, &x), 0.0);
    let y = ShiftPoint::from_word(&[1], 0, 0);
    assert_eq!(shift_metric(&ShiftPoint::from_word(&[], 0, 0), &y), 1.0);
    let z = ShiftPoint::from_word(&[1], -3, 0);
    assert_eq!(shift_metric(&ShiftPoint::from_word(&[], 0, 0), &z), 0.125);
}

#[test]
fn periodic_tails_are_compared_to_a_common_period() {
    let a = ShiftPoint::periodic(&[0, 1]).unwrap();
    let b = ShiftPoint::periodic(&[0, 1, 0, 1]).unwrap();
    assert_eq!(first_difference(&a, &b), None);
    let c = ShiftPoint::new(vec![0, 1], vec![], 0, vec![0, 1, 0, 1, 0, 0]).unwrap();
    assert_eq!(first_difference(&a, &c), Some(5));
}

#[test]
fn shifting_moves_the_window() {
    let x = ShiftPoint::from_word(&[1, 2, 3], 0, 0);
    let s = x.shifted(1);
    assert_eq!(s.symbol(0), 2);
    assert_eq!(s.symbol(-1), 1);
}

#[test]
fn admissibility() {
    let t = TransitionMatrix::golden_mean();
    assert!(ShiftPoint::from_word(&[1, 0, 1], 0, 0).is_admissible(&t));
    assert!(!ShiftPoint::from_word(&[1, 1], 0, 0).is_admissible(&t));
    assert!(!ShiftPoint::periodic(&[1]).unwrap().is_admissible(&t));
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(52);
    let top: u64 = (x >> shift).try_into().unwrap();
    (top as f64).ln() + shift as f64 * 2f64.ln()
}

#[test]
fn golden_mean_growth_rate_at_ten_thousand() {
    let t = TransitionMatrix::golden_mean();
    let n = 10_000;
    let rate = ln_big(&cylinder_count(&t, n).unwrap()) / n as f64;
    let h = sft_entropy(&t).unwrap().entropy;
    assert!((rate - h).abs() < 1e-3, "rate {rate} vs {h}");
    assert!(rate > h);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn point(alphabet: u32) -> impl Strategy<Value = ShiftPoint> {
        (
            prop::collection::vec(0..alphabet, 1..3),
            prop::collection::vec(0..alphabet, 0..8),
            -4i64..4,
            prop::collection::vec(0..alphabet, 1..3),
        )
            .prop_map(|(l, c, s, r)| ShiftPoint::new(l, c, s, r).unwrap())
    }

    proptest! {
        #[test]
        fn all_ones_counts_are_powers(a in 1usize..6, n in 1usize..20) {
            let c = cylinder_count(&TransitionMatrix::all_ones(a), n).unwrap();
            prop_assert_eq!(c, BigUint::from(a).pow(n as u32));
        }

        #[test]
        fn metric_is_an_ultrametric(x in point(2), y in point(2), z in point(2)) {
            let (xy, yz, xz) = (shift_metric(&x, &y), shift_metric(&y, &z), shift_metric(&x, &z));
            prop_assert!(xz <= xy.max(yz));
            prop_assert_eq!(xy, shift_metric(&y, &x));
            prop_assert!((0.0..=1.0).contains(&xy));
            prop_assert_eq!(xy == 0.0, first_difference(&x, &y).is_none());
        }

        #[test]
        fn metric_ignores_representation(w in prop::collection::vec(0u32..3, 1..4), reps in 2usize..4) {
            let a = ShiftPoint::periodic(&w).unwrap();
            let b = ShiftPoint::periodic(&w.repeat(reps)).unwrap();
            prop_assert_eq!(shift_metric(&a, &b), 0.0);
        }
    }
}
