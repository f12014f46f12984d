use horseshoe_entropy::interval::*;
use proptest::prelude::*;

#[test]
fn tenth_is_enclosed() {
    let x = Interval::around(0.1);
    let s = (0..10).fold(Interval::point(0.0), |acc, _| acc + x);
    assert!(s.contains(1.0));
    assert!(s.width() < 1e-14);
}

#[test]
fn exp_ln_round_trip_contains_input() {
    let x = Interval::point(105.0);
    assert!(x.exp().ln().contains(105.0));
}

#[test]
fn exact_operations_are_not_widened() {
    assert_eq!(Interval::point(0.5) + Interval::point(0.25), Interval::point(0.75));
    assert_eq!(Interval::point(3.0) * Interval::point(-2.0), Interval::point(-6.0));
    assert_eq!(Interval::point(1.0).ln(), Interval::point(0.0));
    let third = Interval::point(1.0) * Interval::point(1.0 / 3.0) + Interval::point(1e-17);
    assert!(third.width() > 0.0);
}

#[test]
fn abs_of_straddling_interval() {
    assert_eq!(Interval::new(-3.0, 2.0).abs(), Interval::new(0.0, 3.0));
}

proptest! {
    #[test]
    fn products_enclose_samples(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, t in 0.0f64..1.0) {
        let x = Interval::new(a.min(b), a.max(b));
        let v = (x.lo() + t * x.width()).min(x.hi());
        let y = x * Interval::point(c);
        prop_assert!(y.lo() <= v * c && v * c <= y.hi());
    }
}
