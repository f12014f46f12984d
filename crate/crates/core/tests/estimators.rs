use horseshoe_entropy::estimators::*;
use horseshoe_entropy::exponents::delta;
use horseshoe_entropy::linalg::{lyapunov_exponents_periodic, PeriodicCocycle};
use horseshoe_entropy::symbolic::{cylinder_count, sft_entropy, ShiftPoint, TransitionMatrix};
use horseshoe_entropy::systems::*;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn full2() -> ShiftSystem {
    ShiftSystem::new(TransitionMatrix::all_ones(2))
}

fn cat() -> System {
    System::new(&SystemSpec::cat_map()).unwrap()
}

fn cat_entropy() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

#[test]
fn bowen_ball_on_the_full_shift() {
    let s = full2();
    let word = [0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 1];
    let x = ShiftPoint::from_word(&word, -4, 0);
    assert!(bowen_ball_contains(&s, &x, &x, 0.5, 3).unwrap());
    // d < 1/2 along 3 shifts means agreement on positions −1..=3.
    for flip in -4..=7i64 {
        let mut w = word;
        w[(flip + 4) as usize] ^= 1;
        let y = ShiftPoint::from_word(&w, -4, 0);
        let inside = bowen_ball_contains(&s, &x, &y, 0.5, 3).unwrap();
        assert_eq!(inside, !(-1..=3).contains(&flip), "flip at {flip}");
        assert_eq!(bowen_ball_contains(&s, &y, &x, 0.5, 3).unwrap(), inside);
    }
}

#[test]
fn cat_map_bowen_ball_expands() {
    let s = cat();
    let x = vec![0.3, 0.3];
    let y = vec![0.31, 0.3];
    assert!(!bowen_ball_contains(&s, &x, &y, 1e-3, 10).unwrap());
    assert!(bowen_ball_contains(&s, &x, &x, 1e-3, 10).unwrap());
    assert!(bowen_ball_contains(&s, &x, &x, 1e-3, TORUS_HORIZON + 1).is_err());
}

#[test]
fn single_sample_count_is_one() {
    let s = cat();
    let c = max_separated_set(&s, &vec![vec![0.1, 0.2]], 1, 0.01, 0.1, 0).unwrap();
    assert_eq!(c.count, 1);
    assert!(c.lower_bound);
    let empty: Vec<Vec<f64>> = Vec::new();
    let c = max_separated_set(&s, &empty, 3, 0.01, 0.1, 0).unwrap();
    assert_eq!(c.count, 0);
    assert!(c.warning.is_some());
}

#[test]
fn vacuous_closeness_recovers_cylinder_counts() {
    let s = full2();
    let words = s.exhaustive_words(0, 11).unwrap();
    let c = max_separated_set(&s, &words, 12, 0.5, 2.0, 7).unwrap();
    let oracle = cylinder_count(&TransitionMatrix::all_ones(2), 12).unwrap().to_u64().unwrap();
    assert_eq!(c.count, oracle);
    assert!(((c.count as f64).ln() / 12.0 - 2f64.ln()).abs() <= 0.05);
}

#[test]
fn full_shift_topological_entropy() {
    let s = full2();
    let words = s.exhaustive_words(-1, 14).unwrap();
    let est = topological_entropy_estimate(&s, &words, &[0.25], 14, 1).unwrap();
    let oracle = sft_entropy(&TransitionMatrix::all_ones(2)).unwrap().entropy;
    assert!((est.finest() - oracle).abs() <= 0.03, "{}", est.finest());
    // Separated sets at ε = 1/4 are the words on positions −1..=n.
    for c in &est.scales[0].counts {
        assert_eq!(c.count, 1 << (c.n + 2));
    }
}

#[test]
fn golden_mean_topological_entropy() {
    let s = ShiftSystem::new(TransitionMatrix::golden_mean());
    let words = s.exhaustive_words(-1, 14).unwrap();
    let est = topological_entropy_estimate(&s, &words, &[0.5, 0.25], 14, 2).unwrap();
    let oracle = sft_entropy(&TransitionMatrix::golden_mean()).unwrap().entropy;
    assert!((est.finest() - oracle).abs() <= 0.03, "{}", est.finest());
    assert!(est.monotone);
}

fn cat_grid(eps: f64) -> GridWindow {
    GridWindow::new(vec![0.2, 0.6], eps, 2048).unwrap()
}

#[test]
fn cat_map_topological_entropy() {
    let s = cat();
    let eps = 2f64.powi(-6);
    let est = topological_entropy_estimate(&s, &cat_grid(eps), &[eps], 12, 3).unwrap();
    let c = periodic_orbit_cocycle(&s, &[vec![0.0, 0.0]]).unwrap();
    let oracle = delta(&lyapunov_exponents_periodic(&c).unwrap()).delta_plus;
    assert!((oracle - cat_entropy()).abs() < 1e-12);
    assert!((est.finest() - oracle).abs() <= 0.05, "slope {}", est.finest());
    // Ruelle: the estimate does not exceed the sum of positive exponents.
    assert!(est.finest() <= oracle + 0.05);
}

#[test]
fn rotation_has_zero_entropy() {
    let s = System::new(&SystemSpec::rotation(vec![2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0])).unwrap();
    let eps = 2f64.powi(-6);
    let grid = GridWindow::new(vec![0.1, 0.1], 4.0 * eps, 64).unwrap();
    let est = topological_entropy_estimate(&s, &grid, &[eps], 12, 4).unwrap();
    assert!(est.finest().abs() <= 0.02, "{}", est.finest());
    assert!(est.finest() <= 0.05);
}

#[test]
fn tail_entropy_regimes_of_the_full_shift() {
    let s = full2();
    let words = s.exhaustive_words(-3, 12).unwrap();
    let t = tail_entropy_estimate(&s, &words, &[2.0, 0.25], &[0.125, 0.5], 10, 5).unwrap();
    let at = |eps: f64, delta: f64| t.cells.iter().find(|c| c.eps == eps && c.delta == delta).unwrap().slope;
    assert!(at(0.25, 0.125).abs() <= 0.03);
    assert!((at(2.0, 0.5) - 2f64.ln()).abs() <= 0.05);
    assert!((at(2.0, 0.125) - 2f64.ln()).abs() <= 0.05);
    assert_eq!(t.skipped, vec![(0.25, 0.5)]);
    assert_eq!(t.h_star_estimate, at(0.25, 0.125));
    assert!(t.violations.is_empty(), "{:?}", t.violations);
}

#[test]
fn finite_orbit_has_zero_tail_entropy() {
    let s = System::new(&SystemSpec::rotation(vec![0.25])).unwrap();
    let orbit: Vec<Vec<f64>> = (0..4).map(|i| vec![0.1 + 0.25 * i as f64]).collect();
    let t = tail_entropy_estimate(&s, &orbit, &[0.5, 0.3], &[0.1, 0.01], 8, 0).unwrap();
    for c in &t.cells {
        assert_eq!(c.slope, 0.0);
    }
}

/// Number of length-`len` cylinders of the Bernoulli measure `(1 − p, p)`
/// needed to cover mass 1/2, taking the heaviest first.
fn exact_half_cover(p: f64, len: u32) -> u64 {
    let mut classes: Vec<(f64, u64)> = (0..=len)
        .map(|j| {
            let binom = (0..j).fold(1u64, |b, i| b * (len - i) as u64 / (i + 1) as u64);
            ((1.0 - p).powi((len - j) as i32) * p.powi(j as i32), binom)
        })
        .collect();
    classes.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut mass, mut count) = (0.0, 0u64);
    for (w, m) in classes {
        let need = ((0.5 - mass) / w).ceil().max(0.0) as u64;
        if need <= m {
            return count + need;
        }
        mass += w * m as f64;
        count += m;
    }
    count
}

fn bernoulli_katok(p: f64, nmax: usize, samples: usize) -> KatokEstimate {
    let s = full2();
    // Open balls of radius 1/4 fix the symbols on [−2, n + 1].
    let words = s.bernoulli_words(&[1.0 - p, p], -2, nmax as i64 + 1, samples, 9).unwrap();
    katok_entropy_estimate(&s, &words, 0.25, nmax).unwrap()
}

#[test]
fn katok_fair_coin() {
    let k = bernoulli_katok(0.5, 10, 100_000);
    assert!((k.slope - 2f64.ln()).abs() <= 0.07, "{}", k.slope);
}

#[test]
fn katok_biased_coin_matches_the_cylinder_oracle() {
    let shannon = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
    // At n ≤ 10 half the mass sits on a dozen cylinders and the slope is far
    // from its limit; both the sampled and the exact cover show this.
    let k = bernoulli_katok(0.1, 10, 100_000);
    let exact: Vec<(f64, f64)> = (5..=10).map(|n| (n as f64, (exact_half_cover(0.1, n + 4) as f64).ln())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = exact.into_iter().unzip();
    let (oracle, _) = fit_slope(&xs, &ys).unwrap();
    assert!((k.slope - oracle).abs() <= 0.05, "sampled {} vs exact {oracle}", k.slope);
    assert!((oracle - shannon).abs() > 0.05);
    // Further out the cover grows at the Shannon rate.
    let far = bernoulli_katok(0.1, 24, 100_000);
    assert!((far.slope - shannon).abs() <= 0.05, "{}", far.slope);
}

#[test]
fn katok_point_mass() {
    let s = cat();
    let samples = vec![vec![0.0, 0.0]; 100];
    let k = katok_entropy_estimate(&s, &samples, 0.1, 10).unwrap();
    assert_eq!(k.slope, 0.0);
    assert!(k.counts.iter().all(|c| c.1 == 1));
}

#[test]
fn katok_reports_insufficient_samples() {
    let s = full2();
    let words = s.bernoulli_words(&[0.5, 0.5], -2, 21, 200, 1).unwrap();
    let err = katok_entropy_estimate(&s, &words, 0.25, 20).unwrap_err();
    assert!(err.to_string().contains("insufficient samples"), "{err}");
}

#[test]
fn middle_thirds_dust_dimension() {
    let cloud = UniformHorseshoe::middle_thirds().attractor_cloud(200_000, 36, 3).unwrap();
    let scales: Vec<f64> = (1..=6).map(|k| 3f64.powi(-k)).collect();
    let d = box_counting_dimension(&cloud, &scales).unwrap();
    assert!((d.dimension - 2.0 * 2f64.ln() / 3f64.ln()).abs() <= 0.05, "{}", d.dimension);
    // Oracle: the dust meets exactly 4^k triadic boxes at level k.
    for (k, (_, n)) in d.counts.iter().enumerate() {
        assert_eq!(*n, 4u64.pow(k as u32 + 1));
    }
}

#[test]
fn segment_and_point_dimensions() {
    let seg: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64 / 1000.0, 0.5]).collect();
    let scales = [0.25, 0.125, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    assert!((box_counting_dimension(&seg, &scales).unwrap().dimension - 1.0).abs() <= 0.05);
    let pt = vec![vec![0.3, 0.3]; 1000];
    assert_eq!(box_counting_dimension(&pt, &scales).unwrap().dimension, 0.0);
    assert!(box_counting_dimension(&pt, &scales[..3]).is_err());
    assert!(box_counting_dimension(&pt[..10], &scales).is_err());
}

#[test]
fn tables_are_reproducible_across_thread_counts() {
    let s = cat();
    let grid = GridWindow::new(vec![0.2, 0.6], 2f64.powi(-5), 128).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let e = topological_entropy_estimate(&s, &grid, &[2f64.powi(-5), 2f64.powi(-6)], 8, 42).unwrap();
            serde_json::to_string(&e).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn separated_counts_shrink_with_eps() {
    let s = cat();
    let grid = GridWindow::new(vec![0.0, 0.0], 0.1, 200).unwrap();
    let est = topological_entropy_estimate(&s, &grid, &[0.05, 0.02, 0.01], 6, 0).unwrap();
    for w in est.scales.windows(2) {
        for (a, b) in w[0].counts.iter().zip(&w[1].counts) {
            assert!(b.count >= a.count);
        }
    }
}

fn linear_delta(s: &System) -> f64 {
    let c = PeriodicCocycle::new(vec![s.differential(&vec![0.3; s.dim()]).unwrap()]).unwrap();
    delta(&lyapunov_exponents_periodic(&c).unwrap()).delta
}

#[test]
fn ruelle_bound_holds_for_linear_systems() {
    let cases: Vec<(SystemSpec, f64, usize, usize)> = vec![
        (SystemSpec::cat_map(), 2f64.powi(-5), 512, 10),
        (SystemSpec::ToralAutomorphism { matrix: vec![vec![2, 1], vec![1, 1]] }, 2f64.powi(-5), 512, 10),
        (
            SystemSpec::ToralAutomorphism { matrix: vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]] },
            2f64.powi(-3),
            48,
            8,
        ),
        (SystemSpec::rotation(vec![2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]), 2f64.powi(-5), 256, 10),
    ];
    for (spec, eps, res, nmax) in cases {
        let s = System::new(&spec).unwrap();
        let bound = linear_delta(&s);
        let grid = GridWindow::new(vec![0.2; s.dim()], eps, res).unwrap();
        let est = topological_entropy_estimate(&s, &grid, &[eps], nmax, 11).unwrap();
        assert!(est.finest() <= bound + 0.05, "{spec:?}: {} > {bound}", est.finest());
    }
}

#[test]
fn identical_seeds_give_identical_tables() {
    let s = full2();
    let words = s.bernoulli_words(&[0.5, 0.5], -3, 11, 4000, 9).unwrap();
    let tail =
        || serde_json::to_string(&tail_entropy_estimate(&s, &words, &[2.0, 0.25], &[0.125], 8, 3).unwrap()).unwrap();
    assert_eq!(tail(), tail());
    let katok = || serde_json::to_string(&katok_entropy_estimate(&s, &words, 0.25, 6).unwrap()).unwrap();
    assert_eq!(katok(), katok());
    let c = cat();
    let grid = cat_grid(2f64.powi(-4));
    let sep = || serde_json::to_string(&max_separated_set(&c, &grid, 5, 1e-3, 2f64.powi(-4), 7).unwrap()).unwrap();
    assert_eq!(sep(), sep());
}

/// Random primitive transition matrices on up to 4 symbols with a self-loop
/// at symbol 0.
fn primitive_matrix() -> impl Strategy<Value = TransitionMatrix> {
    (2usize..=4).prop_flat_map(|a| proptest::collection::vec(proptest::bool::weighted(0.6), a * a)).prop_filter_map(
        "irreducible with a loop at 0",
        |bits| {
            let a = (bits.len() as f64).sqrt() as usize;
            let mut rows: Vec<Vec<u8>> = bits.chunks(a).map(|r| r.iter().map(|&b| b as u8).collect()).collect();
            rows[0][0] = 1;
            let t = TransitionMatrix::new(rows).ok()?;
            let e = sft_entropy(&t).ok()?;
            (!e.reducible && e.entropy > 0.1).then_some(t)
        },
    )
}

/// Words of length `len` that occur in a path from symbol 0 that has one
/// symbol before the word and returns to 0 after exactly `tail` more steps.
fn realisable_words(t: &TransitionMatrix, len: usize, tail: usize) -> u64 {
    let a = t.size();
    let mut row: Vec<u64> = (0..a).map(|i| (0..a).any(|k| t.get(0, k) && t.get(k, i)) as u64).collect();
    for _ in 1..len {
        row = (0..a).map(|j| (0..a).map(|i| row[i] * t.get(i, j) as u64).sum()).collect();
    }
    // Symbols with a path of length `tail` to 0.
    let mut back: Vec<bool> = (0..a).map(|j| j == 0).collect();
    for _ in 0..tail {
        back = (0..a).map(|j| (0..a).any(|k| t.get(j, k) && back[k])).collect();
    }
    (0..a).filter(|&j| back[j]).map(|j| row[j]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimator_matches_sft_word_counts(t in primitive_matrix()) {
        let exact = sft_entropy(&t).unwrap().entropy;
        let s = ShiftSystem::new(t.clone());
        // Cells use positions -1..=n of samples on -2..=nmax+1 that are fixed
        // at symbol 0 outside; the budget is about 2^18 samples.
        let nmax = ((18.0 * 2f64.ln() / exact).floor() as usize - 4).min(12);
        let words = s.exhaustive_words(-2, nmax as i64 + 1).unwrap();
        let est = topological_entropy_estimate(&s, &words, &[0.25], nmax, 0).unwrap();
        for c in &est.scales[0].counts {
            prop_assert_eq!(c.count, realisable_words(&t, c.n + 2, nmax + 2 - c.n));
        }
        prop_assert!(est.finest() > 0.0 && est.finest() <= exact + 0.2);
    }

    #[test]
    fn tail_tables_are_monotone(seed in 0u64..1000) {
        let s = full2();
        let words = s.exhaustive_words(-3, 9).unwrap();
        let t = tail_entropy_estimate(&s, &words, &[2.0, 1.0, 0.5, 0.25], &[0.0625, 0.125, 0.25], 7, seed).unwrap();
        prop_assert!(t.violations.is_empty(), "{:?}", t.violations);
    }

    #[test]
    fn counts_are_positive(seed in 0u64..1000) {
        let s = cat();
        let grid = GridWindow::new(vec![0.3, 0.3], 0.05, 40).unwrap();
        let est = topological_entropy_estimate(&s, &grid, &[0.02], 6, seed).unwrap();
        for c in &est.scales[0].counts {
            prop_assert!(c.count >= 1);
        }
    }
}

mod helpers {
    use horseshoe_entropy::estimators::*;

    #[test]
    fn slope_of_a_line_is_exact() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + 2.0).collect();
        let (s, r) = fit_slope(&xs, &ys).unwrap();
        assert!((s - 0.5).abs() < 1e-15 && r < 1e-15);
        assert_eq!(fit_slope(&xs, &[3.0; 4]).unwrap().0, 0.0);
        assert!(fit_slope(&xs[..2], &ys[..2]).is_err());
    }

    #[test]
    fn grid_points_are_cell_centres() {
        let g = GridWindow::new(vec![0.0, 0.5], 0.5, 2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.get(0), vec![0.125, 0.625]);
        assert_eq!(g.get(3), vec![0.375, 0.875]);
    }

    #[test]
    fn ball_boundaries() {
        assert!(Ball::Closed(0.25).contains(0.25));
        assert!(!Ball::Open(0.25).contains(0.25));
    }
}
