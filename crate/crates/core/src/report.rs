//! The acceptance suite: one outcome per criterion, each with named checks.
//!
//! Outcomes are deterministic; elapsed times go to stderr only.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::cli;
use crate::domination::{check_n_domination, invariant_splittings, DominationStatus};
use crate::estimators::{
    box_counting_dimension, katok_entropy_estimate, tail_entropy_estimate, topological_entropy_estimate, GridWindow,
};
use crate::exponents::{delta, delta_restricted, delta_star, SplittingLabel};
use crate::horseshoe::{
    assemble_model, conformal_hausdorff_dimension, derive_scales, entropy_gap, verify_markov_crossings,
    ConstructionParams, RectangleFamily, VerificationMode,
};
use crate::linalg::{
    lagrangian_to_standard, lyapunov_exponents_periodic, sampled_sup_jacobian, symplectic_defect, top_k_log_growth,
    top_k_log_jacobian, ExponentSpectrum, PeriodicCocycle, SquareMatrix, SubspaceBasis,
};
use crate::symbolic::{sft_entropy, TransitionMatrix};
use crate::systems::{periodic_orbit_cocycle, ShiftSystem, System, SystemSpec, UniformHorseshoe};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    pub fn pass(&self) -> bool {
        self.pass
    }
}

/// Checks that fail with the shipped parameters, as `(criterion, check name)`.
pub const UNATTAINABLE: &[(u32, &str)] =
    &[(10, "Bernoulli(0.9, 0.1) slope at n = 10"), (11, "ell = 100 model has d^u >= d0 - k")];

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

fn within(name: &str, value: f64, target: f64, tol: f64) -> Check {
    check(name, (value - target).abs() <= tol, format!("{value:.6} vs {target:.6} ± {tol}"))
}

fn runtime(limit_s: f64, start: Instant) -> Check {
    let s = start.elapsed().as_secs_f64();
    eprintln!("  elapsed {s:.2} s (limit {limit_s} s)");
    check(format!("runtime under {limit_s} s"), s < limit_s, format!("limit {limit_s} s"))
}

type Criterion = (u32, &'static str, fn() -> Result<Vec<Check>>);

const CRITERIA: &[Criterion] = &[
    (1, "horseshoe entropy formula", c1_entropy),
    (2, "Markov verification", c2_markov),
    (3, "conservative construction", c3_conservative),
    (4, "exponent functionals", c4_functionals),
    (5, "sigma_k identity", c5_sigma),
    (6, "submultiplicativity", c6_submultiplicative),
    (7, "domination", c7_domination),
    (8, "entropy estimators", c8_estimators),
    (9, "tail entropy", c9_tail),
    (10, "Katok counting", c10_katok),
    (11, "dimension", c11_dimension),
    (12, "Lagrangian normalizer", c12_lagrangian),
    (13, "determinism", c13_determinism),
];

/// Run the selected criteria (all when `only` is `None`), in order.
pub fn run_criteria(only: Option<&[u32]>) -> Result<Vec<CriterionOutcome>> {
    if let Some(ids) = only {
        if let Some(bad) = ids.iter().find(|i| !CRITERIA.iter().any(|c| c.0 == **i)) {
            return Err(Error::pre(format!("no criterion {bad}")));
        }
    }
    let mut out = Vec::new();
    for &(id, title, f) in CRITERIA {
        if only.is_some_and(|ids| !ids.contains(&id)) {
            continue;
        }
        eprintln!("criterion {id}: {title}");
        let checks = match f() {
            Ok(c) => c,
            Err(e) => vec![check("ran without error", false, e.to_string())],
        };
        out.push(CriterionOutcome { id, title, pass: checks.iter().all(|c| c.pass), checks });
    }
    Ok(out)
}

fn c1_entropy() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (ell, bound) in [(100u64, 0.07), (1000, 0.015)] {
        let p = ConstructionParams::planar_example(ell);
        let s = derive_scales(&p)?;
        let g = entropy_gap(&p, &s);
        let formula = s.log_l / (ell + p.m + 2 * p.n) as f64;
        checks.push(check(
            format!("ell = {ell}: entropy = log L / (ell + m + 2n)"),
            (g.entropy - formula).abs() <= 1e-12,
            format!("{:.6} vs {formula:.6}", g.entropy),
        ));
        checks.push(check(
            format!("ell = {ell}: Delta - entropy <= {bound}"),
            g.gap <= bound,
            format!("gap {:.6}", g.gap),
        ));
    }
    checks.push(runtime(1.0, start));
    Ok(checks)
}

fn c2_markov() -> Result<Vec<Check>> {
    let start = Instant::now();
    let p = ConstructionParams::planar_example(100);
    let s = derive_scales(&p)?;
    let model = assemble_model(&p, &s)?;
    let r = verify_markov_crossings(&model, &RectangleFamily::new(&p, &s, Some(64))?)?;
    let all_ones = r.matrix.as_ref().is_some_and(|t| t.size() == 64 && t.is_all_ones());
    let mut checks = vec![check(
        "64 capped slices give an all-ones matrix",
        all_ones && r.mode == VerificationMode::Exhaustive,
        format!("{} rows checked", r.rows_checked),
    )];
    let inflated = ConstructionParams { eta: p.eta * 100.0, ..p.clone() };
    let si = derive_scales(&inflated)?;
    let verdict =
        assemble_model(&p, &si).and_then(|m| verify_markov_crossings(&m, &RectangleFamily::new(&p, &si, None)?));
    checks.push(match verdict {
        Err(Error::Geometric { inequality, margin }) => {
            check("eta x 100 is a geometric failure", true, format!("{inequality}, log margin {margin:.3}"))
        }
        other => check("eta x 100 is a geometric failure", false, format!("{other:?}")),
    });
    checks.push(runtime(5.0, start));
    Ok(checks)
}

fn c3_conservative() -> Result<Vec<Check>> {
    let cases = [
        ("planar, mu = (1, 1)", ConstructionParams::planar_example(100)),
        (
            "planar, mu = (2, 1/2)",
            ConstructionParams { mu: vec![2.0, 0.5], c_bound: 2.0, ..ConstructionParams::planar_example(100) },
        ),
        (
            "spatial, mu = (3/2, -4/5, 5/6)",
            ConstructionParams {
                d0: 3,
                k: 2,
                lambda: ExponentSpectrum::new(vec![-0.5, -0.5, 1.0])?,
                mu: vec![1.5, -0.8, 1.0 / 1.2],
                eta: 0.2,
                rho: 0.5,
                n: 2,
                ell: 12,
                m: 3,
                c_bound: 1.5,
                translation: None,
            },
        ),
    ];
    let mut checks = Vec::new();
    for (name, p) in cases {
        let model = assemble_model(&p, &derive_scales(&p)?)?;
        let worst = model.piece_log_dets().iter().map(|l| l.exp_m1().abs()).fold(0.0, f64::max);
        checks.push(check(format!("{name}: every |det - 1| <= 1e-9"), worst <= 1e-9, format!("worst {worst:.3e}")));
    }
    Ok(checks)
}

fn c4_functionals() -> Result<Vec<Check>> {
    let d = delta(&ExponentSpectrum::new(vec![-1.0, 2.0])?);
    let mut checks = vec![check(
        "delta(-1, 2) = (2, 1, 1)",
        (d.delta_plus, d.delta_minus, d.delta) == (2.0, 1.0, 1.0),
        format!("({}, {}, {})", d.delta_plus, d.delta_minus, d.delta),
    )];
    let r = delta_restricted(&ExponentSpectrum::new(vec![-2.0, -1.0, 3.0])?, 0..2)?;
    checks.push(check("delta of (-2, -1, 3) on block {1, 2} = 0", r == 0.0, format!("{r}")));
    let single = |d: &[f64]| PeriodicCocycle::single(SquareMatrix::diag(d));
    let family = vec![
        (single(&[0.5, 2.0])?, SplittingLabel::trivial(2)),
        (single(&[0.25, 4.0])?, SplittingLabel::trivial(2)),
        (single(&[0.25, 0.5, 2.0, 4.0])?, SplittingLabel::from_cuts(4, &[2])?),
    ];
    let star = delta_star(&family)?;
    // By hand: ln 2, ln 4, and max(0, 0) on the two blocks of the last one.
    let expected = 4f64.ln();
    checks.push(check(
        "Delta* over the three-cocycle family = ln 4",
        star.value == expected,
        format!("{}", star.value),
    ));
    Ok(checks)
}

fn gaussian_matrix(d: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    SquareMatrix::new(DMatrix::from_fn(d, d, |_, _| rng.sample(StandardNormal))).expect("finite entries")
}

fn c5_sigma() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in [3usize, 4] {
        for i in 0..100 {
            let m = gaussian_matrix(d, &mut rng);
            for k in 1..d {
                let exact = top_k_log_jacobian(&m, k)?.exp();
                let sampled = sampled_sup_jacobian(&m, k, 10_000, 1000 * d as u64 + i)?;
                worst = worst.max((sampled - exact).abs() / exact);
                cases += 1;
            }
        }
    }
    let mut checks = vec![check(
        "sampled sup of grassmann_jacobian matches top_k within 1e-3",
        worst <= 1e-3,
        format!("{cases} cases, worst relative {worst:.3e}"),
    )];
    let mut extreme: f64 = 0.0;
    for d in 2..=4usize {
        for _ in 0..100 {
            let m = gaussian_matrix(d, &mut rng);
            let det = m.det();
            let unit = SquareMatrix::new(m.as_matrix() / det.abs().powf(1.0 / d as f64))?;
            extreme = extreme.max(top_k_log_jacobian(&unit, 0)?.abs()).max(top_k_log_jacobian(&unit, d)?.abs());
        }
    }
    checks.push(check("sigma_0 = sigma_d0 = 0 at unit determinant", extreme <= 1e-9, format!("worst {extreme:.3e}")));
    Ok(checks)
}

fn cat_cocycle() -> Result<PeriodicCocycle> {
    PeriodicCocycle::single(SquareMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0])?)
}

fn c6_submultiplicative() -> Result<Vec<Check>> {
    let c = cat_cocycle()?;
    let a: Vec<f64> = (0..=60).map(|n| top_k_log_growth(&c, 1, n)).collect::<Result<_>>()?;
    let mut excess = f64::NEG_INFINITY;
    for m in 1..=30 {
        for n in 1..=30 {
            excess = excess.max(a[m + n] - a[m] - a[n]);
        }
    }
    Ok(vec![
        check("a_(m+n) <= a_m + a_n + 1e-9 for m, n <= 30", excess <= 1e-9, format!("max excess {excess:.3e}")),
        within("a_30 / 30", a[30] / 30.0, 0.96242, 1e-4),
    ])
}

fn c7_domination() -> Result<Vec<Check>> {
    let verdict = |m: SquareMatrix| -> Result<Option<(DominationStatus, Option<usize>)>> {
        let c = PeriodicCocycle::single(m)?;
        let found = invariant_splittings(&c)?;
        match found.candidates.first() {
            Some(s) => {
                let r = check_n_domination(&c, s, 1, 16)?;
                Ok(Some((r.status, r.smallest_n)))
            }
            None => Ok(None),
        }
    };
    let hyp = verdict(SquareMatrix::diag(&[1.0 / 3.0, 3.0]))?;
    let weak = verdict(SquareMatrix::diag(&[0.9, 1.0]))?;
    let rot = verdict(SquareMatrix::rotation(std::f64::consts::FRAC_PI_2))?;
    let mut checks = vec![
        check("diag(1/3, 3) is 1-dominated", hyp == Some((DominationStatus::Dominated, Some(1))), format!("{hyp:?}")),
        check("diag(0.9, 1) has smallestN = 7", weak.is_some_and(|v| v.1 == Some(7)), format!("{weak:?}")),
        check("rot(pi/2) has no splitting", rot.is_none(), format!("{rot:?}")),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut tested, mut broken) = (0, 0);
    for _ in 0..1000 {
        let d = rng.random_range(2..=3);
        let period = rng.random_range(1..=3);
        let factors: Vec<SquareMatrix> = (0..period).map(|_| gaussian_matrix(d, &mut rng)).collect();
        let c = PeriodicCocycle::new(factors)?;
        let Ok(found) = invariant_splittings(&c) else { continue };
        for s in &found.candidates {
            let dominated: Vec<bool> =
                (1..=8).map(|n| check_n_domination(&c, s, n, 16).map(|r| r.is_dominated())).collect::<Result<_>>()?;
            tested += 1;
            if dominated.windows(2).any(|w| w[0] && !w[1]) {
                broken += 1;
            }
        }
    }
    checks.push(check(
        "N-dominated implies (N+1)-dominated on 1000 random cocycles",
        broken == 0 && tested > 0,
        format!("{tested} splittings, {broken} violations"),
    ));
    Ok(checks)
}

fn c8_estimators() -> Result<Vec<Check>> {
    let start = Instant::now();
    let full = ShiftSystem::new(TransitionMatrix::all_ones(2));
    let est = topological_entropy_estimate(&full, &full.exhaustive_words(-1, 14)?, &[0.25], 14, 1)?;
    let mut checks = vec![within("full 2-shift", est.finest(), 2f64.ln(), 0.03)];
    let golden = ShiftSystem::new(TransitionMatrix::golden_mean());
    let est = topological_entropy_estimate(&golden, &golden.exhaustive_words(-2, 15)?, &[0.5, 0.25], 14, 2)?;
    checks.push(within(
        "golden-mean shift",
        est.finest(),
        sft_entropy(&TransitionMatrix::golden_mean())?.entropy,
        0.03,
    ));
    let cat = System::new(&SystemSpec::cat_map())?;
    let eps = 2f64.powi(-6);
    let est = topological_entropy_estimate(&cat, &GridWindow::new(vec![0.2, 0.6], eps, 2048)?, &[eps], 12, 3)?;
    let oracle = delta(&lyapunov_exponents_periodic(&periodic_orbit_cocycle(&cat, &[vec![0.0, 0.0]])?)?).delta_plus;
    checks.push(within("cat map, grid 2048^2", est.finest(), oracle, 0.05));
    let rot = System::new(&SystemSpec::rotation(vec![2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]))?;
    let est = topological_entropy_estimate(&rot, &GridWindow::new(vec![0.1, 0.1], 4.0 * eps, 64)?, &[eps], 12, 4)?;
    checks.push(check("rotation <= 0.02", est.finest().abs() <= 0.02, format!("{:.6}", est.finest())));
    checks.push(runtime(120.0, start));
    Ok(checks)
}

fn c9_tail() -> Result<Vec<Check>> {
    let start = Instant::now();
    let s = ShiftSystem::new(TransitionMatrix::all_ones(2));
    let t = tail_entropy_estimate(&s, &s.exhaustive_words(-3, 12)?, &[2.0, 0.25], &[0.125, 0.5], 10, 5)?;
    let at = |eps: f64, delta: f64| {
        t.cells.iter().find(|c| c.eps == eps && c.delta == delta).map(|c| c.slope).unwrap_or(f64::NAN)
    };
    Ok(vec![
        check("eps = 1/4: estimate <= 0.03", at(0.25, 0.125).abs() <= 0.03, format!("{:.6}", at(0.25, 0.125))),
        within("eps = 2: log 2", at(2.0, 0.125), 2f64.ln(), 0.05),
        runtime(60.0, start),
    ])
}

fn c10_katok() -> Result<Vec<Check>> {
    let s = ShiftSystem::new(TransitionMatrix::all_ones(2));
    let slope = |p: f64| -> Result<f64> {
        let words = s.bernoulli_words(&[1.0 - p, p], -2, 11, 100_000, 9)?;
        Ok(katok_entropy_estimate(&s, &words, 0.25, 10)?.slope)
    };
    let shannon = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
    Ok(vec![
        within("Bernoulli(1/2, 1/2)", slope(0.5)?, 2f64.ln(), 0.07),
        within("Bernoulli(0.9, 0.1) slope at n = 10", slope(0.1)?, shannon, 0.05),
    ])
}

fn c11_dimension() -> Result<Vec<Check>> {
    let formula = conformal_hausdorff_dimension(2f64.ln(), -3f64.ln(), 3f64.ln())?;
    let mut checks = vec![within("formula", formula, 1.26186, 1e-5)];
    let exact = 2.0 * 2f64.ln() / 3f64.ln();
    checks.push(check(
        "formula matches 2 log 2 / log 3 to 1e-9",
        (formula - exact).abs() <= 1e-9,
        format!("{formula:.12}"),
    ));
    let cloud = UniformHorseshoe::middle_thirds().attractor_cloud(200_000, 36, 3)?;
    let scales: Vec<f64> = (1..=6).map(|k| 3f64.powi(-k)).collect();
    checks.push(within(
        "box counting on the attractor",
        box_counting_dimension(&cloud, &scales)?.dimension,
        formula,
        0.08,
    ));
    let p = ConstructionParams::planar_example(100);
    let s = derive_scales(&p)?;
    let ex = assemble_model(&p, &s)?.return_exponents();
    let du = s.entropy / ex[ex.len() - 1];
    let target = (p.d0 - p.k) as f64;
    checks.push(check("ell = 100 model has d^u >= d0 - k", du >= target, format!("d^u = {du:.6}, d0 - k = {target}")));
    Ok(checks)
}

/// A Lagrangian frame: the image of the first coordinate half-space under a
/// random symplectic matrix, in a random non-orthogonal basis.
fn lagrangian_frame(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut gauss =
        |r: usize, c: usize, s: f64| DMatrix::from_fn(r, c, |_, _| s * rng.sample::<f64, _>(StandardNormal));
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let (a, b) = (sym(gauss(d, d, 0.5)), sym(gauss(d, d, 0.5)));
    let g = DMatrix::identity(d, d) + gauss(d, d, 0.3);
    let mut upper = DMatrix::identity(2 * d, 2 * d);
    upper.view_mut((0, d), (d, d)).copy_from(&a);
    let mut lower = DMatrix::identity(2 * d, 2 * d);
    lower.view_mut((d, 0), (d, d)).copy_from(&b);
    let mut block = DMatrix::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(&g);
    block.view_mut((d, d), (d, d)).copy_from(&g.clone().try_inverse().expect("near-identity block").transpose());
    let s = upper * lower * block;
    let change = DMatrix::identity(d, d) + gauss(d, d, 0.3);
    s.columns(0, d) * change
}

fn c12_lagrangian() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut defect, mut residual): (f64, f64) = (0.0, 0.0);
    let mut frames = 0;
    for d in 1..=3 {
        for _ in 0..1000 {
            let b = lagrangian_frame(d, &mut rng);
            let n = lagrangian_to_standard(&SubspaceBasis::new(b.clone())?)?;
            defect = defect.max(symplectic_defect(&n.matrix)?);
            let image = n.matrix.as_matrix() * &b;
            residual = residual.max(image.rows(d, d).norm() / b.norm());
            frames += 1;
        }
    }
    Ok(vec![
        check("symplectic_defect < 1e-8", defect < 1e-8, format!("{frames} frames, worst {defect:.3e}")),
        check("frame lands in R^d x 0", residual < 1e-8, format!("worst residual {residual:.3e}")),
    ])
}

fn c13_determinism() -> Result<Vec<Check>> {
    let dir = tempfile::tempdir()?;
    let write = |name: &str, text: &str| -> Result<String> {
        let path = dir.path().join(name);
        std::fs::write(&path, text)?;
        Ok(path.to_string_lossy().into_owned())
    };
    let cat = write("cat.json", r#"{"kind":"toral-automorphism","params":{"matrix":[[2,1],[1,1]]}}"#)?;
    let full = write("full2.json", r#"{"kind":"shift","params":{"matrix":[[1,1],[1,1]]}}"#)?;
    let golden = write("golden.json", r#"{"kind":"shift","params":{"matrix":[[1,1],[1,0]]}}"#)?;
    let dust = write(
        "dust.json",
        r#"{"kind":"affine-horseshoe","params":{"uniform":{"branches":2,"contraction":0.3333333333333333,"expansion":3}}}"#,
    )?;
    let standard = write("standard.json", r#"{"kind":"standard-map","params":{"K":1.5}}"#)?;
    let cocycles = write(
        "cocycles.json",
        r#"[{"dim":2,"period":1,"factors":[[0.3333333333333333,0,0,3]]},{"dim":2,"period":1,"factors":[[0.9,0,0,1]]},{"dim":2,"period":2,"factors":[[0,-1,1,0],[2,1,1,1]]}]"#,
    )?;
    let params = write("p100.json", &serde_json::to_string(&ConstructionParams::planar_example(100))?)?;
    let inflated = write(
        "inflated.json",
        &serde_json::to_string(&ConstructionParams { eta: 10.0, ..ConstructionParams::planar_example(100) })?,
    )?;
    let model = dir.path().join("model.json").to_string_lossy().into_owned();
    let scales = (1..=6).map(|k| format!("{:?}", 3f64.powi(-k))).collect::<Vec<_>>().join(",");
    let commands: Vec<Vec<&str>> = vec![
        vec!["lyapunov", "--system", &cat],
        vec!["lyapunov", "--system", &standard, "--period", "2", "--seed", "4"],
        vec!["delta", "--spectrum", "[-1,2]"],
        vec!["delta", "--spectrum", "[-2,-1,3]", "--cuts", "[2]"],
        vec!["domination-scan", "--cocycle", &cocycles],
        vec!["sigma-k", "--system", &cat, "--k", "1"],
        vec!["build-horseshoe", "--params", &params, "--verify", "--emit-model", &model],
        vec!["verify-horseshoe", "--model", &model, "--cap", "64"],
        vec!["verify-horseshoe", "--params", &params, "--seed", "3"],
        vec!["verify-horseshoe", "--params", &params, "--l-from", &inflated],
        vec!["entropy-estimate", "--system", &golden, "--eps", "0.5,0.25", "--nmax", "12", "--seed", "2"],
        vec![
            "entropy-estimate",
            "--system",
            &cat,
            "--eps",
            "0.03125",
            "--nmax",
            "8",
            "--seed",
            "3",
            "--resolution",
            "256",
        ],
        vec!["tail-entropy", "--system", &full, "--eps", "2,0.25", "--delta", "0.125,0.5", "--seed", "5"],
        vec!["katok-entropy", "--system", &full, "--eps", "0.25", "--probs", "0.9,0.1", "--seed", "9"],
        vec!["katok-entropy", "--system", &cat, "--eps", "0.1", "--nmax", "6", "--samples", "5000", "--seed", "9"],
        vec!["box-dim", "--system", &dust, "--scales", &scales, "--points", "50000", "--seed", "3"],
        vec!["--format", "csv", "entropy-estimate", "--system", &full, "--eps", "0.25", "--nmax", "10", "--seed", "1"],
    ];
    let mut checks = Vec::new();
    for args in &commands {
        let (c1, o1, _) = cli::run_captured(args);
        let (c2, o2, _) = cli::run_captured(args);
        let out = dir.path().join("out.txt");
        let out_str = out.to_string_lossy().into_owned();
        let mut with_out = args.clone();
        with_out.extend(["--out", &out_str]);
        let _ = std::fs::remove_file(&out);
        let (c3, _, _) = cli::run_captured(&with_out);
        let o3 = std::fs::read(&out).unwrap_or_default();
        let same = c1 == c2 && c1 == c3 && o1 == o2 && o1 == o3 && (c1 != 0 || !o1.is_empty());
        checks.push(check(
            args.join(" ").replace(dir.path().to_string_lossy().as_ref(), "."),
            same,
            format!("exit {c1}, {} bytes", o1.len()),
        ));
    }
    Ok(checks)
}
