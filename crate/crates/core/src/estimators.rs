//! Scale-based entropy estimators: Bowen balls, separated sets, topological,
//! tail and Katok entropy, and a box-counting dimension oracle.
//!
//! All counts are taken over finite sample sets with greedy maximal families,
//! so they are lower bounds for the quantities they stand in for. Limits in
//! `n` are replaced by least-squares slopes of `log count` over
//! `n ∈ [nmax/2, nmax]`, reported with the RMS fit residual.
//!
//! Greedy insertion order is a seeded shuffle fixed before any distance is
//! evaluated. Orbits are computed in parallel in fixed-size chunks and merged
//! in order, so results do not depend on the thread count.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Key of a Bowen-partition cell.
pub type Cell = Vec<i64>;

const CHUNK: usize = 1 << 14;

/// A metric ball: `d ≤ r` or `d < r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ball {
    Closed(f64),
    Open(f64),
}

impl Ball {
    pub fn radius(self) -> f64 {
        match self {
            Ball::Closed(r) | Ball::Open(r) => r,
        }
    }

    pub fn contains(self, d: f64) -> bool {
        match self {
            Ball::Closed(r) => d <= r,
            Ball::Open(r) => d < r,
        }
    }
}

/// A forward/backward evaluable map on a metric space.
pub trait SampledSystem: Sync {
    type State: Clone + Send + Sync;

    fn forward(&self, x: &Self::State) -> Result<Self::State>;
    fn backward(&self, x: &Self::State) -> Result<Self::State>;
    fn distance(&self, x: &Self::State, y: &Self::State) -> f64;
    /// Largest number of iterates the evaluation is trusted for.
    fn horizon(&self) -> usize;
    /// Cell of the orbit `x, …, f^{n−1}(x)`. Orbits whose Bowen distance lies
    /// in `ball` must have cells related by [`SampledSystem::any_neighbor_cell`].
    fn bowen_cell(&self, orbit: &[Self::State], ball: Ball) -> Cell;
    /// Whether `hit` holds for some cell that may hold orbits within `ball` of
    /// an orbit in `cell`. The cells are visited starting with `cell` itself.
    fn any_neighbor_cell(&self, cell: &Cell, ball: Ball, hit: &mut dyn FnMut(&Cell) -> bool) -> bool;
    /// Bowen balls coincide with cells (ultrametric systems).
    fn cells_are_balls(&self) -> bool {
        false
    }
    /// Which Bowen ball the counts use, recorded with every count.
    fn ball_note(&self) -> &'static str;
}

/// Indexed sample set; lets large grids be generated on demand.
pub trait SampleSource<S>: Sync {
    fn len(&self) -> usize;
    fn get(&self, i: usize) -> S;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<S: Clone + Sync> SampleSource<S> for [S] {
    fn len(&self) -> usize {
        <[S]>::len(self)
    }
    fn get(&self, i: usize) -> S {
        self[i].clone()
    }
}

impl<S: Clone + Sync> SampleSource<S> for Vec<S> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }
    fn get(&self, i: usize) -> S {
        self[i].clone()
    }
}

/// Centres of a `resolution^d` grid on the cube `origin + [0, side)^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GridWindow {
    pub origin: Vec<f64>,
    pub side: f64,
    pub resolution: usize,
}

impl GridWindow {
    pub fn new(origin: Vec<f64>, side: f64, resolution: usize) -> Result<Self> {
        if origin.is_empty() || !(side > 0.0) || resolution == 0 {
            return Err(Error::pre("grid needs a nonempty origin, positive side and resolution"));
        }
        resolution.checked_pow(origin.len() as u32).ok_or_else(|| Error::pre("grid has too many points"))?;
        Ok(Self { origin, side, resolution })
    }
}

impl SampleSource<Vec<f64>> for GridWindow {
    fn len(&self) -> usize {
        self.resolution.pow(self.origin.len() as u32)
    }

    fn get(&self, mut i: usize) -> Vec<f64> {
        let h = self.side / self.resolution as f64;
        self.origin
            .iter()
            .map(|o| {
                let c = i % self.resolution;
                i /= self.resolution;
                crate::systems::mod_one(o + (c as f64 + 0.5) * h)
            })
            .collect()
    }
}

fn orbit<Y: SampledSystem + ?Sized>(sys: &Y, x: Y::State, n: usize) -> Result<Vec<Y::State>> {
    if n > sys.horizon() {
        return Err(Error::pre(format!("{n} iterates exceed the system horizon {}", sys.horizon())));
    }
    let mut out = Vec::with_capacity(n);
    out.push(x);
    for k in 1..n {
        let next = sys.forward(&out[k - 1])?;
        out.push(next);
    }
    Ok(out)
}

/// Whether two orbits stay within `ball` at every iterate, checked from the
/// last iterate back, since greedy candidates usually part late.
fn bowen_close<Y: SampledSystem + ?Sized>(sys: &Y, a: &[Y::State], b: &[Y::State], ball: Ball) -> bool {
    a.iter().rev().zip(b.iter().rev()).all(|(x, y)| ball.contains(sys.distance(x, y)))
}

/// `d(f^k(center), f^k(candidate)) < eps` for all `0 ≤ k < n`.
pub fn bowen_ball_contains<Y: SampledSystem + ?Sized>(
    sys: &Y,
    center: &Y::State,
    candidate: &Y::State,
    eps: f64,
    n: usize,
) -> Result<bool> {
    if n == 0 || !(eps > 0.0) {
        return Err(Error::pre("Bowen ball needs n ≥ 1 and eps > 0"));
    }
    if n > sys.horizon() {
        return Err(Error::pre(format!("{n} iterates exceed the system horizon {}", sys.horizon())));
    }
    let (mut x, mut y) = (center.clone(), candidate.clone());
    for k in 0..n {
        if !(sys.distance(&x, &y) < eps) {
            return Ok(false);
        }
        if k + 1 < n {
            x = sys.forward(&x)?;
            y = sys.forward(&y)?;
        }
    }
    Ok(true)
}

/// A count at scales `(n, δ, ε)` with the metadata needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScaleCount {
    pub n: usize,
    pub eps: f64,
    /// Separation scale of a two-scale count; `None` for plain separated sets.
    pub delta: Option<f64>,
    pub count: u64,
    /// Counts from greedy families over samples bound the true maximum below.
    pub lower_bound: bool,
    pub order_seed: u64,
    pub sample_size: usize,
    pub ball: String,
    pub warning: Option<String>,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

type Prepared<S> = (Vec<S>, Cell);

/// Orbits and cells of `order[range]`, computed in parallel, returned in order.
fn prepare<Y, P>(sys: &Y, samples: &P, idx: &[usize], n: usize, ball: Ball) -> Result<Vec<Prepared<Y::State>>>
where
    Y: SampledSystem + ?Sized,
    P: SampleSource<Y::State> + ?Sized,
{
    idx.par_iter()
        .map(|&i| {
            let o = orbit(sys, samples.get(i), n)?;
            let c = sys.bowen_cell(&o, ball);
            Ok((o, c))
        })
        .collect()
}

/// Greedy `(n, ε)`-separated subsets for every `n` in `ns`: a candidate
/// joins unless some member is within Bowen distance `ε`. Each candidate's
/// orbit is computed once and shared by all lengths.
fn separated_counts<Y, P>(sys: &Y, samples: &P, ns: &[usize], eps: f64, seed: u64) -> Result<Vec<u64>>
where
    Y: SampledSystem + ?Sized,
    P: SampleSource<Y::State> + ?Sized,
{
    let ball = Ball::Closed(eps);
    let order = shuffled(samples.len(), seed);
    let nmax = ns.iter().copied().max().unwrap_or(0);
    if sys.cells_are_balls() {
        let mut cells: Vec<HashSet<Cell>> = vec![HashSet::default(); ns.len()];
        for chunk in order.chunks(CHUNK) {
            let orbits: Vec<Vec<Y::State>> =
                chunk.par_iter().map(|&i| orbit(sys, samples.get(i), nmax)).collect::<Result<_>>()?;
            cells.par_iter_mut().zip(ns).for_each(|(set, &n)| {
                for o in &orbits {
                    set.insert(sys.bowen_cell(&o[..n], ball));
                }
            });
        }
        return Ok(cells.iter().map(|c| c.len() as u64).collect());
    }
    struct Greedy<S> {
        n: usize,
        members: Vec<Vec<S>>,
        buckets: HashMap<Cell, Vec<usize>>,
    }
    let mut states: Vec<Greedy<Y::State>> =
        ns.iter().map(|&n| Greedy { n, members: Vec::new(), buckets: HashMap::default() }).collect();
    for chunk in order.chunks(CHUNK) {
        let orbits: Vec<Vec<Y::State>> =
            chunk.par_iter().map(|&i| orbit(sys, samples.get(i), nmax)).collect::<Result<_>>()?;
        states.par_iter_mut().for_each(|g| {
            for o in &orbits {
                let o = &o[..g.n];
                let c = sys.bowen_cell(o, ball);
                let near = sys.any_neighbor_cell(&c, ball, &mut |nc| {
                    g.buckets.get(nc).is_some_and(|b| b.iter().any(|&m| bowen_close(sys, o, &g.members[m], ball)))
                });
                if !near {
                    g.buckets.entry(c).or_default().push(g.members.len());
                    g.members.push(o.to_vec());
                }
            }
        });
    }
    Ok(states.iter().map(|g| g.members.len() as u64).collect())
}

/// Greedy family within the samples that is pairwise `ε`-close along `n`
/// iterates and pairwise `δ`-separated at some iterate: the count `s(n, δ, ε)`.
pub fn max_separated_set<Y, P>(sys: &Y, samples: &P, n: usize, delta: f64, eps: f64, seed: u64) -> Result<ScaleCount>
where
    Y: SampledSystem + ?Sized,
    P: SampleSource<Y::State> + ?Sized,
{
    if !(delta > 0.0 && delta < eps) || n == 0 {
        return Err(Error::pre("max_separated_set needs 0 < delta < eps and n ≥ 1"));
    }
    let mut out = ScaleCount {
        n,
        eps,
        delta: Some(delta),
        count: 0,
        lower_bound: true,
        order_seed: seed,
        sample_size: samples.len(),
        ball: sys.ball_note().to_string(),
        warning: None,
    };
    if samples.is_empty() {
        out.warning = Some("empty sample set".to_string());
        return Ok(out);
    }
    let (close, sep) = (Ball::Closed(eps), Ball::Closed(delta));
    let order = shuffled(samples.len(), seed);
    if sys.cells_are_balls() {
        // Pairwise ε-closeness is closeness to the first member; separation
        // is a distinct δ-cell.
        let mut anchor: Option<Cell> = None;
        let mut seen = HashSet::default();
        for chunk in order.chunks(CHUNK) {
            for (o, _) in prepare(sys, samples, chunk, n, sep)? {
                let a = sys.bowen_cell(&o, close);
                if anchor.get_or_insert_with(|| a.clone()) == &a {
                    seen.insert(sys.bowen_cell(&o, sep));
                }
            }
        }
        out.count = seen.len() as u64;
        return Ok(out);
    }
    let mut members: Vec<Vec<Y::State>> = Vec::new();
    let mut buckets: HashMap<Cell, Vec<usize>> = HashMap::default();
    for chunk in order.chunks(CHUNK) {
        for (o, c) in prepare(sys, samples, chunk, n, sep)? {
            if let Some(first) = members.first() {
                if !bowen_close(sys, &o, first, close) {
                    continue;
                }
            }
            let too_near = sys.any_neighbor_cell(&c, sep, &mut |nc| {
                buckets.get(nc).is_some_and(|b| b.iter().any(|&m| bowen_close(sys, &o, &members[m], sep)))
            });
            if too_near || !members.iter().all(|m| bowen_close(sys, &o, m, close)) {
                continue;
            }
            buckets.entry(c).or_default().push(members.len());
            members.push(o);
        }
    }
    out.count = members.len() as u64;
    Ok(out)
}

/// Least-squares slope of `ys` against `xs` and the RMS residual.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::num(format!("degenerate fit: {} points", xs.len().min(ys.len()))));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::num("degenerate fit: non-finite ordinate (zero count?)"));
    }
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    // Centre on the first ordinate so constant data yields an exact zero.
    let y0 = ys[0];
    let ybar = ys.iter().map(|y| y - y0).sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::num("degenerate fit: all abscissae equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - y0 - ybar)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - y0 - ybar - slope * (x - xbar)).powi(2)).sum();
    Ok((slope, (rss / m).sqrt()))
}

fn fit_range(nmax: usize) -> Result<Vec<usize>> {
    let lo = (nmax / 2).max(1);
    if nmax < lo + 2 {
        return Err(Error::num(format!("degenerate fit: nmax = {nmax} leaves fewer than 3 points")));
    }
    Ok((lo..=nmax).collect())
}

fn log_counts(counts: &[ScaleCount]) -> (Vec<f64>, Vec<f64>) {
    counts.iter().map(|c| (c.n as f64, (c.count as f64).ln())).unzip()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScaleSlope {
    pub eps: f64,
    pub counts: Vec<ScaleCount>,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TopologicalEntropyEstimate {
    pub scales: Vec<ScaleSlope>,
    /// Slopes are nondecreasing as `ε` decreases.
    pub monotone: bool,
}

impl TopologicalEntropyEstimate {
    /// Slope at the smallest scale.
    pub fn finest(&self) -> f64 {
        self.scales.last().map_or(0.0, |s| s.slope)
    }
}

/// Growth rate of greedy `(n, ε)`-separated sets within the samples, per `ε`.
pub fn topological_entropy_estimate<Y, P>(
    sys: &Y,
    samples: &P,
    scales: &[f64],
    nmax: usize,
    seed: u64,
) -> Result<TopologicalEntropyEstimate>
where
    Y: SampledSystem + ?Sized,
    P: SampleSource<Y::State> + ?Sized,
{
    if scales.is_empty() || scales.iter().any(|e| !(*e > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::pre("scales must be positive and strictly decreasing"));
    }
    if samples.is_empty() {
        return Err(Error::pre("empty sample set"));
    }
    let ns = fit_range(nmax)?;
    let mut out = Vec::with_capacity(scales.len());
    for &eps in scales {
        let counts: Vec<ScaleCount> = ns
            .iter()
            .zip(separated_counts(sys, samples, &ns, eps, seed)?)
            .map(|(&n, count)| ScaleCount {
                n,
                eps,
                delta: None,
                count,
                lower_bound: true,
                order_seed: seed,
                sample_size: samples.len(),
                ball: sys.ball_note().to_string(),
                warning: None,
            })
            .collect();
        let (xs, ys) = log_counts(&counts);
        let (slope, residual) = fit_slope(&xs, &ys)?;
        out.push(ScaleSlope { eps, counts, slope, residual });
    }
    let monotone = out.windows(2).all(|w| w[1].slope >= w[0].slope - 1e-12);
    Ok(TopologicalEntropyEstimate { scales: out, monotone })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailCell {
    pub eps: f64,
    pub delta: f64,
    pub counts: Vec<ScaleCount>,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailEntropyTable {
    pub cells: Vec<TailCell>,
    /// Growth rate at the smallest `ε` and smallest `δ`: an estimate of `h*`.
    pub h_star_estimate: f64,
    /// `(δ, slope)` at the smallest `ε`.
    pub eps_slice: Vec<(f64, f64)>,
    /// `(ε, slope)` at the smallest `δ` paired with each `ε`.
    pub delta_slice: Vec<(f64, f64)>,
    /// Pairs with `δ ≥ ε`, which are not counted.
    pub skipped: Vec<(f64, f64)>,
    /// Breaches of the monotonicity of `s(n, δ, ε)` in `n`, `δ` and `ε`.
    pub violations: Vec<String>,
}

/// Growth rates of the two-scale counts `s(n, δ, ε)` over every pair with
/// `δ < ε`.
pub fn tail_entropy_estimate<Y, P>(
    sys: &Y,
    samples: &P,
    eps_list: &[f64],
    delta_list: &[f64],
    nmax: usize,
    seed: u64,
) -> Result<TailEntropyTable>
where
    Y: SampledSystem + ?Sized,
    P: SampleSource<Y::State> + ?Sized,
{
    if eps_list.is_empty() || delta_list.is_empty() {
        return Err(Error::pre("tail entropy needs at least one eps and one delta"));
    }
    let ns = fit_range(nmax)?;
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for &eps in eps_list {
        for &delta in delta_list {
            if !(delta < eps) {
                skipped.push((eps, delta));
                continue;
            }
            let counts =
                ns.iter().map(|&n| max_separated_set(sys, samples, n, delta, eps, seed)).collect::<Result<Vec<_>>>()?;
            let (xs, ys) = log_counts(&counts);
            let (slope, residual) = if counts.iter().any(|c| c.count == 0) { (0.0, 0.0) } else { fit_slope(&xs, &ys)? };
            cells.push(TailCell { eps, delta, counts, slope, residual });
        }
    }
    if cells.is_empty() {
        return Err(Error::pre("no (eps, delta) pair has delta < eps"));
    }
    let min_eps = cells.iter().map(|c| c.eps).fold(f64::INFINITY, f64::min);
    let eps_slice: Vec<(f64, f64)> = cells.iter().filter(|c| c.eps == min_eps).map(|c| (c.delta, c.slope)).collect();
    let mut delta_slice = Vec::new();
    for &eps in eps_list {
        if let Some(c) = cells.iter().filter(|c| c.eps == eps).min_by(|a, b| a.delta.total_cmp(&b.delta)) {
            delta_slice.push((eps, c.slope));
        }
    }
    let diag =
        cells.iter().filter(|c| c.eps == min_eps).min_by(|a, b| a.delta.total_cmp(&b.delta)).expect("nonempty slice");
    let h_star_estimate = diag.slope;
    let violations = tail_violations(&cells);
    Ok(TailEntropyTable { cells, h_star_estimate, eps_slice, delta_slice, skipped, violations })
}

fn tail_violations(cells: &[TailCell]) -> Vec<String> {
    let mut v = Vec::new();
    for c in cells {
        for w in c.counts.windows(2) {
            if w[1].count < w[0].count {
                v.push(format!("count decreases in n at eps={}, delta={}, n={}", c.eps, c.delta, w[1].n));
            }
        }
    }
    for a in cells {
        for b in cells {
            let same_delta_smaller_eps = a.delta == b.delta && b.eps < a.eps;
            let same_eps_smaller_delta = a.eps == b.eps && b.delta < a.delta;
            if !(same_delta_smaller_eps || same_eps_smaller_delta) {
                continue;
            }
            for (x, y) in a.counts.iter().zip(&b.counts) {
                if same_delta_smaller_eps && y.count > x.count {
                    v.push(format!("count increases as eps decreases at delta={}, n={}", a.delta, x.n));
                }
                if same_eps_smaller_delta && y.count < x.count {
                    v.push(format!("count decreases as delta decreases at eps={}, n={}", a.eps, x.n));
                }
            }
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KatokEstimate {
    pub eps: f64,
    /// `(n, number of Bowen balls covering half the samples)`.
    pub counts: Vec<(usize, u64)>,
    pub slope: f64,
    pub residual: f64,
    pub sample_size: usize,
    pub ball: String,
}

/// Balls whose average coverage falls below this many samples signal that
/// the cover is limited by the sample size.
pub const MIN_MEAN_COVERAGE: f64 = 2.0;

/// Greedy cover of half the samples by open Bowen balls `B(x, ε, n)` centred
/// at samples; returns the growth rate of the cover size.
pub fn katok_entropy_estimate<Y, P>(sys: &Y, samples: &P, eps: f64, nmax: usize) -> Result<KatokEstimate>
where
    Y: SampledSystem + ?Sized,
    P: SampleSource<Y::State> + ?Sized,
{
    if !(eps > 0.0) {
        return Err(Error::pre("eps must be positive"));
    }
    if samples.is_empty() {
        return Err(Error::pre("empty sample set"));
    }
    let ns = fit_range(nmax)?;
    let total = samples.len();
    let need = total.div_ceil(2);
    let ball = Ball::Open(eps);
    let idx: Vec<usize> = (0..total).collect();
    let mut counts = Vec::with_capacity(ns.len());
    for &n in &ns {
        let prepared = idx.chunks(CHUNK).map(|c| prepare(sys, samples, c, n, ball)).collect::<Result<Vec<_>>>()?;
        let prepared: Vec<Prepared<Y::State>> = prepared.into_iter().flatten().collect();
        let balls = if sys.cells_are_balls() {
            cover_by_cells(&prepared, need)
        } else {
            greedy_cover(sys, &prepared, ball, need)
        };
        if (need as f64) < MIN_MEAN_COVERAGE * balls as f64 {
            return Err(Error::num(format!(
                "insufficient samples: covering half of {total} samples at n = {n} took {balls} balls; draw more samples"
            )));
        }
        counts.push((n, balls));
    }
    let xs: Vec<f64> = counts.iter().map(|c| c.0 as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let (slope, residual) = fit_slope(&xs, &ys)?;
    Ok(KatokEstimate { eps, counts, slope, residual, sample_size: total, ball: sys.ball_note().to_string() })
}

fn cover_by_cells<S>(prepared: &[Prepared<S>], need: usize) -> u64 {
    let mut freq: HashMap<&Cell, usize> = HashMap::default();
    for (_, c) in prepared {
        *freq.entry(c).or_default() += 1;
    }
    let mut sizes: Vec<usize> = freq.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut covered = 0;
    let mut balls = 0;
    for s in sizes {
        if covered >= need {
            break;
        }
        covered += s;
        balls += 1;
    }
    balls
}

/// Lazy greedy maximum coverage; ties go to the lowest sample index.
fn greedy_cover<Y: SampledSystem + ?Sized>(sys: &Y, prepared: &[Prepared<Y::State>], ball: Ball, need: usize) -> u64 {
    let mut buckets: HashMap<&Cell, Vec<usize>> = HashMap::default();
    for (i, (_, c)) in prepared.iter().enumerate() {
        buckets.entry(c).or_default().push(i);
    }
    let members: Vec<Vec<usize>> = prepared
        .par_iter()
        .map(|(o, c)| {
            let mut m: Vec<usize> = Vec::new();
            sys.any_neighbor_cell(c, ball, &mut |nc| {
                let near = buckets.get(nc).into_iter().flatten().copied();
                m.extend(near.filter(|&j| bowen_close(sys, o, &prepared[j].0, ball)));
                false
            });
            m.sort_unstable();
            m.dedup();
            m
        })
        .collect();
    let mut covered = vec![false; prepared.len()];
    let mut heap: BinaryHeap<(usize, std::cmp::Reverse<usize>)> =
        members.iter().enumerate().map(|(i, m)| (m.len(), std::cmp::Reverse(i))).collect();
    let (mut done, mut balls) = (0, 0);
    while done < need {
        let Some((gain, std::cmp::Reverse(i))) = heap.pop() else { break };
        let fresh = members[i].iter().filter(|&&j| !covered[j]).count();
        if fresh < gain {
            heap.push((fresh, std::cmp::Reverse(i)));
            continue;
        }
        for &j in &members[i] {
            covered[j] = true;
        }
        done += fresh;
        balls += 1;
    }
    balls
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoxDimension {
    /// `(r, number of occupied boxes of side r)`.
    pub counts: Vec<(f64, u64)>,
    pub dimension: f64,
    pub residual: f64,
}

/// Least-squares slope of `log N(r)` against `log(1/r)`, where `N(r)` counts
/// the grid boxes of side `r` met by the cloud.
pub fn box_counting_dimension(cloud: &[Vec<f64>], scales: &[f64]) -> Result<BoxDimension> {
    if cloud.len() < 1000 {
        return Err(Error::pre(format!("box counting needs at least 1000 points, got {}", cloud.len())));
    }
    let d = cloud[0].len();
    if cloud.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::pre("points must be finite and of equal dimension"));
    }
    if scales.len() < 4 || scales.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::pre("box counting needs at least 4 positive scales"));
    }
    let (lo, hi) = scales.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if hi < 10.0 * lo {
        return Err(Error::pre("scales must span at least a decade"));
    }
    let counts: Vec<(f64, u64)> = scales
        .par_iter()
        .map(|&r| {
            let boxes: HashSet<Vec<i64>> =
                cloud.iter().map(|p| p.iter().map(|v| (v / r).floor() as i64).collect()).collect();
            (r, boxes.len() as u64)
        })
        .collect();
    let xs: Vec<f64> = counts.iter().map(|c| -c.0.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let (dimension, residual) = fit_slope(&xs, &ys)?;
    Ok(BoxDimension { counts, dimension, residual })
}
