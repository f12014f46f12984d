//! Subshifts of finite type: entropy, cylinder counts and the symbolic metric.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// 0/1 transition matrix of a vertex shift. Row `i` lists the symbols that
/// may follow `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<bool>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::pre("transition matrix is empty"));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != size {
                return Err(Error::pre(format!("row {i} has {} entries, expected {size}", r.len())));
            }
            for &x in r {
                match x {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    _ => return Err(Error::pre(format!("entry {x} in row {i} is not 0 or 1"))),
                }
            }
        }
        let t = Self { size, entries };
        for i in 0..size {
            if !(0..size).any(|j| t.get(i, j)) {
                return Err(Error::pre(format!("symbol {i} has no successor")));
            }
            if !(0..size).any(|j| t.get(j, i)) {
                return Err(Error::pre(format!("symbol {i} has no predecessor")));
            }
        }
        Ok(t)
    }

    pub fn all_ones(size: usize) -> Self {
        assert!(size > 0);
        Self { size, entries: vec![true; size * size] }
    }

    /// `[[1,1],[1,0]]`: no two consecutive 1s.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![1, 1], vec![1, 0]]).unwrap()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.size + j]
    }

    pub fn is_all_ones(&self) -> bool {
        self.entries.iter().all(|&x| x)
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.size).map(|r| r.iter().map(|&x| x as u8).collect()).collect()
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.size).filter(move |&j| self.get(i, j))
    }
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TransitionMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(d)?;
        Self::new(rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SftEntropy {
    /// Log of the Perron root.
    pub entropy: f64,
    /// Collatz–Wielandt bracket on the Perron root.
    pub root_bounds: (f64, f64),
    /// Set when the matrix is reducible and only the dominant component counts.
    pub reducible: bool,
}

const SFT_REL_TOL: f64 = 1e-10;
const SFT_MAX_ITERS: usize = 1_000_000;

/// Perron root of an irreducible block by power iteration on `I + A`,
/// which is primitive, stopping once the Collatz–Wielandt bracket is tight.
fn perron_root(t: &TransitionMatrix, block: &[usize]) -> Result<(f64, f64)> {
    let m = block.len();
    let mut x = vec![1.0; m];
    for _ in 0..SFT_MAX_ITERS {
        let y: Vec<f64> = block
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                x[a] + block.iter().enumerate().filter(|&(_, &j)| t.get(i, j)).map(|(b, _)| x[b]).sum::<f64>()
            })
            .collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let (lo, hi) = (lo - 1.0, hi - 1.0);
        if hi - lo <= SFT_REL_TOL * lo.max(f64::MIN_POSITIVE) || (hi == 0.0 && lo == 0.0) {
            return Ok((lo, hi));
        }
        let s = y.iter().copied().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / s).collect();
    }
    Err(Error::num("power iteration for the Perron root did not converge"))
}

/// Topological entropy `log ρ(A)` of the vertex shift.
pub fn sft_entropy(t: &TransitionMatrix) -> Result<SftEntropy> {
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..t.size()).map(|_| g.add_node(())).collect();
    for i in 0..t.size() {
        for j in t.successors(i) {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    let sccs = tarjan_scc(&g);
    let reducible = sccs.len() > 1;
    let mut best: Option<(f64, f64)> = None;
    for comp in sccs {
        let mut block: Vec<usize> = comp.iter().map(|n| n.index()).collect();
        block.sort_unstable();
        if block.len() == 1 && !t.get(block[0], block[0]) {
            continue;
        }
        let (lo, hi) = perron_root(t, &block)?;
        if best.is_none_or(|(_, bh)| hi > bh) {
            best = Some((lo, hi));
        }
    }
    let (lo, hi) = best.ok_or_else(|| Error::num("transition graph has no cycle"))?;
    Ok(SftEntropy { entropy: (0.5 * (lo + hi)).ln(), root_bounds: (lo, hi), reducible })
}

/// Number of admissible words of length `n`: `1ᵀ Aⁿ⁻¹ 1`.
pub fn cylinder_count(t: &TransitionMatrix, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::pre("word length must be at least 1"));
    }
    let mut v = vec![BigUint::one(); t.size()];
    for _ in 1..n {
        v = (0..t.size()).map(|i| t.successors(i).fold(BigUint::zero(), |acc, j| acc + &v[j])).collect();
    }
    Ok(v.into_iter().sum())
}

/// A bi-infinite sequence that is periodic to the left of a finite window and
/// periodic to its right.
///
/// Position `start + i` holds `center[i]`; positions left of `start` repeat
/// `left` (whose last symbol sits at `start − 1`), positions after the window
/// repeat `right`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPoint {
    left: Vec<u32>,
    center: Vec<u32>,
    start: i64,
    right: Vec<u32>,
}

impl ShiftPoint {
    pub fn new(left: Vec<u32>, center: Vec<u32>, start: i64, right: Vec<u32>) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::pre("tail periods must be nonempty"));
        }
        Ok(Self { left, center, start, right })
    }

    /// `word` placed at positions `start..`, with constant tails `fill`.
    pub fn from_word(word: &[u32], start: i64, fill: u32) -> Self {
        Self { left: vec![fill], center: word.to_vec(), start, right: vec![fill] }
    }

    /// The periodic point `…www.www…` with `w[0]` at position 0.
    pub fn periodic(word: &[u32]) -> Result<Self> {
        Self::new(word.to_vec(), Vec::new(), 0, word.to_vec())
    }

    pub fn symbol(&self, k: i64) -> u32 {
        let end = self.start + self.center.len() as i64;
        if k < self.start {
            let p = self.left.len() as i64;
            self.left[(k - self.start).rem_euclid(p) as usize]
        } else if k < end {
            self.center[(k - self.start) as usize]
        } else {
            let p = self.right.len() as i64;
            self.right[(k - end).rem_euclid(p) as usize]
        }
    }

    /// The left shift `(σx)_k = x_{k+1}`, iterated `n` times.
    pub fn shifted(&self, n: i64) -> Self {
        Self { start: self.start - n, ..self.clone() }
    }

    /// Beyond `±radius()` both tails are purely periodic.
    fn radius(&self) -> i64 {
        self.start.abs().max((self.start + self.center.len() as i64).abs()) + 1
    }

    fn tail_periods(&self) -> (u64, u64) {
        (self.left.len() as u64, self.right.len() as u64)
    }

    pub fn max_symbol(&self) -> u32 {
        self.left.iter().chain(&self.center).chain(&self.right).copied().max().unwrap_or(0)
    }

    /// Every transition of the sequence is allowed by `t`.
    pub fn is_admissible(&self, t: &TransitionMatrix) -> bool {
        if self.max_symbol() as usize >= t.size() {
            return false;
        }
        let r = self.radius();
        let lo = -r - self.left.len() as i64 - 1;
        let hi = r + self.right.len() as i64 + 1;
        (lo..hi).all(|k| t.get(self.symbol(k) as usize, self.symbol(k + 1) as usize))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least `|k|` with `x_k ≠ y_k`, or `None` when the sequences agree.
pub fn first_difference(x: &ShiftPoint, y: &ShiftPoint) -> Option<u64> {
    let (xl, xr) = x.tail_periods();
    let (yl, yr) = y.tail_periods();
    let lcm = |a: u64, b: u64| a / gcd(a, b) * b;
    // Past the windows each side is periodic; one common period more decides agreement.
    let reach = x.radius().max(y.radius()) as u64 + lcm(xl, yl).max(lcm(xr, yr));
    (0..=reach).find(|&j| {
        let j = j as i64;
        x.symbol(j) != y.symbol(j) || x.symbol(-j) != y.symbol(-j)
    })
}

/// `2^{−min{|k| : x_k ≠ y_k}}`, and 0 for equal sequences.
pub fn shift_metric(x: &ShiftPoint, y: &ShiftPoint) -> f64 {
    match first_difference(x, y) {
        None => 0.0,
        Some(j) => 0.5f64.powi(j.min(i32::MAX as u64) as i32),
    }
}
