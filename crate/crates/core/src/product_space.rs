//! Matrix sets, switched pairs and enumeration of interleaved products
//! `A_n B_n ... A_1 B_1`.
//!
//! The four finite-horizon quantities are two-player games over index words:
//!
//! | quantity        | outer player          | inner player          | leaf value |
//! |-----------------|-----------------------|-----------------------|------------|
//! | `max_min_norm`  | A-word, maximizes     | B-word, minimizes     | `‖Π‖`      |
//! | `min_max_norm`  | B-word, minimizes     | A-word, maximizes     | `‖Π‖`      |
//! | `max_min_rho`   | A-word, maximizes     | B-word, minimizes     | `ρ(Π)`     |
//! | `min_max_rho`   | B-word, minimizes     | A-word, maximizes     | `ρ(Π)`     |
//!
//! The inner player sees the complete outer word before answering, so the
//! search walks the outer word depth first while carrying every inner prefix
//! (the "frontier") and its partial product. With pruning enabled, induced
//! norm bounds cut outer prefixes that cannot beat the incumbent and drop
//! frontier entries that are dominated for every completion. All cuts carry a
//! relative safety margin so a pruned leaf is always strictly worse than the
//! incumbent; together with lexicographic enumeration this makes pruned and
//! exhaustive runs return the same value and the same witness.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{self, co_norm, mat_mul, Matrix, NormKind};

/// A finite, non-empty, ordered set of matrices sharing one shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixSet {
    rows: usize,
    cols: usize,
    members: Vec<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl MatrixSet {
    pub fn new(members: Vec<Matrix>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySet)?;
        let shape = first.shape();
        for (index, m) in members.iter().enumerate() {
            if m.shape() != shape {
                return Err(Error::ShapeMismatch {
                    index,
                    expected: shape,
                    got: m.shape(),
                });
            }
        }
        Ok(Self {
            rows: shape.0,
            cols: shape.1,
            members,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.members.len() {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {} members",
                labels.len(),
                self.members.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidLabels(format!("duplicate label '{l}'")));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The one-element set `{I}` of size `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            members: vec![Matrix::identity(n)],
            labels: Some(vec!["I".to_string()]),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn members(&self) -> &[Matrix] {
        &self.members
    }

    pub fn get(&self, i: usize) -> Option<&Matrix> {
        self.members.get(i)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of member `i`, falling back to `{prefix}{i}`.
    pub fn label_or(&self, i: usize, prefix: &str) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => format!("{prefix}{i}"),
        }
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

/// A pair `(A: N x M, B: M x N)` whose step products `A B` are `N x N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchedPair {
    a: MatrixSet,
    b: MatrixSet,
}

impl SwitchedPair {
    pub fn new(a: MatrixSet, b: MatrixSet) -> Result<Self> {
        if a.cols != b.rows || a.rows != b.cols {
            return Err(Error::DimensionMismatch {
                op: "switched pair",
                left: a.shape(),
                right: b.shape(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &MatrixSet {
        &self.a
    }

    pub fn b(&self) -> &MatrixSet {
        &self.b
    }

    /// Dimension `N` of the state space.
    pub fn dim(&self) -> usize {
        self.a.rows
    }

    /// All step products, indexed `[a][b]`.
    pub fn step_products(&self) -> Vec<Vec<Matrix>> {
        self.a
            .members
            .iter()
            .map(|a| {
                self.b
                    .members
                    .iter()
                    .map(|b| mat_mul(a, b).expect("shapes checked on construction"))
                    .collect()
            })
            .collect()
    }
}

/// Factor choices `(a_1..a_n)`, `(b_1..b_n)`; index 1 acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IndexWord {
    pub a_indices: Vec<usize>,
    pub b_indices: Vec<usize>,
}

impl IndexWord {
    pub fn new(a_indices: Vec<usize>, b_indices: Vec<usize>) -> Result<Self> {
        if a_indices.len() != b_indices.len() {
            return Err(Error::InvalidData {
                expected: a_indices.len(),
                got: b_indices.len(),
            });
        }
        Ok(Self {
            a_indices,
            b_indices,
        })
    }

    pub fn len(&self) -> usize {
        self.a_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_indices.is_empty()
    }

    pub fn validate(&self, pair: &SwitchedPair) -> Result<()> {
        if self.a_indices.len() != self.b_indices.len() {
            return Err(Error::InvalidData {
                expected: self.a_indices.len(),
                got: self.b_indices.len(),
            });
        }
        for &i in &self.a_indices {
            if i >= pair.a.len() {
                return Err(Error::IndexOutOfRange {
                    what: "A set",
                    index: i,
                    len: pair.a.len(),
                });
            }
        }
        for &j in &self.b_indices {
            if j >= pair.b.len() {
                return Err(Error::IndexOutOfRange {
                    what: "B set",
                    index: j,
                    len: pair.b.len(),
                });
            }
        }
        Ok(())
    }
}

/// `A_{a_n} B_{b_n} ... A_{a_1} B_{b_1}` and its norm. The empty word gives `I`.
pub fn eval_product(pair: &SwitchedPair, word: &IndexWord, kind: NormKind) -> Result<(Matrix, f64)> {
    word.validate(pair)?;
    let mut q = Matrix::identity(pair.dim());
    for (&i, &j) in word.a_indices.iter().zip(&word.b_indices) {
        let step = mat_mul(&pair.a.members[i], &pair.b.members[j])?;
        q = mat_mul(&step, &q)?;
    }
    let norm = linalg::op_norm(&q, kind);
    Ok((q, norm))
}

/// Value of a finite-horizon game together with its witness word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: f64,
    pub witness: IndexWord,
}

/// Enumeration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub prune: bool,
    pub budget: u64,
    pub slack: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Config::default().into()
    }
}

impl From<Config> for SearchOptions {
    fn from(cfg: Config) -> Self {
        Self {
            prune: cfg.prune,
            budget: cfg.budget,
            slack: cfg.tol.prune_slack,
        }
    }
}

impl SearchOptions {
    pub fn exhaustive(budget: u64) -> Self {
        Self {
            prune: false,
            budget,
            ..Default::default()
        }
    }
}

/// `μ_n`: max over A-words of min over B-words of `‖A_n B_n ... A_1 B_1‖`.
pub fn max_min_norm(pair: &SwitchedPair, n: usize, kind: NormKind, opts: &SearchOptions) -> Result<GameValue> {
    solve(pair, n, Leaf::Norm(kind), Sense::MaxMin, opts)
}

/// `η_n`: min over B-words of max over A-words of `‖A_n B_n ... A_1 B_1‖`.
pub fn min_max_norm(pair: &SwitchedPair, n: usize, kind: NormKind, opts: &SearchOptions) -> Result<GameValue> {
    solve(pair, n, Leaf::Norm(kind), Sense::MinMax, opts)
}

/// `μ̄_n`, the spectral-radius analogue of [`max_min_norm`]. Always exhaustive.
pub fn max_min_rho(pair: &SwitchedPair, n: usize, budget: u64) -> Result<GameValue> {
    solve(pair, n, Leaf::Rho, Sense::MaxMin, &SearchOptions::exhaustive(budget))
}

/// `η̄_n`, the spectral-radius analogue of [`min_max_norm`]. Always exhaustive.
pub fn min_max_rho(pair: &SwitchedPair, n: usize, budget: u64) -> Result<GameValue> {
    solve(pair, n, Leaf::Rho, Sense::MinMax, &SearchOptions::exhaustive(budget))
}

/// Number of leaves a full enumeration at horizon `n` visits.
pub fn leaf_count(pair: &SwitchedPair, n: usize) -> f64 {
    (pair.a.len() as f64 * pair.b.len() as f64).powi(n as i32)
}

// ---------------------------------------------------------------------------
// engine

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sense {
    /// Outer player owns the A-word and maximizes.
    MaxMin,
    /// Outer player owns the B-word and minimizes.
    MinMax,
}

#[derive(Debug, Clone, Copy)]
enum Leaf {
    Norm(NormKind),
    Rho,
}

/// Per-step growth bounds used by the cuts.
struct Bounds {
    /// Upper bound on per-step growth along the inner player's best reply.
    best_reply_growth: f64,
    /// Lower bound on per-step growth of the entry the bound is protecting.
    guaranteed_growth: f64,
    /// Growth bound used when testing frontier dominance.
    dominance_growth: f64,
    slack: f64,
}

struct Game {
    dim: usize,
    horizon: usize,
    outer_len: usize,
    inner_len: usize,
    /// `steps[o * inner_len + i]` is the flattened `N x N` step product.
    steps: Vec<Vec<f64>>,
    sense: Sense,
    leaf: Leaf,
    bounds: Option<Bounds>,
}

#[derive(Debug, Clone)]
struct Best {
    value: f64,
    outer: Vec<usize>,
    inner_code: u64,
}

/// Inner prefixes in lexicographic order with their partial products.
struct Frontier {
    mats: Vec<f64>,
    codes: Vec<u64>,
}

impl Frontier {
    fn len(&self) -> usize {
        self.codes.len()
    }
}

/// Non-negative floats order like their bit patterns, which lets an atomic
/// integer hold the shared incumbent.
fn bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

fn solve(pair: &SwitchedPair, n: usize, leaf: Leaf, sense: Sense, opts: &SearchOptions) -> Result<GameValue> {
    if n == 0 {
        return Ok(GameValue {
            value: 1.0,
            witness: IndexWord::default(),
        });
    }
    let required = leaf_count(pair, n);
    if required > opts.budget as f64 {
        return Err(Error::BudgetExceeded {
            required,
            budget: opts.budget,
            partial: None,
        });
    }
    let game = Game::new(pair, n, leaf, sense, opts);
    let incumbent = AtomicU64::new(match sense {
        Sense::MaxMin => 0,
        Sense::MinMax => f64::INFINITY.to_bits(),
    });

    let per_branch: Vec<Option<Best>> = (0..game.outer_len)
        .into_par_iter()
        .map(|o| game.branch(o, &incumbent))
        .collect();

    // Branches are lexicographic ranges, so the first best on ties is the
    // lexicographically smallest.
    let mut best: Option<Best> = None;
    for cand in per_branch.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => game.outer_prefers(cand.value, b.value),
        };
        if better {
            best = Some(cand);
        }
    }
    let best = best.expect("the optimal outer word is never pruned");
    let inner = decode(best.inner_code, game.inner_len, n);
    let witness = match sense {
        Sense::MaxMin => IndexWord::new(best.outer, inner)?,
        Sense::MinMax => IndexWord::new(inner, best.outer)?,
    };
    Ok(GameValue {
        value: best.value,
        witness,
    })
}

fn decode(mut code: u64, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = (code % base as u64) as usize;
        code /= base as u64;
    }
    digits
}

impl Game {
    fn new(pair: &SwitchedPair, horizon: usize, leaf: Leaf, sense: Sense, opts: &SearchOptions) -> Self {
        let products = pair.step_products();
        let (outer_len, inner_len) = match sense {
            Sense::MaxMin => (pair.a.len(), pair.b.len()),
            Sense::MinMax => (pair.b.len(), pair.a.len()),
        };
        let step_matrix = |o: usize, i: usize| -> &Matrix {
            match sense {
                Sense::MaxMin => &products[o][i],
                Sense::MinMax => &products[i][o],
            }
        };
        let mut steps = Vec::with_capacity(outer_len * inner_len);
        for o in 0..outer_len {
            for i in 0..inner_len {
                steps.push(step_matrix(o, i).data().to_vec());
            }
        }

        let bounds = match (leaf, opts.prune) {
            (Leaf::Norm(kind), true) => {
                let norm = |o, i| linalg::op_norm(step_matrix(o, i), kind);
                let co = |o, i| co_norm(step_matrix(o, i), kind);
                let over_outer = |f: &dyn Fn(usize) -> f64, take_max: bool| {
                    (0..outer_len)
                        .map(f)
                        .fold(if take_max { 0.0 } else { f64::INFINITY }, |acc, x| {
                            if take_max {
                                acc.max(x)
                            } else {
                                acc.min(x)
                            }
                        })
                };
                let over_inner = |o: usize, f: &dyn Fn(usize, usize) -> f64, take_max: bool| {
                    (0..inner_len)
                        .map(|i| f(o, i))
                        .fold(if take_max { 0.0 } else { f64::INFINITY }, |acc, x| {
                            if take_max {
                                acc.max(x)
                            } else {
                                acc.min(x)
                            }
                        })
                };
                Some(match sense {
                    // Inner minimizes. Its best reply grows at most by
                    // max_o min_i |P|; any entry grows at least by min_o min_i co(P).
                    Sense::MaxMin => Bounds {
                        best_reply_growth: over_outer(&|o| over_inner(o, &norm, false), true),
                        guaranteed_growth: over_outer(&|o| over_inner(o, &co, false), false),
                        dominance_growth: 0.0,
                        slack: opts.slack,
                    },
                    // Inner maximizes. Its best reply grows at least by
                    // min_o max_i co(P); any entry grows at most by max_o max_i |P|.
                    Sense::MinMax => Bounds {
                        best_reply_growth: over_outer(&|o| over_inner(o, &co, true), false),
                        guaranteed_growth: 0.0,
                        dominance_growth: over_outer(&|o| over_inner(o, &norm, true), true),
                        slack: opts.slack,
                    },
                })
            }
            _ => None,
        };

        Self {
            dim: pair.dim(),
            horizon,
            outer_len,
            inner_len,
            steps,
            sense,
            leaf,
            bounds,
        }
    }

    fn step(&self, o: usize, i: usize) -> &[f64] {
        &self.steps[o * self.inner_len + i]
    }

    fn leaf_value(&self, m: &[f64]) -> f64 {
        match self.leaf {
            Leaf::Norm(kind) => linalg::norm_of(self.dim, self.dim, m, kind),
            Leaf::Rho => linalg::spectral_radius_of(self.dim, m),
        }
    }

    fn norm_value(&self, m: &[f64]) -> f64 {
        match self.leaf {
            Leaf::Norm(kind) => linalg::norm_of(self.dim, self.dim, m, kind),
            Leaf::Rho => unreachable!("bounds only exist for norm leaves"),
        }
    }

    fn outer_prefers(&self, candidate: f64, current: f64) -> bool {
        match self.sense {
            Sense::MaxMin => candidate > current,
            Sense::MinMax => candidate < current,
        }
    }

    fn inner_prefers(&self, candidate: f64, current: f64) -> bool {
        match self.sense {
            Sense::MaxMin => candidate < current,
            Sense::MinMax => candidate > current,
        }
    }

    /// A completed outer word whose inner optimum is strictly worse than the
    /// incumbent can never be the answer.
    fn loses_to(&self, value: f64, incumbent: f64) -> bool {
        match self.sense {
            Sense::MaxMin => value < incumbent,
            Sense::MinMax => value > incumbent,
        }
    }

    fn publish(&self, value: f64, incumbent: &AtomicU64) {
        match self.sense {
            Sense::MaxMin => incumbent.fetch_max(bits(value), Ordering::Relaxed),
            Sense::MinMax => incumbent.fetch_min(bits(value), Ordering::Relaxed),
        };
    }

    fn branch(&self, first: usize, incumbent: &AtomicU64) -> Option<Best> {
        let root = Frontier {
            mats: Matrix::identity(self.dim).data().to_vec(),
            codes: vec![0],
        };
        let mut prefix = Vec::with_capacity(self.horizon);
        let mut best = None;
        self.visit(&root, &mut prefix, Some(first), incumbent, &mut best);
        best
    }

    fn visit(
        &self,
        frontier: &Frontier,
        prefix: &mut Vec<usize>,
        only: Option<usize>,
        incumbent: &AtomicU64,
        best: &mut Option<Best>,
    ) {
        let depth = prefix.len();
        let outer_range = match only {
            Some(o) => o..o + 1,
            None => 0..self.outer_len,
        };
        for o in outer_range {
            prefix.push(o);
            if depth + 1 == self.horizon {
                self.finish(frontier, prefix, incumbent, best);
            } else {
                let next = self.extend(frontier, o);
                if let Some(next) = self.prune(next, self.horizon - depth - 1, incumbent) {
                    self.visit(&next, prefix, None, incumbent, best);
                }
            }
            prefix.pop();
        }
    }

    fn extend(&self, frontier: &Frontier, o: usize) -> Frontier {
        let nn = self.dim * self.dim;
        let count = frontier.len() * self.inner_len;
        let mut mats = vec![0.0; count * nn];
        let mut codes = Vec::with_capacity(count);
        let mut k = 0;
        for (e, &code) in frontier.codes.iter().enumerate() {
            let q = &frontier.mats[e * nn..(e + 1) * nn];
            for i in 0..self.inner_len {
                linalg::mul_into(self.dim, self.dim, self.dim, self.step(o, i), q, &mut mats[k * nn..(k + 1) * nn]);
                codes.push(code * self.inner_len as u64 + i as u64);
                k += 1;
            }
        }
        Frontier { mats, codes }
    }

    /// Applies the outer cut and frontier dominance. `None` means the whole
    /// subtree is cut.
    fn prune(&self, frontier: Frontier, remaining: usize, incumbent: &AtomicU64) -> Option<Frontier> {
        let Some(b) = &self.bounds else {
            return Some(frontier);
        };
        let nn = self.dim * self.dim;
        let norms: Vec<f64> = (0..frontier.len())
            .map(|e| self.norm_value(&frontier.mats[e * nn..(e + 1) * nn]))
            .collect();
        let inc = f64::from_bits(incumbent.load(Ordering::Relaxed));
        let reply = b.best_reply_growth.powi(remaining as i32);
        let keep: Vec<bool> = match self.sense {
            Sense::MaxMin => {
                let best_entry = norms.iter().copied().fold(f64::INFINITY, f64::min);
                // every completion's min is at most best_entry * reply
                if best_entry * reply * (1.0 + b.slack) < inc {
                    return None;
                }
                let ceiling = best_entry * reply;
                let floor_growth = b.guaranteed_growth.powi(remaining as i32);
                norms.iter().map(|&v| v * floor_growth * (1.0 - b.slack) <= ceiling).collect()
            }
            Sense::MinMax => {
                let best_entry = norms.iter().copied().fold(0.0, f64::max);
                // every completion's max is at least best_entry * reply
                if best_entry * reply * (1.0 - b.slack) > inc {
                    return None;
                }
                let floor = best_entry * reply;
                let ceiling_growth = b.dominance_growth.powi(remaining as i32);
                norms.iter().map(|&v| v * ceiling_growth * (1.0 + b.slack) >= floor).collect()
            }
        };
        if keep.iter().all(|&k| k) {
            return Some(frontier);
        }
        let mut mats = Vec::with_capacity(frontier.mats.len());
        let mut codes = Vec::with_capacity(frontier.len());
        for (e, k) in keep.iter().enumerate() {
            if *k {
                mats.extend_from_slice(&frontier.mats[e * nn..(e + 1) * nn]);
                codes.push(frontier.codes[e]);
            }
        }
        Some(Frontier { mats, codes })
    }

    /// Evaluates the last step for the outer word in `prefix`.
    fn finish(&self, frontier: &Frontier, prefix: &[usize], incumbent: &AtomicU64, best: &mut Option<Best>) {
        let o = *prefix.last().expect("non-empty prefix");
        let nn = self.dim * self.dim;
        let pruning = self.bounds.is_some();
        let inc = f64::from_bits(incumbent.load(Ordering::Relaxed));
        let mut buf = vec![0.0; nn];
        let mut inner_best: Option<(f64, u64)> = None;
        for (e, &code) in frontier.codes.iter().enumerate() {
            let q = &frontier.mats[e * nn..(e + 1) * nn];
            for i in 0..self.inner_len {
                linalg::mul_into(self.dim, self.dim, self.dim, self.step(o, i), q, &mut buf);
                let v = self.leaf_value(&buf);
                if pruning && self.loses_to(v, inc) {
                    return;
                }
                let better = match inner_best {
                    None => true,
                    Some((cur, _)) => self.inner_prefers(v, cur),
                };
                if better {
                    inner_best = Some((v, code * self.inner_len as u64 + i as u64));
                }
            }
        }
        let (value, inner_code) = inner_best.expect("frontier is never empty");
        let improves = match best {
            None => true,
            Some(b) => self.outer_prefers(value, b.value),
        };
        if improves {
            *best = Some(Best {
                value,
                outer: prefix.to_vec(),
                inner_code,
            });
        }
        if pruning {
            self.publish(value, incumbent);
        }
    }
}
