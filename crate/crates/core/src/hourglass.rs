//! Hourglass sets of positive matrices: constructions, a sampling falsifier,
//! saddle-point search and the closed-form radii they admit.
//!
//! Membership is never decided. Sets built by [`materialize`] from a
//! linearly ordered chain or from independent row choices (and their
//! Minkowski sums and products) are hourglass sets by construction.
//! [`falsify_hset`] can disprove membership of an arbitrary positive set but
//! cannot prove it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{mat_mul, spectral_radius, Matrix};
use crate::product_space::{MatrixSet, SwitchedPair};

/// Grid vectors are only enumerated up to this dimension (`3^8` points).
const MAX_GRID_DIM: usize = 8;
const GRID_LEVELS: [f64; 3] = [1.0, 2.0, 10.0];

/// Samples drawn by [`hset_exact_radii`] when it screens a set itself.
pub const DEFAULT_SAMPLES: usize = 4096;

/// How a candidate hourglass set is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HSetSpec {
    /// `0 < A_1 < A_2 < ... < A_k` entrywise.
    LinearlyOrdered {
        rows: usize,
        cols: usize,
        matrices: Vec<Vec<f64>>,
    },
    /// `row_choices[i]` lists the admissible rows for row `i`.
    IndependentRowUncertainty { row_choices: Vec<Vec<Vec<f64>>> },
    MinkowskiSum { left: Box<HSetSpec>, right: Box<HSetSpec> },
    MinkowskiProduct { left: Box<HSetSpec>, right: Box<HSetSpec> },
    /// Positive matrices claimed, not verified, to form an hourglass set.
    Raw {
        rows: usize,
        cols: usize,
        matrices: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

impl HSetSpec {
    /// True for constructions that guarantee membership.
    pub fn is_construction_backed(&self) -> bool {
        match self {
            HSetSpec::LinearlyOrdered { .. } | HSetSpec::IndependentRowUncertainty { .. } => true,
            HSetSpec::MinkowskiSum { left, right } | HSetSpec::MinkowskiProduct { left, right } => {
                left.is_construction_backed() && right.is_construction_backed()
            }
            HSetSpec::Raw { .. } => false,
        }
    }
}

/// Fails with the first entry that is not strictly positive.
pub fn require_positive(set: &MatrixSet) -> Result<()> {
    for (index, m) in set.members().iter().enumerate() {
        for row in 0..m.rows() {
            for col in 0..m.cols() {
                let value = m[(row, col)];
                if !(value > 0.0) {
                    return Err(Error::NonPositive { index, row, col, value });
                }
            }
        }
    }
    Ok(())
}

fn build(rows: usize, cols: usize, matrices: &[Vec<f64>]) -> Result<Vec<Matrix>> {
    matrices.iter().map(|d| Matrix::new(rows, cols, d.clone())).collect()
}

/// Expands a spec into its member matrices.
pub fn materialize(spec: &HSetSpec) -> Result<MatrixSet> {
    let set = match spec {
        HSetSpec::LinearlyOrdered { rows, cols, matrices } => {
            let set = MatrixSet::new(build(*rows, *cols, matrices)?)?;
            require_positive(&set)?;
            for (k, w) in set.members().windows(2).enumerate() {
                if !w[0].data().iter().zip(w[1].data()).all(|(x, y)| x < y) {
                    return Err(Error::ChainViolation { lower: k, upper: k + 1 });
                }
            }
            set
        }
        HSetSpec::IndependentRowUncertainty { row_choices } => iru(row_choices)?,
        HSetSpec::MinkowskiSum { left, right } => {
            combine(&materialize(left)?, &materialize(right)?, |a, b| a.add(b))?
        }
        HSetSpec::MinkowskiProduct { left, right } => {
            combine(&materialize(left)?, &materialize(right)?, mat_mul)?
        }
        HSetSpec::Raw {
            rows,
            cols,
            matrices,
            labels,
        } => {
            let set = MatrixSet::new(build(*rows, *cols, matrices)?)?;
            let set = match labels {
                Some(l) => set.with_labels(l.clone())?,
                None => set,
            };
            require_positive(&set)?;
            set
        }
    };
    Ok(set)
}

/// Cross product of row choices; row 0 varies fastest.
fn iru(row_choices: &[Vec<Vec<f64>>]) -> Result<MatrixSet> {
    let rows = row_choices.len();
    if rows == 0 {
        return Err(Error::EmptyShape { rows: 0, cols: 0 });
    }
    let cols = row_choices[0].first().map_or(0, Vec::len);
    for (i, choices) in row_choices.iter().enumerate() {
        if choices.is_empty() {
            return Err(Error::Schema(format!("row {i} has no choices")));
        }
        for c in choices {
            if c.len() != cols {
                return Err(Error::InvalidData {
                    expected: cols,
                    got: c.len(),
                });
            }
        }
    }
    let total: usize = row_choices.iter().map(Vec::len).product();
    let mut members = Vec::with_capacity(total);
    let mut pick = vec![0usize; rows];
    for _ in 0..total {
        let mut data = Vec::with_capacity(rows * cols);
        for (i, &p) in pick.iter().enumerate() {
            data.extend_from_slice(&row_choices[i][p]);
        }
        members.push(Matrix::new(rows, cols, data)?);
        for (i, p) in pick.iter_mut().enumerate() {
            *p += 1;
            if *p < row_choices[i].len() {
                break;
            }
            *p = 0;
        }
    }
    let set = MatrixSet::new(members)?;
    require_positive(&set)?;
    Ok(set)
}

fn combine(left: &MatrixSet, right: &MatrixSet, op: impl Fn(&Matrix, &Matrix) -> Result<Matrix>) -> Result<MatrixSet> {
    let mut members = Vec::with_capacity(left.len() * right.len());
    for l in left.members() {
        for r in right.members() {
            members.push(op(l, r)?);
        }
    }
    MatrixSet::new(members)
}

/// Outcome of [`falsify_hset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Falsification {
    /// Member `matrix_index` breaks condition `bullet` (1 or 2) at `u`.
    Violation {
        matrix_index: usize,
        u: Vec<f64>,
        bullet: u8,
    },
    /// No counterexample among `tested` vectors. This is not a proof.
    NoViolationFound { tested: usize },
}

fn approx_le(x: &[f64], y: &[f64], rel: f64) -> bool {
    x.iter()
        .zip(y)
        .all(|(a, b)| *a <= *b + rel * a.abs().max(b.abs()))
}

/// Checks both conditions for member `t` at `u`. Comparisons lean towards
/// the conditions holding, so a reported violation is robust to rounding.
fn check(images: &[Vec<f64>], t: usize, rel: f64) -> Option<u8> {
    let target = &images[t];
    let bullet = |dominates: &dyn Fn(&[f64], &[f64]) -> bool| {
        let all = images.iter().all(|x| dominates(x, target));
        all || images
            .iter()
            .any(|x| dominates(target, x) && x.as_slice() != target.as_slice())
    };
    if !bullet(&|x, y| approx_le(y, x, rel)) {
        return Some(1);
    }
    if !bullet(&|x, y| approx_le(x, y, rel)) {
        return Some(2);
    }
    None
}

fn grid(dim: usize) -> Vec<Vec<f64>> {
    if dim > MAX_GRID_DIM {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(GRID_LEVELS.len().pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        out.push(idx.iter().map(|&i| GRID_LEVELS[i]).collect());
        let mut k = 0;
        loop {
            if k == dim {
                return out;
            }
            idx[k] += 1;
            if idx[k] < GRID_LEVELS.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Searches for a positive vector at which the hourglass conditions fail.
///
/// Tests every grid vector with entries in `{1, 2, 10}`, then `samples`
/// uniform draws from the simplex seeded by `seed`.
pub fn falsify_hset(set: &MatrixSet, samples: usize, seed: u64) -> Result<Falsification> {
    require_positive(set)?;
    let rel = Config::default().tol.rel;
    let dim = set.shape().1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..samples).map(|_| {
        let mut u: Vec<f64> = (0..dim)
            .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0).ln())
            .collect();
        let s: f64 = u.iter().sum();
        u.iter_mut().for_each(|x| *x /= s);
        u
    });
    let mut tested = 0;
    for u in grid(dim).into_iter().chain(random) {
        tested += 1;
        let images: Vec<Vec<f64>> = set
            .members()
            .iter()
            .map(|m| m.mul_vec(&u).expect("u has the column dimension"))
            .collect();
        for t in 0..images.len() {
            if let Some(bullet) = check(&images, t, rel) {
                return Ok(Falsification::Violation {
                    matrix_index: t,
                    u,
                    bullet,
                });
            }
        }
    }
    Ok(Falsification::NoViolationFound { tested })
}

/// A pair `(Ã, B̃)` with `ρ(A B̃) <= ρ(Ã B̃) <= ρ(Ã B)` for all members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleCertificate {
    pub a_index: usize,
    pub b_index: usize,
    pub value: f64,
    /// `max_A ρ(A B̃) - value`.
    pub max_row_residual: f64,
    /// `value - min_B ρ(Ã B)`.
    pub min_col_residual: f64,
}

impl SaddleCertificate {
    pub fn is_valid(&self, rel: f64) -> bool {
        let tol = rel * self.value.max(1.0);
        self.max_row_residual <= tol && self.min_col_residual <= tol
    }
}

/// `table[i][j] = ρ(A_i B_j)`.
pub fn payoff_table(pair: &SwitchedPair) -> Result<Vec<Vec<f64>>> {
    pair.a()
        .members()
        .iter()
        .map(|a| {
            pair.b()
                .members()
                .iter()
                .map(|b| spectral_radius(&mat_mul(a, b)?))
                .collect()
        })
        .collect()
}

/// Scans all `(Ã, B̃)` in lexicographic order for a saddle point of the
/// spectral-radius payoff table.
pub fn saddle_search(pair: &SwitchedPair, cfg: &Config) -> Result<SaddleCertificate> {
    require_positive(pair.a())?;
    require_positive(pair.b())?;
    let table = payoff_table(pair)?;
    let col_max: Vec<f64> = (0..pair.b().len())
        .map(|j| table.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut best: Option<SaddleCertificate> = None;
    for (i, row) in table.iter().enumerate() {
        let row_min = row.iter().copied().fold(f64::INFINITY, f64::min);
        for (j, &value) in row.iter().enumerate() {
            let cert = SaddleCertificate {
                a_index: i,
                b_index: j,
                value,
                max_row_residual: col_max[j] - value,
                min_col_residual: value - row_min,
            };
            if cert.is_valid(cfg.tol.rel) {
                return Ok(cert);
            }
            let total = cert.max_row_residual + cert.min_col_residual;
            if best
                .as_ref()
                .is_none_or(|b| total < b.max_row_residual + b.min_col_residual)
            {
                best = Some(cert);
            }
        }
    }
    Err(Error::NoSaddle {
        best: best.expect("sets are non-empty"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRadii {
    pub jsr: f64,
    pub jsr_index: usize,
    pub lsr: f64,
    pub lsr_index: usize,
}

/// Joint and lower spectral radius of a square hourglass set: the largest
/// and smallest member spectral radius.
///
/// With `assume_hset == false` the set is screened by [`falsify_hset`] first.
pub fn hset_exact_radii(set: &MatrixSet, assume_hset: bool, cfg: &Config) -> Result<ExactRadii> {
    set.require_square()?;
    require_positive(set)?;
    if !assume_hset {
        if let Falsification::Violation { matrix_index, u, .. } = falsify_hset(set, DEFAULT_SAMPLES, cfg.seed)? {
            return Err(Error::NotHourglass { matrix_index, u });
        }
    }
    let mut out = ExactRadii {
        jsr: f64::NEG_INFINITY,
        jsr_index: 0,
        lsr: f64::INFINITY,
        lsr_index: 0,
    };
    for (i, m) in set.members().iter().enumerate() {
        let r = spectral_radius(m)?;
        if r > out.jsr {
            out.jsr = r;
            out.jsr_index = i;
        }
        if r < out.lsr {
            out.lsr = r;
            out.lsr_index = i;
        }
    }
    Ok(out)
}

/// Common value of all six minimax quantities for an hourglass pair.
pub fn hset_minimax_value(pair: &SwitchedPair, cfg: &Config) -> Result<f64> {
    Ok(saddle_search(pair, cfg)?.value)
}
