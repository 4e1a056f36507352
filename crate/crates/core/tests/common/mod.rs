//! Reference implementations used as oracles: plain loops, no pruning,
//! nothing shared with the library beyond the matrix container.

#![allow(dead_code)]

use mmjsr::{Matrix, MatrixSet, NormKind, SwitchedPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn random_set(rng: &mut ChaCha8Rng, len: usize, rows: usize, cols: usize, lo: f64, hi: f64) -> MatrixSet {
    MatrixSet::new((0..len).map(|_| random_matrix(rng, rows, cols, lo, hi)).collect()).unwrap()
}

pub fn random_pair(rng: &mut ChaCha8Rng, na: usize, nb: usize, n: usize, m: usize) -> SwitchedPair {
    let a = random_set(rng, na, n, m, -1.0, 1.0);
    let b = random_set(rng, nb, m, n, -1.0, 1.0);
    SwitchedPair::new(a, b).unwrap()
}

/// Dense row-major product by the textbook triple loop.
pub fn naive_mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = vec![0.0; a.rows() * b.cols()];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0.0;
            for l in 0..a.cols() {
                s += a[(i, l)] * b[(l, j)];
            }
            out[i * b.cols() + j] = s;
        }
    }
    Matrix::new(a.rows(), b.cols(), out).unwrap()
}

pub fn naive_row_sum(m: &Matrix) -> f64 {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn naive_col_sum(m: &Matrix) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value by power iteration on `mᵀm`.
pub fn power_spectral_norm(m: &Matrix) -> f64 {
    let g = naive_mul(&m.transpose(), m);
    let n = g.rows();
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.iter().map(|x| x / norm).collect();
        if (norm - lambda).abs() <= 1e-15 * norm {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

pub fn naive_norm(m: &Matrix, kind: NormKind) -> f64 {
    match kind {
        NormKind::RowSum => naive_row_sum(m),
        NormKind::ColSum => naive_col_sum(m),
        NormKind::Spectral => power_spectral_norm(m),
    }
}

/// All words of `len` letters over `0..base`, lexicographic.
pub fn all_words(len: usize, base: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..base).map(move |d| {
                    let mut w = w.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out
}

/// `A_{a_n} B_{b_n} ... A_{a_1} B_{b_1}`, accumulated from the right.
pub fn naive_product(pair: &SwitchedPair, a: &[usize], b: &[usize]) -> Matrix {
    let mut q = Matrix::identity(pair.dim());
    for (&i, &j) in a.iter().zip(b) {
        let step = naive_mul(&pair.a().members()[i], &pair.b().members()[j]);
        q = naive_mul(&step, &q);
    }
    q
}

pub struct Oracle {
    pub value: f64,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

/// Max over A-words of min over B-words (`max_min`), or the mirror, with
/// the first strict improvement winning so ties go to the earliest word.
pub fn brute_game(pair: &SwitchedPair, n: usize, max_min: bool, value: &dyn Fn(&Matrix) -> f64) -> Oracle {
    let (outer_len, inner_len) = if max_min {
        (pair.a().len(), pair.b().len())
    } else {
        (pair.b().len(), pair.a().len())
    };
    let mut best: Option<Oracle> = None;
    for outer in all_words(n, outer_len) {
        let mut inner_best: Option<(f64, Vec<usize>)> = None;
        for inner in all_words(n, inner_len) {
            let p = if max_min {
                naive_product(pair, &outer, &inner)
            } else {
                naive_product(pair, &inner, &outer)
            };
            let v = value(&p);
            let better = match &inner_best {
                None => true,
                Some((cur, _)) => {
                    if max_min {
                        v < *cur
                    } else {
                        v > *cur
                    }
                }
            };
            if better {
                inner_best = Some((v, inner));
            }
        }
        let (v, inner) = inner_best.unwrap();
        let better = match &best {
            None => true,
            Some(b) => {
                if max_min {
                    v > b.value
                } else {
                    v < b.value
                }
            }
        };
        if better {
            let (a, b) = if max_min { (outer, inner) } else { (inner, outer) };
            best = Some(Oracle { value: v, a, b });
        }
    }
    best.unwrap()
}

pub fn example1() -> MatrixSet {
    let h = 3f64.sqrt() / 2.0;
    MatrixSet::new(vec![
        Matrix::diag(&[0.5, 2.0]).unwrap(),
        Matrix::from_rows(&[[h, 0.5], [-0.5, h]]).unwrap(),
    ])
    .unwrap()
}

pub fn example2() -> SwitchedPair {
    let a = MatrixSet::new(vec![
        Matrix::diag(&[2.0, 0.5]).unwrap(),
        Matrix::diag(&[3.0, 1.0 / 3.0]).unwrap(),
    ])
    .unwrap();
    let b = MatrixSet::new(vec![
        Matrix::diag(&[0.5, 2.0]).unwrap(),
        Matrix::diag(&[1.0 / 3.0, 3.0]).unwrap(),
    ])
    .unwrap();
    SwitchedPair::new(a, b).unwrap()
}

/// Two rows, two choices per row, entries uniform in `[lo, hi)`.
pub fn random_iru(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> mmjsr::HSetSpec {
    let mut row = || (0..2).map(|_| rng.random_range(lo..hi)).collect::<Vec<f64>>();
    mmjsr::HSetSpec::IndependentRowUncertainty {
        row_choices: vec![vec![row(), row()], vec![row(), row()]],
    }
}

pub fn rel_close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0)
}
