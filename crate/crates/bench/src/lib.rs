//! Seeded fixtures shared by the benchmarks in `benches/`.

use mmjsr::{HSetSpec, Matrix, MatrixSet, SwitchedPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, len: usize, rows: usize, cols: usize) -> MatrixSet {
    let members = (0..len)
        .map(|_| {
            let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
            Matrix::new(rows, cols, data).expect("finite entries")
        })
        .collect();
    MatrixSet::new(members).expect("non-empty set")
}

/// `len` random `dim x dim` matrices on each side.
pub fn random_pair(seed: u64, len: usize, dim: usize) -> SwitchedPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_set(&mut rng, len, dim, dim);
    let b = random_set(&mut rng, len, dim, dim);
    SwitchedPair::new(a, b).expect("matching shapes")
}

/// Two 2x2 row-uncertainty sets with entries in `[0.1, 2)`.
pub fn hourglass_pair(seed: u64) -> SwitchedPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut side = || {
        let mut row = || (0..2).map(|_| rng.random_range(0.1..2.0)).collect::<Vec<f64>>();
        let spec = HSetSpec::IndependentRowUncertainty {
            row_choices: vec![vec![row(), row()], vec![row(), row()]],
        };
        mmjsr::materialize(&spec).expect("positive rows")
    };
    let a = side();
    let b = side();
    SwitchedPair::new(a, b).expect("matching shapes")
}
