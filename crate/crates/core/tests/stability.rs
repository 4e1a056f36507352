mod common;

use common::*;
use mmjsr::{
    check_asymptotic_stability, check_path_dependent, check_path_independent_periodic, check_uniform_stabilizability,
    simulate, verify_certificate, Adversary, Config, ControllerKind, Decision, Matrix, MatrixSet, NormKind,
    SwitchedPair,
};

fn scaled_pair(seed: u64, na: usize, nb: usize, scale: f64) -> SwitchedPair {
    let mut r = rng(seed);
    let a = random_set(&mut r, na, 2, 2, -1.0, 1.0);
    let b = random_set(&mut r, nb, 2, 2, -1.0, 1.0);
    let members = |s: &MatrixSet| s.members().iter().map(|m| m.scale(scale).unwrap()).collect::<Vec<_>>();
    SwitchedPair::new(MatrixSet::new(members(&a)).unwrap(), MatrixSet::new(members(&b)).unwrap()).unwrap()
}

/// `η_k` and `μ_k` by scanning every block.
fn brute_blocks(pair: &SwitchedPair, k: usize) -> (f64, f64) {
    let a_words = all_words(k, pair.a().len());
    let b_words = all_words(k, pair.b().len());
    let norm = |a: &Vec<usize>, b: &Vec<usize>| naive_row_sum(&naive_product(pair, a, b));
    let mu = a_words
        .iter()
        .map(|a| b_words.iter().map(|b| norm(a, b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let eta = b_words
        .iter()
        .map(|b| a_words.iter().map(|a| norm(a, b)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    (mu, eta)
}

#[test]
fn verdicts_agree_with_block_scan() {
    let cfg = Config::default();
    for seed in 0..20 {
        let pair = scaled_pair(300 + seed, 2, 2, 0.9);
        let pd = check_path_dependent(&pair, 3, NormKind::RowSum, &cfg).unwrap();
        let pi = check_path_independent_periodic(&pair, 3, NormKind::RowSum, &cfg).unwrap();
        let scans: Vec<(f64, f64)> = (1..=3).map(|k| brute_blocks(&pair, k)).collect();
        let first_mu = scans.iter().position(|s| s.0 < 1.0 - 1e-9).map(|i| i + 1);
        let first_eta = scans.iter().position(|s| s.1 < 1.0 - 1e-9).map(|i| i + 1);
        match first_mu {
            Some(k) => {
                assert_eq!(pd.decision, Decision::Yes);
                assert_eq!(pd.horizon, k);
                assert_eq!(pd.sigma, scans[k - 1].0);
            }
            None => assert_eq!(pd.decision, Decision::NoAtHorizon),
        }
        match first_eta {
            Some(k) => {
                assert_eq!(pi.decision, Decision::Yes);
                assert_eq!(pi.horizon, k);
                assert_eq!(pi.sigma, scans[k - 1].1);
                // a periodic certificate also serves the path-dependent question
                assert_eq!(pd.decision, Decision::Yes);
                assert!(pd.horizon <= k);
            }
            None => assert_eq!(pi.decision, Decision::NoAtHorizon),
        }
    }
}

#[test]
fn certificates_replay_and_trajectories_decay() {
    let cfg = Config::default();
    let mut yes = 0;
    for seed in 0..20 {
        let pair = scaled_pair(400 + seed, 2, 3, 0.8);
        for v in [
            check_path_dependent(&pair, 3, NormKind::RowSum, &cfg).unwrap(),
            check_path_independent_periodic(&pair, 3, NormKind::RowSum, &cfg).unwrap(),
        ] {
            if v.decision != Decision::Yes {
                continue;
            }
            yes += 1;
            let c = v.certificate.as_ref().unwrap();
            let check = verify_certificate(&pair, c, NormKind::RowSum, 1_000_000).unwrap();
            assert_eq!(check.blocks_checked, 2usize.pow(c.block_length as u32));
            assert!(check.max_block_norm <= v.sigma + 1e-9);
            for adv in [Adversary::WorstCaseGreedy, Adversary::SeededRandom(seed)] {
                let k = v.horizon;
                let t = simulate(&pair, Some(c), &adv, &[1.0, -0.5], 10 * k, NormKind::RowSum).unwrap();
                for m in 0..=10 {
                    assert!(t.norms[m * k] <= v.sigma.powi(m as i32) * t.norms[0] + 1e-6);
                }
                let c_bound = v.constant.unwrap();
                for (n, &x) in t.norms.iter().enumerate() {
                    assert!(x <= c_bound * v.rate.powi(n as i32) * t.norms[0] * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
    }
    assert!(yes > 5, "too few stabilizable samples: {yes}");
}

#[test]
fn example2_cannot_be_certified_at_small_horizons() {
    let cfg = Config::default();
    let pair = example2();
    let pd = check_path_dependent(&pair, 4, NormKind::RowSum, &cfg).unwrap();
    assert_eq!(pd.decision, Decision::NoAtHorizon);
    assert!(pd.history.iter().all(|h| (h.value - 1.0).abs() < 1e-9));
    let pi = check_path_independent_periodic(&pair, 4, NormKind::RowSum, &cfg).unwrap();
    assert_eq!(pi.decision, Decision::NoAtHorizon);
    let eta2 = pi.history.iter().find(|h| h.k == 2).unwrap().value;
    assert!(eta2 > 1.0 + 1e-9);
}

#[test]
fn diagonal_switching_example() {
    let a = MatrixSet::new(vec![Matrix::diag(&[2.0, 0.5]).unwrap(), Matrix::diag(&[0.5, 2.0]).unwrap()]).unwrap();
    let b = MatrixSet::new(vec![Matrix::diag(&[0.5, 0.5]).unwrap()]).unwrap();
    let pair = SwitchedPair::new(a, b).unwrap();
    let v = check_path_dependent(&pair, 3, NormKind::RowSum, &Config::default()).unwrap();
    // repeating one A keeps a unit eigenvalue, so no block contracts
    for h in &v.history {
        assert_eq!(h.value, brute_blocks(&pair, h.k).0);
        assert_eq!(h.value, 1.0);
    }
    assert_eq!(v.decision, Decision::NoAtHorizon);
}

#[test]
fn random_contracting_pair_is_asymptotically_stable() {
    let mut r = rng(50);
    let pair = random_pair(&mut r, 2, 2, 2, 2);
    // rescale so every step product has norm below 1
    let f = pair
        .step_products()
        .iter()
        .flatten()
        .map(naive_row_sum)
        .fold(0.0, f64::max);
    let s = (0.9 / f).sqrt();
    let a = MatrixSet::new(pair.a().members().iter().map(|m| m.scale(s).unwrap()).collect()).unwrap();
    let b = MatrixSet::new(pair.b().members().iter().map(|m| m.scale(s).unwrap()).collect()).unwrap();
    let pair = SwitchedPair::new(a, b).unwrap();
    let v = check_asymptotic_stability(&pair, 3, NormKind::RowSum, &Config::default()).unwrap();
    assert_eq!(v.decision, Decision::Yes);
    assert_eq!(v.horizon, 1);
    let c = v.certificate.unwrap();
    assert_eq!(c.kind, ControllerKind::Periodic);
    assert!(verify_certificate(&pair, &c, NormKind::RowSum, 1000).unwrap().max_block_norm <= v.sigma + 1e-9);
}

#[test]
fn example1_uniform_diagnostics() {
    let v = check_uniform_stabilizability(&example1(), 8, NormKind::Spectral, &Config::default()).unwrap();
    assert_eq!(v.decision, Decision::Inconclusive);
    let b = v.bracket.unwrap();
    assert!((b.upper - 1.0).abs() < 1e-9);
    assert!(b.history.iter().all(|e| (e.norm_root - 1.0).abs() < 1e-9));
}

#[test]
fn contracting_singleton_simulation_rate() {
    let pair = SwitchedPair::new(
        // equal row sums, so the row-sum norm equals the spectral radius
        MatrixSet::new(vec![Matrix::from_rows(&[[0.5, 0.2], [0.3, 0.4]]).unwrap()]).unwrap(),
        MatrixSet::identity(2),
    )
    .unwrap();
    let v = check_path_independent_periodic(&pair, 2, NormKind::RowSum, &Config::default()).unwrap();
    assert_eq!(v.decision, Decision::Yes);
    let t = simulate(&pair, v.certificate.as_ref(), &Adversary::WorstCaseGreedy, &[1.0, 1.0], 50, NormKind::RowSum)
        .unwrap();
    let rate = t.empirical_rate().unwrap();
    assert!(rate <= v.rate * 1.1 && rate >= v.rate * 0.9, "{rate} vs {}", v.rate);
    for (n, &x) in t.norms.iter().enumerate() {
        assert!(x <= v.constant.unwrap() * v.rate.powi(n as i32) * t.norms[0] * (1.0 + 1e-9));
    }
}
