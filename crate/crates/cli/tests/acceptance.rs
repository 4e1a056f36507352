//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p mmjsr-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use mmjsr::{
    check_asymptotic_stability, check_path_dependent, check_path_independent_periodic, materialize, max_min_norm,
    max_min_rho, min_max_norm, min_max_rho, op_norm, saddle_search, simulate, verify_certificate, Adversary, Config,
    Decision, Matrix, MatrixSet, NormKind, ProblemFile, SearchOptions, StabilizationVerdict, SwitchedPair,
};

const EXACT_TOL: f64 = 1e-9;
const HSET_REL_TOL: f64 = 1e-7;
const SADDLE_RESIDUAL_TOL: f64 = 1e-9;
const SUBMULT_SLACK: f64 = 1e-9;
const REPLAY_TOL: f64 = 1e-9;
const TRAJECTORY_TOL: f64 = 1e-6;
const FAST_LIMIT: Duration = Duration::from_secs(10);
const HSET_LIMIT: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn root(v: f64, m: usize) -> f64 {
    v.powf(1.0 / m as f64)
}

/// Spectral radius of a 2x2 matrix from its characteristic polynomial.
fn rho2(m: &Matrix) -> f64 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tr = a + d;
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    if disc >= 0.0 {
        ((tr + disc.sqrt()) / 2.0).abs().max(((tr - disc.sqrt()) / 2.0).abs())
    } else {
        (a * d - b * c).abs().sqrt()
    }
}

fn run_cli(args: &[&str]) -> Result<(i32, serde_json::Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mmjsr"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning cli: {e}"))?;
    let code = out.status.code().unwrap_or(-1);
    let json = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("cli output is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok((code, json))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pair = ProblemFile::load(data("example2.json"))
        .and_then(|f| f.pair("AB"))
        .map_err(|e| e.to_string())?;
    let opts = SearchOptions::default();
    let target = 1.5f64.sqrt();
    let mut eta_roots = Vec::new();
    for m in 1..=4 {
        let mu = max_min_norm(&pair, m, NormKind::RowSum, &opts).map_err(|e| e.to_string())?.value;
        ensure((mu - 1.0).abs() < EXACT_TOL, || format!("mu_{m} = {mu}"))?;
        let eta = min_max_norm(&pair, m, NormKind::RowSum, &opts).map_err(|e| e.to_string())?.value;
        let r = root(eta, m);
        if m % 2 == 0 {
            ensure(r >= target - EXACT_TOL, || format!("eta_{m}^(1/{m}) = {r} < {target}"))?;
        }
        eta_roots.push(format!("{r:.9}"));
    }
    within(start.elapsed(), FAST_LIMIT)?;
    Ok(format!(
        "mu_m = 1 for m <= 4; eta_m^(1/m) = [{}] ({:.2?})",
        eta_roots.join(", "),
        start.elapsed()
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let set = ProblemFile::load(data("example1.json"))
        .and_then(|f| f.set("A"))
        .map_err(|e| e.to_string())?;
    let mut overall = f64::INFINITY;
    for m in 1..=8 {
        let smallest = all_words(m, set.len())
            .iter()
            .map(|w| {
                let mut q = Matrix::identity(2);
                for &i in w {
                    q = naive_mul(&set.members()[i], &q);
                }
                power_spectral_norm(&q)
            })
            .fold(f64::INFINITY, f64::min);
        ensure((smallest - 1.0).abs() < EXACT_TOL, || format!("min spectral norm at m = {m} is {smallest}"))?;
        overall = overall.min(smallest);
    }

    let file = data("example1.json");
    let file = file.to_str().ok_or("non-utf8 path")?;
    let (code, rep) = run_cli(&[
        "stabilize", file, "A", "--mode", "uniform", "--k-max", "8", "--norm", "spectral", "--json",
    ])?;
    let decision = rep.pointer("/verdict/decision").and_then(|v| v.as_str()).unwrap_or("");
    ensure(code == 4 && decision == "inconclusive", || format!("stabilize gave {decision} (exit {code})"))?;
    let upper = rep
        .pointer("/verdict/bracket/upper")
        .and_then(|v| v.as_f64())
        .ok_or("stabilize report lacks a bracket")?;
    ensure((upper - 1.0).abs() < EXACT_TOL, || format!("uniform upper bound {upper}"))?;

    let (code, rep) = run_cli(&["jsr", file, "A", "--n", "1", "--json"])?;
    let lower = rep
        .pointer("/brackets/0/lower")
        .and_then(|v| v.as_f64())
        .ok_or("jsr report lacks a bracket")?;
    ensure(code == 0 && lower >= 2.0, || format!("jsr lower {lower} (exit {code})"))?;
    within(start.elapsed(), FAST_LIMIT)?;
    Ok(format!(
        "min norm {overall:.12}; uniform inconclusive, upper {upper}; jsr lower {lower} ({:.2?})",
        start.elapsed()
    ))
}

fn iru_pairs() -> Result<Vec<SwitchedPair>, String> {
    let mut r = rng(0xACCE);
    (0..20)
        .map(|_| {
            let a = materialize(&random_iru(&mut r, 0.1, 2.0)).map_err(|e| e.to_string())?;
            let b = materialize(&random_iru(&mut r, 0.1, 2.0)).map_err(|e| e.to_string())?;
            SwitchedPair::new(a, b).map_err(|e| e.to_string())
        })
        .collect()
}

/// Payoff table `ρ(A_i B_j)` and its two security levels.
fn security_levels(pair: &SwitchedPair) -> (Vec<Vec<f64>>, f64, f64) {
    let table: Vec<Vec<f64>> = pair
        .a()
        .members()
        .iter()
        .map(|a| pair.b().members().iter().map(|b| rho2(&naive_mul(a, b))).collect())
        .collect();
    let max_min = table
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let min_max = (0..table[0].len())
        .map(|j| table.iter().map(|row| row[j]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    (table, max_min, min_max)
}

fn criterion_3(pairs: &[SwitchedPair]) -> Outcome {
    let start = Instant::now();
    let opts = SearchOptions::default();
    let budget = mmjsr::DEFAULT_BUDGET;
    let mut worst = 0.0f64;
    for (p, pair) in pairs.iter().enumerate() {
        let (_, value, _) = security_levels(pair);
        for m in 1..=4 {
            let mu_bar = root(max_min_rho(pair, m, budget).map_err(|e| e.to_string())?.value, m);
            let eta_bar = root(min_max_rho(pair, m, budget).map_err(|e| e.to_string())?.value, m);
            for (what, v) in [("mubar", mu_bar), ("etabar", eta_bar)] {
                let rel = (v - value).abs() / value;
                worst = worst.max(rel);
                ensure(rel <= HSET_REL_TOL, || format!("pair {p}: {what}_{m} root {v} vs {value}"))?;
            }
        }
        for m in 1..=6 {
            let mu = root(max_min_norm(pair, m, NormKind::RowSum, &opts).map_err(|e| e.to_string())?.value, m);
            let eta = root(min_max_norm(pair, m, NormKind::RowSum, &opts).map_err(|e| e.to_string())?.value, m);
            ensure(mu >= value - HSET_REL_TOL, || format!("pair {p}: mu_{m} root {mu} < {value}"))?;
            ensure(eta >= value - HSET_REL_TOL, || format!("pair {p}: eta_{m} root {eta} < {value}"))?;
        }
    }
    within(start.elapsed(), HSET_LIMIT)?;
    Ok(format!("20 pairs, worst relative gap {worst:.1e} ({:.2?})", start.elapsed()))
}

fn criterion_4(pairs: &[SwitchedPair]) -> Outcome {
    let cfg = Config::default();
    for (p, pair) in pairs.iter().enumerate() {
        let cert = saddle_search(pair, &cfg).map_err(|e| format!("pair {p}: {e}"))?;
        ensure(
            cert.max_row_residual.abs() < SADDLE_RESIDUAL_TOL && cert.min_col_residual.abs() < SADDLE_RESIDUAL_TOL,
            || format!("pair {p}: residuals {} {}", cert.max_row_residual, cert.min_col_residual),
        )?;
        let (table, max_min, min_max) = security_levels(pair);
        let entry = table[cert.a_index][cert.b_index];
        for (what, v) in [("table entry", entry), ("max-min", max_min), ("min-max", min_max)] {
            ensure(rel_close(cert.value, v, EXACT_TOL), || {
                format!("pair {p}: saddle value {} vs {what} {v}", cert.value)
            })?;
        }
    }
    Ok("saddle found on all 20 pairs, value equals both security levels".into())
}

fn criterion_5() -> Outcome {
    let mut r = rng(0x1DE7);
    let opts = SearchOptions::default();
    for s in 0..20 {
        let len = 1 + s % 3;
        let dim = 1 + (s / 3) % 3;
        let set = random_set(&mut r, len, dim, dim, -1.0, 1.0);
        let norm = NormKind::ALL[s % 3];
        let ident = MatrixSet::identity(dim);
        let up = SwitchedPair::new(set.clone(), ident.clone()).map_err(|e| e.to_string())?;
        let down = SwitchedPair::new(ident, set.clone()).map_err(|e| e.to_string())?;
        for m in 1..=4 {
            let norms: Vec<f64> = all_words(m, len)
                .iter()
                .map(|w| {
                    let mut q = Matrix::identity(dim);
                    for &i in w {
                        q = naive_mul(&naive_mul(&set.members()[i], &Matrix::identity(dim)), &q);
                    }
                    op_norm(&q, norm)
                })
                .collect();
            let max = norms.iter().copied().fold(0.0, f64::max);
            let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
            let g = |f: fn(&SwitchedPair, usize, NormKind, &SearchOptions) -> mmjsr::Result<mmjsr::GameValue>,
                     p: &SwitchedPair| f(p, m, norm, &opts).map(|v| v.value).map_err(|e| e.to_string());
            let values = [
                (g(max_min_norm, &up)?, max, "mu(A,{I})"),
                (g(min_max_norm, &up)?, max, "eta(A,{I})"),
                (g(max_min_norm, &down)?, min, "mu({I},A)"),
                (g(min_max_norm, &down)?, min, "eta({I},A)"),
            ];
            for (got, want, what) in values {
                ensure(got == want, || format!("set {s}, m = {m}, {norm}: {what} = {got}, expected {want}"))?;
            }
        }
    }
    Ok("20 sets, m <= 4, all four reductions exact".into())
}

fn criterion_6() -> Outcome {
    let mut r = rng(0x5B);
    let opts = SearchOptions::default();
    let mut checks = 0;
    for s in 0..20 {
        let pair = random_pair(&mut r, 1 + s % 3, 1 + (s / 3) % 3, 2, 1 + s % 2);
        let norm = NormKind::ALL[s % 3];
        let mut mu = vec![1.0];
        let mut eta = vec![1.0];
        for m in 1..=6 {
            mu.push(max_min_norm(&pair, m, norm, &opts).map_err(|e| e.to_string())?.value);
            eta.push(min_max_norm(&pair, m, norm, &opts).map_err(|e| e.to_string())?.value);
        }
        for p in 1..6 {
            for q in 1..=6 - p {
                ensure(mu[p + q] <= mu[p] * mu[q] * (1.0 + SUBMULT_SLACK), || {
                    format!("pair {s}: mu_{} = {} > mu_{p} mu_{q} = {}", p + q, mu[p + q], mu[p] * mu[q])
                })?;
                ensure(eta[p + q] <= eta[p] * eta[q] * (1.0 + SUBMULT_SLACK), || {
                    format!("pair {s}: eta_{} = {} > eta_{p} eta_{q} = {}", p + q, eta[p + q], eta[p] * eta[q])
                })?;
                checks += 2;
            }
        }
    }
    Ok(format!("{checks} inequalities on 20 pairs"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(0x0AC1E);
    let opts = SearchOptions::default();
    for s in 0..50 {
        let pair = random_pair(&mut r, 1 + s % 3, 1 + (s / 3) % 3, 1 + s % 3, 1 + (s / 2) % 3);
        let norm = NormKind::ALL[s % 3];
        let n = 1 + s % 4;
        let value = |m: &Matrix| match norm {
            NormKind::Spectral => op_norm(m, norm),
            _ => naive_norm(m, norm),
        };
        for max_min in [true, false] {
            let oracle = brute_game(&pair, n, max_min, &value);
            let got = if max_min {
                max_min_norm(&pair, n, norm, &opts)
            } else {
                min_max_norm(&pair, n, norm, &opts)
            }
            .map_err(|e| e.to_string())?;
            let game = if max_min { "max-min" } else { "min-max" };
            ensure(got.value == oracle.value, || {
                format!("pair {s} {game} n = {n}: {} vs oracle {}", got.value, oracle.value)
            })?;
            ensure(got.witness.a_indices == oracle.a && got.witness.b_indices == oracle.b, || {
                format!("pair {s} {game} n = {n}: witness differs")
            })?;
        }
    }
    Ok("50 pairs, values and witnesses identical".into())
}

fn check_verdict(pair: &SwitchedPair, v: &StabilizationVerdict, seed: u64) -> Result<usize, String> {
    let Some(ctrl) = v.certificate.as_ref() else {
        return Err("yes verdict without certificate".into());
    };
    let check = verify_certificate(pair, ctrl, v.norm, mmjsr::DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(check.max_block_norm <= v.sigma + REPLAY_TOL, || {
        format!("replayed block norm {} > sigma {}", check.max_block_norm, v.sigma)
    })?;
    let k = v.horizon;
    let x0: Vec<f64> = (0..pair.dim()).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 }).collect();
    let adversaries = [
        Adversary::WorstCaseGreedy,
        Adversary::SeededRandom(seed),
        Adversary::FixedWord(vec![pair.a().len() - 1]),
    ];
    let mut runs = 0;
    for adv in &adversaries {
        let t = simulate(pair, Some(ctrl), adv, &x0, 10 * k, v.norm).map_err(|e| e.to_string())?;
        for m in 0..=10 {
            let bound = v.sigma.powi(m as i32) * t.norms[0] + TRAJECTORY_TOL;
            ensure(t.norms[m * k] <= bound, || {
                format!("|x({})| = {} > {bound} under {adv:?}", m * k, t.norms[m * k])
            })?;
        }
        runs += 1;
    }
    Ok(runs)
}

fn criterion_8() -> Outcome {
    let mut r = rng(0xCE27);
    let cfg = Config::default();
    let (mut verdicts, mut runs) = (0, 0);
    for s in 0..30u64 {
        let su = s as usize;
        let base = random_pair(&mut r, 1 + su % 3, 1 + (su / 3) % 3, 2, 1 + su % 2);
        let scale = [0.6, 0.8, 0.95][su % 3];
        let scaled = |set: &MatrixSet| MatrixSet::new(set.members().iter().map(|m| m.scale(scale).unwrap()).collect());
        let pair = SwitchedPair::new(scaled(base.a()).unwrap(), scaled(base.b()).unwrap()).map_err(|e| e.to_string())?;
        let norm = NormKind::ALL[su % 3];
        let found = [
            check_path_dependent(&pair, 3, norm, &cfg),
            check_path_independent_periodic(&pair, 3, norm, &cfg),
            check_asymptotic_stability(&pair, 3, norm, &cfg),
        ];
        for v in found {
            let v = v.map_err(|e| e.to_string())?;
            if v.decision == Decision::Yes {
                runs += check_verdict(&pair, &v, s).map_err(|e| format!("pair {s} {}: {e}", v.mode.as_str()))?;
                verdicts += 1;
            }
        }
    }
    ensure(verdicts >= 10, || format!("only {verdicts} yes verdicts to check"))?;
    Ok(format!("{verdicts} yes verdicts replayed, {runs} trajectories within bounds"))
}

fn main() {
    let pairs = iru_pairs();
    let with_pairs = |f: fn(&[SwitchedPair]) -> Outcome| -> Outcome {
        match &pairs {
            Ok(p) => f(p),
            Err(e) => Err(format!("building pairs: {e}")),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("example 2 reproduction", criterion_1()),
        ("example 1 diagnostics", criterion_2()),
        ("hourglass pair six-way equality", with_pairs(criterion_3)),
        ("saddle existence on hourglass pairs", with_pairs(criterion_4)),
        ("identity reductions", criterion_5()),
        ("submultiplicativity", criterion_6()),
        ("brute-force oracle equivalence", criterion_7()),
        ("certificate soundness", criterion_8()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
