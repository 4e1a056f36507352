use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mmjsr::{
    check_asymptotic_stability, check_path_dependent, check_path_independent_periodic, check_uniform_stabilizability,
    falsify_hset, feasible_horizon, hset_exact_radii, jsr_bracket, jsr_pair, lsr_bracket, lsr_pair, materialize,
    minimax_brackets, saddle_search, set_product, simulate, verify_certificate, Adversary, Config, Controller,
    Decision, Error, Falsification, ProblemFile, SetEntry, SwitchedPair,
};
use serde::Serialize;

use crate::report::{self, HsetReport, RadiusReport, SimulateSummary, StabilizeReport};
use crate::{Cli, Command, Common, Exit, HsetAction, HsetArgs, ModeArg, RadiusArgs, SimulateArgs, StabilizeArgs};

pub fn run(cli: &Cli) -> Result<Exit> {
    let c = &cli.common;
    match &cli.command {
        Command::Jsr(a) => radius(c, a, "jsr"),
        Command::Lsr(a) => radius(c, a, "lsr"),
        Command::Minimax(a) => radius(c, a, "minimax"),
        Command::Stabilize(a) => stabilize(c, a),
        Command::Hset(a) => hset(c, a),
        Command::Simulate(a) => simulate_cmd(c, a),
    }
}

fn config(c: &Common) -> Config {
    Config {
        budget: c.budget,
        prune: !c.no_prune,
        seed: c.seed,
        ..Config::default()
    }
}

fn load(path: &Path) -> Result<ProblemFile> {
    Ok(ProblemFile::load(path)?)
}

/// Prints `human` or the JSON form of `value`, and saves the JSON to `--out`.
fn emit<T: Serialize>(c: &Common, value: &T, human: &str) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    if c.json {
        println!("{json}");
    } else {
        print!("{human}");
    }
    if let Some(path) = &c.out {
        std::fs::write(path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// A pair by name, or a set paired with the identity.
fn pair_or_set(file: &ProblemFile, name: &str) -> Result<SwitchedPair> {
    if file.pairs.contains_key(name) {
        return Ok(file.pair(name)?);
    }
    let set = file.set(name)?;
    Ok(jsr_pair(&set)?)
}

fn radius(c: &Common, a: &RadiusArgs, command: &'static str) -> Result<Exit> {
    let file = load(&a.file)?;
    let cfg = config(c);
    let (pair, set) = match command {
        "minimax" => (file.pair(&a.name)?, None),
        "jsr" => {
            let set = file.set(&a.name)?;
            (jsr_pair(&set)?, Some(set))
        }
        _ => {
            let set = file.set(&a.name)?;
            (lsr_pair(&set)?, Some(set))
        }
    };
    let horizon = feasible_horizon(&pair, a.n, cfg.budget);
    let brackets = if horizon == 0 {
        Vec::new()
    } else {
        match (command, &set) {
            ("jsr", Some(s)) => vec![jsr_bracket(s, horizon, a.norm, &cfg)?],
            ("lsr", Some(s)) => vec![lsr_bracket(s, horizon, a.norm, &cfg)?],
            _ => minimax_brackets(&pair, horizon, a.norm, &cfg)?,
        }
    };
    let rep = RadiusReport {
        command,
        file: a.file.display().to_string(),
        name: a.name.clone(),
        norm: a.norm,
        requested_horizon: a.n,
        horizon,
        budget: cfg.budget,
        budget_exceeded: horizon < a.n,
        brackets,
    };
    let human = if command == "minimax" {
        report::render_minimax(&rep)
    } else {
        report::render_set_radius(&rep)
    };
    emit(c, &rep, &human)?;
    Ok(if rep.budget_exceeded { Exit::Budget } else { Exit::Ok })
}

fn stabilize(c: &Common, a: &StabilizeArgs) -> Result<Exit> {
    let file = load(&a.file)?;
    let cfg = config(c);
    let (verdict, replay_pair) = match a.mode {
        ModeArg::Asymptotic => {
            let pair = pair_or_set(&file, &a.name)?;
            (check_asymptotic_stability(&pair, a.k_max, a.norm, &cfg)?, pair)
        }
        ModeArg::Uniform => {
            let set = if file.pairs.contains_key(&a.name) {
                let pair = file.pair(&a.name)?;
                set_product(pair.a(), pair.b())?
            } else {
                file.set(&a.name)?
            };
            (check_uniform_stabilizability(&set, a.k_max, a.norm, &cfg)?, lsr_pair(&set)?)
        }
        ModeArg::PathDep => {
            let pair = file.pair(&a.name)?;
            (check_path_dependent(&pair, a.k_max, a.norm, &cfg)?, pair)
        }
        ModeArg::PathIndep => {
            let pair = file.pair(&a.name)?;
            (check_path_independent_periodic(&pair, a.k_max, a.norm, &cfg)?, pair)
        }
    };
    let mut notes = Vec::new();
    let verification = match &verdict.certificate {
        Some(ctrl) => match verify_certificate(&replay_pair, ctrl, a.norm, cfg.budget) {
            Ok(check) => Some(check),
            Err(Error::BudgetExceeded { .. }) => {
                notes.push("certificate replay skipped: budget exceeded".to_string());
                None
            }
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    let mut rep = StabilizeReport {
        command: "stabilize",
        file: a.file.display().to_string(),
        name: a.name.clone(),
        k_max: a.k_max,
        verdict,
        verification,
    };
    rep.verdict.notes.extend(notes);
    let human = report::render_stabilize(&rep, Some(replay_pair.b()));
    emit(c, &rep, &human)?;
    Ok(match rep.verdict.decision {
        Decision::Yes => Exit::Ok,
        Decision::NoAtHorizon => Exit::No,
        Decision::Inconclusive => Exit::Inconclusive,
    })
}

fn hset(c: &Common, a: &HsetArgs) -> Result<Exit> {
    let file = load(&a.file)?;
    let cfg = config(c);
    let backed = file.hsets.get(&a.name).is_some_and(|s| s.is_construction_backed());
    match a.action {
        HsetAction::Materialize => {
            let set = match file.hsets.get(&a.name) {
                Some(spec) => materialize(spec)?,
                None => file.set(&a.name)?,
            };
            let rep = HsetReport::Materialize {
                name: a.name.clone(),
                set: SetEntry::from_set(&set),
            };
            emit(c, &rep, &report::render_hset(&rep, Some(&set)))?;
            Ok(Exit::Ok)
        }
        HsetAction::Falsify => {
            let set = file.set(&a.name)?;
            let outcome = falsify_hset(&set, a.samples, cfg.seed)?;
            let violated = matches!(outcome, Falsification::Violation { .. });
            let rep = HsetReport::Falsify {
                name: a.name.clone(),
                samples: a.samples,
                seed: cfg.seed,
                outcome,
            };
            emit(c, &rep, &report::render_hset(&rep, None))?;
            Ok(if violated { Exit::No } else { Exit::Ok })
        }
        HsetAction::Saddle => {
            let pair = pair_or_set(&file, &a.name)?;
            let (found, certificate) = match saddle_search(&pair, &cfg) {
                Ok(cert) => (true, cert),
                Err(Error::NoSaddle { best }) => (false, best),
                Err(e) => return Err(e.into()),
            };
            let rep = HsetReport::Saddle {
                name: a.name.clone(),
                found,
                a_label: pair.a().label_or(certificate.a_index, "a"),
                b_label: pair.b().label_or(certificate.b_index, "b"),
                certificate,
            };
            emit(c, &rep, &report::render_hset(&rep, None))?;
            Ok(if found { Exit::Ok } else { Exit::NoSaddle })
        }
        HsetAction::Exact if file.pairs.contains_key(&a.name) => {
            let pair = file.pair(&a.name)?;
            let cert = saddle_search(&pair, &cfg)?;
            let rep = HsetReport::ExactPair {
                name: a.name.clone(),
                value: cert.value,
                a_label: pair.a().label_or(cert.a_index, "a"),
                b_label: pair.b().label_or(cert.b_index, "b"),
            };
            emit(c, &rep, &report::render_hset(&rep, None))?;
            Ok(Exit::Ok)
        }
        HsetAction::Exact => {
            let set = file.set(&a.name)?;
            let radii = hset_exact_radii(&set, backed, &cfg)?;
            let rep = HsetReport::Exact {
                name: a.name.clone(),
                construction_backed: backed,
                radii,
            };
            emit(c, &rep, &report::render_hset(&rep, None))?;
            Ok(Exit::Ok)
        }
    }
}

fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("bad index '{t}': {e}")))
        .collect()
}

fn parse_controller(spec: &str) -> Result<Option<Controller>> {
    if spec == "none" {
        return Ok(None);
    }
    if let Some(rest) = spec.strip_prefix("periodic:") {
        return Ok(Some(Controller::periodic(parse_indices(rest)?)?));
    }
    if let Some(rest) = spec.strip_prefix("greedy:") {
        let k = rest.trim().parse().map_err(|e| anyhow!("bad block length '{rest}': {e}"))?;
        return Ok(Some(Controller::block_greedy(k)?));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading controller report {spec}"))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{spec}: {e}")))?;
    let cert = value
        .pointer("/verdict/certificate")
        .or_else(|| value.get("certificate"))
        .unwrap_or(&value);
    if cert.is_null() {
        return Err(Error::ControllerMismatch(format!("{spec} carries no certificate")).into());
    }
    let ctrl: Controller =
        serde_json::from_value(cert.clone()).map_err(|e| Error::Schema(format!("{spec}: {e}")))?;
    Ok(Some(ctrl))
}

fn parse_adversary(spec: &str, seed: u64) -> Result<Adversary> {
    Ok(match spec {
        "worst-case-greedy" => Adversary::WorstCaseGreedy,
        "random" => Adversary::SeededRandom(seed),
        s => {
            if let Some(rest) = s.strip_prefix("fixed:") {
                Adversary::FixedWord(parse_indices(rest)?)
            } else if let Some(rest) = s.strip_prefix("random:") {
                Adversary::SeededRandom(rest.trim().parse().map_err(|e| anyhow!("bad seed '{rest}': {e}"))?)
            } else {
                bail!("unknown adversary '{s}'")
            }
        }
    })
}

fn simulate_cmd(c: &Common, a: &SimulateArgs) -> Result<Exit> {
    let file = load(&a.file)?;
    let pair = pair_or_set(&file, &a.name)?;
    let controller = parse_controller(&a.controller)?;
    let adversary = parse_adversary(&a.adversary, c.seed)?;
    let x0: Vec<f64> = match &a.x0 {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad x0 entry '{t}': {e}")))
            .collect::<Result<_>>()?,
        None => vec![1.0; pair.dim()],
    };
    let traj = simulate(&pair, controller.as_ref(), &adversary, &x0, a.steps, a.norm)?;

    let summary = SimulateSummary {
        steps: traj.steps(),
        initial_norm: traj.norms[0],
        final_norm: *traj.norms.last().expect("trajectory has a start"),
        empirical_rate: traj.empirical_rate(),
        norm: a.norm,
        a_word: traj.a_word.clone(),
        b_word: traj.b_word.clone(),
    };
    let text = if c.json {
        serde_json::to_string_pretty(&summary)?
    } else {
        format!(
            "steps {}  final norm {:.12e}  empirical rate {}",
            summary.steps,
            summary.final_norm,
            summary.empirical_rate.map_or("n/a".to_string(), |r| format!("{r:.12}"))
        )
    };
    match &c.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            traj.write_csv(f)?;
            println!("{text}");
        }
        None => {
            traj.write_csv(io::stdout().lock())?;
            io::stdout().flush()?;
            eprintln!("{text}");
        }
    }
    Ok(Exit::Ok)
}
