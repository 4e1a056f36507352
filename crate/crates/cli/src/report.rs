//! Report records and their table rendering.

use std::fmt::Write as _;

use mmjsr::{
    CertificateCheck, ControllerKind, ExactRadii, Falsification, IndexWord, MatrixSet, NormKind, RadiusBracket,
    SaddleCertificate, SetEntry, StabilizationVerdict,
};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RadiusReport {
    pub command: &'static str,
    pub file: String,
    pub name: String,
    pub norm: NormKind,
    pub requested_horizon: usize,
    pub horizon: usize,
    pub budget: u64,
    pub budget_exceeded: bool,
    pub brackets: Vec<RadiusBracket>,
}

#[derive(Debug, Serialize)]
pub struct StabilizeReport {
    pub command: &'static str,
    pub file: String,
    pub name: String,
    pub k_max: usize,
    pub verdict: StabilizationVerdict,
    pub verification: Option<CertificateCheck>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum HsetReport {
    Materialize {
        name: String,
        set: SetEntry,
    },
    Falsify {
        name: String,
        samples: usize,
        seed: u64,
        outcome: Falsification,
    },
    Saddle {
        name: String,
        found: bool,
        a_label: String,
        b_label: String,
        certificate: SaddleCertificate,
    },
    Exact {
        name: String,
        construction_backed: bool,
        radii: ExactRadii,
    },
    ExactPair {
        name: String,
        value: f64,
        a_label: String,
        b_label: String,
    },
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub steps: usize,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub empirical_rate: Option<f64>,
    pub norm: NormKind,
    pub a_word: Vec<usize>,
    pub b_word: Vec<usize>,
}

fn word(w: &[usize]) -> String {
    if w.is_empty() {
        return "()".into();
    }
    let parts: Vec<String> = w.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

fn pair_word(w: &IndexWord) -> String {
    format!("a={} b={}", word(&w.a_indices), word(&w.b_indices))
}

fn certified(flag: bool) -> &'static str {
    if flag {
        "certified"
    } else {
        "non-certified estimate"
    }
}

/// `jsr` or `lsr` table: one row per horizon.
pub fn render_set_radius(r: &RadiusReport) -> String {
    let mut s = String::new();
    let b = r.brackets.first();
    let (lead, pick): (&str, fn(&IndexWord) -> &[usize]) = if r.command == "jsr" {
        ("max", |w| &w.a_indices)
    } else {
        ("min", |w| &w.b_indices)
    };
    let _ = writeln!(s, "{} of set '{}' ({} norm), horizons 1..{}", r.command, r.name, r.norm, r.horizon);
    let _ = writeln!(
        s,
        "{:>3}  {:>18}  {:>18}  {:<20}  {:<20}",
        "m",
        format!("{lead} |P|^(1/m)"),
        format!("{lead} rho^(1/m)"),
        "norm word",
        "rho word"
    );
    if let Some(b) = b {
        for e in &b.history {
            let _ = writeln!(
                s,
                "{:>3}  {:>18.12}  {:>18.12}  {:<20}  {:<20}",
                e.m,
                e.norm_root,
                e.rho_root,
                word(pick(&e.norm_witness)),
                word(pick(&e.rho_witness))
            );
        }
        let _ = writeln!(s, "{} in [{:.12}, {:.12}]  ({})", r.command, b.lower, b.upper, certified(b.is_certified()));
        if b.underflow {
            let _ = writeln!(s, "note: values below the underflow threshold were clamped to 0");
        }
    }
    if r.budget_exceeded {
        let _ = writeln!(
            s,
            "budget of {} leaf products exceeded; stopped at horizon {} of {}",
            r.budget, r.horizon, r.requested_horizon
        );
    }
    s
}

/// `minimax` table: `μ_m, η_m, μ̄_m, η̄_m` roots per horizon, then brackets.
pub fn render_minimax(r: &RadiusReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "minimax radii of pair '{}' ({} norm), horizons 1..{}", r.name, r.norm, r.horizon);
    if r.brackets.len() >= 2 {
        let (mu, eta) = (&r.brackets[0], &r.brackets[1]);
        let _ = writeln!(
            s,
            "{:>3}  {:>14}  {:>14}  {:>14}  {:>14}  {:<24}  {:<24}",
            "m", "mu_m^(1/m)", "eta_m^(1/m)", "mubar_m^(1/m)", "etabar_m^(1/m)", "mu word", "eta word"
        );
        for (a, b) in mu.history.iter().zip(&eta.history) {
            let _ = writeln!(
                s,
                "{:>3}  {:>14.9}  {:>14.9}  {:>14.9}  {:>14.9}  {:<24}  {:<24}",
                a.m,
                a.norm_root,
                b.norm_root,
                a.rho_root,
                b.rho_root,
                pair_word(&a.norm_witness),
                pair_word(&b.norm_witness)
            );
        }
        let _ = writeln!(s, "columns: mu, eta certified upper bounds per horizon; mubar, etabar non-certified estimates");
        for b in &r.brackets {
            if b.upper_certified {
                let _ = writeln!(
                    s,
                    "{:<10} upper {:.12} ({})  lower {:.12} ({})",
                    b.quantity.as_str(),
                    b.upper,
                    certified(b.upper_certified),
                    b.lower,
                    certified(b.lower_certified)
                );
                if b.lower > b.upper {
                    let _ = writeln!(s, "{:<10} note: the spectral-radius estimate exceeds the certified upper bound", "");
                }
            } else {
                let _ = writeln!(s, "{:<10} {:.12} (non-certified estimate)", b.quantity.as_str(), b.upper);
            }
        }
    }
    if r.budget_exceeded {
        let _ = writeln!(
            s,
            "budget of {} leaf products exceeded; stopped at horizon {} of {}",
            r.budget, r.horizon, r.requested_horizon
        );
    }
    s
}

pub fn render_stabilize(r: &StabilizeReport, b_set: Option<&MatrixSet>) -> String {
    let v = &r.verdict;
    let mut s = String::new();
    let _ = writeln!(s, "mode: {}", v.mode.as_str());
    let _ = writeln!(s, "decision: {}", v.decision.as_str());
    let _ = writeln!(s, "horizon k = {}, sigma = {:.12} ({} norm)", v.horizon, v.sigma, v.norm);
    if let Some(c) = &v.certificate {
        let _ = writeln!(s, "rate lambda = sigma^(1/k) = {:.12}", v.rate);
        match v.constant {
            Some(c) => {
                let _ = writeln!(s, "constant C = {c:.12}  (|x(n)| <= C lambda^n |x(0)|)");
            }
            None => {
                let _ = writeln!(s, "constant C unavailable (sigma = 0)");
            }
        }
        match c.kind {
            ControllerKind::BlockGreedy => {
                let _ = writeln!(
                    s,
                    "controller: block-greedy, block length {} (per block, the B-block minimizing the block norm)",
                    c.block_length
                );
            }
            ControllerKind::Periodic => {
                let labels: Vec<String> = match b_set {
                    Some(set) => c.periodic_b_indices.iter().map(|&j| set.label_or(j, "b")).collect(),
                    None => c.periodic_b_indices.iter().map(usize::to_string).collect(),
                };
                let _ = writeln!(s, "controller: periodic B-word {} = [{}]", word(&c.periodic_b_indices), labels.join(", "));
            }
        }
    }
    if let Some(w) = &v.witness {
        let _ = writeln!(s, "witness: {}", pair_word(w));
    }
    if let Some(check) = &r.verification {
        let _ = writeln!(
            s,
            "verification: {} adversary blocks replayed, max block norm {:.12} {} sigma",
            check.blocks_checked,
            check.max_block_norm,
            if check.max_block_norm <= v.sigma + 1e-9 { "<=" } else { ">" }
        );
    }
    if !v.history.is_empty() {
        let _ = writeln!(s, "{:>3}  {:>16}  {:>16}", "k", "block bound", "bound^(1/k)");
        for h in &v.history {
            let _ = writeln!(s, "{:>3}  {:>16.12}  {:>16.12}", h.k, h.value, h.value.powf(1.0 / h.k as f64));
        }
    }
    if let Some(b) = &v.bracket {
        let _ = writeln!(
            s,
            "{} bracket up to horizon {}: [{:.12}, {:.12}]",
            b.quantity, b.horizon, b.lower, b.upper
        );
    }
    for n in &v.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

pub fn render_hset(r: &HsetReport, set: Option<&MatrixSet>) -> String {
    let mut s = String::new();
    match r {
        HsetReport::Materialize { name, .. } => {
            let set = set.expect("materialize renders its set");
            let (rows, cols) = set.shape();
            let _ = writeln!(s, "'{name}': {} matrices of shape {rows}x{cols}", set.len());
            for (i, m) in set.members().iter().enumerate() {
                let _ = writeln!(s, "[{}] {}", i, set.label_or(i, "m"));
                for row in 0..rows {
                    let cells: Vec<String> = m.row(row).iter().map(|x| format!("{x:>12.6}")).collect();
                    let _ = writeln!(s, "  {}", cells.join(" "));
                }
            }
        }
        HsetReport::Falsify { name, outcome, .. } => match outcome {
            Falsification::Violation { matrix_index, u, bullet } => {
                let _ = writeln!(
                    s,
                    "'{name}' is not an hourglass set: member {matrix_index} fails condition {bullet} at u = {u:?}"
                );
            }
            Falsification::NoViolationFound { tested } => {
                let _ = writeln!(
                    s,
                    "'{name}': no violation among {tested} vectors (this does not prove membership)"
                );
            }
        },
        HsetReport::Saddle {
            name,
            found,
            a_label,
            b_label,
            certificate,
        } => {
            let _ = writeln!(
                s,
                "{} for pair '{name}': A~ = {a_label} (index {}), B~ = {b_label} (index {})",
                if *found { "saddle point" } else { "no saddle point; best candidate" },
                certificate.a_index,
                certificate.b_index
            );
            let _ = writeln!(s, "value rho(A~ B~) = {:.12}", certificate.value);
            let _ = writeln!(
                s,
                "residuals: max_A rho(A B~) - value = {:.3e}, value - min_B rho(A~ B) = {:.3e}",
                certificate.max_row_residual, certificate.min_col_residual
            );
        }
        HsetReport::Exact {
            name,
            construction_backed,
            radii,
        } => {
            let _ = writeln!(
                s,
                "'{name}' ({}): jsr = {:.12} (member {}), lsr = {:.12} (member {})",
                if *construction_backed {
                    "hourglass by construction"
                } else {
                    "screened by the falsifier"
                },
                radii.jsr,
                radii.jsr_index,
                radii.lsr,
                radii.lsr_index
            );
        }
        HsetReport::ExactPair {
            name,
            value,
            a_label,
            b_label,
        } => {
            let _ = writeln!(
                s,
                "pair '{name}': all minimax radii equal rho({a_label} {b_label}) = {value:.12}"
            );
        }
    }
    s
}
