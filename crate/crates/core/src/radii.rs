//! Brackets and estimates for the joint, lower and minimax joint spectral radii.
//!
//! Every quantity is an infimum or a limit over horizons, so a finite run can
//! only report what horizons `1..=n` establish. Bounds that follow from
//! submultiplicativity are flagged certified. Spectral-radius based values
//! for the minimax quantities have no proven limit formula and are always
//! reported as estimates.

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{mat_mul, NormKind};
use crate::product_space::{
    leaf_count, max_min_norm, max_min_rho, min_max_norm, min_max_rho, GameValue, IndexWord, MatrixSet,
    SearchOptions, SwitchedPair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Jsr,
    Lsr,
    Mu,
    Eta,
    MuHat,
    MuCheck,
    EtaHat,
    EtaCheck,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Jsr => "jsr",
            Quantity::Lsr => "lsr",
            Quantity::Mu => "mu",
            Quantity::Eta => "eta",
            Quantity::MuHat => "mu_hat",
            Quantity::MuCheck => "mu_check",
            Quantity::EtaHat => "eta_hat",
            Quantity::EtaCheck => "eta_check",
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Values established at one horizon `m`, already raised to the power `1/m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonEntry {
    pub m: usize,
    /// Norm-based value: max/min product norm, or `μ_m`, `η_m`.
    pub norm_root: f64,
    pub norm_witness: IndexWord,
    /// Spectral-radius based value.
    pub rho_root: f64,
    pub rho_witness: IndexWord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBracket {
    pub quantity: Quantity,
    pub lower: f64,
    pub upper: f64,
    pub lower_certified: bool,
    pub upper_certified: bool,
    pub horizon: usize,
    pub norm: NormKind,
    /// Word attaining `lower` (absent when the bound is a constant).
    pub lower_witness: Option<IndexWord>,
    /// Word attaining `upper`.
    pub upper_witness: Option<IndexWord>,
    /// Some value fell below the underflow threshold and was clamped to 0.
    pub underflow: bool,
    pub history: Vec<HorizonEntry>,
}

impl RadiusBracket {
    pub fn is_certified(&self) -> bool {
        self.lower_certified && self.upper_certified
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `v^(1/m)` through logarithms. Returns the root and whether it underflowed.
pub fn horizon_root(value: f64, m: usize, cfg: &Config) -> (f64, bool) {
    if m == 1 {
        return (value, false);
    }
    if value < cfg.tol.underflow {
        return (0.0, value != 0.0);
    }
    ((value.ln() / m as f64).exp(), false)
}

/// `{A B : A in a, B in b}`, ordered with the A index outermost.
pub fn set_product(a: &MatrixSet, b: &MatrixSet) -> Result<MatrixSet> {
    let pair = SwitchedPair::new(a.clone(), b.clone())?;
    let mut members = Vec::with_capacity(a.len() * b.len());
    let mut labels = Vec::with_capacity(a.len() * b.len());
    for (i, am) in pair.a().members().iter().enumerate() {
        for (j, bm) in pair.b().members().iter().enumerate() {
            members.push(mat_mul(am, bm)?);
            labels.push(format!("{}*{}", a.label_or(i, "a"), b.label_or(j, "b")));
        }
    }
    MatrixSet::new(members)?.with_labels(labels)
}

/// The pair `(set, {I})`: products `A_n ... A_1`, words in `a_indices`.
pub fn jsr_pair(set: &MatrixSet) -> Result<SwitchedPair> {
    set.require_square()?;
    SwitchedPair::new(set.clone(), MatrixSet::identity(set.shape().0))
}

/// The pair `({I}, set)`: products `B_n ... B_1`, words in `b_indices`.
pub fn lsr_pair(set: &MatrixSet) -> Result<SwitchedPair> {
    set.require_square()?;
    SwitchedPair::new(MatrixSet::identity(set.shape().0), set.clone())
}

/// Largest horizon `<= n` whose full enumeration fits the budget.
pub fn feasible_horizon(pair: &SwitchedPair, n: usize, budget: u64) -> usize {
    (1..=n).take_while(|&m| leaf_count(pair, m) <= budget as f64).last().unwrap_or(0)
}

type Evaluator<'a> = dyn Fn(usize) -> Result<(GameValue, GameValue)> + 'a;

/// Runs `eval` for `m = 1..=n`, stopping with a partial bracket when the
/// budget is exceeded.
fn collect(
    n: usize,
    cfg: &Config,
    eval: &Evaluator<'_>,
    build: &dyn Fn(&[HorizonEntry], bool) -> RadiusBracket,
) -> Result<RadiusBracket> {
    if n == 0 {
        return Err(Error::InvalidData { expected: 1, got: 0 });
    }
    let mut history = Vec::with_capacity(n);
    let mut underflow = false;
    for m in 1..=n {
        let (by_norm, by_rho) = match eval(m) {
            Ok(v) => v,
            Err(Error::BudgetExceeded { required, budget, .. }) => {
                let partial = (!history.is_empty()).then(|| Box::new(build(&history, underflow)));
                return Err(Error::BudgetExceeded {
                    required,
                    budget,
                    partial,
                });
            }
            Err(e) => return Err(e),
        };
        let (norm_root, u1) = horizon_root(by_norm.value, m, cfg);
        let (rho_root, u2) = horizon_root(by_rho.value, m, cfg);
        underflow |= u1 || u2;
        history.push(HorizonEntry {
            m,
            norm_root,
            norm_witness: by_norm.witness,
            rho_root,
            rho_witness: by_rho.witness,
        });
    }
    Ok(build(&history, underflow))
}

fn best_by<'h>(history: &'h [HorizonEntry], key: impl Fn(&HorizonEntry) -> f64, max: bool) -> &'h HorizonEntry {
    let mut best = &history[0];
    for e in &history[1..] {
        let better = if max { key(e) > key(best) } else { key(e) < key(best) };
        if better {
            best = e;
        }
    }
    best
}

/// Bracket on the joint spectral radius of a square set.
///
/// Upper: `min_m (max ‖Π_m‖)^(1/m)`. Lower: `max_m (max ρ(Π_m))^(1/m)`.
pub fn jsr_bracket(set: &MatrixSet, n: usize, norm: NormKind, cfg: &Config) -> Result<RadiusBracket> {
    let pair = jsr_pair(set)?;
    let opts = SearchOptions::from(*cfg);
    collect(
        n,
        cfg,
        &|m| Ok((max_min_norm(&pair, m, norm, &opts)?, max_min_rho(&pair, m, cfg.budget)?)),
        &|history, underflow| {
            let up = best_by(history, |e| e.norm_root, false);
            let lo = best_by(history, |e| e.rho_root, true);
            RadiusBracket {
                quantity: Quantity::Jsr,
                lower: lo.rho_root,
                upper: up.norm_root,
                lower_certified: true,
                upper_certified: true,
                horizon: history.len(),
                norm,
                lower_witness: Some(lo.rho_witness.clone()),
                upper_witness: Some(up.norm_witness.clone()),
                underflow,
                history: history.to_vec(),
            }
        },
    )
}

/// Bracket on the lower spectral radius of a square set.
///
/// Upper: `min_m min(min ‖Π_m‖, min ρ(Π_m))^(1/m)`. Lower: 0.
pub fn lsr_bracket(set: &MatrixSet, n: usize, norm: NormKind, cfg: &Config) -> Result<RadiusBracket> {
    let pair = lsr_pair(set)?;
    let opts = SearchOptions::from(*cfg);
    collect(
        n,
        cfg,
        &|m| Ok((min_max_norm(&pair, m, norm, &opts)?, min_max_rho(&pair, m, cfg.budget)?)),
        &|history, underflow| {
            let by_norm = best_by(history, |e| e.norm_root, false);
            let by_rho = best_by(history, |e| e.rho_root, false);
            let (upper, witness) = if by_rho.rho_root < by_norm.norm_root {
                (by_rho.rho_root, &by_rho.rho_witness)
            } else {
                (by_norm.norm_root, &by_norm.norm_witness)
            };
            RadiusBracket {
                quantity: Quantity::Lsr,
                lower: 0.0,
                upper,
                lower_certified: true,
                upper_certified: true,
                horizon: history.len(),
                norm,
                lower_witness: None,
                upper_witness: Some(witness.clone()),
                underflow,
                history: history.to_vec(),
            }
        },
    )
}

fn minimax_bracket(quantity: Quantity, history: &[HorizonEntry], underflow: bool, norm: NormKind) -> RadiusBracket {
    let up = best_by(history, |e| e.norm_root, false);
    let lo = best_by(history, |e| e.rho_root, true);
    RadiusBracket {
        quantity,
        lower: lo.rho_root,
        upper: up.norm_root,
        lower_certified: false,
        upper_certified: true,
        horizon: history.len(),
        norm,
        lower_witness: Some(lo.rho_witness.clone()),
        upper_witness: Some(up.norm_witness.clone()),
        underflow,
        history: history.to_vec(),
    }
}

fn point_estimate(quantity: Quantity, history: &[HorizonEntry], underflow: bool, norm: NormKind, max: bool) -> RadiusBracket {
    let e = best_by(history, |e| e.rho_root, max);
    RadiusBracket {
        quantity,
        lower: e.rho_root,
        upper: e.rho_root,
        lower_certified: false,
        upper_certified: false,
        horizon: history.len(),
        norm,
        lower_witness: Some(e.rho_witness.clone()),
        upper_witness: Some(e.rho_witness.clone()),
        underflow,
        history: history.to_vec(),
    }
}

/// Brackets for `μ` and `η` followed by the estimates `μ̂, μ̌, η̂, η̌`.
///
/// The `μ`/`η` upper bounds are certified. Their lower values and all four
/// sequence estimates come from spectral radii and are not certified.
/// On budget overflow the error carries the `μ` bracket of the completed
/// horizons.
pub fn minimax_brackets(pair: &SwitchedPair, n: usize, norm: NormKind, cfg: &Config) -> Result<Vec<RadiusBracket>> {
    let opts = SearchOptions::from(*cfg);
    let mu = collect(
        n,
        cfg,
        &|m| Ok((max_min_norm(pair, m, norm, &opts)?, max_min_rho(pair, m, cfg.budget)?)),
        &|h, u| minimax_bracket(Quantity::Mu, h, u, norm),
    )?;
    let eta = collect(
        n,
        cfg,
        &|m| Ok((min_max_norm(pair, m, norm, &opts)?, min_max_rho(pair, m, cfg.budget)?)),
        &|h, u| minimax_bracket(Quantity::Eta, h, u, norm),
    )?;
    let out = vec![
        point_estimate(Quantity::MuHat, &mu.history, mu.underflow, norm, true),
        point_estimate(Quantity::MuCheck, &mu.history, mu.underflow, norm, false),
        point_estimate(Quantity::EtaHat, &eta.history, eta.underflow, norm, true),
        point_estimate(Quantity::EtaCheck, &eta.history, eta.underflow, norm, false),
    ];
    Ok([vec![mu, eta], out].concat())
}
