//! Stability and stabilizability of `x(n) = A_n B_n x(n-1)`, where an
//! adversary picks `A_n` and a controller picks `B_n`.
//!
//! A `yes` verdict always comes with a block length `k`, a factor `σ < 1`
//! bounding the norm of every closed-loop block product, and a controller
//! that achieves it. `no-at-horizon` only states that no certificate of
//! length up to the searched horizon exists.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{mat_mul, op_norm, Matrix, NormKind};
use crate::product_space::{max_min_norm, min_max_norm, IndexWord, MatrixSet, SearchOptions, SwitchedPair};
use crate::radii::{jsr_bracket, jsr_pair, lsr_bracket, set_product, RadiusBracket};

/// Powers of a spectral-radius witness tried before giving up on a norm bound.
const MAX_WITNESS_POWER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AsymptoticStability,
    UniformStabilizability,
    PathDependent,
    PathIndependentPeriodic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::AsymptoticStability => "asymptotic-stability",
            Mode::UniformStabilizability => "uniform-stabilizability",
            Mode::PathDependent => "path-dependent",
            Mode::PathIndependentPeriodic => "path-independent-periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Yes,
    NoAtHorizon,
    Inconclusive,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Yes => "yes",
            Decision::NoAtHorizon => "no-at-horizon",
            Decision::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// Per block of `k` steps, sees the adversary's block and answers with
    /// the B-block minimizing the block product norm.
    BlockGreedy,
    /// Repeats a fixed B-word of length `k`.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Controller {
    pub kind: ControllerKind,
    pub block_length: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periodic_b_indices: Vec<usize>,
}

impl Controller {
    pub fn block_greedy(k: usize) -> Result<Self> {
        let c = Self {
            kind: ControllerKind::BlockGreedy,
            block_length: k,
            periodic_b_indices: Vec::new(),
        };
        c.check_shape()?;
        Ok(c)
    }

    pub fn periodic(word: Vec<usize>) -> Result<Self> {
        let c = Self {
            kind: ControllerKind::Periodic,
            block_length: word.len(),
            periodic_b_indices: word,
        };
        c.check_shape()?;
        Ok(c)
    }

    fn check_shape(&self) -> Result<()> {
        if self.block_length == 0 {
            return Err(Error::ControllerMismatch("block length must be at least 1".into()));
        }
        if self.kind == ControllerKind::Periodic && self.periodic_b_indices.len() != self.block_length {
            return Err(Error::ControllerMismatch(format!(
                "periodic word has length {}, block length is {}",
                self.periodic_b_indices.len(),
                self.block_length
            )));
        }
        Ok(())
    }

    pub fn validate(&self, pair: &SwitchedPair) -> Result<()> {
        self.check_shape()?;
        if let Some(&j) = self.periodic_b_indices.iter().find(|&&j| j >= pair.b().len()) {
            return Err(Error::ControllerMismatch(format!(
                "B index {j} out of range for a set of size {}",
                pair.b().len()
            )));
        }
        Ok(())
    }
}

/// Block value found at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonValue {
    pub k: usize,
    pub value: f64,
    pub witness: IndexWord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationVerdict {
    pub mode: Mode,
    pub decision: Decision,
    /// Block length of the certificate, or the last horizon searched.
    pub horizon: usize,
    /// Block-norm bound of the certificate; for other decisions the
    /// smallest bound encountered.
    pub sigma: f64,
    /// `σ^(1/k)`.
    pub rate: f64,
    /// `C` in `‖x(n)‖ <= C rate^n ‖x(0)‖`; absent when `σ = 0` and `k > 1`.
    pub constant: Option<f64>,
    pub norm: NormKind,
    pub certificate: Option<Controller>,
    /// Words attaining `sigma`.
    pub witness: Option<IndexWord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<HorizonValue>,
    /// Bracket behind asymptotic and uniform verdicts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<RadiusBracket>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn max_step_norm(pair: &SwitchedPair, norm: NormKind) -> f64 {
    pair.step_products()
        .iter()
        .flatten()
        .map(|p| op_norm(p, norm))
        .fold(0.0, f64::max)
}

/// `(rate, C)` for a certificate `(k, σ)`: within a block the state grows by
/// at most `F^j`, with `F` the largest one-step norm.
fn decay_constants(pair: &SwitchedPair, k: usize, sigma: f64, norm: NormKind) -> (f64, Option<f64>) {
    let rate = if k == 1 { sigma } else { sigma.powf(1.0 / k as f64) };
    if k == 1 {
        return (rate, Some(1.0));
    }
    if rate == 0.0 {
        return (rate, None);
    }
    let f = max_step_norm(pair, norm);
    let c = (0..k).map(|j| (f / rate).powi(j as i32)).fold(1.0, f64::max);
    (rate, Some(c))
}

fn verdict(mode: Mode, decision: Decision, horizon: usize, sigma: f64, norm: NormKind) -> StabilizationVerdict {
    StabilizationVerdict {
        mode,
        decision,
        horizon,
        sigma,
        rate: f64::NAN,
        constant: None,
        norm,
        certificate: None,
        witness: None,
        history: Vec::new(),
        bracket: None,
        notes: Vec::new(),
    }
}

fn certify(v: &mut StabilizationVerdict, pair: &SwitchedPair, controller: Controller) {
    let (rate, c) = decay_constants(pair, v.horizon, v.sigma, v.norm);
    v.rate = rate;
    v.constant = c;
    v.certificate = Some(controller);
}

/// Is every closed-loop product `A_n B_n ... A_1 B_1` eventually contracting,
/// whatever both players do? Decided through the joint spectral radius of
/// the set of step products.
///
/// For an uncontrolled system pass `B = {I}`.
pub fn check_asymptotic_stability(pair: &SwitchedPair, n_max: usize, norm: NormKind, cfg: &Config) -> Result<StabilizationVerdict> {
    let steps = set_product(pair.a(), pair.b())?;
    let (bracket, exhausted) = match jsr_bracket(&steps, n_max, norm, cfg) {
        Ok(b) => (Some(b), false),
        Err(Error::BudgetExceeded { partial, .. }) => (partial.map(|b| *b), true),
        Err(e) => return Err(e),
    };
    let Some(bracket) = bracket else {
        let mut v = verdict(Mode::AsymptoticStability, Decision::Inconclusive, 0, f64::NAN, norm);
        v.notes.push("budget exceeded before the first horizon".into());
        return Ok(v);
    };

    let first_contracting = bracket.history.iter().find(|e| cfg.is_contracting(e.norm_root));
    let mut v = if let Some(entry) = first_contracting {
        let k = entry.m;
        let value = max_min_norm(&jsr_pair(&steps)?, k, norm, &SearchOptions::from(*cfg))?;
        let mut v = verdict(Mode::AsymptoticStability, Decision::Yes, k, value.value, norm);
        v.witness = Some(split_product_word(&value.witness, pair.b().len()));
        // every B works, so any fixed choice certifies
        certify(&mut v, pair, Controller::periodic(vec![0; k])?);
        v
    } else if cfg.is_non_contracting(bracket.lower) {
        let mut v = verdict(Mode::AsymptoticStability, Decision::NoAtHorizon, bracket.horizon, bracket.upper, norm);
        v.witness = bracket.lower_witness.as_ref().map(|w| split_product_word(w, pair.b().len()));
        v
    } else {
        verdict(Mode::AsymptoticStability, Decision::Inconclusive, bracket.horizon, bracket.upper, norm)
    };
    if exhausted {
        v.notes.push(format!("budget exceeded after horizon {}", bracket.horizon));
    }
    v.bracket = Some(bracket);
    Ok(v)
}

/// Maps a word over the step-product set back to `(a, b)` indices.
fn split_product_word(w: &IndexWord, b_len: usize) -> IndexWord {
    let (a, b) = w.a_indices.iter().map(|&s| (s / b_len, s % b_len)).unzip();
    IndexWord {
        a_indices: a,
        b_indices: b,
    }
}

/// Can a fixed periodic schedule over a square set drive every state to 0?
///
/// Only `yes` or `inconclusive`: no general certified lower bound on the
/// lower spectral radius is available.
pub fn check_uniform_stabilizability(set: &MatrixSet, n_max: usize, norm: NormKind, cfg: &Config) -> Result<StabilizationVerdict> {
    let pair = crate::radii::lsr_pair(set)?;
    let (bracket, exhausted) = match lsr_bracket(set, n_max, norm, cfg) {
        Ok(b) => (Some(b), false),
        Err(Error::BudgetExceeded { partial, .. }) => (partial.map(|b| *b), true),
        Err(e) => return Err(e),
    };
    let Some(bracket) = bracket else {
        let mut v = verdict(Mode::UniformStabilizability, Decision::Inconclusive, 0, f64::NAN, norm);
        v.notes.push("budget exceeded before the first horizon".into());
        return Ok(v);
    };

    let mut found = None;
    for e in &bracket.history {
        if cfg.is_contracting(e.norm_root) {
            found = Some((e.norm_witness.b_indices.clone(), 1));
            break;
        }
        if cfg.is_contracting(e.rho_root) {
            if let Some(j) = contracting_power(set, &e.rho_witness.b_indices, norm, cfg)? {
                found = Some((e.rho_witness.b_indices.clone(), j));
                break;
            }
        }
    }

    let mut v = match found {
        Some((word, reps)) => {
            let schedule: Vec<usize> = word.iter().copied().cycle().take(word.len() * reps).collect();
            let ids = IndexWord {
                a_indices: vec![0; schedule.len()],
                b_indices: schedule.clone(),
            };
            let (_, sigma) = crate::product_space::eval_product(&pair, &ids, norm)?;
            let mut v = verdict(Mode::UniformStabilizability, Decision::Yes, schedule.len(), sigma, norm);
            v.witness = Some(ids);
            certify(&mut v, &pair, Controller::periodic(schedule)?);
            v
        }
        None => {
            let mut v = verdict(Mode::UniformStabilizability, Decision::Inconclusive, bracket.horizon, bracket.upper, norm);
            v.witness = bracket.upper_witness.clone();
            v.notes.push(format!(
                "smallest product norm root up to horizon {} is {}",
                bracket.horizon,
                bracket.history.iter().map(|e| e.norm_root).fold(f64::INFINITY, f64::min)
            ));
            v
        }
    };
    if exhausted {
        v.notes.push(format!("budget exceeded after horizon {}", bracket.horizon));
    }
    v.bracket = Some(bracket);
    Ok(v)
}

/// Smallest `j` with `‖Π^j‖ < 1`, where `Π` is the product along `word`.
fn contracting_power(set: &MatrixSet, word: &[usize], norm: NormKind, cfg: &Config) -> Result<Option<usize>> {
    let mut p = Matrix::identity(set.shape().0);
    for &i in word {
        p = mat_mul(&set.members()[i], &p)?;
    }
    let mut power = p.clone();
    for j in 1..=MAX_WITNESS_POWER {
        if cfg.is_contracting(op_norm(&power, norm)) {
            return Ok(Some(j));
        }
        power = mat_mul(&p, &power)?;
    }
    Ok(None)
}

type BlockSearch = fn(&SwitchedPair, usize, NormKind, &SearchOptions) -> Result<crate::product_space::GameValue>;

fn horizon_search(
    mode: Mode,
    pair: &SwitchedPair,
    k_max: usize,
    norm: NormKind,
    cfg: &Config,
    search: BlockSearch,
    controller: impl Fn(&IndexWord, usize) -> Result<Controller>,
) -> Result<StabilizationVerdict> {
    let opts = SearchOptions::from(*cfg);
    let mut history = Vec::new();
    let mut exhausted = false;
    for k in 1..=k_max {
        match search(pair, k, norm, &opts) {
            Ok(v) => {
                let yes = cfg.is_contracting(v.value);
                history.push(HorizonValue {
                    k,
                    value: v.value,
                    witness: v.witness,
                });
                if yes {
                    break;
                }
            }
            Err(Error::BudgetExceeded { .. }) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let best = history
        .iter()
        .min_by(|x, y| x.value.total_cmp(&y.value))
        .cloned();
    let mut v = match &best {
        Some(h) if cfg.is_contracting(h.value) => {
            let mut v = verdict(mode, Decision::Yes, h.k, h.value, norm);
            v.witness = Some(h.witness.clone());
            certify(&mut v, pair, controller(&h.witness, h.k)?);
            v
        }
        Some(h) if !exhausted => {
            let mut v = verdict(mode, Decision::NoAtHorizon, k_max, h.value, norm);
            v.witness = Some(h.witness.clone());
            v
        }
        Some(h) => {
            let mut v = verdict(mode, Decision::Inconclusive, history.len(), h.value, norm);
            v.witness = Some(h.witness.clone());
            v
        }
        None => verdict(mode, Decision::Inconclusive, 0, f64::NAN, norm),
    };
    if exhausted {
        v.notes.push(format!("budget exceeded after horizon {}", history.len()));
    }
    v.history = history;
    Ok(v)
}

/// Can the controller, seeing each block of the adversary's choices, force
/// every block product below 1? Searches `k = 1..=k_max` for `μ_k < 1`.
pub fn check_path_dependent(pair: &SwitchedPair, k_max: usize, norm: NormKind, cfg: &Config) -> Result<StabilizationVerdict> {
    horizon_search(Mode::PathDependent, pair, k_max, norm, cfg, max_min_norm, |_, k| {
        Controller::block_greedy(k)
    })
}

/// Is there one periodic B-word that contracts against every adversary?
/// Searches `k = 1..=k_max` for `η_k < 1`.
pub fn check_path_independent_periodic(pair: &SwitchedPair, k_max: usize, norm: NormKind, cfg: &Config) -> Result<StabilizationVerdict> {
    horizon_search(Mode::PathIndependentPeriodic, pair, k_max, norm, cfg, min_max_norm, |w, _| {
        Controller::periodic(w.b_indices.clone())
    })
}

/// Result of replaying a controller against every adversary block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub blocks_checked: usize,
    pub max_block_norm: f64,
}

fn words(len: usize, base: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.pow(len as u32);
    (0..total).map(move |mut code| {
        let mut w = vec![0; len];
        for d in w.iter_mut().rev() {
            *d = code % base;
            code /= base;
        }
        w
    })
}

fn block_product(pair: &SwitchedPair, a: &[usize], b: &[usize]) -> Matrix {
    let mut q = Matrix::identity(pair.dim());
    for (&i, &j) in a.iter().zip(b) {
        let step = mat_mul(&pair.a().members()[i], &pair.b().members()[j]).expect("pair shapes compose");
        q = mat_mul(&step, &q).expect("square");
    }
    q
}

/// The controller's answer to an adversary block, and its block norm.
fn respond(pair: &SwitchedPair, controller: Option<&Controller>, a_block: &[usize], offset: usize, norm: NormKind) -> (Vec<usize>, f64) {
    let len = a_block.len();
    match controller {
        Some(c) if c.kind == ControllerKind::BlockGreedy => {
            let mut best: Option<(Vec<usize>, f64)> = None;
            for b in words(len, pair.b().len()) {
                let v = op_norm(&block_product(pair, a_block, &b), norm);
                if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((b, v));
                }
            }
            best.expect("B set is non-empty")
        }
        Some(c) => {
            let p = &c.periodic_b_indices;
            let b: Vec<usize> = (0..len).map(|t| p[(offset + t) % p.len()]).collect();
            let v = op_norm(&block_product(pair, a_block, &b), norm);
            (b, v)
        }
        None => {
            let b = vec![0; len];
            let v = op_norm(&block_product(pair, a_block, &b), norm);
            (b, v)
        }
    }
}

/// Replays `controller` against all `|A|^k` adversary blocks.
pub fn verify_certificate(pair: &SwitchedPair, controller: &Controller, norm: NormKind, budget: u64) -> Result<CertificateCheck> {
    controller.validate(pair)?;
    let k = controller.block_length;
    let mut cost = (pair.a().len() as f64).powi(k as i32);
    if controller.kind == ControllerKind::BlockGreedy {
        cost *= (pair.b().len() as f64).powi(k as i32);
    }
    if cost > budget as f64 {
        return Err(Error::BudgetExceeded {
            required: cost,
            budget,
            partial: None,
        });
    }
    let mut check = CertificateCheck {
        blocks_checked: 0,
        max_block_norm: 0.0,
    };
    for a in words(k, pair.a().len()) {
        let (_, v) = respond(pair, Some(controller), &a, 0, norm);
        check.blocks_checked += 1;
        check.max_block_norm = check.max_block_norm.max(v);
    }
    Ok(check)
}

/// How the disturbance sequence is chosen during simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    /// Per block, the A-block that maximizes the norm of the controller's
    /// best block product. Myopic: it does not look across blocks.
    WorstCaseGreedy,
    /// Cycles through a fixed word.
    FixedWord(Vec<usize>),
    SeededRandom(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `states[0] = x0`, `states[n] = (A B) states[n-1]`.
    pub states: Vec<Vec<f64>>,
    pub a_word: Vec<usize>,
    pub b_word: Vec<usize>,
    pub norms: Vec<f64>,
    pub norm: NormKind,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.a_word.len()
    }

    /// `(‖x(T)‖ / ‖x(0)‖)^(1/T)`; `None` for `T = 0` or a zero start.
    pub fn empirical_rate(&self) -> Option<f64> {
        let t = self.steps();
        let start = self.norms[0];
        if t == 0 || start == 0.0 {
            return None;
        }
        Some((self.norms[t] / start).powf(1.0 / t as f64))
    }

    /// Writes `step, x0..x{N-1}, norm, a_index, b_index`; step 0 has no indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let dim = self.states[0].len();
        let mut header = vec!["step".to_string()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        header.extend(["norm", "a_index", "b_index"].map(String::from));
        w.write_record(&header).map_err(io)?;
        for (n, x) in self.states.iter().enumerate() {
            let mut rec = vec![n.to_string()];
            rec.extend(x.iter().map(|v| format!("{v:.16e}")));
            rec.push(format!("{:.16e}", self.norms[n]));
            if n == 0 {
                rec.extend([String::new(), String::new()]);
            } else {
                rec.push(self.a_word[n - 1].to_string());
                rec.push(self.b_word[n - 1].to_string());
            }
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Runs the closed loop for `steps` steps.
///
/// Time is cut into blocks of the controller's block length (1 without a
/// controller, which always plays B index 0). The adversary commits to each
/// block before the controller answers.
pub fn simulate(
    pair: &SwitchedPair,
    controller: Option<&Controller>,
    adversary: &Adversary,
    x0: &[f64],
    steps: usize,
    norm: NormKind,
) -> Result<Trajectory> {
    if x0.len() != pair.dim() {
        return Err(Error::DimensionMismatch {
            op: "initial state",
            left: (pair.dim(), 1),
            right: (x0.len(), 1),
        });
    }
    if let Some(c) = controller {
        c.validate(pair)?;
    }
    if let Adversary::FixedWord(w) = adversary {
        if w.is_empty() {
            return Err(Error::Schema("fixed adversary word is empty".into()));
        }
        if let Some(&i) = w.iter().find(|&&i| i >= pair.a().len()) {
            return Err(Error::IndexOutOfRange {
                what: "A set",
                index: i,
                len: pair.a().len(),
            });
        }
    }
    let k = controller.map_or(1, |c| c.block_length);
    let products = pair.step_products();
    let mut rng = match adversary {
        Adversary::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };

    let mut traj = Trajectory {
        states: vec![x0.to_vec()],
        a_word: Vec::with_capacity(steps),
        b_word: Vec::with_capacity(steps),
        norms: vec![norm.vector_norm(x0)],
        norm,
    };
    let mut t = 0;
    while t < steps {
        let len = k.min(steps - t);
        let a_block: Vec<usize> = match adversary {
            Adversary::FixedWord(w) => (t..t + len).map(|s| w[s % w.len()]).collect(),
            Adversary::SeededRandom(_) => {
                let rng = rng.as_mut().expect("seeded");
                (0..len).map(|_| rng.random_range(0..pair.a().len())).collect()
            }
            Adversary::WorstCaseGreedy => {
                let mut best: Option<(Vec<usize>, f64)> = None;
                for a in words(len, pair.a().len()) {
                    let (_, v) = respond(pair, controller, &a, t, norm);
                    if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                        best = Some((a, v));
                    }
                }
                best.expect("A set is non-empty").0
            }
        };
        let (b_block, _) = respond(pair, controller, &a_block, t, norm);
        for (&i, &j) in a_block.iter().zip(&b_block) {
            let x = products[i][j].mul_vec(traj.states.last().expect("non-empty"))?;
            traj.norms.push(norm.vector_norm(&x));
            traj.states.push(x);
            traj.a_word.push(i);
            traj.b_word.push(j);
        }
        t += len;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ms: Vec<Matrix>) -> MatrixSet {
        MatrixSet::new(ms).unwrap()
    }

    fn example2() -> SwitchedPair {
        SwitchedPair::new(
            set(vec![Matrix::diag(&[2.0, 0.5]).unwrap(), Matrix::diag(&[3.0, 1.0 / 3.0]).unwrap()]),
            set(vec![Matrix::diag(&[0.5, 2.0]).unwrap(), Matrix::diag(&[1.0 / 3.0, 3.0]).unwrap()]),
        )
        .unwrap()
    }

    fn example1() -> MatrixSet {
        let h = 3f64.sqrt() / 2.0;
        set(vec![
            Matrix::diag(&[0.5, 2.0]).unwrap(),
            Matrix::from_rows(&[[h, 0.5], [-0.5, h]]).unwrap(),
        ])
    }

    fn rotation(deg: f64, scale: f64) -> Matrix {
        let (s, c) = deg.to_radians().sin_cos();
        Matrix::from_rows(&[[c, -s], [s, c]]).unwrap().scale(scale).unwrap()
    }

    #[test]
    fn contraction_is_asymptotically_stable() {
        let pair = SwitchedPair::new(set(vec![Matrix::identity(2).scale(0.5).unwrap()]), MatrixSet::identity(2)).unwrap();
        let v = check_asymptotic_stability(&pair, 3, NormKind::RowSum, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.horizon, 1);
        assert_eq!(v.sigma, 0.5);
        assert!(v.certificate.is_some());
    }

    #[test]
    fn example1_is_not_asymptotically_stable() {
        let pair = SwitchedPair::new(example1(), MatrixSet::identity(2)).unwrap();
        let v = check_asymptotic_stability(&pair, 3, NormKind::Spectral, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::NoAtHorizon);
        assert!(v.bracket.unwrap().lower >= 2.0 - 1e-12);
    }

    #[test]
    fn example1_uniform_is_inconclusive_at_one() {
        let v = check_uniform_stabilizability(&example1(), 8, NormKind::Spectral, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::Inconclusive);
        assert!((v.bracket.unwrap().upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_yes_cases() {
        let s = set(vec![Matrix::diag(&[2.0, 2.0]).unwrap(), Matrix::diag(&[0.4, 0.4]).unwrap()]);
        let v = check_uniform_stabilizability(&s, 2, NormKind::RowSum, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.horizon, 1);
        assert_eq!(v.certificate.unwrap().periodic_b_indices, vec![1]);

        let s = set(vec![rotation(30.0, 1.1), rotation(45.0, 0.8)]);
        let v = check_uniform_stabilizability(&s, 2, NormKind::Spectral, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert!((v.sigma - 0.8).abs() < 1e-12);
    }

    #[test]
    fn uniform_uses_powers_of_spectral_witness() {
        // ρ < 1 but the norm of the matrix itself exceeds 1
        let s = set(vec![Matrix::from_rows(&[[0.5, 4.0], [0.0, 0.5]]).unwrap()]);
        let v = check_uniform_stabilizability(&s, 1, NormKind::RowSum, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert!(v.horizon > 1);
        assert!(v.sigma < 1.0);
    }

    #[test]
    fn example2_verdicts_fail_at_horizon() {
        let pair = example2();
        let cfg = Config::default();
        let pd = check_path_dependent(&pair, 4, NormKind::RowSum, &cfg).unwrap();
        assert_eq!(pd.decision, Decision::NoAtHorizon);
        assert_eq!(pd.history.len(), 4);
        let pi = check_path_independent_periodic(&pair, 4, NormKind::RowSum, &cfg).unwrap();
        assert_eq!(pi.decision, Decision::NoAtHorizon);
    }

    #[test]
    fn contracting_singleton_pair() {
        let pair = SwitchedPair::new(
            set(vec![Matrix::from_rows(&[[0.5, 0.1], [0.0, 0.3]]).unwrap()]),
            set(vec![Matrix::from_rows(&[[0.9, 0.0], [0.2, 0.8]]).unwrap()]),
        )
        .unwrap();
        let cfg = Config::default();
        for v in [
            check_path_dependent(&pair, 3, NormKind::RowSum, &cfg).unwrap(),
            check_path_independent_periodic(&pair, 3, NormKind::RowSum, &cfg).unwrap(),
        ] {
            assert_eq!(v.decision, Decision::Yes);
            assert_eq!(v.horizon, 1);
            let check = verify_certificate(&pair, v.certificate.as_ref().unwrap(), NormKind::RowSum, 1000).unwrap();
            assert!(check.max_block_norm <= v.sigma + 1e-9);
        }
    }

    #[test]
    fn single_good_b_gives_periodic_certificate() {
        let pair = SwitchedPair::new(
            set(vec![Matrix::diag(&[2.0, 0.5]).unwrap(), Matrix::diag(&[0.5, 2.0]).unwrap()]),
            set(vec![Matrix::diag(&[0.3, 0.3]).unwrap(), Matrix::diag(&[1.0, 1.0]).unwrap()]),
        )
        .unwrap();
        let v = check_path_independent_periodic(&pair, 2, NormKind::RowSum, &Config::default()).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.certificate.unwrap().periodic_b_indices, vec![0]);
    }

    #[test]
    fn greedy_controller_holds_example2_at_one() {
        let pair = example2();
        let c = Controller::block_greedy(1).unwrap();
        for adv in [
            Adversary::WorstCaseGreedy,
            Adversary::FixedWord(vec![1, 0, 0]),
            Adversary::SeededRandom(3),
        ] {
            let t = simulate(&pair, Some(&c), &adv, &[1.0, 1.0], 12, NormKind::RowSum).unwrap();
            assert!(t.norms.iter().all(|&n| (n - 1.0).abs() < 1e-12), "{adv:?}: {:?}", t.norms);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let t = simulate(&example2(), None, &Adversary::WorstCaseGreedy, &[0.0, 0.0], 5, NormKind::RowSum).unwrap();
        assert!(t.states.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(t.empirical_rate(), None);
    }

    #[test]
    fn simulate_rejects_mismatches() {
        let pair = example2();
        assert!(matches!(
            simulate(&pair, None, &Adversary::WorstCaseGreedy, &[1.0], 1, NormKind::RowSum),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = Controller::periodic(vec![5]).unwrap();
        assert!(matches!(
            simulate(&pair, Some(&bad), &Adversary::WorstCaseGreedy, &[1.0, 1.0], 1, NormKind::RowSum),
            Err(Error::ControllerMismatch(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let t = simulate(&example2(), None, &Adversary::FixedWord(vec![1]), &[1.0, 1.0], 1, NormKind::RowSum).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,x0,x1,norm,a_index,b_index");
        assert!(lines[1].starts_with("0,1.0000000000000000e0,"));
        assert!(lines[1].ends_with(",,"));
        assert!(lines[2].ends_with(",1,0"));
    }

    #[test]
    fn steps_zero_keeps_only_start() {
        let t = simulate(&example2(), None, &Adversary::WorstCaseGreedy, &[1.0, 2.0], 0, NormKind::RowSum).unwrap();
        assert_eq!(t.states, vec![vec![1.0, 2.0]]);
    }
}
