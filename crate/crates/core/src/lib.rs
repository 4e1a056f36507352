//! Finite-horizon computation of joint, lower and minimax joint spectral
//! radii for pairs of matrix sets, hourglass-set tools, and stabilizability
//! verdicts with controller certificates for switched systems
//! `x(n) = A_n B_n x(n-1)`.
//!
//! ```
//! use mmjsr::{max_min_norm, Matrix, MatrixSet, NormKind, SearchOptions, SwitchedPair};
//!
//! let a = MatrixSet::new(vec![Matrix::diag(&[2.0, 0.5])?, Matrix::diag(&[3.0, 1.0 / 3.0])?])?;
//! let b = MatrixSet::new(vec![Matrix::diag(&[0.5, 2.0])?, Matrix::diag(&[1.0 / 3.0, 3.0])?])?;
//! let pair = SwitchedPair::new(a, b)?;
//! let mu = max_min_norm(&pair, 3, NormKind::RowSum, &SearchOptions::default())?;
//! assert!((mu.value - 1.0).abs() < 1e-12);
//! # Ok::<(), mmjsr::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod hourglass;
pub mod linalg;
pub mod problem;
pub mod product_space;
pub mod radii;
pub mod stability;

pub use config::{Config, Tolerances, DEFAULT_BUDGET, DEFAULT_SEED};
pub use error::{Error, Result};
pub use hourglass::{
    falsify_hset, hset_exact_radii, hset_minimax_value, materialize, payoff_table, saddle_search, ExactRadii,
    Falsification, HSetSpec, SaddleCertificate,
};
pub use linalg::{co_norm, mat_mul, op_norm, spectral_radius, Matrix, NormKind};
pub use problem::{PairEntry, ProblemFile, SetEntry};
pub use product_space::{
    eval_product, leaf_count, max_min_norm, max_min_rho, min_max_norm, min_max_rho, GameValue, IndexWord, MatrixSet,
    SearchOptions, SwitchedPair,
};
pub use radii::{
    feasible_horizon, jsr_bracket, jsr_pair, lsr_bracket, lsr_pair, minimax_brackets, set_product, HorizonEntry,
    Quantity, RadiusBracket,
};
pub use stability::{
    check_asymptotic_stability, check_path_dependent, check_path_independent_periodic, check_uniform_stabilizability,
    simulate, verify_certificate, Adversary, CertificateCheck, Controller, ControllerKind, Decision, Mode,
    StabilizationVerdict, Trajectory,
};
