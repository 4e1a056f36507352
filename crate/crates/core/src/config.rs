//! Numerical tolerances and enumeration limits.
//!
//! Every comparison against a tolerance in the crate reads from [`Tolerances`],
//! so a caller can tighten or loosen them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for equality tests and strict-inequality decisions.
    pub rel: f64,
    /// Relative change between successive Gelfand estimates that ends the iteration.
    pub iteration: f64,
    /// Relative safety margin applied to every branch-and-bound cut.
    pub prune_slack: f64,
    /// Values below this are treated as zero when taking m-th roots.
    pub underflow: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            iteration: 1e-12,
            prune_slack: 1e-9,
            underflow: 1e-300,
        }
    }
}

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub tol: Tolerances,
    /// Maximum number of leaf products a single enumeration may evaluate.
    pub budget: u64,
    /// Use branch-and-bound pruning where it is available.
    pub prune: bool,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            budget: DEFAULT_BUDGET,
            prune: true,
            seed: DEFAULT_SEED,
        }
    }
}

impl Config {
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_prune(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    /// `x < 1` with a relative margin, so values that only differ from 1 by
    /// rounding are not mistaken for contractions.
    pub fn is_contracting(&self, x: f64) -> bool {
        x < 1.0 - self.tol.rel
    }

    /// `x >= 1` up to the same margin.
    pub fn is_non_contracting(&self, x: f64) -> bool {
        x >= 1.0 - self.tol.rel
    }
}
