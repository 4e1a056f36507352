//! JSON problem files.
//!
//! ```json
//! {
//!   "version": "1",
//!   "sets":  { "A": { "rows": 2, "cols": 2, "matrices": [[1, 0, 0, 1]], "labels": ["I"] } },
//!   "pairs": { "P": { "a": "A", "b": "A" } },
//!   "hsets": { "H": { "construction": "independent-row-uncertainty", "row_choices": [[[1, 2]], [[3, 4]]] } }
//! }
//! ```
//!
//! Matrices are row-major. Pairs may name plain sets or hourglass specs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hourglass::{materialize, HSetSpec};
use crate::linalg::Matrix;
use crate::product_space::{MatrixSet, SwitchedPair};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetEntry {
    pub rows: usize,
    pub cols: usize,
    pub matrices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl SetEntry {
    pub fn from_set(set: &MatrixSet) -> Self {
        let (rows, cols) = set.shape();
        Self {
            rows,
            cols,
            matrices: set.members().iter().map(|m| m.data().to_vec()).collect(),
            labels: set.labels().map(<[String]>::to_vec),
        }
    }

    pub fn build(&self) -> Result<MatrixSet> {
        let members = self
            .matrices
            .iter()
            .map(|d| Matrix::new(self.rows, self.cols, d.clone()))
            .collect::<Result<Vec<_>>>()?;
        let set = MatrixSet::new(members)?;
        match &self.labels {
            Some(l) => set.with_labels(l.clone()),
            None => Ok(set),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    #[serde(default)]
    pub sets: BTreeMap<String, SetEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pairs: BTreeMap<String, PairEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hsets: BTreeMap<String, HSetSpec>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Checks the version, every set and spec, and every pair reference.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(schema(format!(
                "unsupported version '{}', expected '{SCHEMA_VERSION}'",
                self.version
            )));
        }
        for name in self.hsets.keys() {
            if self.sets.contains_key(name) {
                return Err(schema(format!("'{name}' is defined both as a set and as an hset")));
            }
        }
        for (name, entry) in &self.sets {
            entry.build().map_err(|e| schema(format!("set '{name}': {e}")))?;
        }
        for (name, spec) in &self.hsets {
            materialize(spec).map_err(|e| schema(format!("hset '{name}': {e}")))?;
        }
        for name in self.pairs.keys() {
            self.pair(name)?;
        }
        Ok(())
    }

    pub fn has_set(&self, name: &str) -> bool {
        self.sets.contains_key(name) || self.hsets.contains_key(name)
    }

    /// A plain set, or the materialized hourglass spec of that name.
    pub fn set(&self, name: &str) -> Result<MatrixSet> {
        if let Some(entry) = self.sets.get(name) {
            return entry.build();
        }
        if let Some(spec) = self.hsets.get(name) {
            return materialize(spec);
        }
        Err(schema(format!("no set named '{name}'")))
    }

    pub fn hset(&self, name: &str) -> Result<&HSetSpec> {
        self.hsets
            .get(name)
            .ok_or_else(|| schema(format!("no hset named '{name}'")))
    }

    pub fn pair(&self, name: &str) -> Result<SwitchedPair> {
        let entry = self
            .pairs
            .get(name)
            .ok_or_else(|| schema(format!("no pair named '{name}'")))?;
        let a = self.set(&entry.a).map_err(|e| schema(format!("pair '{name}': {e}")))?;
        let b = self.set(&entry.b).map_err(|e| schema(format!("pair '{name}': {e}")))?;
        SwitchedPair::new(a, b).map_err(|e| schema(format!("pair '{name}': {e}")))
    }
}
