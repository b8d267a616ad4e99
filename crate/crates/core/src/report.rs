//! Check reports shared by every verifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Where a worst case was found.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub values: BTreeMap<String, f64>,
}

impl Witness {
    pub fn new(description: impl Into<String>) -> Self {
        Self {
            description: description.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }
}

/// Outcome of one sampling or exhaustive check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    /// Largest observed LHS/RHS (or the check-specific statistic).
    pub worst_ratio: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    /// Samples rejected or skipped (zero mass, constraint violations).
    pub skipped: usize,
    pub witness: Option<Witness>,
    /// Check-specific scalar diagnostics.
    pub extras: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, threshold: f64) -> Self {
        Self {
            check: check.into(),
            worst_ratio: 0.0,
            threshold,
            pass: true,
            samples: 0,
            skipped: 0,
            witness: None,
            extras: BTreeMap::new(),
        }
    }

    /// Records a sample; keeps the witness of the largest ratio seen.
    /// Ties keep the earlier witness so reports are order-stable.
    pub fn observe(&mut self, ratio: f64, witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        if ratio > self.worst_ratio || (self.witness.is_none() && self.samples == 1) {
            self.worst_ratio = ratio;
            self.witness = Some(witness());
        }
    }

    pub fn extra(&mut self, key: &str, value: f64) {
        self.extras.insert(key.to_string(), value);
    }

    /// Sets `pass` to `worst_ratio <= threshold`.
    pub fn finish_upper(mut self) -> Self {
        self.pass = self.worst_ratio <= self.threshold;
        self
    }
}
