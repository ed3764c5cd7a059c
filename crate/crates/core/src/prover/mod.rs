//! Shannon-cone prover for entropy inequalities over field expressions.
//!
//! A statement is elaborated into a [`ProblemInstance`]: ground variables
//! (base plus derived), determinations, symmetry and independence equalities,
//! and the elemental inequalities. [`prove`] searches for a nonnegative exact
//! combination reproducing the objective and returns a [`Certificate`] that
//! [`check_certificate`] verifies by recombination alone.

mod certificate;
mod derive;
mod elemental;
mod ground;
mod instance;
mod lp;
mod reduce;
mod solve;
mod suite;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::fmt::Display;

use num_traits::{One, Signed, Zero};
use serde::Serializer;
use thiserror::Error;

use crate::Rational;

pub use certificate::{check_certificate, Certificate};
pub use derive::{
    check_use, run_derivation, Derivation, DerivationReport, DerivationStep, LemmaUse, StepReport,
    StepStatus,
};
pub use elemental::{elemental_inequalities, DEFAULT_CAP};
pub use ground::{Determination, DeterminationSource, GroundSet, GroundVar};
pub use instance::{
    elaborate, elaborate_with, AssumedConstraint, ConstraintId, ElaborateOptions, ProblemInstance,
    SymmetryGroup,
};
pub use suite::{run_item, run_suite, suite_items, ItemReport, ItemStatus, Route, SuiteItem, SuiteReport};
pub use solve::{
    prove, prove_restricted, prove_statement, EntropyVector, ProofOutcome, ProveOptions,
    StatementProof,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProverError {
    #[error("{count} ground variables exceed the cap of {cap}")]
    TooManyVariables { count: usize, cap: usize },
    #[error("determination failed validation: {0}")]
    DeterminationInvalid(String),
    #[error("identity `{0}` names no ground variable on either side")]
    UnusableIdentity(String),
    #[error("entropy term over an expression outside the ground set: {0}")]
    UnknownExpression(String),
    #[error("LP limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("inconsistent solver state: {0}")]
    Internal(String),
}

pub(crate) fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Affine functional on the entropy space: subset coordinates (by mask over
/// the ground set), log slack coordinates (by index) and a constant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Form {
    pub sets: BTreeMap<u32, Rational>,
    pub logs: BTreeMap<usize, Rational>,
    pub constant: Rational,
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, Rational>, k: K, c: &Rational) {
    if c.is_zero() {
        return;
    }
    *map.entry(k).or_insert_with(Rational::zero) += c;
}

fn prune<K: Ord>(map: &mut BTreeMap<K, Rational>) {
    map.retain(|_, v| !v.is_zero());
}

impl Form {
    /// Adds `c·H(mask)`; `H(∅) = 0` is dropped.
    pub fn add_set(&mut self, mask: u32, c: &Rational) {
        if mask != 0 {
            add_into(&mut self.sets, mask, c);
            prune(&mut self.sets);
        }
    }

    pub fn add_log(&mut self, index: usize, c: &Rational) {
        add_into(&mut self.logs, index, c);
        prune(&mut self.logs);
    }

    pub fn add_scaled(&mut self, other: &Form, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.sets {
            add_into(&mut self.sets, *k, &(v * c));
        }
        for (k, v) in &other.logs {
            add_into(&mut self.logs, *k, &(v * c));
        }
        self.constant += &other.constant * c;
        prune(&mut self.sets);
        prune(&mut self.logs);
    }

    pub fn negated(&self) -> Form {
        let mut f = Form::default();
        f.add_scaled(self, &-Rational::one());
        f
    }

    pub fn is_zero(&self) -> bool {
        self.sets.is_empty() && self.logs.is_empty() && self.constant.is_zero()
    }

    /// Value at an entropy vector given as a function of the mask.
    pub fn evaluate(&self, h: &dyn Fn(u32) -> Rational, logs: &[Rational]) -> Rational {
        let mut v = self.constant.clone();
        for (m, c) in &self.sets {
            v += c * h(*m);
        }
        for (i, c) in &self.logs {
            v += c * &logs[*i];
        }
        v
    }

    pub fn has_negative_constant(&self) -> bool {
        self.constant.is_negative()
    }
}
