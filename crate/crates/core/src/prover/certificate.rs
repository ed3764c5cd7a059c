use std::str::FromStr;

use num_traits::Signed;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use super::{ConstraintId, Form, ProblemInstance};
use crate::Rational;

/// Multipliers reproducing an instance's objective: nonnegative on
/// inequalities, free on equalities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    pub entries: Vec<(ConstraintId, Rational)>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    constraint: ConstraintId,
    multiplier: String,
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for (id, m) in &self.entries {
            seq.serialize_element(&Entry {
                constraint: id.clone(),
                multiplier: m.to_string(),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<Entry> = Vec::deserialize(d)?;
        let entries = raw
            .into_iter()
            .map(|e| {
                Rational::from_str(&e.multiplier)
                    .map(|m| (e.constraint, m))
                    .map_err(|_| serde::de::Error::custom(format!("bad multiplier {}", e.multiplier)))
            })
            .collect::<Result<_, _>>()?;
        Ok(Certificate { entries })
    }
}

impl Certificate {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ multiplier · constraint`, or `None` if some id is invalid.
    pub fn combination(&self, pi: &ProblemInstance) -> Option<Form> {
        let mut sum = Form::default();
        for (id, m) in &self.entries {
            sum.add_scaled(&pi.constraint_form(id)?, m);
        }
        Some(sum)
    }
}

/// Exact recombination check: every id denotes a constraint of `pi`,
/// inequality multipliers are nonnegative, and the weighted sum equals the
/// objective coordinate by coordinate.
pub fn check_certificate(c: &Certificate, pi: &ProblemInstance) -> bool {
    if c
        .entries
        .iter()
        .any(|(id, m)| m.is_negative() && !id.is_equality(pi))
    {
        return false;
    }
    c.combination(pi).is_some_and(|sum| sum == pi.objective)
}
