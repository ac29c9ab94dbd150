//! Text format: `{"n": <int>, "terms": [{"vars": [<sorted ints>], "coef": <float>}, …]}`.
//!
//! Floats are written in shortest round-trip form, so `parse(serialize(p)) == p`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Monomial, MultilinearPoly};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub vars: Vec<u32>,
    pub coef: f64,
}

/// Serialized form of a [`MultilinearPoly`]; embedded by the decoupled file formats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyRecord {
    pub n: usize,
    pub terms: Vec<TermRecord>,
}

impl From<&MultilinearPoly> for PolyRecord {
    fn from(p: &MultilinearPoly) -> Self {
        PolyRecord {
            n: p.n(),
            terms: p
                .terms()
                .iter()
                .map(|(m, c)| TermRecord {
                    vars: m.vars().to_vec(),
                    coef: *c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolyRecord> for MultilinearPoly {
    type Error = Error;

    fn try_from(rec: PolyRecord) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut terms = Vec::with_capacity(rec.terms.len());
        for (idx, t) in rec.terms.into_iter().enumerate() {
            if t.vars.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidTerm {
                    term: idx,
                    reason: format!("vars {:?} are not strictly increasing", t.vars),
                });
            }
            if let Some(&v) = t.vars.iter().find(|&&v| v as usize >= rec.n) {
                return Err(Error::InvalidTerm {
                    term: idx,
                    reason: format!("variable {v} out of range for n = {}", rec.n),
                });
            }
            if !seen.insert(t.vars.clone()) {
                return Err(Error::InvalidTerm {
                    term: idx,
                    reason: format!("vars {:?} repeat an earlier term", t.vars),
                });
            }
            terms.push((Monomial(t.vars), t.coef));
        }
        MultilinearPoly::from_terms(rec.n, terms)
    }
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse(text: &str) -> Result<MultilinearPoly> {
    let rec: PolyRecord = serde_json::from_str(text).map_err(json_error)?;
    MultilinearPoly::try_from(rec)
}

pub fn serialize(poly: &MultilinearPoly) -> String {
    serde_json::to_string(&PolyRecord::from(poly)).expect("polynomial records always serialize")
}
