//! Self-describing JSON documents for operators.
//!
//! ```json
//! {"format":"multisum-operator","version":1,"arity":2,"dim":3,"r":2.0,
//!  "codomain":{"kind":"sequence","q":1.0,"dim":3},"field":"real",
//!  "representation":"diagonal","coefficients":[1.0,1.0,1.0,1.0,1.0,1.0]}
//! ```
//!
//! Complex coefficients are interleaved `re, im` pairs. Numbers are written
//! in shortest round-trip form, so any decimal with 17 significant digits
//! reads back to the same bits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{Codomain, Coefficients, MultilinearOperator, Representation};
use crate::error::{Error, Result};
use crate::scalar::Field;

pub const FORMAT_TAG: &str = "multisum-operator";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationTag {
    Dense,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDocument {
    pub format: String,
    pub version: u32,
    pub arity: usize,
    pub dim: usize,
    #[serde(with = "crate::serde_exponent")]
    pub r: f64,
    pub codomain: Codomain,
    pub field: Field,
    pub representation: RepresentationTag,
    pub coefficients: Vec<f64>,
}

impl From<&MultilinearOperator> for OperatorDocument {
    fn from(op: &MultilinearOperator) -> Self {
        let (tag, c) = match op.representation() {
            Representation::Dense(c) => (RepresentationTag::Dense, c),
            Representation::Diagonal(c) => (RepresentationTag::Diagonal, c),
        };
        let coefficients = match c {
            Coefficients::Real(v) => v.clone(),
            Coefficients::Complex(v) => v.iter().flat_map(|z| [z.re, z.im]).collect(),
        };
        OperatorDocument {
            format: FORMAT_TAG.to_string(),
            version: 1,
            arity: op.arity(),
            dim: op.dim(),
            r: op.domain_exponent(),
            codomain: op.codomain(),
            field: op.field(),
            representation: tag,
            coefficients,
        }
    }
}

impl TryFrom<OperatorDocument> for MultilinearOperator {
    type Error = Error;

    fn try_from(doc: OperatorDocument) -> Result<Self> {
        if doc.format != FORMAT_TAG {
            return Err(Error::Format(format!("unexpected format tag `{}`", doc.format)));
        }
        if doc.version != 1 {
            return Err(Error::Format(format!("unsupported version {}", doc.version)));
        }
        let coeffs = match doc.field {
            Field::Real => Coefficients::Real(doc.coefficients),
            Field::Complex => {
                if !doc.coefficients.len().is_multiple_of(2) {
                    return Err(Error::Format("complex coefficients need an even count".into()));
                }
                Coefficients::Complex(doc.coefficients.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
            }
        };
        match doc.representation {
            RepresentationTag::Dense => MultilinearOperator::dense(doc.arity, doc.dim, doc.r, doc.codomain, coeffs),
            RepresentationTag::Diagonal => {
                let q = match doc.codomain {
                    Codomain::Sequence { q, dim } if dim == doc.dim => q,
                    _ => return Err(Error::Format("diagonal operators need an ℓ_q^N codomain".into())),
                };
                MultilinearOperator::diagonal(doc.arity, doc.dim, doc.r, q, coeffs)
            }
        }
    }
}

impl MultilinearOperator {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&OperatorDocument::from(self)).expect("operator documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: OperatorDocument = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        MultilinearOperator::try_from(doc)
    }
}
