//! The JSON instance format.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "blocks": [2],
//!   "weights": [1.0],
//!   "algebra": { "basis": [M, ...], "unital": true, "selfadjoint": false },
//!   "functional": [[1.0, 0.0], ...],
//!   "range": { "basis": [M, ...], "selfadjoint": true },
//!   "d_character": [M, ...],
//!   "cp_target": [M, ...],
//!   "lp": { "rows": [[...], ...], "rhs": [...] },
//!   "tolerances": { "residual_tol": 1e-8 },
//!   "seed": 0
//! }
//! ```
//!
//! A matrix `M` is a list of rows whose entries are `[re, im]` pairs.
//! `functional`, `d_character` and `cp_target` give the values on the
//! matrices of `algebra.basis`, in order. Every section except the version
//! is optional; commands report the sections they need.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    validate_subalgebra, BlockSpace, DCharacter, ScalarCharacter, Subalgebra, TraceWeights,
};
use crate::error::{Error, Result};
use crate::feasibility::LPInstance;
use crate::numerics::{ComplexMatrix, Tolerances, C64};
use crate::verify::{validate_d_character, VerificationReport};

pub const FORMAT_VERSION: u32 = 1;

fn default_version() -> u32 {
    FORMAT_VERSION
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanDocument {
    pub basis: Vec<ComplexMatrix>,
    #[serde(default = "default_true")]
    pub unital: bool,
    #[serde(default)]
    pub selfadjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(default = "default_version")]
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<SpanDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<SpanDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_character: Option<Vec<ComplexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_target: Option<Vec<ComplexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<LPInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A parsed document with every section turned into validated domain objects.
#[derive(Clone, Debug)]
pub struct Instance {
    pub document: InstanceDocument,
    pub tolerances: Tolerances,
    pub space: Option<BlockSpace>,
    pub weights: Option<TraceWeights>,
    pub algebra: Option<Subalgebra>,
    pub functional: Option<ScalarCharacter>,
    pub range: Option<Subalgebra>,
    pub d_character: Option<DCharacter>,
    pub cp_pairs: Option<Vec<(ComplexMatrix, ComplexMatrix)>>,
    pub lp: Option<LPInstance>,
}

impl Instance {
    pub fn require_algebra(&self) -> Result<&Subalgebra> {
        self.algebra
            .as_ref()
            .ok_or_else(|| Error::validation("instance has no `algebra` section"))
    }

    pub fn require_functional(&self) -> Result<&ScalarCharacter> {
        self.functional
            .as_ref()
            .ok_or_else(|| Error::validation("instance has no `functional` section"))
    }

    pub fn require_range(&self) -> Result<&Subalgebra> {
        self.range
            .as_ref()
            .ok_or_else(|| Error::validation("instance has no `range` section"))
    }

    pub fn require_d_character(&self) -> Result<&DCharacter> {
        self.d_character
            .as_ref()
            .ok_or_else(|| Error::validation("instance has no `d_character` section"))
    }
}

fn field_error(field: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("field `{field}`: {m}")),
        other => Error::Validation(format!("field `{field}`: {other}")),
    }
}

/// Failing checks as "closure residual 1.000e0 (limit 1.0e-8)".
fn describe_failures(report: &VerificationReport) -> String {
    report
        .failures()
        .map(|c| {
            format!(
                "{} {:.3e} (limit {:.1e})",
                c.name.replace('_', " "),
                c.value,
                c.limit
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn require_pass(field: &str, report: VerificationReport) -> Result<()> {
    if report.pass() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "field `{field}`: validation failed: {}",
            describe_failures(&report)
        )))
    }
}

pub fn parse_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_instance_str(&text)
}

/// Deserializes with the JSON location and field path in error messages.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse(format!(
            "line {}, column {}, at `{}`: {}",
            inner.line(),
            inner.column(),
            path,
            inner
        ))
    })?;
    de.end().map_err(|e| {
        Error::Parse(format!(
            "line {}, column {}: trailing characters after the document",
            e.line(),
            e.column()
        ))
    })?;
    Ok(value)
}

pub fn parse_instance_str(text: &str) -> Result<Instance> {
    let document: InstanceDocument = from_json(text)?;
    build_instance(document)
}

/// Validates every section of a document.
pub fn build_instance(document: InstanceDocument) -> Result<Instance> {
    if document.format_version != FORMAT_VERSION {
        return Err(Error::validation(format!(
            "field `format_version`: unsupported version {} (expected {FORMAT_VERSION})",
            document.format_version
        )));
    }
    let tolerances = document.tolerances.unwrap_or_default();
    tolerances
        .validate()
        .map_err(|e| field_error("tolerances", e))?;
    let tol = &tolerances;

    let space = match &document.blocks {
        Some(b) => Some(BlockSpace::new(b.clone()).map_err(|e| field_error("blocks", e))?),
        None => None,
    };
    let weights = match (&space, &document.weights) {
        (Some(s), Some(w)) => {
            Some(TraceWeights::new(s, w.clone()).map_err(|e| field_error("weights", e))?)
        }
        (Some(s), None) => Some(TraceWeights::uniform(s)),
        (None, Some(_)) => return Err(Error::validation("field `weights` given without `blocks`")),
        (None, None) => None,
    };

    let span = |field: &str, doc: &SpanDocument| -> Result<Subalgebra> {
        let (Some(s), Some(w)) = (&space, &weights) else {
            return Err(Error::validation(format!("field `{field}` needs `blocks`")));
        };
        if doc.basis.is_empty() {
            return Err(Error::validation(format!("field `{field}.basis` is empty")));
        }
        let sub = Subalgebra::from_span(
            s.clone(),
            w.clone(),
            &doc.basis,
            doc.unital,
            doc.selfadjoint,
            tol,
        )
        .map_err(|e| field_error(&format!("{field}.basis"), e))?;
        require_pass(field, validate_subalgebra(&sub, tol))?;
        Ok(sub)
    };

    let algebra = match &document.algebra {
        Some(doc) => Some(span("algebra", doc)?),
        None => None,
    };
    let inputs = document
        .algebra
        .as_ref()
        .map(|d| d.basis.clone())
        .unwrap_or_default();
    let values_len = |field: &str, len: usize| -> Result<()> {
        if algebra.is_none() {
            return Err(Error::validation(format!(
                "field `{field}` needs `algebra`"
            )));
        }
        if len != inputs.len() {
            return Err(Error::validation(format!(
                "field `{field}`: {len} values for {} basis matrices",
                inputs.len()
            )));
        }
        Ok(())
    };

    let functional = match &document.functional {
        Some(vals) => {
            values_len("functional", vals.len())?;
            let a = algebra.clone().expect("checked above");
            let pairs: Vec<(ComplexMatrix, C64)> = inputs
                .iter()
                .zip(vals)
                .map(|(x, v)| (x.clone(), C64::new(v[0], v[1])))
                .collect();
            let phi = ScalarCharacter::from_pairs(a, &pairs, tol)
                .map_err(|e| field_error("functional", e))?;
            require_pass("functional", phi.validate(tol))?;
            Some(phi)
        }
        None => None,
    };

    let range = match &document.range {
        Some(doc) => {
            let d = span("range", doc)?;
            if let Some(a) = &algebra {
                let outside = d
                    .basis()
                    .iter()
                    .map(|x| a.membership_residual(x))
                    .fold(0.0, f64::max);
                if outside > tol.residual_tol {
                    return Err(Error::validation(format!(
                        "field `range`: not contained in `algebra` (membership residual {outside:.3e})"
                    )));
                }
            }
            Some(d)
        }
        None => None,
    };

    let d_character = match &document.d_character {
        Some(vals) => {
            values_len("d_character", vals.len())?;
            let Some(d) = range.clone() else {
                return Err(Error::validation("field `d_character` needs `range`"));
            };
            let a = algebra.clone().expect("checked above");
            let pairs: Vec<(ComplexMatrix, ComplexMatrix)> =
                inputs.iter().cloned().zip(vals.iter().cloned()).collect();
            let phi = DCharacter::from_pairs(a, d, &pairs, tol)
                .map_err(|e| field_error("d_character", e))?;
            require_pass("d_character", validate_d_character(&phi, tol))?;
            Some(phi)
        }
        None => None,
    };

    let cp_pairs = match &document.cp_target {
        Some(vals) => {
            values_len("cp_target", vals.len())?;
            let d = vals[0].rows();
            for (i, v) in vals.iter().enumerate() {
                if v.shape() != (d, d) {
                    return Err(Error::validation(format!(
                        "field `cp_target[{i}]`: expected a {d}x{d} matrix"
                    )));
                }
            }
            Some(inputs.iter().cloned().zip(vals.iter().cloned()).collect())
        }
        None => None,
    };

    Ok(Instance {
        lp: document.lp.clone(),
        document,
        tolerances,
        space,
        weights,
        algebra,
        functional,
        range,
        d_character,
        cp_pairs,
    })
}
