//! Result documents and their human and machine renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::document::FORMAT_VERSION;
use crate::extension::{ConstructionTrace, ExpectationRecipe};
use crate::feasibility::{BlockMixture, FeasibilityOutcome, LPInstance, Verdict, Witness};
use crate::numerics::ComplexMatrix;
use crate::verify::VerificationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    L2,
    Reflexive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

/// `Aᵀy` and `bᵀy` for a Farkas vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub aty: Vec<f64>,
    pub bty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultBody {
    NormalState {
        engine: Engine,
        blocks: Vec<usize>,
        weights: Vec<f64>,
        density: ComplexMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trace: Option<ConstructionTrace>,
    },
    Expectation {
        recipe: ExpectationRecipe,
    },
    Feasibility {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lp: Option<LPInstance>,
        outcome: FeasibilityOutcome,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certificate_check: Option<CertificateCheck>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extension: Option<BlockMixture>,
    },
    Demo {
        entries: Vec<DemoEntry>,
    },
}

/// Everything a command produced; the machine format is this document as
/// JSON and can be fed back to `verify`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format_version: u32,
    pub command: String,
    pub result: ResultBody,
    pub report: VerificationReport,
}

impl ResultDocument {
    pub fn new(command: &str, result: ResultBody, report: VerificationReport) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            command: command.to_string(),
            result,
            report,
        }
    }

    pub fn verdict(&self) -> Option<Verdict> {
        match &self.result {
            ResultBody::Feasibility { outcome, .. } => Some(outcome.verdict()),
            _ => None,
        }
    }
}

fn fmt_matrix(out: &mut String, m: &ComplexMatrix, indent: &str) {
    for i in 0..m.rows() {
        out.push_str(indent);
        for j in 0..m.cols() {
            let z = m[(i, j)];
            let re = if z.re.abs() < 5e-13 { 0.0 } else { z.re };
            let im = if z.im.abs() < 5e-13 { 0.0 } else { z.im };
            if im == 0.0 {
                let _ = write!(out, "{re:>11.6} ");
            } else {
                let _ = write!(out, "{re:>9.4}{im:+.4}i ");
            }
        }
        out.push('\n');
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

pub fn render_human(doc: &ResultDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", doc.command);
    match &doc.result {
        ResultBody::NormalState {
            engine,
            blocks,
            density,
            trace,
            ..
        } => {
            let _ = writeln!(out, "engine: {engine:?}, blocks: {blocks:?}");
            if let Some(t) = trace {
                let _ = writeln!(
                    out,
                    "dim E = {}, dim F = {}, dist(a, F) = {:.6e} >= 1/||b||_2 = {:.6e}",
                    t.dim_e, t.dim_f, t.distance_a_f, t.distance_bound
                );
            }
            out.push_str("density:\n");
            fmt_matrix(&mut out, density, "  ");
        }
        ResultBody::Expectation { recipe } => {
            let _ = writeln!(out, "factor sizes: {:?}", recipe.units().factor_sizes);
            for (i, cs) in recipe.corner_states().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "corner state {i} ({}x{}):",
                    cs.density.rows(),
                    cs.density.cols()
                );
                fmt_matrix(&mut out, &cs.density, "  ");
            }
            if let Some(v) = doc.report.get("choi_min_eigenvalue") {
                let _ = writeln!(out, "Choi eigen-floor: {v:.3e}");
            }
        }
        ResultBody::Feasibility {
            outcome,
            certificate_check,
            extension,
            ..
        } => {
            let _ = writeln!(out, "verdict: {:?}", outcome.verdict());
            match outcome {
                FeasibilityOutcome::Feasible { witness } => match witness {
                    Witness::Vector { values } => {
                        let _ = writeln!(out, "witness g = {}", fmt_vec(values));
                    }
                    Witness::Choi { blocks } => {
                        for (i, b) in blocks.iter().enumerate() {
                            let _ = writeln!(out, "Choi block {i}:");
                            fmt_matrix(&mut out, b, "  ");
                        }
                    }
                },
                FeasibilityOutcome::Infeasible { certificate } => {
                    let _ = writeln!(out, "certificate: {certificate:?}");
                }
                FeasibilityOutcome::Undetermined {
                    gap_evidence,
                    iterations,
                } => {
                    let _ = writeln!(
                        out,
                        "gap after {iterations} iterations: {gap_evidence:.6e} (not a proof of infeasibility)"
                    );
                }
            }
            if let Some(c) = certificate_check {
                let _ = writeln!(out, "A^T y = {}", fmt_vec(&c.aty));
                let _ = writeln!(out, "b^T y = {:.6}", c.bty);
            }
            if let Some(m) = extension {
                let _ = writeln!(out, "extension masses: {}", fmt_vec(&m.masses));
            }
        }
        ResultBody::Demo { entries } => {
            for e in entries {
                let _ = writeln!(
                    out,
                    "[{}] {}: {}",
                    if e.passed { "pass" } else { "FAIL" },
                    e.name,
                    e.detail
                );
            }
        }
    }
    out.push_str("checks:\n");
    let _ = writeln!(out, "{}", doc.report);
    out
}

pub fn render_machine(doc: &ResultDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("result documents serialize");
    s.push('\n');
    s
}

pub fn emit_report(doc: &ResultDocument, format: Format) -> String {
    match format {
        Format::Human => render_human(doc),
        Format::Machine => render_machine(doc),
    }
}
