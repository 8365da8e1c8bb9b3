//! Existence and non-existence of extensions.
//!
//! Infeasibility is only ever asserted with an LP Farkas certificate or an
//! inconsistent linear system. The positive-semidefinite probe can report
//! feasibility with a witness, or an undetermined result with the final
//! projection gap.

mod cp;
mod instances;
mod lp;

pub use cp::cp_extension_feasibility;
pub use instances::{
    build_example1_instance, build_prop25_instance, prop25_corner_reduction, BlockMixture,
    CornerReduction, Example1Instance, Prop25Instance,
};
pub use lp::{brute_force_oracle, lp_feasibility, LPInstance, OracleResult};

use serde::{Deserialize, Serialize};

use crate::numerics::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Nonnegative LP solution.
    Vector { values: Vec<f64> },
    /// Per-block Choi matrices of a unital completely positive map.
    Choi { blocks: Vec<ComplexMatrix> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `y` with `Aᵀy ≥ 0` and `bᵀy < 0`.
    Farkas { y: Vec<f64> },
    /// Least-squares residual of an inconsistent linear system.
    LinearResidual { residual: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FeasibilityOutcome {
    Feasible {
        witness: Witness,
    },
    Infeasible {
        certificate: Certificate,
    },
    Undetermined {
        gap_evidence: f64,
        iterations: usize,
    },
}

impl FeasibilityOutcome {
    pub fn verdict(&self) -> Verdict {
        match self {
            Self::Feasible { .. } => Verdict::Feasible,
            Self::Infeasible { .. } => Verdict::Infeasible,
            Self::Undetermined { .. } => Verdict::Undetermined,
        }
    }

    pub fn vector_witness(&self) -> Option<&[f64]> {
        match self {
            Self::Feasible {
                witness: Witness::Vector { values },
            } => Some(values),
            _ => None,
        }
    }

    pub fn farkas(&self) -> Option<&[f64]> {
        match self {
            Self::Infeasible {
                certificate: Certificate::Farkas { y },
            } => Some(y),
            _ => None,
        }
    }
}
