use super::space::{BlockSpace, TraceWeights};
use crate::error::{Error, Result};
use crate::numerics::{orthonormalize, ComplexMatrix, Pairing, Tolerances, C64};
use crate::verify::VerificationReport;

/// A linear span inside `M`, stored as a basis orthonormal under the
/// weighted pairing.
///
/// The `unital` and `selfadjoint` flags are claims; [`validate_subalgebra`]
/// checks them along with product closure. Operator systems use the same
/// type with closure left unchecked.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    space: BlockSpace,
    weights: TraceWeights,
    basis: Vec<ComplexMatrix>,
    unital: bool,
    selfadjoint: bool,
}

impl Subalgebra {
    /// Orthonormalizes `elements` into a new span. Elements must be valid
    /// elements of `space`.
    pub fn from_span(
        space: BlockSpace,
        weights: TraceWeights,
        elements: &[ComplexMatrix],
        unital: bool,
        selfadjoint: bool,
        tol: &Tolerances,
    ) -> Result<Self> {
        for (i, x) in elements.iter().enumerate() {
            space
                .check_element(x, tol.residual_tol)
                .map_err(|e| Error::validation(format!("spanning element {i}: {e}")))?;
        }
        let basis = orthonormalize(elements, &weights, tol);
        Ok(Self {
            space,
            weights,
            basis,
            unital,
            selfadjoint,
        })
    }

    /// Convenience for unit weights.
    pub fn with_unit_weights(
        space: BlockSpace,
        elements: &[ComplexMatrix],
        unital: bool,
        selfadjoint: bool,
        tol: &Tolerances,
    ) -> Result<Self> {
        let w = TraceWeights::uniform(&space);
        Self::from_span(space, w, elements, unital, selfadjoint, tol)
    }

    pub fn space(&self) -> &BlockSpace {
        &self.space
    }

    pub fn weights(&self) -> &TraceWeights {
        &self.weights
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    pub fn identity(&self) -> ComplexMatrix {
        self.space.identity()
    }

    /// Coordinates `⟨x, bₖ⟩_w` against the stored basis.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Vec<C64> {
        self.basis
            .iter()
            .map(|b| self.weights.inner(x, b))
            .collect()
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
        for b in &self.basis {
            out.axpy(self.weights.inner(x, b), b);
        }
        out
    }

    /// Absolute distance from `x` to the span in the weighted norm.
    pub fn distance(&self, x: &ComplexMatrix) -> f64 {
        self.weights.norm(&(x - &self.project(x)))
    }

    /// Distance relative to `‖x‖_w` (zero for `x = 0`).
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        let n = self.weights.norm(x);
        if n == 0.0 {
            0.0
        } else {
            self.distance(x) / n
        }
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: &Tolerances) -> bool {
        self.membership_residual(x) <= tol.residual_tol
    }

    /// Same span conjugated by a unitary `u` of `M`.
    pub fn conjugated(&self, u: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let ua = u.adjoint();
        let elems: Vec<ComplexMatrix> =
            self.basis.iter().map(|b| u.matmul(b).matmul(&ua)).collect();
        Self::from_span(
            self.space.clone(),
            self.weights.clone(),
            &elems,
            self.unital,
            self.selfadjoint,
            tol,
        )
    }

    /// Copy with different structural flags.
    pub fn with_flags(&self, unital: bool, selfadjoint: bool) -> Self {
        Self {
            unital,
            selfadjoint,
            ..self.clone()
        }
    }
}

/// Smallest subalgebra containing `generators` (and `1` when `unital`),
/// found by iterating span-then-multiply to a fixed point.
pub fn generate_algebra(
    space: &BlockSpace,
    weights: &TraceWeights,
    generators: &[ComplexMatrix],
    unital: bool,
    tol: &Tolerances,
) -> Result<Subalgebra> {
    let mut elements: Vec<ComplexMatrix> = Vec::new();
    if unital {
        elements.push(space.identity());
    }
    elements.extend(generators.iter().cloned());
    let mut current = Subalgebra::from_span(
        space.clone(),
        weights.clone(),
        &elements,
        unital,
        false,
        tol,
    )?;
    // dimension is bounded by N², so the loop terminates
    loop {
        let dim = current.dim();
        let mut candidates = current.basis.clone();
        for x in &current.basis {
            for y in &current.basis {
                let p = x.matmul(y);
                if current.membership_residual(&p) > tol.residual_tol {
                    candidates.push(p);
                }
            }
        }
        if candidates.len() == dim {
            break;
        }
        let next = Subalgebra::from_span(
            space.clone(),
            weights.clone(),
            &candidates,
            unital,
            false,
            tol,
        )?;
        if next.dim() == dim {
            break;
        }
        current = next;
    }
    let selfadjoint = current
        .basis
        .iter()
        .all(|b| current.membership_residual(&b.adjoint()) <= tol.residual_tol);
    current.selfadjoint = selfadjoint;
    Ok(current)
}

/// Residuals of product closure, unit membership, adjoint closure and
/// block support. Never fails; inspect `pass()`.
pub fn validate_subalgebra(s: &Subalgebra, tol: &Tolerances) -> VerificationReport {
    let mut report = VerificationReport::new();
    let mut closure: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let products: Vec<ComplexMatrix> = s
        .basis
        .iter()
        .flat_map(|x| s.basis.iter().map(move |y| x.matmul(y)))
        .collect();
    for p in &products {
        scale = scale.max(s.weights.norm(p));
    }
    for p in &products {
        // products that vanish numerically are trivially in the span
        if s.weights.norm(p) > tol.rank_tol * scale.max(1.0) {
            closure = closure.max(s.membership_residual(p));
        }
    }
    report.residual("closure_residual", closure, tol);
    if s.unital {
        report.residual("unit_residual", s.membership_residual(&s.identity()), tol);
    }
    if s.selfadjoint {
        let adj = s
            .basis
            .iter()
            .map(|b| s.membership_residual(&b.adjoint()))
            .fold(0.0, f64::max);
        report.residual("adjoint_residual", adj, tol);
    }
    let support = s
        .basis
        .iter()
        .map(|b| s.space.support_residual(b))
        .fold(0.0, f64::max);
    report.residual("support_residual", support, tol);
    report
}
