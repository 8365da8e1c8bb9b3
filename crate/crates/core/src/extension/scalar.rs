use serde::{Deserialize, Serialize};

use crate::algebra::{validate_subalgebra, BlockSpace, ScalarCharacter, Subalgebra, TraceWeights};
use crate::error::{Error, Result};
use crate::numerics::{
    least_norm_solve, orthonormalize_against_scale, polar_decompose, project_onto_span,
    ComplexMatrix, Frobenius, Pairing, Tolerances, C64,
};

/// The functional `x ↦ tr_w(x ρ)`.
#[derive(Clone, Debug)]
pub struct NormalState {
    space: BlockSpace,
    weights: TraceWeights,
    density: ComplexMatrix,
}

impl NormalState {
    /// Wraps a candidate density. Only the shape is checked here; use
    /// [`crate::verify::is_state`] for positivity and normalization.
    pub fn new(space: BlockSpace, weights: TraceWeights, density: ComplexMatrix) -> Result<Self> {
        space.check_shape(&density)?;
        if weights.per_block().len() != space.num_blocks() {
            return Err(Error::validation("weights do not match the block space"));
        }
        Ok(Self {
            space,
            weights,
            density,
        })
    }

    /// State on `M_n` with the plain trace.
    pub fn on_full(density: ComplexMatrix) -> Result<Self> {
        let space = BlockSpace::new(vec![density.rows()])?;
        let weights = TraceWeights::uniform(&space);
        Self::new(space, weights, density)
    }

    pub fn space(&self) -> &BlockSpace {
        &self.space
    }

    pub fn weights(&self) -> &TraceWeights {
        &self.weights
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    /// `tr_w(x ρ)`.
    pub fn expectation(&self, x: &ComplexMatrix) -> C64 {
        self.weights.trace_product(x, &self.density)
    }
}

/// Intermediate objects of the L² construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructionTrace {
    /// Representative with `tr(x r) = φ(x)` for the unweighted trace.
    pub r: ComplexMatrix,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub h: ComplexMatrix,
    pub dim_e: usize,
    pub dim_f: usize,
    /// `1/‖b‖₂`.
    pub distance_bound: f64,
    /// Hilbert-Schmidt distance from `a` to `F`.
    pub distance_a_f: f64,
}

fn check_inputs(a: &Subalgebra, phi: &ScalarCharacter, tol: &Tolerances) -> Result<()> {
    tol.validate()?;
    if !a.is_unital() {
        return Err(Error::validation("the algebra must be unital"));
    }
    if phi.domain().space() != a.space() || phi.domain().dim() != a.dim() {
        return Err(Error::validation(
            "functional is not defined on the given algebra",
        ));
    }
    let mut report = validate_subalgebra(a, tol);
    report.merge("character.", phi.validate(tol));
    if !report.pass() {
        let failed: Vec<String> = report
            .failures()
            .map(|c| format!("{} {:.3e}", c.name, c.value))
            .collect();
        return Err(Error::validation(format!(
            "input validation failed: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

/// `x − φ(x)·1` over the basis of `A`, orthonormalized in Frobenius geometry.
fn kernel_basis(a: &Subalgebra, phi: &ScalarCharacter, tol: &Tolerances) -> Vec<ComplexMatrix> {
    let one = a.identity();
    let elems: Vec<ComplexMatrix> = a
        .basis()
        .iter()
        .map(|x| {
            let mut y = x.clone();
            y.axpy(-phi.evaluate(x), &one);
            y
        })
        .collect();
    let scale = a
        .basis()
        .iter()
        .map(|x| x.frobenius_norm())
        .fold(0.0, f64::max);
    orthonormalize_against_scale(&elems, &Frobenius, tol, scale)
}

/// Normalized residual of largest norm among `candidates` projected off
/// `subspace`. The first index wins ties.
fn max_residual(
    candidates: &[ComplexMatrix],
    subspace: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let mut best: Option<(f64, ComplexMatrix)> = None;
    for c in candidates {
        let res = c - &project_onto_span(c, subspace, &Frobenius)?;
        let n = res.frobenius_norm();
        if best.as_ref().is_none_or(|(m, _)| n > *m) {
            best = Some((n, res));
        }
    }
    match best {
        Some((n, res)) if n > tol.rank_tol => Ok(res.scale_real(1.0 / n)),
        Some((n, _)) => Err(Error::ConstructionFailure(format!(
            "orthogonal complement is numerically zero (largest residual {n:.3e})"
        ))),
        None => Err(Error::ConstructionFailure("empty spanning set".into())),
    }
}

/// `W⁻¹·pinch(v v*)` as a state on `M`.
fn state_from_vector(a: &Subalgebra, v: &ComplexMatrix) -> Result<NormalState> {
    let space = a.space();
    let rho = space.pinch(&v.matmul(&v.adjoint()));
    let density = a.weights().inverse_density().matmul(&rho);
    NormalState::new(space.clone(), a.weights().clone(), density)
}

/// L² factorization engine: `r = ab` from the polar decomposition,
/// `h ∈ [Aa] ⊖ [Ja]`, `ρ = pinch(h h*)`.
pub fn scalar_extend_l2(
    a: &Subalgebra,
    phi: &ScalarCharacter,
    tol: &Tolerances,
) -> Result<(NormalState, ConstructionTrace)> {
    check_inputs(a, phi, tol)?;
    let constraints: Vec<(ComplexMatrix, C64)> = a
        .basis()
        .iter()
        .map(|x| (x.clone(), phi.evaluate(x)))
        .collect();
    let r = least_norm_solve(&constraints, tol)?;
    let polar = polar_decompose(&r, tol)?;
    let b = crate::numerics::eigh(&polar.p).map_values(|v| v.max(0.0).sqrt());
    let a_factor = polar.u.matmul(&b);

    let e_vectors: Vec<ComplexMatrix> = a.basis().iter().map(|x| x.matmul(&a_factor)).collect();
    let f_vectors: Vec<ComplexMatrix> = kernel_basis(a, phi, tol)
        .iter()
        .map(|j| j.matmul(&a_factor))
        .collect();
    // vectors of the form x·a are measured against ‖x‖·‖a‖ so that products
    // vanishing up to rounding are dropped
    let scale = a
        .basis()
        .iter()
        .map(|x| x.frobenius_norm())
        .fold(0.0, f64::max)
        * a_factor.frobenius_norm();
    let e_basis = orthonormalize_against_scale(&e_vectors, &Frobenius, tol, scale);
    let f_basis = orthonormalize_against_scale(&f_vectors, &Frobenius, tol, scale);
    let h = max_residual(&e_basis, &f_basis, tol)?;

    let distance_a_f =
        (&a_factor - &project_onto_span(&a_factor, &f_basis, &Frobenius)?).frobenius_norm();
    let state = state_from_vector(a, &h)?;
    let trace = ConstructionTrace {
        distance_bound: 1.0 / Frobenius.norm(&b),
        distance_a_f,
        dim_e: e_basis.len(),
        dim_f: f_basis.len(),
        r,
        a: a_factor,
        b,
        h,
    };
    Ok((state, trace))
}

/// Reflexivity engine with `ξ = 1`: `η ∈ span A ⊖ span J`, `ρ = pinch(ηη*)`.
pub fn scalar_extend_reflexive(
    a: &Subalgebra,
    phi: &ScalarCharacter,
    tol: &Tolerances,
) -> Result<NormalState> {
    check_inputs(a, phi, tol)?;
    let j_basis = kernel_basis(a, phi, tol);
    let eta = max_residual(a.basis(), &j_basis, tol)?;
    state_from_vector(a, &eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ONE;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn upper_triangular() -> (Subalgebra, ScalarCharacter) {
        let e = |i, j| ComplexMatrix::unit(2, i, j);
        let a = Subalgebra::with_unit_weights(
            BlockSpace::full(2),
            &[e(0, 0), e(1, 1), e(0, 1)],
            true,
            false,
            &tol(),
        )
        .unwrap();
        let phi = ScalarCharacter::from_fn(a.clone(), |x| x[(0, 0)]);
        (a, phi)
    }

    fn scalars() -> (Subalgebra, ScalarCharacter) {
        let a = Subalgebra::with_unit_weights(
            BlockSpace::full(2),
            &[ComplexMatrix::identity(2)],
            true,
            true,
            &tol(),
        )
        .unwrap();
        let phi = ScalarCharacter::from_fn(a.clone(), |x| x[(0, 0)]);
        (a, phi)
    }

    #[test]
    fn l2_upper_triangular_is_forced() {
        let (a, phi) = upper_triangular();
        let (state, trace) = scalar_extend_l2(&a, &phi, &tol()).unwrap();
        assert!(state
            .density()
            .approx_eq(&ComplexMatrix::unit(2, 0, 0), 1e-10));
        assert!(trace.distance_a_f >= trace.distance_bound - 1e-8);
    }

    #[test]
    fn l2_scalars_by_hand() {
        let (a, phi) = scalars();
        let (state, trace) = scalar_extend_l2(&a, &phi, &tol()).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(trace.r.approx_eq(&half, 1e-12));
        assert_eq!(trace.dim_f, 0);
        assert_eq!(trace.dim_e, 1);
        assert!(state.density().approx_eq(&half, 1e-12));
    }

    #[test]
    fn l2_point_mass_on_atoms() {
        let space = BlockSpace::commutative(3);
        let a = Subalgebra::with_unit_weights(
            space,
            &[ComplexMatrix::identity(3), ComplexMatrix::unit(3, 1, 1)],
            true,
            true,
            &tol(),
        )
        .unwrap();
        let phi = ScalarCharacter::from_pairs(
            a.clone(),
            &[
                (ComplexMatrix::identity(3), ONE),
                (ComplexMatrix::unit(3, 1, 1), ONE),
            ],
            &tol(),
        )
        .unwrap();
        let (state, _) = scalar_extend_l2(&a, &phi, &tol()).unwrap();
        assert!(state
            .density()
            .approx_eq(&ComplexMatrix::unit(3, 1, 1), 1e-10));
    }

    #[test]
    fn reflexive_examples() {
        let (a, phi) = scalars();
        let state = scalar_extend_reflexive(&a, &phi, &tol()).unwrap();
        assert!(state
            .density()
            .approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-12));

        let diag = Subalgebra::with_unit_weights(
            BlockSpace::full(2),
            &[ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)],
            true,
            true,
            &tol(),
        )
        .unwrap();
        let first = ScalarCharacter::from_fn(diag.clone(), |x| x[(0, 0)]);
        let state = scalar_extend_reflexive(&diag, &first, &tol()).unwrap();
        assert!(state
            .density()
            .approx_eq(&ComplexMatrix::unit(2, 0, 0), 1e-12));

        let (a, phi) = upper_triangular();
        let state = scalar_extend_reflexive(&a, &phi, &tol()).unwrap();
        assert!(state
            .density()
            .approx_eq(&ComplexMatrix::unit(2, 0, 0), 1e-12));
    }

    #[test]
    fn weighted_atoms_keep_the_extension() {
        let space = BlockSpace::commutative(3);
        let w = TraceWeights::new(&space, vec![0.5, 2.0, 0.25]).unwrap();
        let a = Subalgebra::from_span(
            space,
            w,
            &[ComplexMatrix::identity(3), ComplexMatrix::unit(3, 0, 0)],
            true,
            true,
            &tol(),
        )
        .unwrap();
        // φ(1) = 1, φ(e₁) = 0
        let phi = ScalarCharacter::from_pairs(
            a.clone(),
            &[
                (ComplexMatrix::identity(3), ONE),
                (ComplexMatrix::unit(3, 0, 0), C64::new(0.0, 0.0)),
            ],
            &tol(),
        )
        .unwrap();
        for state in [
            scalar_extend_l2(&a, &phi, &tol()).unwrap().0,
            scalar_extend_reflexive(&a, &phi, &tol()).unwrap(),
        ] {
            assert!((state.expectation(&ComplexMatrix::identity(3)) - ONE).norm() < 1e-12);
            assert!(state.expectation(&ComplexMatrix::unit(3, 0, 0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_multiplicative_functional() {
        let (a, _) = upper_triangular();
        let trace = ScalarCharacter::from_fn(a.clone(), |x| x.trace().scale(0.5));
        assert!(matches!(
            scalar_extend_l2(&a, &trace, &tol()),
            Err(Error::Validation(_))
        ));
    }
}
