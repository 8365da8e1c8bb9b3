use serde::{Deserialize, Serialize};

use super::scalar::{scalar_extend_l2, NormalState};
use crate::algebra::{BlockSpace, DCharacter, ScalarCharacter, Subalgebra};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Tolerances, C64};
use crate::verify::validate_d_character;
use crate::wedderburn::{matrix_units, range_basis, MatrixUnitSystem};

/// State `σᵢ` on the corner `e₁₁ M e₁₁`, identified with `M_k` through the
/// isometry `embedding: ℂ^k → range(e₁₁)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CornerState {
    pub density: ComplexMatrix,
    pub embedding: ComplexMatrix,
}

impl CornerState {
    pub fn state(&self) -> Result<NormalState> {
        NormalState::on_full(self.density.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RecipeData {
    ambient: BlockSpace,
    units: MatrixUnitSystem,
    corner_states: Vec<CornerState>,
}

/// Data realizing `Ψ(x) = Σᵢ Σ_{j,k} σᵢ(e⁽ⁱ⁾_{1j} x e⁽ⁱ⁾_{k1}) e⁽ⁱ⁾_{jk}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RecipeData", into = "RecipeData")]
pub struct ExpectationRecipe {
    ambient: BlockSpace,
    units: MatrixUnitSystem,
    corner_states: Vec<CornerState>,
    /// `(T, e_jk)` with `Ψ(x) = Σ tr(x T) e_jk`.
    kernels: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl TryFrom<RecipeData> for ExpectationRecipe {
    type Error = Error;
    fn try_from(d: RecipeData) -> Result<Self> {
        Self::new(d.ambient, d.units, d.corner_states)
    }
}

impl From<ExpectationRecipe> for RecipeData {
    fn from(r: ExpectationRecipe) -> Self {
        Self {
            ambient: r.ambient,
            units: r.units,
            corner_states: r.corner_states,
        }
    }
}

impl ExpectationRecipe {
    pub fn new(
        ambient: BlockSpace,
        units: MatrixUnitSystem,
        corner_states: Vec<CornerState>,
    ) -> Result<Self> {
        let n = ambient.total_dim();
        let factors = units.num_factors();
        if corner_states.len() != factors
            || units.units.len() != factors
            || units.central_projections.len() != factors
        {
            return Err(Error::validation(format!(
                "recipe has {factors} factors but {} corner states",
                corner_states.len()
            )));
        }
        let mut kernels = Vec::new();
        for (i, cs) in corner_states.iter().enumerate() {
            let m = units.factor_sizes[i];
            if units.units[i].len() != m || units.units[i].iter().any(|row| row.len() != m) {
                return Err(Error::validation(format!(
                    "factor {i}: unit array is not {m}x{m}"
                )));
            }
            for e in units.units[i].iter().flatten() {
                Error::check_shape((n, n), e.shape())?;
            }
            let k = cs.embedding.cols();
            Error::check_shape((n, k), cs.embedding.shape())?;
            Error::check_shape((k, k), cs.density.shape())?;
            let lifted = cs
                .embedding
                .matmul(&cs.density)
                .matmul(&cs.embedding.adjoint());
            for j in 0..m {
                for kk in 0..m {
                    let t = units.units[i][kk][0]
                        .matmul(&lifted)
                        .matmul(&units.units[i][0][j]);
                    kernels.push((t, units.units[i][j][kk].clone()));
                }
            }
        }
        Ok(Self {
            ambient,
            units,
            corner_states,
            kernels,
        })
    }

    pub fn ambient(&self) -> &BlockSpace {
        &self.ambient
    }

    pub fn units(&self) -> &MatrixUnitSystem {
        &self.units
    }

    pub fn corner_states(&self) -> &[CornerState] {
        &self.corner_states
    }

    /// `Ψ(x)`. The formula is defined on all of `B(ℂ^N)`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.ambient.check_shape(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.ambient.total_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (t, e) in &self.kernels {
            let c: C64 = x.trace_product(t);
            if c != C64::new(0.0, 0.0) {
                out.axpy(c, e);
            }
        }
        out
    }
}

pub fn apply_expectation(recipe: &ExpectationRecipe, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    recipe.apply(x)
}

fn prefix_factor(i: usize, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("factor {i}: {m}")),
        Error::ConstructionFailure(m) => Error::ConstructionFailure(format!("factor {i}: {m}")),
        Error::Structure(m) => Error::Structure(format!("factor {i}: {m}")),
        other => other,
    }
}

/// Compression of `A` to the corner of `e⁽ⁱ⁾₁₁`, as an algebra on
/// `range(e₁₁) ≅ ℂ^k`, together with the character read off `Φ` there.
pub fn corner_character(
    a: &Subalgebra,
    phi: &DCharacter,
    units: &MatrixUnitSystem,
    factor: usize,
    tol: &Tolerances,
) -> Result<(Subalgebra, ScalarCharacter)> {
    if !phi.range().is_selfadjoint() {
        return Err(Error::validation(
            "corner reduction needs a selfadjoint range algebra D",
        ));
    }
    if factor >= units.num_factors() {
        return Err(Error::validation(format!(
            "factor {factor} out of range ({} factors)",
            units.num_factors()
        )));
    }
    let e11 = units.unit(factor, 0, 0);
    let q = range_basis(e11);
    let qa = q.adjoint();
    let k = q.cols();
    let mut pairs = Vec::with_capacity(a.dim());
    let mut elems = Vec::with_capacity(a.dim());
    let rank = e11.trace().re;
    for x in a.basis() {
        let y = e11.matmul(x).matmul(e11);
        let img = phi.evaluate(&y);
        let lambda = e11.trace_product(&img) / rank;
        let mut diff = img.clone();
        diff.axpy(-lambda, e11);
        let resid = diff.frobenius_norm();
        if resid > tol.residual_tol * img.frobenius_norm().max(1.0) {
            return Err(Error::validation(format!(
                "Φ(e₁₁ a e₁₁) is not a multiple of e₁₁ in factor {factor} (bimodule residual {resid:.3e})"
            )));
        }
        let c = qa.matmul(x).matmul(&q);
        elems.push(c.clone());
        pairs.push((c, lambda));
    }
    let corner = Subalgebra::with_unit_weights(BlockSpace::full(k), &elems, true, false, tol)?;
    let chi = ScalarCharacter::from_pairs(corner.clone(), &pairs, tol)?;
    let report = chi.validate(tol);
    if !report.pass() {
        return Err(Error::validation(format!(
            "corner functional of factor {factor} is not a character:\n{report}"
        )));
    }
    Ok((corner, chi))
}

/// Conditional expectation `Ψ: M → D` extending the D-character `Φ`.
pub fn d_character_extend(
    a: &Subalgebra,
    phi: &DCharacter,
    tol: &Tolerances,
    seed: u64,
) -> Result<ExpectationRecipe> {
    tol.validate()?;
    let d = phi.range();
    if !d.is_selfadjoint() {
        return Err(Error::validation(
            "the range algebra D must be selfadjoint (its selfadjoint flag is off)",
        ));
    }
    if phi.domain().space() != a.space() || phi.domain().dim() != a.dim() {
        return Err(Error::validation("Φ is not defined on the given algebra"));
    }
    let report = validate_d_character(phi, tol);
    if !report.pass() {
        return Err(Error::validation(format!(
            "Φ is not a D-character:\n{report}"
        )));
    }
    let units = matrix_units(d, tol, seed)?;
    let mut corner_states = Vec::with_capacity(units.num_factors());
    for i in 0..units.num_factors() {
        let (corner, chi) =
            corner_character(a, phi, &units, i, tol).map_err(|e| prefix_factor(i, e))?;
        let (sigma, _) = scalar_extend_l2(&corner, &chi, tol).map_err(|e| prefix_factor(i, e))?;
        corner_states.push(CornerState {
            density: sigma.density().clone(),
            embedding: range_basis(units.unit(i, 0, 0)),
        });
    }
    ExpectationRecipe::new(a.space().clone(), units, corner_states)
}
