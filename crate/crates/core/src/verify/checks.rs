use super::VerificationReport;
use crate::algebra::{BlockSpace, DCharacter, ScalarCharacter, Subalgebra};
use crate::error::{Error, Result};
use crate::extension::{ExpectationRecipe, NormalState};
use crate::numerics::{eigh, ComplexMatrix, Tolerances, ONE};
use crate::random::{gaussian_matrix, seeded_rng};

/// Normalization, positivity, Hermiticity and block support of a density.
pub fn is_state(state: &NormalState, tol: &Tolerances) -> VerificationReport {
    let rho = state.density();
    let mut report = VerificationReport::new();
    report.residual(
        "trace_residual",
        (state.weights().trace(rho) - ONE).norm(),
        tol,
    );
    report.floor("min_eigenvalue", eigh(rho).min_value(), tol);
    report.residual(
        "hermitian_residual",
        (rho - &rho.adjoint()).frobenius_norm(),
        tol,
    );
    report.residual("support_residual", state.space().support_residual(rho), tol);
    report
}

/// `max |tr_w(x ρ) − φ(x)|` over the basis of `A`.
pub fn extends_functional(
    state: &NormalState,
    a: &Subalgebra,
    phi: &ScalarCharacter,
    tol: &Tolerances,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    let residual = if state.space() != a.space() {
        f64::INFINITY
    } else {
        a.basis()
            .iter()
            .map(|x| (state.expectation(x) - phi.evaluate(x)).norm())
            .fold(0.0, f64::max)
    };
    report.residual("extension_residual", residual, tol);
    report
}

/// Homomorphism, unitality, range, identity-on-D and bimodule residuals.
///
/// The bimodule property is checked one side at a time, `Φ(dx) = dΦ(x)`
/// and `Φ(xd) = Φ(x)d`, which together give the two-sided identity.
pub fn validate_d_character(phi: &DCharacter, tol: &Tolerances) -> VerificationReport {
    let a = phi.domain();
    let d = phi.range();
    let mut report = VerificationReport::new();
    let one = a.identity();
    report.residual(
        "unit_residual",
        (&phi.evaluate(&one) - &one).frobenius_norm() + a.distance(&one),
        tol,
    );
    let images: Vec<ComplexMatrix> = a.basis().iter().map(|x| phi.evaluate(x)).collect();
    let mut mult: f64 = 0.0;
    let mut closure: f64 = 0.0;
    for (x, fx) in a.basis().iter().zip(&images) {
        for (y, fy) in a.basis().iter().zip(&images) {
            let p = x.matmul(y);
            closure = closure.max(a.distance(&p));
            mult = mult.max((&phi.evaluate(&p) - &fx.matmul(fy)).frobenius_norm());
        }
    }
    report.residual("closure_residual", closure, tol);
    report.residual("multiplicativity_residual", mult, tol);
    let range = images.iter().map(|v| d.distance(v)).fold(0.0, f64::max);
    report.residual("range_residual", range, tol);
    let mut ident: f64 = 0.0;
    let mut bimod: f64 = 0.0;
    for dd in d.basis() {
        ident = ident.max((&phi.evaluate(dd) - dd).frobenius_norm() + a.distance(dd));
        for (x, fx) in a.basis().iter().zip(&images) {
            let left = &phi.evaluate(&dd.matmul(x)) - &dd.matmul(fx);
            let right = &phi.evaluate(&x.matmul(dd)) - &fx.matmul(dd);
            bimod = bimod.max(left.frobenius_norm()).max(right.frobenius_norm());
        }
    }
    report.residual("identity_on_d_residual", ident, tol);
    report.residual("bimodule_residual", bimod, tol);
    report
}

/// Choi matrix `[Φ(E_ij)]` from the images of the `n²` matrix units,
/// listed row-major (`values[i·n + j] = Φ(E_ij)`).
pub fn choi_of_map(values: &[ComplexMatrix], n: usize) -> Result<ComplexMatrix> {
    if n == 0 || values.len() != n * n {
        return Err(Error::validation(format!(
            "Choi matrix needs images of all {} matrix units, got {}",
            n * n,
            values.len()
        )));
    }
    let (d, dc) = values[0].shape();
    let mut choi = ComplexMatrix::zeros(n * d, n * dc);
    for i in 0..n {
        for j in 0..n {
            let v = &values[i * n + j];
            Error::check_shape((d, dc), v.shape())?;
            choi.set_submatrix(i * d, j * dc, v);
        }
    }
    Ok(choi)
}

/// Choi matrix of a map on `M_n` given as a function.
pub fn choi_of_fn(n: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let values: Vec<ComplexMatrix> = (0..n * n)
        .map(|idx| f(&ComplexMatrix::unit(n, idx / n, idx % n)))
        .collect();
    choi_of_map(&values, n).expect("all matrix units supplied")
}

/// Conditional-expectation checks for an arbitrary map `Ψ` on `B(ℂ^N)`
/// onto `D`: unitality, idempotence and bimodule property on the matrix
/// units of `M`, range inside `D`, and the Choi eigenvalue floor.
pub fn is_conditional_expectation_map(
    psi: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
    space: &BlockSpace,
    d: &Subalgebra,
    tol: &Tolerances,
) -> VerificationReport {
    let n = space.total_dim();
    let mut report = VerificationReport::new();
    let one = space.identity();
    report.residual("unit_residual", (&psi(&one) - &one).frobenius_norm(), tol);
    let units = space.matrix_units();
    let images: Vec<ComplexMatrix> = units.iter().map(psi).collect();
    let mut idem: f64 = 0.0;
    let mut range: f64 = 0.0;
    for y in &images {
        idem = idem.max((&psi(y) - y).frobenius_norm());
        range = range.max(d.distance(y));
    }
    report.residual("idempotence_residual", idem, tol);
    report.residual("range_residual", range, tol);
    let mut bimod: f64 = 0.0;
    for dd in d.basis() {
        for (x, y) in units.iter().zip(&images) {
            let left = &psi(&dd.matmul(x)) - &dd.matmul(y);
            let right = &psi(&x.matmul(dd)) - &y.matmul(dd);
            bimod = bimod.max(left.frobenius_norm()).max(right.frobenius_norm());
        }
    }
    report.residual("bimodule_residual", bimod, tol);
    let choi = choi_of_fn(n, psi);
    report.residual("choi_hermitian_residual", choi.hermitian_residual(), tol);
    report.floor("choi_min_eigenvalue", eigh(&choi).min_value(), tol);
    report
}

/// [`is_conditional_expectation_map`] applied to a recipe.
pub fn is_conditional_expectation(
    recipe: &ExpectationRecipe,
    d: &Subalgebra,
    tol: &Tolerances,
) -> VerificationReport {
    if recipe.ambient() != d.space() {
        let mut report = VerificationReport::new();
        report.residual("space_mismatch", f64::INFINITY, tol);
        return report;
    }
    is_conditional_expectation_map(&|x| recipe.apply_unchecked(x), recipe.ambient(), d, tol)
}

/// `max ‖Ψ(x) − Φ(x)‖` over the basis of the domain of `Φ`.
pub fn extends_d_character(
    psi: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
    phi: &DCharacter,
    tol: &Tolerances,
) -> VerificationReport {
    let residual = phi
        .domain()
        .basis()
        .iter()
        .map(|x| (&psi(x) - &phi.evaluate(x)).frobenius_norm())
        .fold(0.0, f64::max);
    let mut report = VerificationReport::new();
    report.residual("extension_residual", residual, tol);
    report
}

/// Smallest eigenvalue of `map(x)` over seeded random density matrices
/// `x = g*g / tr(g*g)` on `M_n`. Passing is evidence, not proof.
pub fn sampled_positivity(
    map: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
    n: usize,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> VerificationReport {
    let mut rng = seeded_rng(seed);
    let mut min_eig = f64::INFINITY;
    let mut herm: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let g = gaussian_matrix(n, n, &mut rng);
        let x = g.adjoint().matmul(&g);
        let x = x.scale_real(1.0 / x.trace().re);
        let y = map(&x);
        herm = herm.max(y.hermitian_residual());
        min_eig = min_eig.min(eigh(&y).min_value());
    }
    let mut report = VerificationReport::new();
    report.residual("hermitian_residual", herm, tol);
    report.floor("min_eigenvalue", min_eig, tol);
    report.note(format!(
        "positivity sampled on {} random inputs; a pass is not a proof",
        samples.max(1)
    ));
    report
}
