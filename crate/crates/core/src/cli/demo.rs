//! Built-in worked examples, run end to end by `hrkit demo`.

use super::output::{DemoEntry, ResultBody, ResultDocument};
use crate::algebra::{BlockSpace, DCharacter, ScalarCharacter, Subalgebra};
use crate::error::Result;
use crate::extension::{d_character_extend, scalar_extend_l2, scalar_extend_reflexive};
use crate::feasibility::{
    build_example1_instance, build_prop25_instance, lp_feasibility, prop25_corner_reduction,
    Verdict,
};
use crate::numerics::{eigh, ComplexMatrix, Tolerances};
use crate::verify::{choi_of_fn, is_conditional_expectation, sampled_positivity};

fn e(i: usize, j: usize) -> ComplexMatrix {
    ComplexMatrix::unit(2, i, j)
}

fn upper_triangular(tol: &Tolerances) -> Result<Subalgebra> {
    Subalgebra::with_unit_weights(
        BlockSpace::full(2),
        &[e(0, 0), e(1, 1), e(0, 1)],
        true,
        false,
        tol,
    )
}

fn entry(name: &str, outcome: Result<(bool, String)>) -> DemoEntry {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    DemoEntry {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn corner_state(tol: &Tolerances) -> Result<(bool, String)> {
    let a = upper_triangular(tol)?;
    let phi = ScalarCharacter::from_fn(a.clone(), |x| x[(0, 0)]);
    let (l2, trace) = scalar_extend_l2(&a, &phi, tol)?;
    let refl = scalar_extend_reflexive(&a, &phi, tol)?;
    let d1 = (l2.density() - &e(0, 0)).max_abs();
    let d2 = (refl.density() - &e(0, 0)).max_abs();
    Ok((
        d1 <= 1e-10 && d2 <= 1e-10,
        format!(
            "upper-triangular M2, phi(x) = x11: rho = E11 (L2 error {d1:.1e}, reflexive error {d2:.1e}); dim E = {}, dim F = {}",
            trace.dim_e, trace.dim_f
        ),
    ))
}

fn scalar_multiples(tol: &Tolerances) -> Result<(bool, String)> {
    let a = Subalgebra::with_unit_weights(
        BlockSpace::full(2),
        &[ComplexMatrix::identity(2)],
        true,
        true,
        tol,
    )?;
    let phi = ScalarCharacter::from_fn(a.clone(), |x| x[(0, 0)]);
    let (s, _) = scalar_extend_l2(&a, &phi, tol)?;
    let err = (s.density() - &ComplexMatrix::identity(2).scale_real(0.5)).max_abs();
    Ok((
        err <= 1e-10,
        format!("scalars in M2: rho = I/2 (error {err:.1e})"),
    ))
}

fn truncation(tol: &Tolerances, seed: u64) -> Result<(bool, String)> {
    let a = upper_triangular(tol)?;
    let d =
        Subalgebra::with_unit_weights(BlockSpace::full(2), &[e(0, 0), e(1, 1)], true, true, tol)?;
    let phi = DCharacter::from_fn(a.clone(), d.clone(), |x| {
        ComplexMatrix::from_diag(&[x[(0, 0)], x[(1, 1)]])
    })?;
    let recipe = d_character_extend(&a, &phi, tol, seed)?;
    let report = is_conditional_expectation(&recipe, &d, tol);
    let off = recipe.apply(&e(0, 1))?.max_abs();
    let x = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    let pinch = (&recipe.apply(&x)? - &ComplexMatrix::from_real_diag(&[1.0, 4.0])).max_abs();
    Ok((
        report.pass() && off <= 1e-10 && pinch <= 1e-10,
        format!(
            "diagonal truncation on upper-triangular M2 extends to the pinching: Psi(E12) = {off:.1e}, pinching error {pinch:.1e}, report {}",
            if report.pass() { "pass" } else { "fail" }
        ),
    ))
}

fn example1(tol: &Tolerances) -> Result<(bool, String)> {
    let pts = [0.0, 0.25, 0.5, 0.75];
    let no = build_example1_instance(&pts, &[0.25; 4])?;
    let no_v = lp_feasibility(&no.lp, tol)?;
    let mut bty = f64::NAN;
    if let Some(y) = no_v.farkas() {
        bty = no.lp.certificate_values(y).1;
    }
    let yes = build_example1_instance(&[0.0, 0.5, 1.0], &[1.0 / 3.0; 3])?;
    let yes_v = lp_feasibility(&yes.lp, tol)?;
    let mass = yes_v
        .vector_witness()
        .map(|g| g.to_vec())
        .unwrap_or_default();
    let ok = no_v.verdict() == Verdict::Infeasible
        && bty <= -1e-6
        && yes_v.verdict() == Verdict::Feasible;
    Ok((
        ok,
        format!(
            "evaluation at 1 on span{{1, t}}: atoms (0, .25, .5, .75) infeasible with b^T y = {bty:.4}; atoms (0, .5, 1) feasible with g = {mass:.4?}"
        ),
    ))
}

fn upper_triangular_functions(tol: &Tolerances) -> Result<(bool, String)> {
    let no = build_prop25_instance(&[0.0, 0.5], false)?;
    let no_r = prop25_corner_reduction(&no, tol)?;
    let yes = build_prop25_instance(&[0.0, 0.5, 1.0], false)?;
    let yes_r = prop25_corner_reduction(&yes, tol)?;
    let res = yes_r.extension_residual.unwrap_or(f64::INFINITY);
    let ok = no_r.outcome.verdict() == Verdict::Infeasible
        && yes_r.outcome.verdict() == Verdict::Feasible
        && res <= tol.residual_tol;
    Ok((
        ok,
        format!(
            "upper-triangular 2x2 functions, corner evaluated at 1: atoms (0, .5) {:?}; atoms (0, .5, 1) {:?} with extension residual {res:.1e}",
            no_r.outcome.verdict(),
            yes_r.outcome.verdict()
        ),
    ))
}

fn transpose(tol: &Tolerances, seed: u64) -> Result<(bool, String)> {
    let choi = choi_of_fn(2, |x| x.transpose());
    let min = eigh(&choi).min_value();
    let sampled = sampled_positivity(&|x| x.transpose(), 2, seed, 200, tol);
    Ok((
        (min + 1.0).abs() <= 1e-10 && sampled.pass(),
        format!(
            "transpose on M2 is positive (sampled) but not completely positive: Choi min eigenvalue {min:.6}"
        ),
    ))
}

/// Runs every worked example and collects one entry per example.
pub fn run_demo(seed: u64) -> ResultDocument {
    let tol = Tolerances::default();
    let entries = vec![
        entry("corner-state", corner_state(&tol)),
        entry("scalar-multiples", scalar_multiples(&tol)),
        entry("diagonal-truncation", truncation(&tol, seed)),
        entry("affine-moment-lp", example1(&tol)),
        entry(
            "upper-triangular-functions",
            upper_triangular_functions(&tol),
        ),
        entry("transpose-not-cp", transpose(&tol, seed)),
    ];
    ResultDocument::new(
        "demo",
        ResultBody::Demo { entries },
        crate::verify::VerificationReport::new(),
    )
}
