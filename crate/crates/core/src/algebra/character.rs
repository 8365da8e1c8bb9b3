use super::space::TraceWeights;
use super::subalgebra::Subalgebra;
use crate::error::{Error, Result};
use crate::numerics::{
    least_norm_solve, orthonormalize_against_scale, pseudo_inverse, svd, ComplexMatrix, Pairing,
    Tolerances, C64, ONE, ZERO,
};
use crate::verify::VerificationReport;

/// Coefficients expressing stored basis elements through user-supplied
/// spanning elements: `bₖ = Σᵢ coeff[k][i] xᵢ`.
fn basis_from_inputs(
    domain: &Subalgebra,
    inputs: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    for x in inputs {
        domain.space().check_shape(x)?;
    }
    let dim = domain.dim();
    // C[i][k] = ⟨xᵢ, bₖ⟩, so xᵢ = Σₖ C[i][k] bₖ.
    let c = ComplexMatrix::from_fn(inputs.len(), dim, |i, k| {
        domain.weights().inner(&inputs[i], &domain.basis()[k])
    });
    let rank = svd(&c).rank(tol.rank_tol);
    if rank < dim {
        return Err(Error::validation(format!(
            "given elements span {rank} of {dim} dimensions; values do not determine the map"
        )));
    }
    Ok(pseudo_inverse(&c, tol.rank_tol))
}

/// A linear functional on a span, given by its values on the stored basis.
/// Multiplicativity is checked by [`ScalarCharacter::validate`], never assumed.
#[derive(Clone, Debug)]
pub struct ScalarCharacter {
    domain: Subalgebra,
    values: Vec<C64>,
}

impl ScalarCharacter {
    pub fn from_basis_values(domain: Subalgebra, values: Vec<C64>) -> Result<Self> {
        if values.len() != domain.dim() {
            return Err(Error::validation(format!(
                "expected {} functional values, got {}",
                domain.dim(),
                values.len()
            )));
        }
        Ok(Self { domain, values })
    }

    /// Evaluates a linear rule on the stored basis.
    pub fn from_fn(domain: Subalgebra, f: impl Fn(&ComplexMatrix) -> C64) -> Self {
        let values = domain.basis().iter().map(f).collect();
        Self { domain, values }
    }

    /// Builds the functional from values on arbitrary spanning elements,
    /// rejecting value sets that are not linear.
    pub fn from_pairs(
        domain: Subalgebra,
        pairs: &[(ComplexMatrix, C64)],
        tol: &Tolerances,
    ) -> Result<Self> {
        let inputs: Vec<ComplexMatrix> = pairs.iter().map(|(x, _)| x.clone()).collect();
        let coeff = basis_from_inputs(&domain, &inputs, tol)?;
        let values: Vec<C64> = (0..domain.dim())
            .map(|k| {
                pairs
                    .iter()
                    .enumerate()
                    .map(|(i, (_, v))| coeff[(k, i)] * v)
                    .sum()
            })
            .collect();
        let phi = Self { domain, values };
        let residual = pairs
            .iter()
            .map(|(x, v)| (phi.evaluate(x) - v).norm())
            .fold(0.0, f64::max);
        if residual > tol.residual_tol * phi.scale().max(1.0) {
            return Err(Error::validation(format!(
                "functional values are not linear on the span (residual {residual:.3e})"
            )));
        }
        Ok(phi)
    }

    pub fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn scale(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `φ(x)` for `x` in the domain (the orthogonal projection is used otherwise).
    pub fn evaluate(&self, x: &ComplexMatrix) -> C64 {
        self.domain
            .coordinates(x)
            .iter()
            .zip(&self.values)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Unitality and multiplicativity residuals over basis pairs.
    pub fn validate(&self, tol: &Tolerances) -> VerificationReport {
        let mut report = VerificationReport::new();
        let d = &self.domain;
        report.residual(
            "unit_residual",
            (self.evaluate(&d.identity()) - ONE).norm() + d.distance(&d.identity()),
            tol,
        );
        let mut mult: f64 = 0.0;
        let mut closure: f64 = 0.0;
        for (x, vx) in d.basis().iter().zip(&self.values) {
            for (y, vy) in d.basis().iter().zip(&self.values) {
                let p = x.matmul(y);
                let coords = d.coordinates(&p);
                let mut residual = p.clone();
                let mut value = ZERO;
                for ((c, b), v) in coords.iter().zip(d.basis()).zip(&self.values) {
                    residual.axpy(-c, b);
                    value += c * v;
                }
                closure = closure.max(d.weights().norm(&residual));
                mult = mult.max((value - vx * vy).norm());
            }
        }
        report.residual("product_closure_residual", closure, tol);
        report.residual("multiplicativity_residual", mult, tol);
        report
    }
}

/// A homomorphism `Φ: A → D` given by its values on A's stored basis.
#[derive(Clone, Debug)]
pub struct DCharacter {
    domain: Subalgebra,
    range: Subalgebra,
    values: Vec<ComplexMatrix>,
}

impl DCharacter {
    pub fn from_basis_values(
        domain: Subalgebra,
        range: Subalgebra,
        values: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if values.len() != domain.dim() {
            return Err(Error::validation(format!(
                "expected {} map values, got {}",
                domain.dim(),
                values.len()
            )));
        }
        if domain.space() != range.space() {
            return Err(Error::validation(
                "domain and range live in different ambient spaces",
            ));
        }
        for v in &values {
            domain.space().check_shape(v)?;
        }
        Ok(Self {
            domain,
            range,
            values,
        })
    }

    pub fn from_fn(
        domain: Subalgebra,
        range: Subalgebra,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        let values = domain.basis().iter().map(f).collect();
        Self::from_basis_values(domain, range, values)
    }

    /// Builds `Φ` from images of arbitrary spanning elements of the domain.
    pub fn from_pairs(
        domain: Subalgebra,
        range: Subalgebra,
        pairs: &[(ComplexMatrix, ComplexMatrix)],
        tol: &Tolerances,
    ) -> Result<Self> {
        let inputs: Vec<ComplexMatrix> = pairs.iter().map(|(x, _)| x.clone()).collect();
        let coeff = basis_from_inputs(&domain, &inputs, tol)?;
        let n = domain.space().total_dim();
        let values: Vec<ComplexMatrix> = (0..domain.dim())
            .map(|k| {
                let mut acc = ComplexMatrix::zeros(n, n);
                for (i, (_, img)) in pairs.iter().enumerate() {
                    acc.axpy(coeff[(k, i)], img);
                }
                acc
            })
            .collect();
        let phi = Self::from_basis_values(domain, range, values)?;
        let scale = pairs
            .iter()
            .map(|(_, v)| v.frobenius_norm())
            .fold(1.0, f64::max);
        let residual = pairs
            .iter()
            .map(|(x, v)| (&phi.evaluate(x) - v).frobenius_norm())
            .fold(0.0, f64::max);
        if residual > tol.residual_tol * scale {
            return Err(Error::validation(format!(
                "map values are not linear on the span (residual {residual:.3e})"
            )));
        }
        Ok(phi)
    }

    pub fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    pub fn range(&self) -> &Subalgebra {
        &self.range
    }

    pub fn values(&self) -> &[ComplexMatrix] {
        &self.values
    }

    pub fn evaluate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.domain.space().total_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (c, v) in self.domain.coordinates(x).iter().zip(&self.values) {
            out.axpy(*c, v);
        }
        out
    }
}

/// Minimal-norm `r` with `tr_w(x r) = φ(x)` on the basis of `A`.
pub fn riesz_representative(
    a: &Subalgebra,
    phi: &ScalarCharacter,
    w: &TraceWeights,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let wd = w.density();
    let constraints: Vec<(ComplexMatrix, C64)> = a
        .basis()
        .iter()
        .map(|x| (wd.matmul(x), phi.evaluate(x)))
        .collect();
    if constraints.is_empty() {
        return Err(Error::validation("functional domain is empty"));
    }
    least_norm_solve(&constraints, tol)
}

/// `J = ker φ`, spanned by `x − φ(x)·1` over the basis of `A`.
pub fn functional_kernel(
    a: &Subalgebra,
    phi: &ScalarCharacter,
    tol: &Tolerances,
) -> Result<Subalgebra> {
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
    for (i, x) in elems.iter().enumerate() {
        a.space()
            .check_element(x, tol.residual_tol)
            .map_err(|e| Error::validation(format!("kernel element {i}: {e}")))?;
    }
    // the stored basis of A has unit norm, which sets the drop threshold
    let basis = orthonormalize_against_scale(&elems, a.weights(), tol, 1.0);
    Subalgebra::from_span(
        a.space().clone(),
        a.weights().clone(),
        &basis,
        false,
        false,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BlockSpace;
    use crate::numerics::ZERO;

    fn e(i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(2, i, j)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn span(elems: &[ComplexMatrix]) -> Subalgebra {
        Subalgebra::with_unit_weights(BlockSpace::full(2), elems, true, false, &tol()).unwrap()
    }

    fn upper() -> Subalgebra {
        span(&[e(0, 0), e(1, 1), e(0, 1)])
    }

    fn entry11(a: Subalgebra) -> ScalarCharacter {
        ScalarCharacter::from_fn(a, |x| x[(0, 0)])
    }

    #[test]
    fn riesz_examples() {
        let w = TraceWeights::uniform(&BlockSpace::full(2));
        let scalars = span(&[ComplexMatrix::identity(2)]);
        let phi = ScalarCharacter::from_fn(scalars.clone(), |x| x[(0, 0)]);
        let r = riesz_representative(&scalars, &phi, &w, &tol()).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-14));

        let diag = span(&[e(0, 0), e(1, 1)]);
        let r = riesz_representative(&diag, &entry11(diag.clone()), &w, &tol()).unwrap();
        assert!(r.approx_eq(&e(0, 0), 1e-14));

        let ut = upper();
        let r = riesz_representative(&ut, &entry11(ut.clone()), &w, &tol()).unwrap();
        assert!(r.approx_eq(&e(0, 0), 1e-14));
    }

    #[test]
    fn riesz_weighted() {
        let s = BlockSpace::commutative(3);
        let w = TraceWeights::new(&s, vec![0.5, 2.0, 1.0]).unwrap();
        let a = Subalgebra::from_span(
            s.clone(),
            w.clone(),
            &[
                s.identity(),
                ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0]),
            ],
            true,
            true,
            &tol(),
        )
        .unwrap();
        let phi = ScalarCharacter::from_fn(a.clone(), |x| x[(1, 1)]);
        let r = riesz_representative(&a, &phi, &w, &tol()).unwrap();
        for b in a.basis() {
            assert!((w.trace_product(b, &r) - phi.evaluate(b)).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_examples() {
        let scalars = span(&[ComplexMatrix::identity(2)]);
        let j = functional_kernel(&scalars, &entry11(scalars.clone()), &tol()).unwrap();
        assert_eq!(j.dim(), 0);

        let diag = span(&[e(0, 0), e(1, 1)]);
        let j = functional_kernel(&diag, &entry11(diag.clone()), &tol()).unwrap();
        assert_eq!(j.dim(), 1);
        assert!(j.contains(&e(1, 1), &tol()));

        let ut = upper();
        let j = functional_kernel(&ut, &entry11(ut.clone()), &tol()).unwrap();
        assert_eq!(j.dim(), 2);
        assert!(j.contains(&e(1, 1), &tol()));
        assert!(j.contains(&e(0, 1), &tol()));
    }

    #[test]
    fn from_pairs_resolves_basis_values() {
        let ut = upper();
        let pairs = vec![
            (ComplexMatrix::identity(2), ONE),
            (e(1, 1), ZERO),
            (&e(0, 1) + &e(0, 0), ONE),
        ];
        let phi = ScalarCharacter::from_pairs(ut.clone(), &pairs, &tol()).unwrap();
        assert!((phi.evaluate(&e(0, 0)) - ONE).norm() < 1e-14);
        assert!(phi.evaluate(&e(0, 1)).norm() < 1e-14);
        assert!(phi.validate(&tol()).pass());

        let inconsistent = vec![
            (e(0, 0), ONE),
            (e(1, 1), ZERO),
            (e(0, 1), ZERO),
            (ComplexMatrix::identity(2), ZERO),
        ];
        let err = ScalarCharacter::from_pairs(ut.clone(), &inconsistent, &tol()).unwrap_err();
        assert!(err.to_string().contains("not linear"));

        let short = vec![(e(0, 0), ONE)];
        assert!(ScalarCharacter::from_pairs(ut, &short, &tol()).is_err());
    }

    #[test]
    fn character_validation_detects_non_multiplicative() {
        // x ↦ (x₁₁ + x₂₂)/2 is unital but not multiplicative on diagonals
        let diag = span(&[e(0, 0), e(1, 1)]);
        let phi = ScalarCharacter::from_fn(diag, |x| (x[(0, 0)] + x[(1, 1)]) * 0.5);
        let r = phi.validate(&tol());
        assert!(!r.pass());
        assert!(r.get("multiplicativity_residual").unwrap() > 0.1);
    }
}
