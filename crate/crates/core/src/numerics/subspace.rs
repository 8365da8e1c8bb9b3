//! Subspaces of matrix space under a Hilbert-Schmidt style pairing.

use super::decomp::svd;
use super::matrix::{ComplexMatrix, C64};
use super::Tolerances;
use crate::error::{Error, Result};

/// A positive-definite sesquilinear pairing on matrices, linear in the
/// first argument.
pub trait Pairing {
    fn inner(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> C64;

    fn norm(&self, x: &ComplexMatrix) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }
}

/// The unweighted pairing `tr(y* x)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Frobenius;

impl Pairing for Frobenius {
    fn inner(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
        ComplexMatrix::frobenius_inner(x, y)
    }
}

/// Gram-Schmidt with one reorthogonalization pass.
///
/// A vector is dropped when its residual norm is at most `rank_tol` times
/// the largest input norm.
pub fn orthonormalize<P: Pairing + ?Sized>(
    vectors: &[ComplexMatrix],
    pairing: &P,
    tol: &Tolerances,
) -> Vec<ComplexMatrix> {
    orthonormalize_against_scale(vectors, pairing, tol, 0.0)
}

/// As [`orthonormalize`], with the drop threshold measured against
/// `max(reference_scale, largest input norm)`.
pub fn orthonormalize_against_scale<P: Pairing + ?Sized>(
    vectors: &[ComplexMatrix],
    pairing: &P,
    tol: &Tolerances,
    reference_scale: f64,
) -> Vec<ComplexMatrix> {
    let scale = vectors
        .iter()
        .map(|v| pairing.norm(v))
        .fold(reference_scale, f64::max);
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = pairing.inner(&w, b);
                w.axpy(-c, b);
            }
        }
        let n = pairing.norm(&w);
        if n > tol.rank_tol * scale {
            basis.push(w.scale_real(1.0 / n));
        }
    }
    basis
}

/// Orthogonal projection `Σ ⟨v, bᵢ⟩ bᵢ` onto the span of an orthonormal basis.
pub fn project_onto_span<P: Pairing + ?Sized>(
    v: &ComplexMatrix,
    basis: &[ComplexMatrix],
    pairing: &P,
) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(v.rows(), v.cols());
    for b in basis {
        Error::check_shape(v.shape(), b.shape())?;
        out.axpy(pairing.inner(v, b), b);
    }
    Ok(out)
}

/// Dimension of the span of `vectors` (Frobenius geometry).
pub fn subspace_rank(vectors: &[ComplexMatrix], rank_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let len = vectors[0].data().len();
    let stacked = ComplexMatrix::from_fn(len, vectors.len(), |i, j| vectors[j].data()[i]);
    svd(&stacked).rank(rank_tol)
}

/// Minimal Frobenius-norm `r` with `tr(xᵢ r) = targetᵢ` for every constraint.
///
/// The solution lies in the span of the `xᵢ*`. A least-squares residual
/// above `residual_tol · max(1, ‖target‖)` is reported as an inconsistent
/// system.
pub fn least_norm_solve(
    constraints: &[(ComplexMatrix, C64)],
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let Some((first, _)) = constraints.first() else {
        return Err(Error::validation(
            "least_norm_solve needs at least one constraint",
        ));
    };
    let (xr, xc) = first.shape();
    for (x, _) in constraints {
        Error::check_shape((xr, xc), x.shape())?;
    }
    // r is xc × xr; tr(x r) = Σ_{j,k} x_jk r_kj, with r flattened row-major.
    let m = constraints.len();
    let n = xr * xc;
    let k_mat = ComplexMatrix::from_fn(m, n, |i, idx| {
        let (k, j) = (idx / xr, idx % xr);
        constraints[i].0[(j, k)]
    });
    let targets: Vec<C64> = constraints.iter().map(|(_, t)| *t).collect();
    let d = svd(&k_mat);
    let cutoff = tol.rank_tol * d.max_singular_value();
    let mut sol = vec![C64::new(0.0, 0.0); n];
    for (s_idx, &sigma) in d.singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        let coeff: C64 = (0..m)
            .map(|i| d.u[(i, s_idx)].conj() * targets[i])
            .sum::<C64>()
            / sigma;
        for (idx, s) in sol.iter_mut().enumerate() {
            *s += d.v[(idx, s_idx)] * coeff;
        }
    }
    let r = ComplexMatrix::from_fn(xc, xr, |k, j| sol[k * xr + j]);
    let residual = constraints
        .iter()
        .map(|(x, t)| (x.trace_product(&r) - t).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let target_norm = targets.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    if residual > tol.residual_tol * target_norm.max(1.0) {
        return Err(Error::InfeasibleLinearSystem { residual });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{ONE, ZERO};

    fn e(i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(2, i, j)
    }

    #[test]
    fn orthonormalize_examples() {
        let tol = Tolerances::default();
        let b = orthonormalize(&[e(0, 0), e(0, 0)], &Frobenius, &tol);
        assert_eq!(b.len(), 1);
        assert!(b[0].approx_eq(&e(0, 0), 1e-15));

        let b = orthonormalize(&[e(0, 0), e(0, 1)], &Frobenius, &tol);
        assert_eq!(b.len(), 2);
        assert!(b[1].approx_eq(&e(0, 1), 1e-15));

        // Gram-Schmidt by hand: I/√2, then E11 - (1/2) I normalized.
        let b = orthonormalize(&[ComplexMatrix::identity(2), e(0, 0)], &Frobenius, &tol);
        let r = 0.5f64.sqrt();
        assert!(b[0].approx_eq(&ComplexMatrix::identity(2).scale_real(r), 1e-15));
        assert!(b[1].approx_eq(&(&e(0, 0) - &e(1, 1)).scale_real(r), 1e-15));

        assert!(orthonormalize(&[], &Frobenius, &tol).is_empty());
    }

    #[test]
    fn projection_examples() {
        let basis = vec![e(0, 0)];
        let p = project_onto_span(&e(0, 1), &basis, &Frobenius).unwrap();
        assert_eq!(p.frobenius_norm(), 0.0);
        let p = project_onto_span(&e(0, 0), &basis, &Frobenius).unwrap();
        assert!(p.approx_eq(&e(0, 0), 0.0));
        let p = project_onto_span(&ComplexMatrix::identity(2), &basis, &Frobenius).unwrap();
        assert!(p.approx_eq(&e(0, 0), 0.0));
        let wrong = ComplexMatrix::identity(3);
        assert!(matches!(
            project_onto_span(&wrong, &basis, &Frobenius),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn least_norm_examples() {
        let tol = Tolerances::default();
        let r = least_norm_solve(&[(ComplexMatrix::identity(2), ONE)], &tol).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));

        let r = least_norm_solve(&[(e(0, 0), ONE), (e(1, 1), ZERO)], &tol).unwrap();
        assert!(r.approx_eq(&e(0, 0), 1e-15));

        let err = least_norm_solve(&[(e(0, 0), ONE), (e(0, 0), ZERO)], &tol).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLinearSystem { .. }));
    }

    #[test]
    fn least_norm_rectangular_orientation() {
        // x is 1x2, so r is 2x1 and tr(x r) = x00 r00 + x01 r10.
        let x = ComplexMatrix::from_real(1, 2, &[0.0, 2.0]);
        let r = least_norm_solve(&[(x, ONE)], &Tolerances::default()).unwrap();
        assert_eq!(r.shape(), (2, 1));
        assert!((r[(1, 0)] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(r[(0, 0)].norm() < 1e-15);
    }
}
