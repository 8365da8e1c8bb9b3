//! Numerical Artin-Wedderburn decomposition of a finite-dimensional
//! selfadjoint unital subalgebra `D ≅ ⊕ᵢ M_{mᵢ}`.
//!
//! Central projections come from the spectral decomposition of a random
//! selfadjoint central element; minimal projections inside each factor come
//! from a random selfadjoint element of the factor. Degenerate draws are
//! detected and retried with the next seed.

use serde::{Deserialize, Serialize};

use crate::algebra::Subalgebra;
use crate::error::{Error, Result};
use crate::numerics::{
    eigh, orthonormalize, polar_decompose, subspace_rank, ComplexMatrix, Tolerances, C64,
};
use crate::random::{gaussian, seeded_rng};
use crate::verify::VerificationReport;

/// Relative gap separating eigenvalue clusters.
pub const SPECTRAL_GAP: f64 = 1e-6;

/// Number of random draws before a degenerate spectrum is reported.
pub const MAX_ATTEMPTS: usize = 5;

/// Matrix units `e⁽ⁱ⁾_{jk}` for each simple factor of `D`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixUnitSystem {
    pub central_projections: Vec<ComplexMatrix>,
    pub factor_sizes: Vec<usize>,
    /// `units[i][j][k] = e⁽ⁱ⁾_{jk}`.
    pub units: Vec<Vec<Vec<ComplexMatrix>>>,
}

impl MatrixUnitSystem {
    pub fn num_factors(&self) -> usize {
        self.factor_sizes.len()
    }

    pub fn unit(&self, factor: usize, j: usize, k: usize) -> &ComplexMatrix {
        &self.units[factor][j][k]
    }

    pub fn all_units(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.units.iter().flatten().flatten()
    }

    /// Checks every relation of a matrix-unit system.
    pub fn validate(&self, tol: &Tolerances) -> VerificationReport {
        let mut report = VerificationReport::new();
        let mut product: f64 = 0.0;
        let mut adjoint: f64 = 0.0;
        let mut diag_sum: f64 = 0.0;
        let mut central: f64 = 0.0;
        let indexed: Vec<(usize, usize, usize, &ComplexMatrix)> = self
            .units
            .iter()
            .enumerate()
            .flat_map(|(i, rows)| {
                rows.iter().enumerate().flat_map(move |(j, row)| {
                    row.iter().enumerate().map(move |(k, e)| (i, j, k, e))
                })
            })
            .collect();
        for &(i, j, k, e) in &indexed {
            adjoint = adjoint.max((&e.adjoint() - &self.units[i][k][j]).frobenius_norm());
            for &(i2, l, m, f) in &indexed {
                let p = e.matmul(f);
                let r = if i == i2 && k == l {
                    (&p - &self.units[i][j][m]).frobenius_norm()
                } else {
                    p.frobenius_norm()
                };
                product = product.max(r);
            }
        }
        let n = self
            .central_projections
            .first()
            .map(|p| p.rows())
            .unwrap_or(0);
        let mut total = ComplexMatrix::zeros(n, n);
        for (i, p) in self.central_projections.iter().enumerate() {
            let mut s = ComplexMatrix::zeros(n, n);
            for j in 0..self.factor_sizes[i] {
                s += &self.units[i][j][j];
            }
            diag_sum = diag_sum.max((&s - p).frobenius_norm());
            central = central.max((&p.matmul(p) - p).frobenius_norm());
            central = central.max(p.hermitian_residual());
            total += p;
        }
        report.residual("unit_product_residual", product, tol);
        report.residual("unit_adjoint_residual", adjoint, tol);
        report.residual("diagonal_sum_residual", diag_sum, tol);
        report.residual("central_projection_residual", central, tol);
        if n > 0 {
            report.residual(
                "partition_of_unity_residual",
                (&total - &ComplexMatrix::identity(n)).frobenius_norm(),
                tol,
            );
        }
        report
    }
}

fn selfadjoint_parts(elems: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(2 * elems.len());
    for z in elems {
        out.push(z.hermitian_part());
        // (z − z*)/(2i) is the imaginary part
        out.push(z.scale(C64::new(0.0, -1.0)).hermitian_part());
    }
    out
}

fn random_combination(elems: &[ComplexMatrix], seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let (r, c) = elems[0].shape();
    let mut out = ComplexMatrix::zeros(r, c);
    for e in elems {
        out.axpy(C64::new(gaussian(&mut rng), 0.0), e);
    }
    out
}

/// Groups eigenpairs (ascending values) into clusters separated by more
/// than `SPECTRAL_GAP` times the spectral radius.
fn spectral_projections(h: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let eig = eigh(h);
    let n = eig.values.len();
    let scale = eig
        .values
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(c) if eig.values[k] - eig.values[*c.last().unwrap()] <= SPECTRAL_GAP * scale => {
                c.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }
    clusters
        .iter()
        .map(|c| {
            let mut p = ComplexMatrix::zeros(n, n);
            for &k in c {
                for i in 0..n {
                    let vik = eig.vectors[(i, k)];
                    for j in 0..n {
                        p[(i, j)] += vik * eig.vectors[(j, k)].conj();
                    }
                }
            }
            p
        })
        .collect()
}

fn require_selfadjoint_unital(d: &Subalgebra, tol: &Tolerances) -> Result<()> {
    if !d.is_selfadjoint() {
        return Err(Error::validation(
            "Wedderburn decomposition needs a selfadjoint algebra (selfadjoint flag is off)",
        ));
    }
    let report = crate::algebra::validate_subalgebra(d, tol);
    if !report.pass() {
        let failed: Vec<String> = report
            .failures()
            .map(|c| format!("{} {:.3e}", c.name, c.value))
            .collect();
        return Err(Error::validation(format!(
            "algebra failed validation: {}",
            failed.join(", ")
        )));
    }
    if !d.is_unital() {
        return Err(Error::validation(
            "Wedderburn decomposition needs a unital algebra",
        ));
    }
    Ok(())
}

/// Basis of the center `{z ∈ D : zx = xz for all x ∈ D}`, from the null
/// space of the commutator map on D's coordinates.
pub fn center_basis(d: &Subalgebra, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    require_selfadjoint_unital(d, tol)?;
    let basis = d.basis();
    let dim = basis.len();
    // commutators[k][j] = [b_k, b_j]
    let commutators: Vec<Vec<ComplexMatrix>> = basis
        .iter()
        .map(|bk| {
            basis
                .iter()
                .map(|bj| &bk.matmul(bj) - &bj.matmul(bk))
                .collect()
        })
        .collect();
    // Gram matrix of the commutator map: G_kl = Σ_j ⟨[b_l, b_j], [b_k, b_j]⟩.
    let gram = ComplexMatrix::from_fn(dim, dim, |k, l| {
        (0..dim)
            .map(|j| ComplexMatrix::frobenius_inner(&commutators[l][j], &commutators[k][j]))
            .sum()
    });
    let eig = eigh(&gram);
    // eigenvalues of the Gram matrix are squared singular values, so the
    // cutoff is applied to them directly. The floor ‖b‖⁴ keeps a commutative
    // D (all commutators rounding noise) from having its noise taken as scale.
    let b_scale = basis.iter().map(|b| b.frobenius_norm()).fold(0.0, f64::max);
    let cutoff = tol.rank_tol * eig.max_value().max(b_scale.powi(4));
    let mut center: Vec<ComplexMatrix> = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam > cutoff && lam > 0.0 {
            continue;
        }
        let n = d.space().total_dim();
        let mut z = ComplexMatrix::zeros(n, n);
        // coordinates c solve G c = 0 with z = Σ c_l b_l
        for (l, b) in basis.iter().enumerate() {
            z.axpy(eig.vectors[(l, idx)], b);
        }
        center.push(z);
    }
    Ok(orthonormalize(&center, d.weights(), tol))
}

/// Orthogonal central projections summing to `1`, each minimal in the center.
pub fn minimal_central_projections(
    d: &Subalgebra,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<ComplexMatrix>> {
    let center = center_basis(d, tol)?;
    let parts = selfadjoint_parts(&center);
    for attempt in 0..MAX_ATTEMPTS {
        let c = random_combination(&parts, seed.wrapping_add(attempt as u64));
        let projections = spectral_projections(&c);
        let minimal = projections.iter().all(|p| {
            let compressed: Vec<ComplexMatrix> = center.iter().map(|z| p.matmul(z)).collect();
            subspace_rank(&compressed, tol.rank_tol.sqrt()) == 1
        });
        if minimal && projections.len() <= center.len() {
            return Ok(projections);
        }
    }
    Err(Error::SpectralCollision {
        attempts: MAX_ATTEMPTS,
    })
}

/// Orthonormal basis (as columns) of the range of a projection.
pub(crate) fn range_basis(p: &ComplexMatrix) -> ComplexMatrix {
    let eig = eigh(p);
    let cols: Vec<Vec<C64>> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > 0.5)
        .map(|k| eig.vectors.column(k))
        .collect();
    ComplexMatrix::from_columns(p.rows(), &cols)
}

fn factor_units(
    d: &Subalgebra,
    p: &ComplexMatrix,
    factor: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    let compressed: Vec<ComplexMatrix> = d.basis().iter().map(|b| p.matmul(b).matmul(p)).collect();
    let factor_basis = orthonormalize(&compressed, d.weights(), tol);
    let dim = factor_basis.len();
    let m = (dim as f64).sqrt().round() as usize;
    if m * m != dim || m == 0 {
        return Err(Error::Structure(format!(
            "factor {factor} has dimension {dim}, which is not a perfect square"
        )));
    }
    let q = range_basis(p);
    let parts = selfadjoint_parts(&factor_basis);
    let mut diagonal: Option<Vec<ComplexMatrix>> = None;
    for attempt in 0..MAX_ATTEMPTS {
        let s = random_combination(&parts, seed.wrapping_add(attempt as u64));
        let local = q.adjoint().matmul(&s).matmul(&q);
        let projs: Vec<ComplexMatrix> = spectral_projections(&local)
            .iter()
            .map(|e| q.matmul(e).matmul(&q.adjoint()))
            .collect();
        if projs.len() != m {
            continue;
        }
        let minimal = projs.iter().all(|e| {
            let corner: Vec<ComplexMatrix> =
                factor_basis.iter().map(|b| e.matmul(b).matmul(e)).collect();
            subspace_rank(&corner, tol.rank_tol.sqrt()) == 1
        });
        if minimal {
            diagonal = Some(projs);
            break;
        }
    }
    let Some(diagonal) = diagonal else {
        return Err(Error::Structure(format!(
            "no minimal projection found in factor {factor} after {MAX_ATTEMPTS} attempts"
        )));
    };
    let e11 = &diagonal[0];
    let mut column: Vec<ComplexMatrix> = vec![e11.clone()];
    for ejj in diagonal.iter().skip(1) {
        let x = factor_basis
            .iter()
            .map(|b| ejj.matmul(b).matmul(e11))
            .max_by(|a, b| a.frobenius_norm().total_cmp(&b.frobenius_norm()))
            .expect("factor basis is nonempty");
        // x*x is a multiple of e11, so the polar part is a partial isometry
        // from range(e11) onto range(ejj)
        let polar = polar_decompose(&x, tol)?;
        column.push(polar.u);
    }
    let row: Vec<ComplexMatrix> = column.iter().map(|e| e.adjoint()).collect();
    let units = (0..m)
        .map(|j| (0..m).map(|k| column[j].matmul(&row[k])).collect())
        .collect();
    Ok(units)
}

/// Full matrix-unit system of `D`.
pub fn matrix_units(d: &Subalgebra, tol: &Tolerances, seed: u64) -> Result<MatrixUnitSystem> {
    let projections = minimal_central_projections(d, tol, seed)?;
    let mut units = Vec::with_capacity(projections.len());
    let mut sizes = Vec::with_capacity(projections.len());
    for (i, p) in projections.iter().enumerate() {
        let u = factor_units(d, p, i, tol, seed.wrapping_add(1000 + 17 * i as u64))?;
        sizes.push(u.len());
        units.push(u);
    }
    let total: usize = sizes.iter().map(|m| m * m).sum();
    if total != d.dim() {
        return Err(Error::Structure(format!(
            "sum of squared factor sizes {total} differs from dim D = {}",
            d.dim()
        )));
    }
    let system = MatrixUnitSystem {
        central_projections: projections,
        factor_sizes: sizes,
        units,
    };
    let all: Vec<ComplexMatrix> = system.all_units().cloned().collect();
    let spread = all
        .iter()
        .map(|e| d.membership_residual(e))
        .fold(0.0, f64::max);
    if spread > tol.residual_tol || subspace_rank(&all, tol.rank_tol.sqrt()) != d.dim() {
        return Err(Error::Structure(format!(
            "matrix units do not span D (membership residual {spread:.3e})"
        )));
    }
    Ok(system)
}

/// Symmetrized largest distance from a basis element of one algebra to the
/// other. Zero when the spans agree.
pub fn subspace_distance(a: &Subalgebra, b: &Subalgebra) -> f64 {
    let ab = a.basis().iter().map(|x| b.distance(x)).fold(0.0, f64::max);
    let ba = b.basis().iter().map(|x| a.distance(x)).fold(0.0, f64::max);
    ab.max(ba)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{BlockSpace, Subalgebra};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn algebra(n: usize, elems: &[ComplexMatrix]) -> Subalgebra {
        Subalgebra::with_unit_weights(BlockSpace::full(n), elems, true, true, &tol()).unwrap()
    }

    fn full(n: usize) -> Subalgebra {
        let elems: Vec<ComplexMatrix> = (0..n)
            .flat_map(|i| (0..n).map(move |j| ComplexMatrix::unit(n, i, j)))
            .collect();
        algebra(n, &elems)
    }

    fn diagonals(n: usize) -> Subalgebra {
        let elems: Vec<ComplexMatrix> = (0..n).map(|i| ComplexMatrix::unit(n, i, i)).collect();
        algebra(n, &elems)
    }

    /// `M₂ ⊕ ℂ` inside `M₃`.
    fn m2_plus_c() -> Subalgebra {
        let mut elems: Vec<ComplexMatrix> = (0..2)
            .flat_map(|i| (0..2).map(move |j| ComplexMatrix::unit(3, i, j)))
            .collect();
        elems.push(ComplexMatrix::unit(3, 2, 2));
        algebra(3, &elems)
    }

    fn contains_projection(list: &[ComplexMatrix], p: &ComplexMatrix) -> bool {
        list.iter().any(|q| q.approx_eq(p, 1e-10))
    }

    #[test]
    fn center_examples() {
        let z = center_basis(&full(2), &tol()).unwrap();
        assert_eq!(z.len(), 1);
        let d = diagonals(2);
        assert_eq!(center_basis(&d, &tol()).unwrap().len(), 2);
        let d = m2_plus_c();
        let z = center_basis(&d, &tol()).unwrap();
        assert_eq!(z.len(), 2);
        let sub = algebra(3, &z);
        assert!(sub.contains(&ComplexMatrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol()));
        assert!(sub.contains(&ComplexMatrix::unit(3, 2, 2), &tol()));
    }

    #[test]
    fn central_projection_examples() {
        let p = minimal_central_projections(&full(2), &tol(), 0).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].approx_eq(&ComplexMatrix::identity(2), 1e-10));

        let p = minimal_central_projections(&diagonals(2), &tol(), 0).unwrap();
        assert_eq!(p.len(), 2);
        assert!(contains_projection(&p, &ComplexMatrix::unit(2, 0, 0)));
        assert!(contains_projection(&p, &ComplexMatrix::unit(2, 1, 1)));

        let p = minimal_central_projections(&m2_plus_c(), &tol(), 0).unwrap();
        assert_eq!(p.len(), 2);
        assert!(contains_projection(
            &p,
            &ComplexMatrix::from_real_diag(&[1.0, 1.0, 0.0])
        ));
        assert!(contains_projection(&p, &ComplexMatrix::unit(3, 2, 2)));
    }

    #[test]
    fn units_of_diagonals() {
        let mu = matrix_units(&diagonals(2), &tol(), 0).unwrap();
        assert_eq!(mu.factor_sizes, vec![1, 1]);
        let units: Vec<ComplexMatrix> = mu.all_units().cloned().collect();
        assert!(contains_projection(&units, &ComplexMatrix::unit(2, 0, 0)));
        assert!(contains_projection(&units, &ComplexMatrix::unit(2, 1, 1)));
        assert!(mu.validate(&tol()).pass());
    }

    #[test]
    fn units_of_full_m2() {
        let mu = matrix_units(&full(2), &tol(), 3).unwrap();
        assert_eq!(mu.factor_sizes, vec![2]);
        let report = mu.validate(&tol());
        assert!(report.pass(), "{report}");
        // e11 is a rank-one projection and e12 maps range(e22) onto range(e11)
        let e11 = mu.unit(0, 0, 0);
        assert!((e11.trace().re - 1.0).abs() < 1e-12);
        let e12 = mu.unit(0, 0, 1);
        assert!(e12.matmul(mu.unit(0, 1, 0)).approx_eq(e11, 1e-12));
    }

    #[test]
    fn block_structure_survives_conjugation() {
        let mut rng = crate::random::seeded_rng(11);
        let u = crate::random::random_unitary(3, &mut rng);
        let d = m2_plus_c().conjugated(&u, &tol()).unwrap();
        let mu = matrix_units(&d, &tol(), 5).unwrap();
        let mut sizes = mu.factor_sizes.clone();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        assert!(mu.validate(&tol()).pass());
    }

    #[test]
    fn rejects_non_selfadjoint() {
        let ut = Subalgebra::with_unit_weights(
            BlockSpace::full(2),
            &[
                ComplexMatrix::unit(2, 0, 0),
                ComplexMatrix::unit(2, 1, 1),
                ComplexMatrix::unit(2, 0, 1),
            ],
            true,
            false,
            &tol(),
        )
        .unwrap();
        assert!(matches!(
            center_basis(&ut, &tol()),
            Err(Error::Validation(_))
        ));
    }
}
