//! Jacobi-based Hermitian eigensolver, one-sided Jacobi SVD and the
//! factorizations built on them.

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `H = U diag(values) U*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `U f(Λ) U*`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let uik = u[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += uik * u[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }
}

/// Thin singular value decomposition `A = U diag(σ) V*`, σ descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Numerical rank with cutoff relative to the largest singular value.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let cutoff = rank_tol * self.max_singular_value();
        self.singular_values
            .iter()
            .filter(|&&s| s > cutoff && s > 0.0)
            .count()
    }
}

/// Rotation `G` with `G* [[app, apq], [conj(apq), aqq]] G` diagonal.
///
/// Returned as `(c, s, phase)` where `G = [[c, s], [-s·conj(phase), c·conj(phase)]]`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64) {
    let abs = apq.norm();
    let phase = apq / abs;
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
        sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c, phase)
}

/// Right-multiplies columns `p, q` of `m` by the rotation.
fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let pc = phase.conj();
    for k in 0..m.rows() {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * c - mq * (pc * s);
        m[(k, q)] = mp * s + mq * (pc * c);
    }
}

/// Left-multiplies rows `p, q` of `m` by the adjoint rotation.
fn rotate_rows(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    for k in 0..m.cols() {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = mp * c - mq * (phase * s);
        m[(q, k)] = mp * s + mq * (phase * c);
    }
}

/// Cyclic Jacobi on the Hermitian part of `h`. No precondition checks.
pub fn eigh(h: &ComplexMatrix) -> HermitianEig {
    assert!(h.is_square(), "eigh needs a square matrix");
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-16 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let (c, s, phase) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                    rotate_columns(&mut a, p, q, c, s, phase);
                    rotate_rows(&mut a, p, q, c, s, phase);
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                    rotate_columns(&mut v, p, q, c, s, phase);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEig { values, vectors }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Rejects inputs whose anti-Hermitian part exceeds
/// `residual_tol · ‖H‖_F`.
pub fn hermitian_eig(h: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    if !h.is_square() {
        return Err(Error::validation(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let residual = h.hermitian_residual();
    let allowed = tol.residual_tol * h.frobenius_norm();
    if residual > allowed {
        return Err(Error::NotHermitian { residual, allowed });
    }
    Ok(eigh(h))
}

fn svd_tall(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut u = a.clone();
    let mut v = ComplexMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for k in 0..m {
                    let up = u[(k, p)];
                    let uq = u[(k, q)];
                    alpha += up.norm_sqr();
                    beta += uq.norm_sqr();
                    gamma += up.conj() * uq;
                }
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() <= 1e-300 {
                    continue;
                }
                rotated = true;
                let (c, s, phase) = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut u, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    for (j, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            for i in 0..m {
                u[(i, j)] /= s;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let u = ComplexMatrix::from_fn(m, n, |i, k| u[(i, order[k])]);
    let v = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    sigma = order.iter().map(|&i| sigma[i]).collect();
    Svd {
        u,
        singular_values: sigma,
        v,
    }
}

/// Thin SVD via one-sided Jacobi; `k = min(rows, cols)` singular triplets.
pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.adjoint());
        Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        }
    }
}

/// Polar factors `R = u·p` with `p = (R*R)^{1/2}`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub u: ComplexMatrix,
    pub p: ComplexMatrix,
}

/// Polar decomposition of a square matrix. Rank-deficient inputs give a
/// partial isometry `u` supported on `range(p)`.
pub fn polar_decompose(r: &ComplexMatrix, tol: &Tolerances) -> Result<Polar> {
    if !r.is_square() {
        return Err(Error::validation(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            r.rows(),
            r.cols()
        )));
    }
    let n = r.rows();
    let d = svd(r);
    let cutoff = tol.rank_tol * d.max_singular_value();
    let mut u = ComplexMatrix::zeros(n, n);
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &sigma) in d.singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        for i in 0..n {
            let uik = d.u[(i, k)];
            let vik = d.v[(i, k)];
            for j in 0..n {
                let vjk = d.v[(j, k)].conj();
                u[(i, j)] += uik * vjk;
                p[(i, j)] += vik * vjk * sigma;
            }
        }
    }
    Ok(Polar { u, p })
}

/// Nearest PSD matrix in Frobenius norm to the Hermitian part of `h`.
pub fn psd_project(h: &ComplexMatrix) -> ComplexMatrix {
    eigh(h).map_values(|x| x.max(0.0))
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pseudo_inverse(a: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let d = svd(a);
    let cutoff = rank_tol * d.max_singular_value();
    let (m, n) = a.shape();
    let mut out = ComplexMatrix::zeros(n, m);
    for (k, &sigma) in d.singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = d.v[(i, k)] / sigma;
            for j in 0..m {
                out[(i, j)] += vik * d.u[(j, k)].conj();
            }
        }
    }
    out
}

/// Orthonormal basis (as columns) of the null space of a matrix with
/// at least as many rows as columns.
pub fn null_space(a: &ComplexMatrix, rank_tol: f64) -> Vec<Vec<C64>> {
    let n = a.cols();
    let padded;
    let target = if a.rows() < n {
        padded = {
            let mut p = ComplexMatrix::zeros(n, n);
            p.set_submatrix(0, 0, a);
            p
        };
        &padded
    } else {
        a
    };
    let d = svd(target);
    let cutoff = rank_tol * d.max_singular_value();
    d.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff || s == 0.0)
        .map(|(k, _)| d.v.column(k))
        .collect()
}
