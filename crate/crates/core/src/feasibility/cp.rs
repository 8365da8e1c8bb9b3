use super::{Certificate, FeasibilityOutcome, Witness};
use crate::algebra::BlockSpace;
use crate::error::{Error, Result};
use crate::numerics::{eigh, psd_project, pseudo_inverse, ComplexMatrix, Tolerances, C64, ZERO};

fn matvec(m: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.rows())
        .map(|i| {
            m.data()[i * m.cols()..(i + 1) * m.cols()]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Layout of the per-block Choi matrices inside one flat vector.
struct ChoiLayout {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    target: usize,
    len: usize,
}

impl ChoiLayout {
    fn new(block_dims: &[usize], target: usize) -> Self {
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut len = 0;
        for &n in block_dims {
            offsets.push(len);
            len += (n * target) * (n * target);
        }
        Self {
            block_dims: block_dims.to_vec(),
            offsets,
            target,
            len,
        }
    }

    /// Flat index of entry `(i·d + p, j·d + q)` of the Choi matrix of block `b`.
    fn index(&self, b: usize, i: usize, j: usize, p: usize, q: usize) -> usize {
        let side = self.block_dims[b] * self.target;
        self.offsets[b] + (i * self.target + p) * side + (j * self.target + q)
    }

    fn blocks(&self, v: &[C64]) -> Vec<ComplexMatrix> {
        self.block_dims
            .iter()
            .zip(&self.offsets)
            .map(|(&n, &o)| {
                let side = n * self.target;
                ComplexMatrix::from_fn(side, side, |r, c| v[o + r * side + c])
            })
            .collect()
    }

    fn flatten(&self, blocks: &[ComplexMatrix]) -> Vec<C64> {
        blocks
            .iter()
            .flat_map(|b| b.data().iter().copied())
            .collect()
    }
}

/// Searches for a unital completely positive map `R: M → M_d` with
/// `R(x) = Φ(x)` on `A`, by Dykstra alternating projections between the
/// product of PSD cones (one Choi matrix per block of `M`) and the affine
/// set of unital extensions.
///
/// `pairs` lists `(x, Φ(x))` for elements spanning `A`. Constraints
/// `R(x*) = Φ(x)*` are imposed too, which keeps the affine set closed under
/// taking adjoints of Choi matrices. Pairs that are not consistent with a
/// linear map make the affine set empty.
pub fn cp_extension_feasibility(
    space: &BlockSpace,
    pairs: &[(ComplexMatrix, ComplexMatrix)],
    tol: &Tolerances,
    max_iter: usize,
) -> Result<FeasibilityOutcome> {
    tol.validate()?;
    let Some((_, first)) = pairs.first() else {
        return Err(Error::validation(
            "the map needs at least one (x, Φ(x)) pair",
        ));
    };
    let d = first.rows();
    for (x, v) in pairs {
        space.check_shape(x)?;
        Error::check_shape((d, d), v.shape())?;
    }
    let layout = ChoiLayout::new(space.block_dims(), d);

    // each constraint is R(x)_{pq} = value
    let mut constraints: Vec<(ComplexMatrix, usize, usize, C64)> = Vec::new();
    let one = space.identity();
    for p in 0..d {
        for q in 0..d {
            constraints.push((
                one.clone(),
                p,
                q,
                if p == q { C64::new(1.0, 0.0) } else { ZERO },
            ));
        }
    }
    for (x, v) in pairs {
        let xa = x.adjoint();
        for p in 0..d {
            for q in 0..d {
                constraints.push((x.clone(), p, q, v[(p, q)]));
                constraints.push((xa.clone(), p, q, v[(q, p)].conj()));
            }
        }
    }
    let rows = constraints.len();
    let mut k = ComplexMatrix::zeros(rows, layout.len);
    for (r, (x, p, q, _)) in constraints.iter().enumerate() {
        for (b, &n) in space.block_dims().iter().enumerate() {
            let o = space.offset(b);
            for i in 0..n {
                for j in 0..n {
                    let c = x[(o + i, o + j)];
                    if c != ZERO {
                        k[(r, layout.index(b, i, j, *p, *q))] += c;
                    }
                }
            }
        }
    }
    let target: Vec<C64> = constraints.iter().map(|c| c.3).collect();
    let k_pinv = pseudo_inverse(&k, tol.rank_tol);
    let target_scale = norm(&target).max(1.0);

    let affine_residual = |v: &[C64]| -> f64 {
        let kv = matvec(&k, v);
        norm(
            &kv.iter()
                .zip(&target)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    };
    let project_affine = |v: &[C64]| -> Vec<C64> {
        let kv = matvec(&k, v);
        let diff: Vec<C64> = kv.iter().zip(&target).map(|(a, b)| a - b).collect();
        let corr = matvec(&k_pinv, &diff);
        v.iter().zip(&corr).map(|(a, b)| a - b).collect()
    };
    let project_psd = |v: &[C64]| -> Vec<C64> {
        let blocks: Vec<ComplexMatrix> = layout.blocks(v).iter().map(psd_project).collect();
        layout.flatten(&blocks)
    };
    let min_eig = |v: &[C64]| -> f64 {
        layout
            .blocks(v)
            .iter()
            .map(|b| eigh(b).min_value())
            .fold(f64::INFINITY, f64::min)
    };

    let mut x = matvec(&k_pinv, &target);
    let residual = affine_residual(&x);
    if residual > tol.residual_tol * target_scale {
        return Ok(FeasibilityOutcome::Infeasible {
            certificate: Certificate::LinearResidual { residual },
        });
    }
    let feasible = |v: &[C64]| FeasibilityOutcome::Feasible {
        witness: Witness::Choi {
            blocks: layout.blocks(v),
        },
    };
    if min_eig(&x) >= -tol.psd_tol {
        return Ok(feasible(&x));
    }

    let mut p = vec![ZERO; layout.len];
    let mut gap = norm(
        &x.iter()
            .zip(&project_psd(&x))
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    for _ in 0..max_iter {
        let shifted: Vec<C64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = project_psd(&shifted);
        p = shifted.iter().zip(&y).map(|(a, b)| a - b).collect();
        x = project_affine(&y);
        gap = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if gap <= tol.residual_tol * target_scale {
            if affine_residual(&y) <= tol.residual_tol * target_scale {
                return Ok(feasible(&y));
            }
            if min_eig(&x) >= -tol.psd_tol {
                return Ok(feasible(&x));
            }
        }
    }
    Ok(FeasibilityOutcome::Undetermined {
        gap_evidence: gap,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Subalgebra;
    use crate::feasibility::{build_prop25_instance, Verdict};
    use crate::verify::choi_of_fn;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(2, i, j)
    }

    fn choi_blocks(out: &FeasibilityOutcome) -> &[ComplexMatrix] {
        match out {
            FeasibilityOutcome::Feasible {
                witness: Witness::Choi { blocks },
            } => blocks,
            other => panic!("expected a Choi witness, got {other:?}"),
        }
    }

    #[test]
    fn identity_on_full_algebra() {
        let a = Subalgebra::with_unit_weights(
            BlockSpace::full(2),
            &[e(0, 0), e(0, 1), e(1, 0), e(1, 1)],
            true,
            true,
            &tol(),
        )
        .unwrap();
        let pairs: Vec<_> = a.basis().iter().map(|x| (x.clone(), x.clone())).collect();
        let out = cp_extension_feasibility(a.space(), &pairs, &tol(), 5000).unwrap();
        let blocks = choi_blocks(&out);
        assert!(blocks[0].approx_eq(&choi_of_fn(2, |x| x.clone()), 1e-10));
    }

    #[test]
    fn corner_functional_on_diagonals() {
        let a = Subalgebra::with_unit_weights(
            BlockSpace::full(2),
            &[e(0, 0), e(1, 1)],
            true,
            true,
            &tol(),
        )
        .unwrap();
        let pairs: Vec<_> = a
            .basis()
            .iter()
            .map(|x| (x.clone(), ComplexMatrix::from_diag(&[x[(0, 0)]])))
            .collect();
        let out = cp_extension_feasibility(a.space(), &pairs, &tol(), 5000).unwrap();
        let blocks = choi_blocks(&out);
        let expected = choi_of_fn(2, |x| ComplexMatrix::from_diag(&[x[(0, 0)]]));
        assert!(blocks[0].approx_eq(&expected, 1e-10));
    }

    #[test]
    fn inconsistent_images_are_infeasible() {
        // R(1) must be 1, but Φ(1) = 2
        let pairs = vec![(
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(1).scale_real(2.0),
        )];
        let out = cp_extension_feasibility(&BlockSpace::full(2), &pairs, &tol(), 10).unwrap();
        assert!(matches!(
            out,
            FeasibilityOutcome::Infeasible {
                certificate: Certificate::LinearResidual { .. }
            }
        ));
    }

    #[test]
    fn prop25_probe_is_undetermined() {
        let inst = build_prop25_instance(&[0.0, 0.25, 0.5, 0.75], false).unwrap();
        let out =
            cp_extension_feasibility(&inst.space, &inst.target_pairs(), &tol(), 5000).unwrap();
        assert_eq!(out.verdict(), Verdict::Undetermined);
        if let FeasibilityOutcome::Undetermined { gap_evidence, .. } = out {
            assert!(gap_evidence > 1e-4, "gap {gap_evidence}");
        }
    }
}
