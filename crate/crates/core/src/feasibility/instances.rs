use serde::{Deserialize, Serialize};

use super::lp::{lp_feasibility, LPInstance};
use super::FeasibilityOutcome;
use crate::algebra::{BlockSpace, DCharacter, ScalarCharacter, Subalgebra, TraceWeights};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Tolerances, C64, ONE};

fn check_points(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::validation("at least one point is required"));
    }
    for (i, &t) in points.iter().enumerate() {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::validation(format!(
                "point {i} = {t} is outside [0, 1]"
            )));
        }
        if points[..i].contains(&t) {
            return Err(Error::validation(format!("duplicate point {t}")));
        }
    }
    Ok(())
}

/// Affine functions on finitely many atoms of `[0, 1]` and the state of
/// evaluation at `1`.
#[derive(Clone, Debug)]
pub struct Example1Instance {
    pub points: Vec<f64>,
    pub space: BlockSpace,
    pub weights: TraceWeights,
    /// `span{1, t}`; an operator system, not an algebra.
    pub system: Subalgebra,
    /// `α + βt ↦ α + β`. `None` when a single atom below `1` makes `t` a
    /// multiple of `1` with a conflicting value.
    pub functional: Option<ScalarCharacter>,
    /// `Σ wᵢ gᵢ s(tᵢ) = φ(s)` for `s ∈ {1, t}`, `g ≥ 0`.
    pub lp: LPInstance,
}

pub fn build_example1_instance(points: &[f64], weights: &[f64]) -> Result<Example1Instance> {
    check_points(points)?;
    let n = points.len();
    if weights.len() != n {
        return Err(Error::validation(format!(
            "{n} points but {} weights",
            weights.len()
        )));
    }
    let space = BlockSpace::commutative(n);
    let w = TraceWeights::new(&space, weights.to_vec())?;
    let tol = Tolerances::default();
    let one = ComplexMatrix::identity(n);
    let t = ComplexMatrix::from_real_diag(points);
    let system = Subalgebra::from_span(
        space.clone(),
        w.clone(),
        &[one.clone(), t.clone()],
        true,
        true,
        &tol,
    )?;
    let functional =
        ScalarCharacter::from_pairs(system.clone(), &[(one, ONE), (t, ONE)], &tol).ok();
    let lp = LPInstance::new(
        vec![
            weights.to_vec(),
            weights.iter().zip(points).map(|(w, t)| w * t).collect(),
        ],
        vec![1.0, 1.0],
    )?;
    Ok(Example1Instance {
        points: points.to_vec(),
        space,
        weights: w,
        system,
        functional,
        lp,
    })
}

/// Upper-triangular 2×2 functions on atoms: constant diagonal, affine
/// corner `γ + δt`. `Φ` evaluates the corner at `t = 1` and re-embeds it
/// multiplied by `t`, so its range `D` is not selfadjoint.
#[derive(Clone, Debug)]
pub struct Prop25Instance {
    pub points: Vec<f64>,
    pub three_dim: bool,
    pub space: BlockSpace,
    pub a: Subalgebra,
    pub d: Subalgebra,
    pub phi: DCharacter,
}

/// `Σᵢ f(tᵢ)·x` placed in every 2×2 block.
fn constant_blocks(points: &[f64], x: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = points.len();
    let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
    for (i, &t) in points.iter().enumerate() {
        out.set_submatrix(2 * i, 2 * i, &x.scale_real(f(t)));
    }
    out
}

pub fn build_prop25_instance(points: &[f64], three_dim: bool) -> Result<Prop25Instance> {
    check_points(points)?;
    if points.len() == 1 && points[0] != 1.0 {
        return Err(Error::validation(
            "a single atom must be the point 1; otherwise t is a multiple of 1 and Φ is not linear",
        ));
    }
    let n = points.len();
    let tol = Tolerances::default();
    let space = BlockSpace::new(vec![2; n])?;
    let w = TraceWeights::new(&space, vec![1.0 / n as f64; n])?;
    let e = |i, j| ComplexMatrix::unit(2, i, j);
    let e11 = constant_blocks(points, &e(0, 0), |_| 1.0);
    let e22 = constant_blocks(points, &e(1, 1), |_| 1.0);
    let one = &e11 + &e22;
    let e12 = constant_blocks(points, &e(0, 1), |_| 1.0);
    let e12t = constant_blocks(points, &e(0, 1), |t| t);

    let (a_elems, d_elems): (Vec<ComplexMatrix>, Vec<ComplexMatrix>) = if three_dim {
        (
            vec![one.clone(), e12.clone(), e12t.clone()],
            vec![one.clone(), e12t.clone()],
        )
    } else {
        (
            vec![e11.clone(), e22.clone(), e12.clone(), e12t.clone()],
            vec![e11.clone(), e22.clone(), e12t.clone()],
        )
    };
    let a = Subalgebra::from_span(space.clone(), w.clone(), &a_elems, true, false, &tol)?;
    let d = Subalgebra::from_span(space.clone(), w, &d_elems, true, false, &tol)?;
    // γ + δt ↦ (γ + δ)·t in the corner; the diagonal is untouched
    let mut pairs = vec![(e12.clone(), e12t.clone()), (e12t.clone(), e12t.clone())];
    if three_dim {
        pairs.push((one.clone(), one));
    } else {
        pairs.push((e11.clone(), e11));
        pairs.push((e22.clone(), e22));
    }
    let phi = DCharacter::from_pairs(a.clone(), d.clone(), &pairs, &tol)?;
    Ok(Prop25Instance {
        points: points.to_vec(),
        three_dim,
        space,
        a,
        d,
        phi,
    })
}

impl Prop25Instance {
    /// Atom with the largest point, used to read `D` as upper-triangular `M₂`.
    fn reference_atom(&self) -> usize {
        self.points
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("points are nonempty")
    }

    /// Identifies `D` with upper-triangular `M₂`:
    /// `αE₁₁ + βE₂₂ + c·E₁₂⊗t ↦ [[α, c], [0, β]]`.
    pub fn d_to_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let i = self.reference_atom();
        let t = self.points[i];
        let mut block = x.submatrix(2 * i, 2 * i, 2, 2);
        block[(0, 1)] /= C64::new(t, 0.0);
        block
    }

    /// `(x, Φ(x))` over the stored basis of `A`, with `Φ(x)` read in `M₂`
    /// through [`Self::d_to_matrix`].
    pub fn target_pairs(&self) -> Vec<(ComplexMatrix, ComplexMatrix)> {
        self.a
            .basis()
            .iter()
            .map(|x| (x.clone(), self.d_to_matrix(&self.phi.evaluate(x))))
            .collect()
    }
}

/// `R(x) = Σᵢ μᵢ xᵢ`, a convex combination of block evaluations `M → M₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMixture {
    pub masses: Vec<f64>,
}

impl BlockMixture {
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2, 2);
        for (i, &mu) in self.masses.iter().enumerate() {
            if mu != 0.0 {
                out.axpy(C64::new(mu, 0.0), &x.submatrix(2 * i, 2 * i, 2, 2));
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CornerReduction {
    pub lp: LPInstance,
    pub outcome: FeasibilityOutcome,
    /// Positive extension assembled from the LP witness, when feasible.
    pub extension: Option<BlockMixture>,
    /// `max ‖R(x) − Φ(x)‖` over the basis of `A`, when an extension exists.
    pub extension_residual: Option<f64>,
}

/// Restricting a positive unital extension to the `1-2` corner yields a
/// state extension of evaluation at `1` on `span{1, t}`, so the moment LP
/// is a necessary condition. A feasible LP witness `g` gives the mixture
/// of block evaluations with masses `wᵢ gᵢ`.
pub fn prop25_corner_reduction(inst: &Prop25Instance, tol: &Tolerances) -> Result<CornerReduction> {
    let weights = inst.a.weights().per_block().to_vec();
    let ex1 = build_example1_instance(&inst.points, &weights)?;
    let outcome = lp_feasibility(&ex1.lp, tol)?;
    let (extension, extension_residual) = match outcome.vector_witness() {
        Some(g) => {
            let mix = BlockMixture {
                masses: g.iter().zip(&weights).map(|(g, w)| g * w).collect(),
            };
            let residual = inst
                .target_pairs()
                .iter()
                .map(|(x, v)| (&mix.apply(x) - v).frobenius_norm())
                .fold(0.0, f64::max);
            (Some(mix), Some(residual))
        }
        None => (None, None),
    };
    Ok(CornerReduction {
        lp: ex1.lp,
        outcome,
        extension,
        extension_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_subalgebra;
    use crate::feasibility::Verdict;
    use crate::verify::validate_d_character;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn example1_instances() {
        let quarter = [0.25; 4];
        let inst = build_example1_instance(&[0.0, 0.25, 0.5, 0.75], &quarter).unwrap();
        assert_eq!(inst.system.dim(), 2);
        let out = lp_feasibility(&inst.lp, &tol()).unwrap();
        assert_eq!(out.verdict(), Verdict::Infeasible);

        let third = [1.0 / 3.0; 3];
        let inst = build_example1_instance(&[0.0, 0.5, 1.0], &third).unwrap();
        assert_eq!(
            lp_feasibility(&inst.lp, &tol()).unwrap().verdict(),
            Verdict::Feasible
        );

        let inst = build_example1_instance(&[1.0], &[1.0]).unwrap();
        assert!(inst.functional.is_some());
        assert_eq!(
            lp_feasibility(&inst.lp, &tol()).unwrap().verdict(),
            Verdict::Feasible
        );

        assert!(build_example1_instance(&[0.5, 0.5], &[1.0, 1.0]).is_err());
        assert!(build_example1_instance(&[1.5], &[1.0]).is_err());
    }

    #[test]
    fn prop25_structure() {
        let tight = Tolerances {
            residual_tol: 1e-10,
            ..tol()
        };
        for three_dim in [false, true] {
            let inst = build_prop25_instance(&[0.0, 0.25, 0.5, 0.75], three_dim).unwrap();
            assert_eq!(inst.a.dim(), if three_dim { 3 } else { 4 });
            assert!(validate_subalgebra(&inst.a, &tight).pass());
            assert!(validate_subalgebra(&inst.d, &tight).pass());
            let r = validate_d_character(&inst.phi, &tight);
            assert!(r.pass(), "{r}");
            let one = inst.space.identity();
            assert!(inst.phi.evaluate(&one).approx_eq(&one, 1e-12));
            assert!(inst
                .d_to_matrix(&inst.phi.evaluate(&one))
                .approx_eq(&ComplexMatrix::identity(2), 1e-12));
        }
    }

    #[test]
    fn prop25_reduction_verdicts() {
        let inst = build_prop25_instance(&[0.0, 0.25, 0.5, 0.75], false).unwrap();
        let red = prop25_corner_reduction(&inst, &tol()).unwrap();
        assert_eq!(red.outcome.verdict(), Verdict::Infeasible);
        let y = red.outcome.farkas().unwrap();
        assert!((y[0] - 0.75).abs() < 1e-12 && (y[1] + 1.0).abs() < 1e-12);

        let inst = build_prop25_instance(&[0.0, 0.5, 1.0], false).unwrap();
        let red = prop25_corner_reduction(&inst, &tol()).unwrap();
        let mix = red.extension.unwrap();
        assert!((mix.masses[2] - 1.0).abs() < 1e-12);
        assert!(red.extension_residual.unwrap() < 1e-12);

        let inst = build_prop25_instance(&[1.0], true).unwrap();
        let red = prop25_corner_reduction(&inst, &tol()).unwrap();
        assert_eq!(red.outcome.verdict(), Verdict::Feasible);
    }
}
