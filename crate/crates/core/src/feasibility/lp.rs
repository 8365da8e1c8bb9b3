use serde::{Deserialize, Serialize};

use super::{Certificate, FeasibilityOutcome, Verdict, Witness};
use crate::error::{Error, Result};
use crate::numerics::Tolerances;

/// `{g ≥ 0 : A g = b}` with dense real data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LpData", into = "LpData")]
pub struct LPInstance {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LpData {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl TryFrom<LpData> for LPInstance {
    type Error = Error;
    fn try_from(d: LpData) -> Result<Self> {
        LPInstance::new(d.rows, d.rhs)
    }
}

impl From<LPInstance> for LpData {
    fn from(lp: LPInstance) -> Self {
        Self {
            rows: lp.rows,
            rhs: lp.rhs,
        }
    }
}

impl LPInstance {
    pub fn new(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("LP needs at least one constraint row"));
        }
        if rows.len() != rhs.len() {
            return Err(Error::validation(format!(
                "{} constraint rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::validation("LP needs at least one variable"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::validation(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) || !rhs[i].is_finite() {
                return Err(Error::validation(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(Self { rows, rhs })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn num_vars(&self) -> usize {
        self.rows[0].len()
    }

    /// `max |A g − b|`.
    pub fn residual(&self, g: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| (r.iter().zip(g).map(|(a, x)| a * x).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    /// `(Aᵀy, bᵀy)` for a candidate certificate.
    pub fn certificate_values(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let aty = (0..self.num_vars())
            .map(|j| self.rows.iter().zip(y).map(|(r, yi)| r[j] * yi).sum())
            .collect();
        let bty = self.rhs.iter().zip(y).map(|(b, yi)| b * yi).sum();
        (aty, bty)
    }
}

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// Phase-1 simplex on a dense tableau with Bland's rule.
///
/// The artificial columns are kept so that the optimal phase-1 duals can
/// be read off their reduced costs; an infeasible instance yields the
/// Farkas vector from those duals, scaled to unit max-norm.
pub fn lp_feasibility(lp: &LPInstance, tol: &Tolerances) -> Result<FeasibilityOutcome> {
    tol.validate()?;
    let m = lp.num_constraints();
    let n = lp.num_vars();
    let width = n + m + 1;
    let rhs_col = n + m;
    let signs: Vec<f64> = lp
        .rhs
        .iter()
        .map(|&b| if b < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = signs[i] * lp.rows[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][rhs_col] = signs[i] * lp.rhs[i];
    }
    let cost = |j: usize| if j >= n && j < n + m { 1.0 } else { 0.0 };
    let mut basis: Vec<usize> = (n..n + m).collect();
    let scale = lp
        .rows
        .iter()
        .flatten()
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let eps = PIVOT_EPS * scale;

    let reduced = |t: &[Vec<f64>], basis: &[usize], j: usize| -> f64 {
        cost(j) - (0..m).map(|i| cost(basis[i]) * t[i][j]).sum::<f64>()
    };

    let mut pivots = 0;
    while let Some(enter) = (0..n + m).find(|&j| reduced(&t, &basis, j) < -eps) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter] > eps {
                let ratio = t[i][rhs_col] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][rhs_col] / t[l][enter];
                        if ratio < best - eps || (ratio <= best + eps && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(row) = leave else {
            return Err(Error::Structure(
                "phase-1 objective unbounded; this indicates a bug".into(),
            ));
        };
        let p = t[row][enter];
        for v in t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row {
                let f = r[enter];
                if f != 0.0 {
                    for (v, pv) in r.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        basis[row] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Structure(format!(
                "simplex exceeded {MAX_PIVOTS} pivots despite Bland's rule"
            )));
        }
    }

    let objective: f64 = (0..m).map(|i| cost(basis[i]) * t[i][rhs_col]).sum();
    let b_norm = lp.rhs.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if objective <= tol.residual_tol * b_norm {
        let mut g = vec![0.0; n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                g[bv] = t[i][rhs_col].max(0.0);
            }
        }
        let residual = lp.residual(&g);
        if residual > tol.residual_tol * b_norm {
            return Err(Error::Structure(format!(
                "simplex witness violates constraints by {residual:.3e}"
            )));
        }
        return Ok(FeasibilityOutcome::Feasible {
            witness: Witness::Vector { values: g },
        });
    }
    // duals of the sign-adjusted system: y_i = 1 − reduced cost of artificial i
    let mut y: Vec<f64> = (0..m)
        .map(|i| -signs[i] * (1.0 - reduced(&t, &basis, n + i)))
        .collect();
    let norm = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if norm > 0.0 {
        for v in y.iter_mut() {
            *v /= norm;
        }
    }
    Ok(FeasibilityOutcome::Infeasible {
        certificate: Certificate::Farkas { y },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub verdict: Verdict,
    /// Grid point in the original variables when one was found.
    pub point: Option<Vec<f64>>,
}

/// Exhaustive grid scan for tiny instances.
///
/// The first row must have positive coefficients and a positive right-hand
/// side. The scan runs over `qᵢ = a₀ᵢ gᵢ / b₀` on the simplex grid of the
/// given step and accepts a point whose remaining rows, in the same
/// scaling, hold within `2·grid_step`.
pub fn brute_force_oracle(lp: &LPInstance, grid_step: f64) -> Result<OracleResult> {
    let n = lp.num_vars();
    if n > 4 {
        return Err(Error::Size(format!(
            "brute-force oracle handles at most 4 atoms, got {n}"
        )));
    }
    if !(0.01..=1.0).contains(&grid_step) {
        return Err(Error::validation(format!(
            "grid step must lie in [0.01, 1], got {grid_step}"
        )));
    }
    let first = &lp.rows[0];
    let b0 = lp.rhs[0];
    if first.iter().any(|&a| a <= 0.0) || b0 <= 0.0 {
        return Err(Error::validation(
            "oracle needs a positive normalization row with positive right-hand side",
        ));
    }
    let steps = (1.0 / grid_step).round() as usize;
    let slack = 2.0 * grid_step;
    // row r in q-coordinates: Σ (a_rᵢ / a₀ᵢ) qᵢ = b_r / b₀
    let scaled: Vec<(Vec<f64>, f64)> = lp.rows[1..]
        .iter()
        .zip(&lp.rhs[1..])
        .map(|(r, b)| (r.iter().zip(first).map(|(a, a0)| a / a0).collect(), b / b0))
        .collect();
    let mut counts = vec![0usize; n];
    let found = scan(&mut counts, 0, steps, &mut |c: &[usize]| {
        let q: Vec<f64> = c.iter().map(|&k| k as f64 / steps as f64).collect();
        scaled
            .iter()
            .all(|(r, b)| (r.iter().zip(&q).map(|(a, x)| a * x).sum::<f64>() - b).abs() <= slack)
    });
    Ok(match found {
        Some(c) => OracleResult {
            verdict: Verdict::Feasible,
            point: Some(
                c.iter()
                    .zip(first)
                    .map(|(&k, a0)| k as f64 / steps as f64 * b0 / a0)
                    .collect(),
            ),
        },
        None => OracleResult {
            verdict: Verdict::Infeasible,
            point: None,
        },
    })
}

/// Enumerates compositions of `remaining` into the slots from `pos` on.
fn scan(
    counts: &mut Vec<usize>,
    pos: usize,
    remaining: usize,
    accept: &mut dyn FnMut(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        return accept(counts).then(|| counts.clone());
    }
    for k in 0..=remaining {
        counts[pos] = k;
        if let Some(hit) = scan(counts, pos + 1, remaining - k, accept) {
            return Some(hit);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment_lp(points: &[f64]) -> LPInstance {
        let w = 1.0 / points.len() as f64;
        LPInstance::new(
            vec![
                vec![w; points.len()],
                points.iter().map(|t| w * t).collect(),
            ],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn infeasible_moment_problem() {
        let lp = moment_lp(&[0.0, 0.25, 0.5, 0.75]);
        let out = lp_feasibility(&lp, &Tolerances::default()).unwrap();
        let y = out.farkas().expect("infeasible");
        assert!((y[0] - 0.75).abs() < 1e-12 && (y[1] + 1.0).abs() < 1e-12);
        let (aty, bty) = lp.certificate_values(y);
        assert!(aty.iter().all(|&v| v >= -1e-12));
        assert!((bty + 0.25).abs() < 1e-12);
    }

    #[test]
    fn feasible_moment_problem() {
        let lp = moment_lp(&[0.0, 0.5, 1.0]);
        let out = lp_feasibility(&lp, &Tolerances::default()).unwrap();
        let g = out.vector_witness().expect("feasible");
        assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12 && (g[2] - 3.0).abs() < 1e-12);
        let single = moment_lp(&[1.0]);
        let g = lp_feasibility(&single, &Tolerances::default()).unwrap();
        assert_eq!(g.vector_witness().unwrap(), &[1.0]);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -g₀ - g₁ = -1, g₀ - g₁ = 0
        let lp = LPInstance::new(vec![vec![-1.0, -1.0], vec![1.0, -1.0]], vec![-1.0, 0.0]).unwrap();
        let out = lp_feasibility(&lp, &Tolerances::default()).unwrap();
        let g = out.vector_witness().unwrap();
        assert!((g[0] - 0.5).abs() < 1e-12 && (g[1] - 0.5).abs() < 1e-12);
        // g₀ + g₁ = -1 is infeasible
        let lp = LPInstance::new(vec![vec![1.0, 1.0]], vec![-1.0]).unwrap();
        let out = lp_feasibility(&lp, &Tolerances::default()).unwrap();
        let (aty, bty) = lp.certificate_values(out.farkas().unwrap());
        assert!(aty.iter().all(|&v| v >= 0.0) && bty < 0.0);
    }

    #[test]
    fn oracle_examples() {
        let r = brute_force_oracle(&moment_lp(&[0.0, 0.25, 0.5, 0.75]), 0.02).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible);
        let r = brute_force_oracle(&moment_lp(&[0.0, 0.5, 1.0]), 0.02).unwrap();
        let p = r.point.unwrap();
        assert!(p[2] > 2.7);
        let r = brute_force_oracle(&moment_lp(&[1.0]), 0.5).unwrap();
        assert_eq!(r.verdict, Verdict::Feasible);
        assert!(matches!(
            brute_force_oracle(&moment_lp(&[0.0, 0.1, 0.2, 0.3, 0.4]), 0.1),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn rejects_malformed() {
        assert!(LPInstance::new(vec![], vec![]).is_err());
        assert!(LPInstance::new(vec![vec![1.0, f64::NAN]], vec![1.0]).is_err());
        assert!(LPInstance::new(vec![vec![1.0], vec![1.0, 2.0]], vec![1.0, 1.0]).is_err());
    }
}
