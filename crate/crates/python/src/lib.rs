//! Python bindings for hrkit.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`
//! (ints and floats are accepted on input).

use hrkit::algebra::{BlockSpace, DCharacter, ScalarCharacter, Subalgebra, TraceWeights};
use hrkit::extension::{self, ExpectationRecipe, NormalState};
use hrkit::feasibility::{self, Certificate, FeasibilityOutcome, LPInstance, Witness};
use hrkit::numerics::{self, ComplexMatrix, C64};
use hrkit::verify::{self, VerificationReport};
use hrkit::wedderburn;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<C64>>;

/// Factor sizes and `units[i][j][k]`.
type UnitSystem = (Vec<usize>, Vec<Vec<Vec<Rows>>>);

fn py_err(e: hrkit::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    ComplexMatrix::from_vec(r, c, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Numerical thresholds.
#[pyclass(name = "Tolerances", module = "pyhrkit", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTolerances {
    inner: numerics::Tolerances,
}

#[pymethods]
impl PyTolerances {
    #[new]
    #[pyo3(signature = (rank_tol=1e-10, residual_tol=1e-8, psd_tol=1e-9))]
    fn new(rank_tol: f64, residual_tol: f64, psd_tol: f64) -> PyResult<Self> {
        let inner = numerics::Tolerances {
            rank_tol,
            residual_tol,
            psd_tol,
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn rank_tol(&self) -> f64 {
        self.inner.rank_tol
    }

    #[getter]
    fn residual_tol(&self) -> f64 {
        self.inner.residual_tol
    }

    #[getter]
    fn psd_tol(&self) -> f64 {
        self.inner.psd_tol
    }
}

fn tol_of(t: Option<PyRef<'_, PyTolerances>>) -> numerics::Tolerances {
    t.map(|t| t.inner).unwrap_or_default()
}

/// Named residual checks with thresholds.
#[pyclass(name = "Report", module = "pyhrkit", frozen)]
struct PyReport {
    inner: VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass()
    }

    /// `(name, value, limit, passed)` for every check.
    #[getter]
    fn checks(&self) -> Vec<(String, f64, f64, bool)> {
        self.inner
            .checks
            .iter()
            .map(|c| (c.name.clone(), c.value, c.limit, c.passed()))
            .collect()
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.notes.clone()
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.inner.get(name)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __bool__(&self) -> bool {
        self.inner.pass()
    }
}

fn report(inner: VerificationReport) -> PyReport {
    PyReport { inner }
}

/// A unital span inside a block-diagonal matrix algebra.
#[pyclass(name = "Subalgebra", module = "pyhrkit", frozen)]
struct PySubalgebra {
    inner: Subalgebra,
    /// The spanning elements as given, in order.
    elements: Vec<ComplexMatrix>,
}

#[pymethods]
impl PySubalgebra {
    #[new]
    #[pyo3(signature = (blocks, elements, unital=true, selfadjoint=false, weights=None, tolerances=None))]
    fn new(
        blocks: Vec<usize>,
        elements: Vec<Rows>,
        unital: bool,
        selfadjoint: bool,
        weights: Option<Vec<f64>>,
        tolerances: Option<PyRef<'_, PyTolerances>>,
    ) -> PyResult<Self> {
        let tol = tol_of(tolerances);
        let space = BlockSpace::new(blocks).map_err(py_err)?;
        let w = match weights {
            Some(w) => TraceWeights::new(&space, w).map_err(py_err)?,
            None => TraceWeights::uniform(&space),
        };
        let elements = elements
            .into_iter()
            .map(to_matrix)
            .collect::<PyResult<Vec<_>>>()?;
        let inner = Subalgebra::from_span(space, w, &elements, unital, selfadjoint, &tol)
            .map_err(py_err)?;
        Ok(Self { inner, elements })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn blocks(&self) -> Vec<usize> {
        self.inner.space().block_dims().to_vec()
    }

    /// Orthonormal basis under the weighted trace pairing.
    #[getter]
    fn basis(&self) -> Vec<Rows> {
        self.inner.basis().iter().map(to_rows).collect()
    }

    fn membership_residual(&self, x: Rows) -> PyResult<f64> {
        let x = to_matrix(x)?;
        self.inner.space().check_shape(&x).map_err(py_err)?;
        Ok(self.inner.membership_residual(&x))
    }

    #[pyo3(signature = (tolerances=None))]
    fn validate(&self, tolerances: Option<PyRef<'_, PyTolerances>>) -> PyReport {
        report(hrkit::algebra::validate_subalgebra(
            &self.inner,
            &tol_of(tolerances),
        ))
    }
}

/// A character `A → ℂ`, given by its values on the algebra's spanning elements.
#[pyclass(name = "ScalarCharacter", module = "pyhrkit", frozen)]
struct PyScalarCharacter {
    inner: ScalarCharacter,
}

#[pymethods]
impl PyScalarCharacter {
    #[new]
    #[pyo3(signature = (algebra, values, tolerances=None))]
    fn new(
        algebra: PyRef<'_, PySubalgebra>,
        values: Vec<C64>,
        tolerances: Option<PyRef<'_, PyTolerances>>,
    ) -> PyResult<Self> {
        if values.len() != algebra.elements.len() {
            return Err(PyValueError::new_err(format!(
                "expected {} values, one per spanning element, got {}",
                algebra.elements.len(),
                values.len()
            )));
        }
        let pairs: Vec<(ComplexMatrix, C64)> =
            algebra.elements.iter().cloned().zip(values).collect();
        let inner = ScalarCharacter::from_pairs(algebra.inner.clone(), &pairs, &tol_of(tolerances))
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    fn __call__(&self, x: Rows) -> PyResult<C64> {
        let x = to_matrix(x)?;
        self.inner
            .domain()
            .space()
            .check_shape(&x)
            .map_err(py_err)?;
        Ok(self.inner.evaluate(&x))
    }

    #[pyo3(signature = (tolerances=None))]
    fn validate(&self, tolerances: Option<PyRef<'_, PyTolerances>>) -> PyReport {
        report(self.inner.validate(&tol_of(tolerances)))
    }
}

/// A homomorphism `A → D` onto a selfadjoint subalgebra.
#[pyclass(name = "DCharacter", module = "pyhrkit", frozen)]
struct PyDCharacter {
    inner: DCharacter,
}

#[pymethods]
impl PyDCharacter {
    #[new]
    #[pyo3(signature = (algebra, range, images, tolerances=None))]
    fn new(
        algebra: PyRef<'_, PySubalgebra>,
        range: PyRef<'_, PySubalgebra>,
        images: Vec<Rows>,
        tolerances: Option<PyRef<'_, PyTolerances>>,
    ) -> PyResult<Self> {
        if images.len() != algebra.elements.len() {
            return Err(PyValueError::new_err(format!(
                "expected {} images, one per spanning element, got {}",
                algebra.elements.len(),
                images.len()
            )));
        }
        let images = images
            .into_iter()
            .map(to_matrix)
            .collect::<PyResult<Vec<_>>>()?;
        let pairs: Vec<(ComplexMatrix, ComplexMatrix)> =
            algebra.elements.iter().cloned().zip(images).collect();
        let inner = DCharacter::from_pairs(
            algebra.inner.clone(),
            range.inner.clone(),
            &pairs,
            &tol_of(tolerances),
        )
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    fn __call__(&self, x: Rows) -> PyResult<Rows> {
        let x = to_matrix(x)?;
        self.inner
            .domain()
            .space()
            .check_shape(&x)
            .map_err(py_err)?;
        Ok(to_rows(&self.inner.evaluate(&x)))
    }

    #[pyo3(signature = (tolerances=None))]
    fn validate(&self, tolerances: Option<PyRef<'_, PyTolerances>>) -> PyReport {
        report(verify::validate_d_character(
            &self.inner,
            &tol_of(tolerances),
        ))
    }
}

/// A normal state `x ↦ tr_w(xρ)`.
#[pyclass(name = "NormalState", module = "pyhrkit", frozen)]
struct PyNormalState {
    inner: NormalState,
    trace: Option<extension::ConstructionTrace>,
}

#[pymethods]
impl PyNormalState {
    #[getter]
    fn density(&self) -> Rows {
        to_rows(self.inner.density())
    }

    fn expectation(&self, x: Rows) -> PyResult<C64> {
        let x = to_matrix(x)?;
        self.inner.space().check_shape(&x).map_err(py_err)?;
        Ok(self.inner.expectation(&x))
    }

    /// `(dim E, dim F, distance bound, distance of a to F)` for the L² engine.
    #[getter]
    fn construction(&self) -> Option<(usize, usize, f64, f64)> {
        self.trace
            .as_ref()
            .map(|t| (t.dim_e, t.dim_f, t.distance_bound, t.distance_a_f))
    }

    #[pyo3(signature = (tolerances=None))]
    fn check(&self, tolerances: Option<PyRef<'_, PyTolerances>>) -> PyReport {
        report(verify::is_state(&self.inner, &tol_of(tolerances)))
    }

    #[pyo3(signature = (algebra, phi, tolerances=None))]
    fn check_extension(
        &self,
        algebra: PyRef<'_, PySubalgebra>,
        phi: PyRef<'_, PyScalarCharacter>,
        tolerances: Option<PyRef<'_, PyTolerances>>,
    ) -> PyReport {
        report(verify::extends_functional(
            &self.inner,
            &algebra.inner,
            &phi.inner,
            &tol_of(tolerances),
        ))
    }
}

/// A conditional expectation built from matrix units and corner states.
#[pyclass(name = "ExpectationRecipe", module = "pyhrkit", frozen)]
struct PyExpectationRecipe {
    inner: ExpectationRecipe,
}

#[pymethods]
impl PyExpectationRecipe {
    fn __call__(&self, x: Rows) -> PyResult<Rows> {
        let y = self.inner.apply(&to_matrix(x)?).map_err(py_err)?;
        Ok(to_rows(&y))
    }

    #[getter]
    fn factor_sizes(&self) -> Vec<usize> {
        self.inner.units().factor_sizes.clone()
    }

    #[pyo3(signature = (range, tolerances=None))]
    fn check(
        &self,
        range: PyRef<'_, PySubalgebra>,
        tolerances: Option<PyRef<'_, PyTolerances>>,
    ) -> PyReport {
        report(verify::is_conditional_expectation(
            &self.inner,
            &range.inner,
            &tol_of(tolerances),
        ))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }
}

/// Outcome of a feasibility decision.
#[pyclass(name = "Feasibility", module = "pyhrkit", frozen)]
struct PyFeasibility {
    inner: FeasibilityOutcome,
}

#[pymethods]
impl PyFeasibility {
    /// `"feasible"`, `"infeasible"` or `"undetermined"`.
    #[getter]
    fn verdict(&self) -> &'static str {
        match self.inner.verdict() {
            feasibility::Verdict::Feasible => "feasible",
            feasibility::Verdict::Infeasible => "infeasible",
            feasibility::Verdict::Undetermined => "undetermined",
        }
    }

    #[getter]
    fn witness(&self) -> Option<Vec<f64>> {
        match &self.inner {
            FeasibilityOutcome::Feasible {
                witness: Witness::Vector { values },
            } => Some(values.clone()),
            _ => None,
        }
    }

    #[getter]
    fn choi_blocks(&self) -> Option<Vec<Rows>> {
        match &self.inner {
            FeasibilityOutcome::Feasible {
                witness: Witness::Choi { blocks },
            } => Some(blocks.iter().map(to_rows).collect()),
            _ => None,
        }
    }

    #[getter]
    fn farkas(&self) -> Option<Vec<f64>> {
        match &self.inner {
            FeasibilityOutcome::Infeasible {
                certificate: Certificate::Farkas { y },
            } => Some(y.clone()),
            _ => None,
        }
    }

    #[getter]
    fn gap(&self) -> Option<f64> {
        match &self.inner {
            FeasibilityOutcome::Undetermined { gap_evidence, .. } => Some(*gap_evidence),
            _ => None,
        }
    }

    fn __repr__(&self) -> String {
        format!("Feasibility({})", self.verdict())
    }
}

#[pyfunction]
#[pyo3(signature = (algebra, phi, tolerances=None))]
fn scalar_extend_l2(
    algebra: PyRef<'_, PySubalgebra>,
    phi: PyRef<'_, PyScalarCharacter>,
    tolerances: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<PyNormalState> {
    let (inner, trace) =
        extension::scalar_extend_l2(&algebra.inner, &phi.inner, &tol_of(tolerances))
            .map_err(py_err)?;
    Ok(PyNormalState {
        inner,
        trace: Some(trace),
    })
}

#[pyfunction]
#[pyo3(signature = (algebra, phi, tolerances=None))]
fn scalar_extend_reflexive(
    algebra: PyRef<'_, PySubalgebra>,
    phi: PyRef<'_, PyScalarCharacter>,
    tolerances: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<PyNormalState> {
    let inner = extension::scalar_extend_reflexive(&algebra.inner, &phi.inner, &tol_of(tolerances))
        .map_err(py_err)?;
    Ok(PyNormalState { inner, trace: None })
}

#[pyfunction]
#[pyo3(signature = (algebra, phi, seed=0, tolerances=None))]
fn d_character_extend(
    algebra: PyRef<'_, PySubalgebra>,
    phi: PyRef<'_, PyDCharacter>,
    seed: u64,
    tolerances: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<PyExpectationRecipe> {
    let inner =
        extension::d_character_extend(&algebra.inner, &phi.inner, &tol_of(tolerances), seed)
            .map_err(py_err)?;
    Ok(PyExpectationRecipe { inner })
}

/// Factor sizes and matrix units `units[i][j][k]` of a selfadjoint algebra.
#[pyfunction]
#[pyo3(signature = (algebra, seed=0, tolerances=None))]
fn matrix_units(
    algebra: PyRef<'_, PySubalgebra>,
    seed: u64,
    tolerances: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<UnitSystem> {
    let sys =
        wedderburn::matrix_units(&algebra.inner, &tol_of(tolerances), seed).map_err(py_err)?;
    let units = sys
        .units
        .iter()
        .map(|f| {
            f.iter()
                .map(|row| row.iter().map(to_rows).collect())
                .collect()
        })
        .collect();
    Ok((sys.factor_sizes.clone(), units))
}

/// Decides `A g = b, g >= 0`.
#[pyfunction]
#[pyo3(signature = (rows, rhs, tolerances=None))]
fn lp_feasibility(
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    tolerances: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<PyFeasibility> {
    let lp = LPInstance::new(rows, rhs).map_err(py_err)?;
    let inner = feasibility::lp_feasibility(&lp, &tol_of(tolerances)).map_err(py_err)?;
    Ok(PyFeasibility { inner })
}

/// Evaluation at 1 on `span{1, t}` over the given atoms (uniform masses by default).
#[pyfunction]
#[pyo3(signature = (points, weights=None))]
fn example1(points: Vec<f64>, weights: Option<Vec<f64>>) -> PyResult<PyFeasibility> {
    let w = weights.unwrap_or_else(|| vec![1.0 / points.len().max(1) as f64; points.len()]);
    let inst = feasibility::build_example1_instance(&points, &w).map_err(py_err)?;
    let inner = feasibility::lp_feasibility(&inst.lp, &Default::default()).map_err(py_err)?;
    Ok(PyFeasibility { inner })
}

/// Corner reduction of the upper-triangular function family.
#[pyfunction]
#[pyo3(signature = (points, three_dim=false))]
fn prop25(points: Vec<f64>, three_dim: bool) -> PyResult<(PyFeasibility, Option<Vec<f64>>)> {
    let inst = feasibility::build_prop25_instance(&points, three_dim).map_err(py_err)?;
    let red = feasibility::prop25_corner_reduction(&inst, &Default::default()).map_err(py_err)?;
    Ok((
        PyFeasibility { inner: red.outcome },
        red.extension.map(|m| m.masses),
    ))
}

/// Choi matrix from the images of the matrix units `E_ij` (row-major order).
#[pyfunction]
fn choi_of_map(images: Vec<Rows>, n: usize) -> PyResult<Rows> {
    let images = images
        .into_iter()
        .map(to_matrix)
        .collect::<PyResult<Vec<_>>>()?;
    Ok(to_rows(&verify::choi_of_map(&images, n).map_err(py_err)?))
}

/// Eigenvalues of a Hermitian matrix, ascending.
#[pyfunction]
fn eigvalsh(h: Rows) -> PyResult<Vec<f64>> {
    let eig = numerics::hermitian_eig(&to_matrix(h)?, &Default::default()).map_err(py_err)?;
    Ok(eig.values)
}

/// Runs the command-line front end; returns `(exit code, stdout, stderr)`.
#[pyfunction]
#[pyo3(signature = (args, seed=None))]
fn run_cli(args: Vec<String>, seed: Option<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hrkit".to_string()).chain(args);
    let code = hrkit::cli::run_with(argv, seed.as_deref(), &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

/// Module initializer.
#[pymodule]
pub fn pyhrkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTolerances>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySubalgebra>()?;
    m.add_class::<PyScalarCharacter>()?;
    m.add_class::<PyDCharacter>()?;
    m.add_class::<PyNormalState>()?;
    m.add_class::<PyExpectationRecipe>()?;
    m.add_class::<PyFeasibility>()?;
    m.add_function(wrap_pyfunction!(scalar_extend_l2, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_extend_reflexive, m)?)?;
    m.add_function(wrap_pyfunction!(d_character_extend, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_units, m)?)?;
    m.add_function(wrap_pyfunction!(lp_feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(example1, m)?)?;
    m.add_function(wrap_pyfunction!(prop25, m)?)?;
    m.add_function(wrap_pyfunction!(choi_of_map, m)?)?;
    m.add_function(wrap_pyfunction!(eigvalsh, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("FORMAT_VERSION", hrkit::cli::FORMAT_VERSION)?;
    Ok(())
}
