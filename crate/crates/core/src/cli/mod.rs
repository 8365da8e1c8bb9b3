//! Command-line front end: instance parsing, command dispatch and report
//! emission. This is the only module that performs I/O.
//!
//! Exit codes: 0 success or feasible, 1 internal error, 2 usage error,
//! 3 infeasible, 4 validation failure, 5 undetermined.

mod demo;
mod document;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use demo::run_demo;
pub use document::{
    build_instance, parse_instance, parse_instance_str, Instance, InstanceDocument, SpanDocument,
    FORMAT_VERSION,
};
pub use output::{
    emit_report, render_human, render_machine, CertificateCheck, DemoEntry, Engine, Format,
    ResultBody, ResultDocument,
};

use crate::algebra::{BlockSpace, TraceWeights};
use crate::error::{Error, Result};
use crate::extension::{
    d_character_extend, scalar_extend_l2, scalar_extend_reflexive, NormalState,
};
use crate::feasibility::{
    brute_force_oracle, build_example1_instance, build_prop25_instance, cp_extension_feasibility,
    lp_feasibility, prop25_corner_reduction, FeasibilityOutcome, LPInstance, Verdict, Witness,
};
use crate::numerics::{eigh, ComplexMatrix, Tolerances};
use crate::random::DEFAULT_SEED;
use crate::verify::{
    extends_d_character, extends_functional, is_conditional_expectation, is_state,
    sampled_positivity, CheckKind, VerificationReport,
};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_UNDETERMINED: i32 = 5;

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "HR_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "hrkit",
    version,
    about = "Normal state extensions, conditional expectations and extension feasibility for finite-dimensional operator algebras"
)]
struct Cli {
    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Also write the machine-format result document to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extend a character on A to a normal state on M.
    ExtendScalar {
        #[arg(long, value_enum, default_value_t = Engine::L2)]
        engine: Engine,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Extend a D-character on A to a conditional expectation onto D.
    ExtendDchar {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Decide an LP feasibility problem `A g = b, g >= 0`.
    FeasibilityLp {
        /// Instance file with an `lp` section.
        #[arg(long, conflicts_with = "points", required_unless_present = "points")]
        instance: Option<PathBuf>,
        /// Atoms of the moment problem (comma separated).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        points: Option<Vec<f64>>,
        /// Atom masses (default uniform 1/n).
        #[arg(long, value_delimiter = ',', requires = "points")]
        weights: Option<Vec<f64>>,
    },
    /// Build and decide one of the counterexample families.
    Counterexample {
        #[command(subcommand)]
        family: Family,
    },
    /// Probe for a unital completely positive extension by alternating projections.
    CpProbe {
        /// Instance file with `algebra` and `cp_target` sections.
        #[arg(
            long,
            conflicts_with = "prop25_points",
            required_unless_present = "prop25_points"
        )]
        instance: Option<PathBuf>,
        /// Use the upper-triangular counterexample on these points instead.
        #[arg(long, value_delimiter = ',')]
        prop25_points: Option<Vec<f64>>,
        #[arg(long, requires = "prop25_points")]
        three_dim: bool,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
    },
    /// Re-check a machine-format result against its instance.
    Verify {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        result: PathBuf,
    },
    /// Run the built-in worked examples end to end.
    Demo,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Evaluation at 1 on span{1, t} over finitely many atoms.
    Example1 {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        points: Vec<f64>,
        /// Add the atom t = 1 if absent.
        #[arg(long)]
        include_one: bool,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Upper-triangular 2x2 functions with the corner evaluated at 1.
    Prop25 {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        points: Vec<f64>,
        #[arg(long)]
        three_dim: bool,
    },
}

/// Exit code for a failed command.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        EXIT_VALIDATION
    } else {
        EXIT_INTERNAL
    }
}

/// Exit code for a verdict.
pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Feasible => EXIT_SUCCESS,
        Verdict::Infeasible => EXIT_INFEASIBLE,
        Verdict::Undetermined => EXIT_UNDETERMINED,
    }
}

/// Exit code for a completed command that produced `doc`.
pub fn result_exit_code(doc: &ResultDocument) -> i32 {
    if let Some(v) = doc.verdict() {
        return verdict_exit_code(v);
    }
    if doc.report.pass() {
        EXIT_SUCCESS
    } else {
        EXIT_INTERNAL
    }
}

/// Parses `HR_SEED`; unset means the default seed.
pub fn seed_from_env(value: Option<&str>) -> Result<u64> {
    match value {
        None => Ok(DEFAULT_SEED),
        Some(s) => s.trim().parse::<u64>().map_err(|_| {
            Error::validation(format!(
                "{SEED_ENV} must be a nonnegative integer, got {s:?}"
            ))
        }),
    }
}

/// Runs the CLI with process arguments, environment and standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(
        argv,
        seed.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

/// [`run_command`] with explicit seed variable and output streams.
pub fn run_with<I, T>(
    argv: I,
    hr_seed: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_SUCCESS
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let seed = match seed_from_env(hr_seed) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let (doc, code) = match execute(&cli.command, seed) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return error_exit_code(&e);
        }
    };
    let _ = write!(out, "{}", emit_report(&doc, cli.format));
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, render_machine(&doc)) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_INTERNAL;
        }
    }
    code
}

fn execute(command: &Command, seed: u64) -> Result<(ResultDocument, i32)> {
    let doc = match command {
        Command::ExtendScalar { engine, instance } => extend_scalar(*engine, instance)?,
        Command::ExtendDchar { instance } => extend_dchar(instance, seed)?,
        Command::FeasibilityLp {
            instance,
            points,
            weights,
        } => feasibility_lp(instance.as_deref(), points.as_deref(), weights.as_deref())?,
        Command::Counterexample { family } => match family {
            Family::Example1 {
                points,
                include_one,
                weights,
            } => example1(points, *include_one, weights.as_deref())?,
            Family::Prop25 { points, three_dim } => prop25(points, *three_dim, seed)?,
        },
        Command::CpProbe {
            instance,
            prop25_points,
            three_dim,
            max_iter,
        } => cp_probe(
            instance.as_deref(),
            prop25_points.as_deref(),
            *three_dim,
            *max_iter,
        )?,
        Command::Verify { instance, result } => {
            let doc = verify(instance.as_deref(), result)?;
            let code = if doc.report.pass() {
                EXIT_SUCCESS
            } else {
                EXIT_VALIDATION
            };
            return Ok((doc, code));
        }
        Command::Demo => {
            let doc = run_demo(seed);
            let code = match &doc.result {
                ResultBody::Demo { entries } if entries.iter().all(|e| e.passed) => EXIT_SUCCESS,
                _ => EXIT_INTERNAL,
            };
            return Ok((doc, code));
        }
    };
    let code = result_exit_code(&doc);
    Ok((doc, code))
}

fn state_report(
    state: &NormalState,
    inst: &Instance,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let mut report = is_state(state, tol);
    report.merge(
        "",
        extends_functional(
            state,
            inst.require_algebra()?,
            inst.require_functional()?,
            tol,
        ),
    );
    Ok(report)
}

fn extend_scalar(engine: Engine, path: &Path) -> Result<ResultDocument> {
    let inst = parse_instance(path)?;
    let tol = inst.tolerances;
    let a = inst.require_algebra()?;
    let phi = inst.require_functional()?;
    let (state, trace) = match engine {
        Engine::L2 => {
            let (s, t) = scalar_extend_l2(a, phi, &tol)?;
            (s, Some(t))
        }
        Engine::Reflexive => (scalar_extend_reflexive(a, phi, &tol)?, None),
    };
    let mut report = state_report(&state, &inst, &tol)?;
    if let Some(t) = &trace {
        report.residual(
            "distance_bound_violation",
            (t.distance_bound - t.distance_a_f).max(0.0),
            &tol,
        );
    }
    let body = ResultBody::NormalState {
        engine,
        blocks: state.space().block_dims().to_vec(),
        weights: state.weights().per_block().to_vec(),
        density: state.density().clone(),
        trace,
    };
    Ok(ResultDocument::new("extend-scalar", body, report))
}

fn expectation_report(
    recipe: &crate::extension::ExpectationRecipe,
    inst: &Instance,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let phi = inst.require_d_character()?;
    let mut report = is_conditional_expectation(recipe, phi.range(), tol);
    report.merge(
        "",
        extends_d_character(&|x| recipe.apply_unchecked(x), phi, tol),
    );
    Ok(report)
}

fn extend_dchar(path: &Path, seed: u64) -> Result<ResultDocument> {
    let inst = parse_instance(path)?;
    let tol = inst.tolerances;
    let seed = inst.document.seed.unwrap_or(seed);
    let recipe = d_character_extend(
        inst.require_algebra()?,
        inst.require_d_character()?,
        &tol,
        seed,
    )?;
    let report = expectation_report(&recipe, &inst, &tol)?;
    Ok(ResultDocument::new(
        "extend-dchar",
        ResultBody::Expectation { recipe },
        report,
    ))
}

/// Witness or certificate checks for an LP outcome.
fn lp_report(
    lp: &LPInstance,
    outcome: &FeasibilityOutcome,
    tol: &Tolerances,
) -> (VerificationReport, Option<CertificateCheck>) {
    let mut report = VerificationReport::new();
    let mut check = None;
    match outcome {
        FeasibilityOutcome::Feasible {
            witness: Witness::Vector { values },
        } => {
            report.residual("constraint_residual", lp.residual(values), tol);
            report.floor(
                "witness_min",
                values.iter().copied().fold(f64::INFINITY, f64::min),
                tol,
            );
        }
        FeasibilityOutcome::Infeasible {
            certificate: crate::feasibility::Certificate::Farkas { y },
        } => {
            let (aty, bty) = lp.certificate_values(y);
            let min = aty.iter().copied().fold(f64::INFINITY, f64::min);
            report.push("certificate_min_aty", min, CheckKind::Floor, 1e-10);
            report.push("certificate_bty", bty, CheckKind::Residual, -1e-6);
            check = Some(CertificateCheck { aty, bty });
        }
        other => {
            report.residual("unexpected_outcome", f64::INFINITY, tol);
            report.note(format!("LP outcome of unexpected shape: {other:?}"));
        }
    }
    (report, check)
}

fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn feasibility_lp(
    instance: Option<&Path>,
    points: Option<&[f64]>,
    weights: Option<&[f64]>,
) -> Result<ResultDocument> {
    let (lp, tol) = match (instance, points) {
        (Some(path), _) => {
            let inst = parse_instance(path)?;
            let lp = inst
                .lp
                .clone()
                .ok_or_else(|| Error::validation("instance has no `lp` section"))?;
            (lp, inst.tolerances)
        }
        (None, Some(p)) => {
            let w = weights
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| uniform_weights(p.len()));
            (build_example1_instance(p, &w)?.lp, Tolerances::default())
        }
        (None, None) => {
            return Err(Error::validation(
                "either --instance or --points is required",
            ))
        }
    };
    let outcome = lp_feasibility(&lp, &tol)?;
    let (report, certificate_check) = lp_report(&lp, &outcome, &tol);
    Ok(ResultDocument::new(
        "feasibility-lp",
        ResultBody::Feasibility {
            lp: Some(lp),
            outcome,
            certificate_check,
            extension: None,
        },
        report,
    ))
}

fn example1(points: &[f64], include_one: bool, weights: Option<&[f64]>) -> Result<ResultDocument> {
    let mut points = points.to_vec();
    if include_one && !points.contains(&1.0) {
        points.push(1.0);
    }
    let w = match weights {
        Some(w) => w.to_vec(),
        None => uniform_weights(points.len()),
    };
    let tol = Tolerances::default();
    let inst = build_example1_instance(&points, &w)?;
    let outcome = lp_feasibility(&inst.lp, &tol)?;
    let (mut report, certificate_check) = lp_report(&inst.lp, &outcome, &tol);
    if points.len() <= 4 {
        let oracle = brute_force_oracle(&inst.lp, 0.02)?;
        report.note(format!(
            "brute-force grid oracle (step 0.02): {:?}",
            oracle.verdict
        ));
    }
    Ok(ResultDocument::new(
        "counterexample example1",
        ResultBody::Feasibility {
            lp: Some(inst.lp),
            outcome,
            certificate_check,
            extension: None,
        },
        report,
    ))
}

fn prop25(points: &[f64], three_dim: bool, seed: u64) -> Result<ResultDocument> {
    let tol = Tolerances::default();
    let inst = build_prop25_instance(points, three_dim)?;
    let mut report = VerificationReport::new();
    report.merge("a.", crate::algebra::validate_subalgebra(&inst.a, &tol));
    report.merge("d.", crate::algebra::validate_subalgebra(&inst.d, &tol));
    report.merge("phi.", crate::verify::validate_d_character(&inst.phi, &tol));
    report.note(format!(
        "dim A = {}, dim D = {}",
        inst.a.dim(),
        inst.d.dim()
    ));
    let red = prop25_corner_reduction(&inst, &tol)?;
    let (lp_checks, certificate_check) = lp_report(&red.lp, &red.outcome, &tol);
    report.merge("lp.", lp_checks);
    if let (Some(mix), Some(res)) = (&red.extension, red.extension_residual) {
        report.residual("extension_residual", res, &tol);
        let space = inst.space.clone();
        let map = |x: &ComplexMatrix| mix.apply(&space.pinch(x));
        report.merge(
            "r.",
            sampled_positivity(&map, space.total_dim(), seed, 200, &tol),
        );
    }
    Ok(ResultDocument::new(
        "counterexample prop25",
        ResultBody::Feasibility {
            lp: Some(red.lp),
            outcome: red.outcome,
            certificate_check,
            extension: red.extension,
        },
        report,
    ))
}

/// Checks a Choi witness: blockwise PSD, unital, and `R(x) = Φ(x)` on the pairs.
pub fn choi_witness_report(
    space: &BlockSpace,
    pairs: &[(ComplexMatrix, ComplexMatrix)],
    blocks: &[ComplexMatrix],
    tol: &Tolerances,
) -> VerificationReport {
    let mut report = VerificationReport::new();
    if blocks.len() != space.num_blocks() || pairs.is_empty() {
        report.residual("witness_shape_mismatch", f64::INFINITY, tol);
        return report;
    }
    let d = pairs[0].1.rows();
    let apply = |x: &ComplexMatrix| -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(d, d);
        for (b, c) in blocks.iter().enumerate() {
            let n = space.block_dims()[b];
            let o = space.offset(b);
            for i in 0..n {
                for j in 0..n {
                    let coeff = x[(o + i, o + j)];
                    if coeff.norm() > 0.0 {
                        out.axpy(coeff, &c.submatrix(i * d, j * d, d, d));
                    }
                }
            }
        }
        out
    };
    let min_eig = blocks
        .iter()
        .map(|c| eigh(c).min_value())
        .fold(f64::INFINITY, f64::min);
    report.floor("choi_min_eigenvalue", min_eig, tol);
    report.residual(
        "unit_residual",
        (&apply(&space.identity()) - &ComplexMatrix::identity(d)).frobenius_norm(),
        tol,
    );
    let ext = pairs
        .iter()
        .map(|(x, v)| (&apply(x) - v).frobenius_norm())
        .fold(0.0, f64::max);
    report.residual("extension_residual", ext, tol);
    report
}

fn cp_report(
    space: &BlockSpace,
    pairs: &[(ComplexMatrix, ComplexMatrix)],
    outcome: &FeasibilityOutcome,
    tol: &Tolerances,
) -> VerificationReport {
    match outcome {
        FeasibilityOutcome::Feasible {
            witness: Witness::Choi { blocks },
        } => choi_witness_report(space, pairs, blocks, tol),
        FeasibilityOutcome::Undetermined { .. } => {
            let mut r = VerificationReport::new();
            r.note("alternating projections did not converge; the gap is evidence, not a proof of infeasibility");
            r
        }
        FeasibilityOutcome::Infeasible { .. } => {
            let mut r = VerificationReport::new();
            r.note("the linear constraints alone are inconsistent");
            r
        }
        other => {
            let mut r = VerificationReport::new();
            r.residual("unexpected_outcome", f64::INFINITY, tol);
            r.note(format!("probe outcome of unexpected shape: {other:?}"));
            r
        }
    }
}

fn cp_probe(
    instance: Option<&Path>,
    prop25_points: Option<&[f64]>,
    three_dim: bool,
    max_iter: usize,
) -> Result<ResultDocument> {
    let (space, pairs, tol) = match (instance, prop25_points) {
        (Some(path), _) => {
            let inst = parse_instance(path)?;
            let pairs = inst
                .cp_pairs
                .clone()
                .ok_or_else(|| Error::validation("instance has no `cp_target` section"))?;
            let space = inst.space.clone().expect("cp_target requires blocks");
            (space, pairs, inst.tolerances)
        }
        (None, Some(points)) => {
            let inst = build_prop25_instance(points, three_dim)?;
            (
                inst.space.clone(),
                inst.target_pairs(),
                Tolerances::default(),
            )
        }
        (None, None) => {
            return Err(Error::validation(
                "either --instance or --prop25-points is required",
            ))
        }
    };
    let outcome = cp_extension_feasibility(&space, &pairs, &tol, max_iter)?;
    let report = cp_report(&space, &pairs, &outcome, &tol);
    Ok(ResultDocument::new(
        "cp-probe",
        ResultBody::Feasibility {
            lp: None,
            outcome,
            certificate_check: None,
            extension: None,
        },
        report,
    ))
}

fn verify(instance: Option<&Path>, result: &Path) -> Result<ResultDocument> {
    let text = std::fs::read_to_string(result)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", result.display())))?;
    let doc: ResultDocument = document::from_json(&text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::validation(format!(
            "result format_version {} is not supported (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let inst = match instance {
        Some(p) => Some(parse_instance(p)?),
        None => None,
    };
    let need = || {
        inst.as_ref()
            .ok_or_else(|| Error::validation("this result needs --instance"))
    };
    let tol = inst.as_ref().map(|i| i.tolerances).unwrap_or_default();
    let report = match &doc.result {
        ResultBody::NormalState {
            blocks,
            weights,
            density,
            ..
        } => {
            let inst = need()?;
            let space = BlockSpace::new(blocks.clone())?;
            if Some(&space) != inst.space.as_ref() {
                return Err(Error::validation(
                    "result blocks differ from the instance blocks",
                ));
            }
            let w = TraceWeights::new(&space, weights.clone())?;
            let state = NormalState::new(space, w, density.clone())?;
            state_report(&state, inst, &tol)?
        }
        ResultBody::Expectation { recipe } => expectation_report(recipe, need()?, &tol)?,
        ResultBody::Feasibility { lp, outcome, .. } => match outcome {
            FeasibilityOutcome::Feasible {
                witness: Witness::Choi { blocks },
            } => {
                let inst = need()?;
                let pairs = inst
                    .cp_pairs
                    .as_ref()
                    .ok_or_else(|| Error::validation("instance has no `cp_target` section"))?;
                let space = inst.space.as_ref().expect("cp_target requires blocks");
                choi_witness_report(space, pairs, blocks, &tol)
            }
            FeasibilityOutcome::Undetermined { .. } => {
                let mut r = VerificationReport::new();
                r.note("undetermined results carry no witness to check");
                r
            }
            FeasibilityOutcome::Infeasible {
                certificate: crate::feasibility::Certificate::LinearResidual { .. },
            } => {
                let mut r = VerificationReport::new();
                r.note("linear inconsistency is re-derived by running cp-probe");
                r
            }
            _ => {
                let lp = match (lp, inst.as_ref().and_then(|i| i.lp.as_ref())) {
                    (Some(lp), _) => lp,
                    (None, Some(lp)) => lp,
                    (None, None) => return Err(Error::validation("no LP in result or instance")),
                };
                lp_report(lp, outcome, &tol).0
            }
        },
        ResultBody::Demo { .. } => {
            return Err(Error::validation("demo results have nothing to verify"));
        }
    };
    Ok(ResultDocument::new("verify", doc.result.clone(), report))
}
