//! Subcommand implementations. Each returns the process exit code:
//!
//! - `check`:     0 pseudoforest, 2 rejected, 1 parse error
//! - `decompose`: 0 verified, 2 rejected, 3 verification failed,
//!                4 kernel iteration limit, 1 parse/io error
//! - `verify`:    0 consistent, 3 inconsistent, 1 parse/io error
//! - `gen`:       0 written, 1 bad spec/io error

use std::fs;
use std::path::Path;

use log::{info, warn};
use qschur_core::Complex64;

use qschur_core::{
    classify, triangularize, verify_all, ComponentKind, EngineError, EngineOpts, Field, IterOpts,
    LinalgError, Matrix, Quiver, Representation, Scalar, SchurDecomposition, SpectrumCheck,
    TriangularizeOutcome, VerifyConfig,
};

use crate::gen::{generate, GenSpec};
use crate::io::{
    atomic_write, decomposition_to_json, emit_problem, emit_result, json_to_decomposition,
    parse_problem, parse_result, problem_checksum, rejection_to_json, ComponentCheckJson,
    EdgeCheckJson, Problem, ResultFile, SpectrumJson, VerificationJson, VertexCheckJson,
    FORMAT_VERSION, TOOL_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_ITERATION_LIMIT: i32 = 4;

#[derive(Debug, Clone)]
pub struct DecomposeFlags {
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub field_override: Option<Field>,
}

impl Default for DecomposeFlags {
    fn default() -> Self {
        DecomposeFlags { tol: 1e-10, max_iter: None, field_override: None }
    }
}

fn read_problem(path: &Path) -> Result<(Problem, String), i32> {
    let bytes = fs::read(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })?;
    let problem = parse_problem(&bytes).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_PARSE
    })?;
    let canonical = emit_problem(&problem);
    let checksum = problem_checksum(&canonical);
    Ok((problem, checksum))
}

/// `qschur check <problem>`: classify and report.
pub fn cmd_check(path: &Path) -> i32 {
    let (problem, _) = match read_problem(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let report = classify(problem.quiver());
    for (i, c) in report.components.iter().enumerate() {
        let kind = match c.kind {
            ComponentKind::Tree => "tree",
            ComponentKind::PseudotreeWithCycle => "pseudotree with cycle",
            ComponentKind::Rejected => "rejected",
        };
        println!(
            "component {}: {} vertices, {} edges: {kind}",
            i + 1,
            c.vertices.len(),
            c.edges.len()
        );
        if let Some((c1, c2)) = &c.rejection_evidence {
            let fmt = |v: &Vec<qschur_core::EdgeId>| {
                v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
            };
            println!("  two distinct cycles: [{}] and [{}]", fmt(c1), fmt(c2));
        }
    }
    if report.is_pseudoforest {
        println!("pseudoforest: yes");
        EXIT_OK
    } else {
        println!("pseudoforest: no");
        EXIT_REJECTED
    }
}

fn override_field(problem: Problem, target: Option<Field>) -> Result<Problem, i32> {
    let Some(target) = target else { return Ok(problem) };
    match (problem, target) {
        (p @ Problem::Real(..), Field::Real) | (p @ Problem::Complex(..), Field::Complex) => {
            Ok(p)
        }
        (Problem::Real(q, rep), Field::Complex) => {
            let mats = rep
                .matrices()
                .iter()
                .map(|(id, m)| (*id, m.to_complex()))
                .collect();
            Ok(Problem::Complex(q, Representation::new(mats)))
        }
        (Problem::Complex(q, rep), Field::Real) => {
            let mut mats = std::collections::BTreeMap::new();
            for (id, m) in rep.matrices() {
                if m.entries().iter().any(|z| z.im != 0.0) {
                    eprintln!(
                        "error: --field-override real requires purely real entries ({id} has imaginary parts)"
                    );
                    return Err(EXIT_PARSE);
                }
                mats.insert(*id, m.map(|z| z.re));
            }
            Ok(Problem::Real(q, Representation::new(mats)))
        }
    }
}

fn verification_to_json(report: &qschur_core::VerificationReport) -> VerificationJson {
    VerificationJson {
        pass: report.pass,
        reconstruction_tol: report.config.reconstruction_tol,
        orthogonality_factor: report.config.orthogonality_factor,
        structural_tol: report.config.structural_tol,
        spectrum_rtol: report.config.spectrum_rtol,
        condition_limit: report.config.condition_limit,
        vertices: report
            .vertices
            .iter()
            .map(|v| VertexCheckJson { vertex: v.vertex.0, defect: v.defect, pass: v.pass })
            .collect(),
        edges: report
            .edges
            .iter()
            .map(|e| EdgeCheckJson {
                edge: e.edge.0,
                residual: e.residual,
                residual_pass: e.residual_pass,
                shape: e.declared.tag().to_string(),
                shape_pass: e.shape_pass,
                worst_violation: e.worst_violation,
            })
            .collect(),
        components: report
            .components
            .iter()
            .map(|c| ComponentCheckJson {
                lowest_vertex: c.lowest_vertex.0,
                spectrum: match &c.spectrum {
                    SpectrumCheck::NotApplicable { reason } => SpectrumJson {
                        kind: "not_applicable".into(),
                        max_rel_err: None,
                        condition: None,
                        pass: None,
                        reason: Some(reason.clone()),
                    },
                    SpectrumCheck::Advisory { max_rel_err, condition } => SpectrumJson {
                        kind: "advisory".into(),
                        max_rel_err: Some(*max_rel_err),
                        condition: Some(*condition),
                        pass: None,
                        reason: None,
                    },
                    SpectrumCheck::Checked { max_rel_err, pass } => SpectrumJson {
                        kind: "checked".into(),
                        max_rel_err: Some(*max_rel_err),
                        condition: None,
                        pass: Some(*pass),
                        reason: None,
                    },
                },
            })
            .collect(),
    }
}

fn decompose_generic<S: Scalar>(
    quiver: &Quiver,
    rep: &Representation<S>,
    checksum: &str,
    flags: &DecomposeFlags,
) -> (ResultFile, i32) {
    let opts = EngineOpts {
        iter: IterOpts { max_sweeps: flags.max_iter },
        struct_tol: flags.tol,
    };
    let cfg = VerifyConfig {
        reconstruction_tol: flags.tol,
        structural_tol: flags.tol,
        ..VerifyConfig::default()
    };
    let mut file = ResultFile {
        format_version: FORMAT_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        input_checksum: checksum.to_string(),
        field: S::FIELD.to_string(),
        outcome: String::new(),
        decomposition: None,
        rejection: None,
        verification: None,
    };
    match triangularize(quiver, rep, &opts) {
        Ok(TriangularizeOutcome::Decomposition(d)) => {
            let report = verify_all(quiver, rep, &d, &cfg);
            print_verification_summary(&report);
            file.outcome = "decomposition".into();
            file.decomposition = Some(decomposition_to_json(&d));
            file.verification = Some(verification_to_json(&report));
            let code = if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
            (file, code)
        }
        Ok(TriangularizeOutcome::Rejected(r)) => {
            for c in &r.components {
                println!(
                    "rejected component at {}: two distinct cycles {:?} and {:?}",
                    c.lowest_vertex,
                    c.cycles.0.iter().map(|e| e.0).collect::<Vec<_>>(),
                    c.cycles.1.iter().map(|e| e.0).collect::<Vec<_>>()
                );
            }
            file.outcome = "rejection".into();
            file.rejection = Some(rejection_to_json(&r));
            (file, EXIT_REJECTED)
        }
        Err(EngineError::Kernel { component, source }) => {
            eprintln!("error: kernel failure in component at {component}: {source}");
            if let LinalgError::IterationLimit { partial, .. } = &source {
                eprintln!(
                    "  partial state: {} sweeps, active window {}..{}",
                    partial.sweeps, partial.window.0, partial.window.1
                );
            }
            file.outcome = "error".into();
            (file, EXIT_ITERATION_LIMIT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            file.outcome = "error".into();
            (file, EXIT_PARSE)
        }
    }
}

fn print_verification_summary(report: &qschur_core::VerificationReport) {
    let worst_defect = report.vertices.iter().map(|v| v.defect).fold(0.0, f64::max);
    let worst_resid = report.edges.iter().map(|e| e.residual).fold(0.0, f64::max);
    let shapes_ok = report.edges.iter().all(|e| e.shape_pass);
    println!("orthogonality: worst defect {worst_defect:.3e}");
    println!("reconstruction: worst residual {worst_resid:.3e}");
    println!("shapes: {}", if shapes_ok { "exact" } else { "VIOLATED" });
    for c in &report.components {
        match &c.spectrum {
            SpectrumCheck::Checked { max_rel_err, pass } => println!(
                "spectrum ({}): rel err {max_rel_err:.3e} -> {}",
                c.lowest_vertex,
                if *pass { "ok" } else { "MISMATCH" }
            ),
            SpectrumCheck::Advisory { max_rel_err, condition } => println!(
                "spectrum ({}): advisory (condition {condition:.2e}), rel err {max_rel_err:.3e}",
                c.lowest_vertex
            ),
            SpectrumCheck::NotApplicable { reason } => {
                println!("spectrum ({}): not applicable: {reason}", c.lowest_vertex)
            }
        }
    }
    println!("verification: {}", if report.pass { "PASS" } else { "FAIL" });
}

/// `qschur decompose <problem> -o <result>`.
pub fn cmd_decompose(path: &Path, out: Option<&Path>, flags: &DecomposeFlags) -> i32 {
    let (problem, checksum) = match read_problem(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let problem = match override_field(problem, flags.field_override) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let (file, code) = match &problem {
        Problem::Real(q, rep) => decompose_generic(q, rep, &checksum, flags),
        Problem::Complex(q, rep) => decompose_generic(q, rep, &checksum, flags),
    };
    if code == EXIT_ITERATION_LIMIT {
        return code;
    }
    if let Some(out) = out {
        if let Err(e) = atomic_write(out, &emit_result(&file)) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return EXIT_PARSE;
        }
        info!("wrote {}", out.display());
    }
    code
}

fn verify_generic<S: Scalar>(
    quiver: &Quiver,
    rep: &Representation<S>,
    result: &ResultFile,
) -> i32 {
    match result.outcome.as_str() {
        "decomposition" => {
            let Some(d) = &result.decomposition else {
                eprintln!("error: result file declares a decomposition but carries none");
                return EXIT_PARSE;
            };
            let decomp: SchurDecomposition<S> = match json_to_decomposition(d) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: result file: {e}");
                    return EXIT_PARSE;
                }
            };
            let cfg = match &result.verification {
                Some(v) => VerifyConfig {
                    reconstruction_tol: v.reconstruction_tol,
                    orthogonality_factor: v.orthogonality_factor,
                    structural_tol: v.structural_tol,
                    spectrum_rtol: v.spectrum_rtol,
                    condition_limit: v.condition_limit,
                },
                None => VerifyConfig::default(),
            };
            let report = verify_all(quiver, rep, &decomp, &cfg);
            print_verification_summary(&report);
            if report.pass {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        "rejection" => {
            let fresh = classify(quiver);
            if fresh.is_pseudoforest {
                eprintln!("result claims a rejection but the problem is a pseudoforest");
                EXIT_VERIFY_FAILED
            } else {
                println!("rejection confirmed by reclassification");
                EXIT_OK
            }
        }
        other => {
            eprintln!("error: result outcome \"{other}\" cannot be verified");
            EXIT_PARSE
        }
    }
}

/// `qschur verify <problem> <result>`: recompute the verification report
/// from the two files alone.
pub fn cmd_verify(problem_path: &Path, result_path: &Path) -> i32 {
    let (problem, checksum) = match read_problem(problem_path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let bytes = match fs::read(result_path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", result_path.display());
            return EXIT_PARSE;
        }
    };
    let result = match parse_result(&bytes) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", result_path.display());
            return EXIT_PARSE;
        }
    };
    if result.input_checksum != checksum {
        warn!(
            "checksum mismatch: result was produced for a different problem (got {}, expected {})",
            result.input_checksum, checksum
        );
        eprintln!("warning: input checksum mismatch; verifying anyway");
    }
    if result.field != problem.field().to_string() {
        eprintln!(
            "error: result field {} does not match problem field {}",
            result.field,
            problem.field()
        );
        return EXIT_VERIFY_FAILED;
    }
    match &problem {
        Problem::Real(q, rep) => verify_generic::<f64>(q, rep, &result),
        Problem::Complex(q, rep) => verify_generic::<Complex64>(q, rep, &result),
    }
}

/// `qschur gen ...`: write a deterministic problem file.
pub fn cmd_gen(spec: &GenSpec, out: Option<&Path>) -> i32 {
    let problem = match generate(spec) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let text = emit_problem(&problem);
    match out {
        Some(path) => {
            if let Err(e) = atomic_write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_PARSE;
            }
            info!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    EXIT_OK
}

// Silence an unused-import lint when the complex path is monomorphized away.
#[allow(unused)]
fn _complex_marker(_: Matrix<Complex64>) {}
