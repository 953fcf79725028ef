//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (run with `cargo test -p qschur-cli --test acceptance -- --nocapture`).
//!
//! 1. Exhaustive existence/characterization on all multigraphs with up to
//!    4 vertices and 5 edges against a brute-force cycle-subset oracle.
//! 2. Real reduction corpus (> 200 seeded problems, dims 1–12): residuals,
//!    orthogonality, exact shapes, one quasi-triangular factor per
//!    component.
//! 3. The same corpus over the complex numbers, strictly triangular.
//! 4. Spectrum preservation on well-conditioned invertible cycles.
//! 5. Two-cycle obstruction: rejections with evidence, the transpose
//!    relation, and the Jordan-block search.
//! 6. Kernel oracles: Schur vs characteristic polynomial, QR/RQ residuals.
//! 7. Byte-identical regeneration of problem and result files.

use std::collections::BTreeMap;
use std::fs;

use qschur_cli::commands::{cmd_decompose, cmd_gen, DecomposeFlags, EXIT_OK};
use qschur_cli::gen::{generate, GenSpec, Template};
use qschur_cli::io::{emit_problem, parse_problem, Problem};
use qschur_core::linalg::{complex_schur, qr, quasi_triangular_eigenvalues, real_schur, rq, IterOpts};
use qschur_core::testkit::{
    brute_force_is_pseudoforest, char_poly_eigenvalues, multiset_rel_err, seeded_complex_matrix,
    seeded_matrix,
};
use qschur_core::{
    classify, triangularize, verify_all, Edge, EdgeId, EngineOpts, Field, Matrix, Quiver,
    Representation, Scalar, SchurDecomposition, SpectrumCheck, TriangularizeOutcome, Vertex,
    VertexId, VerifyConfig,
};

fn report(criterion: &str, ok: bool) {
    println!("acceptance {criterion}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion {criterion} failed");
}

// -------------------------------------------------------------------------
// 1. Existence / characterization, exhaustively.
// -------------------------------------------------------------------------

#[test]
fn acceptance_1_characterization_exhaustive() {
    let mut total = 0usize;
    let mut disagreements = 0usize;
    for nv in 1usize..=4 {
        let slots: Vec<(usize, usize)> =
            (0..nv).flat_map(|s| (0..nv).map(move |d| (s, d))).collect();
        // Multisets of up to 5 directed edge slots.
        let mut stack: Vec<(usize, Vec<(usize, usize)>)> = vec![(0, Vec::new())];
        while let Some((start, edges)) = stack.pop() {
            total += 1;
            let vertices: Vec<Vertex> =
                (0..nv).map(|i| Vertex { id: VertexId(i as u32 + 1), dim: 1 }).collect();
            let es: Vec<Edge> = edges
                .iter()
                .enumerate()
                .map(|(i, &(s, d))| Edge {
                    id: EdgeId(i as u32 + 1),
                    src: VertexId(s as u32 + 1),
                    dst: VertexId(d as u32 + 1),
                })
                .collect();
            let quiver = Quiver::new(vertices, es).unwrap();
            let verdict = classify(&quiver).is_pseudoforest;
            let brute = brute_force_is_pseudoforest(nv, &edges);
            if verdict != brute {
                disagreements += 1;
                eprintln!("disagreement: nv={nv} edges={edges:?}");
            }
            if edges.len() < 5 {
                for slot in start..slots.len() {
                    let mut next = edges.clone();
                    next.push(slots[slot]);
                    stack.push((slot, next));
                }
            }
        }
    }
    println!("  enumerated {total} multigraphs, {disagreements} disagreements");
    report("1 (existence on all multigraphs <= 4 vertices, 5 edges)", disagreements == 0);
}

// -------------------------------------------------------------------------
// Shared corpus for criteria 2-4.
// -------------------------------------------------------------------------

fn corpus(field: Field) -> Vec<(String, Problem)> {
    let mut out = Vec::new();
    let mut push = |name: String, spec: GenSpec| {
        out.push((name, generate(&spec).expect("corpus generation")));
    };
    let base = |template, seed| GenSpec {
        template,
        field,
        dims: vec![],
        dim_range: (1, 12),
        count: 3,
        depth: 2,
        branching: 2,
        seed,
    };
    for seed in 0..24u64 {
        push(format!("loop/{seed}"), base(Template::Loop, seed));
        push(format!("edge/{seed}"), base(Template::Edge, seed + 100));
        push(format!("pencil/{seed}"), base(Template::Pencil, seed + 200));
        push(
            format!("contragredient/{seed}"),
            base(Template::Contragredient, seed + 300),
        );
    }
    for n in 3..=5usize {
        for seed in 0..16u64 {
            let mut s = base(Template::Cycle, seed + 400 + n as u64 * 31);
            s.count = n;
            push(format!("cycle{n}/{seed}"), s);
        }
    }
    for depth in 1..=3usize {
        for seed in 0..8u64 {
            let mut s = base(Template::Tree, seed + 500 + depth as u64 * 17);
            s.depth = depth;
            s.branching = if depth == 3 { 2 } else { 3 };
            push(format!("tree{depth}/{seed}"), s);
        }
    }
    for seed in 0..12u64 {
        let mut s = base(Template::Pseudotree, seed + 600);
        s.count = 3 + (seed % 3) as usize;
        push(format!("pseudotree/{seed}"), s);
    }
    out
}

fn run_and_verify<S: Scalar>(
    quiver: &Quiver,
    rep: &Representation<S>,
) -> (SchurDecomposition<S>, qschur_core::VerificationReport) {
    let d = match triangularize(quiver, rep, &EngineOpts::default()) {
        Ok(TriangularizeOutcome::Decomposition(d)) => d,
        Ok(TriangularizeOutcome::Rejected(_)) => panic!("corpus problems are pseudoforests"),
        Err(e) => panic!("engine error: {e}"),
    };
    let report = verify_all(quiver, rep, &d, &VerifyConfig::default());
    (d, report)
}

/// Entries outside the strict (bump-free) version of the declared pattern:
/// only 2×2 carrier blocks may put anything there.
fn has_bumps<S: Scalar>(r: &qschur_core::ReducedEdge<S>) -> bool {
    use qschur_core::ShapeClass;
    let base = match r.shape {
        ShapeClass::SquareQuasiUpper => ShapeClass::SquareUpper,
        other => other,
    };
    let m = &r.matrix;
    (0..m.rows()).any(|i| {
        (0..m.cols())
            .any(|j| base.is_zero_position(m.rows(), m.cols(), i, j) && m[(i, j)] != S::ZERO)
    })
}

fn quasi_count_per_component<S: Scalar>(d: &SchurDecomposition<S>) -> bool {
    for comp in &d.components {
        let with_blocks =
            comp.edges.iter().filter(|e| has_bumps(&d.reduced[e])).count();
        if with_blocks > 1 {
            return false;
        }
        // Blocks only ever sit on the designated carrier.
        for e in &comp.edges {
            if has_bumps(&d.reduced[e]) && !d.reduced[e].quasi_carrier {
                return false;
            }
        }
    }
    true
}

#[test]
fn acceptance_2_real_corpus() {
    let corpus = corpus(Field::Real);
    let mut count = 0usize;
    let mut ok = true;
    for (name, problem) in &corpus {
        let Problem::Real(quiver, rep) = problem else { unreachable!() };
        let (d, report) = run_and_verify(quiver, rep);
        count += 1;
        if !report.pass || !quasi_count_per_component(&d) {
            eprintln!("  corpus problem {name} failed: {report:?}");
            ok = false;
        }
    }
    println!("  {count} seeded real problems reduced and verified");
    report_line_2(count, ok);
}

fn report_line_2(count: usize, ok: bool) {
    report("2 (real corpus: residuals, orthogonality, exact shapes)", ok && count >= 200);
}

#[test]
fn acceptance_3_complex_corpus() {
    let corpus = corpus(Field::Complex);
    let mut count = 0usize;
    let mut ok = true;
    for (name, problem) in &corpus {
        let Problem::Complex(quiver, rep) = problem else { unreachable!() };
        let (d, report) = run_and_verify(quiver, rep);
        count += 1;
        // No 2x2 blocks anywhere: every reduced matrix has a clean first
        // subdiagonal.
        let strictly_triangular = d.reduced.values().all(|r| {
            let m = &r.matrix;
            let k = m.rows().min(m.cols());
            (1..k).all(|i| m[(i, i - 1)] == qschur_core::Complex64::new(0.0, 0.0))
        });
        if !report.pass || !strictly_triangular {
            eprintln!("  corpus problem {name} failed");
            ok = false;
        }
    }
    println!("  {count} seeded complex problems reduced and verified");
    report("3 (complex corpus: strictly upper-triangular)", ok && count >= 200);
}

#[test]
fn acceptance_4_spectrum_preservation() {
    // Square, invertible, well-conditioned cycles: the signed product of the
    // reduced matrices must match the embedding oracle.
    let mut checked = 0usize;
    let mut ok = true;
    for field in [Field::Real, Field::Complex] {
        for (template, count) in [
            (Template::Loop, 3usize),
            (Template::Pencil, 3),
            (Template::Cycle, 3),
            (Template::Cycle, 4),
            (Template::Cycle, 5),
        ] {
            for seed in 0..12u64 {
                let spec = GenSpec {
                    template,
                    field,
                    dims: vec![2 + (seed % 6) as usize],
                    dim_range: (1, 8),
                    count,
                    depth: 1,
                    branching: 1,
                    seed: seed * 97 + count as u64,
                };
                let problem = generate(&spec).unwrap();
                let spectrum = match &problem {
                    Problem::Real(q, rep) => run_and_verify(q, rep).1,
                    Problem::Complex(q, rep) => run_and_verify(q, rep).1,
                };
                for comp in &spectrum.components {
                    match &comp.spectrum {
                        SpectrumCheck::Checked { max_rel_err, pass } => {
                            checked += 1;
                            if !pass {
                                eprintln!(
                                    "  spectrum mismatch {template:?}/{count}/{seed}: {max_rel_err:.3e}"
                                );
                                ok = false;
                            }
                        }
                        SpectrumCheck::Advisory { .. } => {} // ill-conditioned draw
                        SpectrumCheck::NotApplicable { reason } => {
                            panic!("square cycles must be spectrum-checked: {reason}")
                        }
                    }
                }
            }
        }
    }
    println!("  {checked} cycle spectra compared against the embedding oracle");
    report("4 (spectrum preservation on invertible cycles)", ok && checked >= 80);
}

// -------------------------------------------------------------------------
// 5. The two-cycle obstruction.
// -------------------------------------------------------------------------

#[test]
fn acceptance_5a_rejections_with_evidence() {
    let two_loops = generate(&GenSpec {
        template: Template::TwoLoops,
        field: Field::Real,
        dims: vec![3],
        dim_range: (1, 6),
        count: 0,
        depth: 0,
        branching: 0,
        seed: 5,
    })
    .unwrap();
    let mut ok = true;
    for d in 3..=5usize {
        let par = generate(&GenSpec {
            template: Template::Parallel,
            field: Field::Real,
            dims: vec![2],
            dim_range: (1, 6),
            count: d,
            depth: 0,
            branching: 0,
            seed: 6,
        })
        .unwrap();
        for problem in [&two_loops, &par] {
            let Problem::Real(quiver, rep) = problem else { unreachable!() };
            match triangularize(quiver, rep, &EngineOpts::default()).unwrap() {
                TriangularizeOutcome::Rejected(r) => {
                    for c in &r.components {
                        if c.cycles.0.is_empty() || c.cycles.1.is_empty() || c.cycles.0 == c.cycles.1
                        {
                            ok = false;
                        }
                    }
                }
                _ => ok = false,
            }
        }
    }
    // d = 2 parallel edges are the pencil and must be accepted.
    let pencil = generate(&GenSpec {
        template: Template::Parallel,
        field: Field::Real,
        dims: vec![3],
        dim_range: (1, 6),
        count: 2,
        depth: 0,
        branching: 0,
        seed: 7,
    })
    .unwrap();
    let Problem::Real(quiver, rep) = &pencil else { unreachable!() };
    if !matches!(
        triangularize(quiver, rep, &EngineOpts::default()).unwrap(),
        TriangularizeOutcome::Decomposition(_)
    ) {
        ok = false;
    }
    report("5a (two-loop and parallel d>=3 rejected with two-cycle evidence)", ok);
}

#[test]
fn acceptance_5b_transpose_relation() {
    let mut worst: f64 = 0.0;
    for n in 2usize..=5 {
        for seed in 0..50u64 {
            let a = seeded_matrix(n, n, seed * 13 + n as u64);
            let q = qr(&seeded_matrix(n, n, seed * 17 + 1000 + n as u64)).q;
            let left = q.adjoint().mul(&a).mul(&q).transpose();
            let right = q.adjoint().mul(&a.transpose()).mul(&q);
            worst = worst.max(left.sub(&right).norm_fro() / a.norm_fro());
        }
    }
    println!("  worst relative defect {worst:.3e}");
    report("5b (transpose relation <= 1e-14 * norm)", worst <= 1e-14);
}

#[test]
fn acceptance_5c_jordan_block_never_double_triangular() {
    // A single 3x3 Jordan block is not quasi-diagonalizable, so no
    // orthogonal change of basis can make both Q'AQ and Q'A'Q
    // quasi-upper-triangular.
    let n = 3usize;
    let a = Matrix::from_fn(n, n, |i, j| if i == j { 0.5 } else if j == i + 1 { 1.0 } else { 0.0 });
    let at = a.transpose();
    let threshold = 1e-10 * a.norm_fro();
    let is_quasi_ut = |m: &Matrix<f64>| {
        for j in 0..n {
            for i in j + 2..n {
                if m[(i, j)].abs() > threshold {
                    return false;
                }
            }
        }
        // non-overlapping subdiagonal bumps
        (1..n - 1).all(|i| m[(i, i - 1)].abs() <= threshold || m[(i + 1, i)].abs() <= threshold)
    };
    let mut both = 0usize;
    for seed in 0..100_000u64 {
        let q = qr(&seeded_matrix(n, n, seed)).q;
        let t1 = q.adjoint().mul(&a).mul(&q);
        if !is_quasi_ut(&t1) {
            continue;
        }
        let t2 = q.adjoint().mul(&at).mul(&q);
        if is_quasi_ut(&t2) {
            both += 1;
        }
    }
    println!("  100000 random orthogonal bases, {both} made both triangular");
    report("5c (Jordan block never doubly quasi-triangular)", both == 0);
}

// -------------------------------------------------------------------------
// 6. Kernel-level oracles.
// -------------------------------------------------------------------------

#[test]
fn acceptance_6_kernel_oracles() {
    let mut ok = true;
    // Schur diagonals against the characteristic-polynomial oracle.
    for seed in 0..4u64 {
        for n in [3usize, 8, 14, 20] {
            let a = seeded_matrix(n, n, seed * 71 + n as u64);
            let r = real_schur(&a, &IterOpts::default()).unwrap();
            let err =
                multiset_rel_err(&char_poly_eigenvalues(&a), &quasi_triangular_eigenvalues(&r.t));
            if err > 1e-6 {
                eprintln!("  real schur n={n} seed={seed}: {err:.3e}");
                ok = false;
            }
            let c = seeded_complex_matrix(n, n, seed * 73 + n as u64);
            let r = complex_schur(&c, &IterOpts::default()).unwrap();
            let err =
                multiset_rel_err(&char_poly_eigenvalues(&c), &quasi_triangular_eigenvalues(&r.t));
            if err > 1e-6 {
                eprintln!("  complex schur n={n} seed={seed}: {err:.3e}");
                ok = false;
            }
        }
    }
    // QR/RQ reconstruction and orthogonality.
    for seed in 0..6u64 {
        for &(m, n) in &[(6usize, 6usize), (9, 4), (4, 9), (12, 12)] {
            let a = seeded_matrix(m, n, seed * 131 + (m * n) as u64);
            let f = qr(&a);
            let qr_ok = f.q.mul(&f.r).sub(&a).norm_fro() <= 1e-12 * m as f64 * a.norm_fro().max(1.0)
                && f.q.orthogonality_defect() <= 1e-12 * m as f64;
            let g = rq(&a);
            let rq_ok = g.r.mul(&g.q.adjoint()).sub(&a).norm_fro()
                <= 1e-12 * n as f64 * a.norm_fro().max(1.0)
                && g.q.orthogonality_defect() <= 1e-12 * n as f64;
            if !qr_ok || !rq_ok {
                eprintln!("  factorization failure at {m}x{n} seed={seed}");
                ok = false;
            }
        }
    }
    report("6 (kernel oracles: Schur eigenvalues, QR/RQ residuals)", ok);
}

// -------------------------------------------------------------------------
// 7. Reproducibility end to end.
// -------------------------------------------------------------------------

#[test]
fn acceptance_7_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    for (template, field, seed) in [
        (Template::Pseudotree, Field::Real, 41u64),
        (Template::Cycle, Field::Complex, 42),
        (Template::Contragredient, Field::Real, 43),
    ] {
        let spec = GenSpec {
            template,
            field,
            dims: vec![],
            dim_range: (1, 6),
            count: 3,
            depth: 2,
            branching: 2,
            seed,
        };
        let mut outputs = Vec::new();
        for run in 0..2 {
            let p = dir.path().join(format!("{seed}-{run}.json"));
            let r = dir.path().join(format!("{seed}-{run}.result.json"));
            if cmd_gen(&spec, Some(&p)) != EXIT_OK {
                ok = false;
            }
            if cmd_decompose(&p, Some(&r), &DecomposeFlags::default()) != EXIT_OK {
                ok = false;
            }
            outputs.push((fs::read(&p).unwrap(), fs::read(&r).unwrap()));
        }
        if outputs[0] != outputs[1] {
            eprintln!("  run-to-run difference for {template:?}/{field:?}/{seed}");
            ok = false;
        }
    }
    report("7 (byte-identical problem and result files across runs)", ok);
}

// -------------------------------------------------------------------------
// Supporting check: the shipped fixture reduces and verifies.
// -------------------------------------------------------------------------

#[test]
fn fixture_pseudotree_reduces() {
    let bytes = fs::read(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/figure_pseudotree.json"
    ))
    .unwrap();
    let problem = parse_problem(&bytes).unwrap();
    let Problem::Real(quiver, rep) = &problem else { panic!("fixture is real") };
    let (_, report) = run_and_verify(quiver, rep);
    assert!(report.pass);
    // Round-trip of the canonical form is stable.
    let canon = emit_problem(&problem);
    let reparsed = parse_problem(canon.as_bytes()).unwrap();
    assert_eq!(emit_problem(&reparsed), canon);
}

// keep BTreeMap import used even if corpora change
#[allow(dead_code)]
type _M = BTreeMap<u32, u32>;
