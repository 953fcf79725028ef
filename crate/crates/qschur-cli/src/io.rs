//! Problem and result files: strict JSON schemas, canonical serialization,
//! checksums, and atomic writes.
//!
//! Problems and results share one text format so goldens stay
//! human-diffable. Complex entries are `[re, im]` pairs; real entries plain
//! numbers. Unknown fields are rejected, ids must be dense starting at 1,
//! and matrix shapes are cross-checked against the vertex dimensions at
//! parse time.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use qschur_core::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use qschur_core::{
    ComponentSummary, CycleProvenance, Edge, EdgeId, Field, Matrix, Quiver, ReducedEdge,
    Rejection, Representation, Scalar, SchurDecomposition, ShapeClass, Sign, Vertex, VertexId,
};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Semantic(String),
}

impl ParseError {
    fn semantic(msg: impl Into<String>) -> Self {
        ParseError::Semantic(msg.into())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub id: u32,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub id: u32,
    pub src: u32,
    pub dst: u32,
    pub matrix: Vec<Vec<EntryJson>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format_version: u32,
    pub field: String,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

/// Parsed problem: the quiver plus the representation over one of the two
/// fields.
#[derive(Debug, Clone)]
pub enum Problem {
    Real(Quiver, Representation<f64>),
    Complex(Quiver, Representation<Complex64>),
}

impl Problem {
    pub fn field(&self) -> Field {
        match self {
            Problem::Real(..) => Field::Real,
            Problem::Complex(..) => Field::Complex,
        }
    }

    pub fn quiver(&self) -> &Quiver {
        match self {
            Problem::Real(q, _) | Problem::Complex(q, _) => q,
        }
    }
}

pub fn parse_problem(bytes: &[u8]) -> Result<Problem, ParseError> {
    let file: ProblemFile = serde_json::from_slice(bytes)?;
    if file.format_version != FORMAT_VERSION {
        return Err(ParseError::semantic(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    let field = match file.field.as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(ParseError::semantic(format!("unknown field \"{other}\""))),
    };
    check_dense_ids(
        file.vertices.iter().map(|v| v.id).collect(),
        "vertex",
    )?;
    check_dense_ids(file.edges.iter().map(|e| e.id).collect(), "edge")?;

    let vertices: Vec<Vertex> =
        file.vertices.iter().map(|v| Vertex { id: VertexId(v.id), dim: v.dim }).collect();
    let edges: Vec<Edge> = file
        .edges
        .iter()
        .map(|e| Edge { id: EdgeId(e.id), src: VertexId(e.src), dst: VertexId(e.dst) })
        .collect();
    let quiver = Quiver::new(vertices, edges).map_err(|e| ParseError::semantic(e.to_string()))?;

    for e in &file.edges {
        let rows = quiver.dim(VertexId(e.dst));
        let cols = quiver.dim(VertexId(e.src));
        if e.matrix.len() != rows || e.matrix.iter().any(|r| r.len() != cols) {
            return Err(ParseError::semantic(format!(
                "edge {}: matrix must be {rows}x{cols} (dim(dst) x dim(src))",
                e.id
            )));
        }
        for row in &e.matrix {
            for entry in row {
                match (field, entry) {
                    (Field::Real, EntryJson::Real(x)) if x.is_finite() => {}
                    (Field::Complex, EntryJson::Complex([re, im]))
                        if re.is_finite() && im.is_finite() => {}
                    (Field::Real, _) => {
                        return Err(ParseError::semantic(format!(
                            "edge {}: real problems carry plain finite numbers",
                            e.id
                        )))
                    }
                    (Field::Complex, _) => {
                        return Err(ParseError::semantic(format!(
                            "edge {}: complex problems carry finite [re, im] pairs",
                            e.id
                        )))
                    }
                }
            }
        }
    }

    Ok(match field {
        Field::Real => {
            let mats: BTreeMap<EdgeId, Matrix<f64>> = file
                .edges
                .iter()
                .map(|e| {
                    let m = Matrix::from_fn(e.matrix.len(), e.matrix[0].len(), |i, j| {
                        match e.matrix[i][j] {
                            EntryJson::Real(x) => x,
                            EntryJson::Complex(_) => unreachable!("validated"),
                        }
                    });
                    (EdgeId(e.id), m)
                })
                .collect();
            Problem::Real(quiver, Representation::new(mats))
        }
        Field::Complex => {
            let mats: BTreeMap<EdgeId, Matrix<Complex64>> = file
                .edges
                .iter()
                .map(|e| {
                    let m = Matrix::from_fn(e.matrix.len(), e.matrix[0].len(), |i, j| {
                        match e.matrix[i][j] {
                            EntryJson::Complex([re, im]) => Complex64::new(re, im),
                            EntryJson::Real(_) => unreachable!("validated"),
                        }
                    });
                    (EdgeId(e.id), m)
                })
                .collect();
            Problem::Complex(quiver, Representation::new(mats))
        }
    })
}

fn check_dense_ids(mut ids: Vec<u32>, what: &str) -> Result<(), ParseError> {
    ids.sort_unstable();
    for (i, id) in ids.iter().enumerate() {
        if *id != i as u32 + 1 {
            return Err(ParseError::semantic(format!(
                "{what} ids must be dense 1..{}; found {id} at position {}",
                ids.len(),
                i + 1
            )));
        }
    }
    Ok(())
}

fn matrix_to_json<S: Scalar>(m: &Matrix<S>, field: Field) -> Vec<Vec<EntryJson>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let v = m[(i, j)];
                    match field {
                        Field::Real => EntryJson::Real(v.re()),
                        Field::Complex => EntryJson::Complex([v.re(), v.im()]),
                    }
                })
                .collect()
        })
        .collect()
}

/// Canonical serialization of a problem: sorted ids, fixed field order,
/// pretty-printed JSON. Also the checksum domain.
pub fn emit_problem(p: &Problem) -> String {
    let (quiver, field) = (p.quiver(), p.field());
    let vertices: Vec<VertexJson> =
        quiver.vertices().iter().map(|v| VertexJson { id: v.id.0, dim: v.dim }).collect();
    let edges: Vec<EdgeJson> = quiver
        .edges()
        .iter()
        .map(|e| {
            let matrix = match p {
                Problem::Real(_, rep) => matrix_to_json(rep.matrix(e.id).unwrap(), field),
                Problem::Complex(_, rep) => matrix_to_json(rep.matrix(e.id).unwrap(), field),
            };
            EdgeJson { id: e.id.0, src: e.src.0, dst: e.dst.0, matrix }
        })
        .collect();
    let file = ProblemFile {
        format_version: FORMAT_VERSION,
        field: field.to_string(),
        vertices,
        edges,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}

pub fn problem_checksum(canonical: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

// ---------------------------------------------------------------------------
// Result files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorJson {
    pub vertex: u32,
    pub matrix: Vec<Vec<EntryJson>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedJson {
    pub edge: u32,
    pub shape: String,
    pub quasi_carrier: bool,
    pub matrix: Vec<Vec<EntryJson>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleJson {
    pub traversal: Vec<(u32, i8)>,
    pub anchor_vertices: Vec<u32>,
    pub majority_reversed: bool,
    pub carrier_edge: u32,
    pub core_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub lowest_vertex: u32,
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
    pub root: Option<u32>,
    pub cycle: Option<CycleJson>,
    pub tree_order: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionJson {
    pub factors: Vec<FactorJson>,
    pub reduced: Vec<ReducedJson>,
    pub components: Vec<ComponentJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectionJson {
    pub components: Vec<RejectedComponentJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectedComponentJson {
    pub lowest_vertex: u32,
    pub cycles: [Vec<u32>; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexCheckJson {
    pub vertex: u32,
    pub defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeCheckJson {
    pub edge: u32,
    pub residual: f64,
    pub residual_pass: bool,
    pub shape: String,
    pub shape_pass: bool,
    pub worst_violation: Option<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJson {
    pub kind: String,
    pub max_rel_err: Option<f64>,
    pub condition: Option<f64>,
    pub pass: Option<bool>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentCheckJson {
    pub lowest_vertex: u32,
    pub spectrum: SpectrumJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationJson {
    pub pass: bool,
    pub reconstruction_tol: f64,
    pub orthogonality_factor: f64,
    pub structural_tol: f64,
    pub spectrum_rtol: f64,
    pub condition_limit: f64,
    pub vertices: Vec<VertexCheckJson>,
    pub edges: Vec<EdgeCheckJson>,
    pub components: Vec<ComponentCheckJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub format_version: u32,
    pub tool_version: String,
    pub input_checksum: String,
    pub field: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<RejectionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
}

pub fn decomposition_to_json<S: Scalar>(d: &SchurDecomposition<S>) -> DecompositionJson {
    DecompositionJson {
        factors: d
            .factors
            .iter()
            .map(|(v, m)| FactorJson { vertex: v.0, matrix: matrix_to_json(m, d.field) })
            .collect(),
        reduced: d
            .reduced
            .iter()
            .map(|(e, r)| ReducedJson {
                edge: e.0,
                shape: r.shape.tag().to_string(),
                quasi_carrier: r.quasi_carrier,
                matrix: matrix_to_json(&r.matrix, d.field),
            })
            .collect(),
        components: d
            .components
            .iter()
            .map(|c| ComponentJson {
                lowest_vertex: c.lowest_vertex.0,
                vertices: c.vertices.iter().map(|v| v.0).collect(),
                edges: c.edges.iter().map(|e| e.0).collect(),
                root: c.root.map(|v| v.0),
                cycle: c.cycle.as_ref().map(|cy| CycleJson {
                    traversal: cy.traversal.iter().map(|(e, s)| (e.0, s.as_i8())).collect(),
                    anchor_vertices: cy.anchor_vertices.iter().map(|v| v.0).collect(),
                    majority_reversed: cy.majority_reversed,
                    carrier_edge: cy.carrier_edge.0,
                    core_dim: cy.core_dim,
                }),
                tree_order: c.tree_order.iter().map(|e| e.0).collect(),
            })
            .collect(),
    }
}

pub fn rejection_to_json(r: &Rejection) -> RejectionJson {
    RejectionJson {
        components: r
            .components
            .iter()
            .map(|c| RejectedComponentJson {
                lowest_vertex: c.lowest_vertex.0,
                cycles: [
                    c.cycles.0.iter().map(|e| e.0).collect(),
                    c.cycles.1.iter().map(|e| e.0).collect(),
                ],
            })
            .collect(),
    }
}

fn entry_to_scalar<S: Scalar>(e: EntryJson) -> Result<S, ParseError> {
    match (S::FIELD, e) {
        (Field::Real, EntryJson::Real(x)) => Ok(S::from_f64(x)),
        (Field::Complex, EntryJson::Complex([re, im])) => Ok(S::from_re_im(re, im)),
        _ => Err(ParseError::semantic("entry kind does not match the declared field")),
    }
}

pub fn json_to_matrix<S: Scalar>(rows: &[Vec<EntryJson>]) -> Result<Matrix<S>, ParseError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err(ParseError::semantic("ragged matrix"));
    }
    let mut m = Matrix::<S>::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            m[(i, j)] = entry_to_scalar(e)?;
        }
    }
    Ok(m)
}

/// Rebuild an in-memory decomposition from a result file (for `verify`).
pub fn json_to_decomposition<S: Scalar>(
    d: &DecompositionJson,
) -> Result<SchurDecomposition<S>, ParseError> {
    let mut factors = BTreeMap::new();
    for f in &d.factors {
        factors.insert(VertexId(f.vertex), json_to_matrix::<S>(&f.matrix)?);
    }
    let mut reduced = BTreeMap::new();
    for r in &d.reduced {
        let shape = ShapeClass::from_tag(&r.shape)
            .ok_or_else(|| ParseError::semantic(format!("unknown shape \"{}\"", r.shape)))?;
        reduced.insert(EdgeId(r.edge), ReducedEdge {
            matrix: json_to_matrix::<S>(&r.matrix)?,
            shape,
            quasi_carrier: r.quasi_carrier,
        });
    }
    let components = d
        .components
        .iter()
        .map(|c| {
            Ok(ComponentSummary {
                lowest_vertex: VertexId(c.lowest_vertex),
                vertices: c.vertices.iter().map(|v| VertexId(*v)).collect(),
                edges: c.edges.iter().map(|e| EdgeId(*e)).collect(),
                root: c.root.map(VertexId),
                cycle: c
                    .cycle
                    .as_ref()
                    .map(|cy| -> Result<CycleProvenance, ParseError> {
                        let traversal = cy
                            .traversal
                            .iter()
                            .map(|(e, s)| {
                                let sign = match s {
                                    1 => Sign::Forward,
                                    -1 => Sign::Inverse,
                                    _ => {
                                        return Err(ParseError::semantic(
                                            "signs must be +1 or -1",
                                        ))
                                    }
                                };
                                Ok((EdgeId(*e), sign))
                            })
                            .collect::<Result<Vec<_>, ParseError>>()?;
                        Ok(CycleProvenance {
                            traversal,
                            anchor_vertices: cy.anchor_vertices.iter().map(|v| VertexId(*v)).collect(),
                            majority_reversed: cy.majority_reversed,
                            carrier_edge: EdgeId(cy.carrier_edge),
                            core_dim: cy.core_dim,
                        })
                    })
                    .transpose()?,
                tree_order: c.tree_order.iter().map(|e| EdgeId(*e)).collect(),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(SchurDecomposition { field: S::FIELD, factors, reduced, components })
}

pub fn parse_result(bytes: &[u8]) -> Result<ResultFile, ParseError> {
    let file: ResultFile = serde_json::from_slice(bytes)?;
    if file.format_version != FORMAT_VERSION {
        return Err(ParseError::semantic(format!(
            "unsupported format_version {}",
            file.format_version
        )));
    }
    Ok(file)
}

pub fn emit_result(r: &ResultFile) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("serializable");
    s.push('\n');
    s
}

/// Write-temp-then-rename so readers never observe a half-written file.
pub fn atomic_write(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
