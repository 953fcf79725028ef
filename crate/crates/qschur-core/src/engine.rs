//! End-to-end triangularization of a quiver representation.
//!
//! For each pseudotree component the cycle is reduced first (fixing the
//! factors of every cycle vertex), then the trees hanging off it are swept
//! breadth-first: an edge pointing away from its fixed vertex is resolved by
//! a QR step, an edge pointing toward it by an RQ step. Pure trees start
//! from the lowest vertex with an identity factor. Components never share
//! factors and are processed independently.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::error::{LinalgError, QuiverError};
use crate::linalg::cycle::reduce_cycle;
use crate::linalg::householder::{qr, rq};
use crate::linalg::{IterOpts, Signature};
use crate::matrix::Matrix;
use crate::quiver::{
    classify, find_cycle, plan_traversal, validate_dimensions, Component, ComponentKind,
    CycleInfo, DimViolation, DirectionClass, EdgeId, Quiver, Representation, Sign, VertexId,
};
use crate::scalar::{Field, Scalar};

/// Zero-pattern classes of the reduced matrices.
///
/// `TallA`/`WideD` have zeros strictly below the main diagonal (QR-form,
/// diagonal anchored top-left); `TallC`/`WideB` have zeros in the lower-left
/// corner (RQ-form, diagonal anchored bottom-right). Square edges are plain
/// upper-triangular, except the designated carrier of a real cycle which may
/// hold 2×2 diagonal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeClass {
    SquareUpper,
    SquareQuasiUpper,
    TallA,
    WideB,
    TallC,
    WideD,
}

impl ShapeClass {
    /// Whether position (i, j) of a rows×cols matrix must be zero.
    pub fn is_zero_position(self, rows: usize, cols: usize, i: usize, j: usize) -> bool {
        let (i, j) = (i as isize, j as isize);
        match self {
            ShapeClass::SquareUpper | ShapeClass::TallA | ShapeClass::WideD => i > j,
            ShapeClass::SquareQuasiUpper => i > j + 1,
            ShapeClass::WideB | ShapeClass::TallC => i - j > rows as isize - cols as isize,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ShapeClass::SquareUpper => "square_upper",
            ShapeClass::SquareQuasiUpper => "square_quasi_upper",
            ShapeClass::TallA => "tall_a",
            ShapeClass::WideB => "wide_b",
            ShapeClass::TallC => "tall_c",
            ShapeClass::WideD => "wide_d",
        }
    }

    pub fn from_tag(tag: &str) -> Option<ShapeClass> {
        Some(match tag {
            "square_upper" => ShapeClass::SquareUpper,
            "square_quasi_upper" => ShapeClass::SquareQuasiUpper,
            "tall_a" => ShapeClass::TallA,
            "wide_b" => ShapeClass::WideB,
            "tall_c" => ShapeClass::TallC,
            "wide_d" => ShapeClass::WideD,
            _ => return None,
        })
    }
}

/// Cycle orientation choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Keep the canonical traversal.
    Forward,
    /// Traverse the cycle the other way round.
    Reversed,
}

/// The orientation more edges agree with; ties resolve toward the direction
/// of the lowest-id cycle edge.
pub fn majority_direction(cycle: &CycleInfo) -> Orientation {
    let forward = cycle.edges.iter().filter(|(_, s)| *s == Sign::Forward).count();
    let inverse = cycle.len() - forward;
    if forward > inverse {
        Orientation::Forward
    } else if inverse > forward {
        Orientation::Reversed
    } else {
        let (_, sign) = cycle.edges.iter().min_by_key(|(id, _)| *id).unwrap();
        match sign {
            Sign::Forward => Orientation::Forward,
            Sign::Inverse => Orientation::Reversed,
        }
    }
}

/// How an edge participates in the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    /// On the cycle; `aligned` = agrees with the majority orientation.
    Cycle { aligned: bool, carrier: bool },
    /// Tree edge, reduced from its fixed endpoint.
    Tree { class: DirectionClass },
}

/// Shape an edge's reduced matrix lands in.
///
/// Edges reduced "in the arrow direction" (majority-aligned cycle edges and
/// from-fixed tree edges) end in QR-form: tall a), wide d). Edges reduced
/// against their arrow (opposing cycle edges and to-fixed tree edges) end in
/// RQ-form: tall c), wide b). Square edges are upper-triangular; the carrier
/// of a real cycle is quasi-upper-triangular.
pub fn expected_shape(rows: usize, cols: usize, role: EdgeRole, field: Field) -> ShapeClass {
    if rows == cols {
        return match role {
            EdgeRole::Cycle { carrier: true, .. } if field == Field::Real => {
                ShapeClass::SquareQuasiUpper
            }
            _ => ShapeClass::SquareUpper,
        };
    }
    let qr_form = match role {
        EdgeRole::Cycle { aligned, .. } => aligned,
        EdgeRole::Tree { class } => class == DirectionClass::FromFixed,
    };
    match (qr_form, rows > cols) {
        (true, true) => ShapeClass::TallA,
        (true, false) => ShapeClass::WideD,
        (false, true) => ShapeClass::TallC,
        (false, false) => ShapeClass::WideB,
    }
}

/// One reduced edge matrix with its declared shape.
#[derive(Debug, Clone)]
pub struct ReducedEdge<S> {
    pub matrix: Matrix<S>,
    pub shape: ShapeClass,
    /// Set on the designated quasi-block carrier of its component's cycle.
    pub quasi_carrier: bool,
}

/// Provenance of one reduced cycle.
#[derive(Debug, Clone)]
pub struct CycleProvenance {
    /// Majority-oriented traversal actually used by the kernel.
    pub traversal: Vec<(EdgeId, Sign)>,
    pub anchor_vertices: Vec<VertexId>,
    pub majority_reversed: bool,
    pub carrier_edge: EdgeId,
    pub core_dim: usize,
}

#[derive(Debug, Clone)]
pub struct ComponentSummary {
    pub lowest_vertex: VertexId,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub cycle: Option<CycleProvenance>,
    pub root: Option<VertexId>,
    /// Tree steps in reduction order.
    pub tree_order: Vec<EdgeId>,
}

#[derive(Debug, Clone)]
pub struct SchurDecomposition<S> {
    pub field: Field,
    pub factors: BTreeMap<VertexId, Matrix<S>>,
    pub reduced: BTreeMap<EdgeId, ReducedEdge<S>>,
    /// Ascending by lowest vertex id.
    pub components: Vec<ComponentSummary>,
}

/// Why a quiver cannot be reduced: some component carries two distinct
/// cycles, so one matrix and its transpose-mate would need to be upper- and
/// lower-triangular at once.
#[derive(Debug, Clone)]
pub struct Rejection {
    pub components: Vec<RejectedComponent>,
}

#[derive(Debug, Clone)]
pub struct RejectedComponent {
    pub lowest_vertex: VertexId,
    pub cycles: (Vec<EdgeId>, Vec<EdgeId>),
}

#[derive(Debug, Clone)]
pub enum TriangularizeOutcome<S> {
    Decomposition(SchurDecomposition<S>),
    Rejected(Rejection),
}

#[derive(Debug, Error)]
pub enum EngineError<S: Scalar> {
    #[error("dimension validation failed: {}", format_violations(.0))]
    Dimensions(Vec<DimViolation>),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error("component at {component}: {source}")]
    Kernel {
        component: VertexId,
        #[source]
        source: LinalgError<S>,
    },
}

fn format_violations(v: &[DimViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone)]
pub struct EngineOpts {
    pub iter: IterOpts,
    /// Relative structural-zero threshold (scaled by each edge's ‖A‖_F).
    pub struct_tol: f64,
}

impl Default for EngineOpts {
    fn default() -> Self {
        EngineOpts { iter: IterOpts::default(), struct_tol: 1e-10 }
    }
}

/// One tree reduction step. `FromFixed`: the free factor is the Q of
/// QR(A·F) and T = R. `ToFixed`: the free factor is the Q of RQ(Fᴴ·A) and
/// T = R.
pub fn tree_step<S: Scalar>(
    class: DirectionClass,
    fixed_factor: &Matrix<S>,
    a: &Matrix<S>,
) -> (Matrix<S>, Matrix<S>) {
    match class {
        DirectionClass::FromFixed => {
            let f = qr(&a.mul(fixed_factor));
            (f.q, f.r)
        }
        DirectionClass::ToFixed => {
            let f = rq(&fixed_factor.adjoint().mul(a));
            (f.q, f.r)
        }
    }
}

/// Reduce every component of a pseudoforest representation, or report the
/// obstruction.
pub fn triangularize<S: Scalar>(
    quiver: &Quiver,
    rep: &Representation<S>,
    opts: &EngineOpts,
) -> Result<TriangularizeOutcome<S>, EngineError<S>> {
    let violations = validate_dimensions(quiver, rep);
    if !violations.is_empty() {
        return Err(EngineError::Dimensions(violations));
    }
    let report = classify(quiver);
    if !report.is_pseudoforest {
        let components = report
            .components
            .iter()
            .filter(|c| c.kind == ComponentKind::Rejected)
            .map(|c| RejectedComponent {
                lowest_vertex: c.lowest_vertex(),
                cycles: c.rejection_evidence.clone().expect("rejected components carry evidence"),
            })
            .collect();
        return Ok(TriangularizeOutcome::Rejected(Rejection { components }));
    }

    let mut factors = BTreeMap::new();
    let mut reduced = BTreeMap::new();
    let mut summaries = Vec::new();
    for component in &report.components {
        let summary =
            triangularize_pseudotree(quiver, rep, component, opts, &mut factors, &mut reduced)
                .map_err(|source| EngineError::Kernel {
                    component: component.lowest_vertex(),
                    source,
                })?;
        summaries.push(summary);
    }
    Ok(TriangularizeOutcome::Decomposition(SchurDecomposition {
        field: S::FIELD,
        factors,
        reduced,
        components: summaries,
    }))
}

/// Reduce one tree or pseudotree component, appending its factors and
/// reduced matrices to the global maps.
pub fn triangularize_pseudotree<S: Scalar>(
    quiver: &Quiver,
    rep: &Representation<S>,
    component: &Component,
    opts: &EngineOpts,
    factors: &mut BTreeMap<VertexId, Matrix<S>>,
    reduced: &mut BTreeMap<EdgeId, ReducedEdge<S>>,
) -> Result<ComponentSummary, LinalgError<S>> {
    let cycle = match component.kind {
        ComponentKind::PseudotreeWithCycle => {
            Some(find_cycle(quiver, component).map_err(contract_to_linalg)?)
        }
        ComponentKind::Tree => None,
        ComponentKind::Rejected => {
            return Err(LinalgError::Contract("rejected component reached the engine".into()))
        }
    };
    let plan = plan_traversal(quiver, component, cycle.as_ref()).map_err(contract_to_linalg)?;

    let mut cycle_provenance = None;
    if let Some(ref info) = cycle {
        let majority = majority_direction(info);
        let oriented = match majority {
            Orientation::Forward => info.clone(),
            Orientation::Reversed => info.reversed(),
        };
        let mats: Vec<Matrix<S>> = oriented
            .edges
            .iter()
            .map(|(eid, _)| rep.matrix(*eid).expect("validated").clone())
            .collect();
        let signs = Signature::new(oriented.edges.iter().map(|(_, s)| *s).collect());
        let norms: Vec<f64> = mats.iter().map(|m| m.norm_fro()).collect();
        let st = opts.struct_tol;
        let reduction =
            reduce_cycle(&mats, &signs, &opts.iter, |e| st * norms[e].max(1.0))?;

        for (t, v) in oriented.anchor_vertices.iter().enumerate() {
            factors.insert(*v, reduction.vertex_q[t].clone());
        }
        let carrier_edge = oriented.edges[reduction.carrier].0;
        for (e, (eid, sign)) in oriented.edges.iter().enumerate() {
            let m = &reduction.reduced[e];
            let role = EdgeRole::Cycle {
                aligned: *sign == Sign::Forward,
                carrier: e == reduction.carrier,
            };
            let shape = expected_shape(m.rows(), m.cols(), role, S::FIELD);
            reduced.insert(*eid, ReducedEdge {
                matrix: m.clone(),
                shape,
                quasi_carrier: e == reduction.carrier,
            });
        }
        cycle_provenance = Some(CycleProvenance {
            traversal: oriented.edges.clone(),
            anchor_vertices: oriented.anchor_vertices.clone(),
            majority_reversed: majority == Orientation::Reversed,
            carrier_edge,
            core_dim: reduction.core_dim,
        });
    }

    if let Some(root) = plan.root {
        factors.insert(root, Matrix::identity(quiver.dim(root)));
    }
    // Isolated vertices inside the component (possible only as the root) and
    // every planned free vertex receive factors below.
    let mut tree_order = Vec::new();
    for step in &plan.steps {
        let a = rep.matrix(step.edge).expect("validated");
        let fixed = factors.get(&step.fixed).expect("traversal fixes vertices in order").clone();
        let (free_factor, mut t) = tree_step(step.class, &fixed, a);
        t.flush_below(opts.struct_tol * a.norm_fro());
        let role = EdgeRole::Tree { class: step.class };
        let shape = expected_shape(t.rows(), t.cols(), role, S::FIELD);
        factors.insert(step.free, free_factor);
        reduced.insert(step.edge, ReducedEdge { matrix: t, shape, quasi_carrier: false });
        tree_order.push(step.edge);
    }

    Ok(ComponentSummary {
        lowest_vertex: component.lowest_vertex(),
        vertices: component.vertices.clone(),
        edges: component.edges.clone(),
        cycle: cycle_provenance,
        root: plan.root,
        tree_order,
    })
}

fn contract_to_linalg<S: Scalar>(e: QuiverError) -> LinalgError<S> {
    LinalgError::Contract(e.to_string())
}
