//! Quiver model: directed multigraphs with per-vertex dimensions,
//! pseudoforest classification, and the traversal plans the reduction
//! engine consumes.
//!
//! Everything here is purely combinatorial and deterministic: ties are
//! always broken toward the lowest vertex id, then the lowest edge id.

use std::collections::BTreeMap;

use crate::error::QuiverError;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// 1-based vertex identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// 1-based edge identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl std::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    /// Dimension of the vector space at this vertex (≥ 1).
    pub dim: usize,
}

/// Directed edge. The matrix attached to it has `dim(dst)` rows and
/// `dim(src)` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub dst: VertexId,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }

    /// The endpoint other than `v`; for a loop this is `v` itself.
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.src == v {
            self.dst
        } else {
            self.src
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.src == v || self.dst == v
    }
}

/// Directed multigraph with vertex dimensions. Loops and parallel edges are
/// allowed. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Quiver {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl Quiver {
    /// Validates id uniqueness, dimension positivity, and endpoint existence.
    pub fn new(mut vertices: Vec<Vertex>, mut edges: Vec<Edge>) -> Result<Self, QuiverError> {
        vertices.sort_by_key(|v| v.id);
        edges.sort_by_key(|e| e.id);
        for w in vertices.windows(2) {
            if w[0].id == w[1].id {
                return Err(QuiverError::Invalid(format!("duplicate vertex id {}", w[0].id)));
            }
        }
        for w in edges.windows(2) {
            if w[0].id == w[1].id {
                return Err(QuiverError::Invalid(format!("duplicate edge id {}", w[0].id)));
            }
        }
        for v in &vertices {
            if v.dim == 0 {
                return Err(QuiverError::Invalid(format!("{} has dimension 0", v.id)));
            }
        }
        let known: Vec<VertexId> = vertices.iter().map(|v| v.id).collect();
        for e in &edges {
            for end in [e.src, e.dst] {
                if known.binary_search(&end).is_err() {
                    return Err(QuiverError::Invalid(format!(
                        "{} references missing vertex {}",
                        e.id, end
                    )));
                }
            }
        }
        Ok(Quiver { vertices, edges })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        let i = self.vertices.binary_search_by_key(&id, |v| v.id).expect("unknown vertex");
        &self.vertices[i]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        let i = self.edges.binary_search_by_key(&id, |e| e.id).expect("unknown edge");
        &self.edges[i]
    }

    pub fn dim(&self, id: VertexId) -> usize {
        self.vertex(id).dim
    }

    /// Incident edge ids (ascending); loops listed once.
    pub fn incident(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges.iter().filter(|e| e.touches(v)).map(|e| e.id).collect()
    }

    /// Undirected degree; loops count twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .map(|e| (e.src == v) as usize + (e.dst == v) as usize)
            .sum()
    }
}

/// The matrices attached to the edges of a quiver, over scalar field `S`.
#[derive(Debug, Clone)]
pub struct Representation<S> {
    matrices: BTreeMap<EdgeId, Matrix<S>>,
}

impl<S: Scalar> Representation<S> {
    pub fn new(matrices: BTreeMap<EdgeId, Matrix<S>>) -> Self {
        Representation { matrices }
    }

    pub fn matrix(&self, e: EdgeId) -> Option<&Matrix<S>> {
        self.matrices.get(&e)
    }

    pub fn matrices(&self) -> &BTreeMap<EdgeId, Matrix<S>> {
        &self.matrices
    }
}

/// One dimension violation found by [`validate_dimensions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimViolation {
    Missing { edge: EdgeId },
    Shape { edge: EdgeId, expect_rows: usize, expect_cols: usize, got_rows: usize, got_cols: usize },
}

impl std::fmt::Display for DimViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DimViolation::Missing { edge } => write!(f, "{edge}: no matrix attached"),
            DimViolation::Shape { edge, expect_rows, expect_cols, got_rows, got_cols } => write!(
                f,
                "{edge}: expected {expect_rows}x{expect_cols}, got {got_rows}x{got_cols}"
            ),
        }
    }
}

/// Check that each edge carries a `dim(dst) × dim(src)` matrix.
pub fn validate_dimensions<S: Scalar>(quiver: &Quiver, rep: &Representation<S>) -> Vec<DimViolation> {
    let mut out = Vec::new();
    for e in quiver.edges() {
        match rep.matrix(e.id) {
            None => out.push(DimViolation::Missing { edge: e.id }),
            Some(m) => {
                let (er, ec) = (quiver.dim(e.dst), quiver.dim(e.src));
                if m.rows() != er || m.cols() != ec {
                    out.push(DimViolation::Shape {
                        edge: e.id,
                        expect_rows: er,
                        expect_cols: ec,
                        got_rows: m.rows(),
                        got_cols: m.cols(),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Tree,
    PseudotreeWithCycle,
    Rejected,
}

/// A connected component of the underlying undirected multigraph.
#[derive(Debug, Clone)]
pub struct Component {
    /// Ascending vertex ids.
    pub vertices: Vec<VertexId>,
    /// Ascending edge ids.
    pub edges: Vec<EdgeId>,
    pub kind: ComponentKind,
    /// Two distinct undirected cycles witnessing rejection (edge id lists).
    pub rejection_evidence: Option<(Vec<EdgeId>, Vec<EdgeId>)>,
}

impl Component {
    pub fn lowest_vertex(&self) -> VertexId {
        self.vertices[0]
    }
}

#[derive(Debug, Clone)]
pub struct PseudoforestReport {
    /// Components ordered by their lowest vertex id.
    pub components: Vec<Component>,
    pub is_pseudoforest: bool,
}

/// Decompose into connected components and classify each by its edge/vertex
/// count: tree (|E| = |V|−1), pseudotree with cycle (|E| = |V|), rejected
/// (|E| > |V|). Total and deterministic.
pub fn classify(quiver: &Quiver) -> PseudoforestReport {
    let mut comp_of: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut components: Vec<(Vec<VertexId>, Vec<EdgeId>)> = Vec::new();

    for v in quiver.vertices() {
        if comp_of.contains_key(&v.id) {
            continue;
        }
        let idx = components.len();
        let mut stack = vec![v.id];
        comp_of.insert(v.id, idx);
        let mut verts = Vec::new();
        while let Some(u) = stack.pop() {
            verts.push(u);
            for eid in quiver.incident(u) {
                let e = quiver.edge(eid);
                let w = e.other(u);
                if !comp_of.contains_key(&w) {
                    comp_of.insert(w, idx);
                    stack.push(w);
                }
            }
        }
        verts.sort();
        components.push((verts, Vec::new()));
    }
    for e in quiver.edges() {
        let idx = comp_of[&e.src];
        components[idx].1.push(e.id);
    }

    let mut out = Vec::new();
    for (verts, edges) in components {
        let kind = if edges.len() + 1 == verts.len() {
            ComponentKind::Tree
        } else if edges.len() == verts.len() {
            ComponentKind::PseudotreeWithCycle
        } else {
            ComponentKind::Rejected
        };
        let evidence = if kind == ComponentKind::Rejected {
            Some(two_cycles_evidence(quiver, &verts, &edges))
        } else {
            None
        };
        out.push(Component { vertices: verts, edges, kind, rejection_evidence: evidence });
    }
    out.sort_by_key(|c| c.lowest_vertex());
    let ok = out.iter().all(|c| c.kind != ComponentKind::Rejected);
    PseudoforestReport { components: out, is_pseudoforest: ok }
}

/// For a component with |E| > |V|: produce two distinct undirected cycles.
/// Build a BFS spanning tree; each non-tree edge closes one cycle with the
/// tree paths to the root. The component has at least two non-tree edges.
fn two_cycles_evidence(
    quiver: &Quiver,
    verts: &[VertexId],
    edges: &[EdgeId],
) -> (Vec<EdgeId>, Vec<EdgeId>) {
    use std::collections::VecDeque;
    let root = verts[0];
    // parent edge per vertex in the BFS tree
    let mut parent: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
    let mut seen: Vec<VertexId> = vec![root];
    let mut tree_edges: Vec<EdgeId> = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for eid in quiver.incident(u) {
            if !edges.contains(&eid) {
                continue;
            }
            let e = quiver.edge(eid);
            if e.is_loop() || tree_edges.contains(&eid) {
                continue;
            }
            let w = e.other(u);
            if !seen.contains(&w) {
                seen.push(w);
                parent.insert(w, (u, eid));
                tree_edges.push(eid);
                queue.push_back(w);
            }
        }
    }
    let path_to_root = |mut v: VertexId| -> Vec<(VertexId, EdgeId)> {
        let mut path = Vec::new();
        while let Some(&(p, e)) = parent.get(&v) {
            path.push((v, e));
            v = p;
        }
        path
    };
    // A non-tree edge e = (u, w) closes the cycle: e plus the symmetric
    // difference of the root paths of u and w. Loops close by themselves.
    let cycle_of = |eid: EdgeId| -> Vec<EdgeId> {
        let e = quiver.edge(eid);
        if e.is_loop() {
            return vec![eid];
        }
        let pu = path_to_root(e.src);
        let pw = path_to_root(e.dst);
        let mut cycle = vec![eid];
        for (_, pe) in &pu {
            if !pw.iter().any(|(_, qe)| qe == pe) {
                cycle.push(*pe);
            }
        }
        for (_, qe) in &pw {
            if !pu.iter().any(|(_, pe)| pe == qe) {
                cycle.push(*qe);
            }
        }
        cycle.sort();
        cycle
    };
    let non_tree: Vec<EdgeId> =
        edges.iter().copied().filter(|e| !tree_edges.contains(e)).collect();
    debug_assert!(non_tree.len() >= 2);
    (cycle_of(non_tree[0]), cycle_of(non_tree[1]))
}

/// Orientation sign of an edge relative to a traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// Edge direction agrees with the traversal (+1).
    Forward,
    /// Edge direction opposes the traversal (−1).
    Inverse,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Forward => Sign::Inverse,
            Sign::Inverse => Sign::Forward,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Forward => 1,
            Sign::Inverse => -1,
        }
    }
}

/// The unique undirected cycle of a pseudotree component.
///
/// `edges[t]` is traversed between `anchor_vertices[t]` and
/// `anchor_vertices[(t+1) % n']`; its sign says whether the edge's own
/// direction agrees with that traversal.
#[derive(Debug, Clone)]
pub struct CycleInfo {
    pub edges: Vec<(EdgeId, Sign)>,
    pub anchor_vertices: Vec<VertexId>,
}

impl CycleInfo {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Same cycle traversed the other way round, keeping the start vertex.
    pub fn reversed(&self) -> CycleInfo {
        let p = self.len();
        if p <= 1 {
            return self.clone();
        }
        let mut verts = vec![self.anchor_vertices[0]];
        for t in (1..p).rev() {
            verts.push(self.anchor_vertices[t]);
        }
        let mut edges = Vec::with_capacity(p);
        for j in 0..p {
            let (id, s) = self.edges[(p - 1 - j + p) % p];
            edges.push((id, s.flip()));
        }
        CycleInfo { edges, anchor_vertices: verts }
    }
}

/// Find the unique cycle of a pseudotree-with-cycle component.
///
/// Deterministic: traversal starts at the lowest vertex id on the cycle and
/// leaves it through the lowest-id incident cycle edge.
pub fn find_cycle(quiver: &Quiver, component: &Component) -> Result<CycleInfo, QuiverError> {
    if component.kind != ComponentKind::PseudotreeWithCycle {
        return Err(QuiverError::Contract(
            "find_cycle requires a pseudotree component that contains a cycle".into(),
        ));
    }
    // Peel leaves until only the cycle remains.
    let mut live_edges: Vec<EdgeId> = component.edges.clone();
    let mut live_verts: Vec<VertexId> = component.vertices.clone();
    loop {
        let mut removed = false;
        let mut v_idx = 0;
        while v_idx < live_verts.len() {
            let v = live_verts[v_idx];
            let inc: Vec<EdgeId> = live_edges
                .iter()
                .copied()
                .filter(|&eid| quiver.edge(eid).touches(v))
                .collect();
            let deg: usize = inc
                .iter()
                .map(|&eid| {
                    let e = quiver.edge(eid);
                    (e.src == v) as usize + (e.dst == v) as usize
                })
                .sum();
            if deg <= 1 {
                live_edges.retain(|e| !inc.contains(e));
                live_verts.remove(v_idx);
                removed = true;
            } else {
                v_idx += 1;
            }
        }
        if !removed {
            break;
        }
    }
    debug_assert_eq!(live_edges.len(), live_verts.len());

    let start = live_verts[0];
    let mut verts = vec![start];
    let mut edges: Vec<(EdgeId, Sign)> = Vec::new();
    let mut current = start;
    let mut used: Vec<EdgeId> = Vec::new();
    loop {
        let mut candidates: Vec<EdgeId> = live_edges
            .iter()
            .copied()
            .filter(|&eid| quiver.edge(eid).touches(current) && !used.contains(&eid))
            .collect();
        candidates.sort();
        let eid = match candidates.first() {
            Some(&e) => e,
            None => break,
        };
        let e = quiver.edge(eid);
        let (next, sign) = if e.is_loop() {
            (current, Sign::Forward)
        } else if e.src == current {
            (e.dst, Sign::Forward)
        } else {
            (e.src, Sign::Inverse)
        };
        used.push(eid);
        edges.push((eid, sign));
        if next == start {
            break;
        }
        verts.push(next);
        current = next;
    }
    debug_assert_eq!(edges.len(), live_edges.len());
    Ok(CycleInfo { edges, anchor_vertices: verts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionClass {
    /// Edge points away from the already-fixed vertex (src is fixed).
    FromFixed,
    /// Edge points toward the already-fixed vertex (dst is fixed).
    ToFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStep {
    pub edge: EdgeId,
    pub fixed: VertexId,
    pub free: VertexId,
    pub class: DirectionClass,
}

/// Order in which the tree part of a component is reduced.
#[derive(Debug, Clone)]
pub struct TraversalPlan {
    pub cycle: Option<CycleInfo>,
    /// Designated root for pure trees (lowest vertex id); its factor is the
    /// identity.
    pub root: Option<VertexId>,
    /// Breadth-first outward from the cycle (or root), lowest vertex id
    /// first, then lowest edge id.
    pub steps: Vec<TreeStep>,
}

pub fn plan_traversal(
    quiver: &Quiver,
    component: &Component,
    cycle: Option<&CycleInfo>,
) -> Result<TraversalPlan, QuiverError> {
    match component.kind {
        ComponentKind::Rejected => {
            return Err(QuiverError::Contract(
                "plan_traversal requires a tree or pseudotree component".into(),
            ))
        }
        ComponentKind::PseudotreeWithCycle if cycle.is_none() => {
            return Err(QuiverError::Contract("cycle info required for this component".into()))
        }
        ComponentKind::Tree if cycle.is_some() => {
            return Err(QuiverError::Contract("tree components have no cycle".into()))
        }
        _ => {}
    }

    use std::collections::VecDeque;
    let cycle_edges: Vec<EdgeId> = cycle.map_or(Vec::new(), |c| c.edges.iter().map(|(e, _)| *e).collect());
    let mut fixed: Vec<VertexId> = match cycle {
        Some(c) => {
            let mut v = c.anchor_vertices.clone();
            v.sort();
            v
        }
        None => vec![component.lowest_vertex()],
    };
    let root = if cycle.is_none() { Some(component.lowest_vertex()) } else { None };

    let mut queue: VecDeque<VertexId> = fixed.iter().copied().collect();
    let mut steps = Vec::new();
    let mut done_edges: Vec<EdgeId> = cycle_edges.clone();
    while let Some(u) = queue.pop_front() {
        for eid in quiver.incident(u) {
            if !component.edges.contains(&eid) || done_edges.contains(&eid) {
                continue;
            }
            let e = quiver.edge(eid);
            let w = e.other(u);
            if fixed.contains(&w) {
                // A non-cycle edge between two fixed vertices cannot occur in
                // a pseudotree; loops outside the cycle neither.
                continue;
            }
            done_edges.push(eid);
            let class =
                if e.src == u { DirectionClass::FromFixed } else { DirectionClass::ToFixed };
            steps.push(TreeStep { edge: eid, fixed: u, free: w, class });
            fixed.push(w);
            queue.push_back(w);
        }
    }
    debug_assert_eq!(done_edges.len(), component.edges.len());
    Ok(TraversalPlan { cycle: cycle.cloned(), root, steps })
}
