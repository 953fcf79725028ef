//! Independent checks of a decomposition against the original problem.
//!
//! Nothing here calls back into the reduction engine: the checks use plain
//! matrix products, norms, triangular solves, and the block-cyclic
//! embedding oracle. Tolerances are configuration; the report always carries
//! the raw numbers so thresholds can be revisited after the fact.

use num_complex::Complex64;

use crate::engine::{SchurDecomposition, ShapeClass};
use crate::linalg::lu::lu_decompose;
use crate::linalg::oracle::cyclic_embedding_oracle;
use crate::linalg::Signature;
use crate::matrix::Matrix;
use crate::quiver::{EdgeId, Quiver, Representation, Sign, VertexId};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Per-edge residual bound, scaled by max(1, ‖A‖_F).
    pub reconstruction_tol: f64,
    /// Orthogonality defect bound per vertex, scaled by the dimension.
    pub orthogonality_factor: f64,
    /// Structural-zero threshold, scaled by ‖A‖_F of the original edge.
    pub structural_tol: f64,
    /// Relative eigenvalue agreement for the spectrum check.
    pub spectrum_rtol: f64,
    /// Above this condition estimate the spectrum check is advisory.
    pub condition_limit: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            reconstruction_tol: 1e-10,
            orthogonality_factor: 1e-12,
            structural_tol: 1e-10,
            spectrum_rtol: 1e-6,
            condition_limit: 1e8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VertexCheck {
    pub vertex: VertexId,
    pub defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct EdgeCheck {
    pub edge: EdgeId,
    pub residual: f64,
    pub residual_pass: bool,
    pub declared: ShapeClass,
    pub shape_pass: bool,
    /// Largest entry found in a declared-zero position, if any.
    pub worst_violation: Option<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub enum SpectrumCheck {
    /// No square cycle, or a singular matrix on an inverse edge.
    NotApplicable { reason: String },
    /// Ill-conditioned problem: numbers reported, not gating.
    Advisory { max_rel_err: f64, condition: f64 },
    Checked { max_rel_err: f64, pass: bool },
}

#[derive(Debug, Clone)]
pub struct ComponentCheck {
    pub lowest_vertex: VertexId,
    pub spectrum: SpectrumCheck,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub config: VerifyConfig,
    pub vertices: Vec<VertexCheck>,
    pub edges: Vec<EdgeCheck>,
    pub components: Vec<ComponentCheck>,
    pub pass: bool,
}

/// ‖QᴴQ − I‖_F.
pub fn check_orthogonality<S: Scalar>(q: &Matrix<S>) -> f64 {
    q.orthogonality_defect()
}

/// Residual ‖Q_dstᴴ A Q_src − T‖_F per edge.
pub fn check_reconstruction<S: Scalar>(
    decomp: &SchurDecomposition<S>,
    quiver: &Quiver,
    rep: &Representation<S>,
) -> Vec<(EdgeId, f64)> {
    quiver
        .edges()
        .iter()
        .map(|edge| {
            let a = rep.matrix(edge.id).expect("edge matrix present");
            let t = &decomp.reduced[&edge.id];
            let recon = decomp.factors[&edge.dst]
                .adjoint()
                .mul(a)
                .mul(&decomp.factors[&edge.src]);
            (edge.id, recon.sub(&t.matrix).norm_fro())
        })
        .collect()
}

/// Does the observed zero pattern contain the declared one? For the quasi
/// carrier (declared `SquareQuasiUpper`, or a rectangular carrier over ℝ)
/// first-subdiagonal entries inside the core are legal when they form
/// non-overlapping 2×2 blocks. With `own_discriminant` (loops: the reduced
/// matrix is its own cycle product) each block must additionally carry a
/// complex-conjugate pair; for longer cycles that pair condition applies to
/// the product of the window blocks across all cycle factors and is checked
/// by [`verify_all`] instead.
pub fn check_shape<S: Scalar>(
    t: &Matrix<S>,
    declared: ShapeClass,
    quasi_carrier: bool,
    core_dim: usize,
    own_discriminant: bool,
    tol: f64,
) -> (bool, Option<(usize, usize, f64)>) {
    let (rows, cols) = (t.rows(), t.cols());
    let mut worst: Option<(usize, usize, f64)> = None;
    let quasi = quasi_carrier || declared == ShapeClass::SquareQuasiUpper;
    for i in 0..rows {
        for j in 0..cols {
            if !declared.is_zero_position(rows, cols, i, j) {
                continue;
            }
            if quasi && S::FIELD == Field::Real && i == j + 1 && i < core_dim {
                continue;
            }
            let mag = t[(i, j)].abs();
            if mag > tol && worst.map_or(true, |(_, _, w)| mag > w) {
                worst = Some((i, j, mag));
            }
        }
    }
    if worst.is_some() {
        return (false, worst);
    }
    if quasi && S::FIELD == Field::Real {
        // Subdiagonal entries must form non-overlapping 2×2 blocks.
        let k = rows.min(core_dim);
        let mut i = 1;
        while i < k {
            if t[(i, i - 1)].abs() > tol {
                let next = if i + 1 < k { t[(i + 1, i)].abs() } else { 0.0 };
                if next > tol {
                    return (false, Some((i + 1, i, next)));
                }
                if own_discriminant {
                    let tr = t[(i - 1, i - 1)].re() + t[(i, i)].re();
                    let det = t[(i - 1, i - 1)].re() * t[(i, i)].re()
                        - t[(i - 1, i)].re() * t[(i, i - 1)].re();
                    if tr * tr - 4.0 * det >= 0.0 {
                        return (false, Some((i, i - 1, t[(i, i - 1)].abs())));
                    }
                }
                i += 2;
                continue;
            }
            i += 1;
        }
    }
    (true, None)
}

/// Product-level validity of the carrier's 2×2 blocks on a cycle: the signed
/// product of the window blocks across all factors must have a negative
/// discriminant. Returns the first offending subdiagonal position.
fn carrier_blocks_product_check<S: Scalar>(
    ts: &[Matrix<S>],
    signs: &[Sign],
    carrier_pos: usize,
    tol: f64,
) -> Option<(usize, usize, f64)> {
    let carrier = &ts[carrier_pos];
    let k = carrier.rows().min(carrier.cols());
    for i in 1..k {
        if carrier[(i, i - 1)].abs() <= tol {
            continue;
        }
        // 2×2 window [i−1, i]: multiply the diagonal blocks around the
        // cycle (inverting upper-triangular factors on inverse edges).
        let mut prod = Matrix::<S>::identity(2);
        for (t, s) in ts.iter().zip(signs) {
            let block = t.block(i - 1, i + 1, i - 1, i + 1);
            let factor = match s {
                Sign::Forward => block,
                Sign::Inverse => {
                    let d0 = block[(0, 0)];
                    let d1 = block[(1, 1)];
                    if d0 == S::ZERO || d1 == S::ZERO {
                        return Some((i, i - 1, carrier[(i, i - 1)].abs()));
                    }
                    let mut inv = Matrix::<S>::zeros(2, 2);
                    inv[(0, 0)] = S::ONE / d0;
                    inv[(1, 1)] = S::ONE / d1;
                    inv[(0, 1)] = -block[(0, 1)] / (d0 * d1);
                    inv
                }
            };
            prod = factor.mul(&prod);
        }
        let tr = prod[(0, 0)].re() + prod[(1, 1)].re();
        let det = prod[(0, 0)].re() * prod[(1, 1)].re() - prod[(0, 1)].re() * prod[(1, 0)].re();
        if tr * tr - 4.0 * det >= 0.0 {
            return Some((i, i - 1, carrier[(i, i - 1)].abs()));
        }
    }
    None
}

/// Eigenvalues of the signed product of the reduced cycle matrices, read
/// block-wise; `None` when an inverse factor is singular.
fn reduced_cycle_eigenvalues<S: Scalar>(
    ts: &[Matrix<S>],
    signs: &[Sign],
) -> Option<Vec<Complex64>> {
    let n = ts[0].rows();
    let mut prod = Matrix::<S>::identity(n);
    for (t, s) in ts.iter().zip(signs) {
        let factor = match s {
            Sign::Forward => t.clone(),
            Sign::Inverse => {
                let f = lu_decompose(t);
                if f.is_singular() {
                    return None;
                }
                f.solve(&Matrix::identity(n))
            }
        };
        prod = factor.mul(&prod);
    }
    Some(crate::linalg::quasi_triangular_eigenvalues(&prod))
}

fn spectrum_for_component<S: Scalar>(
    decomp: &SchurDecomposition<S>,
    rep: &Representation<S>,
    comp_idx: usize,
    cfg: &VerifyConfig,
) -> SpectrumCheck {
    let summary = &decomp.components[comp_idx];
    let Some(ref cycle) = summary.cycle else {
        return SpectrumCheck::NotApplicable { reason: "component has no cycle".into() };
    };
    let mats: Vec<&Matrix<S>> =
        cycle.traversal.iter().map(|(eid, _)| rep.matrix(*eid).expect("present")).collect();
    if mats.iter().any(|m| !m.is_square()) || mats.windows(2).any(|w| w[0].rows() != w[1].rows()) {
        return SpectrumCheck::NotApplicable { reason: "cycle carries rectangular matrices".into() };
    }
    let signs: Vec<Sign> = cycle.traversal.iter().map(|(_, s)| *s).collect();
    let owned: Vec<Matrix<S>> = mats.iter().map(|m| (*m).clone()).collect();
    let oracle = match cyclic_embedding_oracle(&owned, &Signature::new(signs.clone())) {
        Ok(o) => o,
        Err(e) => {
            return SpectrumCheck::NotApplicable { reason: format!("oracle failed: {e}") };
        }
    };
    if oracle.singular_inverse_edge {
        return SpectrumCheck::NotApplicable {
            reason: "singular matrix on an inverse cycle edge".into(),
        };
    }
    let ts: Vec<Matrix<S>> = cycle
        .traversal
        .iter()
        .map(|(eid, _)| decomp.reduced[eid].matrix.clone())
        .collect();
    let Some(t_eigs) = reduced_cycle_eigenvalues(&ts, &signs) else {
        return SpectrumCheck::NotApplicable {
            reason: "singular reduced factor on an inverse cycle edge".into(),
        };
    };
    let max_rel_err = match_multisets(&oracle.eigenvalues, &t_eigs);
    if oracle.condition_estimate > cfg.condition_limit {
        SpectrumCheck::Advisory { max_rel_err, condition: oracle.condition_estimate }
    } else {
        SpectrumCheck::Checked { max_rel_err, pass: max_rel_err <= cfg.spectrum_rtol }
    }
}

/// Greedy nearest-neighbour matching of two eigenvalue multisets; returns
/// the worst relative error over the pairing.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (i, y) in b.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (x - y).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (i, d) = best.expect("non-empty");
        used[i] = true;
        let scale = x.norm().max(b[i].norm());
        let rel = if scale == 0.0 { 0.0 } else { d / scale };
        worst = worst.max(rel);
    }
    worst
}

/// Run every check. Pass means: all orthogonality defects, residuals, and
/// shapes within tolerance, and every non-advisory spectrum comparison
/// within `spectrum_rtol`.
pub fn verify_all<S: Scalar>(
    quiver: &Quiver,
    rep: &Representation<S>,
    decomp: &SchurDecomposition<S>,
    cfg: &VerifyConfig,
) -> VerificationReport {
    let mut pass = true;

    let mut vertices = Vec::new();
    for v in quiver.vertices() {
        let q = &decomp.factors[&v.id];
        let defect = check_orthogonality(q);
        let ok = defect <= cfg.orthogonality_factor * v.dim as f64;
        pass &= ok;
        vertices.push(VertexCheck { vertex: v.id, defect, pass: ok });
    }

    let residuals = check_reconstruction(decomp, quiver, rep);
    let mut edges = Vec::new();
    for (eid, residual) in residuals {
        let a = rep.matrix(eid).expect("present");
        let t = &decomp.reduced[&eid];
        let residual_pass = residual <= cfg.reconstruction_tol * a.norm_fro().max(1.0);
        let cycle = decomp
            .components
            .iter()
            .find_map(|c| c.cycle.as_ref().filter(|cy| cy.carrier_edge == eid));
        let tol = cfg.structural_tol * a.norm_fro();
        let (mut shape_pass, mut worst_violation) = check_shape(
            &t.matrix,
            t.shape,
            t.quasi_carrier,
            if t.quasi_carrier { cycle.map_or(0, |cy| cy.core_dim) } else { 0 },
            cycle.map_or(true, |cy| cy.traversal.len() == 1),
            tol,
        );
        if shape_pass && t.quasi_carrier {
            if let Some(cy) = cycle {
                if cy.traversal.len() > 1 && decomp.field == Field::Real {
                    let ts: Vec<Matrix<S>> = cy
                        .traversal
                        .iter()
                        .map(|(e, _)| decomp.reduced[e].matrix.clone())
                        .collect();
                    let signs: Vec<Sign> = cy.traversal.iter().map(|(_, s)| *s).collect();
                    let pos = cy
                        .traversal
                        .iter()
                        .position(|(e, _)| *e == eid)
                        .expect("carrier on its own cycle");
                    if let Some(v) = carrier_blocks_product_check(&ts, &signs, pos, tol) {
                        shape_pass = false;
                        worst_violation = Some(v);
                    }
                }
            }
        }
        pass &= residual_pass && shape_pass;
        edges.push(EdgeCheck {
            edge: eid,
            residual,
            residual_pass,
            declared: t.shape,
            shape_pass,
            worst_violation,
        });
    }

    let mut components = Vec::new();
    for (i, summary) in decomp.components.iter().enumerate() {
        let spectrum = spectrum_for_component(decomp, rep, i, cfg);
        if let SpectrumCheck::Checked { pass: ok, .. } = spectrum {
            pass &= ok;
        }
        components.push(ComponentCheck { lowest_vertex: summary.lowest_vertex, spectrum });
    }

    VerificationReport { config: cfg.clone(), vertices, edges, components, pass }
}
