//! Test-support oracles, compiled only with the `testkit` feature.
//!
//! Everything here is deliberately independent of the reduction kernels:
//! eigenvalues come from the characteristic polynomial (Faddeev–LeVerrier
//! coefficients, Durand–Kerner roots) and graph questions are answered by
//! exhaustive subset enumeration.

use num_complex::Complex64;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Monic characteristic polynomial coefficients [1, c₁, …, cₙ] of A, i.e.
/// det(λI − A) = λⁿ + c₁λⁿ⁻¹ + ⋯ + cₙ, by the Faddeev–LeVerrier recurrence.
pub fn char_poly_coeffs(a: &Matrix<Complex64>) -> Vec<Complex64> {
    assert!(a.is_square());
    let n = a.rows();
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut m = Matrix::<Complex64>::identity(n);
    for k in 1..=n {
        m = a.mul(&m);
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..n {
            tr += m[(i, i)];
        }
        let ck = -tr / k as f64;
        coeffs.push(ck);
        for i in 0..n {
            m[(i, i)] += ck;
        }
    }
    coeffs
}

/// All roots of a monic polynomial given by [1, c₁, …, cₙ], via Durand–Kerner
/// iteration with a deterministic start.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * radius / seed.norm().powi(k as i32 + 1) * 0.9)
        .collect();
    let eval = |x: Complex64| {
        let mut v = Complex64::new(1.0, 0.0);
        for c in &coeffs[1..] {
            v = v * x + c;
        }
        v
    };
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for k in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates: nudge deterministically.
                z[k] += Complex64::new(1e-6, 1e-6) * (k as f64 + 1.0);
                moved = f64::INFINITY;
                continue;
            }
            let delta = eval(z[k]) / denom;
            z[k] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved <= 1e-14 * radius {
            break;
        }
    }
    z
}

/// Eigenvalues of a square matrix via its characteristic polynomial. This is
/// the independent oracle the Schur kernels are checked against.
pub fn char_poly_eigenvalues<S: Scalar>(a: &Matrix<S>) -> Vec<Complex64> {
    poly_roots(&char_poly_coeffs(&a.to_complex()))
}

/// Sort eigenvalues lexicographically by (re, im); ties at rounding level
/// are harmless for the comparisons done in the tests.
pub fn sort_complex(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|x, y| {
        x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
    });
    v
}

/// Worst relative distance between two eigenvalue multisets under greedy
/// nearest-neighbour pairing.
pub fn multiset_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    crate::verify::match_multisets(a, b)
}

/// Brute-force pseudoforest test for an undirected multigraph: every
/// connected component contains at most one cycle, where cycles are counted
/// by enumerating edge subsets that form a single closed walk (every
/// incident vertex of degree exactly two, connected). Independent of the
/// classifier under test.
pub fn brute_force_is_pseudoforest(num_vertices: usize, edges: &[(usize, usize)]) -> bool {
    // Connected components by BFS over the adjacency structure.
    let mut comp = vec![usize::MAX; num_vertices];
    let mut ncomp = 0;
    for start in 0..num_vertices {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = ncomp;
        while let Some(u) = stack.pop() {
            for &(a, b) in edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && comp[y] == usize::MAX {
                        comp[y] = ncomp;
                        stack.push(y);
                    }
                }
            }
        }
        ncomp += 1;
    }
    for c in 0..ncomp {
        let idx: Vec<usize> =
            (0..edges.len()).filter(|&i| comp[edges[i].0] == c).collect();
        if count_single_cycle_subsets(edges, &idx) > 1 {
            return false;
        }
    }
    true
}

fn count_single_cycle_subsets(edges: &[(usize, usize)], idx: &[usize]) -> usize {
    let mut count = 0;
    for mask in 1u32..(1 << idx.len()) {
        let subset: Vec<usize> =
            (0..idx.len()).filter(|&i| mask & (1 << i) != 0).map(|i| idx[i]).collect();
        if is_single_cycle(edges, &subset) {
            count += 1;
            if count > 1 {
                return count;
            }
        }
    }
    count
}

fn is_single_cycle(edges: &[(usize, usize)], subset: &[usize]) -> bool {
    use std::collections::BTreeMap;
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in subset {
        let (a, b) = edges[i];
        *deg.entry(a).or_insert(0) += 1;
        *deg.entry(b).or_insert(0) += 1;
    }
    if deg.values().any(|&d| d != 2) {
        return false;
    }
    // Connectivity over the subset edges.
    let verts: Vec<usize> = deg.keys().copied().collect();
    let mut seen = vec![verts[0]];
    let mut stack = vec![verts[0]];
    while let Some(u) = stack.pop() {
        for &i in subset {
            let (a, b) = edges[i];
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen.contains(&y) {
                    seen.push(y);
                    stack.push(y);
                }
            }
        }
    }
    seen.len() == verts.len()
}

/// Deterministic standard-normal-ish matrix for tests (splitmix64 stream
/// mapped through a Box–Muller transform).
pub fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
    let mut state = seed;
    let mut next_u64 = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let mut next_unit = move || ((next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    Matrix::from_fn(rows, cols, |_, _| {
        let u1 = next_unit();
        let u2 = next_unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    })
}

pub fn seeded_complex_matrix(rows: usize, cols: usize, seed: u64) -> Matrix<Complex64> {
    let re = seeded_matrix(rows, cols, seed);
    let im = seeded_matrix(rows, cols, seed ^ 0x5851f42d4c957f2d);
    Matrix::from_fn(rows, cols, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}
