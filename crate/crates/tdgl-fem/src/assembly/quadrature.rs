//! Quadrature on the reference triangle, tetrahedron and unit interval.
//!
//! Low degrees use classic symmetric interior-point rules; the highest
//! degrees are conical-product Gauss-Jacobi rules generated at runtime via
//! Golub-Welsch, so no tabulated constant is trusted beyond what the
//! exactness tests verify. No rule places a point on a reference vertex,
//! which the singular L-shape integrands rely on.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Triangle,
    Tetrahedron,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Triangle => "triangle",
            CellKind::Tetrahedron => "tetrahedron",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            CellKind::Triangle => 2,
            CellKind::Tetrahedron => 3,
        }
    }
}

/// Quadrature rule in barycentric coordinates; weights sum to the reference
/// volume (1/2 for the triangle, 1/6 for the tetrahedron).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub cell: CellKind,
    /// Barycentric coordinates; the last entry is unused for triangles.
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference Cartesian coordinates of point `q`: for the triangle with
    /// vertices (0,0), (1,0), (0,1) these are (lambda_1, lambda_2);
    /// analogously in 3D.
    pub fn ref_point(&self, q: usize) -> [f64; 3] {
        let p = self.points[q];
        match self.cell {
            CellKind::Triangle => [p[1], p[2], 0.0],
            CellKind::Tetrahedron => [p[1], p[2], p[3]],
        }
    }
}

/// Gauss-Jacobi nodes and weights on [0,1] for the weight `(1-t)^alpha`,
/// computed by Golub-Welsch from the Jacobi three-term recurrence.
pub fn gauss_jacobi_01(n: usize, alpha: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let alpha = alpha as f64;
    let mut diag = vec![0.0f64; n];
    for (k, d) in diag.iter_mut().enumerate() {
        let k = k as f64;
        *d = if k == 0.0 {
            if alpha == 0.0 {
                0.0
            } else {
                -alpha / (alpha + 2.0)
            }
        } else {
            -alpha * alpha / ((2.0 * k + alpha) * (2.0 * k + alpha + 2.0))
        };
    }
    let mut off = vec![0.0f64; n.saturating_sub(1)];
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let num = 4.0 * k * k * (k + alpha) * (k + alpha);
        let den =
            (2.0 * k + alpha).powi(2) * (2.0 * k + alpha + 1.0) * (2.0 * k + alpha - 1.0);
        *o = (num / den).sqrt();
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mu0 = 2.0_f64.powf(alpha + 1.0) / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)] * eig.eigenvectors[(0, i)];
            // map [-1,1] with (1-x)^alpha onto [0,1] with (1-t)^alpha
            ((x + 1.0) / 2.0, w * 2.0_f64.powf(-alpha - 1.0))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss-Legendre nodes and weights on [0,1].
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_01(n, 0)
}

fn orbit3(rule: &mut QuadratureRule, a: f64, b: f64, c: f64, w: f64) {
    let mut perms = vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
    perms.sort_by(|x, y| x.partial_cmp(y).unwrap());
    perms.dedup();
    for p in perms {
        rule.points.push([p[0], p[1], p[2], 0.0]);
        rule.weights.push(w);
    }
}

fn orbit4(rule: &mut QuadratureRule, v: [f64; 4], w: f64) {
    let mut perms = Vec::new();
    // all 24 permutations of 4 items
    let idx = [0usize, 1, 2, 3];
    let mut stack = vec![(Vec::new(), idx.to_vec())];
    while let Some((head, rest)) = stack.pop() {
        if rest.is_empty() {
            perms.push([v[head[0]], v[head[1]], v[head[2]], v[head[3]]]);
            continue;
        }
        for (i, &r) in rest.iter().enumerate() {
            let mut h = head.clone();
            h.push(r);
            let mut rs = rest.clone();
            rs.remove(i);
            stack.push((h, rs));
        }
    }
    perms.sort_by(|x, y| x.partial_cmp(y).unwrap());
    perms.dedup();
    for p in perms {
        rule.points.push(p);
        rule.weights.push(w);
    }
}

fn triangle_conical(n: usize) -> QuadratureRule {
    let (u, wu) = gauss_jacobi_01(n, 0);
    let (v, wv) = gauss_jacobi_01(n, 1);
    let mut rule = QuadratureRule {
        cell: CellKind::Triangle,
        points: Vec::with_capacity(n * n),
        weights: Vec::with_capacity(n * n),
    };
    for i in 0..n {
        for j in 0..n {
            let x = u[i] * (1.0 - v[j]);
            let y = v[j];
            rule.points.push([1.0 - x - y, x, y, 0.0]);
            rule.weights.push(wu[i] * wv[j]);
        }
    }
    rule
}

fn tet_conical(n: usize) -> QuadratureRule {
    let (u, wu) = gauss_jacobi_01(n, 0);
    let (v, wv) = gauss_jacobi_01(n, 1);
    let (w, ww) = gauss_jacobi_01(n, 2);
    let mut rule = QuadratureRule {
        cell: CellKind::Tetrahedron,
        points: Vec::with_capacity(n * n * n),
        weights: Vec::with_capacity(n * n * n),
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let z = w[k];
                let y = v[j] * (1.0 - z);
                let x = u[i] * (1.0 - v[j]) * (1.0 - z);
                rule.points.push([1.0 - x - y - z, x, y, z]);
                rule.weights.push(wu[i] * wv[j] * ww[k]);
            }
        }
    }
    rule
}

/// Symmetric Gauss rule on the given reference cell, exact for polynomials
/// of total degree `degree` (degree 0 is served by the degree-1 rule).
///
/// Supported: triangle up to degree 8, tetrahedron up to degree 6.
pub fn quadrature_rule(cell: CellKind, degree: usize) -> Result<QuadratureRule> {
    let max = match cell {
        CellKind::Triangle => 8,
        CellKind::Tetrahedron => 6,
    };
    if degree > max {
        return Err(Error::UnsupportedQuadratureDegree {
            cell: cell.name(),
            degree,
        });
    }
    let mut rule = QuadratureRule {
        cell,
        points: Vec::new(),
        weights: Vec::new(),
    };
    match cell {
        CellKind::Triangle => match degree {
            0 | 1 => {
                let t = 1.0 / 3.0;
                rule.points.push([t, t, t, 0.0]);
                rule.weights.push(1.0);
            }
            2 => orbit3(&mut rule, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
            3 => {
                let t = 1.0 / 3.0;
                rule.points.push([t, t, t, 0.0]);
                rule.weights.push(-27.0 / 48.0);
                orbit3(&mut rule, 0.6, 0.2, 0.2, 25.0 / 48.0);
            }
            4 => {
                orbit3(
                    &mut rule,
                    0.108103018168070,
                    0.445948490915965,
                    0.445948490915965,
                    0.223381589678011,
                );
                orbit3(
                    &mut rule,
                    0.816847572980459,
                    0.091576213509771,
                    0.091576213509771,
                    0.109951743655322,
                );
            }
            5 => {
                let t = 1.0 / 3.0;
                rule.points.push([t, t, t, 0.0]);
                rule.weights.push(9.0 / 40.0);
                orbit3(
                    &mut rule,
                    0.059715871789770,
                    0.470142064105115,
                    0.470142064105115,
                    0.132394152788506,
                );
                orbit3(
                    &mut rule,
                    0.797426985353087,
                    0.101286507323456,
                    0.101286507323456,
                    0.125939180544827,
                );
            }
            6 => {
                orbit3(
                    &mut rule,
                    0.501426509658179,
                    0.249286745170910,
                    0.249286745170910,
                    0.116786275726379,
                );
                orbit3(
                    &mut rule,
                    0.873821971016996,
                    0.063089014491502,
                    0.063089014491502,
                    0.050844906370207,
                );
                orbit3(
                    &mut rule,
                    0.053145049844816,
                    0.310352451033785,
                    0.636502499121399,
                    0.082851075618374,
                );
            }
            7 => return Ok(triangle_conical(4)),
            _ => return Ok(triangle_conical(5)),
        },
        CellKind::Tetrahedron => match degree {
            0 | 1 => {
                rule.points.push([0.25, 0.25, 0.25, 0.25]);
                rule.weights.push(1.0);
            }
            2 => {
                let a = (5.0 + 3.0 * 5.0_f64.sqrt()) / 20.0;
                let b = (5.0 - 5.0_f64.sqrt()) / 20.0;
                orbit4(&mut rule, [a, b, b, b], 0.25);
            }
            3 => {
                rule.points.push([0.25, 0.25, 0.25, 0.25]);
                rule.weights.push(-0.8);
                let s = 1.0 / 6.0;
                orbit4(&mut rule, [0.5, s, s, s], 0.45);
            }
            4 | 5 => {
                orbit4(
                    &mut rule,
                    [
                        0.0673422422100983,
                        0.3108859192633005,
                        0.3108859192633005,
                        0.3108859192633005,
                    ],
                    0.1126879257180162,
                );
                orbit4(
                    &mut rule,
                    [
                        0.7217942490673264,
                        0.0927352503108912,
                        0.0927352503108912,
                        0.0927352503108912,
                    ],
                    0.0734930431163619,
                );
                orbit4(
                    &mut rule,
                    [
                        0.4544962958743506,
                        0.4544962958743506,
                        0.0455037041256494,
                        0.0455037041256494,
                    ],
                    0.0425460207770812,
                );
            }
            _ => return Ok(tet_conical(4)),
        },
    }
    // tabulated weights above are normalized to unit total; scale to the
    // reference volume
    let vol = match cell {
        CellKind::Triangle => 0.5,
        CellKind::Tetrahedron => 1.0 / 6.0,
    };
    for w in &mut rule.weights {
        *w *= vol;
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn tri_moment(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn tet_moment(a: usize, b: usize, c: usize) -> f64 {
        factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
    }

    #[test]
    fn triangle_rules_exact() {
        for degree in 1..=8 {
            let rule = quadrature_rule(CellKind::Triangle, degree).unwrap();
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let mut val = 0.0;
                    for q in 0..rule.len() {
                        let p = rule.ref_point(q);
                        val += rule.weights[q] * p[0].powi(a as i32) * p[1].powi(b as i32);
                    }
                    assert!(
                        (val - tri_moment(a, b)).abs() < 1e-13,
                        "deg {degree} monomial x^{a} y^{b}: {val} vs {}",
                        tri_moment(a, b)
                    );
                }
            }
        }
    }

    #[test]
    fn tet_rules_exact() {
        for degree in 1..=6 {
            let rule = quadrature_rule(CellKind::Tetrahedron, degree).unwrap();
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    for c in 0..=(degree - a - b) {
                        let mut val = 0.0;
                        for q in 0..rule.len() {
                            let p = rule.ref_point(q);
                            val += rule.weights[q]
                                * p[0].powi(a as i32)
                                * p[1].powi(b as i32)
                                * p[2].powi(c as i32);
                        }
                        assert!(
                            (val - tet_moment(a, b, c)).abs() < 1e-13,
                            "deg {degree} monomial {a} {b} {c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn centroid_rule_integrates_linear() {
        let rule = quadrature_rule(CellKind::Triangle, 1).unwrap();
        assert_eq!(rule.len(), 1);
        let p = rule.ref_point(0);
        let val = rule.weights[0] * (p[0] + p[1]);
        assert!((val - (tri_moment(1, 0) + tri_moment(0, 1))).abs() < 1e-15);
    }

    #[test]
    fn degree6_triangle_x6() {
        let rule = quadrature_rule(CellKind::Triangle, 6).unwrap();
        let mut val = 0.0;
        for q in 0..rule.len() {
            val += rule.weights[q] * rule.ref_point(q)[0].powi(6);
        }
        assert!((val - 1.0 / 56.0).abs() < 1e-14, "{val}");
    }

    #[test]
    fn degree4_tet_xyz() {
        let rule = quadrature_rule(CellKind::Tetrahedron, 4).unwrap();
        let mut val = 0.0;
        for q in 0..rule.len() {
            let p = rule.ref_point(q);
            val += rule.weights[q] * p[0] * p[1] * p[2];
        }
        assert!((val - 1.0 / 720.0).abs() < 1e-15, "{val}");
    }

    #[test]
    fn no_vertex_points() {
        for degree in 1..=8 {
            let rule = quadrature_rule(CellKind::Triangle, degree).unwrap();
            for p in &rule.points {
                for lam in &p[..3] {
                    assert!((lam - 1.0).abs() > 1e-3, "vertex point in degree {degree}");
                }
            }
        }
        for degree in 1..=6 {
            let rule = quadrature_rule(CellKind::Tetrahedron, degree).unwrap();
            for p in &rule.points {
                for lam in p {
                    assert!((lam - 1.0).abs() > 1e-3);
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_volume() {
        for degree in 1..=8 {
            let rule = quadrature_rule(CellKind::Triangle, degree).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 0.5).abs() < 1e-13);
        }
        for degree in 1..=6 {
            let rule = quadrature_rule(CellKind::Tetrahedron, degree).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 1.0 / 6.0).abs() < 1e-13);
        }
    }

    #[test]
    fn unsupported_degree_rejected() {
        assert!(quadrature_rule(CellKind::Triangle, 9).is_err());
        assert!(quadrature_rule(CellKind::Tetrahedron, 7).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre_01(n);
            for d in 0..=(2 * n - 1) {
                let val: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * xi.powi(d as i32))
                    .sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!((val - exact).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }
}
