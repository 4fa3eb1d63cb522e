//! Reference elements built the Ciarlet way: a polynomial spanning set plus a
//! set of degree-of-freedom functionals, with the nodal basis obtained by
//! inverting the functional/span matrix. Covers Lagrange P1/P2 (scalar and
//! 2D vector), discontinuous P0/P1, Raviart-Thomas of order 0/1 (2D) and 0
//! (3D), and the lowest first-kind Nedelec element (3D).

use crate::assembly::quadrature::{gauss_legendre_01, quadrature_rule, CellKind};
use crate::error::{Error, Result};
use crate::mesh::{TET_EDGES, TET_FACES, TRI_EDGES};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    /// Scalar (or componentwise) composition with the affine map.
    Affine,
    /// H(div) map `u = J v / det J`; preserves facet normal moments.
    ContravariantPiola,
    /// H(curl) map `u = J^{-T} v`; preserves edge circulations.
    CovariantPiola,
}

/// Polynomial in reference coordinates: sum of `c * x^p0 y^p1 z^p2`.
#[derive(Debug, Clone, Default)]
pub struct Poly {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Poly {
    fn mono(p: [u32; 3]) -> Self {
        Poly {
            terms: vec![(1.0, p)],
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for &(c, p) in &self.terms {
            acc += c * x[0].powi(p[0] as i32) * x[1].powi(p[1] as i32) * x[2].powi(p[2] as i32);
        }
        acc
    }

    pub fn grad(&self, x: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for &(c, p) in &self.terms {
            for d in 0..3 {
                if p[d] == 0 {
                    continue;
                }
                let mut q = p;
                q[d] -= 1;
                g[d] += c
                    * p[d] as f64
                    * x[0].powi(q[0] as i32)
                    * x[1].powi(q[1] as i32)
                    * x[2].powi(q[2] as i32);
            }
        }
        g
    }

    fn add_scaled(&mut self, other: &Poly, s: f64) {
        for &(c, p) in &other.terms {
            self.terms.push((s * c, p));
        }
    }
}

/// Vector-valued polynomial; one component per value dimension.
#[derive(Debug, Clone)]
pub struct VPoly {
    pub comps: Vec<Poly>,
}

impl VPoly {
    fn zero(value_size: usize) -> Self {
        VPoly {
            comps: vec![Poly::default(); value_size],
        }
    }

    fn scalar(p: Poly) -> Self {
        VPoly { comps: vec![p] }
    }

    fn eval(&self, x: [f64; 3]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }
}

/// Degree-of-freedom functional on the reference cell.
///
/// Entity associations drive the global dof layout; edge and face moments
/// are defined against the local entity frame and related to the canonical
/// global frame by the `±1` signs stored in the dof map.
#[derive(Debug, Clone)]
pub enum RefDof {
    /// Point evaluation of one value component.
    Point {
        entity_dim: usize,
        entity: usize,
        point: [f64; 3],
        comp: usize,
    },
    /// `∫_e (v·n_out) L_k ds` with `L_0 = 1`, `L_1(t) = 2t - 1` along the
    /// local edge direction (2D Raviart-Thomas).
    EdgeNormalMoment { edge: usize, order: usize },
    /// Circulation `∫_e v·dl` along the local edge direction (Nedelec).
    EdgeTangentMoment { edge: usize },
    /// `∫_f v·n_out dA` (3D Raviart-Thomas).
    FaceNormalMoment { face: usize },
    /// `∫_K v_comp dx` (interior Raviart-Thomas dofs).
    InteriorMoment { comp: usize },
}

impl RefDof {
    /// (entity dimension, local entity index) owning this dof; interior
    /// moments belong to the cell.
    pub fn entity(&self, cell_dim: usize) -> (usize, usize) {
        match *self {
            RefDof::Point {
                entity_dim, entity, ..
            } => (entity_dim, entity),
            RefDof::EdgeNormalMoment { edge, .. } => (1, edge),
            RefDof::EdgeTangentMoment { edge } => (1, edge),
            RefDof::FaceNormalMoment { face } => (2, face),
            RefDof::InteriorMoment { .. } => (cell_dim, 0),
        }
    }
}

/// Reference edge/face frames.
pub struct RefGeom {
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
    /// Per edge: (start, end, unit outward normal in 2D).
    pub edges: Vec<([f64; 3], [f64; 3], [f64; 3])>,
    /// Per face (3D): (origin, span1, span2, unit outward normal, area).
    pub faces: Vec<([f64; 3], [f64; 3], [f64; 3], [f64; 3], f64)>,
}

pub fn ref_geom(dim: usize) -> RefGeom {
    if dim == 2 {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let s = 1.0 / 2.0_f64.sqrt();
        let normals = [[s, s, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        let edges = TRI_EDGES
            .iter()
            .zip(normals.iter())
            .map(|(e, n)| (v[e[0]], v[e[1]], *n))
            .collect();
        RefGeom {
            dim,
            vertices: v,
            edges,
            faces: Vec::new(),
        }
    } else {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let edges = TET_EDGES
            .iter()
            .map(|e| (v[e[0]], v[e[1]], [0.0, 0.0, 0.0]))
            .collect();
        let s3 = 1.0 / 3.0_f64.sqrt();
        let mut faces = Vec::new();
        let fnormals = [
            [s3, s3, s3],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ];
        let fareas = [3.0_f64.sqrt() / 2.0, 0.5, 0.5, 0.5];
        for (k, f) in TET_FACES.iter().enumerate() {
            let (a, b, c) = (v[f[0]], v[f[1]], v[f[2]]);
            let span1 = sub(b, a);
            let span2 = sub(c, a);
            faces.push((a, span1, span2, fnormals[k], fareas[k]));
        }
        RefGeom {
            dim,
            vertices: v,
            edges,
            faces,
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64], b: &[f64; 3]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Apply a reference dof functional to a vector/scalar field given as a
/// closure on reference coordinates. `n1d` controls the Gauss resolution on
/// entities (construction uses a few points; interpolation of general fields
/// uses more).
pub fn apply_ref_dof<F>(dof: &RefDof, geom: &RefGeom, n1d: usize, field: F) -> f64
where
    F: Fn([f64; 3]) -> Vec<f64>,
{
    match *dof {
        RefDof::Point { point, comp, .. } => field(point)[comp],
        RefDof::EdgeNormalMoment { edge, order } => {
            let (a, b, n) = geom.edges[edge];
            let len = {
                let d = sub(b, a);
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            };
            let (ts, ws) = gauss_legendre_01(n1d);
            let mut acc = 0.0;
            for (&t, &w) in ts.iter().zip(&ws) {
                let p = [
                    a[0] + t * (b[0] - a[0]),
                    a[1] + t * (b[1] - a[1]),
                    a[2] + t * (b[2] - a[2]),
                ];
                let leg = if order == 0 { 1.0 } else { 2.0 * t - 1.0 };
                acc += w * dot(&field(p), &n) * leg * len;
            }
            acc
        }
        RefDof::EdgeTangentMoment { edge } => {
            let (a, b, _) = geom.edges[edge];
            let d = sub(b, a);
            let (ts, ws) = gauss_legendre_01(n1d);
            let mut acc = 0.0;
            for (&t, &w) in ts.iter().zip(&ws) {
                let p = [
                    a[0] + t * (b[0] - a[0]),
                    a[1] + t * (b[1] - a[1]),
                    a[2] + t * (b[2] - a[2]),
                ];
                acc += w * dot(&field(p), &d);
            }
            acc
        }
        RefDof::FaceNormalMoment { face } => {
            let (origin, s1, s2, n, area) = geom.faces[face];
            let rule = quadrature_rule(CellKind::Triangle, 2 * n1d.min(4)).unwrap();
            let mut acc = 0.0;
            for q in 0..rule.len() {
                let rp = rule.ref_point(q);
                let p = [
                    origin[0] + rp[0] * s1[0] + rp[1] * s2[0],
                    origin[1] + rp[0] * s1[1] + rp[1] * s2[1],
                    origin[2] + rp[0] * s1[2] + rp[1] * s2[2],
                ];
                acc += rule.weights[q] * dot(&field(p), &n);
            }
            // rule weights sum to 1/2; rescale to the physical face area
            acc * (area / 0.5)
        }
        RefDof::InteriorMoment { comp } => {
            let rule = quadrature_rule(
                if geom.dim == 2 {
                    CellKind::Triangle
                } else {
                    CellKind::Tetrahedron
                },
                4,
            )
            .unwrap();
            let mut acc = 0.0;
            for q in 0..rule.len() {
                acc += rule.weights[q] * field(rule.ref_point(q))[comp];
            }
            acc
        }
    }
}

/// A finished reference element: nodal basis polynomials dual to `dofs`.
#[derive(Debug, Clone)]
pub struct RefElement {
    pub dim: usize,
    pub value_size: usize,
    pub mapping: MappingKind,
    pub dofs: Vec<RefDof>,
    pub basis: Vec<VPoly>,
}

impl RefElement {
    pub fn ndofs(&self) -> usize {
        self.dofs.len()
    }

    /// Tabulate basis values and reference gradients at the given points.
    /// Layout: `values[(q * ndofs + i) * vs + c]`,
    /// `grads[((q * ndofs + i) * vs + c) * 3 + d]`.
    pub fn tabulate(&self, points: &[[f64; 3]]) -> Tabulation {
        let (nd, vs) = (self.ndofs(), self.value_size);
        let mut values = vec![0.0; points.len() * nd * vs];
        let mut grads = vec![0.0; points.len() * nd * vs * 3];
        for (q, &p) in points.iter().enumerate() {
            for (i, b) in self.basis.iter().enumerate() {
                for (c, poly) in b.comps.iter().enumerate() {
                    let k = (q * nd + i) * vs + c;
                    values[k] = poly.eval(p);
                    let g = poly.grad(p);
                    grads[k * 3..k * 3 + 3].copy_from_slice(&g);
                }
            }
        }
        Tabulation {
            npoints: points.len(),
            ndofs: nd,
            value_size: vs,
            values,
            grads,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tabulation {
    pub npoints: usize,
    pub ndofs: usize,
    pub value_size: usize,
    pub values: Vec<f64>,
    pub grads: Vec<f64>,
}

fn build(
    dim: usize,
    value_size: usize,
    mapping: MappingKind,
    span: Vec<VPoly>,
    dofs: Vec<RefDof>,
) -> RefElement {
    let n = span.len();
    assert_eq!(n, dofs.len(), "span/dof count mismatch");
    let geom = ref_geom(dim);
    let mut v = DMatrix::<f64>::zeros(n, n);
    for (k, dof) in dofs.iter().enumerate() {
        for (j, gen) in span.iter().enumerate() {
            v[(k, j)] = apply_ref_dof(dof, &geom, 6, |p| gen.eval(p));
        }
    }
    let vinv = v
        .clone()
        .try_inverse()
        .expect("dof functionals are unisolvent on the span");
    let mut basis = Vec::with_capacity(n);
    for i in 0..n {
        let mut b = VPoly::zero(value_size);
        for j in 0..n {
            let w = vinv[(j, i)];
            if w == 0.0 {
                continue;
            }
            for c in 0..value_size {
                b.comps[c].add_scaled(&span[j].comps[c], w);
            }
        }
        basis.push(b);
    }
    RefElement {
        dim,
        value_size,
        mapping,
        dofs,
        basis,
    }
}

fn scalar_monomials(dim: usize, degree: usize) -> Vec<Poly> {
    let mut out = Vec::new();
    let dmax = degree as u32;
    for total in 0..=dmax {
        // deterministic order: by total degree, then lexicographic powers
        if dim == 2 {
            for px in (0..=total).rev() {
                let py = total - px;
                out.push(Poly::mono([px, py, 0]));
            }
        } else {
            for px in (0..=total).rev() {
                for py in (0..=(total - px)).rev() {
                    let pz = total - px - py;
                    out.push(Poly::mono([px, py, pz]));
                }
            }
        }
    }
    out
}

/// Scalar Lagrange element of degree 1 or 2.
pub fn lagrange(dim: usize, degree: usize) -> Result<RefElement> {
    if !(1..=2).contains(&degree) || !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedElement {
            family: "Lagrange",
            degree,
            dim,
        });
    }
    let geom = ref_geom(dim);
    let span: Vec<VPoly> = scalar_monomials(dim, degree)
        .into_iter()
        .map(VPoly::scalar)
        .collect();
    let mut dofs = Vec::new();
    for (v, &p) in geom.vertices.iter().enumerate() {
        dofs.push(RefDof::Point {
            entity_dim: 0,
            entity: v,
            point: p,
            comp: 0,
        });
    }
    if degree == 2 {
        for (e, &(a, b, _)) in geom.edges.iter().enumerate() {
            dofs.push(RefDof::Point {
                entity_dim: 1,
                entity: e,
                point: [
                    (a[0] + b[0]) / 2.0,
                    (a[1] + b[1]) / 2.0,
                    (a[2] + b[2]) / 2.0,
                ],
                comp: 0,
            });
        }
    }
    Ok(build(dim, 1, MappingKind::Affine, span, dofs))
}

/// 2D vector Lagrange element of degree 1 (two components per vertex).
pub fn vector_lagrange(dim: usize, degree: usize) -> Result<RefElement> {
    if dim != 2 || degree != 1 {
        return Err(Error::UnsupportedElement {
            family: "vector Lagrange",
            degree,
            dim,
        });
    }
    let geom = ref_geom(dim);
    let mut span = Vec::new();
    let mut dofs = Vec::new();
    // per-vertex dofs interleaved (x-component, y-component)
    for comp in 0..2 {
        for m in scalar_monomials(2, 1) {
            let mut vp = VPoly::zero(2);
            vp.comps[comp] = m;
            span.push(vp);
        }
    }
    for (v, &p) in geom.vertices.iter().enumerate() {
        for comp in 0..2 {
            dofs.push(RefDof::Point {
                entity_dim: 0,
                entity: v,
                point: p,
                comp,
            });
        }
    }
    Ok(build(dim, 2, MappingKind::Affine, span, dofs))
}

/// Discontinuous Lagrange of degree 0 or 1 (all dofs cell-local).
pub fn discontinuous_lagrange(dim: usize, degree: usize) -> Result<RefElement> {
    if degree > 1 || !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedElement {
            family: "discontinuous Lagrange",
            degree,
            dim,
        });
    }
    let geom = ref_geom(dim);
    let span: Vec<VPoly> = scalar_monomials(dim, degree)
        .into_iter()
        .map(VPoly::scalar)
        .collect();
    let mut dofs = Vec::new();
    if degree == 0 {
        let c = match dim {
            2 => [1.0 / 3.0, 1.0 / 3.0, 0.0],
            _ => [0.25, 0.25, 0.25],
        };
        dofs.push(RefDof::Point {
            entity_dim: dim,
            entity: 0,
            point: c,
            comp: 0,
        });
    } else {
        for &p in &geom.vertices {
            dofs.push(RefDof::Point {
                entity_dim: dim,
                entity: 0,
                point: p,
                comp: 0,
            });
        }
    }
    Ok(build(dim, 1, MappingKind::Affine, span, dofs))
}

/// Raviart-Thomas element: order 0 or 1 on triangles, order 0 on tets.
pub fn raviart_thomas(dim: usize, degree: usize) -> Result<RefElement> {
    let ok = (dim == 2 && degree <= 1) || (dim == 3 && degree == 0);
    if !ok {
        return Err(Error::UnsupportedElement {
            family: "Raviart-Thomas",
            degree,
            dim,
        });
    }
    let mut span = Vec::new();
    let mut dofs = Vec::new();
    if dim == 2 {
        let x = Poly::mono([1, 0, 0]);
        let y = Poly::mono([0, 1, 0]);
        if degree == 0 {
            for comp in 0..2 {
                let mut vp = VPoly::zero(2);
                vp.comps[comp] = Poly::mono([0, 0, 0]);
                span.push(vp);
            }
            span.push(VPoly {
                comps: vec![x, y],
            });
            for e in 0..3 {
                dofs.push(RefDof::EdgeNormalMoment { edge: e, order: 0 });
            }
        } else {
            // [P1]^2 plus x * homogeneous P1
            for comp in 0..2 {
                for m in scalar_monomials(2, 1) {
                    let mut vp = VPoly::zero(2);
                    vp.comps[comp] = m;
                    span.push(vp);
                }
            }
            for scale in [[1u32, 0u32], [0, 1]] {
                // s * (x, y) with s in {x, y}
                let sx = Poly::mono([1 + scale[0], scale[1], 0]);
                let sy = Poly::mono([scale[0], 1 + scale[1], 0]);
                span.push(VPoly {
                    comps: vec![sx, sy],
                });
            }
            for e in 0..3 {
                dofs.push(RefDof::EdgeNormalMoment { edge: e, order: 0 });
                dofs.push(RefDof::EdgeNormalMoment { edge: e, order: 1 });
            }
            dofs.push(RefDof::InteriorMoment { comp: 0 });
            dofs.push(RefDof::InteriorMoment { comp: 1 });
        }
        Ok(build(2, 2, MappingKind::ContravariantPiola, span, dofs))
    } else {
        for comp in 0..3 {
            let mut vp = VPoly::zero(3);
            vp.comps[comp] = Poly::mono([0, 0, 0]);
            span.push(vp);
        }
        span.push(VPoly {
            comps: vec![
                Poly::mono([1, 0, 0]),
                Poly::mono([0, 1, 0]),
                Poly::mono([0, 0, 1]),
            ],
        });
        for f in 0..4 {
            dofs.push(RefDof::FaceNormalMoment { face: f });
        }
        Ok(build(3, 3, MappingKind::ContravariantPiola, span, dofs))
    }
}

/// Lowest-order first-kind Nedelec element on tets: `a + b × x`, one
/// circulation dof per edge.
pub fn nedelec_first_kind(dim: usize, degree: usize) -> Result<RefElement> {
    if dim != 3 || degree != 1 {
        return Err(Error::UnsupportedElement {
            family: "Nedelec",
            degree,
            dim,
        });
    }
    let mut span = Vec::new();
    for comp in 0..3 {
        let mut vp = VPoly::zero(3);
        vp.comps[comp] = Poly::mono([0, 0, 0]);
        span.push(vp);
    }
    // b × x for b = e1, e2, e3
    let zero = Poly::default;
    let x = || Poly::mono([1, 0, 0]);
    let y = || Poly::mono([0, 1, 0]);
    let z = || Poly::mono([0, 0, 1]);
    let neg = |mut p: Poly| {
        for t in &mut p.terms {
            t.0 = -t.0;
        }
        p
    };
    span.push(VPoly {
        comps: vec![zero(), neg(z()), y()],
    });
    span.push(VPoly {
        comps: vec![z(), zero(), neg(x())],
    });
    span.push(VPoly {
        comps: vec![neg(y()), x(), zero()],
    });
    let dofs = (0..6)
        .map(|e| RefDof::EdgeTangentMoment { edge: e })
        .collect();
    Ok(build(3, 3, MappingKind::CovariantPiola, span, dofs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_dual(elem: &RefElement) {
        let geom = ref_geom(elem.dim);
        for (k, dof) in elem.dofs.iter().enumerate() {
            for (i, b) in elem.basis.iter().enumerate() {
                let v = apply_ref_dof(dof, &geom, 8, |p| b.eval(p));
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!(
                    (v - expect).abs() < 1e-12,
                    "dof {k} applied to basis {i}: {v}"
                );
            }
        }
    }

    #[test]
    fn dual_basis_reference() {
        check_dual(&lagrange(2, 1).unwrap());
        check_dual(&lagrange(2, 2).unwrap());
        check_dual(&lagrange(3, 1).unwrap());
        check_dual(&lagrange(3, 2).unwrap());
        check_dual(&vector_lagrange(2, 1).unwrap());
        check_dual(&discontinuous_lagrange(2, 0).unwrap());
        check_dual(&discontinuous_lagrange(2, 1).unwrap());
        check_dual(&raviart_thomas(2, 0).unwrap());
        check_dual(&raviart_thomas(2, 1).unwrap());
        check_dual(&raviart_thomas(3, 0).unwrap());
        check_dual(&nedelec_first_kind(3, 1).unwrap());
    }

    #[test]
    fn lagrange_hat_is_nodal() {
        let elem = lagrange(2, 1).unwrap();
        let geom = ref_geom(2);
        for (i, b) in elem.basis.iter().enumerate() {
            for (v, &p) in geom.vertices.iter().enumerate() {
                let val = b.comps[0].eval(p);
                let expect = if i == v { 1.0 } else { 0.0 };
                assert!((val - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rt0_div_is_constant() {
        let elem = raviart_thomas(2, 0).unwrap();
        for b in &elem.basis {
            let div = |p: [f64; 3]| b.comps[0].grad(p)[0] + b.comps[1].grad(p)[1];
            let d0 = div([0.2, 0.3, 0.0]);
            let d1 = div([0.6, 0.1, 0.0]);
            assert!((d0 - d1).abs() < 1e-13);
        }
    }

    #[test]
    fn rt0_normal_trace_dual() {
        // on each edge, the owning basis function has constant normal trace
        // 1/|e| against the outward normal
        let elem = raviart_thomas(2, 0).unwrap();
        let geom = ref_geom(2);
        for (e, &(a, b, n)) in geom.edges.iter().enumerate() {
            let len = {
                let d = [b[0] - a[0], b[1] - a[1]];
                (d[0] * d[0] + d[1] * d[1]).sqrt()
            };
            for t in [0.2, 0.5, 0.9] {
                let p = [
                    a[0] + t * (b[0] - a[0]),
                    a[1] + t * (b[1] - a[1]),
                    0.0,
                ];
                let val = elem.basis[e].eval(p);
                let tr = val[0] * n[0] + val[1] * n[1];
                assert!((tr - 1.0 / len).abs() < 1e-12, "edge {e} trace {tr}");
            }
        }
    }

    #[test]
    fn unsupported_elements_rejected() {
        assert!(lagrange(2, 3).is_err());
        assert!(raviart_thomas(3, 1).is_err());
        assert!(nedelec_first_kind(2, 1).is_err());
        assert!(vector_lagrange(3, 1).is_err());
    }
}
