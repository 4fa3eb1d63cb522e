//! Finite element spaces: global dof maps over a mesh, coefficient vectors,
//! interpolation and point evaluation.
//!
//! Vector elements are mapped with Piola transforms, so sharing a facet or
//! edge between two cells reduces to a `±1` sign per (cell, local dof); the
//! signs are stored in the dof map at construction.

pub mod reference;

use crate::error::{Error, Result};
use crate::mesh::{CellGeom2, CellGeom3, Mesh};
use num_complex::Complex;
use reference::{
    apply_ref_dof, discontinuous_lagrange, lagrange, nedelec_first_kind, raviart_thomas,
    ref_geom, vector_lagrange, MappingKind, RefDof, RefElement, Tabulation,
};
use std::sync::Arc;

pub type C64 = Complex<f64>;

/// Coefficient scalar of an FE function: `f64` or `Complex<f64>`.
pub trait Coeff:
    Copy
    + std::fmt::Debug
    + Send
    + Sync
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::AddAssign
    + std::ops::Mul<f64, Output = Self>
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn abs2(self) -> f64;
}

impl Coeff for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn abs2(self) -> f64 {
        self * self
    }
}

impl Coeff for C64 {
    const ZERO: Self = Complex::new(0.0, 0.0);
    const ONE: Self = Complex::new(1.0, 0.0);
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lagrange,
    RaviartThomas,
    NedelecFirstKind,
    DiscontinuousLagrange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    ScalarReal,
    ScalarComplex,
    VectorReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceDescriptor {
    pub family: Family,
    pub degree: usize,
    pub value_kind: ValueKind,
}

impl SpaceDescriptor {
    pub fn lagrange(degree: usize, value_kind: ValueKind) -> Self {
        SpaceDescriptor {
            family: Family::Lagrange,
            degree,
            value_kind,
        }
    }

    pub fn raviart_thomas(degree: usize) -> Self {
        SpaceDescriptor {
            family: Family::RaviartThomas,
            degree,
            value_kind: ValueKind::VectorReal,
        }
    }

    pub fn nedelec(degree: usize) -> Self {
        SpaceDescriptor {
            family: Family::NedelecFirstKind,
            degree,
            value_kind: ValueKind::VectorReal,
        }
    }

    pub fn dg(degree: usize) -> Self {
        SpaceDescriptor {
            family: Family::DiscontinuousLagrange,
            degree,
            value_kind: ValueKind::ScalarReal,
        }
    }
}

/// Global dof map: numbering is blockwise by entity kind (vertices, edges,
/// faces, cells), ascending entity index within each block.
#[derive(Debug)]
pub struct DofMap {
    pub mesh: Arc<Mesh>,
    pub desc: SpaceDescriptor,
    pub element: RefElement,
    pub n_dofs: usize,
    /// Per cell and local dof: (global index, orientation sign).
    cell_dofs: Vec<(u32, f32)>,
    pub boundary_dofs: Vec<usize>,
    per_vertex: usize,
    per_edge: usize,
    per_face: usize,
    per_cell: usize,
    edge_offset: usize,
    face_offset: usize,
    cell_offset: usize,
}

impl DofMap {
    pub fn cell_dofs(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let nd = self.element.ndofs();
        self.cell_dofs[c * nd..(c + 1) * nd]
            .iter()
            .map(|&(g, s)| (g as usize, s as f64))
    }

    pub fn vertex_dof(&self, v: usize, k: usize) -> usize {
        v * self.per_vertex + k
    }

    pub fn edge_dof(&self, e: usize, k: usize) -> usize {
        self.edge_offset + e * self.per_edge + k
    }

    pub fn face_dof(&self, f: usize, k: usize) -> usize {
        self.face_offset + f * self.per_face + k
    }

    pub fn cell_dof(&self, c: usize, k: usize) -> usize {
        self.cell_offset + c * self.per_cell + k
    }

    /// Nodal boundary values for scalar Lagrange spaces: field at boundary
    /// vertices and, for degree 2, at boundary edge midpoints.
    pub fn boundary_nodal_values<T: Coeff>(
        &self,
        field: impl Fn([f64; 3]) -> T,
    ) -> Vec<(usize, T)> {
        assert_eq!(self.desc.family, Family::Lagrange);
        let mesh = &self.mesh;
        let mut out = Vec::new();
        for (v, &b) in mesh.boundary_vertices.iter().enumerate() {
            if b {
                out.push((self.vertex_dof(v, 0), field(mesh.vertices[v])));
            }
        }
        if self.per_edge > 0 {
            for (e, &b) in mesh.boundary_edges.iter().enumerate() {
                if !b {
                    continue;
                }
                let [lo, hi] = mesh.edges[e];
                let (a, z) = (mesh.vertices[lo], mesh.vertices[hi]);
                let mid = [
                    (a[0] + z[0]) / 2.0,
                    (a[1] + z[1]) / 2.0,
                    (a[2] + z[2]) / 2.0,
                ];
                out.push((self.edge_dof(e, 0), field(mid)));
            }
        }
        out
    }

    /// Circulation moments of a vector field along canonical directions of
    /// boundary edges (Nedelec essential data).
    pub fn boundary_edge_circulations(
        &self,
        field: impl Fn([f64; 3]) -> [f64; 3],
    ) -> Vec<(usize, f64)> {
        assert_eq!(self.desc.family, Family::NedelecFirstKind);
        let mesh = &self.mesh;
        let (ts, ws) = crate::assembly::quadrature::gauss_legendre_01(12);
        let mut out = Vec::new();
        for (e, &b) in mesh.boundary_edges.iter().enumerate() {
            if !b {
                continue;
            }
            let [lo, hi] = mesh.edges[e];
            let (a, z) = (mesh.vertices[lo], mesh.vertices[hi]);
            let d = [z[0] - a[0], z[1] - a[1], z[2] - a[2]];
            let mut acc = 0.0;
            for (&t, &w) in ts.iter().zip(&ws) {
                let p = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
                let f = field(p);
                acc += w * (f[0] * d[0] + f[1] * d[1] + f[2] * d[2]);
            }
            out.push((self.edge_dof(e, 0), acc));
        }
        out
    }
}

fn make_element(dim: usize, desc: SpaceDescriptor) -> Result<RefElement> {
    match (desc.family, desc.value_kind) {
        (Family::Lagrange, ValueKind::VectorReal) => vector_lagrange(dim, desc.degree),
        (Family::Lagrange, _) => lagrange(dim, desc.degree),
        (Family::RaviartThomas, ValueKind::VectorReal) => raviart_thomas(dim, desc.degree),
        (Family::NedelecFirstKind, ValueKind::VectorReal) => {
            nedelec_first_kind(dim, desc.degree)
        }
        (Family::DiscontinuousLagrange, _) => discontinuous_lagrange(dim, desc.degree),
        _ => Err(Error::UnsupportedElement {
            family: "unknown",
            degree: desc.degree,
            dim,
        }),
    }
}

/// Build the global dof map of a space over a mesh.
pub fn make_space(mesh: &Arc<Mesh>, desc: SpaceDescriptor) -> Result<Arc<DofMap>> {
    let dim = mesh.dim;
    let element = make_element(dim, desc)?;
    let n_local_entities = |d: usize| -> usize {
        match d {
            0 => dim + 1,
            1 => {
                if dim == 2 {
                    3
                } else {
                    6
                }
            }
            2 if dim == 3 => 4,
            d if d == dim => 1,
            _ => 0,
        }
    };

    // dofs per single entity of each dimension (uniform across entities)
    let mut per = [0usize; 4];
    for dof in &element.dofs {
        let (ed, _) = dof.entity(dim);
        per[ed] += 1;
    }
    for d in 0..=dim {
        let n = n_local_entities(d);
        if n > 0 {
            debug_assert_eq!(per[d] % n, 0);
            per[d] /= n;
        }
    }
    let (per_vertex, per_edge) = (per[0], per[1]);
    let (per_face, per_cell) = if dim == 3 {
        (per[2], per[3])
    } else {
        (0, per[2])
    };

    let edge_offset = mesh.n_vertices() * per_vertex;
    let face_offset = edge_offset + mesh.n_edges() * per_edge;
    let cell_offset = face_offset + mesh.n_faces() * per_face;
    let n_dofs = cell_offset + mesh.n_cells() * per_cell;

    // ordinal of each local dof within its entity, in reference dof order
    let nd = element.ndofs();
    let mut ordinal = vec![0usize; nd];
    {
        let mut counters = std::collections::HashMap::new();
        for (l, dof) in element.dofs.iter().enumerate() {
            let key = dof.entity(dim);
            let k = counters.entry(key).or_insert(0usize);
            ordinal[l] = *k;
            *k += 1;
        }
    }

    let nep = mesh.edges_per_cell();
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells() * nd);
    for c in 0..mesh.n_cells() {
        let cv = mesh.cell_vertices(c);
        for (l, dof) in element.dofs.iter().enumerate() {
            let k = ordinal[l];
            let (global, sign): (usize, f64) = match *dof {
                RefDof::Point {
                    entity_dim, entity, ..
                } => match entity_dim {
                    0 => (cv[entity] * per_vertex + k, 1.0),
                    1 => (edge_offset + mesh.cell_edges[c * nep + entity] * per_edge + k, 1.0),
                    d if d == dim => (cell_offset + c * per_cell + k, 1.0),
                    _ => unreachable!(),
                },
                RefDof::EdgeNormalMoment { edge, order } => {
                    let e = mesh.cell_edges[c * nep + edge];
                    let mut s = mesh.cell_edge_normals[c * nep + edge] as f64;
                    if order == 1 {
                        s *= mesh.cell_edge_dirs[c * nep + edge] as f64;
                    }
                    (edge_offset + e * per_edge + k, s)
                }
                RefDof::EdgeTangentMoment { edge } => {
                    let e = mesh.cell_edges[c * nep + edge];
                    let s = mesh.cell_edge_dirs[c * nep + edge] as f64;
                    (edge_offset + e * per_edge + k, s)
                }
                RefDof::FaceNormalMoment { face } => {
                    let f = mesh.cell_faces[c * 4 + face];
                    let s = mesh.cell_face_normals[c * 4 + face] as f64;
                    (face_offset + f * per_face + k, s)
                }
                RefDof::InteriorMoment { .. } => (cell_offset + c * per_cell + k, 1.0),
            };
            cell_dofs.push((global as u32, sign as f32));
        }
    }

    // essential-boundary dof set
    let mut boundary_dofs = Vec::new();
    match (desc.family, desc.value_kind) {
        (Family::Lagrange, ValueKind::VectorReal) => {
            // componentwise A·n = 0 on axis-aligned boundaries: zero the
            // normal component at each boundary node
            let mut flags = vec![[false; 2]; mesh.n_vertices()];
            for (e, &b) in mesh.boundary_edges.iter().enumerate() {
                if !b {
                    continue;
                }
                let [lo, hi] = mesh.edges[e];
                let t = [
                    mesh.vertices[hi][0] - mesh.vertices[lo][0],
                    mesh.vertices[hi][1] - mesh.vertices[lo][1],
                ];
                let comp = if t[0].abs() < 1e-12 {
                    0 // edge along y, normal along x
                } else if t[1].abs() < 1e-12 {
                    1
                } else {
                    return Err(Error::UnsupportedElement {
                        family: "vector Lagrange on non-axis-aligned boundary",
                        degree: desc.degree,
                        dim,
                    });
                };
                flags[lo][comp] = true;
                flags[hi][comp] = true;
            }
            for (v, f) in flags.iter().enumerate() {
                for comp in 0..2 {
                    if f[comp] {
                        boundary_dofs.push(v * per_vertex + comp);
                    }
                }
            }
        }
        (Family::Lagrange, _) => {
            for (v, &b) in mesh.boundary_vertices.iter().enumerate() {
                if b {
                    for k in 0..per_vertex {
                        boundary_dofs.push(v * per_vertex + k);
                    }
                }
            }
            for (e, &b) in mesh.boundary_edges.iter().enumerate() {
                if b {
                    for k in 0..per_edge {
                        boundary_dofs.push(edge_offset + e * per_edge + k);
                    }
                }
            }
        }
        (Family::RaviartThomas, _) => {
            if dim == 2 {
                for (e, &b) in mesh.boundary_edges.iter().enumerate() {
                    if b {
                        for k in 0..per_edge {
                            boundary_dofs.push(edge_offset + e * per_edge + k);
                        }
                    }
                }
            } else {
                for (f, &b) in mesh.boundary_faces.iter().enumerate() {
                    if b {
                        for k in 0..per_face {
                            boundary_dofs.push(face_offset + f * per_face + k);
                        }
                    }
                }
            }
        }
        (Family::NedelecFirstKind, _) => {
            for (e, &b) in mesh.boundary_edges.iter().enumerate() {
                if b {
                    for k in 0..per_edge {
                        boundary_dofs.push(edge_offset + e * per_edge + k);
                    }
                }
            }
        }
        (Family::DiscontinuousLagrange, _) => {}
    }
    boundary_dofs.sort_unstable();
    boundary_dofs.dedup();

    Ok(Arc::new(DofMap {
        mesh: mesh.clone(),
        desc,
        element,
        n_dofs,
        cell_dofs,
        boundary_dofs,
        per_vertex,
        per_edge,
        per_face,
        per_cell,
        edge_offset,
        face_offset,
        cell_offset,
    }))
}

/// Coefficient vector over a space.
#[derive(Debug, Clone)]
pub struct FeFunction<T: Coeff> {
    pub dofmap: Arc<DofMap>,
    pub coeffs: Vec<T>,
}

impl<T: Coeff> FeFunction<T> {
    pub fn zero(dofmap: &Arc<DofMap>) -> Self {
        FeFunction {
            dofmap: dofmap.clone(),
            coeffs: vec![T::ZERO; dofmap.n_dofs],
        }
    }
}

/// Reference tabulation of an element at a fixed point set, with per-cell
/// mapping into physical values and gradients.
pub struct Tabulator {
    pub points: Vec<[f64; 3]>,
    tab: Tabulation,
    mapping: MappingKind,
    value_size: usize,
}

/// Physical basis data on one cell. Layout matches the tabulation:
/// `val[(q*ndofs + i)*vs + c]`, `grad[((q*ndofs + i)*vs + c)*3 + d]`.
pub struct CellBasis {
    pub npoints: usize,
    pub ndofs: usize,
    pub value_size: usize,
    pub dim: usize,
    pub val: Vec<f64>,
    pub grad: Vec<f64>,
}

impl CellBasis {
    fn sized(npoints: usize, ndofs: usize, value_size: usize, dim: usize) -> Self {
        CellBasis {
            npoints,
            ndofs,
            value_size,
            dim,
            val: vec![0.0; npoints * ndofs * value_size],
            grad: vec![0.0; npoints * ndofs * value_size * 3],
        }
    }

    #[inline]
    pub fn value_s(&self, q: usize, i: usize) -> f64 {
        debug_assert_eq!(self.value_size, 1);
        self.val[q * self.ndofs + i]
    }

    #[inline]
    pub fn grad_s(&self, q: usize, i: usize) -> [f64; 3] {
        let k = (q * self.ndofs + i) * 3;
        [self.grad[k], self.grad[k + 1], self.grad[k + 2]]
    }

    #[inline]
    pub fn value_v(&self, q: usize, i: usize) -> [f64; 3] {
        let k = (q * self.ndofs + i) * self.value_size;
        let mut out = [0.0; 3];
        out[..self.value_size].copy_from_slice(&self.val[k..k + self.value_size]);
        out
    }

    #[inline]
    pub fn div(&self, q: usize, i: usize) -> f64 {
        let base = (q * self.ndofs + i) * self.value_size;
        let mut acc = 0.0;
        for c in 0..self.value_size {
            acc += self.grad[(base + c) * 3 + c];
        }
        acc
    }

    #[inline]
    pub fn curl2(&self, q: usize, i: usize) -> f64 {
        debug_assert_eq!(self.value_size, 2);
        let base = (q * self.ndofs + i) * self.value_size;
        self.grad[(base + 1) * 3] - self.grad[base * 3 + 1]
    }

    #[inline]
    pub fn curl3(&self, q: usize, i: usize) -> [f64; 3] {
        debug_assert_eq!(self.value_size, 3);
        let base = (q * self.ndofs + i) * self.value_size;
        let g = |c: usize, d: usize| self.grad[(base + c) * 3 + d];
        [
            g(2, 1) - g(1, 2),
            g(0, 2) - g(2, 0),
            g(1, 0) - g(0, 1),
        ]
    }
}

impl Tabulator {
    pub fn new(element: &RefElement, points: &[[f64; 3]]) -> Self {
        Tabulator {
            points: points.to_vec(),
            tab: element.tabulate(points),
            mapping: element.mapping,
            value_size: element.value_size,
        }
    }

    pub fn make_buffer(&self, dim: usize) -> CellBasis {
        CellBasis::sized(self.tab.npoints, self.tab.ndofs, self.value_size, dim)
    }

    pub fn map2(&self, g: &CellGeom2, out: &mut CellBasis) {
        let (nd, vs) = (self.tab.ndofs, self.value_size);
        let nq = self.tab.npoints;
        debug_assert_eq!(out.val.len(), nq * nd * vs);
        let jac = &g.jac;
        let inv = &g.inv;
        let det = g.det;
        for k in 0..nq * nd {
            match self.mapping {
                MappingKind::Affine => {
                    for c in 0..vs {
                        let idx = k * vs + c;
                        out.val[idx] = self.tab.values[idx];
                        let gr = &self.tab.grads[idx * 3..idx * 3 + 3];
                        for d in 0..2 {
                            out.grad[idx * 3 + d] = gr[0] * inv[0][d] + gr[1] * inv[1][d];
                        }
                        out.grad[idx * 3 + 2] = 0.0;
                    }
                }
                MappingKind::ContravariantPiola => {
                    debug_assert_eq!(vs, 2);
                    let v0 = self.tab.values[k * vs];
                    let v1 = self.tab.values[k * vs + 1];
                    out.val[k * vs] = (jac[0][0] * v0 + jac[0][1] * v1) / det;
                    out.val[k * vs + 1] = (jac[1][0] * v0 + jac[1][1] * v1) / det;
                    // reference gradient rows: gr[a][b] = d v_a / d x_b
                    let gr0 = &self.tab.grads[(k * vs) * 3..(k * vs) * 3 + 3];
                    let gr1 = &self.tab.grads[(k * vs + 1) * 3..(k * vs + 1) * 3 + 3];
                    for i in 0..2 {
                        for d in 0..2 {
                            let mut acc = 0.0;
                            for a in 0..2 {
                                let gra = if a == 0 { gr0 } else { gr1 };
                                let inner = gra[0] * inv[0][d] + gra[1] * inv[1][d];
                                acc += jac[i][a] * inner;
                            }
                            out.grad[(k * vs + i) * 3 + d] = acc / det;
                        }
                        out.grad[(k * vs + i) * 3 + 2] = 0.0;
                    }
                }
                MappingKind::CovariantPiola => unreachable!("no 2D covariant elements"),
            }
        }
    }

    pub fn map3(&self, g: &CellGeom3, out: &mut CellBasis) {
        let (nd, vs) = (self.tab.ndofs, self.value_size);
        let nq = self.tab.npoints;
        let jac = &g.jac;
        let inv = &g.inv;
        let det = g.det;
        for k in 0..nq * nd {
            match self.mapping {
                MappingKind::Affine => {
                    for c in 0..vs {
                        let idx = k * vs + c;
                        out.val[idx] = self.tab.values[idx];
                        let gr = &self.tab.grads[idx * 3..idx * 3 + 3];
                        for d in 0..3 {
                            out.grad[idx * 3 + d] =
                                gr[0] * inv[0][d] + gr[1] * inv[1][d] + gr[2] * inv[2][d];
                        }
                    }
                }
                MappingKind::ContravariantPiola => {
                    debug_assert_eq!(vs, 3);
                    let v = [
                        self.tab.values[k * vs],
                        self.tab.values[k * vs + 1],
                        self.tab.values[k * vs + 2],
                    ];
                    for i in 0..3 {
                        out.val[k * vs + i] =
                            (jac[i][0] * v[0] + jac[i][1] * v[1] + jac[i][2] * v[2]) / det;
                    }
                    for i in 0..3 {
                        for d in 0..3 {
                            let mut acc = 0.0;
                            for a in 0..3 {
                                let gra = &self.tab.grads[(k * vs + a) * 3..(k * vs + a) * 3 + 3];
                                let inner =
                                    gra[0] * inv[0][d] + gra[1] * inv[1][d] + gra[2] * inv[2][d];
                                acc += jac[i][a] * inner;
                            }
                            out.grad[(k * vs + i) * 3 + d] = acc / det;
                        }
                    }
                }
                MappingKind::CovariantPiola => {
                    debug_assert_eq!(vs, 3);
                    let v = [
                        self.tab.values[k * vs],
                        self.tab.values[k * vs + 1],
                        self.tab.values[k * vs + 2],
                    ];
                    for i in 0..3 {
                        // J^{-T}[i][a] = inv[a][i]
                        out.val[k * vs + i] =
                            inv[0][i] * v[0] + inv[1][i] * v[1] + inv[2][i] * v[2];
                    }
                    for i in 0..3 {
                        for d in 0..3 {
                            let mut acc = 0.0;
                            for a in 0..3 {
                                let gra = &self.tab.grads[(k * vs + a) * 3..(k * vs + a) * 3 + 3];
                                let inner =
                                    gra[0] * inv[0][d] + gra[1] * inv[1][d] + gra[2] * inv[2][d];
                                acc += inv[a][i] * inner;
                            }
                            out.grad[(k * vs + i) * 3 + d] = acc;
                        }
                    }
                }
            }
        }
    }

    /// Map for the mesh's dimension.
    pub fn map_cell(&self, mesh: &Mesh, cell: usize, out: &mut CellBasis) {
        if mesh.dim == 2 {
            self.map2(&mesh.geom2(cell), out);
        } else {
            self.map3(&mesh.geom3(cell), out);
        }
    }
}

/// Interpolate a scalar field by nodal evaluation (Lagrange / DG spaces).
/// The field closure receives the owning cell, allowing piecewise data.
pub fn interpolate_scalar<T: Coeff>(
    dofmap: &Arc<DofMap>,
    field: impl Fn(usize, [f64; 3]) -> T,
) -> FeFunction<T> {
    let element = &dofmap.element;
    assert_eq!(element.value_size, 1, "scalar interpolation on vector space");
    let mesh = &dofmap.mesh;
    let mut coeffs = vec![T::ZERO; dofmap.n_dofs];
    for c in 0..mesh.n_cells() {
        let dofs: Vec<(usize, f64)> = dofmap.cell_dofs(c).collect();
        for (l, dof) in element.dofs.iter().enumerate() {
            if let RefDof::Point { point, .. } = dof {
                let x = if mesh.dim == 2 {
                    let g = mesh.geom2(c);
                    let p = g.map(point[0], point[1]);
                    [p[0], p[1], 0.0]
                } else {
                    mesh.geom3(c).map(point[0], point[1], point[2])
                };
                coeffs[dofs[l].0] = field(c, x);
            } else {
                unreachable!("scalar spaces have point dofs only");
            }
        }
    }
    FeFunction {
        dofmap: dofmap.clone(),
        coeffs,
    }
}

/// Interpolate a vector field by applying the element's dof functionals to
/// the Piola pullback on each cell.
pub fn interpolate_vector(
    dofmap: &Arc<DofMap>,
    field: impl Fn(usize, [f64; 3]) -> [f64; 3],
) -> FeFunction<f64> {
    let element = &dofmap.element;
    let mesh = &dofmap.mesh;
    let dim = mesh.dim;
    assert!(element.value_size == dim, "vector interpolation");
    let geom = ref_geom(dim);
    let mut coeffs = vec![0.0; dofmap.n_dofs];
    for c in 0..mesh.n_cells() {
        let dofs: Vec<(usize, f64)> = dofmap.cell_dofs(c).collect();
        if dim == 2 {
            let g = mesh.geom2(c);
            let pull = |p: [f64; 3]| -> Vec<f64> {
                let x = g.map(p[0], p[1]);
                let u = field(c, [x[0], x[1], 0.0]);
                match element.mapping {
                    MappingKind::Affine => vec![u[0], u[1]],
                    MappingKind::ContravariantPiola => {
                        let a = g.inv[0][0] * u[0] + g.inv[0][1] * u[1];
                        let b = g.inv[1][0] * u[0] + g.inv[1][1] * u[1];
                        vec![g.det * a, g.det * b]
                    }
                    MappingKind::CovariantPiola => unreachable!(),
                }
            };
            for (l, dof) in element.dofs.iter().enumerate() {
                let v = apply_ref_dof(dof, &geom, 12, pull);
                coeffs[dofs[l].0] = dofs[l].1 * v;
            }
        } else {
            let g = mesh.geom3(c);
            let pull = |p: [f64; 3]| -> Vec<f64> {
                let x = g.map(p[0], p[1], p[2]);
                let u = field(c, x);
                match element.mapping {
                    MappingKind::Affine => u.to_vec(),
                    MappingKind::ContravariantPiola => {
                        let mut w = [0.0; 3];
                        for i in 0..3 {
                            w[i] = g.det
                                * (g.inv[i][0] * u[0] + g.inv[i][1] * u[1] + g.inv[i][2] * u[2]);
                        }
                        w.to_vec()
                    }
                    MappingKind::CovariantPiola => {
                        let mut w = [0.0; 3];
                        for i in 0..3 {
                            // J^T u
                            w[i] = g.jac[0][i] * u[0] + g.jac[1][i] * u[1] + g.jac[2][i] * u[2];
                        }
                        w.to_vec()
                    }
                }
            };
            for (l, dof) in element.dofs.iter().enumerate() {
                let v = apply_ref_dof(dof, &geom, 12, pull);
                coeffs[dofs[l].0] = dofs[l].1 * v;
            }
        }
    }
    FeFunction {
        dofmap: dofmap.clone(),
        coeffs,
    }
}

/// Value and physical gradient of a scalar FE function at one reference
/// point of a cell.
pub fn evaluate_scalar<T: Coeff>(
    f: &FeFunction<T>,
    cell: usize,
    ref_point: [f64; 3],
) -> (T, [T; 3]) {
    let dm = &f.dofmap;
    let tab = Tabulator::new(&dm.element, &[ref_point]);
    let mut basis = tab.make_buffer(dm.mesh.dim);
    tab.map_cell(&dm.mesh, cell, &mut basis);
    let mut value = T::ZERO;
    let mut grad = [T::ZERO; 3];
    for (i, (g, s)) in dm.cell_dofs(cell).enumerate() {
        let c = f.coeffs[g] * s;
        value += c * basis.value_s(0, i);
        let gr = basis.grad_s(0, i);
        for d in 0..3 {
            grad[d] += c * gr[d];
        }
    }
    (value, grad)
}

/// Value, divergence and curl of a vector FE function at one reference
/// point of a cell. In 2D the scalar curl is returned in `curl[2]`.
pub struct VectorEval {
    pub value: [f64; 3],
    pub div: f64,
    pub curl: [f64; 3],
}

pub fn evaluate_vector(f: &FeFunction<f64>, cell: usize, ref_point: [f64; 3]) -> VectorEval {
    let dm = &f.dofmap;
    let dim = dm.mesh.dim;
    let tab = Tabulator::new(&dm.element, &[ref_point]);
    let mut basis = tab.make_buffer(dim);
    tab.map_cell(&dm.mesh, cell, &mut basis);
    let mut value = [0.0; 3];
    let mut div = 0.0;
    let mut curl = [0.0; 3];
    for (i, (g, s)) in dm.cell_dofs(cell).enumerate() {
        let c = f.coeffs[g] * s;
        let v = basis.value_v(0, i);
        for d in 0..3 {
            value[d] += c * v[d];
        }
        div += c * basis.div(0, i);
        if dim == 2 {
            curl[2] += c * basis.curl2(0, i);
        } else {
            let cu = basis.curl3(0, i);
            for d in 0..3 {
                curl[d] += c * cu[d];
            }
        }
    }
    VectorEval { value, div, curl }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh};

    #[test]
    fn dof_counts() {
        let mesh = Arc::new(build_unit_square_mesh(1).unwrap());
        let rt0 = make_space(&mesh, SpaceDescriptor::raviart_thomas(0)).unwrap();
        assert_eq!(rt0.n_dofs, 5);

        let mesh2 = Arc::new(build_unit_square_mesh(2).unwrap());
        let p1 = make_space(
            &mesh2,
            SpaceDescriptor::lagrange(1, ValueKind::ScalarComplex),
        )
        .unwrap();
        assert_eq!(p1.n_dofs, 9);

        let cube = Arc::new(build_unit_cube_mesh(1).unwrap());
        let ned = make_space(&cube, SpaceDescriptor::nedelec(1)).unwrap();
        assert_eq!(ned.n_dofs, 19);
        let rt3 = make_space(&cube, SpaceDescriptor::raviart_thomas(0)).unwrap();
        assert_eq!(rt3.n_dofs, cube.n_faces());
    }

    #[test]
    fn lagrange2_dof_count() {
        let mesh = Arc::new(build_unit_square_mesh(3).unwrap());
        let p2 = make_space(&mesh, SpaceDescriptor::lagrange(2, ValueKind::ScalarReal)).unwrap();
        assert_eq!(p2.n_dofs, mesh.n_vertices() + mesh.n_edges());
    }

    #[test]
    fn rt1_dof_count() {
        let mesh = Arc::new(build_unit_square_mesh(2).unwrap());
        let rt1 = make_space(&mesh, SpaceDescriptor::raviart_thomas(1)).unwrap();
        assert_eq!(rt1.n_dofs, 2 * mesh.n_edges() + 2 * mesh.n_cells());
    }

    #[test]
    fn interior_facet_dofs_shared() {
        let mesh = Arc::new(build_unit_square_mesh(2).unwrap());
        let rt = make_space(&mesh, SpaceDescriptor::raviart_thomas(0)).unwrap();
        let mut seen = vec![0usize; rt.n_dofs];
        for c in 0..mesh.n_cells() {
            for (g, _) in rt.cell_dofs(c) {
                seen[g] += 1;
            }
        }
        for (e, &b) in mesh.boundary_edges.iter().enumerate() {
            let g = rt.edge_dof(e, 0);
            assert_eq!(seen[g], if b { 1 } else { 2 });
        }
    }

    #[test]
    fn rt0_reproduces_constants() {
        let mesh = Arc::new(build_unit_square_mesh(3).unwrap());
        let rt = make_space(&mesh, SpaceDescriptor::raviart_thomas(0)).unwrap();
        let f = interpolate_vector(&rt, |_, _| [1.0, 2.0, 0.0]);
        for c in 0..mesh.n_cells() {
            for p in [[0.25, 0.25, 0.0], [0.1, 0.6, 0.0]] {
                let ev = evaluate_vector(&f, c, p);
                assert!((ev.value[0] - 1.0).abs() < 1e-12);
                assert!((ev.value[1] - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nedelec_reproduces_rotation() {
        // (y, -x, 0) lies in the lowest first-kind Nedelec space
        let mesh = Arc::new(build_unit_cube_mesh(2).unwrap());
        let ned = make_space(&mesh, SpaceDescriptor::nedelec(1)).unwrap();
        let f = interpolate_vector(&ned, |_, x| [x[1], -x[0], 0.0]);
        for c in [0usize, 7, 21] {
            let ev = evaluate_vector(&f, c, [0.3, 0.2, 0.1]);
            let g = mesh.geom3(c);
            let x = g.map(0.3, 0.2, 0.1);
            assert!((ev.value[0] - x[1]).abs() < 1e-11, "{:?}", ev.value);
            assert!((ev.value[1] + x[0]).abs() < 1e-11);
            assert!(ev.value[2].abs() < 1e-11);
            // curl(y, -x, 0) = (0, 0, -2)
            assert!((ev.curl[2] + 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn lagrange_interpolation_rate() {
        // psi = cos(pi x) + i cos(pi y): P1 interpolation converges at
        // second order; the ratio between M=64 and M=128 sits near 4.
        let mut errs = Vec::new();
        for m in [64usize, 128] {
            let mesh = Arc::new(build_unit_square_mesh(m).unwrap());
            let p1 = make_space(
                &mesh,
                SpaceDescriptor::lagrange(1, ValueKind::ScalarComplex),
            )
            .unwrap();
            let f = interpolate_scalar(&p1, |_, x| {
                C64::new((std::f64::consts::PI * x[0]).cos(), (std::f64::consts::PI * x[1]).cos())
            });
            let err = crate::assembly::l2_error_scalar(
                &f,
                |x, _| {
                    C64::new(
                        (std::f64::consts::PI * x[0]).cos(),
                        (std::f64::consts::PI * x[1]).cos(),
                    )
                },
                0.0,
                6,
            )
            .unwrap();
            errs.push(err);
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.6 && ratio < 4.4, "ratio {ratio}");
    }

    #[test]
    fn hat_function_is_nodal() {
        let mesh = Arc::new(build_unit_square_mesh(1).unwrap());
        let p1 = make_space(&mesh, SpaceDescriptor::lagrange(1, ValueKind::ScalarReal)).unwrap();
        let mut f = FeFunction::<f64>::zero(&p1);
        f.coeffs[0] = 1.0;
        // vertex 0 lives at the origin in cell 0 local vertex 0
        let (v, _) = evaluate_scalar(&f, 0, [0.0, 0.0, 0.0]);
        assert!((v - 1.0).abs() < 1e-14);
        let (v1, _) = evaluate_scalar(&f, 0, [1.0, 0.0, 0.0]);
        assert!(v1.abs() < 1e-14);
    }
}
