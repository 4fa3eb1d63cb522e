//! Structured simplicial meshes of the three computational domains:
//! unit square, L-shape, unit cube.
//!
//! Connectivity is fully deterministic: vertices are numbered
//! lexicographically by (y, x) in 2D and (z, y, x) in 3D, edges and faces by
//! ascending vertex tuples, and every builder produces bitwise-identical
//! output for a given density `M`.

use crate::error::{Error, Result};
use std::io::Write;

/// Local edges of the reference triangle; edge `i` is opposite vertex `i`.
pub const TRI_EDGES: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];

/// Local edges of the reference tetrahedron.
pub const TET_EDGES: [[usize; 2]; 6] = [[2, 3], [1, 3], [1, 2], [0, 3], [0, 2], [0, 1]];

/// Local faces of the reference tetrahedron; face `i` is opposite vertex `i`.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Simplicial mesh with oriented entities and boundary classification.
///
/// Cells are stored with positive signed volume. Edges are directed from the
/// lower to the higher global vertex index, faces are ascending triples; the
/// per-cell `±1` orientation data relates each cell's view of a shared entity
/// to that canonical one.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    /// Vertex coordinates, `z = 0` in 2D.
    pub vertices: Vec<[f64; 3]>,
    /// Cell-to-vertex connectivity, stride `dim + 1`.
    pub cells: Vec<usize>,
    /// Canonical edges (lo, hi).
    pub edges: Vec<[usize; 2]>,
    /// Canonical faces (ascending triples), 3D only.
    pub faces: Vec<[usize; 3]>,
    /// Per cell, global edge indices in local edge order.
    pub cell_edges: Vec<usize>,
    /// +1 if the local edge direction agrees with the canonical direction.
    pub cell_edge_dirs: Vec<i8>,
    /// 2D only: +1 if the cell's outward normal on the edge is the canonical
    /// edge normal (right-hand rotation of the canonical direction).
    pub cell_edge_normals: Vec<i8>,
    /// Per cell, global face indices in local face order (3D).
    pub cell_faces: Vec<usize>,
    /// +1 if the cell's outward face normal agrees with the canonical face
    /// normal (3D).
    pub cell_face_normals: Vec<i8>,
    pub boundary_vertices: Vec<bool>,
    pub boundary_edges: Vec<bool>,
    pub boundary_faces: Vec<bool>,
}

/// Affine geometry of a triangle: `x = origin + jac * x_ref`.
#[derive(Debug, Clone, Copy)]
pub struct CellGeom2 {
    pub origin: [f64; 2],
    /// Columns are the edge vectors v1 - v0, v2 - v0.
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

/// Affine geometry of a tetrahedron.
#[derive(Debug, Clone, Copy)]
pub struct CellGeom3 {
    pub origin: [f64; 3],
    pub jac: [[f64; 3]; 3],
    pub inv: [[f64; 3]; 3],
    pub det: f64,
}

impl CellGeom2 {
    pub fn map(&self, xr: f64, yr: f64) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xr + self.jac[0][1] * yr,
            self.origin[1] + self.jac[1][0] * xr + self.jac[1][1] * yr,
        ]
    }
}

impl CellGeom3 {
    pub fn map(&self, xr: f64, yr: f64, zr: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.origin[i]
                + self.jac[i][0] * xr
                + self.jac[i][1] * yr
                + self.jac[i][2] * zr;
        }
        out
    }
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn geom2(&self, c: usize) -> CellGeom2 {
        debug_assert_eq!(self.dim, 2);
        let cv = self.cell_vertices(c);
        let p0 = self.vertices[cv[0]];
        let p1 = self.vertices[cv[1]];
        let p2 = self.vertices[cv[2]];
        let jac = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        CellGeom2 {
            origin: [p0[0], p0[1]],
            jac,
            inv,
            det,
        }
    }

    pub fn geom3(&self, c: usize) -> CellGeom3 {
        debug_assert_eq!(self.dim, 3);
        let cv = self.cell_vertices(c);
        let p0 = self.vertices[cv[0]];
        let mut jac = [[0.0; 3]; 3];
        for (k, &v) in cv[1..].iter().enumerate() {
            let p = self.vertices[v];
            for i in 0..3 {
                jac[i][k] = p[i] - p0[i];
            }
        }
        let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
            - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
            + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
        let mut inv = [[0.0; 3]; 3];
        inv[0][0] = (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) / det;
        inv[0][1] = (jac[0][2] * jac[2][1] - jac[0][1] * jac[2][2]) / det;
        inv[0][2] = (jac[0][1] * jac[1][2] - jac[0][2] * jac[1][1]) / det;
        inv[1][0] = (jac[1][2] * jac[2][0] - jac[1][0] * jac[2][2]) / det;
        inv[1][1] = (jac[0][0] * jac[2][2] - jac[0][2] * jac[2][0]) / det;
        inv[1][2] = (jac[0][2] * jac[1][0] - jac[0][0] * jac[1][2]) / det;
        inv[2][0] = (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]) / det;
        inv[2][1] = (jac[0][1] * jac[2][0] - jac[0][0] * jac[2][1]) / det;
        inv[2][2] = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) / det;
        CellGeom3 {
            origin: p0,
            jac,
            inv,
            det,
        }
    }

    /// Signed volume of a cell (area in 2D).
    pub fn cell_volume(&self, c: usize) -> f64 {
        match self.dim {
            2 => self.geom2(c).det / 2.0,
            _ => self.geom3(c).det / 6.0,
        }
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_volume(c)).sum()
    }

    /// Edges per cell (3 in 2D, 6 in 3D).
    pub fn edges_per_cell(&self) -> usize {
        if self.dim == 2 {
            3
        } else {
            6
        }
    }

    /// Plain-text dump: `dim nv nc` header, vertex coordinates, then 0-based
    /// cell vertex indices.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dim, self.n_vertices(), self.n_cells())?;
        for v in &self.vertices {
            if self.dim == 2 {
                writeln!(w, "{:.17e} {:.17e}", v[0], v[1])?;
            } else {
                writeln!(w, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
            }
        }
        let k = self.dim + 1;
        for c in 0..self.n_cells() {
            let cv = self.cell_vertices(c);
            let strs: Vec<String> = cv.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", strs.join(" "))?;
            debug_assert_eq!(cv.len(), k);
        }
        Ok(())
    }
}

/// Finish a mesh from vertices and positively oriented cells: extract edges
/// and faces, attach orientation data, classify the boundary.
fn finish(dim: usize, vertices: Vec<[f64; 3]>, cells: Vec<usize>) -> Mesh {
    let nv = vertices.len();
    let k = dim + 1;
    let nc = cells.len() / k;

    // Canonical edge list: sorted unique (lo, hi) pairs.
    let local_edges: &[[usize; 2]] = if dim == 2 { &TRI_EDGES } else { &TET_EDGES };
    let mut pairs: Vec<[usize; 2]> = Vec::with_capacity(nc * local_edges.len());
    for c in 0..nc {
        let cv = &cells[c * k..(c + 1) * k];
        for le in local_edges {
            let (a, b) = (cv[le[0]], cv[le[1]]);
            pairs.push(if a < b { [a, b] } else { [b, a] });
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let edges = pairs;

    let mut cell_edges = Vec::with_capacity(nc * local_edges.len());
    let mut cell_edge_dirs = Vec::with_capacity(nc * local_edges.len());
    for c in 0..nc {
        let cv = &cells[c * k..(c + 1) * k];
        for le in local_edges {
            let (a, b) = (cv[le[0]], cv[le[1]]);
            let key = if a < b { [a, b] } else { [b, a] };
            let e = edges.binary_search(&key).expect("edge present");
            cell_edges.push(e);
            cell_edge_dirs.push(if a < b { 1 } else { -1 });
        }
    }

    // Faces (3D): sorted unique ascending triples.
    let (faces, cell_faces) = if dim == 3 {
        let mut tris: Vec<[usize; 3]> = Vec::with_capacity(nc * 4);
        for c in 0..nc {
            let cv = &cells[c * k..(c + 1) * k];
            for lf in &TET_FACES {
                let mut t = [cv[lf[0]], cv[lf[1]], cv[lf[2]]];
                t.sort_unstable();
                tris.push(t);
            }
        }
        tris.sort_unstable();
        tris.dedup();
        let mut cf = Vec::with_capacity(nc * 4);
        for c in 0..nc {
            let cv = &cells[c * k..(c + 1) * k];
            for lf in &TET_FACES {
                let mut t = [cv[lf[0]], cv[lf[1]], cv[lf[2]]];
                t.sort_unstable();
                cf.push(tris.binary_search(&t).expect("face present"));
            }
        }
        (tris, cf)
    } else {
        (Vec::new(), Vec::new())
    };

    // Geometric orientation signs against canonical entity frames.
    let centroid = |cv: &[usize]| -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in cv {
            for i in 0..3 {
                c[i] += vertices[v][i];
            }
        }
        for x in &mut c {
            *x /= cv.len() as f64;
        }
        c
    };

    let mut cell_edge_normals = Vec::new();
    if dim == 2 {
        cell_edge_normals.reserve(nc * 3);
        for c in 0..nc {
            let cv = &cells[c * k..(c + 1) * k];
            let cen = centroid(cv);
            for (i, _le) in TRI_EDGES.iter().enumerate() {
                let e = cell_edges[c * 3 + i];
                let [lo, hi] = edges[e];
                let (plo, phi) = (vertices[lo], vertices[hi]);
                let t = [phi[0] - plo[0], phi[1] - plo[1]];
                let n_can = [t[1], -t[0]];
                let mid = [(plo[0] + phi[0]) / 2.0, (plo[1] + phi[1]) / 2.0];
                let d = [mid[0] - cen[0], mid[1] - cen[1]];
                let s = n_can[0] * d[0] + n_can[1] * d[1];
                cell_edge_normals.push(if s > 0.0 { 1 } else { -1 });
            }
        }
    }

    let mut cell_face_normals = Vec::new();
    if dim == 3 {
        cell_face_normals.reserve(nc * 4);
        for c in 0..nc {
            let cv = &cells[c * k..(c + 1) * k];
            let cen = centroid(cv);
            for i in 0..4 {
                let f = cell_faces[c * 4 + i];
                let [a, b, cc] = faces[f];
                let (pa, pb, pc) = (vertices[a], vertices[b], vertices[cc]);
                let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
                let v = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
                let n_can = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                let m = [
                    (pa[0] + pb[0] + pc[0]) / 3.0 - cen[0],
                    (pa[1] + pb[1] + pc[1]) / 3.0 - cen[1],
                    (pa[2] + pb[2] + pc[2]) / 3.0 - cen[2],
                ];
                let s = n_can[0] * m[0] + n_can[1] * m[1] + n_can[2] * m[2];
                cell_face_normals.push(if s > 0.0 { 1 } else { -1 });
            }
        }
    }

    // Boundary classification via facet incidence counts.
    let mut boundary_vertices = vec![false; nv];
    let mut boundary_edges = vec![false; edges.len()];
    let mut boundary_faces = vec![false; faces.len()];
    if dim == 2 {
        let mut count = vec![0u8; edges.len()];
        for &e in &cell_edges {
            count[e] += 1;
        }
        for (e, &c) in count.iter().enumerate() {
            debug_assert!(c == 1 || c == 2);
            if c == 1 {
                boundary_edges[e] = true;
                boundary_vertices[edges[e][0]] = true;
                boundary_vertices[edges[e][1]] = true;
            }
        }
    } else {
        let mut count = vec![0u8; faces.len()];
        for &f in &cell_faces {
            count[f] += 1;
        }
        for (f, &c) in count.iter().enumerate() {
            debug_assert!(c == 1 || c == 2);
            if c == 1 {
                boundary_faces[f] = true;
                for &v in &faces[f] {
                    boundary_vertices[v] = true;
                }
            }
        }
        // An edge is on the boundary iff it belongs to a boundary face.
        for (f, &bf) in boundary_faces.iter().enumerate() {
            if !bf {
                continue;
            }
            let [a, b, c] = faces[f];
            for pair in [[a, b], [a, c], [b, c]] {
                let e = edges.binary_search(&pair).expect("face edge present");
                boundary_edges[e] = true;
            }
        }
    }

    Mesh {
        dim,
        vertices,
        cells,
        edges,
        faces,
        cell_edges,
        cell_edge_dirs,
        cell_edge_normals,
        cell_faces,
        cell_face_normals,
        boundary_vertices,
        boundary_edges,
        boundary_faces,
    }
}

/// Uniform mesh of the unit square: `(M+1)^2` vertices, each grid cell split
/// along the lower-left to upper-right diagonal, `2 M^2` triangles.
pub fn build_unit_square_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::ZeroMeshDensity);
    }
    let n = m + 1;
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push([i as f64 / m as f64, j as f64 / m as f64, 0.0]);
        }
    }
    let idx = |i: usize, j: usize| j * n + i;
    let mut cells = Vec::with_capacity(2 * m * m * 3);
    for j in 0..m {
        for i in 0..m {
            let (v00, v10) = (idx(i, j), idx(i + 1, j));
            let (v01, v11) = (idx(i, j + 1), idx(i + 1, j + 1));
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    Ok(finish(2, vertices, cells))
}

/// Uniform mesh of the L-shape `(-1,1)^2` minus the closed quadrant
/// `[0,1] x [-1,0]`; the reentrant corner sits at the origin with the domain
/// spanning polar angles `0..3*pi/2`. `M` is the number of cells per unit
/// length, giving `6 M^2` triangles.
pub fn build_lshape_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::ZeroMeshDensity);
    }
    let n = 2 * m + 1;
    let coord = |i: usize| (i as f64 - m as f64) / m as f64;
    let mut vmap = vec![usize::MAX; n * n];
    let mut vertices = Vec::new();
    for j in 0..n {
        for i in 0..n {
            // Exclude vertices strictly inside the removed quadrant
            // (x > 0 and y < 0).
            if i > m && j < m {
                continue;
            }
            vmap[j * n + i] = vertices.len();
            vertices.push([coord(i), coord(j), 0.0]);
        }
    }
    let mut cells = Vec::with_capacity(6 * m * m * 3);
    for j in 0..(n - 1) {
        for i in 0..(n - 1) {
            // Cell [i, i+1] x [j, j+1] is removed when it lies in the
            // excluded quadrant.
            if i >= m && j < m {
                continue;
            }
            let v00 = vmap[j * n + i];
            let v10 = vmap[j * n + i + 1];
            let v01 = vmap[(j + 1) * n + i];
            let v11 = vmap[(j + 1) * n + i + 1];
            debug_assert!(v00 != usize::MAX && v10 != usize::MAX);
            debug_assert!(v01 != usize::MAX && v11 != usize::MAX);
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    Ok(finish(2, vertices, cells))
}

/// Uniform Kuhn (Freudenthal) tetrahedralization of the unit cube:
/// `(M+1)^3` vertices, each grid cube split into 6 tetrahedra sharing the
/// main diagonal, `6 M^3` cells.
pub fn build_unit_cube_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::ZeroMeshDensity);
    }
    let n = m + 1;
    let mut vertices = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                vertices.push([
                    i as f64 / m as f64,
                    j as f64 / m as f64,
                    k as f64 / m as f64,
                ]);
            }
        }
    }
    let idx = |i: usize, j: usize, k: usize| (k * n + j) * n + i;
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let parity = |p: &[usize; 3]| -> bool {
        // true for even permutations
        matches!(p, [0, 1, 2] | [1, 2, 0] | [2, 0, 1])
    };
    let mut cells = Vec::with_capacity(6 * m * m * m * 4);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                for p in &PERMS {
                    let mut corner = [i, j, k];
                    let v0 = idx(corner[0], corner[1], corner[2]);
                    corner[p[0]] += 1;
                    let v1 = idx(corner[0], corner[1], corner[2]);
                    corner[p[1]] += 1;
                    let v2 = idx(corner[0], corner[1], corner[2]);
                    corner[p[2]] += 1;
                    let v3 = idx(corner[0], corner[1], corner[2]);
                    if parity(p) {
                        cells.extend_from_slice(&[v0, v1, v2, v3]);
                    } else {
                        cells.extend_from_slice(&[v0, v2, v1, v3]);
                    }
                }
            }
        }
    }
    Ok(finish(3, vertices, cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let mesh = build_unit_square_mesh(10).unwrap();
        assert_eq!(mesh.n_vertices(), 121);
        assert_eq!(mesh.n_cells(), 200);
    }

    #[test]
    fn square_m1_euler() {
        let mesh = build_unit_square_mesh(1).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_cells(), 2);
        assert_eq!(mesh.n_edges(), 5);
        let euler = mesh.n_vertices() as i64 - mesh.n_edges() as i64 + mesh.n_cells() as i64;
        assert_eq!(euler, 1);
    }

    #[test]
    fn square_boundary_edges() {
        let mesh = build_unit_square_mesh(4).unwrap();
        let nb = mesh.boundary_edges.iter().filter(|&&b| b).count();
        assert_eq!(nb, 16);
    }

    #[test]
    fn square_rejects_zero() {
        assert!(build_unit_square_mesh(0).is_err());
        assert!(build_lshape_mesh(0).is_err());
        assert!(build_unit_cube_mesh(0).is_err());
    }

    #[test]
    fn lshape_counts() {
        let mesh = build_lshape_mesh(4).unwrap();
        assert_eq!(mesh.n_cells(), 96);
        let euler = mesh.n_vertices() as i64 - mesh.n_edges() as i64 + mesh.n_cells() as i64;
        assert_eq!(euler, 1);
    }

    #[test]
    fn lshape_m1_euler() {
        let mesh = build_lshape_mesh(1).unwrap();
        assert_eq!(mesh.n_cells(), 6);
        let euler = mesh.n_vertices() as i64 - mesh.n_edges() as i64 + mesh.n_cells() as i64;
        assert_eq!(euler, 1);
    }

    #[test]
    fn lshape_reentrant_corner() {
        let mesh = build_lshape_mesh(2).unwrap();
        // Exactly one boundary vertex at the origin.
        let origin: Vec<usize> = (0..mesh.n_vertices())
            .filter(|&v| {
                let p = mesh.vertices[v];
                p[0] == 0.0 && p[1] == 0.0
            })
            .collect();
        assert_eq!(origin.len(), 1);
        let o = origin[0];
        assert!(mesh.boundary_vertices[o]);
        // Its boundary edges run along theta = 0 (positive x-axis) and
        // theta = 3*pi/2 (negative y-axis).
        let incident: Vec<usize> = (0..mesh.n_edges())
            .filter(|&e| {
                mesh.boundary_edges[e] && (mesh.edges[e][0] == o || mesh.edges[e][1] == o)
            })
            .collect();
        assert_eq!(incident.len(), 2);
        let mut dirs = Vec::new();
        for e in incident {
            let [a, b] = mesh.edges[e];
            let other = if a == o { b } else { a };
            let p = mesh.vertices[other];
            dirs.push((p[0] > 0.0 && p[1] == 0.0, p[0] == 0.0 && p[1] < 0.0));
        }
        assert!(dirs.iter().any(|d| d.0));
        assert!(dirs.iter().any(|d| d.1));
    }

    #[test]
    fn cube_counts() {
        let mesh = build_unit_cube_mesh(2).unwrap();
        assert_eq!(mesh.n_vertices(), 27);
        assert_eq!(mesh.n_cells(), 48);
    }

    #[test]
    fn cube_m1_volumes() {
        let mesh = build_unit_cube_mesh(1).unwrap();
        assert_eq!(mesh.n_cells(), 6);
        assert!((mesh.total_volume() - 1.0).abs() < 1e-14);
        for c in 0..mesh.n_cells() {
            assert!(mesh.cell_volume(c) > 0.0);
        }
    }

    #[test]
    fn cube_m8_interior_faces() {
        let mesh = build_unit_cube_mesh(8).unwrap();
        assert_eq!(mesh.n_cells(), 3072);
        let mut count = vec![0u8; mesh.n_faces()];
        for &f in &mesh.cell_faces {
            count[f] += 1;
        }
        for (f, &c) in count.iter().enumerate() {
            if mesh.boundary_faces[f] {
                assert_eq!(c, 1);
            } else {
                assert_eq!(c, 2);
            }
        }
    }

    #[test]
    fn volumes_match_domain() {
        for (mesh, vol) in [
            (build_unit_square_mesh(7).unwrap(), 1.0),
            (build_lshape_mesh(3).unwrap(), 3.0),
            (build_unit_cube_mesh(3).unwrap(), 1.0),
        ] {
            assert!((mesh.total_volume() - vol).abs() / vol < 1e-12);
            for c in 0..mesh.n_cells() {
                assert!(mesh.cell_volume(c) > 0.0, "cell {c} inverted");
            }
        }
    }

    #[test]
    fn connectivity_deterministic() {
        let a = build_lshape_mesh(3).unwrap();
        let b = build_lshape_mesh(3).unwrap();
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.cell_edge_dirs, b.cell_edge_dirs);
        let a3 = build_unit_cube_mesh(2).unwrap();
        let b3 = build_unit_cube_mesh(2).unwrap();
        assert_eq!(a3.cells, b3.cells);
        assert_eq!(a3.faces, b3.faces);
    }

    /// Summing signed normal fluxes of cellwise-constant fields over a shared
    /// facet from both sides must cancel.
    #[test]
    fn facet_orientation_cancellation() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);

        let mesh2 = build_lshape_mesh(2).unwrap();
        for _ in 0..10 {
            let field = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
            let mut acc = vec![0.0f64; mesh2.n_edges()];
            for c in 0..mesh2.n_cells() {
                for i in 0..3 {
                    let e = mesh2.cell_edges[c * 3 + i];
                    let sn = mesh2.cell_edge_normals[c * 3 + i] as f64;
                    let [lo, hi] = mesh2.edges[e];
                    let t = [
                        mesh2.vertices[hi][0] - mesh2.vertices[lo][0],
                        mesh2.vertices[hi][1] - mesh2.vertices[lo][1],
                    ];
                    let n_can = [t[1], -t[0]];
                    // flux of the constant field through the facet, outward
                    acc[e] += sn * (field[0] * n_can[0] + field[1] * n_can[1]);
                }
            }
            for e in 0..mesh2.n_edges() {
                if !mesh2.boundary_edges[e] {
                    assert!(acc[e].abs() < 1e-13, "edge {e} flux {}", acc[e]);
                }
            }
        }

        let mesh3 = build_unit_cube_mesh(2).unwrap();
        for _ in 0..10 {
            let field = [
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            ];
            let mut acc = vec![0.0f64; mesh3.n_faces()];
            for c in 0..mesh3.n_cells() {
                for i in 0..4 {
                    let f = mesh3.cell_faces[c * 4 + i];
                    let sn = mesh3.cell_face_normals[c * 4 + i] as f64;
                    let [a, b, cc] = mesh3.faces[f];
                    let (pa, pb, pc) = (
                        mesh3.vertices[a],
                        mesh3.vertices[b],
                        mesh3.vertices[cc],
                    );
                    let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
                    let v = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
                    let n = [
                        u[1] * v[2] - u[2] * v[1],
                        u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0],
                    ];
                    acc[f] += sn * (field[0] * n[0] + field[1] * n[1] + field[2] * n[2]);
                }
            }
            for f in 0..mesh3.n_faces() {
                if !mesh3.boundary_faces[f] {
                    assert!(acc[f].abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn dump_roundtrip_header() {
        let mesh = build_unit_square_mesh(2).unwrap();
        let mut buf = Vec::new();
        mesh.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "2 9 8");
        assert_eq!(text.lines().count(), 1 + 9 + 8);
    }
}
