//! Weak-form assembly for the time steppers: the complex order-parameter
//! system, the real (sigma, A) saddle system of the mixed scheme, and the
//! vector-Lagrange comparison system.
//!
//! `SystemBuilder` freezes the sparsity pattern on the first assembly pass
//! and scatters values into it on every later pass, so a time loop pays for
//! triplet sorting once. Essential conditions are eliminated symmetrically:
//! constrained rows are dropped and given a unit diagonal, constrained
//! columns are folded into the right-hand side.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::fespace::{C64, CellBasis, Coeff, DofMap, FeFunction, Tabulator};
use crate::linsolve::{LinScalar, SparseMatrix};
use quadrature::{quadrature_rule, CellKind, QuadratureRule};
use std::sync::Arc;

/// Assembled linear system with the eliminated essential values recorded.
#[derive(Debug, Clone)]
pub struct AssembledSystem<T> {
    pub matrix: SparseMatrix<T>,
    pub rhs: Vec<T>,
    pub dirichlet: Vec<(usize, T)>,
}

enum Pattern<T> {
    Collecting(Vec<(usize, usize, T)>),
    Frozen(SparseMatrix<T>),
}

/// Reusable assembler for one system shape.
pub struct SystemBuilder<T: LinScalar> {
    n: usize,
    pattern: Pattern<T>,
    rhs: Vec<T>,
    mask: Vec<bool>,
    bc_vals: Vec<T>,
    bc_idx: Vec<usize>,
}

impl<T: LinScalar> SystemBuilder<T> {
    pub fn new(n: usize) -> Self {
        SystemBuilder {
            n,
            pattern: Pattern::Collecting(Vec::new()),
            rhs: vec![T::ZERO; n],
            mask: vec![false; n],
            bc_vals: vec![T::ZERO; n],
            bc_idx: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Start a pass: zero the matrix values and rhs, install the essential
    /// values. The constrained index set must be identical across passes.
    pub fn begin(&mut self, dirichlet: &[(usize, T)]) {
        for &i in &self.bc_idx {
            self.mask[i] = false;
            self.bc_vals[i] = T::ZERO;
        }
        self.bc_idx.clear();
        for &(i, v) in dirichlet {
            debug_assert!(i < self.n);
            self.mask[i] = true;
            self.bc_vals[i] = v;
            self.bc_idx.push(i);
        }
        self.rhs.fill(T::ZERO);
        match &mut self.pattern {
            Pattern::Collecting(trips) => trips.clear(),
            Pattern::Frozen(m) => m.values.fill(T::ZERO),
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        if self.mask[i] {
            return;
        }
        if self.mask[j] {
            self.rhs[i] = self.rhs[i] - v * self.bc_vals[j];
            return;
        }
        match &mut self.pattern {
            Pattern::Collecting(trips) => trips.push((i, j, v)),
            Pattern::Frozen(m) => {
                let lo = m.row_ptr[i];
                let hi = m.row_ptr[i + 1];
                let k = lo + m.col_idx[lo..hi]
                    .binary_search(&j)
                    .expect("entry outside frozen pattern");
                m.values[k] += v;
            }
        }
    }

    #[inline]
    pub fn add_rhs(&mut self, i: usize, v: T) {
        if !self.mask[i] {
            self.rhs[i] += v;
        }
    }

    /// Close the pass: place unit diagonals and boundary values on the
    /// constrained dofs; on the first pass, build the CSR pattern.
    pub fn finish(&mut self) -> Result<()> {
        let one = T::ONE;
        match &mut self.pattern {
            Pattern::Collecting(trips) => {
                for &i in &self.bc_idx {
                    trips.push((i, i, one));
                }
                let m = SparseMatrix::from_triplets(self.n, self.n, trips)?;
                self.pattern = Pattern::Frozen(m);
            }
            Pattern::Frozen(m) => {
                for &i in &self.bc_idx {
                    let lo = m.row_ptr[i];
                    let hi = m.row_ptr[i + 1];
                    let k = lo + m.col_idx[lo..hi]
                        .binary_search(&i)
                        .expect("diagonal slot");
                    m.values[k] += one;
                }
            }
        }
        for &i in &self.bc_idx {
            self.rhs[i] = self.bc_vals[i];
        }
        Ok(())
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        match &self.pattern {
            Pattern::Frozen(m) => m,
            Pattern::Collecting(_) => panic!("finish() not called"),
        }
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn dirichlet_pairs(&self) -> Vec<(usize, T)> {
        self.bc_idx.iter().map(|&i| (i, self.bc_vals[i])).collect()
    }

    pub fn to_system(&self) -> AssembledSystem<T> {
        AssembledSystem {
            matrix: self.matrix().clone(),
            rhs: self.rhs.clone(),
            dirichlet: self.dirichlet_pairs(),
        }
    }
}

fn cell_kind(dim: usize) -> CellKind {
    if dim == 2 {
        CellKind::Triangle
    } else {
        CellKind::Tetrahedron
    }
}

/// Polynomial degree of the element's basis (RT of order r contains degree
/// r+1 polynomials).
fn basis_poly_degree(map: &DofMap) -> usize {
    use crate::fespace::Family::*;
    match map.desc.family {
        RaviartThomas => map.desc.degree + 1,
        _ => map.desc.degree,
    }
}

struct CellCtx {
    phys: Vec<[f64; 3]>,
    detw: Vec<f64>,
}

impl CellCtx {
    fn new(nq: usize) -> Self {
        CellCtx {
            phys: vec![[0.0; 3]; nq],
            detw: vec![0.0; nq],
        }
    }

    fn load(&mut self, mesh: &crate::mesh::Mesh, c: usize, rule: &QuadratureRule) {
        if mesh.dim == 2 {
            let g = mesh.geom2(c);
            for q in 0..rule.len() {
                let rp = rule.ref_point(q);
                let p = g.map(rp[0], rp[1]);
                self.phys[q] = [p[0], p[1], 0.0];
                self.detw[q] = rule.weights[q] * g.det.abs();
            }
        } else {
            let g = mesh.geom3(c);
            for q in 0..rule.len() {
                let rp = rule.ref_point(q);
                self.phys[q] = g.map(rp[0], rp[1], rp[2]);
                self.detw[q] = rule.weights[q] * g.det.abs();
            }
        }
    }
}

fn rule_points(rule: &QuadratureRule) -> Vec<[f64; 3]> {
    (0..rule.len()).map(|q| rule.ref_point(q)).collect()
}

/// Evaluate a complex scalar FE function at the tabulated points of a cell.
fn eval_scalar_field(
    f: &FeFunction<C64>,
    basis: &CellBasis,
    cell: usize,
    vals: &mut [C64],
    grads: &mut [[C64; 3]],
) {
    let zero = C64::new(0.0, 0.0);
    for q in 0..basis.npoints {
        let mut v = zero;
        let mut g = [zero; 3];
        for (i, (gi, si)) in f.dofmap.cell_dofs(cell).enumerate() {
            let c = f.coeffs[gi] * si;
            v += c * basis.value_s(q, i);
            let gr = basis.grad_s(q, i);
            for d in 0..3 {
                g[d] += c * gr[d];
            }
        }
        vals[q] = v;
        grads[q] = g;
    }
}

/// Evaluate a real vector FE function (values and divergence).
fn eval_vector_field(
    f: &FeFunction<f64>,
    basis: &CellBasis,
    cell: usize,
    vals: &mut [[f64; 3]],
    divs: &mut [f64],
) {
    for q in 0..basis.npoints {
        let mut v = [0.0; 3];
        let mut dv = 0.0;
        for (i, (gi, si)) in f.dofmap.cell_dofs(cell).enumerate() {
            let c = f.coeffs[gi] * si;
            let bv = basis.value_v(q, i);
            for d in 0..3 {
                v[d] += c * bv[d];
            }
            dv += c * basis.div(q, i);
        }
        vals[q] = v;
        divs[q] = dv;
    }
}

fn check_same_mesh(a: &DofMap, b: &DofMap) -> Result<()> {
    if Arc::ptr_eq(&a.mesh, &b.mesh) {
        Ok(())
    } else {
        Err(Error::MeshMismatch)
    }
}

/// Assemble the linearized order-parameter system at one time level.
///
/// Matrix (trial `phi`, test `omega`, both in the complex Lagrange space):
/// `(1/tau)(phi,omega) - i kappa ((div A)phi, omega)
///  + ((i/kappa grad + A)phi, (i/kappa grad + A)omega)
///  + ((|psi|^2 - 1)phi, omega)`
/// with `A`, `psi` taken from the previous level. Right-hand side:
/// `(1/tau)(psi_prev, omega) + (g, omega)`; no essential condition.
#[allow(clippy::too_many_arguments)]
pub fn assemble_psi_system(
    builder: &mut SystemBuilder<C64>,
    map_psi: &Arc<DofMap>,
    psi_prev: &FeFunction<C64>,
    a_prev: &FeFunction<f64>,
    tau: f64,
    kappa: f64,
    g: Option<&dyn Fn([f64; 3]) -> C64>,
    load_degree: usize,
) -> Result<()> {
    check_same_mesh(map_psi, &psi_prev.dofmap)?;
    check_same_mesh(map_psi, &a_prev.dofmap)?;
    let mesh = &map_psi.mesh;
    let dim = mesh.dim;
    let max_deg = basis_poly_degree(map_psi).max(basis_poly_degree(&a_prev.dofmap));
    let mat_rule = quadrature_rule(cell_kind(dim), (2 * max_deg + 2).min(8))?;
    let load_rule = quadrature_rule(cell_kind(dim), load_degree)?;

    builder.begin(&[]);

    // matrix pass
    {
        let pts = rule_points(&mat_rule);
        let tab_psi = Tabulator::new(&map_psi.element, &pts);
        let tab_a = Tabulator::new(&a_prev.dofmap.element, &pts);
        let mut b_psi = tab_psi.make_buffer(dim);
        let mut b_a = tab_a.make_buffer(dim);
        let nq = mat_rule.len();
        let nd = map_psi.element.ndofs();
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        let mut a_vals = vec![[0.0; 3]; nq];
        let mut a_divs = vec![0.0; nq];
        let inv_k2 = 1.0 / (kappa * kappa);
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &mat_rule);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            tab_a.map_cell(mesh, c, &mut b_a);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            eval_vector_field(a_prev, &b_a, c, &mut a_vals, &mut a_divs);
            let dofs: Vec<(usize, f64)> = map_psi.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let apq = a_vals[q];
                let a2 = apq[0] * apq[0] + apq[1] * apq[1] + apq[2] * apq[2];
                let c_re = 1.0 / tau + psi_vals[q].norm_sqr() - 1.0 + a2;
                let diva = a_divs[q];
                for i in 0..nd {
                    let (gi, si) = dofs[i];
                    let vi = b_psi.value_s(q, i);
                    let gri = b_psi.grad_s(q, i);
                    let a_dot_gi = apq[0] * gri[0] + apq[1] * gri[1] + apq[2] * gri[2];
                    for j in 0..nd {
                        let (gj, sj) = dofs[j];
                        let vj = b_psi.value_s(q, j);
                        let grj = b_psi.grad_s(q, j);
                        let grad_dot =
                            gri[0] * grj[0] + gri[1] * grj[1] + gri[2] * grj[2];
                        let a_dot_gj = apq[0] * grj[0] + apq[1] * grj[1] + apq[2] * grj[2];
                        let re = c_re * vi * vj + inv_k2 * grad_dot;
                        let im = -kappa * diva * vi * vj
                            + (a_dot_gj * vi - a_dot_gi * vj) / kappa;
                        builder.add(gi, gj, C64::new(re * w * si * sj, im * w * si * sj));
                    }
                }
            }
        }
    }

    // load pass
    {
        let pts = rule_points(&load_rule);
        let tab_psi = Tabulator::new(&map_psi.element, &pts);
        let mut b_psi = tab_psi.make_buffer(dim);
        let nq = load_rule.len();
        let nd = map_psi.element.ndofs();
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &load_rule);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            let dofs: Vec<(usize, f64)> = map_psi.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let mut rhs = psi_vals[q] * (1.0 / tau);
                if let Some(gf) = g {
                    rhs += gf(ctx.phys[q]);
                }
                for (i, &(gi, si)) in dofs.iter().enumerate() {
                    builder.add_rhs(gi, rhs * (w * si * b_psi.value_s(q, i)));
                }
            }
        }
    }

    builder.finish()
}

/// Current density `(1/kappa) Im(conj(psi) grad psi)` from discrete data.
#[inline]
fn current_term(psi: C64, grad: [C64; 3], kappa: f64) -> [f64; 3] {
    let (u, v) = (psi.re, psi.im);
    let mut out = [0.0; 3];
    for d in 0..3 {
        out[d] = (u * grad[d].im - v * grad[d].re) / kappa;
    }
    out
}

/// Assemble the 2D mixed saddle system in (sigma, A), sigma dofs first.
///
/// Rows tested with `chi` impose `(sigma, chi) - (C chi, A) = 0`; rows
/// tested with `v` carry
/// `(1/tau)(A, v) + (div A, div v) + (C sigma, v) + (|psi|^2 A, v)`
/// against
/// `(1/tau)(A_prev, v) + (C He, v) + (f, v) - (i/2 kappa)(conj(psi) grad psi
///  - psi grad conj(psi), v)`.
/// Essential data: sigma = interpolated `He` on the boundary, `A·n = 0`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_sigma_a_system_2d(
    builder: &mut SystemBuilder<f64>,
    map_sigma: &Arc<DofMap>,
    map_a: &Arc<DofMap>,
    psi_prev: &FeFunction<C64>,
    a_prev: &FeFunction<f64>,
    tau: f64,
    kappa: f64,
    he: &dyn Fn([f64; 3]) -> f64,
    c_he: &dyn Fn([f64; 3]) -> [f64; 3],
    f_load: &dyn Fn([f64; 3]) -> [f64; 3],
    load_degree: usize,
) -> Result<()> {
    check_same_mesh(map_sigma, map_a)?;
    check_same_mesh(map_sigma, &psi_prev.dofmap)?;
    check_same_mesh(map_sigma, &a_prev.dofmap)?;
    if map_sigma.desc.degree != map_a.desc.degree + 1 {
        return Err(Error::BadSpacePairing {
            sigma_degree: map_sigma.desc.degree,
            vector_degree: map_a.desc.degree,
        });
    }
    let mesh = &map_sigma.mesh;
    debug_assert_eq!(mesh.dim, 2);
    let ns = map_sigma.n_dofs;
    let max_deg = basis_poly_degree(map_sigma).max(basis_poly_degree(map_a));
    let mat_rule = quadrature_rule(CellKind::Triangle, (2 * max_deg + 2).min(8))?;
    let load_rule = quadrature_rule(CellKind::Triangle, load_degree)?;

    let mut dirichlet: Vec<(usize, f64)> = map_sigma.boundary_nodal_values(he);
    dirichlet.extend(map_a.boundary_dofs.iter().map(|&d| (ns + d, 0.0)));
    builder.begin(&dirichlet);

    // matrix pass
    {
        let pts = rule_points(&mat_rule);
        let tab_s = Tabulator::new(&map_sigma.element, &pts);
        let tab_a = Tabulator::new(&map_a.element, &pts);
        let tab_psi = Tabulator::new(&psi_prev.dofmap.element, &pts);
        let mut b_s = tab_s.make_buffer(2);
        let mut b_a = tab_a.make_buffer(2);
        let mut b_psi = tab_psi.make_buffer(2);
        let nq = mat_rule.len();
        let (nds, nda) = (map_sigma.element.ndofs(), map_a.element.ndofs());
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &mat_rule);
            tab_s.map_cell(mesh, c, &mut b_s);
            tab_a.map_cell(mesh, c, &mut b_a);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            let sd: Vec<(usize, f64)> = map_sigma.cell_dofs(c).collect();
            let ad: Vec<(usize, f64)> = map_a.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let psi2 = psi_vals[q].norm_sqr();
                for i in 0..nds {
                    let (gi, si) = sd[i];
                    let chi_i = b_s.value_s(q, i);
                    let gr_i = b_s.grad_s(q, i);
                    let c_chi_i = [gr_i[1], -gr_i[0]];
                    // (sigma, chi)
                    for j in 0..nds {
                        let (gj, sj) = sd[j];
                        builder.add(gi, gj, w * si * sj * chi_i * b_s.value_s(q, j));
                    }
                    // -(C chi, A)
                    for j in 0..nda {
                        let (gj, sj) = ad[j];
                        let vj = b_a.value_v(q, j);
                        builder.add(
                            gi,
                            ns + gj,
                            -w * si * sj * (c_chi_i[0] * vj[0] + c_chi_i[1] * vj[1]),
                        );
                    }
                }
                for i in 0..nda {
                    let (gi, si) = ad[i];
                    let vi = b_a.value_v(q, i);
                    let divi = b_a.div(q, i);
                    // (C sigma, v)
                    for j in 0..nds {
                        let (gj, sj) = sd[j];
                        let gr_j = b_s.grad_s(q, j);
                        let c_chi_j = [gr_j[1], -gr_j[0]];
                        builder.add(
                            ns + gi,
                            gj,
                            w * si * sj * (c_chi_j[0] * vi[0] + c_chi_j[1] * vi[1]),
                        );
                    }
                    // (1/tau + |psi|^2)(A, v) + (div A, div v)
                    for j in 0..nda {
                        let (gj, sj) = ad[j];
                        let vj = b_a.value_v(q, j);
                        let divj = b_a.div(q, j);
                        let val = (1.0 / tau + psi2) * (vi[0] * vj[0] + vi[1] * vj[1])
                            + divi * divj;
                        builder.add(ns + gi, ns + gj, w * si * sj * val);
                    }
                }
            }
        }
    }

    // load pass (A rows only; constraint rows have zero data)
    {
        let pts = rule_points(&load_rule);
        let tab_a = Tabulator::new(&map_a.element, &pts);
        let tab_psi = Tabulator::new(&psi_prev.dofmap.element, &pts);
        let mut b_a = tab_a.make_buffer(2);
        let mut b_psi = tab_psi.make_buffer(2);
        let nq = load_rule.len();
        let nda = map_a.element.ndofs();
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        let mut ap_vals = vec![[0.0; 3]; nq];
        let mut ap_divs = vec![0.0; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &load_rule);
            tab_a.map_cell(mesh, c, &mut b_a);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            eval_vector_field(a_prev, &b_a, c, &mut ap_vals, &mut ap_divs);
            let ad: Vec<(usize, f64)> = map_a.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let x = ctx.phys[q];
                let che = c_he(x);
                let fl = f_load(x);
                let cur = current_term(psi_vals[q], psi_grads[q], kappa);
                let ap = ap_vals[q];
                let total = [
                    ap[0] / tau + che[0] + fl[0] + cur[0],
                    ap[1] / tau + che[1] + fl[1] + cur[1],
                ];
                for (i, &(gi, si)) in ad.iter().enumerate() {
                    let vi = b_a.value_v(q, i);
                    builder.add_rhs(ns + gi, w * si * (total[0] * vi[0] + total[1] * vi[1]));
                }
            }
        }
    }

    builder.finish()
}

/// Assemble the 3D mixed saddle system: sigma in the Nedelec space with
/// tangential boundary data from `He`, A in Raviart-Thomas with zero normal
/// trace; `(C chi, A)` couplings use the Nedelec curl.
#[allow(clippy::too_many_arguments)]
pub fn assemble_sigma_a_system_3d(
    builder: &mut SystemBuilder<f64>,
    map_sigma: &Arc<DofMap>,
    map_a: &Arc<DofMap>,
    psi_prev: &FeFunction<C64>,
    a_prev: &FeFunction<f64>,
    tau: f64,
    kappa: f64,
    he: &dyn Fn([f64; 3]) -> [f64; 3],
    curl_he: &dyn Fn([f64; 3]) -> [f64; 3],
    f_load: &dyn Fn([f64; 3]) -> [f64; 3],
    load_degree: usize,
) -> Result<()> {
    check_same_mesh(map_sigma, map_a)?;
    check_same_mesh(map_sigma, &psi_prev.dofmap)?;
    check_same_mesh(map_sigma, &a_prev.dofmap)?;
    if map_sigma.desc.degree != map_a.desc.degree + 1 {
        return Err(Error::BadSpacePairing {
            sigma_degree: map_sigma.desc.degree,
            vector_degree: map_a.desc.degree,
        });
    }
    let mesh = &map_sigma.mesh;
    debug_assert_eq!(mesh.dim, 3);
    let ns = map_sigma.n_dofs;
    let max_deg = basis_poly_degree(map_sigma).max(basis_poly_degree(map_a));
    let mat_rule = quadrature_rule(CellKind::Tetrahedron, (2 * max_deg + 2).min(6))?;
    let load_rule = quadrature_rule(CellKind::Tetrahedron, load_degree)?;

    let mut dirichlet: Vec<(usize, f64)> = map_sigma.boundary_edge_circulations(he);
    dirichlet.extend(map_a.boundary_dofs.iter().map(|&d| (ns + d, 0.0)));
    builder.begin(&dirichlet);

    // matrix pass
    {
        let pts = rule_points(&mat_rule);
        let tab_s = Tabulator::new(&map_sigma.element, &pts);
        let tab_a = Tabulator::new(&map_a.element, &pts);
        let tab_psi = Tabulator::new(&psi_prev.dofmap.element, &pts);
        let mut b_s = tab_s.make_buffer(3);
        let mut b_a = tab_a.make_buffer(3);
        let mut b_psi = tab_psi.make_buffer(3);
        let nq = mat_rule.len();
        let (nds, nda) = (map_sigma.element.ndofs(), map_a.element.ndofs());
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &mat_rule);
            tab_s.map_cell(mesh, c, &mut b_s);
            tab_a.map_cell(mesh, c, &mut b_a);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            let sd: Vec<(usize, f64)> = map_sigma.cell_dofs(c).collect();
            let ad: Vec<(usize, f64)> = map_a.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let psi2 = psi_vals[q].norm_sqr();
                for i in 0..nds {
                    let (gi, si) = sd[i];
                    let chi_i = b_s.value_v(q, i);
                    let curl_i = b_s.curl3(q, i);
                    for j in 0..nds {
                        let (gj, sj) = sd[j];
                        let chi_j = b_s.value_v(q, j);
                        let dot = chi_i[0] * chi_j[0] + chi_i[1] * chi_j[1] + chi_i[2] * chi_j[2];
                        builder.add(gi, gj, w * si * sj * dot);
                    }
                    for j in 0..nda {
                        let (gj, sj) = ad[j];
                        let vj = b_a.value_v(q, j);
                        let dot = curl_i[0] * vj[0] + curl_i[1] * vj[1] + curl_i[2] * vj[2];
                        builder.add(gi, ns + gj, -w * si * sj * dot);
                    }
                }
                for i in 0..nda {
                    let (gi, si) = ad[i];
                    let vi = b_a.value_v(q, i);
                    let divi = b_a.div(q, i);
                    for j in 0..nds {
                        let (gj, sj) = sd[j];
                        let curl_j = b_s.curl3(q, j);
                        let dot = curl_j[0] * vi[0] + curl_j[1] * vi[1] + curl_j[2] * vi[2];
                        builder.add(ns + gi, gj, w * si * sj * dot);
                    }
                    for j in 0..nda {
                        let (gj, sj) = ad[j];
                        let vj = b_a.value_v(q, j);
                        let divj = b_a.div(q, j);
                        let val = (1.0 / tau + psi2)
                            * (vi[0] * vj[0] + vi[1] * vj[1] + vi[2] * vj[2])
                            + divi * divj;
                        builder.add(ns + gi, ns + gj, w * si * sj * val);
                    }
                }
            }
        }
    }

    // load pass
    {
        let pts = rule_points(&load_rule);
        let tab_a = Tabulator::new(&map_a.element, &pts);
        let tab_psi = Tabulator::new(&psi_prev.dofmap.element, &pts);
        let mut b_a = tab_a.make_buffer(3);
        let mut b_psi = tab_psi.make_buffer(3);
        let nq = load_rule.len();
        let nda = map_a.element.ndofs();
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        let mut ap_vals = vec![[0.0; 3]; nq];
        let mut ap_divs = vec![0.0; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &load_rule);
            tab_a.map_cell(mesh, c, &mut b_a);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            eval_vector_field(a_prev, &b_a, c, &mut ap_vals, &mut ap_divs);
            let ad: Vec<(usize, f64)> = map_a.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let x = ctx.phys[q];
                let che = curl_he(x);
                let fl = f_load(x);
                let cur = current_term(psi_vals[q], psi_grads[q], kappa);
                let ap = ap_vals[q];
                let total = [
                    ap[0] / tau + che[0] + fl[0] + cur[0],
                    ap[1] / tau + che[1] + fl[1] + cur[1],
                    ap[2] / tau + che[2] + fl[2] + cur[2],
                ];
                for (i, &(gi, si)) in ad.iter().enumerate() {
                    let vi = b_a.value_v(q, i);
                    builder.add_rhs(
                        ns + gi,
                        w * si * (total[0] * vi[0] + total[1] * vi[1] + total[2] * vi[2]),
                    );
                }
            }
        }
    }

    builder.finish()
}

/// Assemble the conventional vector-Lagrange system for A (2D comparison
/// path): `(1/tau)(A,v) + (div A, div v) + (curl A, curl v) + (|psi|^2 A, v)`
/// against `(1/tau)(A_prev, v) + (He, curl v) + (f, v) + current term`, with
/// componentwise `A·n = 0` on the boundary.
#[allow(clippy::too_many_arguments)]
pub fn assemble_lagrange_a_system(
    builder: &mut SystemBuilder<f64>,
    map_a: &Arc<DofMap>,
    psi_prev: &FeFunction<C64>,
    a_prev: &FeFunction<f64>,
    tau: f64,
    kappa: f64,
    he: &dyn Fn([f64; 3]) -> f64,
    f_load: &dyn Fn([f64; 3]) -> [f64; 3],
    load_degree: usize,
) -> Result<()> {
    check_same_mesh(map_a, &psi_prev.dofmap)?;
    check_same_mesh(map_a, &a_prev.dofmap)?;
    let mesh = &map_a.mesh;
    debug_assert_eq!(mesh.dim, 2);
    let mat_rule = quadrature_rule(CellKind::Triangle, 4)?;
    let load_rule = quadrature_rule(CellKind::Triangle, load_degree)?;

    let dirichlet: Vec<(usize, f64)> =
        map_a.boundary_dofs.iter().map(|&d| (d, 0.0)).collect();
    builder.begin(&dirichlet);

    // matrix pass
    {
        let pts = rule_points(&mat_rule);
        let tab_a = Tabulator::new(&map_a.element, &pts);
        let tab_psi = Tabulator::new(&psi_prev.dofmap.element, &pts);
        let mut b_a = tab_a.make_buffer(2);
        let mut b_psi = tab_psi.make_buffer(2);
        let nq = mat_rule.len();
        let nda = map_a.element.ndofs();
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &mat_rule);
            tab_a.map_cell(mesh, c, &mut b_a);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            let ad: Vec<(usize, f64)> = map_a.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let psi2 = psi_vals[q].norm_sqr();
                for i in 0..nda {
                    let (gi, si) = ad[i];
                    let vi = b_a.value_v(q, i);
                    let divi = b_a.div(q, i);
                    let curli = b_a.curl2(q, i);
                    for j in 0..nda {
                        let (gj, sj) = ad[j];
                        let vj = b_a.value_v(q, j);
                        let val = (1.0 / tau + psi2) * (vi[0] * vj[0] + vi[1] * vj[1])
                            + divi * b_a.div(q, j)
                            + curli * b_a.curl2(q, j);
                        builder.add(gi, gj, w * si * sj * val);
                    }
                }
            }
        }
    }

    // load pass
    {
        let pts = rule_points(&load_rule);
        let tab_a = Tabulator::new(&map_a.element, &pts);
        let tab_psi = Tabulator::new(&psi_prev.dofmap.element, &pts);
        let mut b_a = tab_a.make_buffer(2);
        let mut b_psi = tab_psi.make_buffer(2);
        let nq = load_rule.len();
        let nda = map_a.element.ndofs();
        let mut ctx = CellCtx::new(nq);
        let mut psi_vals = vec![C64::new(0.0, 0.0); nq];
        let mut psi_grads = vec![[C64::new(0.0, 0.0); 3]; nq];
        let mut ap_vals = vec![[0.0; 3]; nq];
        let mut ap_divs = vec![0.0; nq];
        for c in 0..mesh.n_cells() {
            ctx.load(mesh, c, &load_rule);
            tab_a.map_cell(mesh, c, &mut b_a);
            tab_psi.map_cell(mesh, c, &mut b_psi);
            eval_scalar_field(psi_prev, &b_psi, c, &mut psi_vals, &mut psi_grads);
            eval_vector_field(a_prev, &b_a, c, &mut ap_vals, &mut ap_divs);
            let ad: Vec<(usize, f64)> = map_a.cell_dofs(c).collect();
            for q in 0..nq {
                let w = ctx.detw[q];
                let x = ctx.phys[q];
                let he_q = he(x);
                let fl = f_load(x);
                let cur = current_term(psi_vals[q], psi_grads[q], kappa);
                let ap = ap_vals[q];
                for (i, &(gi, si)) in ad.iter().enumerate() {
                    let vi = b_a.value_v(q, i);
                    let curli = b_a.curl2(q, i);
                    let val = (ap[0] / tau + fl[0] + cur[0]) * vi[0]
                        + (ap[1] / tau + fl[1] + cur[1]) * vi[1]
                        + he_q * curli;
                    builder.add_rhs(gi, w * si * val);
                }
            }
        }
    }

    builder.finish()
}

/// Weighted mass matrix on a scalar space, no boundary handling.
pub fn assemble_weighted_mass(
    map: &Arc<DofMap>,
    weight: &dyn Fn([f64; 3]) -> f64,
    degree: usize,
) -> Result<SparseMatrix<f64>> {
    let mesh = &map.mesh;
    let rule = quadrature_rule(cell_kind(mesh.dim), degree)?;
    let pts = rule_points(&rule);
    let tab = Tabulator::new(&map.element, &pts);
    let mut basis = tab.make_buffer(mesh.dim);
    let nd = map.element.ndofs();
    let mut ctx = CellCtx::new(rule.len());
    let mut trips = Vec::with_capacity(mesh.n_cells() * nd * nd);
    for c in 0..mesh.n_cells() {
        ctx.load(mesh, c, &rule);
        tab.map_cell(mesh, c, &mut basis);
        let dofs: Vec<(usize, f64)> = map.cell_dofs(c).collect();
        for q in 0..rule.len() {
            let w = ctx.detw[q] * weight(ctx.phys[q]);
            for i in 0..nd {
                let (gi, si) = dofs[i];
                for j in 0..nd {
                    let (gj, sj) = dofs[j];
                    trips.push((gi, gj, w * si * sj * basis.value_s(q, i) * basis.value_s(q, j)));
                }
            }
        }
    }
    SparseMatrix::from_triplets(map.n_dofs, map.n_dofs, &trips)
}

/// `L^2` error of a scalar FE function against an exact field at time `t`.
pub fn l2_error_scalar<T: Coeff>(
    f: &FeFunction<T>,
    exact: impl Fn([f64; 3], f64) -> T,
    t: f64,
    quad_degree: usize,
) -> Result<f64> {
    let map = &f.dofmap;
    let mesh = &map.mesh;
    let rule = quadrature_rule(cell_kind(mesh.dim), quad_degree)?;
    let pts = rule_points(&rule);
    let tab = Tabulator::new(&map.element, &pts);
    let mut basis = tab.make_buffer(mesh.dim);
    let mut ctx = CellCtx::new(rule.len());
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        ctx.load(mesh, c, &rule);
        tab.map_cell(mesh, c, &mut basis);
        let dofs: Vec<(usize, f64)> = map.cell_dofs(c).collect();
        for q in 0..rule.len() {
            let mut v = T::ZERO;
            for (i, &(gi, si)) in dofs.iter().enumerate() {
                v += f.coeffs[gi] * (si * basis.value_s(q, i));
            }
            let diff = v - exact(ctx.phys[q], t);
            acc += ctx.detw[q] * diff.abs2();
        }
    }
    Ok(acc.sqrt())
}

/// `L^2` error of a vector FE function against an exact field at time `t`.
pub fn l2_error_vector(
    f: &FeFunction<f64>,
    exact: impl Fn([f64; 3], f64) -> [f64; 3],
    t: f64,
    quad_degree: usize,
) -> Result<f64> {
    let map = &f.dofmap;
    let mesh = &map.mesh;
    let rule = quadrature_rule(cell_kind(mesh.dim), quad_degree)?;
    let pts = rule_points(&rule);
    let tab = Tabulator::new(&map.element, &pts);
    let mut basis = tab.make_buffer(mesh.dim);
    let mut ctx = CellCtx::new(rule.len());
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        ctx.load(mesh, c, &rule);
        tab.map_cell(mesh, c, &mut basis);
        let dofs: Vec<(usize, f64)> = map.cell_dofs(c).collect();
        for q in 0..rule.len() {
            let mut v = [0.0f64; 3];
            for (i, &(gi, si)) in dofs.iter().enumerate() {
                let bv = basis.value_v(q, i);
                for d in 0..3 {
                    v[d] += f.coeffs[gi] * si * bv[d];
                }
            }
            let ex = exact(ctx.phys[q], t);
            let mut d2 = 0.0;
            for d in 0..3 {
                let diff = v[d] - ex[d];
                d2 += diff * diff;
            }
            acc += ctx.detw[q] * d2;
        }
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{make_space, SpaceDescriptor, ValueKind};
    use crate::mesh::build_unit_square_mesh;

    #[test]
    fn l2_error_of_zero_function() {
        let mesh = Arc::new(build_unit_square_mesh(32).unwrap());
        let p1 = make_space(&mesh, SpaceDescriptor::lagrange(1, ValueKind::ScalarReal)).unwrap();
        let f = FeFunction::<f64>::zero(&p1);
        let err = l2_error_scalar(
            &f,
            |x, _| (std::f64::consts::PI * x[0]).cos(),
            0.0,
            6,
        )
        .unwrap();
        assert!((err - 0.5f64.sqrt()).abs() < 1e-6, "{err}");
    }

    #[test]
    fn interpolant_error_is_zero_for_member() {
        let mesh = Arc::new(build_unit_square_mesh(4).unwrap());
        let p1 = make_space(&mesh, SpaceDescriptor::lagrange(1, ValueKind::ScalarReal)).unwrap();
        let f = crate::fespace::interpolate_scalar(&p1, |_, x| 1.0 + 2.0 * x[0] - x[1]);
        let err = l2_error_scalar(&f, |x, _| 1.0 + 2.0 * x[0] - x[1], 0.0, 4).unwrap();
        assert!(err < 1e-13);
    }

    #[test]
    fn builder_pattern_reuse() {
        let mut b = SystemBuilder::<f64>::new(3);
        b.begin(&[(2, 5.0)]);
        b.add(0, 0, 2.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 3.0);
        b.add(0, 2, 4.0); // column elimination: rhs[0] -= 4*5
        b.add(2, 0, 7.0); // row elimination: dropped
        b.add_rhs(0, 1.0);
        b.finish().unwrap();
        assert_eq!(b.rhs()[0], 1.0 - 20.0);
        assert_eq!(b.rhs()[2], 5.0);
        let m1 = b.matrix().clone();
        // second pass with different values, same pattern
        b.begin(&[(2, 1.0)]);
        b.add(0, 0, 1.0);
        b.add(0, 1, 0.5);
        b.add(1, 0, 0.5);
        b.add(1, 1, 1.5);
        b.add(0, 2, 2.0);
        b.add(2, 0, 9.0);
        b.finish().unwrap();
        assert_eq!(b.matrix().nnz(), m1.nnz());
        assert_eq!(b.rhs()[0], -2.0);
        assert_eq!(b.matrix().matvec(&[1.0, 1.0, 1.0])[0], 1.5);
    }
}
