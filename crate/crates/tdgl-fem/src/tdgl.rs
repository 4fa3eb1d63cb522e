//! Linearized backward Euler time steppers: the Galerkin-mixed scheme in 2D
//! and 3D, and the conventional vector-Lagrange scheme in 2D.
//!
//! Each step solves two independent linear systems, both built from
//! level-(n-1) data only: the complex order-parameter system and the real
//! (sigma, A) system. They share nothing, so the two solves run on separate
//! threads; per-system determinism is unaffected.

use crate::assembly::{
    assemble_lagrange_a_system, assemble_psi_system, assemble_sigma_a_system_2d,
    assemble_sigma_a_system_3d, assemble_weighted_mass, l2_error_scalar, l2_error_vector,
    quadrature::{quadrature_rule, CellKind},
    SystemBuilder,
};
use crate::error::{Error, Result};
use crate::fespace::{
    interpolate_scalar, interpolate_vector, make_space, C64, DofMap, FeFunction,
    SpaceDescriptor, Tabulator, ValueKind,
};
use crate::linsolve::LuSolver;
use crate::manufactured::{Case2d, Case3d, Domain2d};
use crate::mesh::Mesh;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Mixed,
    Lagrange,
}

/// Time-stepping configuration. `tau` must divide `t_final` into an integer
/// number of steps; `normalized` adjusts it when it does not.
#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub r: usize,
    pub m: usize,
    pub tau: f64,
    pub t_final: f64,
    pub kappa: f64,
}

impl SchemeConfig {
    /// Snap `tau` to `t_final / round(t_final / tau)`; returns the adjusted
    /// config and whether an adjustment happened.
    pub fn normalized(mut self) -> (Self, bool) {
        let n = (self.t_final / self.tau).round().max(1.0);
        let tau = self.t_final / n;
        let adjusted = (tau - self.tau).abs() > 1e-12 * self.tau.abs();
        self.tau = tau;
        (self, adjusted)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.tau).round() as usize
    }
}

/// Discrete state at one time level.
#[derive(Debug, Clone)]
pub struct TdglState {
    pub psi: FeFunction<C64>,
    pub a: FeFunction<f64>,
    pub sigma: FeFunction<f64>,
    pub n: usize,
    pub tau: f64,
}

impl TdglState {
    pub fn t(&self) -> f64 {
        self.n as f64 * self.tau
    }
}

/// Relative residual of the constraint rows (the sigma block) of the solved
/// saddle system.
fn constraint_residual(
    matrix: &crate::linsolve::SparseMatrix<f64>,
    rhs: &[f64],
    x: &[f64],
    n_sigma: usize,
) -> f64 {
    let ax = matrix.matvec(x);
    let mut r2 = 0.0;
    for i in 0..n_sigma {
        let d = ax[i] - rhs[i];
        r2 += d * d;
    }
    let mut s2 = 0.0;
    for v in &x[..n_sigma] {
        s2 += v * v;
    }
    (r2.sqrt()) / (s2.sqrt() + 1e-12)
}

const CONSTRAINT_TOL: f64 = 1e-10;

pub struct MixedSpaces {
    pub psi: Arc<DofMap>,
    pub sigma: Arc<DofMap>,
    pub a: Arc<DofMap>,
}

/// psi in complex Lagrange max(1, r), sigma in Lagrange r+1, A in
/// Raviart-Thomas r.
pub fn mixed_spaces_2d(mesh: &Arc<Mesh>, r: usize) -> Result<MixedSpaces> {
    let psi = make_space(
        mesh,
        SpaceDescriptor::lagrange(r.max(1), ValueKind::ScalarComplex),
    )?;
    let sigma = make_space(mesh, SpaceDescriptor::lagrange(r + 1, ValueKind::ScalarReal))?;
    let a = make_space(mesh, SpaceDescriptor::raviart_thomas(r))?;
    Ok(MixedSpaces { psi, sigma, a })
}

/// 3D spaces: sigma in the first-kind Nedelec space of order r+1.
pub fn mixed_spaces_3d(mesh: &Arc<Mesh>, r: usize) -> Result<MixedSpaces> {
    let psi = make_space(
        mesh,
        SpaceDescriptor::lagrange(r.max(1), ValueKind::ScalarComplex),
    )?;
    let sigma = make_space(mesh, SpaceDescriptor::nedelec(r + 1))?;
    let a = make_space(mesh, SpaceDescriptor::raviart_thomas(r))?;
    Ok(MixedSpaces { psi, sigma, a })
}

fn step_error(level: usize, e: Error) -> Error {
    Error::StepFailed {
        level,
        source: Box::new(e),
    }
}

/// Mixed-scheme driver on a 2D domain.
pub struct MixedDriver2d<'c> {
    pub case: &'c Case2d,
    pub config: SchemeConfig,
    pub spaces: MixedSpaces,
    pub load_degree: usize,
    psi_builder: SystemBuilder<C64>,
    saddle_builder: SystemBuilder<f64>,
    psi_solver: LuSolver,
    saddle_solver: LuSolver,
    pub last_constraint_residual: f64,
}

impl<'c> MixedDriver2d<'c> {
    pub fn new(case: &'c Case2d, mesh: &Arc<Mesh>, config: SchemeConfig) -> Result<Self> {
        debug_assert_eq!(config.kappa, case.kappa);
        let spaces = mixed_spaces_2d(mesh, config.r)?;
        let load_degree = match case.domain {
            Domain2d::UnitSquare => 6,
            // singular integrands: highest available rule
            Domain2d::LShape => 8,
        };
        let n_saddle = spaces.sigma.n_dofs + spaces.a.n_dofs;
        Ok(MixedDriver2d {
            case,
            config,
            load_degree,
            psi_builder: SystemBuilder::new(spaces.psi.n_dofs),
            saddle_builder: SystemBuilder::new(n_saddle),
            psi_solver: LuSolver::new(),
            saddle_solver: LuSolver::new(),
            spaces,
            last_constraint_residual: 0.0,
        })
    }

    /// `psi_0 = pi_h psi(0)`, `A_0 = pi_h A(0)`, `sigma_0 = pi_h curl A(0)`
    /// (the scheme itself never reads `sigma_0`).
    pub fn init_state(&self) -> TdglState {
        let case = self.case;
        TdglState {
            psi: interpolate_scalar(&self.spaces.psi, |_, x| case.psi0(x)),
            a: interpolate_vector(&self.spaces.a, |_, x| case.a0(x)),
            sigma: interpolate_scalar(&self.spaces.sigma, |_, x| case.sigma0(x)),
            n: 0,
            tau: self.config.tau,
        }
    }

    pub fn step(&mut self, state: &TdglState) -> Result<TdglState> {
        let level = state.n + 1;
        let t_new = level as f64 * self.config.tau;
        let (tau, kappa) = (self.config.tau, self.config.kappa);
        let case = self.case;

        assemble_psi_system(
            &mut self.psi_builder,
            &self.spaces.psi,
            &state.psi,
            &state.a,
            tau,
            kappa,
            Some(&|x| case.g(x, t_new)),
            self.load_degree,
        )
        .map_err(|e| step_error(level, e))?;
        assemble_sigma_a_system_2d(
            &mut self.saddle_builder,
            &self.spaces.sigma,
            &self.spaces.a,
            &state.psi,
            &state.a,
            tau,
            kappa,
            &|x| case.he(x, t_new),
            &|x| case.c_he(x, t_new),
            &|x| case.f(x, t_new),
            self.load_degree,
        )
        .map_err(|e| step_error(level, e))?;

        // the two systems share no data; solve them concurrently
        let (psi_res, saddle_res) = {
            let psi_b = &self.psi_builder;
            let saddle_b = &self.saddle_builder;
            let psi_s = &mut self.psi_solver;
            let saddle_s = &mut self.saddle_solver;
            std::thread::scope(|scope| {
                let h = scope.spawn(move || saddle_s.solve(saddle_b.matrix(), saddle_b.rhs()));
                let p = psi_s.solve(psi_b.matrix(), psi_b.rhs());
                (p, h.join().expect("saddle solve thread"))
            })
        };
        let psi_coeffs = psi_res.map_err(|e| step_error(level, e))?;
        let saddle = saddle_res.map_err(|e| step_error(level, e))?;

        let ns = self.spaces.sigma.n_dofs;
        let res = constraint_residual(
            self.saddle_builder.matrix(),
            self.saddle_builder.rhs(),
            &saddle,
            ns,
        );
        self.last_constraint_residual = res;
        if res > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolated {
                level,
                residual: res,
            });
        }

        Ok(TdglState {
            psi: FeFunction {
                dofmap: self.spaces.psi.clone(),
                coeffs: psi_coeffs,
            },
            sigma: FeFunction {
                dofmap: self.spaces.sigma.clone(),
                coeffs: saddle[..ns].to_vec(),
            },
            a: FeFunction {
                dofmap: self.spaces.a.clone(),
                coeffs: saddle[ns..].to_vec(),
            },
            n: level,
            tau: self.config.tau,
        })
    }

    /// March to `t_final` and measure terminal L2 errors (psi, A, sigma).
    pub fn run(&mut self) -> Result<(TdglState, [f64; 3])> {
        let mut state = self.init_state();
        for _ in 0..self.config.n_steps() {
            state = self.step(&state)?;
        }
        let errors = self.errors(&state)?;
        Ok((state, errors))
    }

    pub fn errors(&self, state: &TdglState) -> Result<[f64; 3]> {
        let case = self.case;
        let t = state.t();
        let deg = self.load_degree;
        let e_psi = l2_error_scalar(&state.psi, |x, t| case.psi(x, t), t, deg)?;
        let e_a = l2_error_vector(&state.a, |x, t| case.a(x, t), t, deg)?;
        let e_sigma = l2_error_scalar(&state.sigma, |x, t| case.sigma(x, t), t, deg)?;
        Ok([e_psi, e_a, e_sigma])
    }
}

/// Mixed-scheme driver on the unit cube.
pub struct MixedDriver3d<'c> {
    pub case: &'c Case3d,
    pub config: SchemeConfig,
    pub spaces: MixedSpaces,
    pub load_degree: usize,
    psi_builder: SystemBuilder<C64>,
    saddle_builder: SystemBuilder<f64>,
    psi_solver: LuSolver,
    saddle_solver: LuSolver,
    pub last_constraint_residual: f64,
}

impl<'c> MixedDriver3d<'c> {
    pub fn new(case: &'c Case3d, mesh: &Arc<Mesh>, config: SchemeConfig) -> Result<Self> {
        debug_assert_eq!(config.kappa, case.kappa);
        let spaces = mixed_spaces_3d(mesh, config.r)?;
        let n_saddle = spaces.sigma.n_dofs + spaces.a.n_dofs;
        Ok(MixedDriver3d {
            case,
            config,
            load_degree: 5,
            psi_builder: SystemBuilder::new(spaces.psi.n_dofs),
            saddle_builder: SystemBuilder::new(n_saddle),
            psi_solver: LuSolver::new(),
            saddle_solver: LuSolver::new(),
            spaces,
            last_constraint_residual: 0.0,
        })
    }

    pub fn init_state(&self) -> TdglState {
        let case = self.case;
        TdglState {
            psi: interpolate_scalar(&self.spaces.psi, |_, x| case.psi0(x)),
            a: interpolate_vector(&self.spaces.a, |_, x| case.a0(x)),
            sigma: interpolate_vector(&self.spaces.sigma, |_, x| case.sigma0(x)),
            n: 0,
            tau: self.config.tau,
        }
    }

    pub fn step(&mut self, state: &TdglState) -> Result<TdglState> {
        let level = state.n + 1;
        let t_new = level as f64 * self.config.tau;
        let (tau, kappa) = (self.config.tau, self.config.kappa);
        let case = self.case;

        assemble_psi_system(
            &mut self.psi_builder,
            &self.spaces.psi,
            &state.psi,
            &state.a,
            tau,
            kappa,
            Some(&|x| case.g(x, t_new)),
            self.load_degree,
        )
        .map_err(|e| step_error(level, e))?;
        assemble_sigma_a_system_3d(
            &mut self.saddle_builder,
            &self.spaces.sigma,
            &self.spaces.a,
            &state.psi,
            &state.a,
            tau,
            kappa,
            &|x| case.he(x, t_new),
            &|x| case.curl_he(x, t_new),
            &|x| case.f(x, t_new),
            self.load_degree,
        )
        .map_err(|e| step_error(level, e))?;

        let (psi_res, saddle_res) = {
            let psi_b = &self.psi_builder;
            let saddle_b = &self.saddle_builder;
            let psi_s = &mut self.psi_solver;
            let saddle_s = &mut self.saddle_solver;
            std::thread::scope(|scope| {
                let h = scope.spawn(move || saddle_s.solve(saddle_b.matrix(), saddle_b.rhs()));
                let p = psi_s.solve(psi_b.matrix(), psi_b.rhs());
                (p, h.join().expect("saddle solve thread"))
            })
        };
        let psi_coeffs = psi_res.map_err(|e| step_error(level, e))?;
        let saddle = saddle_res.map_err(|e| step_error(level, e))?;

        let ns = self.spaces.sigma.n_dofs;
        let res = constraint_residual(
            self.saddle_builder.matrix(),
            self.saddle_builder.rhs(),
            &saddle,
            ns,
        );
        self.last_constraint_residual = res;
        if res > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolated {
                level,
                residual: res,
            });
        }

        Ok(TdglState {
            psi: FeFunction {
                dofmap: self.spaces.psi.clone(),
                coeffs: psi_coeffs,
            },
            sigma: FeFunction {
                dofmap: self.spaces.sigma.clone(),
                coeffs: saddle[..ns].to_vec(),
            },
            a: FeFunction {
                dofmap: self.spaces.a.clone(),
                coeffs: saddle[ns..].to_vec(),
            },
            n: level,
            tau: self.config.tau,
        })
    }

    pub fn run(&mut self) -> Result<(TdglState, [f64; 3])> {
        let mut state = self.init_state();
        for _ in 0..self.config.n_steps() {
            state = self.step(&state)?;
        }
        let errors = self.errors(&state)?;
        Ok((state, errors))
    }

    pub fn errors(&self, state: &TdglState) -> Result<[f64; 3]> {
        let case = self.case;
        let t = state.t();
        let deg = self.load_degree;
        let e_psi = l2_error_scalar(&state.psi, |x, t| case.psi(x, t), t, deg)?;
        let e_a = l2_error_vector(&state.a, |x, t| case.a(x, t), t, deg)?;
        let e_sigma = l2_error_vector(&state.sigma, |x, t| case.sigma(x, t), t, deg)?;
        Ok([e_psi, e_a, e_sigma])
    }
}

pub struct LagrangeSpaces {
    pub psi: Arc<DofMap>,
    pub a: Arc<DofMap>,
    /// Reporting space for the piecewise curl of A.
    pub sigma: Arc<DofMap>,
}

pub fn lagrange_spaces_2d(mesh: &Arc<Mesh>) -> Result<LagrangeSpaces> {
    Ok(LagrangeSpaces {
        psi: make_space(mesh, SpaceDescriptor::lagrange(1, ValueKind::ScalarComplex))?,
        a: make_space(mesh, SpaceDescriptor::lagrange(1, ValueKind::VectorReal))?,
        sigma: make_space(mesh, SpaceDescriptor::lagrange(1, ValueKind::ScalarReal))?,
    })
}

/// Conventional-scheme driver: A in vector Lagrange with componentwise
/// `A·n = 0`; the reported sigma is the L2 projection of `curl A_h` into
/// the Lagrange space.
pub struct LagrangeDriver2d<'c> {
    pub case: &'c Case2d,
    pub config: SchemeConfig,
    pub spaces: LagrangeSpaces,
    pub load_degree: usize,
    psi_builder: SystemBuilder<C64>,
    a_builder: SystemBuilder<f64>,
    psi_solver: LuSolver,
    a_solver: LuSolver,
}

impl<'c> LagrangeDriver2d<'c> {
    pub fn new(case: &'c Case2d, mesh: &Arc<Mesh>, config: SchemeConfig) -> Result<Self> {
        debug_assert_eq!(config.kappa, case.kappa);
        let spaces = lagrange_spaces_2d(mesh)?;
        let load_degree = match case.domain {
            Domain2d::UnitSquare => 6,
            Domain2d::LShape => 8,
        };
        Ok(LagrangeDriver2d {
            case,
            config,
            load_degree,
            psi_builder: SystemBuilder::new(spaces.psi.n_dofs),
            a_builder: SystemBuilder::new(spaces.a.n_dofs),
            psi_solver: LuSolver::new(),
            a_solver: LuSolver::new(),
            spaces,
        })
    }

    pub fn init_state(&self) -> TdglState {
        let case = self.case;
        TdglState {
            psi: interpolate_scalar(&self.spaces.psi, |_, x| case.psi0(x)),
            a: interpolate_vector(&self.spaces.a, |_, x| case.a0(x)),
            sigma: interpolate_scalar(&self.spaces.sigma, |_, x| case.sigma0(x)),
            n: 0,
            tau: self.config.tau,
        }
    }

    pub fn step(&mut self, state: &TdglState) -> Result<TdglState> {
        let level = state.n + 1;
        let t_new = level as f64 * self.config.tau;
        let (tau, kappa) = (self.config.tau, self.config.kappa);
        let case = self.case;

        assemble_psi_system(
            &mut self.psi_builder,
            &self.spaces.psi,
            &state.psi,
            &state.a,
            tau,
            kappa,
            Some(&|x| case.g(x, t_new)),
            self.load_degree,
        )
        .map_err(|e| step_error(level, e))?;
        assemble_lagrange_a_system(
            &mut self.a_builder,
            &self.spaces.a,
            &state.psi,
            &state.a,
            tau,
            kappa,
            &|x| case.he(x, t_new),
            &|x| case.f(x, t_new),
            self.load_degree,
        )
        .map_err(|e| step_error(level, e))?;

        let (psi_res, a_res) = {
            let psi_b = &self.psi_builder;
            let a_b = &self.a_builder;
            let psi_s = &mut self.psi_solver;
            let a_s = &mut self.a_solver;
            std::thread::scope(|scope| {
                let h = scope.spawn(move || a_s.solve(a_b.matrix(), a_b.rhs()));
                let p = psi_s.solve(psi_b.matrix(), psi_b.rhs());
                (p, h.join().expect("A solve thread"))
            })
        };
        let psi_coeffs = psi_res.map_err(|e| step_error(level, e))?;
        let a_coeffs = a_res.map_err(|e| step_error(level, e))?;

        let a_fun = FeFunction {
            dofmap: self.spaces.a.clone(),
            coeffs: a_coeffs,
        };
        let sigma = self.project_curl(&a_fun).map_err(|e| step_error(level, e))?;

        Ok(TdglState {
            psi: FeFunction {
                dofmap: self.spaces.psi.clone(),
                coeffs: psi_coeffs,
            },
            a: a_fun,
            sigma,
            n: level,
            tau: self.config.tau,
        })
    }

    /// L2 projection of the piecewise-constant `curl A_h` into Lagrange P1.
    fn project_curl(&self, a: &FeFunction<f64>) -> Result<FeFunction<f64>> {
        let map_s = &self.spaces.sigma;
        let mesh = &map_s.mesh;
        let mass = assemble_weighted_mass(map_s, &|_| 1.0, 4)?;
        let rule = quadrature_rule(CellKind::Triangle, 4)?;
        let pts: Vec<[f64; 3]> = (0..rule.len()).map(|q| rule.ref_point(q)).collect();
        let tab_s = Tabulator::new(&map_s.element, &pts);
        let tab_a = Tabulator::new(&a.dofmap.element, &pts);
        let mut b_s = tab_s.make_buffer(2);
        let mut b_a = tab_a.make_buffer(2);
        let mut rhs = vec![0.0; map_s.n_dofs];
        for c in 0..mesh.n_cells() {
            let geom = mesh.geom2(c);
            tab_s.map2(&geom, &mut b_s);
            tab_a.map2(&geom, &mut b_a);
            let ad: Vec<(usize, f64)> = a.dofmap.cell_dofs(c).collect();
            let sd: Vec<(usize, f64)> = map_s.cell_dofs(c).collect();
            for q in 0..rule.len() {
                let w = rule.weights[q] * geom.det.abs();
                let mut curl = 0.0;
                for (i, &(gi, si)) in ad.iter().enumerate() {
                    curl += a.coeffs[gi] * si * b_a.curl2(q, i);
                }
                for (j, &(gj, sj)) in sd.iter().enumerate() {
                    rhs[gj] += w * sj * curl * b_s.value_s(q, j);
                }
            }
        }
        let coeffs = LuSolver::new().solve(&mass, &rhs)?;
        Ok(FeFunction {
            dofmap: map_s.clone(),
            coeffs,
        })
    }

    pub fn run(&mut self) -> Result<(TdglState, [f64; 3])> {
        let mut state = self.init_state();
        for _ in 0..self.config.n_steps() {
            state = self.step(&state)?;
        }
        let errors = self.errors(&state)?;
        Ok((state, errors))
    }

    pub fn errors(&self, state: &TdglState) -> Result<[f64; 3]> {
        let case = self.case;
        let t = state.t();
        let deg = self.load_degree;
        let e_psi = l2_error_scalar(&state.psi, |x, t| case.psi(x, t), t, deg)?;
        let e_a = l2_error_vector(&state.a, |x, t| case.a(x, t), t, deg)?;
        let e_sigma = l2_error_scalar(&state.sigma, |x, t| case.sigma(x, t), t, deg)?;
        Ok([e_psi, e_a, e_sigma])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_normalization() {
        let cfg = SchemeConfig {
            scheme: Scheme::Mixed,
            r: 0,
            m: 4,
            tau: 0.3,
            t_final: 1.0,
            kappa: 1.0,
        };
        let (norm, adjusted) = cfg.normalized();
        assert!(adjusted);
        assert_eq!(norm.n_steps(), 3);
        assert!((norm.tau * 3.0 - 1.0).abs() < 1e-15);

        let cfg2 = SchemeConfig {
            tau: 0.25,
            ..cfg
        };
        let (norm2, adjusted2) = cfg2.normalized();
        assert!(!adjusted2);
        assert_eq!(norm2.n_steps(), 4);
    }
}
