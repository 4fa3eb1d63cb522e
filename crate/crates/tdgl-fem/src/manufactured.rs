//! Manufactured problems: exact fields, boundary data and the forcing terms
//! that make them solve the gauged Ginzburg-Landau system.
//!
//! Three cases: a smooth solution on the unit square, a corner-singular
//! solution on the L-shape built from a septic cut-off in polar form, and a
//! smooth solution on the unit cube. In all three the applied field `He`
//! coincides with `curl A` as a field, which the forcing combinators use;
//! the finite-difference residual tests check the full strong form,
//! including that identity.

use crate::fespace::C64;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Seventh-order polynomial bridging 0.1 to 0 with three vanishing
/// derivatives at both ends of [0.1, 0.4].
#[derive(Debug, Clone)]
pub struct SepticCutoff {
    /// Coefficients of `Upsilon`, ascending powers.
    pub coeffs: [f64; 8],
}

impl Default for SepticCutoff {
    fn default() -> Self {
        Self::new()
    }
}

impl SepticCutoff {
    pub fn new() -> Self {
        // Hermite conditions at s = 0.1 and s = 0.4: value plus first three
        // derivatives.
        let mut m = DMatrix::<f64>::zeros(8, 8);
        let mut rhs = DVector::<f64>::zeros(8);
        let mut row = 0;
        for (s, vals) in [(0.1, [0.1, 0.0, 0.0, 0.0]), (0.4, [0.0, 0.0, 0.0, 0.0])] {
            for (k, &val) in vals.iter().enumerate() {
                for j in k..8 {
                    let mut c = 1.0;
                    for i in 0..k {
                        c *= (j - i) as f64;
                    }
                    m[(row, j)] = c * s.powi((j - k) as i32);
                }
                rhs[row] = val;
                row += 1;
            }
        }
        let sol = m.lu().solve(&rhs).expect("Hermite system is unisolvent");
        let mut coeffs = [0.0; 8];
        for (c, s) in coeffs.iter_mut().zip(sol.iter()) {
            *c = *s;
        }
        SepticCutoff { coeffs }
    }

    /// k-th derivative of `Upsilon` (k in 0..=3).
    pub fn upsilon(&self, s: f64, k: usize) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate() {
            if j < k {
                continue;
            }
            let mut fac = 1.0;
            for i in 0..k {
                fac *= (j - i) as f64;
            }
            acc += c * fac * s.powi((j - k) as i32);
        }
        acc
    }

    /// k-th derivative of the cut-off `Phi` (constant 0.1 below 0.1, the
    /// septic bridge on [0.1, 0.4], zero above).
    pub fn phi(&self, s: f64, k: usize) -> f64 {
        if s < 0.1 {
            if k == 0 {
                0.1
            } else {
                0.0
            }
        } else if s <= 0.4 {
            self.upsilon(s, k)
        } else {
            0.0
        }
    }
}

pub fn septic_cutoff() -> SepticCutoff {
    SepticCutoff::new()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain2d {
    UnitSquare,
    LShape,
}

/// Two-dimensional manufactured case; fields take padded 3-vectors and
/// ignore the last coordinate.
#[derive(Debug, Clone)]
pub struct Case2d {
    pub kappa: f64,
    pub t_final: f64,
    pub domain: Domain2d,
    cutoff: Option<SepticCutoff>,
}

/// Polar frame of the L-shape solution: angle measured counterclockwise
/// from the positive x-axis, continued across the negative x-axis so it
/// covers [0, 3*pi/2] single-valuedly.
fn polar(x: f64, y: f64) -> (f64, f64) {
    let r = x.hypot(y);
    let th = y.atan2(x);
    (r, if th < 0.0 { th + 2.0 * PI } else { th })
}

impl Case2d {
    pub fn cutoff(&self) -> &SepticCutoff {
        self.cutoff.as_ref().expect("L-shape case has a cutoff")
    }

    pub fn psi(&self, p: [f64; 3], t: f64) -> C64 {
        match self.domain {
            Domain2d::UnitSquare => {
                let e = (-t).exp();
                C64::new(e * (PI * p[0]).cos(), e * (PI * p[1]).cos())
            }
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                let phi = self.cutoff().phi(r, 0);
                C64::new(t * t * phi * r.powf(2.0 / 3.0) * (2.0 * th / 3.0).cos(), 0.0)
            }
        }
    }

    pub fn psi_t(&self, p: [f64; 3], t: f64) -> C64 {
        match self.domain {
            Domain2d::UnitSquare => -self.psi(p, t),
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                let phi = self.cutoff().phi(r, 0);
                C64::new(2.0 * t * phi * r.powf(2.0 / 3.0) * (2.0 * th / 3.0).cos(), 0.0)
            }
        }
    }

    pub fn grad_psi(&self, p: [f64; 3], t: f64) -> [C64; 3] {
        match self.domain {
            Domain2d::UnitSquare => {
                let e = (-t).exp();
                [
                    C64::new(-PI * e * (PI * p[0]).sin(), 0.0),
                    C64::new(0.0, -PI * e * (PI * p[1]).sin()),
                    C64::new(0.0, 0.0),
                ]
            }
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0, "gradient evaluated at the corner");
                let cut = self.cutoff();
                let (phi, dphi) = (cut.phi(r, 0), cut.phi(r, 1));
                let c = (2.0 * th / 3.0).cos();
                let s = (2.0 * th / 3.0).sin();
                let dr = t * t * (dphi * r.powf(2.0 / 3.0) + 2.0 / 3.0 * phi * r.powf(-1.0 / 3.0)) * c;
                let dth_over_r = -2.0 / 3.0 * t * t * phi * r.powf(-1.0 / 3.0) * s;
                let (ct, st) = (th.cos(), th.sin());
                [
                    C64::new(dr * ct - dth_over_r * st, 0.0),
                    C64::new(dr * st + dth_over_r * ct, 0.0),
                    C64::new(0.0, 0.0),
                ]
            }
        }
    }

    pub fn laplacian_psi(&self, p: [f64; 3], t: f64) -> C64 {
        match self.domain {
            Domain2d::UnitSquare => self.psi(p, t) * (-PI * PI),
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0);
                let cut = self.cutoff();
                let (d1, d2) = (cut.phi(r, 1), cut.phi(r, 2));
                // the r^(-4/3) parts cancel: r^(2/3) cos(2 theta/3) is harmonic
                let val = t
                    * t
                    * (2.0 * th / 3.0).cos()
                    * (d2 * r.powf(2.0 / 3.0) + 7.0 / 3.0 * d1 * r.powf(-1.0 / 3.0));
                C64::new(val, 0.0)
            }
        }
    }

    /// Radial profile of A divided by t^2.
    fn a_profile(&self, r: f64) -> f64 {
        let cut = self.cutoff();
        4.0 / 3.0 * cut.phi(r, 0) * r.powf(-1.0 / 3.0) + cut.phi(r, 1) * r.powf(2.0 / 3.0)
    }

    /// Radial profile of div A (and of -sigma/sin, cf. `sigma`) over t^2:
    /// `(7/3) Phi' r^(-1/3) + Phi'' r^(2/3)`.
    fn d_profile(&self, r: f64) -> f64 {
        let cut = self.cutoff();
        7.0 / 3.0 * cut.phi(r, 1) * r.powf(-1.0 / 3.0) + cut.phi(r, 2) * r.powf(2.0 / 3.0)
    }

    fn d_profile_r(&self, r: f64) -> f64 {
        let cut = self.cutoff();
        3.0 * cut.phi(r, 2) * r.powf(-1.0 / 3.0) - 7.0 / 9.0 * cut.phi(r, 1) * r.powf(-4.0 / 3.0)
            + cut.phi(r, 3) * r.powf(2.0 / 3.0)
    }

    pub fn a(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        match self.domain {
            Domain2d::UnitSquare => [
                (p[1] - t).exp() * (PI * p[0]).sin(),
                (p[0] - t).exp() * (PI * p[1]).sin(),
                0.0,
            ],
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0, "A evaluated at the corner");
                let prof = t * t * self.a_profile(r);
                [prof * (th / 3.0).cos(), prof * (th / 3.0).sin(), 0.0]
            }
        }
    }

    pub fn a_t(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        match self.domain {
            Domain2d::UnitSquare => {
                let a = self.a(p, t);
                [-a[0], -a[1], 0.0]
            }
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0);
                let prof = 2.0 * t * self.a_profile(r);
                [prof * (th / 3.0).cos(), prof * (th / 3.0).sin(), 0.0]
            }
        }
    }

    pub fn div_a(&self, p: [f64; 3], t: f64) -> f64 {
        match self.domain {
            Domain2d::UnitSquare => {
                PI * ((p[1] - t).exp() * (PI * p[0]).cos()
                    + (p[0] - t).exp() * (PI * p[1]).cos())
            }
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0);
                t * t * self.d_profile(r) * (2.0 * th / 3.0).cos()
            }
        }
    }

    pub fn grad_div_a(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        match self.domain {
            Domain2d::UnitSquare => {
                let (ey, ex) = ((p[1] - t).exp(), (p[0] - t).exp());
                let (sx, cx) = ((PI * p[0]).sin(), (PI * p[0]).cos());
                let (sy, cy) = ((PI * p[1]).sin(), (PI * p[1]).cos());
                [
                    -PI * PI * ey * sx + PI * ex * cy,
                    PI * ey * cx - PI * PI * ex * sy,
                    0.0,
                ]
            }
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0);
                let c23 = (2.0 * th / 3.0).cos();
                let s23 = (2.0 * th / 3.0).sin();
                let dr = t * t * self.d_profile_r(r) * c23;
                let dth_over_r = -2.0 / 3.0 * t * t * self.d_profile(r) / r * s23;
                let (ct, st) = (th.cos(), th.sin());
                [dr * ct - dth_over_r * st, dr * st + dth_over_r * ct, 0.0]
            }
        }
    }

    /// Induced field `sigma = curl A`; equals the applied field `He`.
    pub fn sigma(&self, p: [f64; 3], t: f64) -> f64 {
        match self.domain {
            Domain2d::UnitSquare => {
                (p[0] - t).exp() * (PI * p[1]).sin() - (p[1] - t).exp() * (PI * p[0]).sin()
            }
            Domain2d::LShape => {
                let (r, th) = polar(p[0], p[1]);
                if r == 0.0 {
                    return 0.0; // profile vanishes identically near the corner
                }
                -t * t * self.d_profile(r) * (2.0 * th / 3.0).sin()
            }
        }
    }

    pub fn he(&self, p: [f64; 3], t: f64) -> f64 {
        self.sigma(p, t)
    }

    /// Rotated gradient `C He = (dHe/dy, -dHe/dx)`.
    pub fn c_he(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        match self.domain {
            Domain2d::UnitSquare => {
                let (ey, ex) = ((p[1] - t).exp(), (p[0] - t).exp());
                let (sx, cx) = ((PI * p[0]).sin(), (PI * p[0]).cos());
                let (sy, cy) = ((PI * p[1]).sin(), (PI * p[1]).cos());
                [PI * ex * cy - ey * sx, -(ex * sy) + PI * ey * cx, 0.0]
            }
            Domain2d::LShape => {
                // C w = (1/r) w_theta e_r - w_r e_theta for scalar w
                let (r, th) = polar(p[0], p[1]);
                assert!(r > 0.0);
                let c23 = (2.0 * th / 3.0).cos();
                let s23 = (2.0 * th / 3.0).sin();
                let sig_r = -t * t * self.d_profile_r(r) * s23;
                let sig_th_over_r = -2.0 / 3.0 * t * t * self.d_profile(r) / r * c23;
                let (ct, st) = (th.cos(), th.sin());
                // e_r = (ct, st), e_theta = (-st, ct)
                [
                    sig_th_over_r * ct + sig_r * st,
                    sig_th_over_r * st - sig_r * ct,
                    0.0,
                ]
            }
        }
    }

    pub fn g(&self, p: [f64; 3], t: f64) -> C64 {
        let psi = self.psi(p, t);
        let grad = self.grad_psi(p, t);
        scalar_forcing(
            self.kappa,
            psi,
            self.psi_t(p, t),
            grad,
            self.laplacian_psi(p, t),
            self.a(p, t),
            self.div_a(p, t),
        )
    }

    pub fn f(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        let psi = self.psi(p, t);
        let grad = self.grad_psi(p, t);
        vector_forcing(
            self.kappa,
            psi,
            grad,
            self.a(p, t),
            self.a_t(p, t),
            self.grad_div_a(p, t),
        )
    }

    pub fn psi0(&self, p: [f64; 3]) -> C64 {
        self.psi(p, 0.0)
    }

    pub fn a0(&self, p: [f64; 3]) -> [f64; 3] {
        match self.domain {
            // A carries a t^2 factor on the L-shape: identically zero start
            Domain2d::LShape => [0.0; 3],
            Domain2d::UnitSquare => self.a(p, 0.0),
        }
    }

    pub fn sigma0(&self, p: [f64; 3]) -> f64 {
        match self.domain {
            Domain2d::LShape => 0.0,
            Domain2d::UnitSquare => self.sigma(p, 0.0),
        }
    }
}

/// Example on the unit square: kappa = 1, T = 1, smooth decaying fields.
pub fn square2d_case() -> Case2d {
    Case2d {
        kappa: 1.0,
        t_final: 1.0,
        domain: Domain2d::UnitSquare,
        cutoff: None,
    }
}

/// Example on the L-shape: kappa = 10, T = 1, `r^(2/3)`-type fields
/// supported in the cut-off disk `r <= 0.4`.
pub fn lshape2d_case() -> Case2d {
    Case2d {
        kappa: 10.0,
        t_final: 1.0,
        domain: Domain2d::LShape,
        cutoff: Some(SepticCutoff::new()),
    }
}

/// Three-dimensional manufactured case on the unit cube.
#[derive(Debug, Clone)]
pub struct Case3d {
    pub kappa: f64,
    pub t_final: f64,
}

impl Case3d {
    pub fn psi(&self, p: [f64; 3], t: f64) -> C64 {
        let e = t.exp();
        let cz = (PI * p[2]).cos();
        C64::new(
            e * (PI * p[0]).cos() * cz,
            e * (PI * p[1]).cos() * cz,
        )
    }

    pub fn psi_t(&self, p: [f64; 3], t: f64) -> C64 {
        self.psi(p, t)
    }

    pub fn grad_psi(&self, p: [f64; 3], t: f64) -> [C64; 3] {
        let e = t.exp();
        let (sx, cx) = ((PI * p[0]).sin(), (PI * p[0]).cos());
        let (sy, cy) = ((PI * p[1]).sin(), (PI * p[1]).cos());
        let (sz, cz) = ((PI * p[2]).sin(), (PI * p[2]).cos());
        [
            C64::new(-PI * e * sx * cz, 0.0),
            C64::new(0.0, -PI * e * sy * cz),
            C64::new(-PI * e * cx * sz, -PI * e * cy * sz),
        ]
    }

    pub fn laplacian_psi(&self, p: [f64; 3], t: f64) -> C64 {
        self.psi(p, t) * (-2.0 * PI * PI)
    }

    pub fn a(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        let e = t.exp();
        let s = |v: f64| (2.0 * PI * v).sin();
        [
            e * s(p[0]) * s(p[1]),
            e * s(p[1]) * s(p[2]),
            e * s(p[2]),
        ]
    }

    pub fn a_t(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        self.a(p, t)
    }

    pub fn div_a(&self, p: [f64; 3], t: f64) -> f64 {
        let e = t.exp();
        let s = |v: f64| (2.0 * PI * v).sin();
        let c = |v: f64| (2.0 * PI * v).cos();
        2.0 * PI * e * (c(p[0]) * s(p[1]) + c(p[1]) * s(p[2]) + c(p[2]))
    }

    pub fn grad_div_a(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        let e = t.exp();
        let s = |v: f64| (2.0 * PI * v).sin();
        let c = |v: f64| (2.0 * PI * v).cos();
        let k = 4.0 * PI * PI * e;
        [
            -k * s(p[0]) * s(p[1]),
            k * (c(p[0]) * c(p[1]) - s(p[1]) * s(p[2])),
            k * (c(p[1]) * c(p[2]) - s(p[2])),
        ]
    }

    /// `sigma = curl A`; equals the applied field `He`.
    pub fn sigma(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        let e = t.exp();
        let s = |v: f64| (2.0 * PI * v).sin();
        let c = |v: f64| (2.0 * PI * v).cos();
        [
            -2.0 * PI * e * s(p[1]) * c(p[2]),
            0.0,
            -2.0 * PI * e * s(p[0]) * c(p[1]),
        ]
    }

    pub fn he(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        self.sigma(p, t)
    }

    pub fn curl_he(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        let e = t.exp();
        let s = |v: f64| (2.0 * PI * v).sin();
        let c = |v: f64| (2.0 * PI * v).cos();
        let k = 4.0 * PI * PI * e;
        [
            k * s(p[0]) * s(p[1]),
            k * (s(p[1]) * s(p[2]) + c(p[0]) * c(p[1])),
            k * c(p[1]) * c(p[2]),
        ]
    }

    pub fn g(&self, p: [f64; 3], t: f64) -> C64 {
        scalar_forcing(
            self.kappa,
            self.psi(p, t),
            self.psi_t(p, t),
            self.grad_psi(p, t),
            self.laplacian_psi(p, t),
            self.a(p, t),
            self.div_a(p, t),
        )
    }

    pub fn f(&self, p: [f64; 3], t: f64) -> [f64; 3] {
        vector_forcing(
            self.kappa,
            self.psi(p, t),
            self.grad_psi(p, t),
            self.a(p, t),
            self.a_t(p, t),
            self.grad_div_a(p, t),
        )
    }

    pub fn psi0(&self, p: [f64; 3]) -> C64 {
        self.psi(p, 0.0)
    }

    pub fn a0(&self, p: [f64; 3]) -> [f64; 3] {
        self.a(p, 0.0)
    }

    pub fn sigma0(&self, p: [f64; 3]) -> [f64; 3] {
        self.sigma(p, 0.0)
    }
}

pub fn cube3d_case() -> Case3d {
    Case3d {
        kappa: 1.0,
        t_final: 1.0,
    }
}

/// Order-parameter forcing from the strong form:
/// `g = psi_t - i kappa (div A) psi + (i/kappa grad + A)^2 psi
///      + (|psi|^2 - 1) psi`
/// with the covariant square expanded as
/// `-(1/kappa^2) lap psi + (2i/kappa) A·grad psi + (i/kappa)(div A) psi
///  + |A|^2 psi`.
fn scalar_forcing(
    kappa: f64,
    psi: C64,
    psi_t: C64,
    grad_psi: [C64; 3],
    lap_psi: C64,
    a: [f64; 3],
    div_a: f64,
) -> C64 {
    let i = C64::new(0.0, 1.0);
    let a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    let a_dot_grad = grad_psi[0] * a[0] + grad_psi[1] * a[1] + grad_psi[2] * a[2];
    psi_t - i * kappa * div_a * psi
        + (-lap_psi / (kappa * kappa)
            + i * 2.0 / kappa * a_dot_grad
            + i / kappa * div_a * psi
            + psi * a2)
        + psi * (psi.norm_sqr() - 1.0)
}

/// Potential forcing from the strong form, using `He = curl A`:
/// `f = A_t - grad div A - (1/kappa) Im(conj(psi) grad psi) + |psi|^2 A`
/// (the `C curl A` and `C He` contributions cancel).
fn vector_forcing(
    kappa: f64,
    psi: C64,
    grad_psi: [C64; 3],
    a: [f64; 3],
    a_t: [f64; 3],
    grad_div_a: [f64; 3],
) -> [f64; 3] {
    let (u, v) = (psi.re, psi.im);
    let psi2 = psi.norm_sqr();
    let mut out = [0.0; 3];
    for d in 0..3 {
        let w = u * grad_psi[d].im - v * grad_psi[d].re;
        out[d] = a_t[d] - grad_div_a[d] - w / kappa + psi2 * a[d];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_hermite_conditions() {
        let cut = SepticCutoff::new();
        assert!((cut.upsilon(0.1, 0) - 0.1).abs() < 1e-12);
        assert!(cut.upsilon(0.4, 0).abs() < 1e-12);
        for k in 1..=3 {
            assert!(cut.upsilon(0.1, k).abs() < 1e-10, "k={k}");
            assert!(cut.upsilon(0.4, k).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn cutoff_decreases_on_transition() {
        let cut = SepticCutoff::new();
        assert!(cut.upsilon(0.25, 1) < 0.0);
    }

    #[test]
    fn cutoff_c3_at_junctions() {
        // one-sided limits of each piece agree at both junctions
        let cut = SepticCutoff::new();
        let outer_left: [f64; 4] = [0.1, 0.0, 0.0, 0.0]; // constant piece at 0.1
        for k in 0..=3 {
            assert!(
                (cut.upsilon(0.1, k) - outer_left[k]).abs() < 1e-10,
                "junction 0.1, k={k}"
            );
            assert!(cut.upsilon(0.4, k).abs() < 1e-10, "junction 0.4, k={k}");
        }
    }

    #[test]
    fn square_initial_value() {
        let case = square2d_case();
        let v = case.psi0([0.0, 0.0, 0.0]);
        assert!((v - C64::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn lshape_fields_vanish_outside_cutoff() {
        let case = lshape2d_case();
        for p in [[0.6, 0.3, 0.0], [-0.8, -0.5, 0.0], [0.0, 0.9, 0.0]] {
            assert_eq!(case.psi(p, 0.7).norm(), 0.0);
            let a = case.a(p, 0.7);
            assert_eq!(a[0], 0.0);
            assert_eq!(a[1], 0.0);
            let f = case.f(p, 0.7);
            assert_eq!(f[0], 0.0);
            assert_eq!(case.he(p, 0.7), 0.0);
        }
    }

    #[test]
    fn cube_a_normal_trace_vanishes() {
        let case = cube3d_case();
        for (p, comp) in [
            ([0.0, 0.3, 0.7], 0),
            ([1.0, 0.5, 0.2], 0),
            ([0.4, 0.0, 0.9], 1),
            ([0.4, 1.0, 0.9], 1),
            ([0.8, 0.2, 0.0], 2),
            ([0.8, 0.2, 1.0], 2),
        ] {
            let a = case.a(p, 0.0);
            assert!(a[comp].abs() < 1e-14);
        }
    }

    #[test]
    fn lshape_neumann_on_corner_edges() {
        // d psi / dn = 0 and A·n = 0 along theta = 0 and theta = 3 pi / 2
        let case = lshape2d_case();
        let t = 0.8;
        for x in [0.05, 0.2, 0.35] {
            let g = case.grad_psi([x, 0.0, 0.0], t);
            assert!(g[1].norm() < 1e-12, "psi_y on theta=0: {}", g[1]);
            let a = case.a([x, 0.0, 0.0], t);
            assert!(a[1].abs() < 1e-13);
        }
        for y in [-0.05, -0.2, -0.35] {
            let g = case.grad_psi([0.0, y, 0.0], t);
            assert!(g[0].norm() < 1e-12, "psi_x on theta=3pi/2: {}", g[0]);
            let a = case.a([0.0, y, 0.0], t);
            assert!(a[0].abs() < 1e-13);
        }
    }
}
