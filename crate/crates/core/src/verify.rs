//! Manufactured solution, its source terms, the discrete energy, error norms
//! and observed convergence rates.

use std::f64::consts::PI;
use std::fmt;

use crate::forms::{Coefficients, Discretization};
use crate::mesh::Point;
use crate::scheme::{FieldState, SchemeParams, Sources};
use crate::{Error, Result};

/// Exact fields and first derivatives at one point.
/// Gradients of vector fields are `grad[c][d] = d_d f_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValues {
    pub phi: f64,
    pub grad_phi: [f64; 2],
    pub mu: f64,
    pub grad_mu: [f64; 2],
    pub u: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
    pub p: f64,
    pub b: [f64; 2],
    pub grad_b: [[f64; 2]; 2],
}

/// Right-hand sides that make the manufactured fields an exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceValues {
    pub phase: f64,
    pub momentum: [f64; 2],
    pub induction: [f64; 2],
}

/// Closed-form test solution on the unit square:
///
/// ```text
/// phi = 2 + sin t cos(pi x) cos(pi y)
/// u   = sin t (pi sin(2 pi y) sin^2(pi x), -pi sin(2 pi x) sin^2(pi y))
/// p   = sin t cos(pi x) sin(pi y)
/// B   = sin t (sin(pi x) cos(pi y), -sin(pi y) cos(pi x))
/// mu  = -eps lap(phi) + (phi^3 - phi) / eps
/// ```
///
/// `u` and `B` are solenoidal, `u` vanishes on the boundary, `B.n = 0`,
/// `p` has zero mean and `phi` has zero normal derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub eps: f64,
    pub lambda: f64,
    pub s_c: f64,
    pub coefficients: Coefficients,
}

struct Trig {
    sx: f64,
    cx: f64,
    sy: f64,
    cy: f64,
    s2x: f64,
    c2x: f64,
    s2y: f64,
    c2y: f64,
}

impl Trig {
    fn new(p: Point) -> Self {
        let (sx, cx) = (PI * p[0]).sin_cos();
        let (sy, cy) = (PI * p[1]).sin_cos();
        let (s2x, c2x) = (2.0 * PI * p[0]).sin_cos();
        let (s2y, c2y) = (2.0 * PI * p[1]).sin_cos();
        Self { sx, cx, sy, cy, s2x, c2x, s2y, c2y }
    }
}

impl ManufacturedSolution {
    pub fn new(params: &SchemeParams) -> Self {
        Self { eps: params.eps, lambda: params.lambda, s_c: params.s_c, coefficients: params.coefficients }
    }

    pub fn phi(&self, p: Point, t: f64) -> f64 {
        let g = Trig::new(p);
        2.0 + t.sin() * g.cx * g.cy
    }

    pub fn velocity(&self, p: Point, t: f64) -> [f64; 2] {
        let g = Trig::new(p);
        let s = t.sin();
        [s * PI * g.s2y * g.sx * g.sx, -s * PI * g.s2x * g.sy * g.sy]
    }

    pub fn pressure(&self, p: Point, t: f64) -> f64 {
        let g = Trig::new(p);
        t.sin() * g.cx * g.sy
    }

    pub fn magnetic(&self, p: Point, t: f64) -> [f64; 2] {
        let g = Trig::new(p);
        let s = t.sin();
        [s * g.sx * g.cy, -s * g.sy * g.cx]
    }

    pub fn mu(&self, p: Point, t: f64) -> f64 {
        let g = Trig::new(p);
        let s = t.sin();
        let phi = 2.0 + s * g.cx * g.cy;
        2.0 * PI * PI * self.eps * s * g.cx * g.cy + (phi * phi * phi - phi) / self.eps
    }

    /// Closed-form Laplacian of the phase field.
    pub fn laplacian_phi(&self, p: Point, t: f64) -> f64 {
        let g = Trig::new(p);
        -2.0 * PI * PI * t.sin() * g.cx * g.cy
    }

    pub fn values(&self, p: Point, t: f64) -> ExactValues {
        let g = Trig::new(p);
        let s = t.sin();
        let eps = self.eps;
        let phi = 2.0 + s * g.cx * g.cy;
        let grad_phi = [-PI * s * g.sx * g.cy, -PI * s * g.cx * g.sy];
        let a = 2.0 * PI * PI * eps + (3.0 * phi * phi - 1.0) / eps;
        let mu = 2.0 * PI * PI * eps * s * g.cx * g.cy + (phi * phi * phi - phi) / eps;
        let grad_mu = [a * grad_phi[0], a * grad_phi[1]];
        let u = [s * PI * g.s2y * g.sx * g.sx, -s * PI * g.s2x * g.sy * g.sy];
        let pi2 = PI * PI;
        let grad_u = [
            [s * pi2 * g.s2x * g.s2y, s * 2.0 * pi2 * g.c2y * g.sx * g.sx],
            [-s * 2.0 * pi2 * g.c2x * g.sy * g.sy, -s * pi2 * g.s2x * g.s2y],
        ];
        let b = [s * g.sx * g.cy, -s * g.sy * g.cx];
        let grad_b = [[PI * s * g.cx * g.cy, -PI * s * g.sx * g.sy], [PI * s * g.sx * g.sy, -PI * s * g.cx * g.cy]];
        ExactValues { phi, grad_phi, mu, grad_mu, u, grad_u, p: s * g.cx * g.sy, b, grad_b }
    }

    /// Strong-form residuals of the exact fields:
    ///
    /// ```text
    /// g_phi = phi_t - eps div(kappa grad mu) + u . grad phi
    /// g_u   = u_t - div(2 nu D(u)) + (u.grad)u + S_c B x curl B + grad p - lambda mu grad phi
    /// g_B   = B_t + curl(eta curl B) - curl(u x B)
    /// ```
    pub fn source_values(&self, p: Point, t: f64) -> SourceValues {
        let g = Trig::new(p);
        let (s, ds) = (t.sin(), t.cos());
        let (eps, pi2, pi3) = (self.eps, PI * PI, PI * PI * PI);
        let ev = self.values(p, t);
        let ExactValues { phi, grad_phi, mu, grad_mu, u, grad_u, b, grad_b, .. } = ev;
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];

        // phase equation
        let c = g.cx * g.cy;
        let lap_phi = -2.0 * pi2 * s * c;
        let a = 2.0 * pi2 * eps + (3.0 * phi * phi - 1.0) / eps;
        let lap_mu = a * lap_phi + 6.0 * phi / eps * dot(grad_phi, grad_phi);
        let kappa = self.coefficients.kappa;
        let div_flux = kappa.eval(phi) * lap_mu + kappa.derivative(phi) * dot(grad_phi, grad_mu);
        let phase = ds * c - eps * div_flux + dot(u, grad_phi);

        // momentum
        let u_t = [ds * PI * g.s2y * g.sx * g.sx, -ds * PI * g.s2x * g.sy * g.sy];
        let lap_u = [
            s * (2.0 * pi3 * g.c2x * g.s2y - 4.0 * pi3 * g.s2y * g.sx * g.sx),
            s * (4.0 * pi3 * g.s2x * g.sy * g.sy - 2.0 * pi3 * g.s2x * g.c2y),
        ];
        let nu = self.coefficients.nu;
        let (nu_v, dnu) = (nu.eval(phi), nu.derivative(phi));
        let grad_nu = [dnu * grad_phi[0], dnu * grad_phi[1]];
        let shear = 0.5 * (grad_u[0][1] + grad_u[1][0]);
        let strain = [[grad_u[0][0], shear], [shear, grad_u[1][1]]];
        let viscous =
            [nu_v * lap_u[0] + 2.0 * dot(strain[0], grad_nu), nu_v * lap_u[1] + 2.0 * dot(strain[1], grad_nu)];
        let convection = [dot(u, grad_u[0]), dot(u, grad_u[1])];
        let curl_b = 2.0 * PI * s * g.sx * g.sy;
        let lorentz = [self.s_c * b[1] * curl_b, -self.s_c * b[0] * curl_b];
        let grad_p = [-PI * s * g.sx * g.sy, PI * s * g.cx * g.cy];
        let momentum: [f64; 2] = std::array::from_fn(|k| {
            u_t[k] - viscous[k] + convection[k] + lorentz[k] + grad_p[k] - self.lambda * mu * grad_phi[k]
        });

        // induction
        let b_t = [ds * g.sx * g.cy, -ds * g.sy * g.cx];
        let eta = self.coefficients.eta;
        let (eta_v, deta) = (eta.eval(phi), eta.derivative(phi));
        let grad_curl_b = [2.0 * pi2 * s * g.cx * g.sy, 2.0 * pi2 * s * g.sx * g.cy];
        let grad_eta_curl: [f64; 2] = std::array::from_fn(|d| deta * grad_phi[d] * curl_b + eta_v * grad_curl_b[d]);
        // w = u x B = u1 B2 - u2 B1
        let grad_w: [f64; 2] = std::array::from_fn(|d| {
            grad_u[0][d] * b[1] + u[0] * grad_b[1][d] - grad_u[1][d] * b[0] - u[1] * grad_b[0][d]
        });
        let induction = [b_t[0] + grad_eta_curl[1] - grad_w[1], b_t[1] - grad_eta_curl[0] + grad_w[0]];

        SourceValues { phase, momentum, induction }
    }
}

impl Sources for ManufacturedSolution {
    fn phase(&self, p: Point, t: f64) -> f64 {
        self.source_values(p, t).phase
    }

    fn momentum(&self, p: Point, t: f64) -> [f64; 2] {
        self.source_values(p, t).momentum
    }

    fn induction(&self, p: Point, t: f64) -> [f64; 2] {
        self.source_values(p, t).induction
    }

    fn is_zero(&self) -> bool {
        false
    }
}

/// `E = int 1/2 |u|^2 + S_c/2 |B|^2 + lambda eps/2 |grad phi|^2 + lambda/(4 eps) (1 - phi^2)^2`,
/// integrated with the fine rule.
pub fn energy(disc: &Discretization, state: &FieldState, params: &SchemeParams) -> f64 {
    let (eps, lambda) = (params.eps, params.lambda);
    let mut total = 0.0;
    for el in disc.elements(true) {
        let phi = el.scalar_coeffs(&state.phi);
        let u = el.vector_coeffs(&state.u);
        let b = el.vector_coeffs(&state.b);
        for q in 0..el.num_points() {
            let f = el.value(q, &phi);
            let g = el.gradient(q, &phi);
            let uq = [el.value(q, &u[0]), el.value(q, &u[1])];
            let bq = [el.value(q, &b[0]), el.value(q, &b[1])];
            let w = 1.0 - f * f;
            let density = 0.5 * (uq[0] * uq[0] + uq[1] * uq[1])
                + 0.5 * params.s_c * (bq[0] * bq[0] + bq[1] * bq[1])
                + 0.5 * lambda * eps * (g[0] * g[0] + g[1] * g[1])
                + lambda / (4.0 * eps) * w * w;
            total += el.jxw(q) * density;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Phi,
    Mu,
    U,
    P,
    B,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::Phi, Field::Mu, Field::U, Field::P, Field::B];

    pub fn name(self) -> &'static str {
        match self {
            Field::Phi => "phi",
            Field::Mu => "mu",
            Field::U => "u",
            Field::P => "p",
            Field::B => "B",
        }
    }

    /// The norm tracked for convergence: L2 for the pressure, H1 otherwise.
    pub fn tracked_norm(self) -> Norm {
        match self {
            Field::P => Norm::L2,
            _ => Norm::H1,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Norm {
    L2,
    H1Semi,
    H1,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "L2",
            Norm::H1Semi => "H1semi",
            Norm::H1 => "H1",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldError {
    pub field: Field,
    pub l2: f64,
    /// `None` for the pressure, which is only measured in L2.
    pub h1_semi: Option<f64>,
}

impl FieldError {
    pub fn get(&self, norm: Norm) -> Option<f64> {
        match norm {
            Norm::L2 => Some(self.l2),
            Norm::H1Semi => self.h1_semi,
            Norm::H1 => self.h1_semi.map(|s| (s * s + self.l2 * self.l2).sqrt()),
        }
    }
}

/// Errors of one run at its final time.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub errors: Vec<FieldError>,
}

impl ErrorReport {
    pub fn get(&self, field: Field, norm: Norm) -> Option<f64> {
        self.errors.iter().find(|e| e.field == field).and_then(|e| e.get(norm))
    }
}

/// Per-element quadrature of the pointwise differences against the exact
/// fields at time `t`, with the fine rule.
pub fn error_norms(
    disc: &Discretization,
    state: &FieldState,
    exact: &ManufacturedSolution,
    t: f64,
    dt: f64,
) -> ErrorReport {
    // [l2^2, semi^2] per field
    let mut acc = [[0.0f64; 2]; 5];
    for el in disc.elements(true) {
        let phi = el.scalar_coeffs(&state.phi);
        let mu = el.scalar_coeffs(&state.mu);
        let u = el.vector_coeffs(&state.u);
        let b = el.vector_coeffs(&state.b);
        let p = el.pressure_coeffs(&state.p);
        for q in 0..el.num_points() {
            let w = el.jxw(q);
            let ev = exact.values(el.point(q), t);
            let mut add_scalar = |k: usize, c: &[f64; 6], v: f64, g: [f64; 2]| {
                let gh = el.gradient(q, c);
                acc[k][0] += w * (el.value(q, c) - v).powi(2);
                acc[k][1] += w * ((gh[0] - g[0]).powi(2) + (gh[1] - g[1]).powi(2));
            };
            add_scalar(0, &phi, ev.phi, ev.grad_phi);
            add_scalar(1, &mu, ev.mu, ev.grad_mu);
            for c in 0..2 {
                add_scalar(2, &u[c], ev.u[c], ev.grad_u[c]);
                add_scalar(4, &b[c], ev.b[c], ev.grad_b[c]);
            }
            acc[3][0] += w * (el.pressure_value(q, &p) - ev.p).powi(2);
        }
    }
    let errors = Field::ALL
        .iter()
        .zip(acc)
        .map(|(&field, [l2, semi])| FieldError {
            field,
            l2: l2.sqrt(),
            h1_semi: (field != Field::P).then(|| semi.sqrt()),
        })
        .collect();
    let mesh = disc.mesh();
    ErrorReport { n: mesh.resolution(), h: mesh.h(), dt, errors }
}

/// `log2(e_coarse / e_fine)` between two consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub field: Field,
    pub norm: Norm,
    pub rate: f64,
}

/// Observed rates of every available (field, norm) pair between consecutive
/// reports. The mesh size must halve from one report to the next.
pub fn observed_rates(reports: &[ErrorReport]) -> Result<Vec<Rate>> {
    if reports.len() < 2 {
        return Err(Error::InvalidArgument("at least two levels are needed for rates".into()));
    }
    let mut rates = Vec::new();
    for pair in reports.windows(2) {
        let (c, f) = (&pair[0], &pair[1]);
        if (c.h / f.h - 2.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mesh sizes {} and {} are not a halving sequence", c.h, f.h)));
        }
        for field in Field::ALL {
            for norm in [Norm::L2, Norm::H1Semi, Norm::H1] {
                if let (Some(ec), Some(ef)) = (c.get(field, norm), f.get(field, norm)) {
                    rates.push(Rate { n_coarse: c.n, n_fine: f.n, field, norm, rate: (ec / ef).log2() });
                }
            }
        }
    }
    Ok(rates)
}
