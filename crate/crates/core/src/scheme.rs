//! Convex-splitting time step with block Picard iteration.
//!
//! One step from level `n-1` to `n` solves
//!
//! ```text
//! (phi - phi0)/dt + eps a_phi(kappa(phi0); mu) + (grad phi0 . u, .)     = g_phi
//! eps (grad phi, grad .) + (phi^3 - phi0, .)/eps - (mu, .)              = 0
//! (u - u0)/dt + a_f(nu(phi0); u) + b(u0; u) + S_c c_hat(B0; B) - d(., p) = lambda (mu grad phi0, .) + g_u
//! d(u, q)                                                                = 0
//! (B - B0)/dt + a_B(eta(phi0); B) - c_tilde(u; B0)                        = g_B
//! ```
//!
//! where a trailing `0` marks the previous level. Coefficients and all
//! couplings except the cubic term and the `u`/`mu` exchange are lagged, so
//! the flow/induction matrix is fixed within a step. The iteration
//! alternates a coupled `(phi, mu)` solve (cubic linearized at the current
//! iterate) with a coupled `(u, p, B)` solve until the relative increments of
//! all fields fall below the tolerance.

use crate::forms::{Coefficients, Discretization, Space};
use crate::linalg::{apply_essential, relative_residual, BlockStructure, LuSymbolic, SparseMatrix};
use crate::mesh::Point;
use crate::space::{magnetic_bc, velocity_bc, EssentialBc, MeanZeroConstraint};
use crate::verify::energy;
use crate::{Error, Result};

/// Body forces of the three evolution equations. All default to zero.
pub trait Sources {
    fn phase(&self, _p: Point, _t: f64) -> f64 {
        0.0
    }

    fn momentum(&self, _p: Point, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn induction(&self, _p: Point, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// When true the load vectors are skipped entirely.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoSources;

impl Sources for NoSources {
    fn is_zero(&self) -> bool {
        true
    }
}

/// How the cubic term `phi^3` is linearized inside the iteration. Both
/// variants have the same fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CubicLinearization {
    /// `phi_k^2 phi`
    Picard,
    /// `3 phi_k^2 phi - 2 phi_k^3`
    #[default]
    Newton,
}

/// What to do when the iteration hits its cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonConvergence {
    #[default]
    Abort,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub eps: f64,
    pub lambda: f64,
    pub s_c: f64,
    pub dt: f64,
    pub t_final: f64,
    pub coefficients: Coefficients,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub linearization: CubicLinearization,
    pub on_nonconvergence: NonConvergence,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            eps: 0.05,
            lambda: 1.0,
            s_c: 1.0,
            dt: 1e-3,
            t_final: 0.5,
            coefficients: Coefficients::exponential(),
            picard_tol: 1e-10,
            picard_max: 50,
            linearization: CubicLinearization::default(),
            on_nonconvergence: NonConvergence::default(),
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("eps", self.eps), ("lambda", self.lambda), ("s_c", self.s_c), ("dt", self.dt)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if !(self.picard_tol > 0.0 && self.picard_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("picard_tol must lie in (0, 1), got {}", self.picard_tol)));
        }
        if self.picard_max == 0 {
            return Err(Error::InvalidArgument("picard_max must be at least 1".into()));
        }
        use crate::forms::CoefficientLaw::Constant;
        for law in [self.coefficients.kappa, self.coefficients.nu, self.coefficients.eta] {
            if let Constant(c) = law {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidArgument(format!("constant coefficient must be positive, got {c}")));
                }
            }
        }
        Ok(())
    }
}

/// Coefficient vectors of all unknowns at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub b: Vec<f64>,
}

impl FieldState {
    pub fn zeros(disc: &Discretization) -> Self {
        Self {
            t: 0.0,
            phi: vec![0.0; disc.len(Space::Scalar)],
            mu: vec![0.0; disc.len(Space::Scalar)],
            u: vec![0.0; disc.len(Space::Vector)],
            p: vec![0.0; disc.len(Space::Pressure)],
            b: vec![0.0; disc.len(Space::Vector)],
        }
    }

    /// `phi = c`, everything else zero.
    pub fn constant_phase(disc: &Discretization, c: f64) -> Self {
        let mut s = Self::zeros(disc);
        s.phi.fill(c);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub iterations: usize,
    /// Final relative increment.
    pub increment: f64,
    pub converged: bool,
    /// Relative residual of every linear solve, in order.
    pub solve_residuals: Vec<f64>,
    pub energy: f64,
    /// `max_q |d(u, q)| / ||q||` over the P1 basis.
    pub weak_divergence: f64,
    /// `int phi`
    pub mass: f64,
}

impl StepDiagnostics {
    pub fn max_solve_residual(&self) -> f64 {
        self.solve_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Algebraic residuals (infinity norms) of the nonlinear step equations,
/// evaluated with the exact cubic term. Constrained rows are excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResiduals {
    pub phase: f64,
    pub potential: f64,
    pub momentum: f64,
    pub continuity: f64,
    pub induction: f64,
}

impl StepResiduals {
    pub fn max(&self) -> f64 {
        [self.phase, self.potential, self.momentum, self.continuity, self.induction].into_iter().fold(0.0, f64::max)
    }
}

/// Time-independent operators and system layouts for one mesh.
#[derive(Debug, Clone)]
pub struct Solver {
    disc: Discretization,
    params: SchemeParams,
    mass_s: SparseMatrix,
    mass_v: SparseMatrix,
    stiffness: SparseMatrix,
    div: SparseMatrix,
    div_t: SparseMatrix,
    pressure_norms: Vec<f64>,
    mean: MeanZeroConstraint,
    velocity_bc: EssentialBc,
    magnetic_bc: EssentialBc,
    mhd_bc: EssentialBc,
    ch: BlockStructure,
    mhd: BlockStructure,
    ch_symbolic: LuSymbolic,
    mhd_symbolic: LuSymbolic,
}

/// Lagged operators for one step.
pub struct StepContext<'a> {
    solver: &'a Solver,
    prev: &'a FieldState,
    t: f64,
    a_kappa: SparseMatrix,
    k1: SparseMatrix,
    k2: SparseMatrix,
    ch_rhs_phi: Vec<f64>,
    ch_rhs_mu: Vec<f64>,
    mhd_matrix: SparseMatrix,
    mhd_factors: crate::linalg::LuFactors,
    mhd_rhs_base: Vec<f64>,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `||new - old|| / max(||new||, 1)`
fn relative_increment(new: &[f64], old: &[f64]) -> f64 {
    let d = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    d / l2(new).max(1.0)
}

impl Solver {
    pub fn new(disc: Discretization, params: SchemeParams) -> Result<Self> {
        params.validate()?;
        let mesh = disc.mesh();
        let mass_s = disc.mass(Space::Scalar)?;
        let mass_v = disc.mass(Space::Vector)?;
        let mass_p = disc.mass(Space::Pressure)?;
        let stiffness = disc.stiffness()?;
        let div = disc.divergence()?;
        let div_t = div.transpose();
        let pressure_norms = (0..mass_p.nrows()).map(|i| mass_p.get(i, i).sqrt()).collect();
        let mean = MeanZeroConstraint::new(mesh, disc.dofmap(Space::Pressure))?;
        let velocity_bc = velocity_bc(mesh, disc.dofmap(Space::Vector));
        let magnetic_bc = magnetic_bc(mesh, disc.dofmap(Space::Vector));

        let (ns, nv, np) = (disc.len(Space::Scalar), disc.len(Space::Vector), disc.len(Space::Pressure));
        let ss = disc.zero_matrix(Space::Scalar, Space::Scalar)?;
        let ch = BlockStructure::new(&[ns, ns], &[(0, 0, &ss), (0, 1, &ss), (1, 0, &ss), (1, 1, &ss)], None)?;
        let vv = disc.zero_matrix(Space::Vector, Space::Vector)?;
        let mhd = BlockStructure::new(
            &[nv, np, nv],
            &[(0, 0, &vv), (0, 1, &div_t), (0, 2, &vv), (1, 0, &div), (2, 0, &vv), (2, 2, &vv)],
            Some((1, mean.weights())),
        )?;
        let mhd_bc = EssentialBc::from_dofs(
            velocity_bc.dofs().iter().copied().chain(magnetic_bc.shifted(mhd.offset(2)).dofs().iter().copied()),
        );
        let ch_symbolic = LuSymbolic::analyze(ch.pattern())?;
        let zero_diagonal: Vec<usize> = mhd.field_range(1).chain(mhd.multiplier_index()).collect();
        let mhd_symbolic = LuSymbolic::analyze_deferred(mhd.pattern(), &zero_diagonal)?;
        Ok(Self {
            disc,
            params,
            mass_s,
            mass_v,
            stiffness,
            div,
            div_t,
            pressure_norms,
            mean,
            velocity_bc,
            magnetic_bc,
            mhd_bc,
            ch,
            mhd,
            ch_symbolic,
            mhd_symbolic,
        })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn velocity_bc(&self) -> &EssentialBc {
        &self.velocity_bc
    }

    pub fn magnetic_bc(&self) -> &EssentialBc {
        &self.magnetic_bc
    }

    pub fn mean_constraint(&self) -> &MeanZeroConstraint {
        &self.mean
    }

    /// Nodal interpolation of initial data at `t = 0`; `mu` and `p` are zero
    /// and the essential conditions are imposed on `u` and `B`.
    pub fn initial_state(
        &self,
        phi0: impl Fn(Point) -> f64,
        u0: impl Fn(Point) -> [f64; 2],
        b0: impl Fn(Point) -> [f64; 2],
    ) -> FieldState {
        let mesh = self.disc.mesh();
        let mut s = FieldState::zeros(&self.disc);
        s.phi = self.disc.dofmap(Space::Scalar).interpolate(mesh, phi0);
        s.u = self.disc.dofmap(Space::Vector).interpolate_vector(mesh, u0);
        s.b = self.disc.dofmap(Space::Vector).interpolate_vector(mesh, b0);
        self.velocity_bc.apply_to(&mut s.u);
        self.magnetic_bc.apply_to(&mut s.b);
        s
    }

    pub fn energy(&self, state: &FieldState) -> f64 {
        energy(&self.disc, state, &self.params)
    }

    /// `max_q |d(u, q)| / ||q||_{L2}` over the P1 basis functions.
    pub fn weak_divergence(&self, u: &[f64]) -> f64 {
        self.div.matvec(u).iter().zip(&self.pressure_norms).map(|(d, n)| d.abs() / n).fold(0.0, f64::max)
    }

    /// `int phi`
    pub fn mass(&self, phi: &[f64]) -> f64 {
        let one = vec![1.0; phi.len()];
        self.mass_s.bilinear(&one, phi)
    }

    /// Assemble the lagged operators of the step leaving `prev`, and factor
    /// the flow/induction matrix.
    pub fn prepare<'a>(&'a self, prev: &'a FieldState, sources: &dyn Sources) -> Result<StepContext<'a>> {
        let p = &self.params;
        let d = &self.disc;
        let (dt, t) = (p.dt, prev.t + p.dt);
        let a_kappa = d.a_phi(p.coefficients.kappa, &prev.phi)?;
        let (k1, k2) = d.capillary(&prev.phi, p.lambda)?;

        let mut ch_rhs_phi = self.mass_s.matvec(&prev.phi);
        ch_rhs_phi.iter_mut().for_each(|v| *v /= dt);
        let mut ch_rhs_mu = self.mass_s.matvec(&prev.phi);
        ch_rhs_mu.iter_mut().for_each(|v| *v /= p.eps);

        let a_f = d.a_f(p.coefficients.nu, &prev.phi)?;
        let a_b = d.a_b(p.coefficients.eta, &prev.phi)?;
        let conv = d.advection(&prev.u)?;
        let c_hat = d.c_hat(&prev.b)?;
        let c_tilde = d.c_tilde(&prev.b)?;
        let mut mhd_matrix = self.mhd.assemble(&[
            (0, 0, &self.mass_v, 1.0 / dt),
            (0, 0, &a_f, 1.0),
            (0, 0, &conv, 1.0),
            (0, 1, &self.div_t, -1.0),
            (0, 2, &c_hat, p.s_c),
            (1, 0, &self.div, -1.0),
            (2, 0, &c_tilde, -1.0),
            (2, 2, &self.mass_v, 1.0 / dt),
            (2, 2, &a_b, 1.0),
        ])?;
        apply_essential(&mut mhd_matrix, None, &self.mhd_bc)?;
        let mhd_factors = self.mhd_symbolic.factor(&mhd_matrix)?;
        log::debug!(
            "flow system: n = {}, nnz = {}, LU fill = {}",
            mhd_matrix.nrows(),
            mhd_matrix.nnz(),
            mhd_factors.fill()
        );

        let mut mu_u = self.mass_v.matvec(&prev.u);
        mu_u.iter_mut().for_each(|v| *v /= dt);
        let mut mb = self.mass_v.matvec(&prev.b);
        mb.iter_mut().for_each(|v| *v /= dt);
        if !sources.is_zero() {
            let g_phi = d.load_scalar(|x| sources.phase(x, t));
            ch_rhs_phi.iter_mut().zip(&g_phi).for_each(|(a, b)| *a += b);
            let g_u = d.load_vector(|x| sources.momentum(x, t));
            mu_u.iter_mut().zip(&g_u).for_each(|(a, b)| *a += b);
            let g_b = d.load_vector(|x| sources.induction(x, t));
            mb.iter_mut().zip(&g_b).for_each(|(a, b)| *a += b);
        }
        let zeros = vec![0.0; self.disc.len(Space::Pressure)];
        let mhd_rhs_base = self.mhd.join(&[&mu_u, &zeros, &mb])?;

        Ok(StepContext {
            solver: self,
            prev,
            t,
            a_kappa,
            k1,
            k2,
            ch_rhs_phi,
            ch_rhs_mu,
            mhd_matrix,
            mhd_factors,
            mhd_rhs_base,
        })
    }

    /// Advance one step.
    pub fn step(&self, prev: &FieldState, sources: &dyn Sources) -> Result<(FieldState, StepDiagnostics)> {
        let p = &self.params;
        let ctx = self.prepare(prev, sources)?;
        let mut cur = prev.clone();
        cur.t = ctx.t;
        let mut residuals = Vec::new();
        let mut increment = f64::INFINITY;
        let mut iterations = 0;
        while iterations < p.picard_max {
            iterations += 1;
            let (phi, mu, r_ch) = ctx.ch_solve(&cur.u, &cur.phi)?;
            let (u, pr, b, r_mhd) = ctx.mhd_solve(&mu)?;
            residuals.extend([r_ch, r_mhd]);
            increment = [
                relative_increment(&phi, &cur.phi),
                relative_increment(&mu, &cur.mu),
                relative_increment(&u, &cur.u),
                relative_increment(&pr, &cur.p),
                relative_increment(&b, &cur.b),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            cur = FieldState { t: ctx.t, phi, mu, u, p: pr, b };
            if increment < p.picard_tol {
                break;
            }
        }
        let converged = increment < p.picard_tol;
        if !converged {
            match p.on_nonconvergence {
                NonConvergence::Abort => return Err(Error::PicardNonConvergence { iterations, increment }),
                NonConvergence::Warn => log::warn!(
                    "t = {:.6}: Picard iteration stopped after {iterations} iterations (increment {increment:e})",
                    ctx.t
                ),
            }
        }
        let diag = StepDiagnostics {
            iterations,
            increment,
            converged,
            solve_residuals: residuals,
            energy: self.energy(&cur),
            weak_divergence: self.weak_divergence(&cur.u),
            mass: self.mass(&cur.phi),
        };
        Ok((cur, diag))
    }

    /// Residuals of the nonlinear step equations at `next`, assembled
    /// independently of the iteration (exact cubic, no linearization).
    pub fn residuals(&self, prev: &FieldState, next: &FieldState, sources: &dyn Sources) -> Result<StepResiduals> {
        let p = &self.params;
        let d = &self.disc;
        let (dt, eps, t) = (p.dt, p.eps, prev.t + p.dt);
        let dphi: Vec<f64> = next.phi.iter().zip(&prev.phi).map(|(a, b)| (a - b) / dt).collect();
        let a_kappa = d.a_phi(p.coefficients.kappa, &prev.phi)?;
        let (k1, k2) = d.capillary(&prev.phi, p.lambda)?;
        let zero_src = sources.is_zero();

        let mut r_phi = self.mass_s.matvec(&dphi);
        add(&mut r_phi, &a_kappa.matvec(&next.mu), eps);
        add(&mut r_phi, &k2.matvec(&next.u), 1.0);
        if !zero_src {
            add(&mut r_phi, &d.load_scalar(|x| sources.phase(x, t)), -1.0);
        }

        let mut r_mu = self.stiffness.matvec(&next.phi);
        r_mu.iter_mut().for_each(|v| *v *= eps);
        add(&mut r_mu, &d.cubic_load(&next.phi)?, 1.0 / eps);
        add(&mut r_mu, &self.mass_s.matvec(&prev.phi), -1.0 / eps);
        add(&mut r_mu, &self.mass_s.matvec(&next.mu), -1.0);

        let du: Vec<f64> = next.u.iter().zip(&prev.u).map(|(a, b)| (a - b) / dt).collect();
        let mut r_u = self.mass_v.matvec(&du);
        add(&mut r_u, &d.a_f(p.coefficients.nu, &prev.phi)?.matvec(&next.u), 1.0);
        add(&mut r_u, &d.advection(&prev.u)?.matvec(&next.u), 1.0);
        add(&mut r_u, &d.c_hat(&prev.b)?.matvec(&next.b), p.s_c);
        add(&mut r_u, &self.div_t.matvec(&next.p), -1.0);
        add(&mut r_u, &k1.matvec(&next.mu), -1.0);
        if !zero_src {
            add(&mut r_u, &d.load_vector(|x| sources.momentum(x, t)), -1.0);
        }
        self.velocity_bc.apply_to(&mut r_u);

        let r_p = self.div.matvec(&next.u);

        let db: Vec<f64> = next.b.iter().zip(&prev.b).map(|(a, b)| (a - b) / dt).collect();
        let mut r_b = self.mass_v.matvec(&db);
        add(&mut r_b, &d.a_b(p.coefficients.eta, &prev.phi)?.matvec(&next.b), 1.0);
        add(&mut r_b, &d.c_tilde(&prev.b)?.matvec(&next.u), -1.0);
        if !zero_src {
            add(&mut r_b, &d.load_vector(|x| sources.induction(x, t)), -1.0);
        }
        self.magnetic_bc.apply_to(&mut r_b);

        Ok(StepResiduals {
            phase: inf(&r_phi),
            potential: inf(&r_mu),
            momentum: inf(&r_u),
            continuity: inf(&r_p),
            induction: inf(&r_b),
        })
    }
}

fn add(acc: &mut [f64], v: &[f64], s: f64) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += s * b);
}

impl StepContext<'_> {
    /// Time level being computed.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Coupled `(phi, mu)` solve with the velocity `u` fixed and the cubic
    /// term linearized at `phi_k`. Returns the relative solve residual too.
    pub fn ch_solve(&self, u: &[f64], phi_k: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let s = self.solver;
        let p = &s.params;
        let d = &s.disc;
        let (scale, extra) = match p.linearization {
            CubicLinearization::Picard => (1.0, None),
            CubicLinearization::Newton => (3.0, Some(d.cubic_load(phi_k)?)),
        };
        let cubic = d.scaled_cubic(phi_k, scale / p.eps)?;
        let a = s.ch.assemble(&[
            (0, 0, &s.mass_s, 1.0 / p.dt),
            (0, 1, &self.a_kappa, p.eps),
            (1, 0, &s.stiffness, p.eps),
            (1, 0, &cubic, 1.0),
            (1, 1, &s.mass_s, -1.0),
        ])?;
        let mut r0 = self.ch_rhs_phi.clone();
        add(&mut r0, &self.k2.matvec(u), -1.0);
        let mut r1 = self.ch_rhs_mu.clone();
        if let Some(c) = extra {
            add(&mut r1, &c, 2.0 / p.eps);
        }
        let rhs = s.ch.join(&[&r0, &r1])?;
        let x = s.ch_symbolic.factor(&a)?.solve(&rhs);
        let res = relative_residual(&a, &x, &rhs);
        Ok((s.ch.field(&x, 0).to_vec(), s.ch.field(&x, 1).to_vec(), res))
    }

    /// Coupled `(u, p, B)` solve for a given chemical potential.
    #[allow(clippy::type_complexity)]
    pub fn mhd_solve(&self, mu: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        let s = self.solver;
        let mut rhs = self.mhd_rhs_base.clone();
        let cap = self.k1.matvec(mu);
        add(&mut rhs[s.mhd.field_range(0)], &cap, 1.0);
        s.mhd_bc.apply_to(&mut rhs);
        let x = self.mhd_factors.solve(&rhs);
        let res = relative_residual(&self.mhd_matrix, &x, &rhs);
        Ok((s.mhd.field(&x, 0).to_vec(), s.mhd.field(&x, 1).to_vec(), s.mhd.field(&x, 2).to_vec(), res))
    }

    pub fn previous(&self) -> &FieldState {
        self.prev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    fn solver(n: usize, dt: f64) -> Solver {
        let disc = Discretization::new(Mesh::unit_square(n).unwrap()).unwrap();
        Solver::new(disc, SchemeParams { dt, ..SchemeParams::default() }).unwrap()
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = [
            SchemeParams { eps: 0.0, ..SchemeParams::default() },
            SchemeParams { dt: -1.0, ..SchemeParams::default() },
            SchemeParams { picard_tol: 1.0, ..SchemeParams::default() },
            SchemeParams { picard_max: 0, ..SchemeParams::default() },
            SchemeParams { coefficients: Coefficients::constant(0.0), ..SchemeParams::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn pure_phases_and_zero_are_fixed_points() {
        let s = solver(3, 0.1);
        for c in [-1.0, 0.0, 1.0] {
            let state = FieldState::constant_phase(s.discretization(), c);
            let (next, diag) = s.step(&state, &NoSources).unwrap();
            assert!(diag.converged && diag.iterations <= 2);
            assert!(next.phi.iter().all(|v| (v - c).abs() < 1e-13));
            assert!(next.mu.iter().chain(&next.u).chain(&next.b).chain(&next.p).all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn zero_state_stays_zero_in_flow_block() {
        let s = solver(2, 0.1);
        let state = FieldState::constant_phase(s.discretization(), 1.0);
        let ctx = s.prepare(&state, &NoSources).unwrap();
        let (u, p, b, _) = ctx.mhd_solve(&vec![0.0; state.mu.len()]).unwrap();
        assert!(u.iter().chain(&p).chain(&b).all(|v| *v == 0.0));
    }
}
