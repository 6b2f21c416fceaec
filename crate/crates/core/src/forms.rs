//! Assembly of the bilinear and trilinear forms and load vectors.
//!
//! Two-dimensional conventions: the curl of a vector field is the scalar
//! `d1 B2 - d2 B1`, the curl of a scalar `w` is `(d2 w, -d1 w)`, and the cross
//! product of two vectors is the scalar `a1 b2 - a2 b1`.
//!
//! Sparsity patterns and element-to-slot maps are built once per
//! [`Discretization`]; every assembly only rewrites values. Vector-vector
//! operators share one pattern (all four component couplings) so they can be
//! summed in place.

use crate::basis::{AffineMap, ReferenceElement};
use crate::linalg::SparseMatrix;
use crate::mesh::{Mesh, Point};
use crate::quadrature::QuadratureRule;
use crate::space::{DofMap, FieldKind};
use crate::{Error, Result};

/// Quadrature degree for matrices and loads.
pub const ASSEMBLY_DEGREE: usize = 6;
/// Quadrature degree for the double-well terms, energies and error norms.
/// Exact for `phi^2 N_i N_j` and `(1 - phi^2)^2` with P2 fields.
pub const FINE_DEGREE: usize = 8;

/// Phase-dependent material coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientLaw {
    Constant(f64),
    /// `e^phi`
    ExpPos,
    /// `e^-phi`
    ExpNeg,
}

impl CoefficientLaw {
    pub fn eval(self, phi: f64) -> f64 {
        match self {
            Self::Constant(c) => c,
            Self::ExpPos => phi.exp(),
            Self::ExpNeg => (-phi).exp(),
        }
    }

    /// Derivative with respect to the phase value.
    pub fn derivative(self, phi: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::ExpPos => phi.exp(),
            Self::ExpNeg => -(-phi).exp(),
        }
    }

    fn checked(self, name: &'static str, phi: f64) -> Result<f64> {
        let value = self.eval(phi);
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonPositiveCoefficient { name, value, phi })
        }
    }
}

/// Mobility, viscosity and magnetic diffusivity laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub kappa: CoefficientLaw,
    pub nu: CoefficientLaw,
    pub eta: CoefficientLaw,
}

impl Coefficients {
    /// `kappa = e^phi`, `nu = e^-phi`, `eta = e^phi`.
    pub fn exponential() -> Self {
        Self { kappa: CoefficientLaw::ExpPos, nu: CoefficientLaw::ExpNeg, eta: CoefficientLaw::ExpPos }
    }

    pub fn constant(c: f64) -> Self {
        let law = CoefficientLaw::Constant(c);
        Self { kappa: law, nu: law, eta: law }
    }
}

/// Which discrete space a matrix side refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Space {
    /// P2 scalar (phase field, chemical potential).
    Scalar,
    /// P2 vector (velocity, magnetic field).
    Vector,
    /// P1 scalar (pressure).
    Pressure,
}

/// Per-element quadrature data for one rule.
#[derive(Debug, Clone)]
struct RuleTable {
    nq: usize,
    weights: Vec<f64>,
    p2_values: Vec<f64>,
    p1_values: Vec<f64>,
    /// `[t][q]`: weight times `|det J|`.
    jxw: Vec<f64>,
    /// `[t][q][i]`: physical P2 gradients.
    grads: Vec<[f64; 2]>,
    points: Vec<Point>,
}

impl RuleTable {
    fn new(mesh: &Mesh, maps: &[AffineMap], degree: usize) -> Result<Self> {
        let rule = QuadratureRule::gauss(degree)?;
        let nq = rule.len();
        let mut p2_values = Vec::with_capacity(6 * nq);
        let mut p1_values = Vec::with_capacity(3 * nq);
        let mut ref_grads = Vec::with_capacity(6 * nq);
        for &p in rule.points() {
            let e2 = ReferenceElement::P2.eval(p);
            p2_values.extend(&e2.values);
            ref_grads.extend(&e2.gradients);
            p1_values.extend(ReferenceElement::P1.eval(p).values);
        }
        let nt = mesh.num_triangles();
        let mut jxw = Vec::with_capacity(nt * nq);
        let mut grads = Vec::with_capacity(nt * nq * 6);
        let mut points = Vec::with_capacity(nt * nq);
        for map in maps {
            for (q, (&p, &w)) in rule.points().iter().zip(rule.weights()).enumerate() {
                jxw.push(w * map.det());
                points.push(map.map(p));
                grads.extend(ref_grads[6 * q..6 * q + 6].iter().map(|&g| map.physical_gradient(g)));
            }
        }
        Ok(Self { nq, weights: rule.weights().to_vec(), p2_values, p1_values, jxw, grads, points })
    }
}

/// View of one element under one quadrature rule.
#[derive(Clone, Copy)]
pub struct Element<'a> {
    t: usize,
    disc: &'a Discretization,
    table: &'a RuleTable,
}

impl<'a> Element<'a> {
    pub fn index(&self) -> usize {
        self.t
    }

    pub fn num_points(&self) -> usize {
        self.table.nq
    }

    /// Quadrature weight times `|det J|`.
    pub fn jxw(&self, q: usize) -> f64 {
        self.table.jxw[self.t * self.table.nq + q]
    }

    pub fn point(&self, q: usize) -> Point {
        self.table.points[self.t * self.table.nq + q]
    }

    /// P2 basis values at point `q`.
    pub fn n(&self, q: usize) -> &'a [f64] {
        &self.table.p2_values[6 * q..6 * q + 6]
    }

    /// Physical P2 gradients at point `q`.
    pub fn dn(&self, q: usize) -> &'a [[f64; 2]] {
        let k = (self.t * self.table.nq + q) * 6;
        &self.table.grads[k..k + 6]
    }

    /// P1 basis values at point `q`.
    pub fn psi(&self, q: usize) -> &'a [f64] {
        &self.table.p1_values[3 * q..3 * q + 3]
    }

    /// Local coefficients of a global P2 scalar vector.
    pub fn scalar_coeffs(&self, f: &[f64]) -> [f64; 6] {
        let dofs = self.disc.scalar.cell_dofs(self.t);
        std::array::from_fn(|i| f[dofs[i]])
    }

    /// Local coefficients of a global P2 vector field, per component.
    pub fn vector_coeffs(&self, f: &[f64]) -> [[f64; 6]; 2] {
        let dofs = self.disc.vector.cell_dofs(self.t);
        [std::array::from_fn(|i| f[dofs[i]]), std::array::from_fn(|i| f[dofs[6 + i]])]
    }

    pub fn pressure_coeffs(&self, f: &[f64]) -> [f64; 3] {
        let dofs = self.disc.pressure.cell_dofs(self.t);
        std::array::from_fn(|i| f[dofs[i]])
    }

    pub fn value(&self, q: usize, c: &[f64; 6]) -> f64 {
        self.n(q).iter().zip(c).map(|(n, c)| n * c).sum()
    }

    pub fn gradient(&self, q: usize, c: &[f64; 6]) -> [f64; 2] {
        self.dn(q).iter().zip(c).fold([0.0, 0.0], |g, (d, c)| [g[0] + c * d[0], g[1] + c * d[1]])
    }

    pub fn pressure_value(&self, q: usize, c: &[f64; 3]) -> f64 {
        self.psi(q).iter().zip(c).map(|(n, c)| n * c).sum()
    }
}

#[derive(Debug, Clone)]
struct Pattern {
    zero: SparseMatrix,
    /// `[t][i][j]` value slot for local test `i`, trial `j`.
    slots: Vec<usize>,
    test_len: usize,
    trial_len: usize,
}

/// Mesh, dof maps, quadrature tables and sparsity patterns for the mixed
/// P2 / P2 / P2-vector / P1 / P2-vector discretization.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Mesh,
    scalar: DofMap,
    vector: DofMap,
    pressure: DofMap,
    standard: RuleTable,
    fine: RuleTable,
    ss: Pattern,
    vv: Pattern,
    pv: Pattern,
    vs: Pattern,
    sv: Pattern,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let scalar = DofMap::new(&mesh, FieldKind::ScalarP2);
        let vector = DofMap::new(&mesh, FieldKind::VectorP2);
        let pressure = DofMap::new(&mesh, FieldKind::ScalarP1);
        let maps =
            (0..mesh.num_triangles()).map(|t| AffineMap::new(mesh.triangle_points(t))).collect::<Result<Vec<_>>>()?;
        let standard = RuleTable::new(&mesh, &maps, ASSEMBLY_DEGREE)?;
        let fine = RuleTable::new(&mesh, &maps, FINE_DEGREE)?;
        let nt = mesh.num_triangles();
        let ss = Pattern::build(nt, &scalar, &scalar);
        let vv = Pattern::build(nt, &vector, &vector);
        let pv = Pattern::build(nt, &pressure, &vector);
        let vs = Pattern::build(nt, &vector, &scalar);
        let sv = Pattern::build(nt, &scalar, &vector);
        Ok(Self { mesh, scalar, vector, pressure, standard, fine, ss, vv, pv, vs, sv })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofmap(&self, space: Space) -> &DofMap {
        match space {
            Space::Scalar => &self.scalar,
            Space::Vector => &self.vector,
            Space::Pressure => &self.pressure,
        }
    }

    pub fn len(&self, space: Space) -> usize {
        self.dofmap(space).len()
    }

    /// Element views under the assembly rule (`fine = false`) or the fine rule.
    pub fn elements(&self, fine: bool) -> impl Iterator<Item = Element<'_>> {
        let table = if fine { &self.fine } else { &self.standard };
        (0..self.mesh.num_triangles()).map(move |t| Element { t, disc: self, table })
    }

    /// Reference weights of the assembly and fine rules (for tests).
    pub fn rule_weights(&self, fine: bool) -> &[f64] {
        if fine {
            &self.fine.weights
        } else {
            &self.standard.weights
        }
    }

    fn pattern(&self, test: Space, trial: Space) -> Result<&Pattern> {
        match (test, trial) {
            (Space::Scalar, Space::Scalar) => Ok(&self.ss),
            (Space::Vector, Space::Vector) => Ok(&self.vv),
            (Space::Pressure, Space::Vector) => Ok(&self.pv),
            (Space::Vector, Space::Scalar) => Ok(&self.vs),
            (Space::Scalar, Space::Vector) => Ok(&self.sv),
            _ => Err(Error::InvalidArgument(format!("no pattern for {test:?} x {trial:?}"))),
        }
    }

    /// Zero matrix with the shared pattern of `test x trial` operators.
    pub fn zero_matrix(&self, test: Space, trial: Space) -> Result<SparseMatrix> {
        Ok(self.pattern(test, trial)?.zero.clone())
    }

    /// Element loop: `kernel(element, local)` adds into the row-major local
    /// matrix (test rows, trial columns), which is then scattered.
    fn assemble<F>(&self, test: Space, trial: Space, fine: bool, mut kernel: F) -> Result<SparseMatrix>
    where
        F: FnMut(&Element<'_>, &mut [f64]) -> Result<()>,
    {
        let pat = self.pattern(test, trial)?;
        let mut m = pat.zero.clone();
        let block = pat.test_len * pat.trial_len;
        let mut local = vec![0.0; block];
        let vals = m.values_mut();
        for el in self.elements(fine) {
            local.fill(0.0);
            kernel(&el, &mut local)?;
            let slots = &pat.slots[el.t * block..(el.t + 1) * block];
            for (&s, &v) in slots.iter().zip(&local) {
                vals[s] += v;
            }
        }
        Ok(m)
    }

    fn check_len(&self, space: Space, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.len(space) {
            return Err(Error::DimensionMismatch(format!(
                "{what} has length {}, expected {}",
                v.len(),
                self.len(space)
            )));
        }
        Ok(())
    }

    /// L2 mass matrix of a space. Vector mass is block diagonal.
    pub fn mass(&self, space: Space) -> Result<SparseMatrix> {
        match space {
            Space::Pressure => {
                let mut triplets = Vec::new();
                for el in self.elements(false) {
                    let dofs = self.pressure.cell_dofs(el.t);
                    for q in 0..el.num_points() {
                        let psi = el.psi(q);
                        for i in 0..3 {
                            for j in 0..3 {
                                triplets.push((dofs[i], dofs[j], el.jxw(q) * psi[i] * psi[j]));
                            }
                        }
                    }
                }
                Ok(SparseMatrix::from_triplets(self.pressure.len(), self.pressure.len(), &triplets))
            }
            Space::Scalar => self.weighted_mass_with(false, |_, _| Ok(1.0)),
            Space::Vector => self.assemble(Space::Vector, Space::Vector, false, |el, local| {
                for q in 0..el.num_points() {
                    let (w, n) = (el.jxw(q), el.n(q));
                    for i in 0..6 {
                        for j in 0..6 {
                            let v = w * n[i] * n[j];
                            local[i * 12 + j] += v;
                            local[(i + 6) * 12 + j + 6] += v;
                        }
                    }
                }
                Ok(())
            }),
        }
    }

    fn weighted_mass_with<F>(&self, fine: bool, mut weight: F) -> Result<SparseMatrix>
    where
        F: FnMut(&Element<'_>, usize) -> Result<f64>,
    {
        self.assemble(Space::Scalar, Space::Scalar, fine, |el, local| {
            for q in 0..el.num_points() {
                let w = el.jxw(q) * weight(el, q)?;
                let n = el.n(q);
                for i in 0..6 {
                    for j in 0..6 {
                        local[i * 6 + j] += w * n[i] * n[j];
                    }
                }
            }
            Ok(())
        })
    }

    /// Mass matrix weighted by `(phi_k)^2`, integrated with the fine rule.
    pub fn cubic(&self, phi_k: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Scalar, phi_k, "phase iterate")?;
        self.scaled_cubic(phi_k, 1.0)
    }

    /// Mass matrix weighted by `s * (phi_k)^2` with the fine rule.
    pub fn scaled_cubic(&self, phi_k: &[f64], s: f64) -> Result<SparseMatrix> {
        self.check_len(Space::Scalar, phi_k, "phase iterate")?;
        let mut cache = (usize::MAX, [0.0; 6]);
        self.weighted_mass_with(true, |el, q| {
            if cache.0 != el.t {
                cache = (el.t, el.scalar_coeffs(phi_k));
            }
            let v = el.value(q, &cache.1);
            Ok(s * v * v)
        })
    }

    /// `l_i = int phi^3 N_i` with the fine rule.
    pub fn cubic_load(&self, phi: &[f64]) -> Result<Vec<f64>> {
        self.check_len(Space::Scalar, phi, "phase field")?;
        let mut out = vec![0.0; self.scalar.len()];
        for el in self.elements(true) {
            let c = el.scalar_coeffs(phi);
            let dofs = self.scalar.cell_dofs(el.t);
            for q in 0..el.num_points() {
                let v = el.value(q, &c);
                let w = el.jxw(q) * v * v * v;
                for (d, n) in dofs.iter().zip(el.n(q)) {
                    out[*d] += w * n;
                }
            }
        }
        Ok(out)
    }

    /// `int k(phi) grad N_j . grad N_i`
    pub fn a_phi(&self, kappa: CoefficientLaw, phi: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Scalar, phi, "phase field")?;
        self.assemble(Space::Scalar, Space::Scalar, false, |el, local| {
            let c = el.scalar_coeffs(phi);
            for q in 0..el.num_points() {
                let k = el.jxw(q) * kappa.checked("kappa", el.value(q, &c))?;
                let g = el.dn(q);
                for i in 0..6 {
                    for j in 0..6 {
                        local[i * 6 + j] += k * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    }
                }
            }
            Ok(())
        })
    }

    /// Unit-coefficient P2 stiffness matrix.
    pub fn stiffness(&self) -> Result<SparseMatrix> {
        self.a_phi(CoefficientLaw::Constant(1.0), &vec![0.0; self.scalar.len()])
    }

    /// `int 2 nu(phi) D(u) : D(v)`
    pub fn a_f(&self, nu: CoefficientLaw, phi: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Scalar, phi, "phase field")?;
        self.assemble(Space::Vector, Space::Vector, false, |el, local| {
            let c = el.scalar_coeffs(phi);
            for q in 0..el.num_points() {
                let k = el.jxw(q) * nu.checked("nu", el.value(q, &c))?;
                let g = el.dn(q);
                for i in 0..6 {
                    let [xi, yi] = g[i];
                    for j in 0..6 {
                        let [xj, yj] = g[j];
                        local[i * 12 + j] += k * (2.0 * xi * xj + yi * yj);
                        local[i * 12 + j + 6] += k * yi * xj;
                        local[(i + 6) * 12 + j] += k * xi * yj;
                        local[(i + 6) * 12 + j + 6] += k * (xi * xj + 2.0 * yi * yj);
                    }
                }
            }
            Ok(())
        })
    }

    /// `int eta(phi) (curl B curl H + div B div H)`
    pub fn a_b(&self, eta: CoefficientLaw, phi: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Scalar, phi, "phase field")?;
        self.assemble(Space::Vector, Space::Vector, false, |el, local| {
            let c = el.scalar_coeffs(phi);
            for q in 0..el.num_points() {
                let k = el.jxw(q) * eta.checked("eta", el.value(q, &c))?;
                let g = el.dn(q);
                for i in 0..6 {
                    let [xi, yi] = g[i];
                    for j in 0..6 {
                        let [xj, yj] = g[j];
                        let lap = k * (xi * xj + yi * yj);
                        let cross = k * (xi * yj - yi * xj);
                        local[i * 12 + j] += lap;
                        local[i * 12 + j + 6] += cross;
                        local[(i + 6) * 12 + j] -= cross;
                        local[(i + 6) * 12 + j + 6] += lap;
                    }
                }
            }
            Ok(())
        })
    }

    /// `D[q][v] = int psi_q div v` (pressure rows, velocity columns).
    pub fn divergence(&self) -> Result<SparseMatrix> {
        self.assemble(Space::Pressure, Space::Vector, false, |el, local| {
            for q in 0..el.num_points() {
                let (w, psi, g) = (el.jxw(q), el.psi(q), el.dn(q));
                for i in 0..3 {
                    for j in 0..6 {
                        local[i * 12 + j] += w * psi[i] * g[j][0];
                        local[i * 12 + j + 6] += w * psi[i] * g[j][1];
                    }
                }
            }
            Ok(())
        })
    }

    /// Skew-symmetrized convection `1/2 int ((w.grad)u).v - ((w.grad)v).u`
    /// with trial `u` and test `v`. Antisymmetric by construction.
    pub fn advection(&self, w: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Vector, w, "advecting field")?;
        self.assemble(Space::Vector, Space::Vector, false, |el, local| {
            let wc = el.vector_coeffs(w);
            let mut k = [[0.0; 6]; 6];
            for q in 0..el.num_points() {
                let (jw, n, g) = (el.jxw(q), el.n(q), el.dn(q));
                let wq = [el.value(q, &wc[0]), el.value(q, &wc[1])];
                for i in 0..6 {
                    for j in 0..6 {
                        k[i][j] += jw * (wq[0] * g[j][0] + wq[1] * g[j][1]) * n[i];
                    }
                }
            }
            for i in 0..6 {
                for j in 0..6 {
                    let s = 0.5 * (k[i][j] - k[j][i]);
                    local[i * 12 + j] += s;
                    local[(i + 6) * 12 + j + 6] += s;
                }
            }
            Ok(())
        })
    }

    /// `int (L x curl B) . v` with lagged `L`, trial `B`, test `v`.
    pub fn c_hat(&self, lag: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Vector, lag, "lagged magnetic field")?;
        self.assemble(Space::Vector, Space::Vector, false, |el, local| {
            let lc = el.vector_coeffs(lag);
            for q in 0..el.num_points() {
                let (jw, n, g) = (el.jxw(q), el.n(q), el.dn(q));
                let (l1, l2) = (jw * el.value(q, &lc[0]), jw * el.value(q, &lc[1]));
                for i in 0..6 {
                    for j in 0..6 {
                        let [xj, yj] = g[j];
                        local[i * 12 + j] -= l2 * n[i] * yj;
                        local[i * 12 + j + 6] += l2 * n[i] * xj;
                        local[(i + 6) * 12 + j] += l1 * n[i] * yj;
                        local[(i + 6) * 12 + j + 6] -= l1 * n[i] * xj;
                    }
                }
            }
            Ok(())
        })
    }

    /// `int (u x L) curl H` with lagged `L`, trial `u`, test `H`.
    pub fn c_tilde(&self, lag: &[f64]) -> Result<SparseMatrix> {
        self.check_len(Space::Vector, lag, "lagged magnetic field")?;
        self.assemble(Space::Vector, Space::Vector, false, |el, local| {
            let lc = el.vector_coeffs(lag);
            for q in 0..el.num_points() {
                let (jw, n, g) = (el.jxw(q), el.n(q), el.dn(q));
                let (l1, l2) = (jw * el.value(q, &lc[0]), jw * el.value(q, &lc[1]));
                for i in 0..6 {
                    let [xi, yi] = g[i];
                    for j in 0..6 {
                        local[i * 12 + j] -= n[j] * l2 * yi;
                        local[i * 12 + j + 6] += n[j] * l1 * yi;
                        local[(i + 6) * 12 + j] += n[j] * l2 * xi;
                        local[(i + 6) * 12 + j + 6] -= n[j] * l1 * xi;
                    }
                }
            }
            Ok(())
        })
    }

    /// Capillary coupling through the lagged phase gradient:
    /// `K1[v][mu] = lambda int mu grad(phi) . v` and
    /// `K2[psi][u] = int (grad(phi) . u) psi`, so `K1 = lambda K2^T`.
    pub fn capillary(&self, phi_lag: &[f64], lambda: f64) -> Result<(SparseMatrix, SparseMatrix)> {
        self.check_len(Space::Scalar, phi_lag, "lagged phase field")?;
        let kernel = |el: &Element<'_>, q: usize, c: &[f64; 6]| {
            let g = el.gradient(q, c);
            [el.jxw(q) * g[0], el.jxw(q) * g[1]]
        };
        let k1 = self.assemble(Space::Vector, Space::Scalar, false, |el, local| {
            let c = el.scalar_coeffs(phi_lag);
            for q in 0..el.num_points() {
                let g = kernel(el, q, &c);
                let n = el.n(q);
                for i in 0..6 {
                    for j in 0..6 {
                        local[i * 6 + j] += lambda * g[0] * n[j] * n[i];
                        local[(i + 6) * 6 + j] += lambda * g[1] * n[j] * n[i];
                    }
                }
            }
            Ok(())
        })?;
        let k2 = self.assemble(Space::Scalar, Space::Vector, false, |el, local| {
            let c = el.scalar_coeffs(phi_lag);
            for q in 0..el.num_points() {
                let g = kernel(el, q, &c);
                let n = el.n(q);
                for i in 0..6 {
                    for j in 0..6 {
                        local[i * 12 + j] += g[0] * n[j] * n[i];
                        local[i * 12 + j + 6] += g[1] * n[j] * n[i];
                    }
                }
            }
            Ok(())
        })?;
        Ok((k1, k2))
    }

    /// `l_i = int f N_i` for a scalar P2 test space.
    pub fn load_scalar(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.scalar.len()];
        for el in self.elements(false) {
            let dofs = self.scalar.cell_dofs(el.t);
            for q in 0..el.num_points() {
                let w = el.jxw(q) * f(el.point(q));
                for (d, n) in dofs.iter().zip(el.n(q)) {
                    out[*d] += w * n;
                }
            }
        }
        out
    }

    /// `l_i = int f . N_i` for the vector P2 test space.
    pub fn load_vector(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.vector.len()];
        for el in self.elements(false) {
            let dofs = self.vector.cell_dofs(el.t);
            for q in 0..el.num_points() {
                let v = f(el.point(q));
                let (wx, wy) = (el.jxw(q) * v[0], el.jxw(q) * v[1]);
                for (i, n) in el.n(q).iter().enumerate() {
                    out[dofs[i]] += wx * n;
                    out[dofs[6 + i]] += wy * n;
                }
            }
        }
        out
    }
}

impl Pattern {
    fn build(nt: usize, test: &DofMap, trial: &DofMap) -> Self {
        let (lt, lc) = (test.local_len(), trial.local_len());
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); test.len()];
        for t in 0..nt {
            let cols = trial.cell_dofs(t);
            for &r in test.cell_dofs(t) {
                rows[r].extend_from_slice(cols);
            }
        }
        let zero = SparseMatrix::from_rows(test.len(), trial.len(), rows);
        let mut slots = Vec::with_capacity(nt * lt * lc);
        for t in 0..nt {
            for &r in test.cell_dofs(t) {
                for &c in trial.cell_dofs(t) {
                    slots.push(zero.find(r, c).expect("pattern covers element couplings"));
                }
            }
        }
        Self { zero, slots, test_len: lt, trial_len: lc }
    }
}
