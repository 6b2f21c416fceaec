//! Independent oracles shared by the integration tests and the acceptance
//! suite.
//!
//! `DenseOracle` assembles every form as a dense matrix by looping over
//! elements and quadrature points with its own barycentric P2/P1 basis. It
//! shares only the mesh connectivity and the reference quadrature table with
//! the library. `fd` evaluates the strong residuals of the manufactured
//! fields by fourth-order finite differences of the field closures.

#![allow(dead_code)]

use chmhd::quadrature::QuadratureRule;
use chmhd::Mesh;

pub type Dense = Vec<Vec<f64>>;

/// One basis function restricted to one triangle: global dof, and value and
/// gradient as functions of the barycentric coordinates.
#[derive(Clone, Copy)]
struct Shape {
    dof: usize,
    kind: ShapeKind,
}

#[derive(Clone, Copy)]
enum ShapeKind {
    /// `l_a (2 l_a - 1)`
    Vertex(usize),
    /// `4 l_a l_b`
    Edge(usize, usize),
    /// `l_a`
    Linear(usize),
}

struct Tri {
    verts: [[f64; 2]; 3],
    area: f64,
    /// Gradients of the barycentric coordinates.
    grad_l: [[f64; 2]; 3],
    p2: Vec<Shape>,
    p1: Vec<Shape>,
}

impl Tri {
    fn value(&self, s: &Shape, l: &[f64; 3]) -> f64 {
        match s.kind {
            ShapeKind::Vertex(a) => l[a] * (2.0 * l[a] - 1.0),
            ShapeKind::Edge(a, b) => 4.0 * l[a] * l[b],
            ShapeKind::Linear(a) => l[a],
        }
    }

    fn grad(&self, s: &Shape, l: &[f64; 3]) -> [f64; 2] {
        let g = &self.grad_l;
        match s.kind {
            ShapeKind::Vertex(a) => [(4.0 * l[a] - 1.0) * g[a][0], (4.0 * l[a] - 1.0) * g[a][1]],
            ShapeKind::Edge(a, b) => [4.0 * (l[a] * g[b][0] + l[b] * g[a][0]), 4.0 * (l[a] * g[b][1] + l[b] * g[a][1])],
            ShapeKind::Linear(a) => g[a],
        }
    }

    fn point(&self, l: &[f64; 3]) -> [f64; 2] {
        let v = &self.verts;
        [l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]]
    }
}

/// Values and gradients of all basis functions at one quadrature point.
pub struct PointEval {
    pub x: [f64; 2],
    pub w: f64,
    /// Scalar P2: (global dof, value, gradient).
    pub p2: Vec<(usize, f64, [f64; 2])>,
    pub p1: Vec<(usize, f64)>,
}

impl PointEval {
    pub fn scalar(&self, c: &[f64]) -> f64 {
        self.p2.iter().map(|(d, v, _)| c[*d] * v).sum()
    }

    pub fn scalar_grad(&self, c: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (d, _, dg) in &self.p2 {
            g[0] += c[*d] * dg[0];
            g[1] += c[*d] * dg[1];
        }
        g
    }
}

pub struct DenseOracle {
    pub ns: usize,
    pub np: usize,
    tris: Vec<Tri>,
}

/// A vector basis function: global dof, component, value, gradient.
pub type VecShape = (usize, usize, f64, [f64; 2]);

impl DenseOracle {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.num_vertices();
        let ns = nv + mesh.num_edges();
        let mut tris = Vec::new();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let verts = [mesh.vertices()[tri[0]], mesh.vertices()[tri[1]], mesh.vertices()[tri[2]]];
            let det = (verts[1][0] - verts[0][0]) * (verts[2][1] - verts[0][1])
                - (verts[2][0] - verts[0][0]) * (verts[1][1] - verts[0][1]);
            // grad l_a is the inward normal of the opposite edge over twice the area
            let grad_l: [[f64; 2]; 3] = std::array::from_fn(|a| {
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                [(verts[b][1] - verts[c][1]) / det, (verts[c][0] - verts[b][0]) / det]
            });
            let mut p2: Vec<Shape> = (0..3).map(|a| Shape { dof: tri[a], kind: ShapeKind::Vertex(a) }).collect();
            for &e in &mesh.triangle_edges()[t] {
                let [va, vb] = mesh.edges()[e].vertices;
                let a = tri.iter().position(|&v| v == va).unwrap();
                let b = tri.iter().position(|&v| v == vb).unwrap();
                p2.push(Shape { dof: nv + e, kind: ShapeKind::Edge(a, b) });
            }
            let p1 = (0..3).map(|a| Shape { dof: tri[a], kind: ShapeKind::Linear(a) }).collect();
            tris.push(Tri { verts, area: 0.5 * det.abs(), grad_l, p2, p1 });
        }
        Self { ns, np: nv, tris }
    }

    pub fn nv(&self) -> usize {
        2 * self.ns
    }

    /// Every quadrature point of the mesh under the rule of the given degree.
    pub fn points(&self, degree: usize) -> Vec<PointEval> {
        let rule = QuadratureRule::gauss(degree).unwrap();
        let total: f64 = rule.weights().iter().sum();
        let mut out = Vec::new();
        for tri in &self.tris {
            for (r, &w) in rule.points().iter().zip(rule.weights()) {
                let l = [1.0 - r[0] - r[1], r[0], r[1]];
                out.push(PointEval {
                    x: tri.point(&l),
                    w: w * tri.area / total,
                    p2: tri.p2.iter().map(|s| (s.dof, tri.value(s, &l), tri.grad(s, &l))).collect(),
                    p1: tri.p1.iter().map(|s| (s.dof, tri.value(s, &l))).collect(),
                });
            }
        }
        out
    }

    /// Vector P2 basis at a point, component-major global numbering.
    pub fn vector_shapes(&self, pe: &PointEval) -> Vec<VecShape> {
        let mut v = Vec::new();
        for c in 0..2 {
            for &(d, val, g) in &pe.p2 {
                v.push((c * self.ns + d, c, val, g));
            }
        }
        v
    }

    pub fn vector_value(&self, pe: &PointEval, c: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (d, comp, val, _) in self.vector_shapes(pe) {
            out[comp] += c[d] * val;
        }
        out
    }

    /// `[d/dx, d/dy]` of each component.
    pub fn vector_grad(&self, pe: &PointEval, c: &[f64]) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for (d, comp, _, g) in self.vector_shapes(pe) {
            out[comp][0] += c[d] * g[0];
            out[comp][1] += c[d] * g[1];
        }
        out
    }

    /// Dense scalar-scalar form `int k(x, pe) * integrand(test, trial)`.
    pub fn scalar_form(&self, degree: usize, f: impl Fn(&PointEval, (f64, [f64; 2]), (f64, [f64; 2])) -> f64) -> Dense {
        let mut m = vec![vec![0.0; self.ns]; self.ns];
        for pe in self.points(degree) {
            for &(i, vi, gi) in &pe.p2 {
                for &(j, vj, gj) in &pe.p2 {
                    m[i][j] += pe.w * f(&pe, (vi, gi), (vj, gj));
                }
            }
        }
        m
    }

    /// Dense vector-vector form; the closure receives `(component, value, gradient)`
    /// of the test and trial functions.
    pub fn vector_form(
        &self,
        degree: usize,
        f: impl Fn(&PointEval, (usize, f64, [f64; 2]), (usize, f64, [f64; 2])) -> f64,
    ) -> Dense {
        let n = self.nv();
        let mut m = vec![vec![0.0; n]; n];
        for pe in self.points(degree) {
            let shapes = self.vector_shapes(&pe);
            for &(i, ci, vi, gi) in &shapes {
                for &(j, cj, vj, gj) in &shapes {
                    m[i][j] += pe.w * f(&pe, (ci, vi, gi), (cj, vj, gj));
                }
            }
        }
        m
    }

    pub fn mass_scalar(&self) -> Dense {
        self.scalar_form(6, |_, (vi, _), (vj, _)| vi * vj)
    }

    pub fn mass_vector(&self) -> Dense {
        self.vector_form(6, |_, (ci, vi, _), (cj, vj, _)| if ci == cj { vi * vj } else { 0.0 })
    }

    pub fn mass_pressure(&self) -> Dense {
        let mut m = vec![vec![0.0; self.np]; self.np];
        for pe in self.points(6) {
            for &(i, vi) in &pe.p1 {
                for &(j, vj) in &pe.p1 {
                    m[i][j] += pe.w * vi * vj;
                }
            }
        }
        m
    }

    pub fn cubic(&self, phi: &[f64], s: f64) -> Dense {
        self.scalar_form(8, |pe, (vi, _), (vj, _)| s * pe.scalar(phi).powi(2) * vi * vj)
    }

    pub fn cubic_load(&self, phi: &[f64]) -> Vec<f64> {
        let mut l = vec![0.0; self.ns];
        for pe in self.points(8) {
            let v = pe.scalar(phi);
            for &(i, vi, _) in &pe.p2 {
                l[i] += pe.w * v * v * v * vi;
            }
        }
        l
    }

    pub fn a_phi(&self, kappa: impl Fn(f64) -> f64, phi: &[f64]) -> Dense {
        self.scalar_form(6, |pe, (_, gi), (_, gj)| kappa(pe.scalar(phi)) * (gi[0] * gj[0] + gi[1] * gj[1]))
    }

    /// `int 2 nu D(u):D(v)` with `D = (grad + grad^T) / 2`.
    pub fn a_f(&self, nu: impl Fn(f64) -> f64, phi: &[f64]) -> Dense {
        self.vector_form(6, |pe, (ci, _, gi), (cj, _, gj)| {
            let strain = |c: usize, g: [f64; 2]| {
                let mut d = [[0.0; 2]; 2];
                for k in 0..2 {
                    d[c][k] += 0.5 * g[k];
                    d[k][c] += 0.5 * g[k];
                }
                d
            };
            let (di, dj) = (strain(ci, gi), strain(cj, gj));
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += di[a][b] * dj[a][b];
                }
            }
            2.0 * nu(pe.scalar(phi)) * s
        })
    }

    /// `int eta (curl B curl H + div B div H)`
    pub fn a_b(&self, eta: impl Fn(f64) -> f64, phi: &[f64]) -> Dense {
        self.vector_form(6, |pe, (ci, _, gi), (cj, _, gj)| {
            let (curl_i, div_i) = curl_div(ci, gi);
            let (curl_j, div_j) = curl_div(cj, gj);
            eta(pe.scalar(phi)) * (curl_i * curl_j + div_i * div_j)
        })
    }

    /// Pressure rows, velocity columns: `int q div v`.
    pub fn divergence(&self) -> Dense {
        let mut m = vec![vec![0.0; self.nv()]; self.np];
        for pe in self.points(6) {
            for (j, cj, _, gj) in self.vector_shapes(&pe) {
                for &(i, vi) in &pe.p1 {
                    m[i][j] += pe.w * vi * gj[cj];
                }
            }
        }
        m
    }

    /// `1/2 int ((w.grad)u).v - ((w.grad)v).u`, trial `u`, test `v`.
    pub fn advection(&self, w: &[f64]) -> Dense {
        self.vector_form(6, |pe, (ci, vi, gi), (cj, vj, gj)| {
            if ci != cj {
                return 0.0;
            }
            let wq = self.vector_value(pe, w);
            0.5 * ((wq[0] * gj[0] + wq[1] * gj[1]) * vi - (wq[0] * gi[0] + wq[1] * gi[1]) * vj)
        })
    }

    /// `int (L x curl B) . v`, trial `B`, test `v`; `a x k = (a2 k, -a1 k)`.
    pub fn c_hat(&self, lag: &[f64]) -> Dense {
        self.vector_form(6, |pe, (ci, vi, _), (cj, _, gj)| {
            let l = self.vector_value(pe, lag);
            let (curl, _) = curl_div(cj, gj);
            let force = [l[1] * curl, -l[0] * curl];
            force[ci] * vi
        })
    }

    /// `int (u x L) curl H`, trial `u`, test `H`; `a x b = a1 b2 - a2 b1`.
    pub fn c_tilde(&self, lag: &[f64]) -> Dense {
        self.vector_form(6, |pe, (ci, _, gi), (cj, vj, _)| {
            let l = self.vector_value(pe, lag);
            let mut u = [0.0; 2];
            u[cj] = vj;
            let (curl, _) = curl_div(ci, gi);
            (u[0] * l[1] - u[1] * l[0]) * curl
        })
    }

    /// `(K1, K2)`: `K1[v][mu] = lambda int mu grad(phi).v`, `K2[psi][u] = int (grad(phi).u) psi`.
    pub fn capillary(&self, phi: &[f64], lambda: f64) -> (Dense, Dense) {
        let mut k1 = vec![vec![0.0; self.ns]; self.nv()];
        let mut k2 = vec![vec![0.0; self.nv()]; self.ns];
        for pe in self.points(6) {
            let g = pe.scalar_grad(phi);
            for (i, ci, vi, _) in self.vector_shapes(&pe) {
                for &(j, vj, _) in &pe.p2 {
                    k1[i][j] += pe.w * lambda * vj * g[ci] * vi;
                    k2[j][i] += pe.w * g[ci] * vi * vj;
                }
            }
        }
        (k1, k2)
    }

    pub fn load_scalar(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mut l = vec![0.0; self.ns];
        for pe in self.points(6) {
            let v = f(pe.x);
            for &(i, vi, _) in &pe.p2 {
                l[i] += pe.w * v * vi;
            }
        }
        l
    }

    pub fn load_vector(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut l = vec![0.0; self.nv()];
        for pe in self.points(6) {
            let v = f(pe.x);
            for (i, c, vi, _) in self.vector_shapes(&pe) {
                l[i] += pe.w * v[c] * vi;
            }
        }
        l
    }
}

/// Curl `d_x v2 - d_y v1` and divergence of `N e_c`.
fn curl_div(c: usize, g: [f64; 2]) -> (f64, f64) {
    match c {
        0 => (-g[1], g[0]),
        _ => (g[0], g[1]),
    }
}

/// Largest entrywise difference relative to the largest oracle entry.
pub fn relative_difference(a: &Dense, oracle: &Dense) -> f64 {
    assert_eq!(a.len(), oracle.len());
    let scale = oracle.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let diff = a.iter().flatten().zip(oracle.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

pub fn relative_difference_vec(a: &[f64], oracle: &[f64]) -> f64 {
    relative_difference(&vec![a.to_vec()], &vec![oracle.to_vec()])
}

pub mod fd {
    //! Fourth-order central differences of the strong residuals.
    //!
    //! Only the field closures of the manufactured solution are used; `mu`
    //! enters through its own closure, and its defining relation is checked
    //! separately by `potential_residual`.

    use chmhd::verify::ManufacturedSolution;

    pub const STEP: f64 = 1e-3;

    /// `f'(x)` with the 5-point stencil.
    pub fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    /// `f''(x)` with the 5-point stencil.
    pub fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
    }

    /// `[d/dx, d/dy]` of a scalar field at fixed time.
    pub fn grad(f: &impl Fn([f64; 2]) -> f64, p: [f64; 2]) -> [f64; 2] {
        [d1(|x| f([x, p[1]]), p[0], STEP), d1(|y| f([p[0], y]), p[1], STEP)]
    }

    fn component<'a>(f: &'a dyn Fn([f64; 2]) -> [f64; 2], c: usize) -> impl Fn([f64; 2]) -> f64 + 'a {
        move |q| f(q)[c]
    }

    pub struct Laws {
        pub kappa: fn(f64) -> f64,
        pub nu: fn(f64) -> f64,
        pub eta: fn(f64) -> f64,
    }

    pub const EXPONENTIAL_LAWS: Laws = Laws { kappa: f64::exp, nu: |p| (-p).exp(), eta: f64::exp };

    /// Phase, momentum and induction residuals at `(p, t)`:
    ///
    /// ```text
    /// phi_t - eps div(kappa grad mu) + u . grad phi
    /// u_t - div(2 nu D(u)) + (u.grad)u + S_c B x curl B + grad p - lambda mu grad phi
    /// B_t + curl(eta curl B) - curl(u x B)
    /// ```
    pub fn residuals(m: &ManufacturedSolution, laws: &Laws, p: [f64; 2], t: f64) -> (f64, [f64; 2], [f64; 2]) {
        let h = STEP;
        let phi = |q: [f64; 2]| m.phi(q, t);
        let mu = |q: [f64; 2]| m.mu(q, t);
        let u = |q: [f64; 2]| m.velocity(q, t);
        let b = |q: [f64; 2]| m.magnetic(q, t);
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];

        let grad_phi = grad(&phi, p);
        let phi_t = d1(|s| m.phi(p, s), t, h);
        let flux = |q: [f64; 2]| {
            let g = grad(&mu, q);
            let k = (laws.kappa)(phi(q));
            [k * g[0], k * g[1]]
        };
        let div_flux = d1(|x| flux([x, p[1]])[0], p[0], h) + d1(|y| flux([p[0], y])[1], p[1], h);
        let phase = phi_t - m.eps * div_flux + dot(u(p), grad_phi);

        // momentum
        let u_t: [f64; 2] = std::array::from_fn(|c| d1(|s| m.velocity(p, s)[c], t, h));
        let grad_u: [[f64; 2]; 2] = std::array::from_fn(|c| grad(&component(&u, c), p));
        let stress = |q: [f64; 2]| -> [[f64; 2]; 2] {
            let g: [[f64; 2]; 2] = std::array::from_fn(|c| grad(&component(&u, c), q));
            let nu = (laws.nu)(phi(q));
            std::array::from_fn(|a| std::array::from_fn(|k| nu * (g[a][k] + g[k][a])))
        };
        let div_stress: [f64; 2] = std::array::from_fn(|a| {
            d1(|x| stress([x, p[1]])[a][0], p[0], h) + d1(|y| stress([p[0], y])[a][1], p[1], h)
        });
        let uv = u(p);
        let convection: [f64; 2] = std::array::from_fn(|c| dot(uv, grad_u[c]));
        let curl = |f: &dyn Fn([f64; 2]) -> [f64; 2], q: [f64; 2]| {
            d1(|x| f([x, q[1]])[1], q[0], h) - d1(|y| f([q[0], y])[0], q[1], h)
        };
        let bv = b(p);
        let curl_b = curl(&b, p);
        let lorentz = [m.s_c * bv[1] * curl_b, -m.s_c * bv[0] * curl_b];
        let grad_p = grad(&|q| m.pressure(q, t), p);
        let mu_p = mu(p);
        let momentum: [f64; 2] = std::array::from_fn(|c| {
            u_t[c] - div_stress[c] + convection[c] + lorentz[c] + grad_p[c] - m.lambda * mu_p * grad_phi[c]
        });

        // induction: curl of a scalar w is (d_y w, -d_x w)
        let b_t: [f64; 2] = std::array::from_fn(|c| d1(|s| m.magnetic(p, s)[c], t, h));
        let w = |q: [f64; 2]| {
            let (uq, bq) = (u(q), b(q));
            (laws.eta)(phi(q)) * curl(&b, q) - (uq[0] * bq[1] - uq[1] * bq[0])
        };
        let gw = grad(&w, p);
        let induction = [b_t[0] + gw[1], b_t[1] - gw[0]];

        (phase, momentum, induction)
    }

    /// `mu - (-eps lap(phi) + (phi^3 - phi) / eps)` with a 5-point Laplacian.
    pub fn potential_residual(m: &ManufacturedSolution, p: [f64; 2], t: f64) -> f64 {
        let h = STEP;
        let lap = d2(|x| m.phi([x, p[1]], t), p[0], h) + d2(|y| m.phi([p[0], y], t), p[1], h);
        let phi = m.phi(p, t);
        m.mu(p, t) - (-m.eps * lap + (phi * phi * phi - phi) / m.eps)
    }
}
