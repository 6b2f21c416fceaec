//! Global degree-of-freedom numbering and essential boundary conditions.
//!
//! Scalar P2 dofs are the mesh vertices (mesh order) followed by the edge
//! midpoints (mesh order). Vector P2 fields are stored component-major: all
//! x-dofs, then all y-dofs. Element-local ordering of a vector field is the
//! six x-dofs followed by the six y-dofs.

use std::collections::BTreeSet;

use crate::basis::{AffineMap, ReferenceElement};
use crate::mesh::{Mesh, Point};
use crate::quadrature::QuadratureRule;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    ScalarP1,
    ScalarP2,
    VectorP2,
}

impl FieldKind {
    pub fn element(self) -> ReferenceElement {
        match self {
            Self::ScalarP1 => ReferenceElement::P1,
            Self::ScalarP2 | Self::VectorP2 => ReferenceElement::P2,
        }
    }

    pub fn components(self) -> usize {
        match self {
            Self::VectorP2 => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kind: FieldKind,
    /// Dofs per component (the scalar node count).
    nodes: usize,
    local_len: usize,
    local_to_global: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: FieldKind) -> Self {
        let nv = mesh.num_vertices();
        let nodes = match kind {
            FieldKind::ScalarP1 => nv,
            _ => nv + mesh.num_edges(),
        };
        let per_comp = kind.element().node_count();
        let local_len = per_comp * kind.components();
        let mut local_to_global = Vec::with_capacity(local_len * mesh.num_triangles());
        for (tri, edges) in mesh.triangles().iter().zip(mesh.triangle_edges()) {
            for c in 0..kind.components() {
                let off = c * nodes;
                local_to_global.extend(tri.iter().map(|v| off + v));
                if kind.element() == ReferenceElement::P2 {
                    local_to_global.extend(edges.iter().map(|e| off + nv + e));
                }
            }
        }
        Self { kind, nodes, local_len, local_to_global }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes * self.kind.components()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dofs per component.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn local_len(&self) -> usize {
        self.local_len
    }

    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        &self.local_to_global[t * self.local_len..(t + 1) * self.local_len]
    }

    /// Coordinates of the scalar nodes (vertices, then edge midpoints for P2).
    pub fn node_points(&self, mesh: &Mesh) -> Vec<Point> {
        let mut pts = mesh.vertices().to_vec();
        if self.kind.element() == ReferenceElement::P2 {
            pts.extend((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)));
        }
        pts
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
        assert_eq!(self.kind.components(), 1, "interpolate() needs a scalar space");
        self.node_points(mesh).into_iter().map(f).collect()
    }

    /// Nodal interpolant of a vector function.
    pub fn interpolate_vector(&self, mesh: &Mesh, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        assert_eq!(self.kind.components(), 2, "interpolate_vector() needs a vector space");
        let vals: Vec<[f64; 2]> = self.node_points(mesh).into_iter().map(f).collect();
        vals.iter().map(|v| v[0]).chain(vals.iter().map(|v| v[1])).collect()
    }
}

/// Homogeneous Dirichlet constraints on a set of global dofs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EssentialBc {
    dofs: Vec<usize>,
}

impl EssentialBc {
    pub fn from_dofs(dofs: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = dofs.into_iter().collect();
        Self { dofs: set.into_iter().collect() }
    }

    /// Sorted, unique constrained dofs.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.dofs.binary_search(&dof).is_ok()
    }

    /// Overwrite constrained entries with the prescribed value (zero).
    pub fn apply_to(&self, x: &mut [f64]) {
        for &d in &self.dofs {
            x[d] = 0.0;
        }
    }

    pub fn shifted(&self, offset: usize) -> Self {
        Self { dofs: self.dofs.iter().map(|d| d + offset).collect() }
    }
}

/// Scalar P2 boundary nodes paired with the sides they lie on.
fn boundary_nodes(mesh: &Mesh) -> Vec<(usize, BTreeSet<crate::mesh::Side>)> {
    let nv = mesh.num_vertices();
    let mut out: Vec<_> = mesh.boundary_vertex_sides().into_iter().collect();
    for (e, edge) in mesh.boundary_edges() {
        out.push((nv + e, BTreeSet::from([edge.side.expect("boundary edge has a side")])));
    }
    out
}

/// No-slip constraints: both components at every boundary node.
pub fn velocity_bc(mesh: &Mesh, map: &DofMap) -> EssentialBc {
    assert_eq!(map.kind(), FieldKind::VectorP2);
    let n = map.nodes();
    EssentialBc::from_dofs(boundary_nodes(mesh).into_iter().flat_map(|(node, _)| [node, n + node]))
}

/// `B . n = 0`: the normal component on each side; corners get both.
pub fn magnetic_bc(mesh: &Mesh, map: &DofMap) -> EssentialBc {
    assert_eq!(map.kind(), FieldKind::VectorP2);
    let n = map.nodes();
    EssentialBc::from_dofs(
        boundary_nodes(mesh)
            .into_iter()
            .flat_map(|(node, sides)| sides.into_iter().map(move |s| s.normal_component() * n + node)),
    )
}

/// Weights `w_j = int psi_j` so that `w . p = int p_h` for P1 coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanZeroConstraint {
    weights: Vec<f64>,
}

impl MeanZeroConstraint {
    pub fn new(mesh: &Mesh, p1: &DofMap) -> Result<Self> {
        assert_eq!(p1.kind(), FieldKind::ScalarP1);
        let rule = QuadratureRule::gauss(2)?;
        let el = ReferenceElement::P1;
        let mut weights = vec![0.0; p1.len()];
        for t in 0..mesh.num_triangles() {
            let map = AffineMap::new(mesh.triangle_points(t))?;
            for (p, w) in rule.points().iter().zip(rule.weights()) {
                let e = el.eval(*p);
                for (&g, v) in p1.cell_dofs(t).iter().zip(&e.values) {
                    weights[g] += w * map.det() * v;
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int p_h dx`
    pub fn mean(&self, p: &[f64]) -> f64 {
        self.weights.iter().zip(p).map(|(w, x)| w * x).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dof_counts() {
        let m = Mesh::unit_square(4).unwrap();
        assert_eq!(DofMap::new(&m, FieldKind::ScalarP2).len(), 81);
        assert_eq!(DofMap::new(&m, FieldKind::ScalarP1).len(), 25);
        assert_eq!(DofMap::new(&m, FieldKind::VectorP2).len(), 162);
    }

    #[test]
    fn local_numbering_is_consistent() {
        let m = Mesh::unit_square(3).unwrap();
        let map = DofMap::new(&m, FieldKind::ScalarP2);
        let pts = map.node_points(&m);
        for t in 0..m.num_triangles() {
            let geo = AffineMap::new(m.triangle_points(t)).unwrap();
            for (k, &g) in map.cell_dofs(t).iter().enumerate() {
                let p = geo.map(ReferenceElement::P2.nodes()[k]);
                assert!((p[0] - pts[g][0]).abs() < 1e-15 && (p[1] - pts[g][1]).abs() < 1e-15);
            }
        }
        let vmap = DofMap::new(&m, FieldKind::VectorP2);
        for t in 0..m.num_triangles() {
            let (s, v) = (map.cell_dofs(t), vmap.cell_dofs(t));
            assert_eq!(&v[..6], s);
            assert!(v[6..].iter().zip(s).all(|(a, b)| *a == b + map.len()));
        }
    }

    #[test]
    fn velocity_constraints() {
        let m = Mesh::unit_square(2).unwrap();
        let map = DofMap::new(&m, FieldKind::VectorP2);
        let bc = velocity_bc(&m, &map);
        assert_eq!(bc.len(), 32);
        let pts = map.node_points(&m);
        let center = pts.iter().position(|p| *p == [0.5, 0.5]).unwrap();
        assert!(!bc.contains(center) && !bc.contains(center + map.nodes()));
    }

    #[test]
    fn magnetic_constraints_are_normal_only() {
        let m = Mesh::unit_square(2).unwrap();
        let map = DofMap::new(&m, FieldKind::VectorP2);
        let bc = magnetic_bc(&m, &map);
        assert_eq!(bc.len(), 20);
        let pts = map.node_points(&m);
        let n = map.nodes();
        for (i, p) in pts.iter().enumerate() {
            let on_x = p[0] == 0.0 || p[0] == 1.0;
            let on_y = p[1] == 0.0 || p[1] == 1.0;
            assert_eq!(bc.contains(i), on_x, "x-component at {p:?}");
            assert_eq!(bc.contains(n + i), on_y, "y-component at {p:?}");
        }
    }

    #[test]
    fn mean_weights() {
        let m = Mesh::unit_square(16).unwrap();
        let p1 = DofMap::new(&m, FieldKind::ScalarP1);
        let c = MeanZeroConstraint::new(&m, &p1).unwrap();
        assert!((c.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((c.mean(&vec![3.5; p1.len()]) - 3.5).abs() < 1e-13);
        let p = p1.interpolate(&m, |x| (PI * x[0]).cos() * (PI * x[1]).sin());
        assert!(c.mean(&p).abs() < 1e-2 * m.h() * m.h() * 10.0);
    }
}
