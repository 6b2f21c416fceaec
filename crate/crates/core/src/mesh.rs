//! Structured triangulations of the unit square.
//!
//! Vertices are numbered row by row (`j * (n + 1) + i` for the grid point
//! `(i / n, j / n)`). Every grid cell is split along its lower-left to
//! upper-right diagonal into two counter-clockwise triangles. Edges are
//! numbered in first-encounter order while sweeping triangles and their local
//! edges `(0,1)`, `(1,2)`, `(2,0)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::{Error, Result};

pub type Point = [f64; 2];

/// One of the four sides of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Index of the vector component normal to this side.
    pub fn normal_component(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    fn contains(self, p: Point) -> bool {
        match self {
            Side::Left => p[0] == 0.0,
            Side::Right => p[0] == 1.0,
            Side::Bottom => p[1] == 0.0,
            Side::Top => p[1] == 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, lower vertex index first.
    pub vertices: [usize; 2],
    /// Adjacent triangles (one for boundary edges, two otherwise).
    pub triangles: Vec<usize>,
    pub side: Option<Side>,
}

/// Triangulation of `[0,1]^2` with boundary classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    /// Edge indices of each triangle, ordered as local edges (0,1), (1,2), (2,0).
    triangle_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
}

impl Mesh {
    /// Uniform `n x n` grid split into `2 n^2` triangles.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("mesh resolution n must be at least 1".into()));
        }
        let nv = n + 1;
        let mut vertices = Vec::with_capacity(nv * nv);
        for j in 0..=n {
            for i in 0..=n {
                // Exact 0.0 and 1.0 on the boundary for any n.
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * nv + i;
                let v10 = v00 + 1;
                let v01 = v00 + nv;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = [a.min(b), a.max(b)];
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge { vertices: key, triangles: Vec::new(), side: None });
                    edges.len() - 1
                });
                edges[e].triangles.push(t);
                *slot = e;
            }
            triangle_edges.push(local);
        }

        for edge in edges.iter_mut().filter(|e| e.triangles.len() == 1) {
            let [a, b] = edge.vertices;
            edge.side = Side::ALL.into_iter().find(|s| s.contains(vertices[a]) && s.contains(vertices[b]));
        }

        Ok(Self { n, vertices, triangles, triangle_edges, edges })
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Mesh size `h = 1/n` (length of the axis-aligned edges).
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.side.is_some())
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area; positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    /// Sides touched by each boundary vertex; interior vertices are absent.
    pub fn boundary_vertex_sides(&self) -> BTreeMap<usize, BTreeSet<Side>> {
        let mut out = BTreeMap::new();
        for (v, p) in self.vertices.iter().enumerate() {
            let sides: BTreeSet<Side> = Side::ALL.into_iter().filter(|s| s.contains(*p)).collect();
            if !sides.is_empty() {
                out.insert(v, sides);
            }
        }
        out
    }
}
