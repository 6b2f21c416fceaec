//! Lagrange bases on the reference triangle and affine element maps.
//!
//! Local node order for P2: vertices 0, 1, 2, then the midpoints of the
//! edges (0,1), (1,2) and (2,0).

use crate::mesh::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceElement {
    P1,
    P2,
}

/// Basis values and reference gradients at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

impl ReferenceElement {
    pub fn degree(self) -> usize {
        match self {
            Self::P1 => 1,
            Self::P2 => 2,
        }
    }

    pub fn node_count(self) -> usize {
        match self {
            Self::P1 => 3,
            Self::P2 => 6,
        }
    }

    pub fn nodes(self) -> &'static [[f64; 2]] {
        const P2_NODES: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
        match self {
            Self::P1 => &P2_NODES[..3],
            Self::P2 => &P2_NODES,
        }
    }

    pub fn eval(self, p: [f64; 2]) -> BasisEval {
        let n = self.node_count();
        let mut values = vec![0.0; n];
        let mut gradients = vec![[0.0; 2]; n];
        self.eval_into(p, &mut values, &mut gradients);
        BasisEval { values, gradients }
    }

    pub fn eval_into(self, p: [f64; 2], values: &mut [f64], gradients: &mut [[f64; 2]]) {
        let (x, y) = (p[0], p[1]);
        let l = [1.0 - x - y, x, y];
        // d(lambda_i)/d(xi, eta)
        const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        match self {
            Self::P1 => {
                values[..3].copy_from_slice(&l);
                gradients[..3].copy_from_slice(&DL);
            }
            Self::P2 => {
                for i in 0..3 {
                    values[i] = l[i] * (2.0 * l[i] - 1.0);
                    let s = 4.0 * l[i] - 1.0;
                    gradients[i] = [s * DL[i][0], s * DL[i][1]];
                }
                for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                    values[3 + k] = 4.0 * l[a] * l[b];
                    gradients[3 + k] =
                        [4.0 * (DL[a][0] * l[b] + l[a] * DL[b][0]), 4.0 * (DL[a][1] * l[b] + l[a] * DL[b][1])];
                }
            }
        }
    }
}

/// Affine map from the reference triangle onto a mesh triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    origin: Point,
    jacobian: [[f64; 2]; 2],
    inv_transpose: [[f64; 2]; 2],
    det: f64,
}

impl AffineMap {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        let [a, b, c] = vertices;
        let jacobian = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        if det.is_nan() || det <= 0.0 {
            return Err(Error::DegenerateElement { det });
        }
        let inv_transpose =
            [[jacobian[1][1] / det, -jacobian[1][0] / det], [-jacobian[0][1] / det, jacobian[0][0] / det]];
        Ok(Self { origin: a, jacobian, inv_transpose, det })
    }

    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        self.jacobian
    }

    pub fn inv_transpose(&self) -> [[f64; 2]; 2] {
        self.inv_transpose
    }

    /// `|det J|`, twice the triangle area.
    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn map(&self, p: [f64; 2]) -> Point {
        let j = &self.jacobian;
        [self.origin[0] + j[0][0] * p[0] + j[0][1] * p[1], self.origin[1] + j[1][0] * p[0] + j[1][1] * p[1]]
    }

    /// `grad_x N = J^{-T} grad_xi N`
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inv_transpose;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }

    pub fn physical_gradients(&self, ref_gradients: &[[f64; 2]]) -> Vec<[f64; 2]> {
        ref_gradients.iter().map(|&g| self.physical_gradient(g)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kronecker_property() {
        for el in [ReferenceElement::P1, ReferenceElement::P2] {
            for (k, node) in el.nodes().iter().enumerate() {
                let e = el.eval(*node);
                for (i, v) in e.values.iter().enumerate() {
                    let expect = if i == k { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn p2_values_at_centroid() {
        let e = ReferenceElement::P2.eval([1.0 / 3.0, 1.0 / 3.0]);
        for i in 0..3 {
            assert!((e.values[i] + 1.0 / 9.0).abs() < 1e-15);
            assert!((e.values[3 + i] - 4.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_gradients_match_finite_differences() {
        let p = [0.21, 0.37];
        let e = ReferenceElement::P2.eval(p);
        let h = 1e-6;
        for d in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[d] += h;
            pm[d] -= h;
            let (ep, em) = (ReferenceElement::P2.eval(pp), ReferenceElement::P2.eval(pm));
            for i in 0..6 {
                let fd = (ep.values[i] - em.values[i]) / (2.0 * h);
                assert!((fd - e.gradients[i][d]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_map_is_rejected() {
        assert!(AffineMap::new([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        // clockwise
        assert!(AffineMap::new([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn identity_and_scaling_maps() {
        let id = AffineMap::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(id.physical_gradient([0.3, -2.0]), [0.3, -2.0]);
        let s = 0.25;
        let sc = AffineMap::new([[0.0, 0.0], [s, 0.0], [0.0, s]]).unwrap();
        let g = sc.physical_gradient([0.3, -2.0]);
        assert!((g[0] - 0.3 / s).abs() < 1e-15 && (g[1] + 2.0 / s).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn partition_of_unity(x in 0.0f64..1.0, t in 0.0f64..1.0) {
            let p = [x, t * (1.0 - x)];
            for el in [ReferenceElement::P1, ReferenceElement::P2] {
                let e = el.eval(p);
                prop_assert!((e.values.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                let gx: f64 = e.gradients.iter().map(|g| g[0]).sum();
                let gy: f64 = e.gradients.iter().map(|g| g[1]).sum();
                prop_assert!(gx.abs() < 1e-13 && gy.abs() < 1e-13);
            }
        }

        #[test]
        fn linear_field_gradient_is_reconstructed(
            coords in proptest::collection::vec(-2.0f64..2.0, 6),
            x in 0.0f64..1.0, t in 0.0f64..1.0,
        ) {
            let pts = [[coords[0], coords[1]], [coords[2], coords[3]], [coords[4], coords[5]]];
            let area2 = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1])
                - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]);
            prop_assume!(area2 > 0.1);
            let map = AffineMap::new(pts).unwrap();
            let f = |p: Point| p[0] + 2.0 * p[1];
            let p = [x, t * (1.0 - x)];
            for el in [ReferenceElement::P1, ReferenceElement::P2] {
                let coeffs: Vec<f64> = el.nodes().iter().map(|n| f(map.map(*n))).collect();
                let e = el.eval(p);
                let grads = map.physical_gradients(&e.gradients);
                let g = grads.iter().zip(&coeffs).fold([0.0, 0.0], |acc, (g, c)| {
                    [acc[0] + c * g[0], acc[1] + c * g[1]]
                });
                prop_assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 2.0).abs() < 1e-12);
            }
        }

        #[test]
        fn p2_reproduces_quadratics(c in proptest::collection::vec(-3.0f64..3.0, 6), x in 0.0f64..1.0, t in 0.0f64..1.0) {
            let q = |p: [f64; 2]| c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[0] + c[4] * p[0] * p[1] + c[5] * p[1] * p[1];
            let p = [x, t * (1.0 - x)];
            let e = ReferenceElement::P2.eval(p);
            let interp: f64 = ReferenceElement::P2.nodes().iter().zip(&e.values).map(|(n, v)| q(*n) * v).sum();
            prop_assert!((interp - q(p)).abs() < 1e-13);
        }
    }
}
