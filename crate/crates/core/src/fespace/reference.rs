//! Nodal Lagrange reference elements on the unit triangle / unit square and
//! the reference segment `[0, 1]` used for faces.
//!
//! Nodes are equispaced. Vertices come first (in counter-clockwise order),
//! followed by the remaining lattice nodes in lexicographic order. Triangles
//! carry the complete space `P_k`, quadrilaterals the tensor space `Q_k`.

use nalgebra::DMatrix;

use super::quadrature::{segment_rule, volume_rule, AreaRule, SegmentRule};
use super::{default_quadrature_order, ElementType};
use crate::error::{HdgError, Result};
use crate::Vec2;

pub const MAX_DEGREE: usize = 4;

/// Local face of a reference element.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFace {
    /// Local vertex indices; the face parameter runs from the first to the second.
    pub vertices: [usize; 2],
    /// Local nodes lying on the face, ordered by increasing face parameter.
    pub nodes: Vec<usize>,
}

/// Lagrange reference element tabulated at its volume and face quadrature points.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub elem_type: ElementType,
    pub degree: usize,
    pub nodes: Vec<Vec2>,
    pub faces: Vec<LocalFace>,
    monomials: Vec<(u32, u32)>,
    /// `N_j = sum_m coeffs[(m, j)] * monomial_m(2 xi - 1)`
    coeffs: DMatrix<f64>,
    pub rule: AreaRule,
    /// `values[g][j] = N_j(xi_g)`
    pub values: Vec<Vec<f64>>,
    /// `ref_grads[g][j] = grad_xi N_j(xi_g)`
    pub ref_grads: Vec<Vec<Vec2>>,
    pub face_rule: SegmentRule,
    /// `face_values[f][g][j] = N_j` at face quadrature point `g` of local face `f`
    pub face_values: Vec<Vec<Vec<f64>>>,
}

/// Builds the degree-`k` Lagrange reference element with the default
/// quadrature order `2(k+1)+1`.
pub fn lagrange_reference(elem_type: ElementType, degree: usize) -> Result<ReferenceElement> {
    ReferenceElement::new(elem_type, degree, default_quadrature_order(degree))
}

fn reference_vertices(elem_type: ElementType) -> Vec<Vec2> {
    match elem_type {
        ElementType::Triangle => vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        ElementType::Quadrilateral => vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ],
    }
}

/// The monomial basis is taken in `z = 2 xi - 1`, which keeps the
/// Vandermonde matrix well conditioned at higher degree.
const CENTRED_SCALE: f64 = 2.0;

fn centred(xi: &Vec2) -> Vec2 {
    xi * CENTRED_SCALE - Vec2::new(1.0, 1.0)
}

impl ReferenceElement {
    pub fn new(elem_type: ElementType, degree: usize, quadrature_order: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(HdgError::UnsupportedDegree(degree));
        }
        let k = degree as u32;
        let kf = degree as f64;
        let verts = reference_vertices(elem_type);

        // lattice (i, j) with i the x index
        let lattice: Vec<(u32, u32)> = (0..=k)
            .flat_map(|j| (0..=k).map(move |i| (i, j)))
            .filter(|&(i, j)| elem_type == ElementType::Quadrilateral || i + j <= k)
            .collect();
        let vertex_lattice: Vec<(u32, u32)> = verts
            .iter()
            .map(|v| ((v.x * kf).round() as u32, (v.y * kf).round() as u32))
            .collect();
        let mut ordered = vertex_lattice.clone();
        ordered.extend(lattice.iter().filter(|p| !vertex_lattice.contains(p)));
        let nodes: Vec<Vec2> = ordered
            .iter()
            .map(|&(i, j)| Vec2::new(i as f64 / kf, j as f64 / kf))
            .collect();

        let monomials: Vec<(u32, u32)> = match elem_type {
            ElementType::Triangle => (0..=k).flat_map(|t| (0..=t).map(move |b| (t - b, b))).collect(),
            ElementType::Quadrilateral => (0..=k).flat_map(|b| (0..=k).map(move |a| (a, b))).collect(),
        };
        let n = nodes.len();
        debug_assert_eq!(monomials.len(), n);
        let vandermonde = DMatrix::from_fn(n, n, |i, m| {
            let (a, b) = monomials[m];
            let z = centred(&nodes[i]);
            z.x.powi(a as i32) * z.y.powi(b as i32)
        });
        let coeffs = vandermonde
            .try_inverse()
            .ok_or(HdgError::UnsupportedDegree(degree))?;

        let nv = verts.len();
        let faces = (0..nv)
            .map(|f| {
                let (a, b) = (f, (f + 1) % nv);
                let (pa, pb) = (verts[a], verts[b]);
                let dir = pb - pa;
                let len2 = dir.norm_squared();
                let mut on_face: Vec<(f64, usize)> = nodes
                    .iter()
                    .enumerate()
                    .filter_map(|(idx, p)| {
                        let r = p - pa;
                        let cross = dir.x * r.y - dir.y * r.x;
                        (cross.abs() < 1e-12).then(|| (r.dot(&dir) / len2, idx))
                    })
                    .collect();
                on_face.sort_by(|x, y| x.0.total_cmp(&y.0));
                LocalFace {
                    vertices: [a, b],
                    nodes: on_face.into_iter().map(|(_, idx)| idx).collect(),
                }
            })
            .collect();

        let mut elem = Self {
            elem_type,
            degree,
            nodes,
            faces,
            monomials,
            coeffs,
            rule: AreaRule {
                points: Vec::new(),
                weights: Vec::new(),
            },
            values: Vec::new(),
            ref_grads: Vec::new(),
            face_rule: segment_rule(quadrature_order),
            face_values: Vec::new(),
        };
        elem.rule = volume_rule(elem_type, quadrature_order)?;
        elem.values = elem.rule.points.iter().map(|p| elem.eval(p)).collect();
        elem.ref_grads = elem.rule.points.iter().map(|p| elem.eval_grads(p)).collect();
        elem.face_values = (0..elem.faces.len())
            .map(|f| {
                elem.face_rule
                    .points
                    .iter()
                    .map(|&s| elem.eval(&elem.face_point(f, s)))
                    .collect()
            })
            .collect();
        Ok(elem)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.elem_type.n_vertices()
    }

    /// Reference coordinates of the point at parameter `s` on local face `f`.
    pub fn face_point(&self, f: usize, s: f64) -> Vec2 {
        let [a, b] = self.faces[f].vertices;
        let (pa, pb) = (self.nodes[a], self.nodes[b]);
        pa + (pb - pa) * s
    }

    /// Reference tangent `d xi / d s` of local face `f`.
    pub fn face_direction(&self, f: usize) -> Vec2 {
        let [a, b] = self.faces[f].vertices;
        self.nodes[b] - self.nodes[a]
    }

    pub fn eval(&self, xi: &Vec2) -> Vec<f64> {
        let xi = &centred(xi);
        let mono: Vec<f64> = self
            .monomials
            .iter()
            .map(|&(a, b)| xi.x.powi(a as i32) * xi.y.powi(b as i32))
            .collect();
        (0..self.n_nodes())
            .map(|j| mono.iter().enumerate().map(|(m, v)| self.coeffs[(m, j)] * v).sum())
            .collect()
    }

    pub fn eval_grads(&self, xi: &Vec2) -> Vec<Vec2> {
        let xi = &centred(xi);
        let dmono: Vec<Vec2> = self
            .monomials
            .iter()
            .map(|&(a, b)| {
                let dx = if a > 0 {
                    a as f64 * xi.x.powi(a as i32 - 1) * xi.y.powi(b as i32)
                } else {
                    0.0
                };
                let dy = if b > 0 {
                    b as f64 * xi.x.powi(a as i32) * xi.y.powi(b as i32 - 1)
                } else {
                    0.0
                };
                Vec2::new(dx, dy) * CENTRED_SCALE
            })
            .collect();
        (0..self.n_nodes())
            .map(|j| {
                dmono
                    .iter()
                    .enumerate()
                    .fold(Vec2::zeros(), |acc, (m, d)| acc + d * self.coeffs[(m, j)])
            })
            .collect()
    }

    /// Basis values at arbitrary reference points, `out[p][j]`.
    pub fn tabulate(&self, points: &[Vec2]) -> Vec<Vec<f64>> {
        points.iter().map(|p| self.eval(p)).collect()
    }
}

/// Lagrange basis on the reference segment `[0, 1]` with `k + 1` equispaced
/// nodes, tabulated at a segment rule.
#[derive(Debug, Clone)]
pub struct ReferenceFace {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub rule: SegmentRule,
    /// `values[g][j] = N^_j(t_g)`
    pub values: Vec<Vec<f64>>,
}

impl ReferenceFace {
    pub fn new(degree: usize, quadrature_order: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(HdgError::UnsupportedDegree(degree));
        }
        let nodes: Vec<f64> = (0..=degree).map(|i| i as f64 / degree as f64).collect();
        let rule = segment_rule(quadrature_order);
        let mut face = Self {
            degree,
            nodes,
            rule,
            values: Vec::new(),
        };
        face.values = face.rule.points.iter().map(|&t| face.eval(t)).collect();
        Ok(face)
    }

    pub fn lagrange(degree: usize) -> Result<Self> {
        Self::new(degree, default_quadrature_order(degree))
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|j| {
                self.nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != j)
                    .map(|(_, tm)| (t - tm) / (self.nodes[j] - tm))
                    .product()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_triangle() {
        let r = lagrange_reference(ElementType::Triangle, 1).unwrap();
        assert_eq!(r.n_nodes(), 3);
        let p = Vec2::new(0.2, 0.3);
        let v = r.eval(&p);
        let expected = [0.5, 0.2, 0.3];
        for j in 0..3 {
            assert!((v[j] - expected[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_quad_centre() {
        let r = lagrange_reference(ElementType::Quadrilateral, 1).unwrap();
        assert_eq!(r.n_nodes(), 4);
        for v in r.eval(&Vec2::new(0.5, 0.5)) {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn dimensions_and_kronecker() {
        for elem in [ElementType::Triangle, ElementType::Quadrilateral] {
            for k in 1..=MAX_DEGREE {
                let r = lagrange_reference(elem, k).unwrap();
                let dim = match elem {
                    ElementType::Triangle => (k + 1) * (k + 2) / 2,
                    ElementType::Quadrilateral => (k + 1) * (k + 1),
                };
                assert_eq!(r.n_nodes(), dim);
                for (i, p) in r.nodes.iter().enumerate() {
                    for (j, v) in r.eval(p).iter().enumerate() {
                        let d = if i == j { 1.0 } else { 0.0 };
                        assert!((v - d).abs() < 1e-12, "{elem:?} k={k} N_{j}({i}) = {v}");
                    }
                }
                for f in &r.faces {
                    assert_eq!(f.nodes.len(), k + 1);
                    assert_eq!(f.nodes[0], f.vertices[0]);
                    assert_eq!(*f.nodes.last().unwrap(), f.vertices[1]);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_at_quadrature_points() {
        for elem in [ElementType::Triangle, ElementType::Quadrilateral] {
            for k in 1..=MAX_DEGREE {
                let r = lagrange_reference(elem, k).unwrap();
                for (vals, grads) in r.values.iter().zip(&r.ref_grads) {
                    assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-13);
                    assert!(grads.iter().fold(Vec2::zeros(), |a, g| a + g).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn trace_matches_face_basis() {
        for elem in [ElementType::Triangle, ElementType::Quadrilateral] {
            for k in 1..=MAX_DEGREE {
                let r = lagrange_reference(elem, k).unwrap();
                let face = ReferenceFace::lagrange(k).unwrap();
                for (f, lf) in r.faces.iter().enumerate() {
                    for s in [0.0, 0.13, 0.5, 0.77, 1.0] {
                        let ev = r.eval(&r.face_point(f, s));
                        let fv = face.eval(s);
                        for (j, &node) in lf.nodes.iter().enumerate() {
                            assert!((ev[node] - fv[j]).abs() < 1e-12);
                        }
                        let off_face: f64 = (0..r.n_nodes())
                            .filter(|n| !lf.nodes.contains(n))
                            .map(|n| ev[n].abs())
                            .sum();
                        assert!(off_face < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_degrees() {
        assert!(matches!(lagrange_reference(ElementType::Triangle, 0), Err(HdgError::UnsupportedDegree(0))));
        assert!(matches!(lagrange_reference(ElementType::Quadrilateral, 5), Err(HdgError::UnsupportedDegree(5))));
    }

    proptest! {
        #[test]
        fn quadratic_triangle_partition_of_unity(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let r = lagrange_reference(ElementType::Triangle, 2).unwrap();
            let p = if x + y <= 1.0 { Vec2::new(x, y) } else { Vec2::new(1.0 - x, 1.0 - y) };
            prop_assert!((r.eval(&p).iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn reproduces_degree_k_polynomials(k in 1usize..=4, quad in any::<bool>(),
                c in proptest::collection::vec(-1.0f64..1.0, 15), x in 0.0f64..0.5, y in 0.0f64..0.5) {
            let elem = if quad { ElementType::Quadrilateral } else { ElementType::Triangle };
            let r = lagrange_reference(elem, k).unwrap();
            let poly = crate::polynomial::Poly2::from_coefficients(k as u32, c.iter().copied());
            let nodal: Vec<f64> = r.nodes.iter().map(|p| poly.eval(p)).collect();
            let p = Vec2::new(x, y);
            let interp: f64 = r.eval(&p).iter().zip(&nodal).map(|(n, v)| n * v).sum();
            prop_assert!((interp - poly.eval(&p)).abs() < 1e-12);
            let grad = r.eval_grads(&p).iter().zip(&nodal).fold(Vec2::zeros(), |a, (g, v)| a + g * *v);
            prop_assert!((grad.x - poly.dx().eval(&p)).abs() < 1e-10);
            prop_assert!((grad.y - poly.dy().eval(&p)).abs() < 1e-10);
        }
    }
}
