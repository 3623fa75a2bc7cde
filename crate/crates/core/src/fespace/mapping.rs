//! Isoparametric maps from the reference element to straight-sided physical
//! elements.
//!
//! The geometry is interpolated from the element vertices with the linear
//! (triangle) or bilinear (quadrilateral) basis. Higher-order nodes of a
//! straight-sided element sit at the images of the reference nodes, so this
//! coincides with the degree-`k` isoparametric map.

use nalgebra::Matrix2;

use super::reference::ReferenceElement;
use super::ElementType;
use crate::error::{HdgError, Result};
use crate::Vec2;

/// Geometric data at the quadrature points of one face.
#[derive(Debug, Clone)]
pub struct MappedFace {
    pub points: Vec<Vec2>,
    /// `|J_f(xi_g)| w_g`
    pub jxw: Vec<f64>,
    /// Outward unit normals.
    pub normals: Vec<Vec2>,
}

/// Geometric data of one element at the reference element's quadrature points.
#[derive(Debug, Clone)]
pub struct MappedElement {
    pub points: Vec<Vec2>,
    pub det: Vec<f64>,
    /// `|J(xi_g)| w_g`
    pub jxw: Vec<f64>,
    /// Physical basis gradients `grads[g][j] = J^{-T} grad_xi N_j`.
    pub grads: Vec<Vec<Vec2>>,
    pub faces: Vec<MappedFace>,
}

impl MappedElement {
    pub fn measure(&self) -> f64 {
        self.jxw.iter().sum()
    }
}

fn geometry_shape(elem: ElementType, xi: &Vec2) -> (Vec<f64>, Vec<Vec2>) {
    match elem {
        ElementType::Triangle => (
            vec![1.0 - xi.x - xi.y, xi.x, xi.y],
            vec![Vec2::new(-1.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        ),
        ElementType::Quadrilateral => {
            let (x, y) = (xi.x, xi.y);
            (
                vec![(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y],
                vec![
                    Vec2::new(-(1.0 - y), -(1.0 - x)),
                    Vec2::new(1.0 - y, -x),
                    Vec2::new(y, x),
                    Vec2::new(-y, 1.0 - x),
                ],
            )
        }
    }
}

/// Physical point and Jacobian `J[(i, a)] = dx_i / dxi_a` at a reference point.
pub fn geometry_at(elem: ElementType, vertices: &[Vec2], xi: &Vec2) -> (Vec2, Matrix2<f64>) {
    let (n, dn) = geometry_shape(elem, xi);
    let mut x = Vec2::zeros();
    let mut jac = Matrix2::zeros();
    for ((v, ni), di) in vertices.iter().zip(&n).zip(&dn) {
        x += v * *ni;
        jac += v * di.transpose();
    }
    (x, jac)
}

/// Maps `reference` onto the element with the given counter-clockwise vertices.
pub fn map_element(element: usize, vertices: &[Vec2], reference: &ReferenceElement) -> Result<MappedElement> {
    let elem = reference.elem_type;
    assert_eq!(vertices.len(), elem.n_vertices(), "vertex count does not match element type");
    let nq = reference.rule.len();
    let mut points = Vec::with_capacity(nq);
    let mut det = Vec::with_capacity(nq);
    let mut jxw = Vec::with_capacity(nq);
    let mut grads = Vec::with_capacity(nq);
    for (g, xi) in reference.rule.points.iter().enumerate() {
        let (x, jac) = geometry_at(elem, vertices, xi);
        let d = jac.determinant();
        if !(d > 0.0) {
            return Err(HdgError::InvertedElement { element, det: d });
        }
        let inv_t = jac
            .try_inverse()
            .ok_or(HdgError::InvertedElement { element, det: d })?
            .transpose();
        points.push(x);
        det.push(d);
        jxw.push(d * reference.rule.weights[g]);
        grads.push(reference.ref_grads[g].iter().map(|rg| inv_t * rg).collect());
    }

    let faces = (0..reference.n_faces())
        .map(|f| {
            let dir = reference.face_direction(f);
            let mut face = MappedFace {
                points: Vec::new(),
                jxw: Vec::new(),
                normals: Vec::new(),
            };
            for (s, w) in reference.face_rule.points.iter().zip(&reference.face_rule.weights) {
                let xi = reference.face_point(f, *s);
                let (x, jac) = geometry_at(elem, vertices, &xi);
                let tangent = jac * dir;
                let len = tangent.norm();
                face.points.push(x);
                face.jxw.push(len * w);
                face.normals.push(Vec2::new(tangent.y, -tangent.x) / len);
            }
            face
        })
        .collect();

    Ok(MappedElement {
        points,
        det,
        jxw,
        grads,
        faces,
    })
}
