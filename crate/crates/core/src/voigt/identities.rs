//! Quadrature checks of the Voigt forms of Gauss's and Stokes' theorems on
//! axis-aligned rectangles.

use crate::fespace::quadrature::segment_rule;
use crate::mesh::Rectangle;
use crate::polynomial::Poly2;
use crate::voigt::{ccw_tangent_2d, normal_matrix_2d};
use crate::Vec2;

trait RectangleQuadrature {
    fn edges(&self) -> [(Vec2, Vec2, Vec2); 4];
    fn integrate(&self, order: usize, f: impl Fn(&Vec2) -> f64) -> f64;
    fn integrate_boundary(&self, order: usize, f: impl Fn(&Vec2, &Vec2) -> f64) -> f64;
}

impl RectangleQuadrature for Rectangle {
    /// Edges as (start, end, outward normal), counter-clockwise.
    fn edges(&self) -> [(Vec2, Vec2, Vec2); 4] {
        let (a, c) = (self.min, self.max);
        let b = Vec2::new(c.x, a.y);
        let d = Vec2::new(a.x, c.y);
        [
            (a, b, Vec2::new(0.0, -1.0)),
            (b, c, Vec2::new(1.0, 0.0)),
            (c, d, Vec2::new(0.0, 1.0)),
            (d, a, Vec2::new(-1.0, 0.0)),
        ]
    }

    fn integrate(&self, order: usize, f: impl Fn(&Vec2) -> f64) -> f64 {
        let rule = segment_rule(order);
        let size = self.max - self.min;
        let mut acc = 0.0;
        for (xi, wi) in rule.points.iter().zip(&rule.weights) {
            for (eta, wj) in rule.points.iter().zip(&rule.weights) {
                let p = self.min + Vec2::new(xi * size.x, eta * size.y);
                acc += wi * wj * f(&p);
            }
        }
        acc * size.x * size.y
    }

    fn integrate_boundary(&self, order: usize, f: impl Fn(&Vec2, &Vec2) -> f64) -> f64 {
        let rule = segment_rule(order);
        self.edges()
            .iter()
            .map(|(a, b, n)| {
                let len = (b - a).norm();
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(s, w)| w * f(&(a + (b - a) * *s), n))
                    .sum::<f64>()
                    * len
            })
            .sum()
    }
}

/// Both sides of an integral identity.
#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub boundary: f64,
    pub volume: f64,
    /// Largest magnitude among the individual integrals.
    pub scale: f64,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        (self.boundary - self.volume).abs()
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// `int_dOmega (N^T s_V) . v  =  int_Omega s_V . grad_S v + int_Omega (grad_S^T s_V) . v`
pub fn check_gauss_identity(stress: &[Poly2; 3], v: &[Poly2; 2], domain: &Rectangle) -> IdentityCheck {
    let order = (stress.iter().map(Poly2::degree).max().unwrap_or(0)
        + v.iter().map(Poly2::degree).max().unwrap_or(0)) as usize
        + 1;
    let dv = [[v[0].dx(), v[0].dy()], [v[1].dx(), v[1].dy()]];
    let ds = [
        [stress[0].dx(), stress[0].dy()],
        [stress[1].dx(), stress[1].dy()],
        [stress[2].dx(), stress[2].dy()],
    ];
    let sv = |p: &Vec2| nalgebra::Vector3::new(stress[0].eval(p), stress[1].eval(p), stress[2].eval(p));
    let vv = |p: &Vec2| Vec2::new(v[0].eval(p), v[1].eval(p));

    let boundary = domain.integrate_boundary(order, |p, n| {
        (normal_matrix_2d(n).transpose() * sv(p)).dot(&vv(p))
    });
    let strain_work = domain.integrate(order, |p| {
        let eps = nalgebra::Vector3::new(
            dv[0][0].eval(p),
            dv[1][1].eval(p),
            dv[0][1].eval(p) + dv[1][0].eval(p),
        );
        sv(p).dot(&eps)
    });
    let divergence_work = domain.integrate(order, |p| {
        // grad_S^T s_V = (s11,1 + s12,2 ; s12,1 + s22,2)
        let div = Vec2::new(
            ds[0][0].eval(p) + ds[2][1].eval(p),
            ds[2][0].eval(p) + ds[1][1].eval(p),
        );
        div.dot(&vv(p))
    });
    IdentityCheck {
        boundary,
        volume: strain_work + divergence_work,
        scale: boundary.abs().max(strain_work.abs()).max(divergence_work.abs()),
    }
}

/// `int_Omega R v  =  int_dOmega v . t` with `t` the counter-clockwise tangent.
pub fn check_stokes_identity(v: &[Poly2; 2], domain: &Rectangle) -> IdentityCheck {
    let order = v.iter().map(Poly2::degree).max().unwrap_or(0) as usize + 1;
    let (v1y, v2x) = (v[0].dy(), v[1].dx());
    let volume = domain.integrate(order, |p| v2x.eval(p) - v1y.eval(p));
    let boundary = domain.integrate_boundary(order, |p, n| {
        Vec2::new(v[0].eval(p), v[1].eval(p)).dot(&ccw_tangent_2d(n))
    });
    IdentityCheck {
        boundary,
        volume,
        scale: boundary.abs().max(volume.abs()),
    }
}
