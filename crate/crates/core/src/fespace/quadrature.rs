//! Gauss-Legendre rules on `[0, 1]`, tensor rules on the unit square and
//! collapsed (Duffy) rules on the unit triangle.

use super::ElementType;
use crate::error::{HdgError, Result};
use crate::Vec2;

const MAX_ORDER: usize = 64;

/// Rule on `[0, 1]`; weights sum to one.
#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Rule on a 2D reference element; weights sum to the reference measure.
#[derive(Debug, Clone)]
pub struct AreaRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl AreaRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre(n: usize) -> SegmentRule {
    assert!(n > 0, "a quadrature rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    SegmentRule { points, weights }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Segment rule exact for polynomials of degree `order`.
pub fn segment_rule(order: usize) -> SegmentRule {
    gauss_legendre(order / 2 + 1)
}

/// Element rule exact for polynomials of total degree `order`.
pub fn volume_rule(elem: ElementType, order: usize) -> Result<AreaRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(HdgError::UnsupportedQuadratureOrder(order));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match elem {
        ElementType::Quadrilateral => {
            let g = segment_rule(order);
            for (y, wy) in g.points.iter().zip(&g.weights) {
                for (x, wx) in g.points.iter().zip(&g.weights) {
                    points.push(Vec2::new(*x, *y));
                    weights.push(wx * wy);
                }
            }
        }
        ElementType::Triangle => {
            // x = u, y = v (1 - u); the Jacobian (1 - u) adds one degree in u
            let gu = segment_rule(order + 1);
            let gv = segment_rule(order);
            for (u, wu) in gu.points.iter().zip(&gu.weights) {
                for (v, wv) in gv.points.iter().zip(&gv.weights) {
                    points.push(Vec2::new(*u, v * (1.0 - u)));
                    weights.push(wu * wv * (1.0 - u));
                }
            }
        }
    }
    Ok(AreaRule { points, weights })
}
