//! Manufactured solutions on the unit square and `L2` error norms.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2, Matrix3, Vector3};
use rayon::prelude::*;

use crate::assembly::ProblemData;
use crate::error::Result;
use crate::fespace::mapping::geometry_at;
use crate::fespace::{volume_rule, ReferenceElement};
use crate::mesh::{BoundarySpec, Mesh};
use crate::polynomial::Poly2;
use crate::voigt::{build_constitutive, expansion_2d, normal_matrix_2d, symmetric_gradient_2d, MaterialParams, PlaneAssumption};
use crate::Vec2;

/// Displacement field of the nearly incompressible case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncompressibleVariant {
    /// `u = (-p(x) q(y), p(y) q(x))` with `p(s) = s^2 (s-1)^2` and
    /// `q(s) = s (s-1) (2s-1)`; divergence free.
    #[default]
    DivergenceFree,
    /// `u = (-p(x) q(y), p(x) q(y))`; not divergence free.
    Antisymmetric,
}

impl std::str::FromStr for IncompressibleVariant {
    type Err = crate::HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divergence-free" => Ok(Self::DivergenceFree),
            "antisymmetric" => Ok(Self::Antisymmetric),
            other => Err(crate::HdgError::InvalidConfig(format!("unknown incompressible variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
enum Field {
    /// `u = (x2 sin(pi x1), x1^3 + cos(pi x2)) / 100`
    Sinusoidal,
    Polynomial {
        u: [Poly2; 2],
        grad: [[Poly2; 2]; 2],
        hess: [[[Poly2; 2]; 2]; 2],
    },
}

impl Field {
    fn polynomial(u: [Poly2; 2]) -> Self {
        let grad = [[u[0].dx(), u[0].dy()], [u[1].dx(), u[1].dy()]];
        let hess = [
            [[grad[0][0].dx(), grad[0][0].dy()], [grad[0][1].dx(), grad[0][1].dy()]],
            [[grad[1][0].dx(), grad[1][0].dy()], [grad[1][1].dx(), grad[1][1].dy()]],
        ];
        Self::Polynomial { u, grad, hess }
    }
}

/// Analytic solution with the data that produce it.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub material: MaterialParams,
    pub boundary: BoundarySpec,
    field: Field,
    d: Matrix3<f64>,
    dhalf: Matrix3<f64>,
}

/// Smooth trigonometric solution, `E = 1`, `nu = 0.25`, traction on `x2 = 0`
/// and prescribed displacement elsewhere.
pub fn case_sinusoidal_2d() -> ManufacturedCase {
    let material = MaterialParams::new(1.0, 0.25, PlaneAssumption::PlaneStrain).expect("valid material");
    ManufacturedCase::new(
        "sinusoidal2d",
        material,
        BoundarySpec::neumann_where(|m| m.y.abs() < 1e-12),
        Field::Sinusoidal,
    )
}

/// Nearly incompressible polynomial solution, `E = 3`, clamped boundary.
pub fn case_incompressible_2d(poisson_ratio: f64) -> Result<ManufacturedCase> {
    case_incompressible_2d_variant(poisson_ratio, IncompressibleVariant::default())
}

pub fn case_incompressible_2d_variant(poisson_ratio: f64, variant: IncompressibleVariant) -> Result<ManufacturedCase> {
    let material = MaterialParams::new(3.0, poisson_ratio, PlaneAssumption::PlaneStrain)?;
    let p = [0.0, 0.0, 1.0, -2.0, 1.0];
    let q = [0.0, 1.0, -3.0, 2.0];
    let u1 = Poly2::separable(&p.map(|c| -c), &q);
    let u2 = match variant {
        IncompressibleVariant::DivergenceFree => Poly2::separable(&q, &p),
        IncompressibleVariant::Antisymmetric => Poly2::separable(&p, &q),
    };
    Ok(ManufacturedCase::new(
        "incompressible2d",
        material,
        BoundarySpec::all_dirichlet(),
        Field::polynomial([u1, u2]),
    ))
}

impl ManufacturedCase {
    fn new(name: &'static str, material: MaterialParams, boundary: BoundarySpec, field: Field) -> Self {
        let c = build_constitutive(&material, 2).expect("material validated");
        Self {
            name,
            material,
            boundary,
            field,
            d: c.d2(),
            dhalf: c.dhalf2(),
        }
    }

    /// Same displacement field with a different material; body force and
    /// boundary data follow.
    pub fn with_material(mut self, material: MaterialParams) -> Result<Self> {
        let c = build_constitutive(&material, 2)?;
        self.material = material;
        self.d = c.d2();
        self.dhalf = c.dhalf2();
        Ok(self)
    }

    pub fn displacement(&self, x: &Vec2) -> Vec2 {
        match &self.field {
            Field::Sinusoidal => Vec2::new(x.y * (PI * x.x).sin(), x.x.powi(3) + (PI * x.y).cos()) / 100.0,
            Field::Polynomial { u, .. } => Vec2::new(u[0].eval(x), u[1].eval(x)),
        }
    }

    /// `grad[(i, k)] = du_i / dx_k`
    pub fn gradient(&self, x: &Vec2) -> Matrix2<f64> {
        match &self.field {
            Field::Sinusoidal => {
                let (s1, c1) = (PI * x.x).sin_cos();
                Matrix2::new(
                    x.y * PI * c1,
                    s1,
                    3.0 * x.x * x.x,
                    -PI * (PI * x.y).sin(),
                ) / 100.0
            }
            Field::Polynomial { grad, .. } => Matrix2::from_fn(|i, k| grad[i][k].eval(x)),
        }
    }

    /// `hess[i][(k, l)] = d^2 u_i / dx_k dx_l`
    pub fn hessian(&self, x: &Vec2) -> [Matrix2<f64>; 2] {
        match &self.field {
            Field::Sinusoidal => {
                let (s1, c1) = (PI * x.x).sin_cos();
                [
                    Matrix2::new(-x.y * PI * PI * s1, PI * c1, PI * c1, 0.0) / 100.0,
                    Matrix2::new(6.0 * x.x, 0.0, 0.0, -PI * PI * (PI * x.y).cos()) / 100.0,
                ]
            }
            Field::Polynomial { hess, .. } => {
                [0, 1].map(|i| Matrix2::from_fn(|k, l| hess[i][k][l].eval(x)))
            }
        }
    }

    pub fn strain(&self, x: &Vec2) -> Vector3<f64> {
        symmetric_gradient_2d(&self.gradient(x))
    }

    /// Voigt stress `D eps`.
    pub fn stress(&self, x: &Vec2) -> Vector3<f64> {
        self.d * self.strain(x)
    }

    /// Mixed variable `L = -D^{1/2} eps`.
    pub fn mixed(&self, x: &Vec2) -> Vector3<f64> {
        -(self.dhalf * self.strain(x))
    }

    pub fn divergence(&self, x: &Vec2) -> f64 {
        self.gradient(x).trace()
    }
}

impl ProblemData for ManufacturedCase {
    /// `f = -grad_S^T (D grad_S u)`
    fn body_force(&self, x: &Vec2) -> Vec2 {
        let hess = self.hessian(x);
        let ek = expansion_2d();
        let mut f = Vec2::zeros();
        for (k, e) in ek.iter().enumerate() {
            // d/dx_k of the strain
            let deps = symmetric_gradient_2d(&Matrix2::from_fn(|i, l| hess[i][(l, k)]));
            f -= e.transpose() * (self.d * deps);
        }
        f
    }

    fn dirichlet(&self, x: &Vec2) -> Vec2 {
        self.displacement(x)
    }

    fn traction(&self, x: &Vec2, normal: &Vec2) -> Vec2 {
        normal_matrix_2d(normal).transpose() * self.stress(x)
    }
}

/// `L2` norm of `field - exact` over the mesh, summed over components.
/// `nodal[e]` holds `C` components per node of `reference`, node-major.
pub fn l2_error<const C: usize>(
    mesh: &Mesh,
    reference: &ReferenceElement,
    nodal: &[DVector<f64>],
    exact: impl Fn(&Vec2) -> [f64; C] + Sync,
    quadrature_order: usize,
) -> Result<f64> {
    let rule = volume_rule(reference.elem_type, quadrature_order)?;
    let values = reference.tabulate(&rule.points);
    let per_element: Vec<f64> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let verts = mesh.vertices(e);
            let mut acc = 0.0;
            for (g, xi) in rule.points.iter().enumerate() {
                let (x, jac) = geometry_at(reference.elem_type, &verts, xi);
                let ex = exact(&x);
                for (c, exc) in ex.iter().enumerate() {
                    let uh: f64 = values[g].iter().enumerate().map(|(j, n)| n * nodal[e][C * j + c]).sum();
                    acc += rule.weights[g] * jac.determinant() * (uh - exc).powi(2);
                }
            }
            acc
        })
        .collect();
    Ok(per_element.iter().sum::<f64>().sqrt())
}
