//! Element-by-element post-processing of the displacement into the space of
//! degree `k+1`.
//!
//! On each element `u*` solves the pure Neumann problem
//! `(grad_S v, D^{1/2} grad_S u*) = -(grad_S v, L_h)`, made unique by fixing
//! its mean and one rotational moment. The saddle system is solved with
//! Lagrange multipliers.

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use crate::assembly::{Discretisation, ProblemData};
use crate::error::{HdgError, Result};
use crate::fespace::mapping::geometry_at;
use crate::fespace::{map_element, ReferenceElement, ReferenceFace};
use crate::global::SolutionFields;
use crate::mesh::{BoundaryTag, FaceTopology, Mesh};
use crate::voigt::{ccw_tangent_2d, expansion_2d};
use crate::Vec2;

/// Choice of the rotational constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationalConstraint {
    /// `int (x - x_b) x u* = int (x - x_b) x u_h` (`opt1`).
    BarycentreMoment,
    /// `int curl u* = int curl u_h` (`opt2`).
    MeanCurlOfUh,
    /// `int curl u* = int_{boundary} u_hat . t` (`opt3`).
    #[default]
    BoundaryTraceCurl,
}

impl std::str::FromStr for RotationalConstraint {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opt1" | "barycentre-moment" => Ok(Self::BarycentreMoment),
            "opt2" | "mean-curl" => Ok(Self::MeanCurlOfUh),
            "opt3" | "boundary-trace-curl" => Ok(Self::BoundaryTraceCurl),
            other => Err(HdgError::InvalidConfig(format!("unknown post-process option `{other}`"))),
        }
    }
}

impl std::fmt::Display for RotationalConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::BarycentreMoment => "opt1",
            Self::MeanCurlOfUh => "opt2",
            Self::BoundaryTraceCurl => "opt3",
        })
    }
}

/// Bordered local problem of one element.
#[derive(Debug, Clone)]
pub struct StarLocalProblem {
    /// `K*`, `2 m x 2 m` over the degree `k+1` nodes.
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
    /// Mean rows (two) and the rotation row.
    pub constraints: DMatrix<f64>,
    pub constraint_rhs: Vector3<f64>,
    pub barycentre: Vec2,
}

/// Element `u*` and the relative violation of its constraints.
#[derive(Debug, Clone)]
pub struct StarSolution {
    pub ustar: DVector<f64>,
    pub constraint_residual: f64,
}

/// Post-processed displacement on the whole mesh.
#[derive(Debug, Clone)]
pub struct PostprocessedField {
    /// Nodal `u*` on the degree `k+1` reference element, `2 j + c`.
    pub ustar: Vec<DVector<f64>>,
    /// Largest relative constraint violation over all elements.
    pub max_constraint_residual: f64,
}

/// Tabulations shared by all element post-processing problems.
#[derive(Debug, Clone)]
pub struct PostProcessor {
    pub star: ReferenceElement,
    pub constraint: RotationalConstraint,
    base: ReferenceElement,
    base_at_star: Vec<Vec<f64>>,
    base_grads_at_star: Vec<Vec<Vec2>>,
    trace_at_star_faces: Vec<Vec<f64>>,
    n_face_nodes: usize,
    dhalf: nalgebra::Matrix3<f64>,
}

impl PostProcessor {
    pub fn new(disc: &Discretisation, constraint: RotationalConstraint) -> Result<Self> {
        let k = disc.degree();
        let order = 2 * (k + 2) + 1;
        let star = ReferenceElement::new(disc.reference.elem_type, k + 1, order)?;
        let base = disc.reference.clone();
        let base_at_star = base.tabulate(&star.rule.points);
        let base_grads_at_star = star.rule.points.iter().map(|p| base.eval_grads(p)).collect();
        let trace = ReferenceFace::new(k, order)?;
        Ok(Self {
            star,
            constraint,
            base,
            base_at_star,
            base_grads_at_star,
            trace_at_star_faces: trace.values,
            n_face_nodes: trace.nodes.len(),
            dhalf: disc.dhalf,
        })
    }

    /// Builds the bordered problem on element `element` with vertices `verts`.
    /// `uhat` is the element trace vector; on Dirichlet faces (per `tags`) the
    /// datum of `data` is used instead.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble_star(
        &self,
        element: usize,
        verts: &[Vec2],
        l: &DVector<f64>,
        u: &DVector<f64>,
        uhat: Option<&DVector<f64>>,
        tags: &[BoundaryTag],
        data: &dyn ProblemData,
    ) -> Result<StarLocalProblem> {
        let star = &self.star;
        let geo = map_element(element, verts, star)?;
        let m = star.n_nodes();
        let nb = self.base.n_nodes();
        let measure = geo.measure();
        let barycentre = geo
            .points
            .iter()
            .zip(&geo.jxw)
            .fold(Vec2::zeros(), |acc, (x, w)| acc + x * *w)
            / measure;
        let ek = expansion_2d();
        let mut stiffness = DMatrix::zeros(2 * m, 2 * m);
        let mut load = DVector::zeros(2 * m);
        let mut constraints = DMatrix::zeros(3, 2 * m);
        let mut rhs = Vector3::zeros();

        for (g, &w) in geo.jxw.iter().enumerate() {
            let x = geo.points[g];
            let sv = &star.values[g];
            let sg = &geo.grads[g];
            let bv = &self.base_at_star[g];
            let mut lh = Vector3::zeros();
            let mut uh = Vec2::zeros();
            for j in 0..nb {
                lh += Vector3::new(l[3 * j], l[3 * j + 1], l[3 * j + 2]) * bv[j];
                uh += Vec2::new(u[2 * j], u[2 * j + 1]) * bv[j];
            }
            let bmats: Vec<_> = sg.iter().map(|gr| ek[0] * gr.x + ek[1] * gr.y).collect();
            for i in 0..m {
                let bt_d = bmats[i].transpose() * self.dhalf;
                let li = bmats[i].transpose() * lh;
                for a in 0..2 {
                    load[2 * i + a] -= w * li[a];
                    constraints[(a, 2 * i + a)] += w * sv[i];
                }
                for j in 0..m {
                    let kij = bt_d * bmats[j] * w;
                    for a in 0..2 {
                        for b in 0..2 {
                            stiffness[(2 * i + a, 2 * j + b)] += kij[(a, b)];
                        }
                    }
                }
            }
            rhs[0] += w * uh.x;
            rhs[1] += w * uh.y;
            match self.constraint {
                RotationalConstraint::BarycentreMoment => {
                    let r = x - barycentre;
                    for i in 0..m {
                        constraints[(2, 2 * i)] -= w * r.y * sv[i];
                        constraints[(2, 2 * i + 1)] += w * r.x * sv[i];
                    }
                    rhs[2] += w * (r.x * uh.y - r.y * uh.x);
                }
                RotationalConstraint::MeanCurlOfUh | RotationalConstraint::BoundaryTraceCurl => {
                    for i in 0..m {
                        constraints[(2, 2 * i)] -= w * sg[i].y;
                        constraints[(2, 2 * i + 1)] += w * sg[i].x;
                    }
                    if self.constraint == RotationalConstraint::MeanCurlOfUh {
                        let jac = geometry_at(star.elem_type, verts, &star.rule.points[g]).1;
                        let inv_t = jac.try_inverse().ok_or(HdgError::DegenerateElement { element })?.transpose();
                        let mut curl = 0.0;
                        for (j, rg) in self.base_grads_at_star[g].iter().enumerate() {
                            let pg = inv_t * rg;
                            curl += pg.x * u[2 * j + 1] - pg.y * u[2 * j];
                        }
                        rhs[2] += w * curl;
                    }
                }
            }
        }

        if self.constraint == RotationalConstraint::BoundaryTraceCurl {
            for (f, face) in geo.faces.iter().enumerate() {
                let dirichlet = tags[f] == BoundaryTag::Dirichlet;
                if !dirichlet && uhat.is_none() {
                    return Err(HdgError::MissingTrace { element, face: f });
                }
                for (g, &w) in face.jxw.iter().enumerate() {
                    let value = if dirichlet {
                        data.dirichlet(&face.points[g])
                    } else {
                        let uhat = uhat.expect("checked above");
                        let tv = &self.trace_at_star_faces[g];
                        (0..self.n_face_nodes).fold(Vec2::zeros(), |acc, j| {
                            let h = (f * self.n_face_nodes + j) * 2;
                            acc + Vec2::new(uhat[h], uhat[h + 1]) * tv[j]
                        })
                    };
                    rhs[2] += w * value.dot(&ccw_tangent_2d(&face.normals[g]));
                }
            }
        }

        Ok(StarLocalProblem {
            stiffness,
            load,
            constraints,
            constraint_rhs: rhs,
            barycentre,
        })
    }
}

/// Solves the bordered system `[[K, C^T], [C, 0]] [u*; mu] = [load; rhs]`.
pub fn solve_star(problem: &StarLocalProblem, element: usize) -> Result<StarSolution> {
    let n = problem.stiffness.nrows();
    let mut sys = DMatrix::zeros(n + 3, n + 3);
    sys.view_mut((0, 0), (n, n)).copy_from(&problem.stiffness);
    sys.view_mut((n, 0), (3, n)).copy_from(&problem.constraints);
    sys.view_mut((0, n), (n, 3)).copy_from(&problem.constraints.transpose());
    let mut rhs = DVector::zeros(n + 3);
    rhs.rows_mut(0, n).copy_from(&problem.load);
    rhs.rows_mut(n, 3).copy_from(&problem.constraint_rhs);
    let sol = sys.lu().solve(&rhs).ok_or(HdgError::DegenerateElement { element })?;
    let ustar = sol.rows(0, n).into_owned();
    Ok(StarSolution {
        constraint_residual: constraint_residual(problem, &ustar),
        ustar,
    })
}

/// Largest relative violation over the three constraint rows, measured
/// against the magnitude of the terms in each row.
pub fn constraint_residual(problem: &StarLocalProblem, ustar: &DVector<f64>) -> f64 {
    let c = &problem.constraints;
    (0..3)
        .map(|r| {
            let row = c.row(r);
            let lhs = row.dot(&ustar.transpose());
            let terms: f64 = row.iter().zip(ustar.iter()).map(|(a, b)| (a * b).abs()).sum();
            let scale = terms.max(problem.constraint_rhs[r].abs()).max(f64::MIN_POSITIVE);
            (lhs - problem.constraint_rhs[r]).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Post-processes every element of a solution.
pub fn postprocess(
    mesh: &Mesh,
    topo: &FaceTopology,
    processor: &PostProcessor,
    fields: &SolutionFields,
    data: &dyn ProblemData,
) -> Result<PostprocessedField> {
    let sols: Vec<StarSolution> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let tags: Vec<BoundaryTag> = topo.element_faces[e].iter().map(|&f| topo.faces[f].tag).collect();
            let problem = processor.assemble_star(
                e,
                &mesh.vertices(e),
                &fields.l[e],
                &fields.u[e],
                Some(&fields.uhat[e]),
                &tags,
                data,
            )?;
            solve_star(&problem, e)
        })
        .collect::<Result<_>>()?;
    let max_constraint_residual = sols.iter().map(|s| s.constraint_residual).fold(0.0, f64::max);
    Ok(PostprocessedField {
        ustar: sols.into_iter().map(|s| s.ustar).collect(),
        max_constraint_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::StabilisationParam;
    use crate::fespace::ElementType;
    use crate::voigt::{build_constitutive, MaterialParams, PlaneAssumption};

    struct Zero;

    impl ProblemData for Zero {
        fn body_force(&self, _: &Vec2) -> Vec2 {
            Vec2::zeros()
        }
        fn dirichlet(&self, _: &Vec2) -> Vec2 {
            Vec2::zeros()
        }
        fn traction(&self, _: &Vec2, _: &Vec2) -> Vec2 {
            Vec2::zeros()
        }
    }

    fn processor(elem: ElementType, k: usize, c: RotationalConstraint) -> PostProcessor {
        let law = build_constitutive(&MaterialParams::new(2.0, 0.3, PlaneAssumption::PlaneStrain).unwrap(), 2).unwrap();
        let disc = Discretisation::new(elem, k, &law, StabilisationParam::default()).unwrap();
        PostProcessor::new(&disc, c).unwrap()
    }

    fn verts(elem: ElementType) -> Vec<Vec2> {
        match elem {
            ElementType::Triangle => vec![Vec2::new(0.1, 0.0), Vec2::new(1.0, 0.2), Vec2::new(0.3, 0.9)],
            ElementType::Quadrilateral => {
                vec![Vec2::new(0.0, 0.0), Vec2::new(1.1, 0.1), Vec2::new(1.0, 0.8), Vec2::new(0.1, 1.0)]
            }
        }
    }

    fn nodal(r: &ReferenceElement, v: &[Vec2], f: impl Fn(&Vec2) -> Vec2) -> DVector<f64> {
        DVector::from_iterator(
            2 * r.n_nodes(),
            r.nodes.iter().flat_map(|xi| {
                let u = f(&geometry_at(r.elem_type, v, xi).0);
                [u.x, u.y]
            }),
        )
    }

    #[test]
    fn stiffness_kernel_is_rigid_motions() {
        for elem in [ElementType::Triangle, ElementType::Quadrilateral] {
            let p = processor(elem, 2, RotationalConstraint::BarycentreMoment);
            let v = verts(elem);
            let nb = p.base.n_nodes();
            let zero = DVector::zeros(3 * nb);
            let prob = p
                .assemble_star(0, &v, &zero, &DVector::zeros(2 * nb), None, &[BoundaryTag::Interior; 4], &Zero)
                .unwrap();
            let rigid = nodal(&p.star, &v, |x| Vec2::new(0.4 - 1.5 * x.y, -0.2 + 1.5 * x.x));
            assert!((&prob.stiffness * rigid).amax() < 1e-12);
            let eig = nalgebra::SymmetricEigen::new(prob.stiffness.clone()).eigenvalues;
            let tol = 1e-10 * eig.amax();
            assert_eq!(eig.iter().filter(|e| e.abs() < tol).count(), 3);
            assert!(eig.iter().all(|&e| e > -tol));
        }
    }

    #[test]
    fn rigid_motion_reproduced() {
        for c in [RotationalConstraint::BarycentreMoment, RotationalConstraint::MeanCurlOfUh, RotationalConstraint::BoundaryTraceCurl] {
            for elem in [ElementType::Triangle, ElementType::Quadrilateral] {
                let p = processor(elem, 1, c);
                let v = verts(elem);
                let rigid = |x: &Vec2| Vec2::new(0.4 - 1.5 * x.y, -0.2 + 1.5 * x.x);
                let u = nodal(&p.base, &v, rigid);
                // trace vector sampled at the face nodes
                let nf = elem.n_vertices();
                let mut uhat = DVector::zeros(2 * nf * 2);
                for f in 0..nf {
                    for (j, s) in [0.0, 1.0].iter().enumerate() {
                        let x = geometry_at(elem, &v, &p.base.face_point(f, *s)).0;
                        let r = rigid(&x);
                        uhat[(f * 2 + j) * 2] = r.x;
                        uhat[(f * 2 + j) * 2 + 1] = r.y;
                    }
                }
                let l = DVector::zeros(3 * p.base.n_nodes());
                let prob = p.assemble_star(0, &v, &l, &u, Some(&uhat), &[BoundaryTag::Interior; 4], &Zero).unwrap();
                let sol = solve_star(&prob, 0).unwrap();
                assert!((sol.ustar - nodal(&p.star, &v, rigid)).amax() < 1e-12, "{c}");
                assert!(sol.constraint_residual < 1e-12);
            }
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = processor(ElementType::Quadrilateral, 2, RotationalConstraint::MeanCurlOfUh);
        let nb = p.base.n_nodes();
        let prob = p
            .assemble_star(0, &verts(ElementType::Quadrilateral), &DVector::zeros(3 * nb), &DVector::zeros(2 * nb), None, &[BoundaryTag::Interior; 4], &Zero)
            .unwrap();
        assert_eq!(solve_star(&prob, 0).unwrap().ustar.amax(), 0.0);
    }

    #[test]
    fn missing_trace_reported() {
        let p = processor(ElementType::Triangle, 1, RotationalConstraint::BoundaryTraceCurl);
        let nb = p.base.n_nodes();
        let err = p.assemble_star(3, &verts(ElementType::Triangle), &DVector::zeros(3 * nb), &DVector::zeros(2 * nb), None, &[BoundaryTag::Dirichlet, BoundaryTag::Interior, BoundaryTag::Dirichlet], &Zero);
        assert!(matches!(err, Err(HdgError::MissingTrace { element: 3, face: 1 })));
    }

    #[test]
    fn option_names_round_trip() {
        for c in [RotationalConstraint::BarycentreMoment, RotationalConstraint::MeanCurlOfUh, RotationalConstraint::BoundaryTraceCurl] {
            assert_eq!(c.to_string().parse::<RotationalConstraint>().unwrap(), c);
        }
        assert!("opt4".parse::<RotationalConstraint>().is_err());
    }
}
