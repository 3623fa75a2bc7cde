//! Element matrices of the HDG local problem, static condensation onto the
//! trace unknowns and the element back-solve.
//!
//! Layouts are node-major: `L` entry `3 j + c`, `u` entry `2 j + c`, and the
//! element trace vector `(f * n_fn + j) * 2 + c` where `j` runs along the
//! element's own (counter-clockwise) parametrisation of local face `f`.
//! Dirichlet faces keep their slots in the trace vector but have zero
//! coupling columns.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3};

use crate::error::{HdgError, Result};
use crate::fespace::{default_quadrature_order, ElementType, MappedElement, ReferenceElement, ReferenceFace};
use crate::mesh::BoundaryTag;
use crate::voigt::{expansion_2d, normal_matrix_2d, VoigtConstitutive};
use crate::Vec2;

/// Body force, boundary data and material of a boundary value problem.
pub trait ProblemData: Sync {
    fn body_force(&self, x: &Vec2) -> Vec2;
    /// Prescribed displacement on the Dirichlet boundary.
    fn dirichlet(&self, x: &Vec2) -> Vec2;
    /// Prescribed traction `sigma n` on the Neumann boundary.
    fn traction(&self, x: &Vec2, normal: &Vec2) -> Vec2;
}

/// Stabilisation parameter `tau`, applied as `tau I` on every face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilisationParam(f64);

impl StabilisationParam {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(HdgError::InvalidStabilisation(tau));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for StabilisationParam {
    fn default() -> Self {
        Self(3.0)
    }
}

/// Everything shared by the element computations of one discretisation.
#[derive(Debug, Clone)]
pub struct Discretisation {
    pub reference: ReferenceElement,
    pub trace: ReferenceFace,
    pub dhalf: Matrix3<f64>,
    pub tau: f64,
}

impl Discretisation {
    pub fn new(
        elem_type: ElementType,
        degree: usize,
        constitutive: &VoigtConstitutive,
        tau: StabilisationParam,
    ) -> Result<Self> {
        if constitutive.nsd != 2 {
            return Err(HdgError::UnsupportedDimension(constitutive.nsd));
        }
        let order = default_quadrature_order(degree);
        Ok(Self {
            reference: ReferenceElement::new(elem_type, degree, order)?,
            trace: ReferenceFace::new(degree, order)?,
            dhalf: constitutive.dhalf2(),
            tau: tau.value(),
        })
    }

    pub fn degree(&self) -> usize {
        self.reference.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.reference.n_nodes()
    }

    pub fn n_face_nodes(&self) -> usize {
        self.trace.n_nodes()
    }

    pub fn n_faces(&self) -> usize {
        self.reference.n_faces()
    }

    /// Size of `[L; u]`.
    pub fn n_local(&self) -> usize {
        5 * self.n_nodes()
    }

    /// Size of the element trace vector.
    pub fn n_hat(&self) -> usize {
        2 * self.n_faces() * self.n_face_nodes()
    }

    #[inline]
    pub fn hat_index(&self, face: usize, node: usize, comp: usize) -> usize {
        (face * self.n_face_nodes() + node) * 2 + comp
    }
}

/// Local problem
/// `A [L; u] = f + B u_hat`, `B^T [L; u] + a_hat u_hat = f_hat`.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    /// `[[A_LL, A_Lu], [A_Lu^T, A_uu]]`
    pub a: DMatrix<f64>,
    /// `[A_Lû; A_uû]`
    pub b: DMatrix<f64>,
    /// `A_ûû`
    pub a_hat: DMatrix<f64>,
    /// `[f_L; f_u]`
    pub f: DVector<f64>,
    /// `f_û`
    pub f_hat: DVector<f64>,
    /// Local faces carrying trace unknowns.
    pub trace_faces: Vec<usize>,
    n_l: usize,
}

impl LocalSystem {
    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn n_u(&self) -> usize {
        self.a.nrows() - self.n_l
    }

    pub fn a_ll(&self) -> DMatrix<f64> {
        self.a.view((0, 0), (self.n_l, self.n_l)).into_owned()
    }

    pub fn a_lu(&self) -> DMatrix<f64> {
        self.a.view((0, self.n_l), (self.n_l, self.n_u())).into_owned()
    }

    pub fn a_uu(&self) -> DMatrix<f64> {
        self.a.view((self.n_l, self.n_l), (self.n_u(), self.n_u())).into_owned()
    }

    pub fn a_lhat(&self) -> DMatrix<f64> {
        self.b.rows(0, self.n_l).into_owned()
    }

    pub fn a_uhat(&self) -> DMatrix<f64> {
        self.b.rows(self.n_l, self.n_u()).into_owned()
    }

    pub fn f_l(&self) -> DVector<f64> {
        self.f.rows(0, self.n_l).into_owned()
    }

    pub fn f_u(&self) -> DVector<f64> {
        self.f.rows(self.n_l, self.n_u()).into_owned()
    }
}

/// Assembles the local system of one mapped element. `tags[f]` is the
/// boundary tag of local face `f`.
pub fn assemble_local(
    disc: &Discretisation,
    geo: &MappedElement,
    tags: &[BoundaryTag],
    data: &dyn ProblemData,
) -> LocalSystem {
    let r = &disc.reference;
    let n = r.n_nodes();
    let nfn = disc.n_face_nodes();
    let n_l = 3 * n;
    let tau = disc.tau;
    let mut a = DMatrix::zeros(5 * n, 5 * n);
    let mut b = DMatrix::zeros(5 * n, disc.n_hat());
    let mut a_hat = DMatrix::zeros(disc.n_hat(), disc.n_hat());
    let mut f = DVector::zeros(5 * n);
    let mut f_hat = DVector::zeros(disc.n_hat());
    let de = expansion_2d().map(|e| disc.dhalf * e);

    for (g, &w) in geo.jxw.iter().enumerate() {
        let vals = &r.values[g];
        let grads = &geo.grads[g];
        let force = data.body_force(&geo.points[g]);
        for i in 0..n {
            for c in 0..2 {
                f[n_l + 2 * i + c] += w * vals[i] * force[c];
            }
            let dgrad = de[0] * grads[i].x + de[1] * grads[i].y;
            for j in 0..n {
                let m = w * vals[i] * vals[j];
                for p in 0..3 {
                    a[(3 * i + p, 3 * j + p)] -= m;
                }
                let blk = dgrad * (w * vals[j]);
                for p in 0..3 {
                    for c in 0..2 {
                        a[(3 * i + p, n_l + 2 * j + c)] += blk[(p, c)];
                        a[(n_l + 2 * j + c, 3 * i + p)] += blk[(p, c)];
                    }
                }
            }
        }
    }

    for (fi, face) in geo.faces.iter().enumerate() {
        let tag = tags[fi];
        for (g, &w) in face.jxw.iter().enumerate() {
            let x = face.points[g];
            let normal = face.normals[g];
            let ev = &r.face_values[fi][g];
            let tv = &disc.trace.values[g];
            let dn = disc.dhalf * normal_matrix_2d(&normal);
            for i in 0..n {
                for j in 0..n {
                    let v = tau * w * ev[i] * ev[j];
                    for c in 0..2 {
                        a[(n_l + 2 * i + c, n_l + 2 * j + c)] += v;
                    }
                }
            }
            if tag == BoundaryTag::Dirichlet {
                let ud = data.dirichlet(&x);
                let dnu = dn * ud;
                for i in 0..n {
                    for p in 0..3 {
                        f[3 * i + p] += w * ev[i] * dnu[p];
                    }
                    for c in 0..2 {
                        f[n_l + 2 * i + c] += tau * w * ev[i] * ud[c];
                    }
                }
                continue;
            }
            for j in 0..nfn {
                let hj = disc.hat_index(fi, j, 0);
                for i in 0..n {
                    let s = w * ev[i] * tv[j];
                    for c in 0..2 {
                        for p in 0..3 {
                            b[(3 * i + p, hj + c)] += s * dn[(p, c)];
                        }
                        b[(n_l + 2 * i + c, hj + c)] += tau * s;
                    }
                }
                for i in 0..nfn {
                    let hi = disc.hat_index(fi, i, 0);
                    let v = tau * w * tv[i] * tv[j];
                    for c in 0..2 {
                        a_hat[(hi + c, hj + c)] -= v;
                    }
                }
            }
            if tag == BoundaryTag::Neumann {
                let gt = data.traction(&x, &normal);
                for (i, t) in tv.iter().enumerate() {
                    let hi = disc.hat_index(fi, i, 0);
                    for c in 0..2 {
                        f_hat[hi + c] -= w * t * gt[c];
                    }
                }
            }
        }
    }

    let trace_faces = (0..tags.len()).filter(|&f| tags[f] != BoundaryTag::Dirichlet).collect();
    LocalSystem {
        a,
        b,
        a_hat,
        f,
        f_hat,
        trace_faces,
        n_l,
    }
}

/// Block factorisation of the local matrix `[[-M, G], [G^T, T]]` through
/// `M` and the Schur complement `T + G^T M^{-1} G`, both SPD.
#[derive(Debug, Clone)]
pub struct LocalFactor {
    mass: Cholesky<f64, Dyn>,
    schur: Cholesky<f64, Dyn>,
    g: DMatrix<f64>,
    n_l: usize,
}

impl LocalFactor {
    pub fn new(local: &LocalSystem, element: usize) -> Result<Self> {
        let n_l = local.n_l();
        let mass = Cholesky::new(-local.a_ll()).ok_or(HdgError::SingularLocalSystem { element })?;
        let g = local.a_lu();
        let schur = local.a_uu() + g.transpose() * mass.solve(&g);
        let schur = Cholesky::new(schur).ok_or(HdgError::SingularLocalSystem { element })?;
        Ok(Self { mass, schur, g, n_l })
    }

    /// Solves `A z = rhs` column by column.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let r_l = rhs.rows(0, self.n_l).into_owned();
        let r_u = rhs.rows(self.n_l, rhs.nrows() - self.n_l);
        let u = self.schur.solve(&(r_u + self.g.transpose() * self.mass.solve(&r_l)));
        let l = self.mass.solve(&(&self.g * &u - r_l));
        let mut out = DMatrix::zeros(rhs.nrows(), rhs.ncols());
        out.rows_mut(0, self.n_l).copy_from(&l);
        out.rows_mut(self.n_l, u.nrows()).copy_from(&u);
        out
    }
}

/// Element contribution to the trace system together with the data needed to
/// recover `L` and `u` from `u_hat`.
#[derive(Debug, Clone)]
pub struct CondensedContribution {
    pub k_hat: DMatrix<f64>,
    pub f_hat: DVector<f64>,
    z_f: DVector<f64>,
    z_b: DMatrix<f64>,
    n_l: usize,
}

/// Eliminates `L` and `u`:
/// `K = B^T A^{-1} B + A_ûû`, `f = f_û - B^T A^{-1} f`.
pub fn condense(local: &LocalSystem, element: usize) -> Result<CondensedContribution> {
    let factor = LocalFactor::new(local, element)?;
    let nh = local.b.ncols();
    let mut rhs = DMatrix::zeros(local.a.nrows(), nh + 1);
    rhs.column_mut(0).copy_from(&local.f);
    rhs.columns_mut(1, nh).copy_from(&local.b);
    let z = factor.solve(&rhs);
    let z_f = z.column(0).into_owned();
    let z_b = z.columns(1, nh).into_owned();
    let bt = local.b.transpose();
    let k = &bt * &z_b + &local.a_hat;
    let k_hat = (&k + k.transpose()) * 0.5;
    let f_hat = &local.f_hat - &bt * &z_f;
    Ok(CondensedContribution {
        k_hat,
        f_hat,
        z_f,
        z_b,
        n_l: local.n_l(),
    })
}

impl CondensedContribution {
    /// Recovers `(L, u)` from the element trace vector.
    pub fn back_solve(&self, uhat: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let z = &self.z_f + &self.z_b * uhat;
        let n_u = z.len() - self.n_l;
        (z.rows(0, self.n_l).into_owned(), z.rows(self.n_l, n_u).into_owned())
    }
}

/// Solves the local problem directly for a given element trace vector.
pub fn local_back_solve(local: &LocalSystem, uhat: &DVector<f64>, element: usize) -> Result<(DVector<f64>, DVector<f64>)> {
    let factor = LocalFactor::new(local, element)?;
    let rhs = &local.f + &local.b * uhat;
    let z = factor.solve(&DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()));
    let n_l = local.n_l();
    Ok((z.rows(0, n_l).column(0).into_owned(), z.rows(n_l, z.nrows() - n_l).column(0).into_owned()))
}
