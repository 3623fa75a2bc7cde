//! Slow reference implementations shared by the integration tests.
//!
//! Nothing here goes through the library's basis, quadrature or Jacobian
//! code: shape functions come from the product formulas of equispaced
//! Lagrange interpolation, rules from the Golub-Welsch eigenproblem and the
//! element blocks from dense shape-function matrices.

#![allow(dead_code)]

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix3x2, SymmetricEigen, Vector2, Vector3};

use hdg_voigt::assembly::{Discretisation, ProblemData};
use hdg_voigt::fespace::ElementType;
use hdg_voigt::global::TraceDofMap;
use hdg_voigt::mesh::{BoundaryTag, FaceTopology, Mesh};
use hdg_voigt::voigt::{MaterialParams, PlaneAssumption};
use hdg_voigt::Vec2;

/// Value and first derivatives with respect to the two reference coordinates.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: [f64; 2],
}

impl Dual {
    fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 2] }
    }
    fn var(v: f64, which: usize) -> Self {
        let mut d = [0.0; 2];
        d[which] = 1.0;
        Self { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, s: f64) -> Dual {
        Dual { v: self.v * s, d: [self.d[0] * s, self.d[1] * s] }
    }
}

/// `prod_{a < m} (k t - a) / (a + 1)`: equals one at `t = m / k` and vanishes
/// at `t = 0, 1/k, ..., (m - 1)/k`.
fn silvester(k: usize, m: usize, t: Dual) -> Dual {
    (0..m).fold(Dual::constant(1.0), |acc, a| {
        acc * ((t * k as f64 - Dual::constant(a as f64)) * (1.0 / (a as f64 + 1.0)))
    })
}

/// One-dimensional Lagrange polynomial of node `i` on `{0, 1/k, ..., 1}`.
fn lagrange_1d(k: usize, i: usize, t: Dual) -> Dual {
    (0..=k).filter(|&m| m != i).fold(Dual::constant(1.0), |acc, m| {
        acc * ((t - Dual::constant(m as f64 / k as f64)) * (k as f64 / (i as f64 - m as f64)))
    })
}

/// Equispaced Lagrange basis function attached to the lattice node `node`.
fn shape(elem: ElementType, k: usize, node: &Vec2, xi: &Vec2) -> Dual {
    let i = (node.x * k as f64).round() as usize;
    let j = (node.y * k as f64).round() as usize;
    let x = Dual::var(xi.x, 0);
    let y = Dual::var(xi.y, 1);
    match elem {
        ElementType::Triangle => {
            let l0 = Dual::constant(1.0) - x - y;
            silvester(k, i, x) * silvester(k, j, y) * silvester(k, k - i - j, l0)
        }
        ElementType::Quadrilateral => lagrange_1d(k, i, x) * lagrange_1d(k, j, y),
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]` from the Jacobi matrix.
pub fn golub_welsch(n: usize) -> Vec<(f64, f64)> {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let m = i.max(j) as f64;
            m / (4.0 * m * m - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (eig.eigenvalues[i] + 1.0), v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Tensor rule on the unit square or collapsed rule on the unit triangle.
fn area_rule(elem: ElementType, n: usize) -> Vec<(Vec2, f64)> {
    let g = golub_welsch(n);
    let mut out = Vec::new();
    for &(a, wa) in &g {
        for &(b, wb) in &g {
            match elem {
                ElementType::Quadrilateral => out.push((Vec2::new(a, b), wa * wb)),
                ElementType::Triangle => out.push((Vec2::new(a, b * (1.0 - a)), wa * wb * (1.0 - a))),
            }
        }
    }
    out
}

fn reference_vertices(elem: ElementType) -> Vec<Vec2> {
    match elem {
        ElementType::Triangle => vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        ElementType::Quadrilateral => vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ],
    }
}

/// Physical point and `J[(i, a)] = dx_i / dxi_a`, written out per element type.
fn map_point(elem: ElementType, v: &[Vec2], xi: &Vec2) -> (Vec2, Matrix2<f64>) {
    let (s, t) = (xi.x, xi.y);
    match elem {
        ElementType::Triangle => {
            let x = v[0] + (v[1] - v[0]) * s + (v[2] - v[0]) * t;
            let j = Matrix2::from_columns(&[v[1] - v[0], v[2] - v[0]]);
            (x, j)
        }
        ElementType::Quadrilateral => {
            let x = v[0] * ((1.0 - s) * (1.0 - t)) + v[1] * (s * (1.0 - t)) + v[2] * (s * t) + v[3] * ((1.0 - s) * t);
            let dxs = (v[1] - v[0]) * (1.0 - t) + (v[2] - v[3]) * t;
            let dxt = (v[3] - v[0]) * (1.0 - s) + (v[2] - v[1]) * s;
            (x, Matrix2::from_columns(&[dxs, dxt]))
        }
    }
}

/// Plane constitutive matrix written out from the engineering formulas.
pub fn plane_d(m: &MaterialParams) -> Matrix3<f64> {
    let (e, nu) = (m.youngs_modulus, m.poisson_ratio);
    match m.plane {
        PlaneAssumption::PlaneStrain => {
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            Matrix3::new(1.0 - nu, nu, 0.0, nu, 1.0 - nu, 0.0, 0.0, 0.0, 0.5 - nu) * c
        }
        PlaneAssumption::PlaneStress => {
            let c = e / (1.0 - nu * nu);
            Matrix3::new(1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu)) * c
        }
    }
}

pub fn sqrt_spd(a: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(*a);
    let root = Matrix3::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    eig.eigenvectors * root * eig.eigenvectors.transpose()
}

fn e1() -> Matrix3x2<f64> {
    Matrix3x2::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
}

fn e2() -> Matrix3x2<f64> {
    Matrix3x2::new(0.0, 0.0, 0.0, 1.0, 1.0, 0.0)
}

/// `n_u x 2n` matrix with `N_j` at `(c, 2 j + c)`; `ncomp` is 2 or 3.
fn interleave(values: &[f64], ncomp: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(ncomp, ncomp * values.len());
    for (j, &v) in values.iter().enumerate() {
        for c in 0..ncomp {
            m[(c, ncomp * j + c)] = v;
        }
    }
    m
}

pub struct OracleBlocks {
    pub a_ll: DMatrix<f64>,
    pub a_lu: DMatrix<f64>,
    pub a_uu: DMatrix<f64>,
    pub a_lhat: DMatrix<f64>,
    pub a_uhat: DMatrix<f64>,
    pub a_hathat: DMatrix<f64>,
    pub f_l: DVector<f64>,
    pub f_u: DVector<f64>,
    pub f_hat: DVector<f64>,
}

/// All local blocks of one element by brute-force quadrature.
/// `nodes` are the reference positions of the element nodes (library order).
#[allow(clippy::too_many_arguments)]
pub fn oracle_blocks(
    elem: ElementType,
    k: usize,
    nodes: &[Vec2],
    verts: &[Vec2],
    material: &MaterialParams,
    tau: f64,
    tags: &[BoundaryTag],
    data: &dyn ProblemData,
) -> OracleBlocks {
    let n = nodes.len();
    let nfn = k + 1;
    let nv = verts.len();
    let n_hat = 2 * nv * nfn;
    let dh = sqrt_spd(&plane_d(material));
    let de = [dh * e1(), dh * e2()];
    let npts = k + 6;

    let mut a_ll = DMatrix::zeros(3 * n, 3 * n);
    let mut a_lu = DMatrix::zeros(3 * n, 2 * n);
    let mut a_uu = DMatrix::zeros(2 * n, 2 * n);
    let mut a_lhat = DMatrix::zeros(3 * n, n_hat);
    let mut a_uhat = DMatrix::zeros(2 * n, n_hat);
    let mut a_hathat = DMatrix::zeros(n_hat, n_hat);
    let mut f_l = DVector::zeros(3 * n);
    let mut f_u = DVector::zeros(2 * n);
    let mut f_hat = DVector::zeros(n_hat);

    for (xi, w) in area_rule(elem, npts) {
        let (x, jac) = map_point(elem, verts, &xi);
        let det = jac.determinant();
        let inv_t = jac.try_inverse().unwrap().transpose();
        let duals: Vec<Dual> = nodes.iter().map(|p| shape(elem, k, p, &xi)).collect();
        let vals: Vec<f64> = duals.iter().map(|d| d.v).collect();
        let grads: Vec<Vector2<f64>> = duals.iter().map(|d| inv_t * Vector2::new(d.d[0], d.d[1])).collect();
        let wd = w * det;
        let nl = interleave(&vals, 3);
        let nu = interleave(&vals, 2);
        a_ll -= nl.transpose() * &nl * wd;
        for (kk, dek) in de.iter().enumerate() {
            let dk: Vec<f64> = grads.iter().map(|g| g[kk]).collect();
            let dnl = interleave(&dk, 3);
            let dek = DMatrix::from_column_slice(3, 2, dek.as_slice());
            a_lu += dnl.transpose() * dek * &nu * wd;
        }
        let fb = data.body_force(&x);
        f_u += nu.transpose() * DVector::from_column_slice(fb.as_slice()) * wd;
    }

    let refv = reference_vertices(elem);
    let line = golub_welsch(npts);
    for f in 0..nv {
        let (pa, pb) = (verts[f], verts[(f + 1) % nv]);
        let (ra, rb) = (refv[f], refv[(f + 1) % nv]);
        let t = pb - pa;
        let len = t.norm();
        let normal = Vec2::new(t.y, -t.x) / len;
        let nmat = e1() * normal.x + e2() * normal.y;
        let dn = DMatrix::from_column_slice(3, 2, (dh * nmat).as_slice());
        for &(s, w) in &line {
            let x = pa + t * s;
            let xi = ra + (rb - ra) * s;
            let vals: Vec<f64> = nodes.iter().map(|p| shape(elem, k, p, &xi).v).collect();
            let tv: Vec<f64> = (0..nfn).map(|j| lagrange_1d(k, j, Dual::constant(s)).v).collect();
            let nl = interleave(&vals, 3);
            let nu = interleave(&vals, 2);
            let mut nh = DMatrix::zeros(2, n_hat);
            nh.view_mut((0, 2 * nfn * f), (2, 2 * nfn)).copy_from(&interleave(&tv, 2));
            let wl = w * len;
            a_uu += nu.transpose() * &nu * (tau * wl);
            match tags[f] {
                BoundaryTag::Dirichlet => {
                    let ud = DVector::from_column_slice(data.dirichlet(&x).as_slice());
                    f_l += nl.transpose() * &dn * &ud * wl;
                    f_u += nu.transpose() * &ud * (tau * wl);
                }
                tag => {
                    a_lhat += nl.transpose() * &dn * &nh * wl;
                    a_uhat += nu.transpose() * &nh * (tau * wl);
                    a_hathat -= nh.transpose() * &nh * (tau * wl);
                    if tag == BoundaryTag::Neumann {
                        let g = DVector::from_column_slice(data.traction(&x, &normal).as_slice());
                        f_hat -= nh.transpose() * g * wl;
                    }
                }
            }
        }
    }

    OracleBlocks {
        a_ll,
        a_lu,
        a_uu,
        a_lhat,
        a_uhat,
        a_hathat,
        f_l,
        f_u,
        f_hat,
    }
}

/// Smooth polynomial data with every term active.
pub struct PolynomialData;

impl ProblemData for PolynomialData {
    fn body_force(&self, x: &Vec2) -> Vec2 {
        Vec2::new(1.0 + x.x - 2.0 * x.y + x.x * x.y, 0.5 - x.x * x.x + x.y)
    }
    fn dirichlet(&self, x: &Vec2) -> Vec2 {
        Vec2::new(x.x * x.x - x.y, 2.0 * x.x * x.y + 1.0)
    }
    fn traction(&self, x: &Vec2, n: &Vec2) -> Vec2 {
        Vec2::new(x.x * n.x + x.y * n.y, x.x * x.y * n.x - n.y)
    }
}

/// Linear displacement with its exact traction and zero body force.
pub struct LinearField {
    pub d: Matrix3<f64>,
}

impl LinearField {
    pub fn new(material: &MaterialParams) -> Self {
        Self { d: plane_d(material) }
    }

    pub fn displacement(&self, x: &Vec2) -> Vec2 {
        Vec2::new(0.1 + 0.3 * x.x - 0.2 * x.y, -0.4 + 0.5 * x.x + 0.25 * x.y)
    }

    /// Voigt strain `(e11, e22, 2 e12)`.
    pub fn strain(&self) -> Vector3<f64> {
        Vector3::new(0.3, 0.25, 0.5 - 0.2)
    }

    pub fn mixed(&self) -> Vector3<f64> {
        -(sqrt_spd(&self.d) * self.strain())
    }
}

impl ProblemData for LinearField {
    fn body_force(&self, _: &Vec2) -> Vec2 {
        Vec2::zeros()
    }
    fn dirichlet(&self, x: &Vec2) -> Vec2 {
        self.displacement(x)
    }
    fn traction(&self, _: &Vec2, n: &Vec2) -> Vec2 {
        let s = self.d * self.strain();
        Vec2::new(s[0] * n.x + s[2] * n.y, s[2] * n.x + s[1] * n.y)
    }
}

/// Solves the HDG system without static condensation: all `L`, `u` and the
/// trace unknowns in one dense LU. Returns per-element `L`, `u` and the trace.
pub fn uncondensed_solve(
    mesh: &Mesh,
    topo: &FaceTopology,
    disc: &Discretisation,
    data: &dyn ProblemData,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>, DVector<f64>) {
    use hdg_voigt::assembly::assemble_local;
    use hdg_voigt::fespace::map_element;

    let dofmap = TraceDofMap::new(topo, disc.n_face_nodes());
    let ne = mesh.n_elements();
    let nloc = disc.n_local();
    let nt = dofmap.n_dofs();
    let size = ne * nloc + nt;
    let mut a = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    for e in 0..ne {
        let geo = map_element(e, &mesh.vertices(e), &disc.reference).unwrap();
        let tags: Vec<BoundaryTag> = topo.element_faces[e].iter().map(|&f| topo.faces[f].tag).collect();
        let local = assemble_local(disc, &geo, &tags, data);
        let dofs = dofmap.element_dofs(topo, e);
        let o = e * nloc;
        a.view_mut((o, o), (nloc, nloc)).copy_from(&local.a);
        rhs.rows_mut(o, nloc).copy_from(&local.f);
        for (h, gh) in dofs.iter().enumerate() {
            let Some(gh) = *gh else { continue };
            let row = ne * nloc + gh;
            for r in 0..nloc {
                a[(o + r, row)] -= local.b[(r, h)];
                a[(row, o + r)] += local.b[(r, h)];
            }
            for (h2, gh2) in dofs.iter().enumerate() {
                if let Some(gh2) = *gh2 {
                    a[(row, ne * nloc + gh2)] += local.a_hat[(h, h2)];
                }
            }
            rhs[row] += local.f_hat[h];
        }
    }
    let x = a.lu().solve(&rhs).expect("uncondensed system is singular");
    let n_l = 3 * disc.n_nodes();
    let l = (0..ne).map(|e| x.rows(e * nloc, n_l).into_owned()).collect();
    let u = (0..ne).map(|e| x.rows(e * nloc + n_l, nloc - n_l).into_owned()).collect();
    (l, u, x.rows(ne * nloc, nt).into_owned())
}

/// Largest entry of `a - b`, relative to the largest entry of `b` (at least one).
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let scale = b.amax().max(1.0);
    (a - b).amax() / scale
}
