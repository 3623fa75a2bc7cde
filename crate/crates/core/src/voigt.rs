//! Voigt-notation operators and the isotropic constitutive law.
//!
//! Symmetric tensors are stored as vectors of length `msd = nsd(nsd+1)/2`:
//! `[s11, s22, s12]` in 2D and `[s11, s22, s33, s12, s13, s23]` in 3D, with
//! shear strains doubled. The symmetric gradient and the normal matrix share
//! the same expansion matrices `E_k`:
//!
//! ```text
//! grad_S = sum_k E_k d/dx_k        N(n) = sum_k E_k n_k
//! ```

use nalgebra::{DMatrix, DVector, Matrix2x3, Matrix3, Matrix3x2, SymmetricEigen};

use crate::error::{HdgError, Result};
use crate::Vec2;

pub mod identities;

const UNIT_NORMAL_TOL: f64 = 1e-10;

/// Number of independent components of a symmetric `nsd x nsd` tensor.
pub fn msd(nsd: usize) -> usize {
    nsd * (nsd + 1) / 2
}

/// Number of rigid rotations in `nsd` dimensions.
pub fn nrr(nsd: usize) -> usize {
    if nsd == 2 {
        1
    } else {
        3
    }
}

/// 2D reduction of the 3D constitutive law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaneAssumption {
    #[default]
    PlaneStrain,
    PlaneStress,
}

impl std::str::FromStr for PlaneAssumption {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strain" | "plane-strain" | "plane_strain" => Ok(Self::PlaneStrain),
            "stress" | "plane-stress" | "plane_stress" => Ok(Self::PlaneStress),
            other => Err(HdgError::InvalidConfig(format!("unknown plane assumption `{other}`"))),
        }
    }
}

/// Homogeneous isotropic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub plane: PlaneAssumption,
}

impl MaterialParams {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, plane: PlaneAssumption) -> Result<Self> {
        let params = Self {
            youngs_modulus,
            poisson_ratio,
            plane,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0) {
            return Err(HdgError::InvalidYoungsModulus(self.youngs_modulus));
        }
        if self.poisson_ratio >= 0.5 {
            return Err(HdgError::IncompressibleLimit(self.poisson_ratio));
        }
        if !(self.poisson_ratio >= 0.0) {
            return Err(HdgError::PoissonOutOfRange(self.poisson_ratio));
        }
        Ok(())
    }
}

/// Generalised Hooke matrix `D` (`sigma_V = D eps_V`) and its symmetric
/// positive definite square root.
#[derive(Debug, Clone, PartialEq)]
pub struct VoigtConstitutive {
    pub nsd: usize,
    pub msd: usize,
    pub d: DMatrix<f64>,
    pub dhalf: DMatrix<f64>,
}

/// Builds `D` for the given dimension and its square root `D^{1/2}`.
///
/// For `nsd == 3` the plane assumption is ignored.
pub fn build_constitutive(params: &MaterialParams, nsd: usize) -> Result<VoigtConstitutive> {
    params.validate()?;
    let e = params.youngs_modulus;
    let nu = params.poisson_ratio;
    let d = match nsd {
        2 => match params.plane {
            PlaneAssumption::PlaneStrain => {
                let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        c * (1.0 - nu),
                        c * nu,
                        0.0,
                        c * nu,
                        c * (1.0 - nu),
                        0.0,
                        0.0,
                        0.0,
                        c * (1.0 - 2.0 * nu) / 2.0,
                    ],
                )
            }
            PlaneAssumption::PlaneStress => {
                let c = e / (1.0 - nu * nu);
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        c,
                        c * nu,
                        0.0,
                        c * nu,
                        c,
                        0.0,
                        0.0,
                        0.0,
                        c * (1.0 - nu) / 2.0,
                    ],
                )
            }
        },
        3 => {
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let mut d = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    d[(i, j)] = if i == j { c * (1.0 - nu) } else { c * nu };
                }
                d[(3 + i, 3 + i)] = c * (1.0 - 2.0 * nu) / 2.0;
            }
            d
        }
        other => return Err(HdgError::UnsupportedDimension(other)),
    };
    let dhalf = symmetric_sqrt(&d);
    Ok(VoigtConstitutive {
        nsd,
        msd: msd(nsd),
        d,
        dhalf,
    })
}

/// Square root of a symmetric positive semidefinite matrix through its
/// eigendecomposition. Eigenpairs are sorted ascending so the result does not
/// depend on the eigensolver's output order; negative round-off eigenvalues
/// are clamped to zero.
pub fn symmetric_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out = DMatrix::zeros(n, n);
    for &p in &order {
        let s = eig.eigenvalues[p].max(0.0).sqrt();
        let q = eig.eigenvectors.column(p);
        out += s * q * q.transpose();
    }
    // exact symmetry
    let t = out.transpose();
    (out + t) * 0.5
}

impl VoigtConstitutive {
    /// `D` as a static 3x3 matrix (2D only).
    pub fn d2(&self) -> Matrix3<f64> {
        assert_eq!(self.nsd, 2, "d2() requires a 2D constitutive law");
        Matrix3::from_fn(|i, j| self.d[(i, j)])
    }

    /// `D^{1/2}` as a static 3x3 matrix (2D only).
    pub fn dhalf2(&self) -> Matrix3<f64> {
        assert_eq!(self.nsd, 2, "dhalf2() requires a 2D constitutive law");
        Matrix3::from_fn(|i, j| self.dhalf[(i, j)])
    }
}

/// Expansion matrices `E_1..E_nsd`, each `msd x nsd` with 0/1 entries.
pub fn expansion_matrices(nsd: usize) -> Result<Vec<DMatrix<f64>>> {
    // (voigt row, displacement column) pairs holding a one, per direction k
    let pattern: Vec<Vec<(usize, usize)>> = match nsd {
        2 => vec![vec![(0, 0), (2, 1)], vec![(2, 0), (1, 1)]],
        3 => vec![
            vec![(0, 0), (3, 1), (4, 2)],
            vec![(3, 0), (1, 1), (5, 2)],
            vec![(4, 0), (5, 1), (2, 2)],
        ],
        other => return Err(HdgError::UnsupportedDimension(other)),
    };
    Ok(pattern
        .into_iter()
        .map(|ones| {
            let mut e = DMatrix::zeros(msd(nsd), nsd);
            for (r, c) in ones {
                e[(r, c)] = 1.0;
            }
            e
        })
        .collect())
}

/// `E_1` and `E_2` in 2D as static matrices.
pub fn expansion_2d() -> [Matrix3x2<f64>; 2] {
    [
        Matrix3x2::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        Matrix3x2::new(0.0, 0.0, 0.0, 1.0, 1.0, 0.0),
    ]
}

fn check_unit(n: &[f64]) -> Result<()> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_NORMAL_TOL {
        return Err(HdgError::NonUnitNormal(norm));
    }
    Ok(())
}

/// Voigt normal matrix `N(n) = sum_k E_k n_k` (`msd x nsd`); `N^T sigma_V` is
/// the traction `n . sigma`.
pub fn normal_matrix(n: &[f64]) -> Result<DMatrix<f64>> {
    check_unit(n)?;
    let ek = expansion_matrices(n.len())?;
    Ok(ek
        .iter()
        .zip(n)
        .fold(DMatrix::zeros(msd(n.len()), n.len()), |acc, (e, nk)| acc + e * *nk))
}

/// Unchecked 2D normal matrix for inner loops.
#[inline]
pub fn normal_matrix_2d(n: &Vec2) -> Matrix3x2<f64> {
    Matrix3x2::new(n.x, 0.0, 0.0, n.y, n.y, n.x)
}

/// Tangent matrix `T(n)` (`nsd x nrr`): `(n2, -n1)`
/// in 2D, i.e. the normal rotated clockwise.
///
/// With this sign `int_dOmega v^T T = -int_Omega R v`; boundary circulations
/// therefore use `-T` (see [`ccw_tangent_2d`]).
pub fn tangent_matrix(n: &[f64]) -> Result<DMatrix<f64>> {
    check_unit(n)?;
    match n.len() {
        2 => Ok(DMatrix::from_column_slice(2, 1, &[n[1], -n[0]])),
        3 => Ok(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0],
        )),
        other => Err(HdgError::UnsupportedDimension(other)),
    }
}

/// Counter-clockwise unit tangent `t = (-n2, n1)`, so that
/// `int_Omega curl v = int_dOmega v . t`.
#[inline]
pub fn ccw_tangent_2d(n: &Vec2) -> Vec2 {
    Vec2::new(-n.y, n.x)
}

/// Applies `grad_S` to a displacement gradient, `grad[(i, k)] = du_i/dx_k`.
pub fn symmetric_gradient(grad: &DMatrix<f64>) -> Result<DVector<f64>> {
    let nsd = grad.nrows();
    let ek = expansion_matrices(nsd)?;
    let mut out = DVector::zeros(msd(nsd));
    for (k, e) in ek.iter().enumerate() {
        out += e * grad.column(k);
    }
    Ok(out)
}

/// Applies the Voigt curl `R` to a displacement gradient.
pub fn curl(grad: &DMatrix<f64>) -> Result<DVector<f64>> {
    let g = |i: usize, k: usize| grad[(i, k)];
    match grad.nrows() {
        2 => Ok(DVector::from_vec(vec![g(1, 0) - g(0, 1)])),
        3 => Ok(DVector::from_vec(vec![
            g(2, 1) - g(1, 2),
            g(0, 2) - g(2, 0),
            g(1, 0) - g(0, 1),
        ])),
        other => Err(HdgError::UnsupportedDimension(other)),
    }
}

/// 2D symmetric gradient of a displacement gradient in static form.
#[inline]
pub fn symmetric_gradient_2d(grad: &nalgebra::Matrix2<f64>) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(grad[(0, 0)], grad[(1, 1)], grad[(0, 1)] + grad[(1, 0)])
}

/// Voigt stress of a 2D symmetric tensor given as a matrix.
pub fn to_voigt_2d(s: &nalgebra::Matrix2<f64>) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(s[(0, 0)], s[(1, 1)], s[(0, 1)])
}

/// Transpose helper: `N^T` in 2D.
#[inline]
pub fn normal_matrix_2d_t(n: &Vec2) -> Matrix2x3<f64> {
    normal_matrix_2d(n).transpose()
}
