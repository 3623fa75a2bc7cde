//! Trace numbering, assembly and solution of the global trace system, and
//! recovery of the element fields.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DVector, Matrix3, Vector3};
use rayon::prelude::*;

use crate::assembly::{assemble_local, condense, CondensedContribution, Discretisation, ProblemData};
use crate::error::{HdgError, Result};
use crate::fespace::map_element;
use crate::fespace::mapping::geometry_at;
use crate::mesh::{BoundaryTag, FaceTopology, Mesh};
use crate::voigt::PlaneAssumption;

/// Numbering of the trace unknowns. Only non-Dirichlet faces carry unknowns;
/// they are stored face-major, node-minor, component-innermost.
#[derive(Debug, Clone)]
pub struct TraceDofMap {
    face_offset: Vec<Option<usize>>,
    n_face_nodes: usize,
    n_dofs: usize,
}

impl TraceDofMap {
    pub fn new(topo: &FaceTopology, n_face_nodes: usize) -> Self {
        let mut next = 0;
        let face_offset = topo
            .faces
            .iter()
            .map(|f| {
                (f.tag != BoundaryTag::Dirichlet).then(|| {
                    let off = next;
                    next += 2 * n_face_nodes;
                    off
                })
            })
            .collect();
        Self {
            face_offset,
            n_face_nodes,
            n_dofs: next,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn face_offset(&self, face: usize) -> Option<usize> {
        self.face_offset[face]
    }

    /// Global index of component `comp` at canonical node `node` of `face`.
    pub fn dof(&self, face: usize, node: usize, comp: usize) -> Option<usize> {
        self.face_offset[face].map(|off| off + 2 * node + comp)
    }

    /// Global indices of an element's trace vector, `None` on Dirichlet faces.
    pub fn element_dofs(&self, topo: &FaceTopology, e: usize) -> Vec<Option<usize>> {
        let nfn = self.n_face_nodes;
        let mut out = Vec::with_capacity(topo.element_faces[e].len() * nfn * 2);
        for &face in &topo.element_faces[e] {
            let perm = topo.side(face, e).permutation(nfn);
            for &node in &perm {
                for c in 0..2 {
                    out.push(self.dof(face, node, c));
                }
            }
        }
        out
    }
}

/// Sparse symmetric trace system `K u_hat = f`, stored as coordinate entries
/// sorted by `(row, col)` with duplicates merged.
#[derive(Debug, Clone)]
pub struct GlobalTraceSystem {
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: DVector<f64>,
}

impl GlobalTraceSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim());
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim(), self.dim());
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `max |K - K^T| / max |K|`
    pub fn asymmetry(&self) -> f64 {
        let m = self.to_dense();
        let scale = m.amax();
        if scale == 0.0 {
            0.0
        } else {
            (&m - m.transpose()).amax() / scale
        }
    }
}

/// Scatters the element contributions. Entries are merged in element order
/// after a stable sort, so the result does not depend on how the
/// contributions were computed.
pub fn assemble_global(
    contribs: &[CondensedContribution],
    dofmap: &TraceDofMap,
    topo: &FaceTopology,
) -> Result<GlobalTraceSystem> {
    let n = dofmap.n_dofs();
    let mut raw = Vec::new();
    let mut rhs = DVector::zeros(n);
    for (e, c) in contribs.iter().enumerate() {
        let dofs = dofmap.element_dofs(topo, e);
        for (i, gi) in dofs.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            if gi >= n {
                return Err(HdgError::DofOutOfRange { index: gi, size: n });
            }
            rhs[gi] += c.f_hat[i];
            for (j, gj) in dofs.iter().enumerate() {
                if let Some(gj) = *gj {
                    raw.push((gi, gj, c.k_hat[(i, j)]));
                }
            }
        }
    }
    raw.sort_by_key(|&(r, c, _)| (r, c));
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len() / 2);
    for (r, c, v) in raw {
        match entries.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => entries.push((r, c, v)),
        }
    }
    Ok(GlobalTraceSystem { entries, rhs })
}

/// Solves the trace system with a sparse Cholesky factorisation of `-K`
/// (the condensed matrix is negative definite).
pub fn solve_trace(system: &GlobalTraceSystem) -> Result<DVector<f64>> {
    let n = system.dim();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let triplets: Vec<Triplet<usize, usize, f64>> =
        system.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, -v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| HdgError::SingularGlobalSystem(format!("{e:?}")))?;
    let llt = mat.sp_cholesky(Side::Lower).map_err(|e| {
        HdgError::SingularGlobalSystem(format!(
            "Cholesky of -K failed ({e:?}); check that tau > 0 and the Dirichlet boundary is not empty"
        ))
    })?;
    let b = Mat::from_fn(n, 1, |i, _| -system.rhs[i]);
    let x = llt.solve(&b);
    Ok(DVector::from_fn(n, |i, _| x[(i, 0)]))
}

/// Discrete solution on every element.
#[derive(Debug, Clone)]
pub struct SolutionFields {
    /// Nodal mixed variable, `3 j + c`.
    pub l: Vec<DVector<f64>>,
    /// Nodal displacement, `2 j + c`.
    pub u: Vec<DVector<f64>>,
    /// Element trace vectors; Dirichlet faces hold the interpolated datum.
    pub uhat: Vec<DVector<f64>>,
    /// Global trace unknowns.
    pub trace: DVector<f64>,
    /// Nodal Voigt stress `-D^{1/2} L`.
    pub stress: Vec<Vec<Vector3<f64>>>,
    /// `|K u_hat - f| / |f|` of the trace solve.
    pub trace_residual: f64,
}

impl SolutionFields {
    pub fn n_trace_dofs(&self) -> usize {
        self.trace.len()
    }
}

fn element_tags(topo: &FaceTopology, e: usize) -> Vec<BoundaryTag> {
    topo.element_faces[e].iter().map(|&f| topo.faces[f].tag).collect()
}

/// Assembles and condenses every element (in parallel, results in element order).
pub fn condense_all(
    mesh: &Mesh,
    topo: &FaceTopology,
    disc: &Discretisation,
    data: &dyn ProblemData,
) -> Result<Vec<CondensedContribution>> {
    (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let geo = map_element(e, &mesh.vertices(e), &disc.reference)?;
            let local = assemble_local(disc, &geo, &element_tags(topo, e), data);
            condense(&local, e)
        })
        .collect()
}

/// Recovers `L`, `u` and the stress from the trace solution.
pub fn recover_fields(
    mesh: &Mesh,
    topo: &FaceTopology,
    disc: &Discretisation,
    dofmap: &TraceDofMap,
    contribs: &[CondensedContribution],
    trace: &DVector<f64>,
    data: &dyn ProblemData,
) -> Result<SolutionFields> {
    let r = &disc.reference;
    let per_element: Vec<(DVector<f64>, DVector<f64>, DVector<f64>)> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let dofs = dofmap.element_dofs(topo, e);
            let verts = mesh.vertices(e);
            let mut uhat = DVector::zeros(dofs.len());
            for (i, d) in dofs.iter().enumerate() {
                if let Some(g) = *d {
                    uhat[i] = trace[g];
                }
            }
            let (l, u) = contribs[e].back_solve(&uhat);
            for (f, &face) in topo.element_faces[e].iter().enumerate() {
                if topo.faces[face].tag != BoundaryTag::Dirichlet {
                    continue;
                }
                for (j, &s) in disc.trace.nodes.iter().enumerate() {
                    let x = geometry_at(r.elem_type, &verts, &r.face_point(f, s)).0;
                    let ud = data.dirichlet(&x);
                    for c in 0..2 {
                        uhat[disc.hat_index(f, j, c)] = ud[c];
                    }
                }
            }
            (l, u, uhat)
        })
        .collect();
    let mut fields = SolutionFields {
        l: Vec::with_capacity(per_element.len()),
        u: Vec::with_capacity(per_element.len()),
        uhat: Vec::with_capacity(per_element.len()),
        trace: trace.clone(),
        stress: Vec::with_capacity(per_element.len()),
        trace_residual: 0.0,
    };
    for (l, u, uhat) in per_element {
        fields.stress.push(nodal_stress(&l, &disc.dhalf));
        fields.l.push(l);
        fields.u.push(u);
        fields.uhat.push(uhat);
    }
    Ok(fields)
}

/// Nodal Voigt stress `sigma = -D^{1/2} L`.
pub fn nodal_stress(l: &DVector<f64>, dhalf: &Matrix3<f64>) -> Vec<Vector3<f64>> {
    l.as_slice()
        .chunks_exact(3)
        .map(|c| -(dhalf * Vector3::new(c[0], c[1], c[2])))
        .collect()
}

/// Von Mises stress of a 2D Voigt stress; the out-of-plane normal stress is
/// `nu (s11 + s22)` in plane strain and zero in plane stress.
pub fn compute_von_mises(stress: &Vector3<f64>, poisson_ratio: f64, plane: PlaneAssumption) -> f64 {
    let (s11, s22, s12) = (stress[0], stress[1], stress[2]);
    let s33 = match plane {
        PlaneAssumption::PlaneStrain => poisson_ratio * (s11 + s22),
        PlaneAssumption::PlaneStress => 0.0,
    };
    let dev = 0.5 * ((s11 - s22).powi(2) + (s22 - s33).powi(2) + (s33 - s11).powi(2)) + 3.0 * s12 * s12;
    dev.max(0.0).sqrt()
}

/// Full HDG solve: condense, assemble, solve for the trace, recover.
pub fn solve(
    mesh: &Mesh,
    topo: &FaceTopology,
    disc: &Discretisation,
    data: &dyn ProblemData,
) -> Result<SolutionFields> {
    let dofmap = TraceDofMap::new(topo, disc.n_face_nodes());
    let contribs = condense_all(mesh, topo, disc, data)?;
    let system = assemble_global(&contribs, &dofmap, topo)?;
    let trace = solve_trace(&system)?;
    let res = (system.matvec(&trace) - &system.rhs).norm();
    let scale = system.rhs.norm();
    let mut fields = recover_fields(mesh, topo, disc, &dofmap, &contribs, &trace, data)?;
    fields.trace_residual = if scale > 0.0 { res / scale } else { res };
    Ok(fields)
}
