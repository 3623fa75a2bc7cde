//! Legacy ASCII VTK output.
//!
//! Discontinuous element fields are written on per-element copies of the
//! nodes; each element is drawn as a linear cell through its vertex copies.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::fespace::mapping::geometry_at;
use crate::fespace::{ElementType, ReferenceElement};
use crate::global::{compute_von_mises, SolutionFields};
use crate::mesh::Mesh;
use crate::voigt::MaterialParams;

fn cell_type(elem: ElementType) -> u8 {
    match elem {
        ElementType::Triangle => 5,
        ElementType::Quadrilateral => 9,
    }
}

/// Mesh geometry only.
pub fn mesh_to_vtk(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nhdg-voigt mesh\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:e} {:e} 0", p.x, p.y);
    }
    let nv = mesh.elem_type.n_vertices();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_elements(), mesh.n_elements() * (nv + 1));
    for conn in &mesh.elements {
        let ids: Vec<String> = conn.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{nv} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_elements());
    for _ in 0..mesh.n_elements() {
        let _ = writeln!(s, "{}", cell_type(mesh.elem_type));
    }
    s
}

/// Displacement, Voigt stress and Von Mises stress on per-element points.
pub fn solution_to_vtk(mesh: &Mesh, reference: &ReferenceElement, fields: &SolutionFields, material: &MaterialParams) -> String {
    let n = reference.n_nodes();
    let nv = mesh.elem_type.n_vertices();
    let ne = mesh.n_elements();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nhdg-voigt solution\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", ne * n);
    for e in 0..ne {
        let verts = mesh.vertices(e);
        for xi in &reference.nodes {
            let x = geometry_at(mesh.elem_type, &verts, xi).0;
            let _ = writeln!(s, "{:e} {:e} 0", x.x, x.y);
        }
    }
    let _ = writeln!(s, "CELLS {} {}", ne, ne * (nv + 1));
    for e in 0..ne {
        let ids: Vec<String> = (0..nv).map(|v| (e * n + v).to_string()).collect();
        let _ = writeln!(s, "{nv} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{}", cell_type(mesh.elem_type));
    }
    let _ = writeln!(s, "POINT_DATA {}", ne * n);
    let _ = writeln!(s, "VECTORS displacement double");
    for u in &fields.u {
        for j in 0..n {
            let _ = writeln!(s, "{:e} {:e} 0", u[2 * j], u[2 * j + 1]);
        }
    }
    for (c, name) in ["sigma_11", "sigma_22", "sigma_12"].iter().enumerate() {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for st in &fields.stress {
            for v in st {
                let _ = writeln!(s, "{:e}", v[c]);
            }
        }
    }
    let _ = writeln!(s, "SCALARS von_mises double 1\nLOOKUP_TABLE default");
    for st in &fields.stress {
        for v in st {
            let _ = writeln!(s, "{:e}", compute_von_mises(v, material.poisson_ratio, material.plane));
        }
    }
    s
}

pub fn write_vtk(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}
