//! Structured 2D meshes of rectangles and their face topology.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{HdgError, Result};
use crate::fespace::mapping::geometry_at;
pub use crate::fespace::ElementType;
use crate::Vec2;

/// Axis-aligned rectangle `[min.x, max.x] x [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rectangle {
    pub fn unit() -> Self {
        Self {
            min: Vec2::zeros(),
            max: Vec2::new(1.0, 1.0),
        }
    }

    pub fn area(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y
    }
}

/// Diagonal layout of structured triangle meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriPattern {
    /// Diagonal direction alternates cell by cell (checkerboard).
    #[default]
    Alternating,
    /// Every cell split along the same (lower-left to upper-right) diagonal.
    SingleDiagonal,
}

impl std::str::FromStr for TriPattern {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(Self::Alternating),
            "single-diagonal" | "single_diagonal" => Ok(Self::SingleDiagonal),
            other => Err(HdgError::InvalidConfig(format!("unknown triangle pattern `{other}`"))),
        }
    }
}

/// Conforming mesh with a single element type; element vertices are listed
/// counter-clockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Vec2>,
    pub elements: Vec<Vec<usize>>,
    pub elem_type: ElementType,
    /// Characteristic element size.
    pub h: f64,
}

impl Mesh {
    pub fn new(nodes: Vec<Vec2>, elements: Vec<Vec<usize>>, elem_type: ElementType, h: f64) -> Result<Self> {
        let mesh = Self {
            nodes,
            elements,
            elem_type,
            h,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let corners: &[Vec2] = match self.elem_type {
            ElementType::Triangle => &[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            ElementType::Quadrilateral => &[
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(0.0, 1.0),
            ],
        };
        for (e, conn) in self.elements.iter().enumerate() {
            assert_eq!(conn.len(), self.elem_type.n_vertices());
            if let Some(&node) = conn.iter().find(|&&n| n >= self.nodes.len()) {
                return Err(HdgError::NodeOutOfRange { element: e, node });
            }
            // the bilinear Jacobian is extremal at the corners
            let verts = self.vertices(e);
            for xi in corners {
                let det = geometry_at(self.elem_type, &verts, xi).1.determinant();
                if !(det > 0.0) {
                    return Err(HdgError::InvertedElement { element: e, det });
                }
            }
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self, e: usize) -> Vec<Vec2> {
        self.elements[e].iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let v = self.vertices(e);
        0.5 * (0..v.len())
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                a.x * b.y - a.y * b.x
            })
            .sum::<f64>()
    }

    pub fn centroid(&self, e: usize) -> Vec2 {
        let v = self.vertices(e);
        v.iter().sum::<Vec2>() / v.len() as f64
    }
}

fn grid_nodes(n: usize, domain: &Rectangle) -> Vec<Vec2> {
    let d = domain.max - domain.min;
    (0..=n)
        .flat_map(|j| {
            (0..=n).map(move |i| domain.min + Vec2::new(d.x * i as f64 / n as f64, d.y * j as f64 / n as f64))
        })
        .collect()
}

/// `n x n` grid of quadrilaterals, `h = width / n`.
pub fn structured_quad_mesh(n: usize, domain: &Rectangle) -> Result<Mesh> {
    if n == 0 {
        return Err(HdgError::InvalidRefinement);
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let elements = (0..n)
        .flat_map(|j| (0..n).map(move |i| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
        .collect();
    Mesh::new(grid_nodes(n, domain), elements, ElementType::Quadrilateral, (domain.max.x - domain.min.x) / n as f64)
}

/// `n x n` grid with every cell split into two triangles.
pub fn structured_tri_mesh(n: usize, pattern: TriPattern, domain: &Rectangle) -> Result<Mesh> {
    if n == 0 {
        return Err(HdgError::InvalidRefinement);
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let rising = match pattern {
                TriPattern::SingleDiagonal => true,
                TriPattern::Alternating => (i + j) % 2 == 0,
            };
            if rising {
                elements.push(vec![a, b, c]);
                elements.push(vec![a, c, d]);
            } else {
                elements.push(vec![a, b, d]);
                elements.push(vec![b, c, d]);
            }
        }
    }
    Mesh::new(grid_nodes(n, domain), elements, ElementType::Triangle, (domain.max.x - domain.min.x) / n as f64)
}

/// Boundary condition type of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// Assigns boundary faces to the Neumann set by their midpoint; every other
/// boundary face is Dirichlet.
#[derive(Clone)]
pub struct BoundarySpec {
    neumann: Arc<dyn Fn(&Vec2) -> bool + Send + Sync>,
}

impl fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BoundarySpec")
    }
}

impl BoundarySpec {
    pub fn all_dirichlet() -> Self {
        Self::neumann_where(|_| false)
    }

    pub fn neumann_where(pred: impl Fn(&Vec2) -> bool + Send + Sync + 'static) -> Self {
        Self { neumann: Arc::new(pred) }
    }

    pub fn classify(&self, midpoint: &Vec2) -> BoundaryTag {
        if (self.neumann)(midpoint) {
            BoundaryTag::Neumann
        } else {
            BoundaryTag::Dirichlet
        }
    }
}

/// One element's view of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSide {
    pub element: usize,
    pub local_face: usize,
    /// True when the element's local face direction opposes the face's
    /// canonical direction (ascending global vertex index).
    pub reversed: bool,
}

impl FaceSide {
    /// Maps the `j`-th face node in the element's local order to the face's
    /// canonical node index.
    pub fn permutation(&self, n_face_nodes: usize) -> Vec<usize> {
        (0..n_face_nodes)
            .map(|j| if self.reversed { n_face_nodes - 1 - j } else { j })
            .collect()
    }

    /// Canonical face parameter of the element-local parameter `s`.
    #[inline]
    pub fn canonical_parameter(&self, s: f64) -> f64 {
        if self.reversed {
            1.0 - s
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Global vertex indices in ascending order; the canonical parameter runs
    /// from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    pub left: FaceSide,
    pub right: Option<FaceSide>,
    pub tag: BoundaryTag,
}

/// Unique faces of a mesh with incidence and boundary classification.
#[derive(Debug, Clone)]
pub struct FaceTopology {
    pub faces: Vec<Face>,
    /// `element_faces[e][f]` is the global face id of local face `f`.
    pub element_faces: Vec<Vec<usize>>,
}

impl FaceTopology {
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn count(&self, tag: BoundaryTag) -> usize {
        self.faces.iter().filter(|f| f.tag == tag).count()
    }

    /// The side of face `face` seen from element `e`.
    pub fn side(&self, face: usize, e: usize) -> &FaceSide {
        let f = &self.faces[face];
        if f.left.element == e {
            &f.left
        } else {
            f.right.as_ref().filter(|s| s.element == e).expect("element is not incident to face")
        }
    }

    pub fn tag_of(&self, e: usize, local_face: usize) -> BoundaryTag {
        self.faces[self.element_faces[e][local_face]].tag
    }
}

/// Builds the unique faces of `mesh` and tags boundary faces with `spec`.
pub fn extract_faces(mesh: &Mesh, spec: &BoundarySpec) -> Result<FaceTopology> {
    let nv = mesh.elem_type.n_vertices();
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut element_faces = Vec::with_capacity(mesh.n_elements());
    for (e, conn) in mesh.elements.iter().enumerate() {
        let mut local = Vec::with_capacity(nv);
        for f in 0..nv {
            let (ga, gb) = (conn[f], conn[(f + 1) % nv]);
            let key = (ga.min(gb), ga.max(gb));
            let side = FaceSide {
                element: e,
                local_face: f,
                reversed: ga > gb,
            };
            let id = match lookup.get(&key) {
                Some(&id) => {
                    let face = &mut faces[id];
                    if face.right.is_some() {
                        return Err(HdgError::NonManifoldFace(key.0, key.1));
                    }
                    face.right = Some(side);
                    face.tag = BoundaryTag::Interior;
                    id
                }
                None => {
                    let id = faces.len();
                    faces.push(Face {
                        vertices: [key.0, key.1],
                        left: side,
                        right: None,
                        tag: BoundaryTag::Dirichlet,
                    });
                    lookup.insert(key, id);
                    id
                }
            };
            local.push(id);
        }
        element_faces.push(local);
    }
    for face in faces.iter_mut().filter(|f| f.right.is_none()) {
        let mid = (mesh.nodes[face.vertices[0]] + mesh.nodes[face.vertices[1]]) * 0.5;
        face.tag = spec.classify(&mid);
    }
    if !faces.iter().any(|f| f.tag == BoundaryTag::Dirichlet) {
        return Err(HdgError::EmptyDirichletBoundary);
    }
    Ok(FaceTopology { faces, element_faces })
}
