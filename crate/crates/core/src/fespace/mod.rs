//! Reference elements, nodal Lagrange bases, quadrature and isoparametric
//! element maps.

pub mod mapping;
pub mod quadrature;
pub mod reference;

pub use mapping::{map_element, MappedElement, MappedFace};
pub use quadrature::{segment_rule, volume_rule, AreaRule, SegmentRule};
pub use reference::{lagrange_reference, LocalFace, ReferenceElement, ReferenceFace};

use crate::error::HdgError;

/// Element shape; a mesh carries a single type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementType {
    Triangle,
    Quadrilateral,
}

impl ElementType {
    pub fn n_vertices(self) -> usize {
        match self {
            ElementType::Triangle => 3,
            ElementType::Quadrilateral => 4,
        }
    }

    /// Reference measure: 1/2 for the unit triangle, 1 for the unit square.
    pub fn reference_measure(self) -> f64 {
        match self {
            ElementType::Triangle => 0.5,
            ElementType::Quadrilateral => 1.0,
        }
    }
}

impl std::str::FromStr for ElementType {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tri" | "triangle" => Ok(Self::Triangle),
            "quad" | "quadrilateral" => Ok(Self::Quadrilateral),
            other => Err(HdgError::InvalidConfig(format!("unknown element type `{other}`"))),
        }
    }
}

/// Quadrature order used for the HDG element integrals at degree `k`.
pub fn default_quadrature_order(degree: usize) -> usize {
    2 * (degree + 1) + 1
}
