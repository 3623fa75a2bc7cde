mod common;

use nalgebra::DVector;
use proptest::prelude::*;

use hdg_voigt::assembly::{assemble_local, condense, Discretisation, StabilisationParam};
use hdg_voigt::fespace::{map_element, ElementType};
use hdg_voigt::global::{assemble_global, condense_all, TraceDofMap};
use hdg_voigt::mesh::{extract_faces, structured_tri_mesh, BoundarySpec, BoundaryTag, Rectangle, TriPattern};
use hdg_voigt::voigt::{build_constitutive, MaterialParams, PlaneAssumption};
use hdg_voigt::Vec2;

use common::{oracle_blocks, rel_diff, PolynomialData};

fn tag(i: u8) -> BoundaryTag {
    [BoundaryTag::Interior, BoundaryTag::Dirichlet, BoundaryTag::Neumann][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn triangle_blocks_match_oracle(
        v in prop::array::uniform6(-1.0f64..1.0),
        k in 1usize..=3,
        nu in 0.0f64..0.49,
        tau in 0.1f64..50.0,
        tags in prop::array::uniform3(0u8..3),
    ) {
        let mut verts = vec![Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]), Vec2::new(v[4], v[5])];
        let e1 = verts[1] - verts[0];
        let e2 = verts[2] - verts[0];
        let area2 = e1.x * e2.y - e1.y * e2.x;
        prop_assume!(area2.abs() > 0.05);
        if area2 < 0.0 {
            verts.swap(1, 2);
        }
        let material = MaterialParams::new(1.0, nu, PlaneAssumption::PlaneStrain).unwrap();
        let law = build_constitutive(&material, 2).unwrap();
        let disc = Discretisation::new(ElementType::Triangle, k, &law, StabilisationParam::new(tau).unwrap()).unwrap();
        let tags: Vec<BoundaryTag> = tags.iter().map(|&t| tag(t)).collect();
        let geo = map_element(0, &verts, &disc.reference).unwrap();
        let lib = assemble_local(&disc, &geo, &tags, &PolynomialData);
        let ora = oracle_blocks(ElementType::Triangle, k, &disc.reference.nodes, &verts, &material, tau, &tags, &PolynomialData);
        prop_assert!(rel_diff(&lib.a_lu(), &ora.a_lu) < 1e-12);
        prop_assert!(rel_diff(&lib.a_lhat(), &ora.a_lhat) < 1e-12);
        prop_assert!(rel_diff(&lib.a_uu(), &ora.a_uu) < 1e-12);
    }

    #[test]
    fn condensed_matrix_is_symmetric_negative_semidefinite(
        jitter in prop::array::uniform8(-0.2f64..0.2),
        k in 1usize..=3,
        tau in 0.1f64..100.0,
        tags in prop::array::uniform4(0u8..3),
    ) {
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let verts: Vec<Vec2> = square
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Vec2::new(x + jitter[2 * i], y + jitter[2 * i + 1]))
            .collect();
        let law = build_constitutive(&MaterialParams::new(1.0, 0.3, PlaneAssumption::PlaneStress).unwrap(), 2).unwrap();
        let disc = Discretisation::new(ElementType::Quadrilateral, k, &law, StabilisationParam::new(tau).unwrap()).unwrap();
        let tags: Vec<BoundaryTag> = tags.iter().map(|&t| tag(t)).collect();
        let geo = map_element(0, &verts, &disc.reference).unwrap();
        let local = assemble_local(&disc, &geo, &tags, &PolynomialData);
        let c = condense(&local, 0).unwrap();
        let asym = (&c.k_hat - c.k_hat.transpose()).amax();
        prop_assert!(asym <= 1e-12 * c.k_hat.amax().max(1.0));
        let eig = c.k_hat.clone().symmetric_eigen();
        prop_assert!(eig.eigenvalues.max() <= 1e-10 * c.k_hat.amax().max(1.0));
    }

    #[test]
    fn global_trace_operator_is_negative_definite(
        n in 1usize..=3,
        k in 1usize..=2,
        x in prop::collection::vec(-1.0f64..1.0, 0..200),
    ) {
        let mesh = structured_tri_mesh(n, TriPattern::SingleDiagonal, &Rectangle::unit()).unwrap();
        let topo = extract_faces(&mesh, &BoundarySpec::neumann_where(|p| p.x > 1.0 - 1e-12)).unwrap();
        let law = build_constitutive(&MaterialParams::new(1.0, 0.25, PlaneAssumption::PlaneStrain).unwrap(), 2).unwrap();
        let disc = Discretisation::new(ElementType::Triangle, k, &law, StabilisationParam::default()).unwrap();
        let dofmap = TraceDofMap::new(&topo, disc.n_face_nodes());
        let contribs = condense_all(&mesh, &topo, &disc, &PolynomialData).unwrap();
        let sys = assemble_global(&contribs, &dofmap, &topo).unwrap();
        let v = DVector::from_fn(sys.dim(), |i, _| x.get(i).copied().unwrap_or(0.5));
        prop_assume!(v.norm() > 1e-3);
        prop_assert!(sys.matvec(&v).dot(&v) < 0.0);
    }
}
