use linefield::angle::principal;
use linefield::catalog::{self, CatalogKey};
use linefield::connection::{Connection, MetricMode};
use linefield::fields::{
    field_indices, line_field_indices, line_field_of_vector_field, line_index_at,
    vector_field_indices, Field, FieldError, VectorField,
};
use linefield::mesh::{parse_off, write_off, Mesh, VertexStar};
use proptest::prelude::*;

fn mesh(name: &str) -> Mesh {
    catalog::generate_mesh(&CatalogKey::parse(name).unwrap()).unwrap()
}

const CLOSED: &[&str] = &[
    "icosphere:n=0",
    "icosphere:n=1",
    "torus_grid:a=4,b=4",
    "klein_grid:a=4,b=6",
    "rp2_minimal",
    "torus7",
];

/// The star walked from a different starting face.
fn rotated(star: &VertexStar, by: usize) -> VertexStar {
    let mut s = star.clone();
    s.entries.rotate_left(by % star.len());
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_poincare_hopf(seed in any::<u64>(), which in 0..CLOSED.len()) {
        let m = mesh(CLOSED[which]);
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        match line_field_indices(&m, &c, &catalog::random_line_field(&m, seed)) {
            Ok(r) => prop_assert_eq!(r.sum_p, 2 * m.euler_characteristic()),
            Err(FieldError::BranchCut { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn vector_poincare_hopf(seed in any::<u64>(), which in 0..CLOSED.len()) {
        let m = mesh(CLOSED[which]);
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        if let Ok(r) = vector_field_indices(&m, &c, &catalog::random_vector_field(&m, seed)) {
            prop_assert_eq!(r.sum_ind, Some(m.euler_characteristic()));
            for v in &r.vertices {
                prop_assert_eq!(v.ind_perp, v.ind.map(|i| i - 1));
            }
        }
    }

    #[test]
    fn gauge_invariance(seed in any::<u64>(), shift in 0.0..std::f64::consts::TAU) {
        let m = mesh("icosphere:n=1");
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        let f = catalog::random_line_field(&m, seed);
        let (Ok(a), Ok(b)) = (line_field_indices(&m, &c, &f), line_field_indices(&m, &c, &f.rotated(shift))) else {
            return Ok(());
        };
        for (x, y) in a.vertices.iter().zip(&b.vertices) {
            prop_assert_eq!((x.p, x.p_perp), (y.p, y.p_perp));
        }
    }

    #[test]
    fn walk_independence(seed in any::<u64>(), start in 0usize..6) {
        let m = mesh("klein_grid:a=4,b=4");
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        let f = catalog::random_line_field(&m, seed);
        for v in 0..m.vertex_count() {
            let star = m.vertex_star(v);
            let walks = [star.clone(), star.reversed(), rotated(star, start), rotated(&star.reversed(), start)];
            let got: Vec<_> = walks
                .iter()
                .filter_map(|w| line_index_at(&c, &f, w).ok())
                .map(|r| (r.p, r.p_perp))
                .collect();
            prop_assert!(got.windows(2).all(|w| w[0] == w[1]), "{:?}", got);
        }
    }

    #[test]
    fn smooth_vector_fields_have_even_line_index(seed in any::<u64>(), amp in 0.0..0.3f64) {
        use rand::{Rng, SeedableRng};
        let m = mesh("disk_fan:rings=5,sectors=10");
        let c = Connection::for_mode(&m, MetricMode::Planar).unwrap();
        let Field::Vector(base) = catalog::generate_field(&CatalogKey::parse("radial_disk:kind=vector").unwrap(), &m, &c).unwrap() else {
            unreachable!()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let noisy = VectorField::new(base.angles().iter().map(|a| a + rng.gen_range(-amp..=amp)).collect()).unwrap();
        let vr = vector_field_indices(&m, &c, &noisy).unwrap();
        let lr = line_field_indices(&m, &c, &line_field_of_vector_field(&noisy)).unwrap();
        for (v, l) in vr.vertices.iter().zip(&lr.vertices) {
            prop_assert_eq!(l.p, 2 * v.ind.unwrap());
            prop_assert_eq!(l.p_perp, 2 * v.ind_perp.unwrap());
        }
    }
}

#[test]
fn metric_independence_on_planar_meshes() {
    for mn in ["disk_fan:rings=6,sectors=12", "disk_fan:rings=3,sectors=7", "annulus_grid:a=12,b=3"] {
        let m = mesh(mn);
        let planar = Connection::for_mode(&m, MetricMode::Planar).unwrap();
        let equi = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        for fname in [
            "radial_disk",
            "radial_disk:kind=vector",
            "defect_patch:k=1",
            "defect_patch:k=1/2",
            "defect_patch:k=-1/2",
            "defect_patch:k=-1",
        ] {
            let key = CatalogKey::parse(fname).unwrap();
            let Ok(f) = catalog::generate_field(&key, &m, &planar) else { continue };
            let a = field_indices(&m, &planar, &f).unwrap();
            let b = field_indices(&m, &equi, &f).unwrap();
            for (x, y) in a.vertices.iter().zip(&b.vertices) {
                assert_eq!((x.p, x.p_perp, x.ind), (y.p, y.p_perp, y.ind), "{mn} {fname} vertex {}", x.vertex);
            }
        }
    }
}

#[test]
fn off_round_trip() {
    for mn in ["icosphere:n=1", "disk_fan:rings=2,sectors=5", "klein_grid:a=4,b=4", "rp2_minimal"] {
        let m = mesh(mn);
        let back = parse_off(&write_off(&m)).unwrap();
        assert_eq!(back, m, "{mn}");
        assert_eq!(back.euler_characteristic(), m.euler_characteristic());
    }
}

#[test]
fn transport_round_trip_and_holonomy() {
    for mn in CLOSED {
        let m = mesh(mn);
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        for f in 0..m.face_count() {
            for k in 0..3 {
                let t = m.twin(f, k).unwrap();
                let there = c.transport_line(f, k, 0.7).unwrap();
                let back = c.transport_line(t.face, t.side, there).unwrap();
                assert!(principal(back - 0.7).abs() < 1e-9);
            }
        }
        for v in 0..m.vertex_count() {
            let h = c.star_holonomy(&m, v).unwrap();
            assert!(principal(h - c.curvature(v)).abs() < 1e-9, "{mn} vertex {v}");
        }
    }
}
