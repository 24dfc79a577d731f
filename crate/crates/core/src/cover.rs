//! Signs, lifts and the branched double cover of a line field.
//!
//! Across every interior edge the two representatives `φ/2` and `φ/2 + π`
//! of the neighbouring faces pair up in one of two ways; the sign records
//! which. Going once around a vertex multiplies these signs to `(−1)^p`.
//! The cover takes two copies of every face and glues them according to the
//! signs, so the line field becomes a vector field upstairs. Vertices with
//! odd `p` get a single preimage (a branch point).

use std::f64::consts::{FRAC_PI_2, PI};

use serde_json::json;
use thiserror::Error;

use crate::angle::{principal, BRANCH_CUT_MARGIN};
use crate::connection::{edge_direction, Connection, CornerAngles};
use crate::fields::{
    line_field_indices, vector_field_indices, DefectReport, FieldError, LineField, VectorField,
};
use crate::mesh::{closing_cycle, Mesh, MeshError, Side};
use crate::verify::Check;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("sign across face {face} side {side} is ambiguous (lines nearly perpendicular after transport)")]
    BranchCut { face: usize, side: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("the branched cover needs a closed mesh")]
    NotClosed,
    #[error("map is not an involution at {what} {index}")]
    NotInvolution { what: &'static str, index: usize },
    #[error("involution fixes {what} {index}")]
    HasFixedPoints { what: &'static str, index: usize },
    #[error("involution does not map face {face} onto a face")]
    NotAutomorphism { face: usize },
    #[error("field is not invariant under the involution at face {face} (mismatch {mismatch:e})")]
    NotInvariant { face: usize, mismatch: f64 },
}

impl CoverError {
    pub fn code(&self) -> &'static str {
        match self {
            CoverError::BranchCut { .. } => "BRANCH_CUT",
            CoverError::Field(e) => e.code(),
            CoverError::Mesh(e) => e.code(),
            CoverError::NotClosed => "NOT_CLOSED",
            CoverError::NotInvolution { .. } => "NOT_INVOLUTION",
            CoverError::HasFixedPoints { .. } => "HAS_FIXED_POINTS",
            CoverError::NotAutomorphism { .. } => "NOT_AUTOMORPHISM",
            CoverError::NotInvariant { .. } => "NOT_INVARIANT",
        }
    }
}

/// ±1 on every interior side, symmetric under the twin map, together with
/// the representative line angles it refers to.
#[derive(Clone, Debug, PartialEq)]
pub struct SignCocycle {
    signs: Vec<[Option<i8>; 3]>,
    representatives: Vec<f64>,
}

impl SignCocycle {
    pub fn sign(&self, f: usize, k: usize) -> Option<i8> {
        self.signs[f][k]
    }

    /// Chosen representative `θ_f ∈ {φ_f/2, φ_f/2 + π}`.
    pub fn representative(&self, f: usize) -> f64 {
        self.representatives[f]
    }

    /// Product of the signs around an interior vertex.
    pub fn monodromy(&self, mesh: &Mesh, v: usize) -> Option<i8> {
        let star = mesh.vertex_star(v);
        star.cyclic.then(|| {
            star.entries
                .iter()
                .map(|e| self.signs[e.face][e.exit_side].unwrap())
                .product()
        })
    }

    /// Product of the signs along a closed dual walk.
    pub fn along(&self, cycle: &[Side]) -> i8 {
        cycle
            .iter()
            .map(|s| self.signs[s.face][s.side].unwrap())
            .product()
    }

    pub fn is_trivial_on_edges(&self) -> bool {
        self.signs.iter().flatten().flatten().all(|&s| s == 1)
    }
}

/// Offset of `theta_g` from the transported `theta_f`, checked against the
/// quarter-turn cut.
fn pairing(
    conn: &Connection,
    f: usize,
    k: usize,
    theta_f: f64,
    theta_g: f64,
) -> Result<f64, CoverError> {
    let moved = conn.transport_vector(f, k, theta_f).unwrap();
    let d = principal(theta_g - moved);
    if (d.abs() - FRAC_PI_2).abs() < BRANCH_CUT_MARGIN {
        return Err(CoverError::BranchCut { face: f, side: k });
    }
    Ok(d)
}

/// Signs of a line field. Representatives are chosen along a dual spanning
/// tree so that tree edges carry +1; every other side gets +1 where the
/// transported representative lands within a quarter turn of its neighbour's.
pub fn sign_cocycle(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
) -> Result<SignCocycle, CoverError> {
    let n = mesh.face_count();
    let mut reps: Vec<f64> = (0..n).map(|f| field.line_angle(f)).collect();
    for (face, parent) in mesh.dual_spanning_tree() {
        let Some(p) = parent else { continue };
        let d = pairing(conn, p.face, p.side, reps[p.face], reps[face])?;
        if d.abs() > FRAC_PI_2 {
            reps[face] += PI;
        }
    }
    let mut signs = vec![[None; 3]; n];
    for f in 0..n {
        for k in 0..3 {
            let Some(t) = mesh.twin(f, k) else { continue };
            if signs[f][k].is_some() {
                continue;
            }
            let d = pairing(conn, f, k, reps[f], reps[t.face])?;
            let s = if d > -FRAC_PI_2 && d <= FRAC_PI_2 { 1 } else { -1 };
            signs[f][k] = Some(s);
            signs[t.face][t.side] = Some(s);
        }
    }
    Ok(SignCocycle {
        signs,
        representatives: reps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftOutcome {
    /// A vector field spanning the line field.
    Lifted(VectorField),
    /// A closed dual walk along which the signs multiply to −1.
    Obstructed { cycle: Vec<Side> },
}

/// Tries to orient the line field consistently across all faces.
pub fn lift_line_field(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
) -> Result<LiftOutcome, CoverError> {
    let cocycle = sign_cocycle(mesh, conn, field)?;
    let n = mesh.face_count();
    let mut eps = vec![0i8; n];
    let mut parent: Vec<Option<Side>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    for (face, p) in mesh.dual_spanning_tree() {
        match p {
            None => {
                eps[face] = 1;
                depth[face] = 0;
            }
            Some(p) => {
                eps[face] = eps[p.face] * cocycle.sign(p.face, p.side).unwrap();
                depth[face] = depth[p.face] + 1;
                parent[face] = Some(p);
            }
        }
    }
    for f in 0..n {
        for k in 0..3 {
            let Some(t) = mesh.twin(f, k) else { continue };
            if eps[t.face] != eps[f] * cocycle.sign(f, k).unwrap() {
                let cycle = closing_cycle(mesh, &parent, &depth, Side::new(f, k));
                return Ok(LiftOutcome::Obstructed { cycle });
            }
        }
    }
    let theta = (0..n)
        .map(|f| cocycle.representative(f) + if eps[f] < 0 { PI } else { 0.0 })
        .collect();
    Ok(LiftOutcome::Lifted(VectorField::new(theta)?))
}

/// Two-sheeted cover on which the line field becomes a vector field.
#[derive(Clone, Debug)]
pub struct BranchedCover {
    pub mesh: Mesh,
    pub angles: CornerAngles,
    /// Lifted vector field: the chosen representative on sheet 0, its opposite on sheet 1.
    pub field: VectorField,
    /// Cover face -> (base face, sheet). Cover face `f + s·F` lies over `f`.
    pub sheet_map: Vec<(usize, u8)>,
    /// Cover vertex -> base vertex.
    pub vertex_base: Vec<usize>,
    /// Base vertex -> its preimages.
    pub fibers: Vec<Vec<usize>>,
    /// Base vertices with monodromy −1.
    pub branch_base_vertices: Vec<usize>,
    pub deck_vertices: Vec<usize>,
    pub deck_faces: Vec<usize>,
    pub cocycle: SignCocycle,
    pub base_chi: i64,
    pub base_report: DefectReport,
    /// Whether the line field itself lifts to the base.
    pub base_lift_exists: bool,
}

impl BranchedCover {
    /// Cover vertices that are branch points.
    pub fn branch_vertices(&self) -> Vec<usize> {
        self.branch_base_vertices
            .iter()
            .map(|&v| self.fibers[v][0])
            .collect()
    }

    pub fn connection(&self) -> Connection {
        Connection::build(&self.mesh, self.angles.clone())
    }

    /// JSON sidecar describing the covering map.
    pub fn sidecar_json(&self) -> serde_json::Value {
        json!({
            "sheet_map": self.sheet_map.iter().map(|&(f, s)| [f, s as usize]).collect::<Vec<_>>(),
            "vertex_base": self.vertex_base,
            "branch_vertices": self.branch_vertices(),
            "branch_base_vertices": self.branch_base_vertices,
            "deck": self.deck_vertices,
            "deck_faces": self.deck_faces,
            "euler_characteristic": self.mesh.euler_characteristic(),
            "base_euler_characteristic": self.base_chi,
        })
    }
}

/// Builds the branched double cover of a line field on a closed mesh.
pub fn branched_double_cover(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
) -> Result<BranchedCover, CoverError> {
    if !mesh.is_closed() {
        return Err(CoverError::NotClosed);
    }
    let base_report = line_field_indices(mesh, conn, field)?;
    let cocycle = sign_cocycle(mesh, conn, field)?;
    let nf = mesh.face_count();
    let flip = |s: Option<i8>| u8::from(s.unwrap() < 0);

    // Corner-walk orbits: every base vertex gets one preimage per orbit.
    let mut corner_lift = vec![[usize::MAX; 3]; 2 * nf];
    let mut fibers = vec![Vec::new(); mesh.vertex_count()];
    let mut vertex_base = Vec::new();
    let mut branch_base_vertices = Vec::new();
    for v in 0..mesh.vertex_count() {
        let star = mesh.vertex_star(v);
        let n = star.len();
        for start in 0..2u8 {
            let first = &star.entries[0];
            if corner_lift[first.face + start as usize * nf][first.corner] != usize::MAX {
                continue;
            }
            let id = vertex_base.len();
            vertex_base.push(v);
            fibers[v].push(id);
            let mut sheet = start;
            for j in 0..2 * n {
                let e = &star.entries[j % n];
                let slot = &mut corner_lift[e.face + sheet as usize * nf][e.corner];
                if *slot != usize::MAX {
                    break;
                }
                *slot = id;
                sheet ^= flip(cocycle.sign(e.face, e.exit_side));
            }
        }
        if fibers[v].len() == 1 {
            branch_base_vertices.push(v);
        }
    }

    let mut faces = Vec::with_capacity(2 * nf);
    let mut twins = vec![[None; 3]; 2 * nf];
    let mut sheet_map = Vec::with_capacity(2 * nf);
    for sheet in 0..2u8 {
        for f in 0..nf {
            let cf = f + sheet as usize * nf;
            faces.push(corner_lift[cf]);
            sheet_map.push((f, sheet));
            for k in 0..3 {
                let t = mesh.twin(f, k).unwrap();
                let other = sheet ^ flip(cocycle.sign(f, k));
                twins[cf][k] = Some(Side::new(t.face + other as usize * nf, t.side));
            }
        }
    }
    let cover_mesh = Mesh::glue(vertex_base.len(), faces, twins)?;

    let deck_vertices = vertex_base
        .iter()
        .enumerate()
        .map(|(id, &v)| match fibers[v].as_slice() {
            [a, b] if *a == id => *b,
            [a, _] => *a,
            _ => id,
        })
        .collect();
    let deck_faces = (0..2 * nf).map(|f| (f + nf) % (2 * nf)).collect();
    let angles = CornerAngles::from_raw(
        (0..2 * nf)
            .map(|f| conn.angles().face(f % nf))
            .collect(),
    )
    .expect("copied angles stay valid");
    let theta = (0..2 * nf)
        .map(|f| cocycle.representative(f % nf) + if f >= nf { PI } else { 0.0 })
        .collect();
    let base_lift_exists = matches!(
        lift_line_field(mesh, conn, field)?,
        LiftOutcome::Lifted(_)
    );

    Ok(BranchedCover {
        mesh: cover_mesh,
        angles,
        field: VectorField::new(theta)?,
        sheet_map,
        vertex_base,
        fibers,
        branch_base_vertices,
        deck_vertices,
        deck_faces,
        cocycle,
        base_chi: mesh.euler_characteristic(),
        base_report,
        base_lift_exists,
    })
}

/// Index identities relating the cover to its base.
pub fn cover_index_checks(cover: &BranchedCover) -> Vec<Check> {
    let mut checks = Vec::new();
    let k = cover.branch_base_vertices.len() as i64;
    let chi = cover.mesh.euler_characteristic();
    checks.push(Check::equal(
        "riemann_hurwitz",
        "Riemann-Hurwitz for a double cover: chi(cover) = 2 chi(base) - #branch points",
        chi,
        2 * cover.base_chi - k,
    ));

    let odd: Vec<usize> = cover
        .base_report
        .vertices
        .iter()
        .filter(|v| v.p % 2 != 0)
        .map(|v| v.vertex)
        .collect();
    let fiber_mismatch = cover
        .fibers
        .iter()
        .enumerate()
        .filter(|(v, fib)| {
            let branched = odd.binary_search(v).is_ok();
            fib.len() != if branched { 1 } else { 2 }
        })
        .count();
    checks.push(Check::equal(
        "fiber_sizes",
        "fiber has one point exactly over vertices with odd projective index",
        fiber_mismatch as i64,
        0,
    ));

    let conn = cover.connection();
    let report = match vector_field_indices(&cover.mesh, &conn, &cover.field) {
        Ok(r) => r,
        Err(e) => {
            checks.push(Check::failed(
                "cover_poincare_hopf",
                "Poincare-Hopf on the cover: sum of indices = chi(cover)",
                e.to_string(),
            ));
            return checks;
        }
    };
    checks.push(Check::equal(
        "cover_poincare_hopf",
        "Poincare-Hopf on the cover: sum of indices = chi(cover)",
        report.sum_ind.unwrap_or(0),
        chi,
    ));

    let mut normal_fail = 0;
    let mut index_fail = 0;
    for base in &cover.base_report.vertices {
        let fiber = &cover.fibers[base.vertex];
        let (mut ind, mut ind_perp) = (0, 0);
        for &y in fiber {
            let r = report.at(y).expect("closed cover");
            ind += r.ind.unwrap();
            ind_perp += r.ind_perp.unwrap();
        }
        if ind_perp != base.p_perp {
            normal_fail += 1;
        }
        let expected = base.p - (2 - fiber.len() as i64);
        if ind != expected {
            index_fail += 1;
        }
    }
    checks.push(Check::equal(
        "fiber_normal_index",
        "normal projective index equals the summed normal index over the fiber",
        normal_fail,
        0,
    ));
    checks.push(Check::equal(
        "fiber_index",
        "cover index is p/2 over regular points and p - 1 at branch points",
        index_fail,
        0,
    ));

    let disconnected = cover.mesh.component_count() == 2;
    checks.push(Check::equal(
        "lift_iff_disconnected",
        "the line field lifts to a vector field iff the cover is disconnected",
        i64::from(cover.base_lift_exists),
        i64::from(disconnected),
    ));

    let mut deck_fail = 0;
    for (y, &z) in cover.deck_vertices.iter().enumerate() {
        let branched = cover.fibers[cover.vertex_base[y]].len() == 1;
        if (z == y) != branched || cover.deck_vertices[z] != y {
            deck_fail += 1;
        }
    }
    let nf = cover.deck_faces.len() / 2;
    for f in 0..nf {
        let g = cover.deck_faces[f];
        let mapped = cover.mesh.face(f).map(|v| cover.deck_vertices[v]);
        let d = principal(cover.field.angles()[g] - cover.field.angles()[f] - PI);
        if mapped != cover.mesh.face(g) || d.abs() > 1e-9 {
            deck_fail += 1;
        }
    }
    checks.push(Check::equal(
        "deck_involution",
        "deck transformation fixes exactly the branch points and reverses the lifted field",
        deck_fail,
        0,
    ));
    checks
}

/// The field pulled back by an isometric involution, as doubled angles per face.
/// `None` when the maps do not preserve corner angles.
pub fn pull_back(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
    vmap: &[usize],
    fmap: &[usize],
) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(mesh.face_count());
    for f in 0..mesh.face_count() {
        let g = fmap[f];
        let tg = mesh.face(g);
        let perm = mesh
            .face(f)
            .map(|v| tg.iter().position(|&w| w == vmap[v]));
        let perm = [perm[0]?, perm[1]?, perm[2]?];
        let (af, ag) = (conn.angles().face(f), conn.angles().face(g));
        if (0..3).any(|i| (af[i] - ag[perm[i]]).abs() > 1e-9) {
            return None;
        }
        let d = edge_direction(ag, perm[0], perm[1]);
        let even = perm[1] == (perm[0] + 1) % 3;
        let phi = field.doubled()[g];
        out.push(if even { phi - 2.0 * d } else { 2.0 * d - phi });
    }
    Some(out)
}

/// A mesh divided by a free involution.
#[derive(Clone, Debug)]
pub struct QuotientMesh {
    pub mesh: Mesh,
    /// Original vertex -> quotient vertex.
    pub vertex_projection: Vec<usize>,
    /// Original face -> quotient face.
    pub face_projection: Vec<usize>,
    /// Quotient face -> the original face whose corner order it keeps.
    pub representatives: Vec<usize>,
}

/// Quotient of `mesh` by a fixed-point-free simplicial involution.
pub fn quotient_mesh(mesh: &Mesh, vmap: &[usize], fmap: &[usize]) -> Result<QuotientMesh, CoverError> {
    for (what, map) in [("vertex", vmap), ("face", fmap)] {
        for (i, &j) in map.iter().enumerate() {
            if j >= map.len() || map[j] != i {
                return Err(CoverError::NotInvolution { what, index: i });
            }
            if j == i {
                return Err(CoverError::HasFixedPoints { what, index: i });
            }
        }
    }
    if vmap.len() != mesh.vertex_count() || fmap.len() != mesh.face_count() {
        return Err(CoverError::NotInvolution {
            what: "map length",
            index: 0,
        });
    }
    for f in 0..mesh.face_count() {
        let mut a = mesh.face(f).map(|v| vmap[v]);
        let mut b = mesh.face(fmap[f]);
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(CoverError::NotAutomorphism { face: f });
        }
    }
    let mut vertex_projection = vec![usize::MAX; mesh.vertex_count()];
    let mut next = 0;
    for v in 0..mesh.vertex_count() {
        if v < vmap[v] {
            vertex_projection[v] = next;
            vertex_projection[vmap[v]] = next;
            next += 1;
        }
    }
    let mut face_projection = vec![usize::MAX; mesh.face_count()];
    let mut representatives = Vec::new();
    let mut faces = Vec::new();
    for f in 0..mesh.face_count() {
        if f < fmap[f] {
            face_projection[f] = representatives.len();
            face_projection[fmap[f]] = representatives.len();
            representatives.push(f);
            faces.push(mesh.face(f).map(|v| vertex_projection[v]));
        }
    }
    Ok(QuotientMesh {
        mesh: Mesh::build(next, faces)?,
        vertex_projection,
        face_projection,
        representatives,
    })
}

/// Quotient mesh together with the pushed-down field and corner angles.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub mesh: Mesh,
    pub field: LineField,
    pub angles: CornerAngles,
    pub vertex_projection: Vec<usize>,
    pub face_projection: Vec<usize>,
}

/// Divides a mesh and an invariant line field by an involution.
pub fn quotient_by_involution(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
    vmap: &[usize],
    fmap: &[usize],
) -> Result<Quotient, CoverError> {
    let q = quotient_mesh(mesh, vmap, fmap)?;
    let pulled = pull_back(mesh, conn, field, vmap, fmap)
        .ok_or(CoverError::NotAutomorphism { face: 0 })?;
    for (f, (p, x)) in pulled.iter().zip(field.doubled()).enumerate() {
        let mismatch = principal(p - x).abs();
        if mismatch > 1e-6 {
            return Err(CoverError::NotInvariant { face: f, mismatch });
        }
    }
    let phi = q.representatives.iter().map(|&f| field.doubled()[f]).collect();
    let angles = CornerAngles::from_raw(
        q.representatives
            .iter()
            .map(|&f| conn.angles().face(f))
            .collect(),
    )
    .expect("copied angles stay valid");
    Ok(Quotient {
        mesh: q.mesh,
        field: LineField::from_doubled(phi)?,
        angles,
        vertex_projection: q.vertex_projection,
        face_projection: q.face_projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, CatalogKey};
    use crate::connection::MetricMode;
    use crate::fields::Field;

    fn setup(mesh: &str, field: &str) -> (Mesh, Connection, LineField) {
        let m = catalog::generate_mesh(&CatalogKey::parse(mesh).unwrap()).unwrap();
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        let f = catalog::generate_field(&CatalogKey::parse(field).unwrap(), &m, &c)
            .unwrap()
            .to_line();
        (m, c, f)
    }

    /// Face-to-face isomorphism search: tries every face and corner
    /// correspondence for face 0 and propagates across sides.
    fn isomorphic(a: &Mesh, b: &Mesh) -> bool {
        if (a.vertex_count(), a.face_count()) != (b.vertex_count(), b.face_count()) {
            return false;
        }
        let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]];
        'start: for g0 in 0..b.face_count() {
            for p0 in perms {
                let mut fmap = vec![None; a.face_count()];
                let mut vmap = vec![None; a.vertex_count()];
                let mut stack = vec![(0usize, g0, p0)];
                while let Some((f, g, p)) = stack.pop() {
                    if let Some((gg, pp)) = fmap[f] {
                        if (gg, pp) != (g, p) {
                            continue 'start;
                        }
                        continue;
                    }
                    fmap[f] = Some((g, p));
                    for i in 0..3 {
                        let (va, vb) = (a.face(f)[i], b.face(g)[p[i]]);
                        match vmap[va] {
                            None => vmap[va] = Some(vb),
                            Some(x) if x != vb => continue 'start,
                            _ => {}
                        }
                    }
                    for k in 0..3 {
                        let ta = a.twin(f, k).unwrap();
                        // side k of f maps to the side of g joining p[k], p[k+1]
                        let (x, y) = (p[k], p[(k + 1) % 3]);
                        let side = if (x + 1) % 3 == y { x } else { y };
                        let tb = b.twin(g, side).unwrap();
                        // corner correspondence in the neighbours via shared vertices
                        let fa = a.face(ta.face);
                        let fb = b.face(tb.face);
                        let mut q = [usize::MAX; 3];
                        let mut free = (0..3).collect::<Vec<_>>();
                        for i in 0..3 {
                            if let Some(target) = vmap[fa[i]] {
                                if let Some(j) = fb.iter().position(|&w| w == target) {
                                    q[i] = j;
                                    free.retain(|&z| z != j);
                                }
                            }
                        }
                        for slot in q.iter_mut().filter(|s| **s == usize::MAX) {
                            *slot = free.pop().unwrap();
                        }
                        if !free.is_empty() {
                            continue 'start;
                        }
                        stack.push((ta.face, tb.face, q));
                    }
                }
                if vmap.iter().all(Option::is_some) {
                    let mut image: Vec<_> = vmap.iter().map(|v| v.unwrap()).collect();
                    image.sort_unstable();
                    image.dedup();
                    if image.len() == b.vertex_count() {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn constant_torus_has_trivial_signs() {
        let (m, c, f) = setup("torus_grid:a=4,b=4", "constant");
        let s = sign_cocycle(&m, &c, &f).unwrap();
        assert!(s.is_trivial_on_edges());
        let cover = branched_double_cover(&m, &c, &f).unwrap();
        assert_eq!(cover.mesh.component_count(), 2);
        assert!(cover.branch_base_vertices.is_empty());
    }

    #[test]
    fn monodromy_is_parity_of_index() {
        let (m, c, f) = setup("icosphere:n=2", "random_line_field:seed=3");
        let s = sign_cocycle(&m, &c, &f).unwrap();
        let r = line_field_indices(&m, &c, &f).unwrap();
        for v in &r.vertices {
            let expect = if v.p % 2 == 0 { 1 } else { -1 };
            assert_eq!(s.monodromy(&m, v.vertex), Some(expect));
        }
    }

    #[test]
    fn baseball_is_obstructed() {
        let (m, c, f) = setup("icosphere:n=2", "baseball");
        let s = sign_cocycle(&m, &c, &f).unwrap();
        match lift_line_field(&m, &c, &f).unwrap() {
            LiftOutcome::Obstructed { cycle } => {
                assert_eq!(s.along(&cycle), -1);
                for (i, side) in cycle.iter().enumerate() {
                    let next = cycle[(i + 1) % cycle.len()].face;
                    assert_eq!(m.twin(side.face, side.side).unwrap().face, next);
                }
            }
            LiftOutcome::Lifted(_) => panic!("baseball must not lift"),
        }
    }

    #[test]
    fn klein_constant_lifts() {
        let (m, c, f) = setup("klein_grid:a=4,b=4", "constant");
        let LiftOutcome::Lifted(v) = lift_line_field(&m, &c, &f).unwrap() else {
            panic!("expected a lift")
        };
        let r = vector_field_indices(&m, &c, &v).unwrap();
        assert!(r.vertices.iter().all(|x| x.ind == Some(0)));
        for g in 0..m.face_count() {
            for k in 0..3 {
                let t = m.twin(g, k).unwrap();
                let moved = c.transport_vector(g, k, v.angles()[g]).unwrap();
                assert!(principal(moved - v.angles()[t.face]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn baseball_cover_is_a_torus() {
        let (m, c, f) = setup("icosphere:n=2", "baseball");
        let cover = branched_double_cover(&m, &c, &f).unwrap();
        assert_eq!(cover.mesh.euler_characteristic(), 0);
        assert_eq!(cover.branch_base_vertices.len(), 4);
        assert_eq!(cover.mesh.component_count(), 1);
        assert!(cover.mesh.orientability().is_orientable());
        assert_eq!(cover.mesh.edge_count(), 2 * m.edge_count());
        for check in cover_index_checks(&cover) {
            assert!(check.pass, "{check:?}");
        }
    }

    #[test]
    fn projective_plane_cover_is_the_icosahedron() {
        let (m, c, f) = setup("rp2_minimal", "rp2_radial");
        let cover = branched_double_cover(&m, &c, &f).unwrap();
        assert_eq!(cover.mesh.euler_characteristic(), 2);
        assert!(cover.branch_base_vertices.is_empty());
        let ico = catalog::icosphere(0);
        assert!(isomorphic(&cover.mesh, &ico));
        assert!(!isomorphic(&cover.mesh, &catalog::torus7()));
        for check in cover_index_checks(&cover) {
            assert!(check.pass, "{check:?}");
        }
    }

    #[test]
    fn random_covers_satisfy_identities() {
        for seed in 0..10 {
            let (m, c, f) = setup("icosphere:n=1", &format!("random_line_field:seed={seed}"));
            let Ok(cover) = branched_double_cover(&m, &c, &f) else {
                continue;
            };
            for check in cover_index_checks(&cover) {
                assert!(check.pass, "seed {seed}: {check:?}");
            }
        }
    }

    #[test]
    fn quotient_errors() {
        let ico = catalog::icosphere(0);
        let c = Connection::for_mode(&ico, MetricMode::Equilateral).unwrap();
        let ident_v: Vec<usize> = (0..12).collect();
        let ident_f: Vec<usize> = (0..20).collect();
        assert_eq!(
            quotient_mesh(&ico, &ident_v, &ident_f).unwrap_err().code(),
            "HAS_FIXED_POINTS"
        );
        let (vm, fm) = catalog::antipodal_maps(&ico).unwrap();
        let Field::Line(random) =
            catalog::generate_field(&CatalogKey::parse("random_line_field:seed=1").unwrap(), &ico, &c)
                .unwrap()
        else {
            panic!()
        };
        assert_eq!(
            quotient_by_involution(&ico, &c, &random, &vm, &fm).unwrap_err().code(),
            "NOT_INVARIANT"
        );
    }
}
