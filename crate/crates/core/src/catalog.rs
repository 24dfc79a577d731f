//! Named meshes and fields.
//!
//! Keys are written `name` or `name:param=value,param=value`, for example
//! `icosphere:n=3`, `disk_fan:rings=6,sectors=12` or `defect_patch:k=-0.5`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::angle::{principal, wrap_positive};
use crate::connection::{Connection, MetricMode};
use crate::cover::{quotient_by_involution, quotient_mesh, CoverError};
use crate::fields::{Field, LineField, VectorField};
use crate::mesh::{Mesh, MeshError};
use crate::prescribe::{prescribe_defects, PrescribeError};

pub const MESH_NAMES: &[&str] = &[
    "icosphere",
    "torus_grid",
    "klein_grid",
    "rp2_minimal",
    "disk_fan",
    "annulus_grid",
    "torus7",
];

pub const FIELD_NAMES: &[&str] = &[
    "baseball",
    "two_pole",
    "constant",
    "radial_disk",
    "defect_patch",
    "rp2_radial",
    "random_line_field",
    "random_vector_field",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownName(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("field does not fit this mesh: {0}")]
    BadTopology(String),
    #[error("constant field is obstructed by holonomy (mismatch {residual:e})")]
    HolonomyObstruction { residual: f64 },
    #[error(transparent)]
    Prescribe(#[from] PrescribeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::UnknownName(_) | CatalogError::BadParams(_) => "BAD_PARAMS",
            CatalogError::BadTopology(_) => "BAD_TOPOLOGY",
            CatalogError::HolonomyObstruction { .. } => "HOLONOMY_OBSTRUCTION",
            CatalogError::Prescribe(e) => e.code(),
            CatalogError::Mesh(e) => e.code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogKey {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl CatalogKey {
    pub fn parse(text: &str) -> Result<CatalogKey, CatalogError> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        CatalogKey::with_params(name, rest)
    }

    /// Name plus a `k=v,k=v` parameter list (may be empty).
    pub fn with_params(name: &str, params: &str) -> Result<CatalogKey, CatalogError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(CatalogError::BadParams("empty name".into()));
        }
        let mut map = BTreeMap::new();
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CatalogError::BadParams(format!("expected key=value, got {item:?}")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CatalogError::BadParams(format!("parameter {k:?} given twice")));
            }
        }
        Ok(CatalogKey {
            name: name.to_string(),
            params: map,
        })
    }

    fn only(&self, allowed: &[&str]) -> Result<(), CatalogError> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CatalogError::BadParams(format!(
                    "{} does not take parameter {k:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    fn int(&self, key: &str, default: i64, lo: i64, hi: i64) -> Result<i64, CatalogError> {
        let v = match self.params.get(key) {
            None => default,
            Some(s) => s
                .parse()
                .map_err(|_| CatalogError::BadParams(format!("{key}={s} is not an integer")))?,
        };
        if !(lo..=hi).contains(&v) {
            return Err(CatalogError::BadParams(format!(
                "{key}={v} outside {lo}..={hi}"
            )));
        }
        Ok(v)
    }

    fn float(&self, key: &str, default: f64) -> Result<f64, CatalogError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => {
                let v = parse_fraction(s)
                    .ok_or_else(|| CatalogError::BadParams(format!("{key}={s} is not a number")))?;
                Ok(v)
            }
        }
    }

    fn word<'a>(&'a self, key: &str, default: &'a str, allowed: &[&str]) -> Result<&'a str, CatalogError> {
        let v = self.params.get(key).map_or(default, String::as_str);
        if !allowed.contains(&v) {
            return Err(CatalogError::BadParams(format!(
                "{key}={v}; expected one of {allowed:?}"
            )));
        }
        Ok(v)
    }
}

/// Accepts `0.5`, `-1`, `1/2`, `-1/2`.
fn parse_fraction(s: &str) -> Option<f64> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        (b != 0.0).then_some(a / b)
    } else {
        s.parse().ok()
    }
}

pub fn generate_mesh(key: &CatalogKey) -> Result<Mesh, CatalogError> {
    match key.name.as_str() {
        "icosphere" => {
            key.only(&["n"])?;
            Ok(icosphere(key.int("n", 0, 0, 5)? as u32))
        }
        "torus_grid" | "klein_grid" => {
            key.only(&["a", "b"])?;
            let a = key.int("a", 8, 3, 500)? as usize;
            let b = key.int("b", 8, 4, 500)? as usize;
            if b % 2 != 0 {
                return Err(CatalogError::BadParams("b must be even".into()));
            }
            Ok(lattice_grid(a, b, key.name == "klein_grid")?)
        }
        "rp2_minimal" => {
            key.only(&[])?;
            Ok(rp2_minimal())
        }
        "disk_fan" => {
            key.only(&["rings", "sectors"])?;
            let rings = key.int("rings", 4, 1, 200)? as usize;
            let sectors = key.int("sectors", 12, 3, 1000)? as usize;
            Ok(disk_fan(rings, sectors))
        }
        "annulus_grid" => {
            key.only(&["a", "b"])?;
            let a = key.int("a", 16, 3, 1000)? as usize;
            let b = key.int("b", 4, 1, 200)? as usize;
            Ok(annulus_grid(a, b))
        }
        "torus7" => {
            key.only(&[])?;
            Ok(torus7())
        }
        other => Err(CatalogError::UnknownName(other.to_string())),
    }
}

const GOLDEN: f64 = 1.618_033_988_749_895;

fn icosahedron_positions() -> Vec<[f64; 3]> {
    let p = GOLDEN;
    let raw = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    raw.iter().map(|&x| normalize(x)).collect()
}

/// The 20 outward-oriented triangles of the icosahedron, in lexicographic order.
pub fn icosahedron_faces() -> Vec<[usize; 3]> {
    let pos = icosahedron_positions();
    let edge2 = dist2(pos[0], pos[1]);
    let adjacent = |i: usize, j: usize| (dist2(pos[i], pos[j]) - edge2).abs() < 1e-9;
    let mut faces = Vec::new();
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                    let n = cross(sub(pos[j], pos[i]), sub(pos[k], pos[i]));
                    let c = add(add(pos[i], pos[j]), pos[k]);
                    faces.push(if dot3(n, c) > 0.0 { [i, j, k] } else { [i, k, j] });
                }
            }
        }
    }
    faces
}

/// Loop-style 4-to-1 subdivision of the icosahedron, projected to the unit sphere.
pub fn icosphere(n: u32) -> Mesh {
    let mut pos = icosahedron_positions();
    let mut faces = icosahedron_faces();
    for _ in 0..n {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, pos: &mut Vec<[f64; 3]>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                pos.push(normalize(add(pos[a], pos[b])));
                pos.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * faces.len());
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut pos);
            let bc = midpoint(b, c, &mut pos);
            let ca = midpoint(c, a, &mut pos);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Mesh::build(pos.len(), faces)
        .expect("icosphere is a valid surface")
        .with_positions(pos)
}

/// Triangular lattice on an `a × b` grid of rows, each row shifted by half a
/// step relative to its neighbours. The columns wrap either by translation
/// (torus) or by a glide reflection `(a, j) ~ (0, −j)` (Klein bottle).
fn lattice_grid(a: usize, b: usize, klein: bool) -> Result<Mesh, CatalogError> {
    let id = |i: usize, j: usize| {
        let j = j % b;
        if i >= a {
            let j = if klein { (b - j) % b } else { j };
            j * a + (i - a)
        } else {
            j * a + i
        }
    };
    let mut faces = Vec::with_capacity(2 * a * b);
    for j in 0..b {
        for i in 0..a {
            if j % 2 == 0 {
                faces.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                faces.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            } else {
                faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    Mesh::build(a * b, faces).map_err(|e| CatalogError::BadParams(format!("grid too small: {e}")))
}

/// Antipodal vertex and face maps of a centrally symmetric mesh.
pub fn antipodal_maps(mesh: &Mesh) -> Option<(Vec<usize>, Vec<usize>)> {
    let pos = mesh.positions()?;
    let key = |p: [f64; 3]| p.map(|x| (x + 0.0).to_bits());
    let by_pos: HashMap<[u64; 3], usize> = pos.iter().enumerate().map(|(i, &p)| (key(p), i)).collect();
    let vmap: Vec<usize> = pos
        .iter()
        .map(|&p| by_pos.get(&key(p.map(|x| -x))).copied())
        .collect::<Option<_>>()?;
    let sorted = |t: [usize; 3]| {
        let mut t = t;
        t.sort_unstable();
        t
    };
    let by_verts: HashMap<[usize; 3], usize> = mesh
        .faces()
        .iter()
        .enumerate()
        .map(|(f, &t)| (sorted(t), f))
        .collect();
    let fmap = mesh
        .faces()
        .iter()
        .map(|t| by_verts.get(&sorted(t.map(|v| vmap[v]))).copied())
        .collect::<Option<_>>()?;
    Some((vmap, fmap))
}

/// Six-vertex projective plane: the icosahedron modulo the antipodal map.
pub fn rp2_minimal() -> Mesh {
    let ico = icosphere(0);
    let (vmap, fmap) = antipodal_maps(&ico).expect("icosahedron is symmetric");
    quotient_mesh(&ico, &vmap, &fmap)
        .expect("antipodal quotient is a surface")
        .mesh
}

/// Centre vertex plus `rings` rings of `sectors` vertices at radius 1, 2, ...;
/// ring `k` is rotated by `k/2` angular steps.
pub fn disk_fan(rings: usize, sectors: usize) -> Mesh {
    let h = TAU / sectors as f64;
    let mut pos = vec![[0.0, 0.0, 0.0]];
    for k in 1..=rings {
        for i in 0..sectors {
            let a = (i as f64 + (k - 1) as f64 / 2.0) * h;
            let r = k as f64;
            pos.push([r * a.cos(), r * a.sin(), 0.0]);
        }
    }
    let ring = |k: usize, i: usize| 1 + (k - 1) * sectors + i % sectors;
    let mut faces = Vec::new();
    for i in 0..sectors {
        faces.push([0, ring(1, i), ring(1, i + 1)]);
    }
    for k in 1..rings {
        for i in 0..sectors {
            faces.push(ccw(&pos, [ring(k, i), ring(k + 1, i), ring(k, i + 1)]));
            faces.push(ccw(&pos, [ring(k + 1, i), ring(k + 1, i + 1), ring(k, i + 1)]));
        }
    }
    Mesh::build(pos.len(), faces)
        .expect("disk fan is a valid surface")
        .with_positions(pos)
}

/// `b + 1` concentric circles of `a` vertices, consecutive circles joined by
/// a strip of `2a` triangles.
pub fn annulus_grid(a: usize, b: usize) -> Mesh {
    let h = TAU / a as f64;
    let r0 = (a as f64 / TAU).max(1.0);
    let mut pos = Vec::new();
    for k in 0..=b {
        for i in 0..a {
            let t = (i as f64 + k as f64 / 2.0) * h;
            let r = r0 + k as f64;
            pos.push([r * t.cos(), r * t.sin(), 0.0]);
        }
    }
    let ring = |k: usize, i: usize| k * a + i % a;
    let mut faces = Vec::new();
    for k in 0..b {
        for i in 0..a {
            faces.push(ccw(&pos, [ring(k, i), ring(k + 1, i), ring(k, i + 1)]));
            faces.push(ccw(&pos, [ring(k + 1, i), ring(k + 1, i + 1), ring(k, i + 1)]));
        }
    }
    Mesh::build(pos.len(), faces)
        .expect("annulus is a valid surface")
        .with_positions(pos)
}

/// The seven-vertex torus (every pair of vertices is joined by an edge).
pub fn torus7() -> Mesh {
    let faces = (0..7)
        .flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 3) % 7, (i + 2) % 7]])
        .collect();
    Mesh::build(7, faces).expect("seven-vertex torus is a valid surface")
}

fn ccw(pos: &[[f64; 3]], t: [usize; 3]) -> [usize; 3] {
    let n = cross(sub(pos[t[1]], pos[t[0]]), sub(pos[t[2]], pos[t[0]]));
    if n[2] > 0.0 {
        t
    } else {
        [t[0], t[2], t[1]]
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = sub(a, b);
    dot3(d, d)
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

// ---------------------------------------------------------------- fields

pub fn generate_field(key: &CatalogKey, mesh: &Mesh, conn: &Connection) -> Result<Field, CatalogError> {
    match key.name.as_str() {
        "baseball" => {
            key.only(&[])?;
            Ok(Field::Line(baseball(mesh, conn)?))
        }
        "two_pole" => {
            key.only(&[])?;
            Ok(Field::Line(two_pole(mesh, conn)?))
        }
        "constant" => {
            key.only(&[])?;
            Ok(Field::Line(constant_line_field(mesh, conn)?))
        }
        "radial_disk" => {
            key.only(&["kind"])?;
            let angles = radial_disk_angles(mesh)?;
            match key.word("kind", "line", &["line", "vector"])? {
                "vector" => Ok(Field::Vector(VectorField::new(angles).expect("finite"))),
                _ => Ok(Field::Line(LineField::from_line_angles(&angles).expect("finite"))),
            }
        }
        "defect_patch" => {
            key.only(&["k", "variant"])?;
            let k = key.float("k", 0.5)?;
            if (2.0 * k).fract() != 0.0 || k.abs() > 4.0 {
                return Err(CatalogError::BadParams(format!(
                    "k={k}: expected a half-integer with |k| <= 4"
                )));
            }
            let variant = key.word("variant", "ray", &["ray", "circular"])?;
            Ok(Field::Line(defect_patch(mesh, k, variant == "circular")?))
        }
        "rp2_radial" => {
            key.only(&[])?;
            Ok(Field::Line(rp2_radial(mesh)?))
        }
        "random_line_field" => {
            key.only(&["seed"])?;
            let seed = key.int("seed", 0, 0, i64::MAX)? as u64;
            Ok(Field::Line(random_line_field(mesh, seed)))
        }
        "random_vector_field" => {
            key.only(&["seed"])?;
            let seed = key.int("seed", 0, 0, i64::MAX)? as u64;
            Ok(Field::Vector(random_vector_field(mesh, seed)))
        }
        other => Err(CatalogError::UnknownName(other.to_string())),
    }
}

fn require_sphere(mesh: &Mesh, what: &str) -> Result<(), CatalogError> {
    if !mesh.is_closed() || mesh.euler_characteristic() != 2 {
        return Err(CatalogError::BadTopology(format!(
            "{what} needs a closed sphere (chi = {})",
            mesh.euler_characteristic()
        )));
    }
    Ok(())
}

fn graph_distances(nbrs: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; nbrs.len()];
    d[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        for &u in &nbrs[v] {
            if d[u] == usize::MAX {
                d[u] = d[v] + 1;
                q.push_back(u);
            }
        }
    }
    d
}

/// Greedy farthest-point sample of `count` vertices starting at vertex 0.
/// Each new vertex maximizes the graph distance to those already chosen;
/// ties go to the lowest id.
pub fn spread_vertices(mesh: &Mesh, count: usize) -> Vec<usize> {
    let nbrs = mesh.vertex_neighbors();
    let mut chosen = vec![0];
    let mut nearest = graph_distances(&nbrs, 0);
    while chosen.len() < count.min(mesh.vertex_count()) {
        let (best, _) = nearest
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (v, &d)| if d > acc.1 { (v, d) } else { acc });
        chosen.push(best);
        for (n, d) in nearest.iter_mut().zip(graph_distances(&nbrs, best)) {
            *n = (*n).min(d);
        }
    }
    chosen
}

/// Four charges of projective index 1 at spread-out vertices of a sphere.
pub fn baseball(mesh: &Mesh, conn: &Connection) -> Result<LineField, CatalogError> {
    require_sphere(mesh, "baseball")?;
    let targets: Vec<_> = spread_vertices(mesh, 4).into_iter().map(|v| (v, 1)).collect();
    Ok(prescribe_defects(mesh, conn, &targets)?)
}

/// The two vertices carrying the charges of [`two_pole`].
pub fn two_pole_vertices(mesh: &Mesh) -> (usize, usize) {
    if let Some((vmap, _)) = antipodal_maps(mesh) {
        return (0, vmap[0]);
    }
    let d = graph_distances(&mesh.vertex_neighbors(), 0);
    let far = (0..d.len()).fold(0, |b, v| if d[v] > d[b] { v } else { b });
    (0, far)
}

/// Projective index 2 at vertex 0 and at its antipode. On centrally
/// symmetric meshes the field is rotated so that the antipodal map preserves it.
pub fn two_pole(mesh: &Mesh, conn: &Connection) -> Result<LineField, CatalogError> {
    require_sphere(mesh, "two_pole")?;
    let (n, s) = two_pole_vertices(mesh);
    let field = prescribe_defects(mesh, conn, &[(n, 2), (s, 2)])?;
    if let Some((vmap, fmap)) = antipodal_maps(mesh) {
        if let Some(sym) = symmetrize(mesh, conn, &field, &vmap, &fmap) {
            return Ok(sym);
        }
    }
    Ok(field)
}

/// Rotates `field` by a constant so that it is invariant under the given
/// involution, if such a rotation exists.
fn symmetrize(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
    vmap: &[usize],
    fmap: &[usize],
) -> Option<LineField> {
    let pulled = crate::cover::pull_back(mesh, conn, field, vmap, fmap)?;
    let c = principal(pulled[0] - field.doubled()[0]);
    let candidates = [c / 2.0, -c / 2.0, c / 2.0 + PI, -c / 2.0 + PI];
    candidates.iter().find_map(|&a| {
        let rotated = field.rotated(a);
        let pulled = crate::cover::pull_back(mesh, conn, &rotated, vmap, fmap)?;
        let worst = pulled
            .iter()
            .zip(rotated.doubled())
            .map(|(p, x)| principal(p - x).abs())
            .fold(0.0, f64::max);
        (worst < 1e-9).then_some(rotated)
    })
}

/// The two-pole field on the icosahedron pushed down to the six-vertex
/// projective plane: a single defect with projective index 2.
pub fn rp2_radial(mesh: &Mesh) -> Result<LineField, CatalogError> {
    let ico = icosphere(0);
    let conn = Connection::for_mode(&ico, MetricMode::Equilateral).expect("equilateral");
    let field = two_pole(&ico, &conn)?;
    let (vmap, fmap) = antipodal_maps(&ico).expect("icosahedron is symmetric");
    let q = quotient_by_involution(&ico, &conn, &field, &vmap, &fmap).map_err(|e| match e {
        CoverError::Mesh(m) => CatalogError::Mesh(m),
        other => CatalogError::BadTopology(other.to_string()),
    })?;
    if q.mesh.faces() != mesh.faces() || q.mesh.vertex_count() != mesh.vertex_count() {
        return Err(CatalogError::BadTopology(
            "rp2_radial is defined on rp2_minimal only".into(),
        ));
    }
    Ok(q.field)
}

/// A line field that is parallel under transport, if the holonomy allows one.
///
/// Every face angle is an affine function `±c + β_f` of the root angle `c`;
/// closing the non-tree edges gives constraints on `c`. When several values
/// work the one closest to zero is used.
pub fn constant_line_field(mesh: &Mesh, conn: &Connection) -> Result<LineField, CatalogError> {
    let nf = mesh.face_count();
    let mut sign = vec![1.0; nf];
    let mut offset = vec![0.0; nf];
    let mut tree = vec![[false; 3]; nf];
    for (face, parent) in mesh.dual_spanning_tree() {
        let Some(p) = parent else {
            continue;
        };
        let t = mesh.twin(p.face, p.side).unwrap();
        tree[p.face][p.side] = true;
        tree[t.face][t.side] = true;
        let (s, b) = carry(conn, p.face, p.side, sign[p.face], offset[p.face]);
        sign[face] = s;
        offset[face] = b;
    }

    // constraint: (s - sign[g]) c ≡ offset[g] - b
    let mut fixed: Option<f64> = None;
    let mut constraints = Vec::new();
    for f in 0..nf {
        for k in 0..3 {
            let Some(t) = mesh.twin(f, k) else { continue };
            if tree[f][k] {
                continue;
            }
            let (s, b) = carry(conn, f, k, sign[f], offset[f]);
            let coeff = s - sign[t.face];
            let rhs = offset[t.face] - b;
            constraints.push((coeff, rhs));
            if coeff != 0.0 && fixed.is_none() {
                fixed = Some(rhs / coeff);
            }
        }
    }
    let candidates: Vec<f64> = match fixed {
        None => vec![0.0],
        // c is determined modulo π
        Some(c) => {
            let mut v = vec![principal(c), principal(c + PI)];
            v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            v
        }
    };
    let residual = |c: f64| {
        constraints
            .iter()
            .map(|&(coeff, rhs)| principal(coeff * c - rhs).abs())
            .fold(0.0, f64::max)
    };
    let best = candidates
        .iter()
        .map(|&c| (c, residual(c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if best.1 > 1e-6 {
        return Err(CatalogError::HolonomyObstruction { residual: best.1 });
    }
    let c = best.0;
    let phi = (0..nf).map(|f| sign[f] * c + offset[f]).collect();
    Ok(LineField::from_doubled(phi).expect("finite"))
}

fn carry(conn: &Connection, f: usize, k: usize, s: f64, b: f64) -> (f64, f64) {
    let r = conn.rho(f, k).unwrap();
    if conn.frames_agree(f, k).unwrap() {
        (s, b + 2.0 * r)
    } else {
        (-s, 2.0 * r - b)
    }
}

fn planar_positions(mesh: &Mesh, what: &str) -> Result<Vec<[f64; 2]>, CatalogError> {
    if !mesh.is_planar() {
        return Err(CatalogError::BadTopology(format!(
            "{what} needs planar vertex positions"
        )));
    }
    Ok(mesh.positions().unwrap().iter().map(|p| [p[0], p[1]]).collect())
}

fn barycenter(pos: &[[f64; 2]], t: [usize; 3]) -> [f64; 2] {
    [
        (pos[t[0]][0] + pos[t[1]][0] + pos[t[2]][0]) / 3.0,
        (pos[t[0]][1] + pos[t[1]][1] + pos[t[2]][1]) / 3.0,
    ]
}

/// Converts a direction in the plane to face-frame angles.
fn to_face_frame(pos: &[[f64; 2]], t: [usize; 3], global: f64) -> f64 {
    let (p0, p1, p2) = (pos[t[0]], pos[t[1]], pos[t[2]]);
    let base = (p1[1] - p0[1]).atan2(p1[0] - p0[0]);
    let cross = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    wrap_positive(if cross > 0.0 { global - base } else { base - global })
}

/// Outward radial directions (polar angle of each barycenter), replaced by
/// the exact outward normal in faces with a boundary side. Vector angles.
pub fn radial_disk_angles(mesh: &Mesh) -> Result<Vec<f64>, CatalogError> {
    let pos = planar_positions(mesh, "radial_disk")?;
    if mesh.is_closed() || mesh.euler_characteristic() != 1 {
        return Err(CatalogError::BadTopology("radial_disk needs a disk".into()));
    }
    let mut global: Vec<f64> = mesh
        .faces()
        .iter()
        .map(|&t| {
            let c = barycenter(&pos, t);
            c[1].atan2(c[0])
        })
        .collect();
    let mut seen = vec![false; mesh.face_count()];
    for s in mesh.boundary_sides() {
        if std::mem::replace(&mut seen[s.face], true) {
            return Err(CatalogError::BadTopology(format!(
                "face {} has two boundary sides",
                s.face
            )));
        }
        let t = mesh.face(s.face);
        let (a, b) = (pos[t[s.side]], pos[t[(s.side + 1) % 3]]);
        let along = (b[1] - a[1]).atan2(b[0] - a[0]);
        // outward normal points away from the barycenter
        let c = barycenter(&pos, t);
        let n = along - PI / 2.0;
        let out = if (a[0] - c[0]) * n.cos() + (a[1] - c[1]) * n.sin() > 0.0 {
            n
        } else {
            n + PI
        };
        global[s.face] = out;
    }
    Ok(mesh
        .faces()
        .iter()
        .zip(global)
        .map(|(&t, g)| to_face_frame(&pos, t, g))
        .collect())
}

/// Doubled angle `2k·(polar angle of barycenter)`, plus π for the circular variant.
pub fn defect_patch(mesh: &Mesh, k: f64, circular: bool) -> Result<LineField, CatalogError> {
    let pos = planar_positions(mesh, "defect_patch")?;
    let shift = if circular { PI } else { 0.0 };
    let line: Vec<f64> = mesh
        .faces()
        .iter()
        .map(|&t| {
            let c = barycenter(&pos, t);
            let doubled = 2.0 * k * c[1].atan2(c[0]) + shift;
            to_face_frame(&pos, t, doubled / 2.0)
        })
        .collect();
    Ok(LineField::from_line_angles(&line).expect("finite"))
}

pub fn random_line_field(mesh: &Mesh, seed: u64) -> LineField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = (0..mesh.face_count()).map(|_| rng.gen_range(0.0..TAU)).collect();
    LineField::from_doubled(phi).expect("finite")
}

pub fn random_vector_field(mesh: &Mesh, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = (0..mesh.face_count()).map(|_| rng.gen_range(0.0..TAU)).collect();
    VectorField::new(theta).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{line_field_indices, vector_field_indices};
    use crate::mesh::OrientationResult;

    fn key(s: &str) -> CatalogKey {
        CatalogKey::parse(s).unwrap()
    }

    fn mesh(s: &str) -> Mesh {
        generate_mesh(&key(s)).unwrap()
    }

    #[test]
    fn key_parsing() {
        let k = key("disk_fan:rings=6, sectors=12");
        assert_eq!(k.name, "disk_fan");
        assert_eq!(k.params["sectors"], "12");
        assert!(CatalogKey::parse("x:a").is_err());
        assert!(CatalogKey::parse("x:a=1,a=2").is_err());
        assert_eq!(parse_fraction("-1/2"), Some(-0.5));
    }

    #[test]
    fn unknown_and_out_of_range() {
        assert_eq!(generate_mesh(&key("cube")).unwrap_err().code(), "BAD_PARAMS");
        assert_eq!(generate_mesh(&key("icosphere:n=9")).unwrap_err().code(), "BAD_PARAMS");
        assert_eq!(generate_mesh(&key("icosphere:m=1")).unwrap_err().code(), "BAD_PARAMS");
        assert_eq!(generate_mesh(&key("torus_grid:a=4,b=5")).unwrap_err().code(), "BAD_PARAMS");
        assert_eq!(generate_mesh(&key("disk_fan:rings=x")).unwrap_err().code(), "BAD_PARAMS");
    }

    #[test]
    fn euler_characteristics() {
        let cases = [
            ("icosphere:n=0", 2, (12, 30, 20)),
            ("icosphere:n=1", 2, (42, 120, 80)),
            ("torus_grid:a=4,b=4", 0, (16, 48, 32)),
            ("klein_grid:a=4,b=4", 0, (16, 48, 32)),
            ("rp2_minimal", 1, (6, 15, 10)),
            ("disk_fan:rings=6,sectors=12", 1, (73, 204, 132)),
            ("annulus_grid:a=8,b=2", 0, (24, 56, 32)),
            ("torus7", 0, (7, 21, 14)),
        ];
        for (name, chi, (v, e, f)) in cases {
            let m = mesh(name);
            assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (v, e, f), "{name}");
            assert_eq!(m.euler_characteristic(), chi, "{name}");
        }
    }

    #[test]
    fn lattice_grids_are_flat() {
        for name in ["torus_grid:a=4,b=4", "klein_grid:a=5,b=6"] {
            let m = mesh(name);
            for v in 0..m.vertex_count() {
                assert_eq!(m.vertex_star(v).len(), 6, "{name} vertex {v}");
            }
        }
        assert!(matches!(
            mesh("klein_grid:a=4,b=4").orientability(),
            OrientationResult::NonOrientable { .. }
        ));
    }

    #[test]
    fn icosahedron_faces_are_outward() {
        let faces = icosahedron_faces();
        assert_eq!(faces.len(), 20);
        let m = icosphere(0);
        assert!(m.orientability().is_orientable());
        let pos = m.positions().unwrap();
        for t in m.faces() {
            let n = cross(sub(pos[t[1]], pos[t[0]]), sub(pos[t[2]], pos[t[0]]));
            assert!(dot3(n, pos[t[0]]) > 0.0);
        }
    }

    #[test]
    fn planar_meshes_are_counterclockwise() {
        for name in ["disk_fan:rings=3,sectors=7", "annulus_grid:a=9,b=3"] {
            let m = mesh(name);
            let p = m.positions().unwrap();
            for t in m.faces() {
                assert!(cross(sub(p[t[1]], p[t[0]]), sub(p[t[2]], p[t[0]]))[2] > 0.0);
            }
        }
    }

    #[test]
    fn antipodal_maps_are_involutions() {
        let m = icosphere(2);
        let (v, f) = antipodal_maps(&m).unwrap();
        assert!((0..v.len()).all(|i| v[v[i]] == i && v[i] != i));
        assert!((0..f.len()).all(|i| f[f[i]] == i && f[i] != i));
        assert!(antipodal_maps(&mesh("disk_fan:rings=2,sectors=6")).is_none());
    }

    #[test]
    fn spread_vertices_are_far_apart() {
        let m = icosphere(3);
        let picked = spread_vertices(&m, 4);
        assert_eq!(picked.len(), 4);
        let nbrs = m.vertex_neighbors();
        for &a in &picked {
            let d = graph_distances(&nbrs, a);
            for &b in &picked {
                if a != b {
                    assert!(d[b] >= 6, "{a} {b} {}", d[b]);
                }
            }
        }
    }

    #[test]
    fn constant_fields() {
        for name in ["torus_grid:a=4,b=4", "klein_grid:a=4,b=4", "torus7"] {
            let m = mesh(name);
            let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
            let f = constant_line_field(&m, &c).unwrap();
            let r = line_field_indices(&m, &c, &f).unwrap();
            assert_eq!(r.defects().count(), 0, "{name}");
            // parallel: every crossing is exact
            for g in 0..m.face_count() {
                for k in 0..3 {
                    let t = m.twin(g, k).unwrap();
                    let moved = c.transport_line(g, k, f.doubled()[g]).unwrap();
                    assert!(principal(moved - f.doubled()[t.face]).abs() < 1e-9);
                }
            }
        }
        let s = icosphere(0);
        let c = Connection::for_mode(&s, MetricMode::Equilateral).unwrap();
        assert_eq!(constant_line_field(&s, &c).unwrap_err().code(), "HOLONOMY_OBSTRUCTION");
    }

    #[test]
    fn two_pole_is_antipodally_symmetric() {
        let m = icosphere(1);
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        let f = two_pole(&m, &c).unwrap();
        let r = line_field_indices(&m, &c, &f).unwrap();
        let (n, s) = two_pole_vertices(&m);
        let d: Vec<_> = r.defects().map(|x| (x.vertex, x.p)).collect();
        assert_eq!(d, vec![(n.min(s), 2), (n.max(s), 2)]);
        let (vm, fm) = antipodal_maps(&m).unwrap();
        let pulled = crate::cover::pull_back(&m, &c, &f, &vm, &fm).unwrap();
        for (p, x) in pulled.iter().zip(f.doubled()) {
            assert!(principal(p - x).abs() < 1e-9);
        }
    }

    #[test]
    fn rp2_radial_single_defect() {
        let m = rp2_minimal();
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        let f = rp2_radial(&m).unwrap();
        let r = line_field_indices(&m, &c, &f).unwrap();
        let d: Vec<_> = r.defects().map(|x| x.p).collect();
        assert_eq!(d, vec![2]);
        assert_eq!(r.sum_p, 2);
        assert_eq!(rp2_radial(&icosphere(0)).unwrap_err().code(), "BAD_TOPOLOGY");
    }

    #[test]
    fn defect_patches() {
        let m = mesh("disk_fan:rings=6,sectors=12");
        let c = Connection::for_mode(&m, MetricMode::Planar).unwrap();
        for (k, p) in [(1.0, 2), (0.5, 1), (-0.5, -1), (-1.0, -2), (1.5, 3)] {
            for circular in [false, true] {
                let f = defect_patch(&m, k, circular).unwrap();
                let r = line_field_indices(&m, &c, &f).unwrap();
                assert_eq!(r.at(0).unwrap().p, p);
                assert_eq!(r.defects().count(), 1);
            }
        }
        assert_eq!(
            generate_field(&key("defect_patch:k=0.3"), &m, &c).unwrap_err().code(),
            "BAD_PARAMS"
        );
        let ico = icosphere(0);
        let ic = Connection::for_mode(&ico, MetricMode::Equilateral).unwrap();
        assert_eq!(
            generate_field(&key("defect_patch:k=1"), &ico, &ic).unwrap_err().code(),
            "BAD_TOPOLOGY"
        );
    }

    #[test]
    fn radial_disk_kinds() {
        let m = mesh("disk_fan:rings=4,sectors=10");
        let c = Connection::for_mode(&m, MetricMode::Planar).unwrap();
        let Field::Vector(v) = generate_field(&key("radial_disk:kind=vector"), &m, &c).unwrap()
        else {
            panic!()
        };
        let r = vector_field_indices(&m, &c, &v).unwrap();
        assert_eq!(r.sum_ind, Some(1));
        let Field::Line(l) = generate_field(&key("radial_disk"), &m, &c).unwrap() else {
            panic!()
        };
        assert!(crate::fields::non_normal_faces(&m, &c, &l).is_empty());
    }

    #[test]
    fn random_fields_are_reproducible() {
        let m = icosphere(1);
        assert_eq!(random_line_field(&m, 7), random_line_field(&m, 7));
        assert_ne!(random_line_field(&m, 7), random_line_field(&m, 8));
    }
}
