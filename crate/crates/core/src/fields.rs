//! Per-face vector and line fields and their vertex indices.
//!
//! Index engines walk the star of each interior vertex in walk coordinates
//! (faces whose stored frame turns against the walk have their angles
//! negated). Between consecutive faces the field turns, relative to transport,
//! by the principal value of the frame difference; the turns plus the angle
//! defect add up to a whole number of revolutions.
//!
//! The normal indices measure the field against the outward direction of the
//! star loop. Inside each face that direction is the corner bisector, and
//! between two faces it sweeps half of each corner angle. The field's turn is
//! taken as the principal value relative to this sweep.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{near_cut, principal, round_turns, wrap_positive, ROUNDING_TOLERANCE};
use crate::connection::{edge_direction, Connection};
use crate::mesh::{DoubleMap, Mesh, VertexStar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field has {got} angles but the mesh has {expected} faces")]
    FaceCount { expected: usize, got: usize },
    #[error("angle of face {face} is not finite")]
    NonFinite { face: usize },
    #[error("increment at vertex {vertex} leaving face {face} is within the branch-cut margin")]
    BranchCut { vertex: usize, face: usize },
    #[error("winding sum at vertex {vertex} is {residual:e} away from an integer")]
    Rounding { vertex: usize, residual: f64 },
    #[error("field is not normal to the boundary in faces {faces:?}")]
    NotNormal { faces: Vec<usize> },
    #[error("field file: {0}")]
    Format(String),
}

impl FieldError {
    pub fn code(&self) -> &'static str {
        match self {
            FieldError::FaceCount { .. } | FieldError::NonFinite { .. } => "BAD_FIELD",
            FieldError::BranchCut { .. } => "BRANCH_CUT",
            FieldError::Rounding { .. } => "ROUNDING",
            FieldError::NotNormal { .. } => "NOT_NORMAL",
            FieldError::Format(_) => "PARSE_ERROR",
        }
    }
}

/// One angle per face, in `[0, 2π)`, in the face's stored frame.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    angles: Vec<f64>,
}

/// Doubled angle `φ ∈ [0, 2π)` per face; the line itself points along `φ/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineField {
    doubled: Vec<f64>,
}

fn checked(values: Vec<f64>) -> Result<Vec<f64>, FieldError> {
    values
        .into_iter()
        .enumerate()
        .map(|(face, x)| {
            if x.is_finite() {
                Ok(wrap_positive(x))
            } else {
                Err(FieldError::NonFinite { face })
            }
        })
        .collect()
}

impl VectorField {
    pub fn new(angles: Vec<f64>) -> Result<VectorField, FieldError> {
        Ok(VectorField {
            angles: checked(angles)?,
        })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

impl LineField {
    pub fn from_doubled(doubled: Vec<f64>) -> Result<LineField, FieldError> {
        Ok(LineField {
            doubled: checked(doubled)?,
        })
    }

    /// Builds a line field from representative line angles (any of θ, θ + π).
    pub fn from_line_angles(angles: &[f64]) -> Result<LineField, FieldError> {
        LineField::from_doubled(angles.iter().map(|a| 2.0 * a).collect())
    }

    pub fn doubled(&self) -> &[f64] {
        &self.doubled
    }

    /// Canonical line angle `φ/2 ∈ [0, π)` of face `f`.
    pub fn line_angle(&self, f: usize) -> f64 {
        self.doubled[f] / 2.0
    }

    pub fn len(&self) -> usize {
        self.doubled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    /// Adds `c` to every doubled angle.
    pub fn rotated(&self, c: f64) -> LineField {
        LineField {
            doubled: self.doubled.iter().map(|x| wrap_positive(x + c)).collect(),
        }
    }
}

/// Either kind of field, as stored in field files.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Line(LineField),
    Vector(VectorField),
}

impl Field {
    pub fn kind(&self) -> FieldKind {
        match self {
            Field::Line(_) => FieldKind::Line,
            Field::Vector(_) => FieldKind::Vector,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Field::Line(l) => l.len(),
            Field::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The line field spanned by this field.
    pub fn to_line(&self) -> LineField {
        match self {
            Field::Line(l) => l.clone(),
            Field::Vector(v) => line_field_of_vector_field(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Line,
    Vector,
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    format: String,
    kind: FieldKind,
    face_count: usize,
    angles: Vec<f64>,
}

const FIELD_FORMAT: &str = "linefield-v1";

impl Field {
    /// `linefield-v1` JSON. Line fields store doubled angles.
    pub fn to_json(&self) -> String {
        let (kind, angles) = match self {
            Field::Line(l) => (FieldKind::Line, l.doubled.clone()),
            Field::Vector(v) => (FieldKind::Vector, v.angles.clone()),
        };
        let file = FieldFile {
            format: FIELD_FORMAT.into(),
            kind,
            face_count: angles.len(),
            angles,
        };
        serde_json::to_string_pretty(&file).expect("field serializes")
    }

    pub fn from_json(text: &str) -> Result<Field, FieldError> {
        let file: FieldFile =
            serde_json::from_str(text).map_err(|e| FieldError::Format(e.to_string()))?;
        if file.format != FIELD_FORMAT {
            return Err(FieldError::Format(format!(
                "unsupported format {:?}",
                file.format
            )));
        }
        if file.face_count != file.angles.len() {
            return Err(FieldError::FaceCount {
                expected: file.face_count,
                got: file.angles.len(),
            });
        }
        Ok(match file.kind {
            FieldKind::Line => Field::Line(LineField::from_doubled(file.angles)?),
            FieldKind::Vector => Field::Vector(VectorField::new(file.angles)?),
        })
    }
}

/// φ = 2θ.
pub fn line_field_of_vector_field(v: &VectorField) -> LineField {
    LineField {
        doubled: v.angles.iter().map(|a| wrap_positive(2.0 * a)).collect(),
    }
}

/// Indices at one interior vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexIndex {
    pub vertex: usize,
    /// Projective index (twice the Hopf index).
    pub p: i64,
    pub p_perp: i64,
    pub hopf_numerator: i64,
    /// Hopf index as text, e.g. `+1/2`, `-1`, `0`.
    pub hopf: String,
    pub orientable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ind: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ind_perp: Option<i64>,
    pub residual: f64,
}

/// Renders `p/2` as `+1/2`, `-1`, `0`.
pub fn hopf_label(p: i64) -> String {
    if p == 0 {
        "0".into()
    } else if p % 2 == 0 {
        format!("{:+}", p / 2)
    } else {
        format!("{p:+}/2")
    }
}

/// Indices of a field at every interior vertex plus totals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub kind: FieldKind,
    pub chi: i64,
    pub sum_p: i64,
    pub two_chi: i64,
    #[serde(rename = "match")]
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_ind: Option<i64>,
    pub rounding_residual: f64,
    /// Interior vertices only, in vertex order.
    pub vertices: Vec<VertexIndex>,
}

impl DefectReport {
    /// Vertices with nonzero projective index.
    pub fn defects(&self) -> impl Iterator<Item = &VertexIndex> {
        self.vertices.iter().filter(|v| v.p != 0)
    }

    pub fn at(&self, vertex: usize) -> Option<&VertexIndex> {
        self.vertices
            .binary_search_by_key(&vertex, |v| v.vertex)
            .ok()
            .map(|i| &self.vertices[i])
    }

    /// Number of vertices with odd projective index.
    pub fn odd_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.p % 2 != 0).count()
    }

    /// JSON document with the full vertex table, the defect table and totals.
    pub fn to_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("report serializes");
        let defects: Vec<_> = self.defects().cloned().collect();
        value["defects"] = serde_json::to_value(defects).expect("defects serialize");
        value
    }
}

/// Winding sums of one star walk, in turns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarWinding {
    /// `(mult·Ω + Σ δ_j) / 2π`.
    pub turns: f64,
    /// Winding of the field against the outward normal.
    pub normal_turns: f64,
}

/// Walks `star` with per-face values `values` (vector angles for `mult = 1`,
/// doubled line angles for `mult = 2`).
pub fn star_winding(
    conn: &Connection,
    star: &VertexStar,
    values: &[f64],
    mult: f64,
) -> Result<StarWinding, FieldError> {
    assert!(star.cyclic, "star winding needs an interior vertex");
    let v = star.vertex;
    let n = star.len();
    let angles = conn.angles();
    let walk_value = |j: usize| {
        let e = &star.entries[j];
        let x = values[e.face];
        if e.flip {
            -x
        } else {
            x
        }
    };
    let bisector = |j: usize| {
        let e = &star.entries[j];
        let d = edge_direction(angles.face(e.face), e.corner, e.in_corner());
        let d = if e.flip { -d } else { d };
        d + angles.corner(e.face, e.corner) / 2.0
    };

    let mut turn = 0.0;
    let mut normal = 0.0;
    for j in 0..n {
        let k = (j + 1) % n;
        let (e, next) = (&star.entries[j], &star.entries[k]);
        let rho = conn.walk_rotation(e, next);
        let delta = principal(walk_value(k) - walk_value(j) - mult * rho);
        if near_cut(delta) {
            return Err(FieldError::BranchCut { vertex: v, face: e.face });
        }
        turn += delta;

        let sweep = mult
            * (angles.corner(e.face, e.corner) + angles.corner(next.face, next.corner))
            / 2.0;
        let psi_j = walk_value(j) - mult * bisector(j);
        let psi_k = walk_value(k) - mult * bisector(k);
        let rel = principal(psi_k - psi_j + sweep);
        if near_cut(rel) {
            return Err(FieldError::BranchCut { vertex: v, face: e.face });
        }
        normal += rel - sweep;
    }
    let omega = conn.curvature(v);
    Ok(StarWinding {
        turns: (mult * omega + turn) / TAU,
        normal_turns: normal / TAU,
    })
}

fn rounded(vertex: usize, turns: f64) -> Result<(i64, f64), FieldError> {
    let (n, residual) = round_turns(turns);
    if residual >= ROUNDING_TOLERANCE {
        return Err(FieldError::Rounding { vertex, residual });
    }
    Ok((n, residual))
}

fn check_len(mesh: &Mesh, n: usize) -> Result<(), FieldError> {
    if n != mesh.face_count() {
        return Err(FieldError::FaceCount {
            expected: mesh.face_count(),
            got: n,
        });
    }
    Ok(())
}

/// Line-field indices at one interior vertex using the given star walk.
pub fn line_index_at(
    conn: &Connection,
    field: &LineField,
    star: &VertexStar,
) -> Result<VertexIndex, FieldError> {
    let w = star_winding(conn, star, &field.doubled, 2.0)?;
    let (p, r1) = rounded(star.vertex, w.turns)?;
    let (p_perp, r2) = rounded(star.vertex, w.normal_turns)?;
    Ok(VertexIndex {
        vertex: star.vertex,
        p,
        p_perp,
        hopf_numerator: p,
        hopf: hopf_label(p),
        orientable: p % 2 == 0,
        ind: None,
        ind_perp: None,
        residual: r1.max(r2),
    })
}

/// Vector-field indices at one interior vertex using the given star walk.
pub fn vector_index_at(
    conn: &Connection,
    field: &VectorField,
    star: &VertexStar,
) -> Result<VertexIndex, FieldError> {
    let w = star_winding(conn, star, &field.angles, 1.0)?;
    let (ind, r1) = rounded(star.vertex, w.turns)?;
    let (ind_perp, r2) = rounded(star.vertex, w.normal_turns)?;
    let p = 2 * ind;
    Ok(VertexIndex {
        vertex: star.vertex,
        p,
        p_perp: 2 * ind_perp,
        hopf_numerator: p,
        hopf: hopf_label(p),
        orientable: true,
        ind: Some(ind),
        ind_perp: Some(ind_perp),
        residual: r1.max(r2),
    })
}

fn assemble(mesh: &Mesh, kind: FieldKind, vertices: Vec<VertexIndex>) -> DefectReport {
    let chi = mesh.euler_characteristic();
    let sum_p = vertices.iter().map(|v| v.p).sum();
    let sum_ind = match kind {
        FieldKind::Vector => Some(vertices.iter().filter_map(|v| v.ind).sum()),
        FieldKind::Line => None,
    };
    let rounding_residual = vertices.iter().map(|v| v.residual).fold(0.0, f64::max);
    DefectReport {
        kind,
        chi,
        sum_p,
        two_chi: 2 * chi,
        matches: sum_p == 2 * chi,
        sum_ind,
        rounding_residual,
        vertices,
    }
}

/// Index and normal index of a vector field at every interior vertex.
///
/// The projective entries of the report are those of the spanned line field
/// read through the vector field (`p = 2 ind`, `p⊥ = 2 ind⊥`).
pub fn vector_field_indices(
    mesh: &Mesh,
    conn: &Connection,
    field: &VectorField,
) -> Result<DefectReport, FieldError> {
    check_len(mesh, field.len())?;
    let vertices = mesh
        .interior_vertices()
        .map(|v| vector_index_at(conn, field, mesh.vertex_star(v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(mesh, FieldKind::Vector, vertices))
}

/// Projective and normal projective index at every interior vertex.
pub fn line_field_indices(
    mesh: &Mesh,
    conn: &Connection,
    field: &LineField,
) -> Result<DefectReport, FieldError> {
    check_len(mesh, field.len())?;
    let vertices = mesh
        .interior_vertices()
        .map(|v| line_index_at(conn, field, mesh.vertex_star(v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(mesh, FieldKind::Line, vertices))
}

/// Report for either kind of field.
pub fn field_indices(
    mesh: &Mesh,
    conn: &Connection,
    field: &Field,
) -> Result<DefectReport, FieldError> {
    match field {
        Field::Line(l) => line_field_indices(mesh, conn, l),
        Field::Vector(v) => vector_field_indices(mesh, conn, v),
    }
}

const NORMAL_TOLERANCE: f64 = 1e-6;

/// Faces whose line is not perpendicular to one of their boundary sides.
pub fn non_normal_faces(mesh: &Mesh, conn: &Connection, field: &LineField) -> Vec<usize> {
    let mut bad = Vec::new();
    for s in mesh.boundary_sides() {
        let d = conn
            .angles()
            .edge_direction(s.face, s.side, (s.side + 1) % 3);
        // line perpendicular to the edge: doubled angles differ by π
        let off = principal(field.doubled[s.face] - 2.0 * d - std::f64::consts::PI);
        if off.abs() > 2.0 * NORMAL_TOLERANCE && !bad.contains(&s.face) {
            bad.push(s.face);
        }
    }
    bad
}

/// Extends a boundary-normal line field to the double of its mesh.
///
/// The mirror copy of a face carries the reflected line, expressed in the
/// mirror's frame (corner order `[0, 2, 1]`).
pub fn mirror_field(
    original: &Mesh,
    conn: &Connection,
    map: &DoubleMap,
    field: &LineField,
) -> Result<LineField, FieldError> {
    check_len(original, field.len())?;
    let bad = non_normal_faces(original, conn, field);
    if !bad.is_empty() {
        return Err(FieldError::NotNormal { faces: bad });
    }
    let nf = original.face_count();
    let mut doubled = vec![0.0; 2 * nf];
    for f in 0..nf {
        let a0 = conn.angles().corner(f, 0);
        doubled[map.seam[f][0]] = field.doubled[f];
        doubled[map.seam[f][1]] = wrap_positive(2.0 * a0 - field.doubled[f]);
    }
    LineField::from_doubled(doubled)
}

/// Corner angles of the double, copied from the original with mirrored order.
pub fn mirror_angles(conn: &Connection, map: &DoubleMap) -> crate::CornerAngles {
    let nf = map.seam.len();
    let mut out = vec![[0.0; 3]; 2 * nf];
    for f in 0..nf {
        let a = conn.angles().face(f);
        out[map.seam[f][0]] = a;
        out[map.seam[f][1]] = DoubleMap::MIRROR_CORNERS.map(|c| a[c]);
    }
    crate::CornerAngles::from_raw(out).expect("mirrored angles stay valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, CatalogKey};
    use crate::connection::MetricMode;
    use std::f64::consts::PI;

    fn setup(name: &str, mode: MetricMode) -> (Mesh, Connection) {
        let m = catalog::generate_mesh(&CatalogKey::parse(name).unwrap()).unwrap();
        let c = Connection::for_mode(&m, mode).unwrap();
        (m, c)
    }

    #[test]
    fn hopf_labels() {
        assert_eq!(hopf_label(1), "+1/2");
        assert_eq!(hopf_label(-1), "-1/2");
        assert_eq!(hopf_label(2), "+1");
        assert_eq!(hopf_label(-4), "-2");
        assert_eq!(hopf_label(0), "0");
    }

    #[test]
    fn field_file_round_trip() {
        let f = Field::Line(LineField::from_doubled(vec![0.1, 6.0, 3.5]).unwrap());
        let back = Field::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
        let bad = r#"{"format":"linefield-v1","kind":"line","face_count":2,"angles":[0.0]}"#;
        assert!(matches!(Field::from_json(bad), Err(FieldError::FaceCount { .. })));
        let bad = r#"{"format":"other","kind":"line","face_count":0,"angles":[]}"#;
        assert!(matches!(Field::from_json(bad), Err(FieldError::Format(_))));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let (m, c) = setup("icosphere:n=0", MetricMode::Equilateral);
        let f = LineField::from_doubled(vec![0.0; 3]).unwrap();
        assert!(matches!(
            line_field_indices(&m, &c, &f),
            Err(FieldError::FaceCount { .. })
        ));
    }

    #[test]
    fn branch_cut_is_rejected() {
        // Flat torus: make one crossing turn by exactly π.
        let (m, c) = setup("torus_grid:a=4,b=4", MetricMode::Equilateral);
        let mut phi = vec![0.0; m.face_count()];
        let t = m.twin(0, 0).unwrap();
        let across = c.transport_line(0, 0, 0.0).unwrap();
        phi[t.face] = wrap_positive(across + PI);
        // keep everything else parallel to face 0 so only this crossing is ambiguous
        let l = LineField::from_doubled(phi).unwrap();
        assert!(matches!(
            line_field_indices(&m, &c, &l),
            Err(FieldError::BranchCut { .. })
        ));
    }

    #[test]
    fn radial_source_on_disk() {
        let (m, c) = setup("disk_fan:rings=4,sectors=12", MetricMode::Planar);
        let key = CatalogKey::parse("radial_disk:kind=vector").unwrap();
        let Field::Vector(v) = catalog::generate_field(&key, &m, &c).unwrap() else {
            panic!()
        };
        let r = vector_field_indices(&m, &c, &v).unwrap();
        let centre = r.at(0).unwrap();
        assert_eq!(centre.ind, Some(1));
        assert_eq!(centre.ind_perp, Some(0));
        for x in &r.vertices {
            assert_eq!(x.ind_perp.unwrap(), x.ind.unwrap() - 1);
        }
        let l = line_field_of_vector_field(&v);
        let lr = line_field_indices(&m, &c, &l).unwrap();
        assert_eq!(lr.at(0).unwrap().p, 2);
        assert_eq!(lr.sum_p, 2);
    }

    #[test]
    fn mirror_rejects_tangent_field() {
        let (m, c) = setup("disk_fan:rings=3,sectors=8", MetricMode::Planar);
        let (_, map) = m.double_along_boundary().unwrap();
        // line tangent to every boundary side: doubled angle = 2·edge direction
        let mut phi = vec![0.0; m.face_count()];
        for s in m.boundary_sides() {
            phi[s.face] = 2.0 * c.angles().edge_direction(s.face, s.side, (s.side + 1) % 3);
        }
        let l = LineField::from_doubled(phi).unwrap();
        assert!(matches!(
            mirror_field(&m, &c, &map, &l),
            Err(FieldError::NotNormal { .. })
        ));
    }
}
