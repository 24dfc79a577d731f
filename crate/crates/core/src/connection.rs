//! Discrete metric and transport.
//!
//! Each face is an abstract Euclidean triangle given by its three corner
//! angles. Carrying a direction from one face to its neighbour unfolds the two
//! triangles into a common plane across the shared edge; the resulting change
//! of frame angle is `ρ`. When the two stored frames have opposite handedness
//! the change is a reflection rather than a rotation.
//!
//! Sign convention: a direction with angle `a` in face `f` has angle
//! `a + ρ` (frames agree) or `ρ - a` (frames disagree) in the neighbour.
//! With this convention the rotations composed around an interior vertex,
//! taken in walk coordinates, add up to `+Ω_v` modulo 2π, where
//! `Ω_v = 2π - Σ corner angles` is the angle defect.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use thiserror::Error;

use crate::angle::principal;
use crate::mesh::{Mesh, StarEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error("mesh has no positions for planar corner angles")]
    NoPositions,
    #[error("positions are not planar (vertex {vertex} has z = {z})")]
    NotPlanar { vertex: usize, z: f64 },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateTriangle { face: usize, area: f64 },
    #[error("corner angles of face {face} are invalid: {reason}")]
    InvalidAngles { face: usize, reason: String },
}

impl ConnectionError {
    pub fn code(&self) -> &'static str {
        match self {
            ConnectionError::NoPositions | ConnectionError::NotPlanar { .. } => "NO_POSITIONS",
            ConnectionError::DegenerateTriangle { .. } => "DEGENERATE_TRIANGLE",
            ConnectionError::InvalidAngles { .. } => "INVALID_ANGLES",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MetricMode {
    /// Every corner is π/3.
    #[default]
    Equilateral,
    /// Euclidean corner angles of the stored 2D positions.
    Planar,
}

const MIN_AREA: f64 = 1e-12;
const ANGLE_SUM_TOLERANCE: f64 = 1e-9;

/// Corner angle per (face, corner), in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerAngles {
    angles: Vec<[f64; 3]>,
}

impl CornerAngles {
    pub fn equilateral(mesh: &Mesh) -> CornerAngles {
        CornerAngles {
            angles: vec![[FRAC_PI_3; 3]; mesh.face_count()],
        }
    }

    pub fn planar(mesh: &Mesh) -> Result<CornerAngles, ConnectionError> {
        let pos = mesh.positions().ok_or(ConnectionError::NoPositions)?;
        if let Some((vertex, p)) = pos.iter().enumerate().find(|(_, p)| p[2] != 0.0) {
            return Err(ConnectionError::NotPlanar { vertex, z: p[2] });
        }
        let mut angles = Vec::with_capacity(mesh.face_count());
        for (f, tri) in mesh.faces().iter().enumerate() {
            let p = tri.map(|v| [pos[v][0], pos[v][1]]);
            let cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
            let area = 0.5 * cross.abs();
            if area < MIN_AREA {
                return Err(ConnectionError::DegenerateTriangle { face: f, area });
            }
            let mut a = [0.0; 3];
            for (i, slot) in a.iter_mut().enumerate() {
                let o = p[i];
                let u = [p[(i + 1) % 3][0] - o[0], p[(i + 1) % 3][1] - o[1]];
                let w = [p[(i + 2) % 3][0] - o[0], p[(i + 2) % 3][1] - o[1]];
                let c = (u[0] * w[1] - u[1] * w[0]).abs();
                let d = u[0] * w[0] + u[1] * w[1];
                *slot = c.atan2(d);
            }
            angles.push(a);
        }
        Ok(CornerAngles { angles })
    }

    pub fn for_mode(mesh: &Mesh, mode: MetricMode) -> Result<CornerAngles, ConnectionError> {
        match mode {
            MetricMode::Equilateral => Ok(CornerAngles::equilateral(mesh)),
            MetricMode::Planar => CornerAngles::planar(mesh),
        }
    }

    /// Wraps externally computed angles after checking positivity and the π sum.
    pub fn from_raw(angles: Vec<[f64; 3]>) -> Result<CornerAngles, ConnectionError> {
        for (face, a) in angles.iter().enumerate() {
            if a.iter().any(|x| !x.is_finite() || *x <= 0.0) {
                return Err(ConnectionError::InvalidAngles {
                    face,
                    reason: "non-positive angle".into(),
                });
            }
            let s: f64 = a.iter().sum();
            if (s - PI).abs() > ANGLE_SUM_TOLERANCE {
                return Err(ConnectionError::InvalidAngles {
                    face,
                    reason: format!("angles sum to {s}"),
                });
            }
        }
        Ok(CornerAngles { angles })
    }

    pub fn face(&self, f: usize) -> [f64; 3] {
        self.angles[f]
    }

    pub fn corner(&self, f: usize, k: usize) -> f64 {
        self.angles[f][k]
    }

    pub fn as_slice(&self) -> &[[f64; 3]] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Frame angle of the direction from corner `from` to corner `to` of face `f`.
    pub fn edge_direction(&self, f: usize, from: usize, to: usize) -> f64 {
        edge_direction(self.angles[f], from, to)
    }
}

/// Frame angle of the edge `from -> to` in a triangle with the given corner
/// angles (frame: corner 0 towards corner 1, positive towards corner 2).
pub fn edge_direction(a: [f64; 3], from: usize, to: usize) -> f64 {
    match (from, to) {
        (0, 1) => 0.0,
        (0, 2) => a[0],
        (1, 0) => PI,
        (1, 2) => PI - a[1],
        (2, 0) => PI + a[0],
        (2, 1) => TAU - a[1],
        _ => panic!("edge_direction: invalid corner pair ({from}, {to})"),
    }
}

/// Transport rotations, frame agreement and curvature of a mesh.
#[derive(Clone, Debug)]
pub struct Connection {
    angles: CornerAngles,
    rho: Vec<[Option<f64>; 3]>,
    agree: Vec<[Option<bool>; 3]>,
    defect: Vec<f64>,
    boundary: Vec<bool>,
    euler: i64,
}

impl Connection {
    pub fn build(mesh: &Mesh, angles: CornerAngles) -> Connection {
        assert_eq!(angles.len(), mesh.face_count(), "one angle triple per face");
        let n = mesh.face_count();
        let mut rho = vec![[None; 3]; n];
        let mut agree = vec![[None; 3]; n];
        for f in 0..n {
            for k in 0..3 {
                let Some(t) = mesh.twin(f, k) else { continue };
                let same = mesh.frames_agree(f, k).unwrap();
                // shared edge x -> y is corner k -> k+1 of f
                let d_f = angles.edge_direction(f, k, (k + 1) % 3);
                let m = t.side;
                let r = if same {
                    let d_g = angles.edge_direction(t.face, (m + 1) % 3, m);
                    d_g - d_f
                } else {
                    let d_g = angles.edge_direction(t.face, m, (m + 1) % 3);
                    d_f + d_g
                };
                rho[f][k] = Some(principal(r));
                agree[f][k] = Some(same);
            }
        }

        let mut sums = vec![0.0; mesh.vertex_count()];
        for (f, tri) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                sums[tri[k]] += angles.corner(f, k);
            }
        }
        let boundary: Vec<bool> = (0..mesh.vertex_count())
            .map(|v| mesh.is_boundary_vertex(v))
            .collect();
        let defect = sums
            .iter()
            .zip(&boundary)
            .map(|(s, &b)| if b { PI - s } else { TAU - s })
            .collect();

        Connection {
            angles,
            rho,
            agree,
            defect,
            boundary,
            euler: mesh.euler_characteristic(),
        }
    }

    /// Equilateral or planar connection in one call.
    pub fn for_mode(mesh: &Mesh, mode: MetricMode) -> Result<Connection, ConnectionError> {
        Ok(Connection::build(mesh, CornerAngles::for_mode(mesh, mode)?))
    }

    pub fn angles(&self) -> &CornerAngles {
        &self.angles
    }

    /// Rotation across side `k` of face `f`, in `(-π, π]`.
    pub fn rho(&self, f: usize, k: usize) -> Option<f64> {
        self.rho[f][k]
    }

    /// Orientation-agreement sign across side `k` of face `f`.
    pub fn orientation_sign(&self, f: usize, k: usize) -> Option<i8> {
        self.agree[f][k].map(|a| if a { 1 } else { -1 })
    }

    pub fn frames_agree(&self, f: usize, k: usize) -> Option<bool> {
        self.agree[f][k]
    }

    /// Angle defect Ω_v for interior vertices, boundary turning κ_v otherwise.
    pub fn curvature(&self, v: usize) -> f64 {
        self.defect[v]
    }

    pub fn angle_defect(&self, v: usize) -> Option<f64> {
        (!self.boundary[v]).then_some(self.defect[v])
    }

    pub fn boundary_turning(&self, v: usize) -> Option<f64> {
        self.boundary[v].then_some(self.defect[v])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.euler
    }

    /// Carries a vector angle across side `k` of face `f`.
    pub fn transport_vector(&self, f: usize, k: usize, angle: f64) -> Option<f64> {
        let r = self.rho[f][k]?;
        Some(if self.agree[f][k]? { angle + r } else { r - angle })
    }

    /// Carries a doubled line angle across side `k` of face `f`.
    pub fn transport_line(&self, f: usize, k: usize, doubled: f64) -> Option<f64> {
        let r = self.rho[f][k]?;
        Some(if self.agree[f][k]? {
            doubled + 2.0 * r
        } else {
            2.0 * r - doubled
        })
    }

    /// Rotation from `entry` to the next star entry in walk coordinates.
    pub fn walk_rotation(&self, entry: &StarEntry, next: &StarEntry) -> f64 {
        let r = self.rho[entry.face][entry.exit_side].expect("interior crossing");
        if next.flip {
            -r
        } else {
            r
        }
    }

    /// Composed walk rotation around an interior vertex, in `(-π, π]`.
    pub fn star_holonomy(&self, mesh: &Mesh, v: usize) -> Option<f64> {
        let star = mesh.vertex_star(v);
        if !star.cyclic {
            return None;
        }
        let n = star.len();
        let total: f64 = (0..n)
            .map(|j| self.walk_rotation(&star.entries[j], &star.entries[(j + 1) % n]))
            .sum();
        Some(principal(total))
    }
}

/// |Σ Ω_v + Σ κ_v − 2πχ|.
pub fn gauss_bonnet_residual(conn: &Connection) -> f64 {
    let total: f64 = conn.defect.iter().sum();
    (total - TAU * conn.euler as f64).abs()
}
