//! Line fields with prescribed projective indices on a sphere.
//!
//! The turn of the field across each edge, relative to transport, is taken
//! from a graph potential `y`: solving `Σ_{u~v} (y_u − y_v) = 2π t_v − 2Ω_v`
//! makes the turns around every vertex add up to the requested index. The
//! field is then propagated face by face along a dual spanning tree.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::connection::Connection;
use crate::fields::{line_field_indices, FieldError, LineField};
use crate::mesh::{Mesh, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrescribeError {
    #[error("prescription needs a closed mesh with Euler characteristic 2 (got {chi}, closed: {closed})")]
    BadTopology { chi: i64, closed: bool },
    #[error("targets sum to {sum} but must sum to 2*chi = {expected}")]
    BadSum { sum: i64, expected: i64 },
    #[error("target vertex {vertex} is out of range")]
    InvalidVertex { vertex: usize },
    #[error("turn {jump:.6} across edge ({a}, {b}) is too close to pi; refine the mesh")]
    Overflow { a: usize, b: usize, jump: f64 },
    #[error("potential solve stalled with residual {residual:e}")]
    Solver { residual: f64 },
    #[error("prescribed field does not reproduce the targets: {0}")]
    Mismatch(String),
}

impl PrescribeError {
    pub fn code(&self) -> &'static str {
        match self {
            PrescribeError::BadTopology { .. } => "BAD_TOPOLOGY",
            PrescribeError::BadSum { .. } => "BAD_SUM",
            PrescribeError::InvalidVertex { .. } => "INVALID_VERTEX",
            PrescribeError::Overflow { .. } => "PRESCRIPTION_OVERFLOW",
            PrescribeError::Solver { .. } | PrescribeError::Mismatch(_) => "INTERNAL",
        }
    }
}

const OVERFLOW_MARGIN: f64 = 1e-6;

/// Builds a line field whose projective index is `targets[v]` at each listed
/// vertex and zero elsewhere. Repeated vertices add up.
pub fn prescribe_defects(
    mesh: &Mesh,
    conn: &Connection,
    targets: &[(usize, i64)],
) -> Result<LineField, PrescribeError> {
    let chi = mesh.euler_characteristic();
    if !mesh.is_closed() || chi != 2 {
        return Err(PrescribeError::BadTopology {
            chi,
            closed: mesh.is_closed(),
        });
    }
    let n = mesh.vertex_count();
    let mut t = vec![0i64; n];
    for &(v, p) in targets {
        if v >= n {
            return Err(PrescribeError::InvalidVertex { vertex: v });
        }
        t[v] += p;
    }
    let sum: i64 = t.iter().sum();
    if sum != 2 * chi {
        return Err(PrescribeError::BadSum {
            sum,
            expected: 2 * chi,
        });
    }

    let nbrs = mesh.vertex_neighbors();
    let b: Vec<f64> = (0..n)
        .map(|v| TAU * t[v] as f64 - 2.0 * conn.curvature(v))
        .collect();
    // L y = -b with L = D - A
    let rhs: Vec<f64> = b.iter().map(|x| -x).collect();
    let mut y = conjugate_gradient(&nbrs, &rhs)?;
    let y0 = y[0];
    for x in &mut y {
        *x -= y0;
    }

    for e in mesh.edges() {
        let [a, c] = e.vertices;
        let jump = y[c] - y[a];
        if jump.abs() >= PI - OVERFLOW_MARGIN {
            return Err(PrescribeError::Overflow { a, b: c, jump });
        }
    }

    let crossings = crossing_table(mesh);
    let mut phi = vec![0.0; mesh.face_count()];
    for (face, parent) in mesh.dual_spanning_tree() {
        let Some(p) = parent else { continue };
        let c = crossings[p.face][p.side].expect("every interior side has a crossing record");
        let moved = conn.transport_line(p.face, p.side, phi[p.face]).unwrap();
        phi[face] = moved + c.target_sign * c.direction * (y[c.far] - y[c.centre]);
    }
    let field = LineField::from_doubled(phi).expect("finite angles");

    let report = line_field_indices(mesh, conn, &field).map_err(|e| match e {
        FieldError::BranchCut { .. } | FieldError::Rounding { .. } => {
            PrescribeError::Mismatch(e.to_string())
        }
        other => PrescribeError::Mismatch(other.to_string()),
    })?;
    for r in &report.vertices {
        if r.p != t[r.vertex] {
            return Err(PrescribeError::Mismatch(format!(
                "vertex {} has p = {} instead of {}",
                r.vertex, r.p, t[r.vertex]
            )));
        }
    }
    Ok(field)
}

#[derive(Clone, Copy, Debug)]
struct Crossing {
    centre: usize,
    far: usize,
    /// +1 if the target face's frame follows the walk around `centre`.
    target_sign: f64,
    /// +1 when crossing in walk direction.
    direction: f64,
}

/// For every interior side, the star walk that crosses it and in which sense.
fn crossing_table(mesh: &Mesh) -> Vec<[Option<Crossing>; 3]> {
    let mut table = vec![[None; 3]; mesh.face_count()];
    let sign = |flip: bool| if flip { -1.0 } else { 1.0 };
    for v in mesh.interior_vertices() {
        let star = mesh.vertex_star(v);
        let n = star.len();
        for j in 0..n {
            let (e, next) = (star.entries[j], star.entries[(j + 1) % n]);
            let far = e.out_vertex(mesh);
            let fwd = Side::new(e.face, e.exit_side);
            let back = Side::new(next.face, next.entry_side);
            table[fwd.face][fwd.side].get_or_insert(Crossing {
                centre: v,
                far,
                target_sign: sign(next.flip),
                direction: 1.0,
            });
            table[back.face][back.side].get_or_insert(Crossing {
                centre: v,
                far,
                target_sign: sign(e.flip),
                direction: -1.0,
            });
        }
    }
    table
}

/// Solves `(D − A) y = rhs` for a connected graph with `Σ rhs = 0`.
fn conjugate_gradient(nbrs: &[Vec<usize>], rhs: &[f64]) -> Result<Vec<f64>, PrescribeError> {
    let n = rhs.len();
    let apply = |x: &[f64], out: &mut [f64]| {
        for v in 0..n {
            out[v] = nbrs[v].iter().map(|&u| x[v] - x[u]).sum();
        }
    };
    let mean = rhs.iter().sum::<f64>() / n as f64;
    let b: Vec<f64> = rhs.iter().map(|x| x - mean).collect();
    let norm_b = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * n).max(100) {
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot(&r, &r);
        if next.sqrt() <= 1e-14 * norm_b {
            break;
        }
        let beta = next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = next;
    }
    apply(&x, &mut ap);
    let residual = ap
        .iter()
        .zip(&b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(PrescribeError::Solver { residual });
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, CatalogKey};
    use crate::connection::MetricMode;

    fn sphere(n: u32) -> (Mesh, Connection) {
        let m = catalog::generate_mesh(&CatalogKey::parse(&format!("icosphere:n={n}")).unwrap())
            .unwrap();
        let c = Connection::for_mode(&m, MetricMode::Equilateral).unwrap();
        (m, c)
    }

    #[test]
    fn solver_matches_dense_residual() {
        // path graph 0-1-2, rhs (1, 0, -1): solution has y2 - y0 = 2
        let nbrs = vec![vec![1], vec![0, 2], vec![1]];
        let y = conjugate_gradient(&nbrs, &[1.0, 0.0, -1.0]).unwrap();
        assert!(((y[0] - y[2]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_poles_on_icosahedron() {
        let (m, c) = sphere(0);
        let f = prescribe_defects(&m, &c, &[(0, 2), (3, 2)]).unwrap();
        let r = line_field_indices(&m, &c, &f).unwrap();
        let defects: Vec<_> = r.defects().map(|d| (d.vertex, d.p)).collect();
        assert_eq!(defects, vec![(0, 2), (3, 2)]);
    }

    #[test]
    fn four_half_charges() {
        let (m, c) = sphere(2);
        let f = prescribe_defects(&m, &c, &[(0, 1), (3, 1), (5, 1), (8, 1)]).unwrap();
        let r = line_field_indices(&m, &c, &f).unwrap();
        assert_eq!(r.defects().count(), 4);
        assert_eq!(r.sum_p, 4);
    }

    #[test]
    fn rejects_bad_input() {
        let (m, c) = sphere(0);
        assert!(matches!(
            prescribe_defects(&m, &c, &[]),
            Err(PrescribeError::BadSum { sum: 0, expected: 4 })
        ));
        assert!(matches!(
            prescribe_defects(&m, &c, &[(0, 2)]),
            Err(PrescribeError::BadSum { .. })
        ));
        assert!(matches!(
            prescribe_defects(&m, &c, &[(99, 4)]),
            Err(PrescribeError::InvalidVertex { .. })
        ));
        let t = catalog::generate_mesh(&CatalogKey::parse("torus_grid:a=4,b=4").unwrap()).unwrap();
        let tc = Connection::for_mode(&t, MetricMode::Equilateral).unwrap();
        assert_eq!(
            prescribe_defects(&t, &tc, &[]).unwrap_err().code(),
            "BAD_TOPOLOGY"
        );
    }

    #[test]
    fn concentrated_charge_overflows() {
        let (m, c) = sphere(0);
        assert_eq!(
            prescribe_defects(&m, &c, &[(0, 4)]).unwrap_err().code(),
            "PRESCRIPTION_OVERFLOW"
        );
    }
}
