//! ASCII OFF reader and writer (triangles only).

use std::fmt::Write as _;

use super::{Mesh, MeshError};

/// Parses an OFF document. Positions are kept on the returned mesh.
///
/// Accepts `#` comments, blank lines, and counts either on the header line
/// (`OFF 12 20 30`) or on the following line.
pub fn parse_off(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or(MeshError::Parse {
        line: 1,
        message: "empty input".into(),
    })?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("OFF") {
        return Err(MeshError::Parse {
            line: line_no,
            message: "expected OFF header".into(),
        });
    }
    let mut counts: Vec<(usize, &str)> = tokens.map(|t| (line_no, t)).collect();
    if counts.is_empty() {
        let (n, l) = lines.next().ok_or(MeshError::Parse {
            line: line_no + 1,
            message: "missing counts".into(),
        })?;
        counts = l.split_whitespace().map(|t| (n, t)).collect();
    }
    if counts.len() < 2 {
        return Err(MeshError::Parse {
            line: counts.first().map_or(line_no, |c| c.0),
            message: "expected vertex and face counts".into(),
        });
    }
    let nv: usize = parse_token(counts[0])?;
    let nf: usize = parse_token(counts[1])?;

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines.next().ok_or(MeshError::Parse {
            line: line_no,
            message: format!("expected {nv} vertices"),
        })?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(|t| parse_token((n, t)))
            .collect::<Result<_, _>>()?;
        if coords.len() < 3 {
            return Err(MeshError::Parse {
                line: n,
                message: "vertex needs three coordinates".into(),
            });
        }
        positions.push([coords[0], coords[1], coords[2]]);
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines.next().ok_or(MeshError::Parse {
            line: line_no,
            message: format!("expected {nf} faces"),
        })?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| parse_token((n, t)))
            .collect::<Result<_, _>>()?;
        let Some((&arity, rest)) = ids.split_first() else {
            return Err(MeshError::Parse {
                line: n,
                message: "empty face".into(),
            });
        };
        if arity != 3 {
            return Err(MeshError::NonTriangular { line: n, arity });
        }
        if rest.len() < 3 {
            return Err(MeshError::Parse {
                line: n,
                message: "face lists fewer than three vertices".into(),
            });
        }
        faces.push([rest[0], rest[1], rest[2]]);
    }
    if let Some((n, _)) = lines.next() {
        return Err(MeshError::Parse {
            line: n,
            message: "trailing content".into(),
        });
    }

    Ok(Mesh::build(nv, faces)?.with_positions(positions))
}

fn parse_token<T: std::str::FromStr>((line, tok): (usize, &str)) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("cannot parse {tok:?}"),
    })
}

/// Writes the mesh as OFF. Vertices without positions are written at the origin.
pub fn write_off(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edge_count()
    );
    for v in 0..mesh.vertex_count() {
        let p = mesh.positions().map_or([0.0; 3], |p| p[v]);
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    for t in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle() {
        let m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (3, 1));
        assert_eq!(m.positions().unwrap()[1], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn header_counts_and_comments() {
        let m = parse_off("# tri\nOFF 3 1 0\n0 0 0\n1 0 0 # x\n\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(m.face_count(), 1);
    }

    #[test]
    fn quad_is_rejected() {
        let e = parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n").unwrap_err();
        assert_eq!(e, MeshError::NonTriangular { line: 7, arity: 4 });
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_off("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n").unwrap_err();
        assert!(matches!(e, MeshError::Parse { line: 4, .. }));
        assert!(matches!(parse_off("PLY\n"), Err(MeshError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 0\n"),
            Err(MeshError::Parse { .. })
        ));
    }
}
