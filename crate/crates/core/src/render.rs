//! SVG figures of planar line and vector fields.

use std::fmt::Write as _;

use thiserror::Error;

use crate::fields::{DefectReport, Field};
use crate::mesh::Mesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("rendering needs planar vertex positions")]
    NoPositions,
    #[error("field has {got} angles but the mesh has {expected} faces")]
    FaceCount { expected: usize, got: usize },
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::NoPositions => "NO_POSITIONS",
            RenderError::FaceCount { .. } => "BAD_FIELD",
        }
    }
}

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// One segment per face through its barycenter (an arrow-less segment for
/// line fields, a segment with a dot at its head for vector fields), plus a
/// labelled circle at every defect of `report`.
pub fn render_svg(
    mesh: &Mesh,
    field: &Field,
    report: Option<&DefectReport>,
) -> Result<String, RenderError> {
    if !mesh.is_planar() {
        return Err(RenderError::NoPositions);
    }
    if field.len() != mesh.face_count() {
        return Err(RenderError::FaceCount {
            expected: mesh.face_count(),
            got: field.len(),
        });
    }
    let pos: Vec<[f64; 2]> = mesh.positions().unwrap().iter().map(|p| [p[0], p[1]]).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pos {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let height = (hi[1] - lo[1]) * scale + 2.0 * MARGIN;
    let to_svg = |p: [f64; 2]| {
        [
            MARGIN + (p[0] - lo[0]) * scale,
            MARGIN + (hi[1] - p[1]) * scale,
        ]
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r##"<g fill="none" stroke="#cccccc" stroke-width="0.5">"##);
    for t in mesh.faces() {
        let [a, b, c] = t.map(|v| to_svg(pos[v]));
        let _ = writeln!(
            out,
            r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}"/>"#,
            a[0], a[1], b[0], b[1], c[0], c[1]
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g stroke="#1f4e79" stroke-width="1.5" stroke-linecap="round">"##);
    let mut heads = Vec::new();
    for (f, &t) in mesh.faces().iter().enumerate() {
        let (p0, p1, p2) = (pos[t[0]], pos[t[1]], pos[t[2]]);
        let c = [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0];
        let base = (p1[1] - p0[1]).atan2(p1[0] - p0[0]);
        let ccw = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]) > 0.0;
        let local = match field {
            Field::Line(l) => l.line_angle(f),
            Field::Vector(v) => v.angles()[f],
        };
        let g = if ccw { base + local } else { base - local };
        let edge = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let half = 0.3 * (edge(p0, p1) + edge(p1, p2) + edge(p2, p0)) / 3.0;
        let a = to_svg([c[0] - half * g.cos(), c[1] - half * g.sin()]);
        let b = to_svg([c[0] + half * g.cos(), c[1] + half * g.sin()]);
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            a[0], a[1], b[0], b[1]
        );
        if matches!(field, Field::Vector(_)) {
            heads.push(b);
        }
    }
    let _ = writeln!(out, "</g>");
    if !heads.is_empty() {
        let _ = writeln!(out, r##"<g fill="#1f4e79">"##);
        for h in heads {
            let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5"/>"#, h[0], h[1]);
        }
        let _ = writeln!(out, "</g>");
    }

    if let Some(report) = report {
        let _ = writeln!(
            out,
            r##"<g font-family="sans-serif" font-size="14" fill="#b00020">"##
        );
        for d in report.defects() {
            let p = to_svg(pos[d.vertex]);
            let _ = writeln!(
                out,
                r##"<g class="defect"><circle cx="{:.3}" cy="{:.3}" r="6" fill="none" stroke="#b00020" stroke-width="2"/><text x="{:.3}" y="{:.3}">{}</text></g>"##,
                p[0],
                p[1],
                p[0] + 8.0,
                p[1] - 8.0,
                d.hopf
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
