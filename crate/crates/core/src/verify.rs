//! Check harness: runs every index identity that applies to a field.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::connection::Connection;
use crate::cover::{branched_double_cover, cover_index_checks};
use crate::fields::{
    field_indices, mirror_angles, mirror_field, DefectReport, Field, FieldKind,
};
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Int(i64),
    Real(f64),
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Int(x) => write!(f, "{x}"),
            Quantity::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Quantity>,
    pub tolerance: f64,
    pub pass: bool,
    /// Informational checks are reported but never fail the run.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
}

impl Check {
    pub fn equal(name: &str, source: &str, lhs: i64, rhs: i64) -> Check {
        Check {
            name: name.into(),
            source: source.into(),
            lhs: Some(Quantity::Int(lhs)),
            rhs: Some(Quantity::Int(rhs)),
            tolerance: 0.0,
            pass: lhs == rhs,
            informational: false,
            cause: None,
        }
    }

    pub fn close(name: &str, source: &str, lhs: f64, rhs: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            source: source.into(),
            lhs: Some(Quantity::Real(lhs)),
            rhs: Some(Quantity::Real(rhs)),
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
            informational: false,
            cause: None,
        }
    }

    pub fn failed(name: &str, source: &str, cause: String) -> Check {
        Check {
            name: name.into(),
            source: source.into(),
            lhs: None,
            rhs: None,
            tolerance: 0.0,
            pass: false,
            informational: false,
            cause: Some(cause),
        }
    }
}

/// The (Σ p, 2χ − k) comparison, where k counts vertices of odd p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MarkusComparison {
    pub lhs: i64,
    pub rhs: i64,
    pub equal: bool,
}

impl MarkusComparison {
    pub fn of(report: &DefectReport) -> MarkusComparison {
        let lhs = report.sum_p;
        let rhs = report.two_chi - report.odd_count() as i64;
        MarkusComparison {
            lhs,
            rhs,
            equal: lhs == rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    /// True when the checks ran on the double of a mesh with boundary.
    pub doubled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markus: Option<MarkusComparison>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn from_checks(checks: Vec<Check>, markus: Option<MarkusComparison>, doubled: bool) -> Self {
        let pass = checks.iter().all(|c| c.pass || c.informational);
        VerificationReport {
            pass,
            doubled,
            markus,
            checks,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match (c.pass, c.informational) {
                (true, _) => "PASS",
                (false, true) => "INFO",
                (false, false) => "FAIL",
            };
            let _ = write!(out, "{status} {:<28}", c.name);
            match (&c.lhs, &c.rhs) {
                (Some(l), Some(r)) => {
                    let _ = write!(out, " {l} vs {r}");
                }
                _ => {}
            }
            if let Some(cause) = &c.cause {
                let _ = write!(out, " ({cause})");
            }
            let _ = writeln!(out, "  [{}]", c.source);
        }
        if let Some(m) = &self.markus {
            let _ = writeln!(
                out,
                "odd-defect formula: sum p = {}, 2 chi - k = {}, equal: {}",
                m.lhs, m.rhs, m.equal
            );
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

const SRC_LINE_PH: &str = "Poincare-Hopf for line fields: sum of projective indices = 2 chi";
const SRC_HOPF: &str = "Hopf's half-integer indices sum to chi";
const SRC_NORMAL_LINE: &str = "normal projective index = projective index - 2";
const SRC_NORMAL_VECTOR: &str = "normal index = index - 1 on a surface";
const SRC_VECTOR_PH: &str = "classical Poincare-Hopf: sum of vector indices = chi";
const SRC_MARKUS: &str = "odd-defect formula: sum p = 2 chi - k (known to fail in general)";

/// Runs every applicable check. Meshes with boundary are first doubled; the
/// field must then be normal to the boundary.
pub fn run_checks(mesh: &Mesh, conn: &Connection, field: &Field) -> VerificationReport {
    if mesh.is_closed() {
        let (checks, markus) = closed_checks(mesh, conn, field);
        return VerificationReport::from_checks(checks, markus, false);
    }

    let mut checks = Vec::new();
    match field_indices(mesh, conn, field) {
        Ok(r) => {
            checks.push(Check::equal(
                "interior_sum_normal_boundary",
                "sum of interior projective indices = 2 chi for a boundary-normal field",
                r.sum_p,
                r.two_chi,
            ));
            lemma_checks(&r, &mut checks);
        }
        Err(e) => checks.push(Check::failed("indices", SRC_LINE_PH, format!("{}: {e}", e.code()))),
    }
    let doubled = mesh.double_along_boundary().and_then(|(d, map)| {
        let dconn = Connection::build(&d, mirror_angles(conn, &map));
        Ok((d, dconn, map))
    });
    let (dmesh, dconn, map) = match doubled {
        Ok(x) => x,
        Err(e) => {
            checks.push(Check::failed("double", "double along the boundary", e.to_string()));
            return VerificationReport::from_checks(checks, None, true);
        }
    };
    match mirror_field(mesh, conn, &map, &field.to_line()) {
        Ok(mirrored) => {
            checks.push(Check {
                informational: false,
                ..Check::equal("boundary_normal", "field is normal to the boundary", 0, 0)
            });
            let (more, markus) = closed_checks(&dmesh, &dconn, &Field::Line(mirrored));
            checks.extend(more.into_iter().map(|mut c| {
                c.name = format!("double.{}", c.name);
                c
            }));
            VerificationReport::from_checks(checks, markus, true)
        }
        Err(e) => {
            checks.push(Check::failed(
                "boundary_normal",
                "field is normal to the boundary",
                format!("{}: {e}", e.code()),
            ));
            VerificationReport::from_checks(checks, None, true)
        }
    }
}

fn lemma_checks(r: &DefectReport, checks: &mut Vec<Check>) {
    let line_fail = r.vertices.iter().filter(|v| v.p_perp != v.p - 2).count();
    checks.push(Check::equal(
        "normal_projective_index",
        SRC_NORMAL_LINE,
        line_fail as i64,
        0,
    ));
    if r.kind == FieldKind::Vector {
        let fail = r
            .vertices
            .iter()
            .filter(|v| v.ind_perp != v.ind.map(|i| i - 1))
            .count();
        checks.push(Check::equal("normal_index", SRC_NORMAL_VECTOR, fail as i64, 0));
    }
}

fn closed_checks(
    mesh: &Mesh,
    conn: &Connection,
    field: &Field,
) -> (Vec<Check>, Option<MarkusComparison>) {
    let mut checks = Vec::new();
    let report = match field_indices(mesh, conn, field) {
        Ok(r) => r,
        Err(e) => {
            checks.push(Check::failed(
                "poincare_hopf_line",
                SRC_LINE_PH,
                format!("{}: {e}", e.code()),
            ));
            return (checks, None);
        }
    };
    checks.push(Check::equal(
        "poincare_hopf_line",
        SRC_LINE_PH,
        report.sum_p,
        report.two_chi,
    ));
    checks.push(Check::close(
        "hopf_sum",
        SRC_HOPF,
        report.sum_p as f64 / 2.0,
        report.chi as f64,
        0.0,
    ));
    lemma_checks(&report, &mut checks);
    if let Some(sum_ind) = report.sum_ind {
        checks.push(Check::equal("poincare_hopf_vector", SRC_VECTOR_PH, sum_ind, report.chi));
    }
    let markus = MarkusComparison::of(&report);
    checks.push(Check {
        informational: true,
        ..Check::equal("odd_defect_formula", SRC_MARKUS, markus.lhs, markus.rhs)
    });

    match branched_double_cover(mesh, conn, &field.to_line()) {
        Ok(cover) => checks.extend(cover_index_checks(&cover).into_iter().map(|mut c| {
            c.name = format!("cover.{}", c.name);
            c
        })),
        Err(e) => checks.push(Check::failed(
            "cover",
            "branched double cover of the line field",
            format!("{}: {e}", e.code()),
        )),
    }
    (checks, Some(markus))
}

/// Small summary used by the CLI next to the full report.
pub fn summary_json(report: &DefectReport) -> serde_json::Value {
    json!({
        "chi": report.chi,
        "sum_p": report.sum_p,
        "two_chi": report.two_chi,
        "defects": report.defects().count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, CatalogKey};
    use crate::connection::MetricMode;

    fn run(mesh: &str, field: &str, mode: MetricMode) -> VerificationReport {
        let m = catalog::generate_mesh(&CatalogKey::parse(mesh).unwrap()).unwrap();
        let c = Connection::for_mode(&m, mode).unwrap();
        let f = catalog::generate_field(&CatalogKey::parse(field).unwrap(), &m, &c).unwrap();
        run_checks(&m, &c, &f)
    }

    #[test]
    fn baseball_report() {
        let r = run("icosphere:n=2", "baseball", MetricMode::Equilateral);
        assert!(r.pass, "{}", r.to_text());
        assert_eq!(
            r.markus,
            Some(MarkusComparison {
                lhs: 4,
                rhs: 0,
                equal: false
            })
        );
        let j = r.to_json();
        assert_eq!(j["markus"], json!({"lhs": 4, "rhs": 0, "equal": false}));
    }

    #[test]
    fn two_pole_report() {
        let r = run("icosphere:n=1", "two_pole", MetricMode::Equilateral);
        assert!(r.pass, "{}", r.to_text());
        assert_eq!(r.markus.unwrap().equal, true);
    }

    #[test]
    fn radial_disk_is_doubled() {
        let r = run("disk_fan:rings=4,sectors=12", "radial_disk", MetricMode::Planar);
        assert!(r.pass, "{}", r.to_text());
        assert!(r.doubled);
        let ph = r.check("double.poincare_hopf_line").unwrap();
        assert_eq!(ph.lhs, Some(Quantity::Int(4)));
    }

    #[test]
    fn non_normal_boundary_field_fails() {
        let r = run("disk_fan:rings=4,sectors=12", "defect_patch:k=0.5", MetricMode::Planar);
        assert!(!r.pass);
        assert!(r.check("boundary_normal").unwrap().cause.as_deref().unwrap().starts_with("NOT_NORMAL"));
        // the interior checks still ran
        assert!(r.check("normal_projective_index").unwrap().pass);
    }

    #[test]
    fn vector_fields_get_vector_checks() {
        let r = run("icosphere:n=1", "random_vector_field:seed=4", MetricMode::Equilateral);
        assert!(r.check("normal_index").is_some());
        assert!(r.check("poincare_hopf_vector").unwrap().pass);
    }
}
