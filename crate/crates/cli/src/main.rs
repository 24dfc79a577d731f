//! `linefield` command-line tool.
//!
//! Exit codes: 0 success, 1 failed checks or computation errors,
//! 2 usage errors, 3 I/O and parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linefield::catalog::{self, CatalogError, CatalogKey};
use linefield::connection::{Connection, MetricMode};
use linefield::cover::branched_double_cover;
use linefield::cover::cover_index_checks;
use linefield::fields::{field_indices, DefectReport, Field};
use linefield::mesh::{parse_off, write_off, Mesh};
use linefield::render::render_svg;
use linefield::verify::{run_checks, VerificationReport};

#[derive(Parser)]
#[command(name = "linefield", version, about = "Line-field indices on triangulated surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a catalog mesh as OFF.
    Gen {
        /// Catalog name, optionally with parameters (`icosphere:n=2`).
        #[arg(long)]
        mesh: String,
        /// Parameters as `key=value,key=value`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a catalog field on a mesh file.
    Genfield {
        #[arg(long)]
        field: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::Equilateral)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the defect table of a field.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all index checks; exit 0 iff every check passes.
    Verify {
        #[command(flatten)]
        input: OptionalInput,
        /// Write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Verify the built-in corpus of catalog meshes and fields.
        #[arg(long, conflicts_with_all = ["mesh", "field"])]
        all_catalog: bool,
    },
    /// Build the branched double cover: writes P.off, P.cover.json and P.report.json.
    Cover {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Draw a planar field as SVG.
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Equilateral)]
    metric: Metric,
}

#[derive(Args)]
struct OptionalInput {
    #[arg(long, required_unless_present = "all_catalog")]
    mesh: Option<PathBuf>,
    #[arg(long, required_unless_present = "all_catalog")]
    field: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Equilateral)]
    metric: Metric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Equilateral,
    Planar,
}

impl From<Metric> for MetricMode {
    fn from(m: Metric) -> MetricMode {
        match m {
            Metric::Equilateral => MetricMode::Equilateral,
            Metric::Planar => MetricMode::Planar,
        }
    }
}

struct Failure {
    exit: u8,
    code: String,
    message: String,
}

impl Failure {
    fn new(exit: u8, code: &str, message: impl ToString) -> Failure {
        Failure {
            exit,
            code: code.into(),
            message: message.to_string(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure::new(3, "IO_ERROR", format!("{}: {e}", path.display()))
    }
}

fn catalog_failure(e: CatalogError) -> Failure {
    let exit = match e {
        CatalogError::UnknownName(_) | CatalogError::BadParams(_) => 2,
        _ => 1,
    };
    Failure::new(exit, e.code(), e)
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error [{}]: {}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Gen { mesh, params, out } => {
            let key = key(&mesh, &params)?;
            let m = catalog::generate_mesh(&key).map_err(catalog_failure)?;
            write(&out, &write_off(&m))?;
            println!(
                "{}: V={} E={} F={} chi={}",
                out.display(),
                m.vertex_count(),
                m.edge_count(),
                m.face_count(),
                m.euler_characteristic()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Genfield {
            field,
            params,
            mesh,
            metric,
            out,
        } => {
            let key = key(&field, &params)?;
            let m = load_mesh(&mesh)?;
            let c = connection(&m, metric)?;
            let f = catalog::generate_field(&key, &m, &c).map_err(catalog_failure)?;
            write(&out, &f.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { input, out } => {
            let (m, c, f) = load(&input.mesh, &input.field, input.metric)?;
            let report =
                field_indices(&m, &c, &f).map_err(|e| Failure::new(1, e.code(), &e))?;
            print!("{}", defect_table(&report));
            if let Some(out) = out {
                write(&out, &pretty(&report.to_json()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            input,
            json,
            all_catalog,
        } => {
            if all_catalog {
                return verify_corpus(json.as_deref());
            }
            let (mesh, field) = (input.mesh.unwrap(), input.field.unwrap());
            let (m, c, f) = load(&mesh, &field, input.metric)?;
            let report = run_checks(&m, &c, &f);
            print!("{}", report.to_text());
            if let Some(path) = json {
                write(&path, &pretty(&report.to_json()))?;
            }
            Ok(exit_for(&report))
        }
        Command::Cover { input, out_prefix } => {
            let (m, c, f) = load(&input.mesh, &input.field, input.metric)?;
            let cover = branched_double_cover(&m, &c, &f.to_line())
                .map_err(|e| Failure::new(1, e.code(), &e))?;
            let checks = cover_index_checks(&cover);
            let pass = checks.iter().all(|c| c.pass);
            let with_suffix = |s: &str| {
                let mut p = out_prefix.clone().into_os_string();
                p.push(s);
                PathBuf::from(p)
            };
            write(&with_suffix(".off"), &write_off(&cover.mesh))?;
            write(&with_suffix(".cover.json"), &pretty(&cover.sidecar_json()))?;
            let report = serde_json::json!({ "pass": pass, "checks": checks });
            write(&with_suffix(".report.json"), &pretty(&report))?;
            println!(
                "cover: V={} E={} F={} chi={} branch points={} components={}",
                cover.mesh.vertex_count(),
                cover.mesh.edge_count(),
                cover.mesh.face_count(),
                cover.mesh.euler_characteristic(),
                cover.branch_base_vertices.len(),
                cover.mesh.component_count()
            );
            for c in &checks {
                println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
            }
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Render { input, out } => {
            let (m, c, f) = load(&input.mesh, &input.field, input.metric)?;
            let report = field_indices(&m, &c, &f).ok();
            let svg = render_svg(&m, &f, report.as_ref())
                .map_err(|e| Failure::new(1, e.code(), &e))?;
            write(&out, &svg)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn key(name: &str, params: &str) -> Result<CatalogKey, Failure> {
    let (name, inline) = name.split_once(':').unwrap_or((name, ""));
    let joined = [inline, params]
        .iter()
        .filter(|s| !s.is_empty())
        .copied()
        .collect::<Vec<_>>()
        .join(",");
    CatalogKey::with_params(name, &joined).map_err(catalog_failure)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn load_mesh(path: &Path) -> Result<Mesh, Failure> {
    parse_off(&read(path)?)
        .map_err(|e| Failure::new(3, e.code(), format!("{}: {e}", path.display())))
}

fn connection(m: &Mesh, metric: Metric) -> Result<Connection, Failure> {
    Connection::for_mode(m, metric.into()).map_err(|e| Failure::new(1, e.code(), &e))
}

fn load(mesh: &Path, field: &Path, metric: Metric) -> Result<(Mesh, Connection, Field), Failure> {
    let m = load_mesh(mesh)?;
    let f = Field::from_json(&read(field)?)
        .map_err(|e| Failure::new(3, e.code(), format!("{}: {e}", field.display())))?;
    if f.len() != m.face_count() {
        return Err(Failure::new(
            3,
            "BAD_FIELD",
            format!(
                "{} has {} angles but the mesh has {} faces",
                field.display(),
                f.len(),
                m.face_count()
            ),
        ));
    }
    let c = connection(&m, metric)?;
    Ok((m, c, f))
}

fn exit_for(report: &VerificationReport) -> ExitCode {
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn defect_table(r: &DefectReport) -> String {
    let mut out = String::from("vertex      p  p_perp  hopf\n");
    for d in r.defects() {
        out.push_str(&format!("{:>6} {:>6} {:>7}  {}\n", d.vertex, d.p, d.p_perp, d.hopf));
    }
    out.push_str(&format!(
        "sum_p = {}, 2 chi = {}, defects = {}\n",
        r.sum_p,
        r.two_chi,
        r.defects().count()
    ));
    out
}

/// Catalog entries checked by `verify --all-catalog`.
const CORPUS: &[(&str, &str, MetricMode)] = &[
    ("icosphere:n=3", "baseball", MetricMode::Equilateral),
    ("icosphere:n=2", "two_pole", MetricMode::Equilateral),
    ("rp2_minimal", "rp2_radial", MetricMode::Equilateral),
    ("torus_grid:a=4,b=4", "constant", MetricMode::Equilateral),
    ("klein_grid:a=4,b=4", "constant", MetricMode::Equilateral),
    ("torus7", "constant", MetricMode::Equilateral),
    ("disk_fan:rings=6,sectors=12", "radial_disk", MetricMode::Planar),
    ("disk_fan:rings=6,sectors=12", "radial_disk:kind=vector", MetricMode::Planar),
    ("icosphere:n=1", "random_line_field:seed=1", MetricMode::Equilateral),
    ("klein_grid:a=4,b=4", "random_line_field:seed=2", MetricMode::Equilateral),
];

fn verify_corpus(json: Option<&Path>) -> Outcome {
    let results: Vec<Result<VerificationReport, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = CORPUS
            .iter()
            .map(|&(mesh, field, mode)| {
                s.spawn(move || {
                    let m = catalog::generate_mesh(&CatalogKey::parse(mesh).map_err(catalog_failure)?)
                        .map_err(catalog_failure)?;
                    let c = Connection::for_mode(&m, mode).map_err(|e| Failure::new(1, e.code(), &e))?;
                    let f = catalog::generate_field(&CatalogKey::parse(field).map_err(catalog_failure)?, &m, &c)
                        .map_err(catalog_failure)?;
                    Ok(run_checks(&m, &c, &f))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all = true;
    let mut entries = Vec::new();
    for ((mesh, field, _), result) in CORPUS.iter().zip(results) {
        let (pass, value) = match result {
            Ok(r) => (r.pass, r.to_json()),
            Err(f) => (false, serde_json::json!({ "pass": false, "error": f.code, "message": f.message })),
        };
        all &= pass;
        println!("{} {mesh} / {field}", if pass { "PASS" } else { "FAIL" });
        entries.push(serde_json::json!({ "mesh": mesh, "field": field, "report": value }));
    }
    if let Some(path) = json {
        write(path, &pretty(&serde_json::json!({ "pass": all, "entries": entries })))?;
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
