//! `frenetkit` command line tool.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use frenetkit::curve::{refine_with, unrefine, DiscreteCurve, RefinedCurve};
use frenetkit::discretize::{
    centered_report, discretize_centered, discretize_circumscribed_with, discretize_inscribed, BuiltinCurve,
    SampleMap, SmoothCurve,
};
use frenetkit::frames::analyze;
use frenetkit::io::{self, analysis_report};
use frenetkit::ngon::{circle_of_ngon, Convention, NGonSpec};
use frenetkit::reconstruct::{congruent, reconstruct_curve, InitialPose};
use frenetkit::spline::{spline_centered_with, spline_circumscribed, spline_inscribed_with, ElasticaOptions, Spline};
use frenetkit::svg::{render_svg, RenderStyle, Scene};
use frenetkit::{Error, Tolerances, Vec3};

#[derive(Parser)]
#[command(name = "frenetkit", version, about = "Discrete curves under three curvature conventions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Tolerance for Frenet residual and congruence checks. Overrides FRENETKIT_TOL.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file for the primary result.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG drawing to this path.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Inscribed,
    Circumscribed,
    Centered,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Inscribed => "inscribed",
            Method::Circumscribed => "circumscribed",
            Method::Centered => "centered",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Frames, angles, curvature and torsion of a curve file.
    Analyze {
        curve: PathBuf,
        /// Restrict the report to one convention.
        #[arg(long)]
        convention: Option<String>,
    },
    /// Rebuild a curve from an intrinsic data file.
    Reconstruct {
        intrinsic: PathBuf,
        /// Start point, `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        origin: Option<String>,
        /// Initial tangent, `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        tangent: Option<String>,
        /// Initial normal, `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        normal: Option<String>,
    },
    /// Discretize a built-in smooth curve such as `circle:r=1`.
    Discretize {
        curve: String,
        #[arg(long, value_enum)]
        method: Method,
        /// Number of samples (inscribed and circumscribed).
        #[arg(long)]
        samples: Option<usize>,
        /// Samples per unit length.
        #[arg(long)]
        density: Option<f64>,
    },
    /// Fit a spline to a planar curve file.
    Spline {
        curve: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Analyze, reconstruct and compare a curve file.
    Roundtrip {
        curve: PathBuf,
        #[arg(long)]
        convention: Option<String>,
    },
    /// Draw a curve or spline file as SVG.
    Render {
        file: PathBuf,
        /// Add the inscribed, centered and circumscribed circles of a regular polygon.
        #[arg(long)]
        circles: bool,
    },
}

enum Failure {
    Lib(Error),
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

macro_rules! lib_err {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Lib(e.into())
            }
        }
    )*};
}
lib_err!(
    frenetkit::curve::CurveError,
    frenetkit::frames::FrameError,
    frenetkit::ngon::NgonError,
    frenetkit::reconstruct::ReconstructError,
    frenetkit::discretize::DiscretizeError,
    frenetkit::spline::SplineError,
    frenetkit::svg::SvgError,
    frenetkit::io::IoError
);

/// Result of a command: JSON for stdout and whether the numerical checks passed.
struct Outcome {
    stdout: String,
    ok: bool,
}

fn tolerance(flag: Option<f64>) -> Result<Tolerances, Failure> {
    let tol = match flag {
        Some(t) => Some(t),
        None => match std::env::var("FRENETKIT_TOL") {
            Ok(v) => Some(v.trim().parse::<f64>().map_err(|_| Failure::Input(format!("FRENETKIT_TOL: '{v}' is not a number")))?),
            Err(_) => None,
        },
    };
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Failure::Input(format!("tolerance must be positive, got {t}"))),
        Some(t) => Ok(Tolerances::with_tol(t)),
        None => Ok(Tolerances::DEFAULT),
    }
}

fn conventions(flag: &Option<String>) -> Result<Vec<Convention>, Failure> {
    Ok(match flag {
        Some(c) => vec![c.parse::<Convention>()?],
        None => vec![Convention::Inscribed, Convention::Circumscribed, Convention::Centered],
    })
}

fn parse_vec3(flag: &str, s: &str) -> Result<Vec3, Failure> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == 3 => Ok(Vec3::new(v[0], v[1], v[2])),
        Ok(v) if v.len() == 2 => Ok(Vec3::new(v[0], v[1], 0.0)),
        _ => Err(Failure::Input(format!("--{flag}: expected x,y,z, got '{s}'"))),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

/// Writes `text` to `--out` when given, otherwise returns it for stdout.
fn emit(g: &Global, text: String, summary: Value) -> Result<String, Failure> {
    match &g.out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(pretty(&summary))
        }
        None => Ok(text),
    }
}

fn write_svg(g: &Global, scene: &Scene) -> Result<(), Failure> {
    if let Some(p) = &g.svg {
        write_file(p, &render_svg(scene, &RenderStyle::default())?)?;
    }
    Ok(())
}

fn cmd_analyze(g: &Global, path: &Path, convention: &Option<String>) -> Result<Outcome, Failure> {
    let tol = tolerance(g.tol)?;
    let curve = io::read_curve(path)?;
    let report = analysis_report(&curve, &conventions(convention)?, &tol)?;
    let csv = g.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")));
    let text = if csv { report.to_csv() } else { report.to_json() };
    let summary = json!({
        "max_frenet_residual": report.max_frenet_residual,
        "tolerance": report.tolerance,
        "residual_ok": report.residual_ok,
    });
    if g.svg.is_some() {
        let mut scene = Scene::new();
        scene.curve(&curve)?;
        write_svg(g, &scene)?;
    }
    Ok(Outcome {
        stdout: emit(g, text, summary)?,
        ok: report.residual_ok,
    })
}

fn cmd_reconstruct(
    g: &Global,
    path: &Path,
    origin: &Option<String>,
    tangent: &Option<String>,
    normal: &Option<String>,
) -> Result<Outcome, Failure> {
    let id = io::intrinsic_from_json(&read_text(path)?)?;
    let pose = if origin.is_none() && tangent.is_none() && normal.is_none() {
        InitialPose::standard()
    } else {
        let o = origin.as_deref().map(|s| parse_vec3("origin", s)).transpose()?.unwrap_or_else(Vec3::zeros);
        let t = tangent.as_deref().map(|s| parse_vec3("tangent", s)).transpose()?.unwrap_or_else(Vec3::x);
        let n = normal.as_deref().map(|s| parse_vec3("normal", s)).transpose()?.unwrap_or_else(Vec3::y);
        InitialPose::from_tangent_normal(o, t, n)?
    };
    let rc = reconstruct_curve(&id, &pose)?;
    let curve = unrefine(&rc);
    if g.svg.is_some() {
        let mut scene = Scene::new();
        scene.curve(&curve)?;
        write_svg(g, &scene)?;
    }
    let summary = json!({ "vertices": curve.len(), "dim": curve.dim(), "closed": curve.closed() });
    Ok(Outcome {
        stdout: emit(g, io::curve_to_json(&curve), summary)?,
        ok: true,
    })
}

fn cmd_discretize(g: &Global, spec: &str, method: Method, samples: Option<usize>, density: Option<f64>) -> Result<Outcome, Failure> {
    let tol = tolerance(g.tol)?;
    let smooth: BuiltinCurve = spec.parse()?;
    let length = smooth.length();
    let mut extra = json!({});
    let curve = match method {
        Method::Centered => {
            let m = density
                .or_else(|| samples.map(|n| n as f64 / length))
                .ok_or_else(|| Failure::Input("centered needs --density or --samples".into()))?;
            let rc = discretize_centered(&smooth, m)?;
            extra = json!({
                "density": m,
                "length_spread": rc.length_spread(),
                "variants": centered_report(&smooth, m).iter().map(|v| json!({
                    "rule": format!("{:?}", v.rule).to_lowercase(),
                    "side": format!("{:?}", v.side).to_lowercase(),
                    "total_length": v.total_length,
                    "length_error": v.length_error,
                    "error": v.error,
                    "passes_length_test": v.passes,
                })).collect::<Vec<_>>(),
            });
            unrefine(&rc)
        }
        _ => {
            let n = match (samples, density) {
                (Some(n), _) => n,
                (None, Some(m)) if m > 0.0 && m.is_finite() => (length * m).round().max(1.0) as usize,
                (None, Some(m)) => return Err(Failure::Input(format!("density must be positive, got {m}"))),
                (None, None) => return Err(Failure::Input("need --samples or --density".into())),
            };
            if matches!(method, Method::Inscribed) {
                discretize_inscribed(&smooth, &SampleMap::uniform(&smooth, n)?)?
            } else {
                let map = SampleMap::uniform_with_inflections(&smooth, n, &tol)?;
                discretize_circumscribed_with(&smooth, &map, &tol)?
            }
        }
    };
    let total = curve.total_length();
    let mut summary = json!({
        "curve": spec,
        "method": method.name(),
        "vertices": curve.len(),
        "curve_length": length,
        "polygon_length": total,
        "length_error": (total - length).abs(),
    });
    if let (Value::Object(s), Value::Object(e)) = (&mut summary, extra) {
        s.extend(e);
    }
    if g.svg.is_some() {
        let mut scene = Scene::new();
        let l = smooth.length();
        let n = 512;
        let pts: Vec<[f64; 2]> = (0..=n).map(|i| smooth.position(l * i as f64 / n as f64)).collect();
        scene.polyline(&pts, smooth.closed());
        scene.curve(&curve)?;
        write_svg(g, &scene)?;
    }
    let stdout = match &g.out {
        Some(p) => {
            write_file(p, &io::curve_to_json(&curve))?;
            pretty(&summary)
        }
        None => {
            if let Value::Object(s) = &mut summary {
                s.insert("polygon".into(), serde_json::from_str(&io::curve_to_json(&curve)).expect("valid json"));
            }
            pretty(&summary)
        }
    };
    Ok(Outcome { stdout, ok: true })
}

const G1_TOL: f64 = 1e-9;

fn cmd_spline(g: &Global, path: &Path, method: Method) -> Result<Outcome, Failure> {
    let tol = tolerance(g.tol)?;
    let curve = io::read_curve(path)?;
    let mut multiple = Vec::new();
    let spline: Spline = match method {
        Method::Inscribed => spline_inscribed_with(&refine_with(&curve, &tol)?, &tol)?,
        Method::Circumscribed => spline_circumscribed(&curve)?,
        Method::Centered => {
            let mut opts = ElasticaOptions::default();
            if let Some(s) = g.seed {
                opts.seed = s;
            }
            let (sp, m) = spline_centered_with(&refine_with(&curve, &tol)?, &opts)?;
            multiple = m;
            sp
        }
    };
    let g1 = spline.g1_report();
    let ok = g1.position <= G1_TOL && g1.angle <= G1_TOL;
    let types: Vec<&str> = spline.segments.iter().map(|s| s.type_name()).collect();
    let summary = json!({
        "method": method.name(),
        "segments": spline.segments.len(),
        "types": types,
        "length": spline.length(),
        "energy": spline.energy(),
        "g1": { "position": g1.position, "angle": g1.angle, "worst_joint": g1.worst_joint, "passes": ok },
        "multiple_solutions": multiple,
    });
    if g.svg.is_some() {
        let mut scene = Scene::new();
        scene.curve(&curve)?.spline(&spline);
        write_svg(g, &scene)?;
    }
    let stdout = match &g.out {
        Some(p) => {
            write_file(p, &io::spline_to_json(&spline))?;
            pretty(&summary)
        }
        None => {
            let mut s = summary;
            if let Value::Object(m) = &mut s {
                m.insert("spline".into(), serde_json::to_value(&spline).expect("spline serializes"));
            }
            pretty(&s)
        }
    };
    if !ok {
        eprintln!("spline.G1Violation: joint {:?}, position {:e}, angle {:e}", g1.worst_joint, g1.position, g1.angle);
    }
    Ok(Outcome { stdout, ok })
}

fn max_angle_error(a: &RefinedCurve, b: &RefinedCurve, c: Convention) -> Result<f64, Failure> {
    let (_, ia) = analyze(a, c)?;
    let (_, ib) = analyze(b, c)?;
    if ia.len() != ib.len() {
        return Err(Failure::Numerical(format!("angle counts differ: {} vs {}", ia.len(), ib.len())));
    }
    let t = ia.theta().iter().zip(ib.theta()).map(|(x, y)| (x - y).abs());
    let p = ia.phi().iter().zip(ib.phi()).map(|(x, y)| (x - y).abs());
    Ok(t.chain(p).fold(0.0, f64::max))
}

fn cmd_roundtrip(g: &Global, path: &Path, convention: &Option<String>) -> Result<Outcome, Failure> {
    let tol = tolerance(g.tol)?;
    let curve = io::read_curve(path)?;
    let rc = refine_with(&curve, &tol)?;
    let mut results = Vec::new();
    let mut ok = true;
    for c in conventions(convention)? {
        let (_, id) = analyze(&rc, c)?;
        let rebuilt = reconstruct_curve(&id, &InitialPose::standard())?;
        let cong = congruent(&rc, &rebuilt, tol.congruence_rms)?;
        let angle_error = max_angle_error(&rc, &rebuilt, c)?;
        ok &= cong.congruent;
        results.push(json!({
            "convention": c.name(),
            "rms": cong.rms,
            "congruent": cong.congruent,
            "angle_error": angle_error,
        }));
    }
    let summary = json!({
        "vertices": curve.len(),
        "tolerance": tol.congruence_rms,
        "passes": ok,
        "results": results,
    });
    let text = pretty(&summary);
    let stdout = emit(g, text.clone(), summary)?;
    Ok(Outcome { stdout, ok })
}

fn centroid(c: &DiscreteCurve) -> [f64; 2] {
    let n = c.len() as f64;
    let s = c.points().iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    [s.x, s.y]
}

fn cmd_render(g: &Global, path: &Path, circles: bool) -> Result<Outcome, Failure> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Lib(io::IoError::Parse(e.to_string()).into()))?;
    let mut scene = Scene::new();
    let what = if value.get("segments").is_some() {
        let sp = io::spline_from_json(&text)?;
        scene.spline(&sp);
        "spline"
    } else {
        let curve = io::curve_from_json(&text)?;
        scene.curve(&curve)?;
        if circles {
            if !curve.closed() {
                return Err(Failure::Input("--circles needs a closed polygon".into()));
            }
            let side = curve.total_length() / curve.edge_count() as f64;
            let spec = NGonSpec::new(curve.len() as f64, side, centroid(&curve), 0.0)?;
            for c in [Convention::Inscribed, Convention::Centered, Convention::Circumscribed] {
                let circle = circle_of_ngon(&spec, c);
                scene.circle(circle.center, circle.radius);
            }
        }
        "curve"
    };
    let svg = render_svg(&scene, &RenderStyle::default())?;
    let target = g.svg.as_ref().or(g.out.as_ref());
    let stdout = match target {
        Some(p) => {
            write_file(p, &svg)?;
            pretty(&json!({ "rendered": what, "path": p.display().to_string() }))
        }
        None => svg,
    };
    Ok(Outcome { stdout, ok: true })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze { curve, convention } => cmd_analyze(g, curve, convention),
        Command::Reconstruct {
            intrinsic,
            origin,
            tangent,
            normal,
        } => cmd_reconstruct(g, intrinsic, origin, tangent, normal),
        Command::Discretize {
            curve,
            method,
            samples,
            density,
        } => cmd_discretize(g, curve, *method, *samples, *density),
        Command::Spline { curve, method } => cmd_spline(g, curve, *method),
        Command::Roundtrip { curve, convention } => cmd_roundtrip(g, curve, convention),
        Command::Render { file, circles } => cmd_render(g, file, *circles),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = out.stdout.trim_end();
            if !text.is_empty() {
                // a closed pipe downstream is not an error
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error[input]: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error[numerical]: {m}");
            ExitCode::from(1)
        }
    }
}
