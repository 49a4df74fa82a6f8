//! Command-line front end: `check`, `lower`, `cone` and `verify`.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | stationary with the qualification holding; `lower`/`cone` succeeded; `verify` found local optimality |
//! | 1 | not stationary; `verify` found a better nearby point |
//! | 2 | qualification fails (stationarity is still reported) |
//! | 3 | input error |

mod problem_file;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use problem_file::{Bound, BoxSpec, BoxWrapper, CandidateSpec, KSpec, LoadedProblem, ProblemFile, RowsSpec};
pub use report::{
    CandidatePoint, ConeRecord, ConeReport, DerivativeCheck, ErrorReport, LowerReport, ReportFile, Verdict,
    VerifyReport, TOOL, VERSION,
};

use crate::calculus::verify_bundle;
use crate::config::{FiniteDifference, Tolerances};
use crate::feasibility::Mode;
use crate::model::{Candidate, LowerSet};
use crate::oracle::{optimistic_response, solve_lower_grid, verify_optimistic_local, GridSpec};
use crate::polyhedral::{limiting_normal_cone_gph, normal_cone_box, normal_cone_polyhedron, GraphCaps, PolyhedralCone};
use crate::stationarity::{
    explain_certificate, m_stationarity_in, qualification_in, CandidateContext, StationarityOptions,
    StationarityOutcome,
};

#[derive(Debug, Parser)]
#[command(
    name = "bilevel",
    version,
    about = "M-stationarity checks for optimistic bilevel programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the qualification and M-stationarity at a candidate.
    Check(CheckArgs),
    /// Solve the lower level on a grid and report S(x) and φ0(x).
    Lower(LowerArgs),
    /// Print a normal cone to Omega, to K, or to the graph of N_K.
    Cone(ConeArgs),
    /// Compare φ0 near a candidate with its value at the candidate.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    candidate: usize,
    /// Exact rational arithmetic (default).
    #[arg(long, conflicts_with = "float")]
    rational: bool,
    /// Floating-point arithmetic with a minimum-norm certificate.
    #[arg(long)]
    float: bool,
    /// Cross-check symbolic derivatives with central differences.
    #[arg(long)]
    verify_derivatives: bool,
    /// Tolerance override, e.g. `equation=1e-8`. Keys: active_set, equation, cone_margin.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Largest number of graph-cone branches to enumerate.
    #[arg(long)]
    max_branches: Option<usize>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Lower corner of the y-grid, one value or one per coordinate; defaults to finite bounds of K, else -10.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid_lower: Option<Vec<f64>>,
    /// Upper corner of the y-grid, one value or one per coordinate; defaults to finite bounds of K, else 10.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid_upper: Option<Vec<f64>>,
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    #[arg(long, default_value_t = 10)]
    refinement: usize,
    /// Values within this of the grid minimum count as solutions.
    #[arg(long, default_value_t = 1e-9)]
    grid_tol: f64,
}

#[derive(Debug, Args)]
struct LowerArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    x: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Omega,
    K,
    Gph,
}

impl Which {
    fn name(self) -> &'static str {
        match self {
            Which::Omega => "omega",
            Which::K => "k",
            Which::Gph => "gph",
        }
    }
}

#[derive(Debug, Args)]
struct ConeArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    which: Which,
    /// Take the point from this candidate (default 0).
    #[arg(long, conflicts_with = "point")]
    candidate: Option<usize>,
    /// Explicit point: x for omega, y for k, y followed by z for gph.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    candidate: usize,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Slack allowed in φ0 comparisons.
    #[arg(long, default_value_t = 1e-2)]
    value_tol: f64,
    #[command(flatten)]
    grid: GridArgs,
}

/// Exit code and text produced by one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn render<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

fn error_output(command: &'static str, errors: Vec<String>, start: Instant) -> Output {
    let report = ErrorReport {
        tool: TOOL,
        version: VERSION,
        command,
        verdict: Verdict::InputError,
        errors,
        timing_ms: elapsed_ms(start),
    };
    Output {
        code: Verdict::InputError.exit_code(),
        stdout: render(&report),
        stderr: String::new(),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Output {
                    code: if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        3
                    } else {
                        0
                    },
                    stdout: e.to_string(),
                    stderr: String::new(),
                },
                _ => {
                    let mut out = error_output("usage", vec![e.kind().to_string()], start);
                    out.stderr = e.render().to_string();
                    out
                }
            };
        }
    };
    match cli.command {
        Command::Check(a) => check(a, start),
        Command::Lower(a) => lower(a, start),
        Command::Cone(a) => cone(a, start),
        Command::Verify(a) => verify(a, start),
    }
}

fn load(path: &PathBuf) -> Result<LoadedProblem, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    ProblemFile::load(&text)
}

fn apply_overrides(mut t: Tolerances, overrides: &[String]) -> Result<Tolerances, Vec<String>> {
    let mut errors = Vec::new();
    for o in overrides {
        let Some((key, value)) = o.split_once('=') else {
            errors.push(format!("--tol {o}: expected NAME=VALUE"));
            continue;
        };
        let Ok(v) = value.parse::<f64>() else {
            errors.push(format!("--tol {o}: {value:?} is not a number"));
            continue;
        };
        if !v.is_finite() || v < 0.0 {
            errors.push(format!("--tol {o}: value must be finite and nonnegative"));
            continue;
        }
        match key {
            "active_set" => t.active_set = v,
            "equation" => t.equation = v,
            "cone_margin" => t.cone_margin = v,
            _ => errors.push(format!("--tol {o}: unknown tolerance {key:?}")),
        }
    }
    if errors.is_empty() {
        Ok(t)
    } else {
        Err(errors)
    }
}

fn candidate_of(loaded: &LoadedProblem, index: usize) -> Result<Candidate, Vec<String>> {
    let given = loaded.candidates.get(index).ok_or_else(|| {
        vec![format!(
            "candidate {index} does not exist ({} in file)",
            loaded.candidates.len()
        )]
    })?;
    Candidate::new(&loaded.problem, given.x.clone(), given.y.clone())
        .map_err(|e| vec![format!("candidate {index}: {e}")])
}

fn check(a: CheckArgs, start: Instant) -> Output {
    let finish = |mut report: ReportFile| {
        report.timing_ms = elapsed_ms(start);
        Output {
            code: report.verdict.exit_code(),
            stdout: render(&report),
            stderr: String::new(),
        }
    };
    let loaded = match load(&a.file) {
        Ok(l) => l,
        Err(e) => return finish(ReportFile::input_error(e)),
    };
    let tolerances = match apply_overrides(loaded.tolerances.unwrap_or_default(), &a.tol) {
        Ok(t) => t,
        Err(e) => return finish(ReportFile::input_error(e)),
    };
    let c = match candidate_of(&loaded, a.candidate) {
        Ok(c) => c,
        Err(e) => return finish(ReportFile::input_error(e)),
    };
    let mode = if a.float { Mode::Float } else { Mode::Rational };
    let mut caps = GraphCaps::default();
    if let Some(b) = a.max_branches {
        caps.branches = b;
    }
    let opts = StationarityOptions { tolerances, mode, caps };
    let problem = &loaded.problem;

    let mut report = ReportFile::new(Verdict::InputError);
    report.candidate = Some(CandidatePoint {
        index: a.candidate,
        x: c.x.clone(),
        y: c.y.clone(),
        z: c.z.clone(),
    });
    report.mode = Some(mode);
    report.tolerances = Some(tolerances);

    let ctx = match CandidateContext::new(problem, &c, &opts) {
        Ok(ctx) => ctx,
        Err(e) => {
            report.errors.push(format!("candidate {}: {e}", a.candidate));
            return finish(report);
        }
    };
    if a.verify_derivatives {
        let fd = FiniteDifference::default();
        let result = verify_bundle(problem, &c, &ctx.bundle, &fd);
        report.derivatives = Some(DerivativeCheck {
            rel_tol: fd.rel_tol,
            passed: result.is_ok(),
            detail: result.as_ref().err().map(|e| e.to_string()),
        });
        if let Err(e) = result {
            report.errors.push(format!("derivative check failed: {e}"));
            return finish(report);
        }
    }
    let qualification = match qualification_in(problem, &ctx, &opts) {
        Ok(q) => q,
        Err(e) => {
            report.errors.push(e.to_string());
            return finish(report);
        }
    };
    let outcome = match m_stationarity_in(problem, &ctx, &opts) {
        Ok(o) => o,
        Err(e) => {
            report.errors.push(e.to_string());
            return finish(report);
        }
    };
    let holds = qualification.holds;
    report.qualification = Some(qualification);
    match outcome {
        StationarityOutcome::Stationary(cert) => {
            match explain_certificate(problem, &c, &cert, &ctx.bundle, &tolerances, caps) {
                Ok(explanation) => report.explanation = Some(explanation),
                Err(e) => {
                    report.errors.push(format!("certificate failed recomputation: {e}"));
                    return finish(report);
                }
            }
            report.stationary = Some(true);
            report.certificate = Some(cert);
        }
        StationarityOutcome::NotStationary { branches_checked } => {
            report.stationary = Some(false);
            report.branches_checked = Some(branches_checked);
        }
    }
    report.verdict = match (holds, report.stationary) {
        (false, _) => Verdict::QualificationFails,
        (true, Some(true)) => Verdict::Stationary,
        _ => Verdict::NotStationary,
    };
    finish(report)
}

const DEFAULT_GRID_HALF_WIDTH: f64 = 10.0;

fn grid_of(loaded: &LoadedProblem, g: &GridArgs) -> Result<GridSpec, Vec<String>> {
    let m = loaded.problem.m;
    let (k_lower, k_upper) = match &loaded.problem.k {
        LowerSet::Box(b) => (b.lower().to_vec(), b.upper().to_vec()),
        LowerSet::Polyhedron(_) => (vec![f64::NEG_INFINITY; m], vec![f64::INFINITY; m]),
    };
    let pick = |given: &Option<Vec<f64>>, k: Vec<f64>, fallback: f64, flag: &str| -> Result<Vec<f64>, String> {
        match given {
            Some(v) if v.len() == 1 => Ok(vec![v[0]; m]),
            Some(v) if v.len() != m => Err(format!("--{flag}: has {} entries, expected 1 or {m}", v.len())),
            Some(v) => Ok(v.clone()),
            None => Ok(k
                .into_iter()
                .map(|v| if v.is_finite() { v } else { fallback })
                .collect()),
        }
    };
    let lower = pick(&g.grid_lower, k_lower, -DEFAULT_GRID_HALF_WIDTH, "grid-lower");
    let upper = pick(&g.grid_upper, k_upper, DEFAULT_GRID_HALF_WIDTH, "grid-upper");
    let (lower, upper) = match (lower, upper) {
        (Ok(l), Ok(u)) => (l, u),
        (l, u) => return Err(l.err().into_iter().chain(u.err()).collect()),
    };
    GridSpec::new(lower, upper, g.resolution, g.refinement, g.grid_tol).map_err(|e| vec![e.to_string()])
}

fn lower(a: LowerArgs, start: Instant) -> Output {
    let result = (|| {
        let loaded = load(&a.file)?;
        if a.x.len() != loaded.problem.n {
            return Err(vec![format!(
                "--x: has {} entries, expected {}",
                a.x.len(),
                loaded.problem.n
            )]);
        }
        let grid = grid_of(&loaded, &a.grid)?;
        let s = solve_lower_grid(&loaded.problem, &a.x, &grid).map_err(|e| vec![e.to_string()])?;
        let (phi0, argmin) = optimistic_response(&loaded.problem, &a.x, &grid).map_err(|e| vec![e.to_string()])?;
        Ok(LowerReport {
            tool: TOOL,
            version: VERSION,
            command: "lower",
            x: a.x.clone(),
            grid,
            solutions: s.points,
            lower_value: s.value,
            phi0,
            argmin,
            timing_ms: 0.0,
        })
    })();
    match result {
        Ok(mut r) => {
            r.timing_ms = elapsed_ms(start);
            Output {
                code: 0,
                stdout: render(&r),
                stderr: String::new(),
            }
        }
        Err(e) => error_output("lower", e, start),
    }
}

fn cone_record(label: String, description: Vec<String>, cone: &PolyhedralCone) -> ConeRecord {
    ConeRecord {
        label,
        description,
        generators: cone.to_generators(),
        halfspaces: cone.to_halfspaces(),
    }
}

fn cone(a: ConeArgs, start: Instant) -> Output {
    let result = (|| {
        let loaded = load(&a.file)?;
        let problem = &loaded.problem;
        let tol = loaded.tolerances.unwrap_or_default().active_set;
        let c = match &a.point {
            Some(_) => None,
            None => Some(candidate_of(&loaded, a.candidate.unwrap_or(0))?),
        };
        let expected = match a.which {
            Which::Omega => problem.n,
            Which::K => problem.m,
            Which::Gph => 2 * problem.m,
        };
        let point = match (&a.point, &c) {
            (Some(p), _) => p.clone(),
            (None, Some(c)) => match a.which {
                Which::Omega => c.x.clone(),
                Which::K => c.y.clone(),
                Which::Gph => c.y.iter().chain(&c.z).copied().collect(),
            },
            (None, None) => unreachable!(),
        };
        if point.len() != expected {
            return Err(vec![format!(
                "--point: has {} entries, expected {expected}",
                point.len()
            )]);
        }
        let cones = match a.which {
            Which::Omega => {
                let n = normal_cone_polyhedron(&problem.omega, &point, tol).map_err(|e| vec![format!("Omega: {e}")])?;
                vec![cone_record("N_Omega".into(), Vec::new(), &n)]
            }
            Which::K => {
                let n = match &problem.k {
                    LowerSet::Box(b) => normal_cone_box(b, &point, tol),
                    LowerSet::Polyhedron(p) => normal_cone_polyhedron(p, &point, tol),
                }
                .map_err(|e| vec![format!("K: {e}")])?;
                vec![cone_record("N_K".into(), Vec::new(), &n)]
            }
            Which::Gph => {
                let (y, z) = point.split_at(problem.m);
                let g = limiting_normal_cone_gph(&problem.k, y, z, tol, GraphCaps::default())
                    .map_err(|e| vec![format!("gph N_K: {e}")])?;
                g.branches()
                    .map(|b| cone_record(b.label.clone(), b.pattern.describe(), &b.cone))
                    .collect()
            }
        };
        Ok(ConeReport {
            tool: TOOL,
            version: VERSION,
            command: "cone",
            which: a.which.name(),
            point,
            cones,
            timing_ms: 0.0,
        })
    })();
    match result {
        Ok(mut r) => {
            r.timing_ms = elapsed_ms(start);
            Output {
                code: 0,
                stdout: render(&r),
                stderr: String::new(),
            }
        }
        Err(e) => error_output("cone", e, start),
    }
}

fn verify(a: VerifyArgs, start: Instant) -> Output {
    let result = (|| {
        let loaded = load(&a.file)?;
        let c = candidate_of(&loaded, a.candidate)?;
        if !(a.radius.is_finite() && a.radius >= 0.0 && a.value_tol.is_finite() && a.value_tol >= 0.0) {
            return Err(vec![
                "--radius and --value-tol must be finite and nonnegative".to_string()
            ]);
        }
        let grid = grid_of(&loaded, &a.grid)?;
        let result = verify_optimistic_local(&loaded.problem, &c, a.radius, &grid, a.value_tol)
            .map_err(|e| vec![e.to_string()])?;
        Ok(VerifyReport {
            tool: TOOL,
            version: VERSION,
            command: "verify",
            candidate: a.candidate,
            x: c.x,
            y: c.y,
            radius: a.radius,
            value_tol: a.value_tol,
            grid,
            result,
            timing_ms: 0.0,
        })
    })();
    match result {
        Ok(mut r) => {
            r.timing_ms = elapsed_ms(start);
            Output {
                code: if r.result.locally_optimal { 0 } else { 1 },
                stdout: render(&r),
                stderr: String::new(),
            }
        }
        Err(e) => error_output("verify", e, start),
    }
}
