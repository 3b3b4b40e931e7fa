//! The `certify` command line.
//!
//! Exit codes: `0` all checks passed, `1` validation or usage failure, `2` dual field
//! infeasible where feasibility is required, `3` quadrature did not converge.

pub mod plot;
pub mod report;
pub mod tables;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::majorant::{beta_grid, majorant_components, MajorantError};
use crate::measures::{check_feasibility, verify_identity, MeasureError};
use crate::problems::{load_problem_file, ApproximationHandle, ProblemError, ProblemInstance, Registry};
use crate::quadrature::{QuadratureConfig, QuadratureError};

pub use report::{Format, Report, Row};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// Environment variable that, when set, replaces `--out`.
pub const OUT_ENV: &str = "CERTIFY_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error("{0}")]
    Quadrature(#[from] QuadratureError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_VALIDATION
    }
}

#[derive(Debug, Parser)]
#[command(name = "certify", version, about = "Guaranteed error measures and majorants for the biharmonic obstacle problem")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Relative tolerance of the adaptive quadrature
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Absolute tolerance of the adaptive quadrature
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Trapezoid points per circle on disk domains
    #[arg(long, global = true, default_value_t = 64)]
    pub angular_points: usize,
    /// Directory for report files (overridden by CERTIFY_OUT)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Load additional problems from a problem file
    #[arg(long, global = true)]
    pub problem_file: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate both sides of the error identity for a primal/dual pair
    Identity { problem: String, primal: String, dual: String },
    /// Evaluate the majorant for a primal/dual pair
    Majorant {
        problem: String,
        primal: String,
        dual: String,
        /// A single β in (0, 1]
        #[arg(long, conflicts_with_all = ["beta_grid", "optimize_beta"])]
        beta: Option<f64>,
        /// Evenly spaced β values `a:b:n`
        #[arg(long, conflicts_with = "optimize_beta")]
        beta_grid: Option<String>,
        /// Minimize over β (the default when no β is given)
        #[arg(long)]
        optimize_beta: bool,
    },
    /// Recompute table 1, 2 or 3 of the one-dimensional model
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
    },
    /// Plot fields as SVG (prefix a name with `d` for its derivative)
    Plot {
        problem: String,
        #[arg(required = true)]
        fields: Vec<String>,
    },
    /// Validate a problem file and summarize its approximations
    Load { file: PathBuf },
}

/// Outcome of one invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    /// Report data, written to stdout or `<out>/<file_name>`.
    pub output: String,
    pub file_name: String,
    /// Human-readable summary for stderr.
    pub summary: Vec<String>,
}

impl GlobalOpts {
    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let cfg = QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            angular_points: self.angular_points,
            ..QuadratureConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `CERTIFY_OUT` if set, else `--out`.
    pub fn out_dir(&self) -> Option<PathBuf> {
        std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from).or_else(|| self.out.clone())
    }

    fn registry(&self) -> Result<Registry, CliError> {
        let mut registry = Registry::with_builtins();
        for path in &self.problem_file {
            registry.register(load_problem_file(path)?);
        }
        Ok(registry)
    }
}

/// Parses `name`, `name@value` (the family's only parameter), or `name@k=v,k=v`.
pub fn parse_approx(problem: &ProblemInstance, text: &str) -> Result<ApproximationHandle, CliError> {
    let Some((name, params)) = text.split_once('@') else {
        return Ok(problem.approximation(text, &BTreeMap::new())?);
    };
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("`{s}` is not a number in `{text}`")));
    if !params.contains('=') {
        return Ok(problem.approx(name, Some(number(params)?))?);
    }
    let mut map = BTreeMap::new();
    for kv in params.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value in `{text}`")))?;
        map.insert(k.trim().to_string(), number(v)?);
    }
    Ok(problem.approximation(name, &map)?)
}

fn primal_and_dual(
    problem: &ProblemInstance,
    primal: &str,
    dual: &str,
) -> Result<(ApproximationHandle, ApproximationHandle), CliError> {
    let v = parse_approx(problem, primal)?;
    let n = parse_approx(problem, dual)?;
    if v.primal().is_none() {
        return Err(CliError::Usage(format!("`{primal}` is not a primal approximation")));
    }
    if n.dual().is_none() {
        return Err(CliError::Usage(format!("`{dual}` is not a dual approximation")));
    }
    Ok((v, n))
}

fn finish(command: &str, rows: Vec<Row>, converged: bool, code: i32, format: Format, file: String, summary: Vec<String>) -> Outcome {
    let failed_rows = rows.iter().any(Row::is_failure);
    let converged = converged && rows.iter().all(|r| r.converged);
    let exit_code = if code != EXIT_OK {
        code
    } else if !converged {
        EXIT_NONCONVERGENCE
    } else if failed_rows {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    };
    let status = match exit_code {
        EXIT_OK => "PASS",
        EXIT_INFEASIBLE => "INFEASIBLE",
        EXIT_NONCONVERGENCE => "NOT CONVERGED",
        _ => "FAIL",
    };
    let report = Report { command: command.to_string(), status: status.into(), exit_code, rows };
    let mut summary = summary;
    summary.push(format!("status: {status}"));
    Outcome { exit_code, output: report.render(format), file_name: format!("{file}.{}", format.extension()), summary }
}

/// Published values for the built-in identity pairs: μ split, μ* split, rhs split.
fn identity_references(problem: &str, primal: &str, dual: &str) -> Option<[f64; 6]> {
    match (problem, primal, dual) {
        ("model_1d", "v1", "nstar") => Some([125.156, 152.89, 74.74, 156.8, 23.063, 486.515]),
        ("circular_plate", "v2", "nhat") => Some([157.19, 0.0, 14.84, 63.46, 111.15, 124.34]),
        _ => None,
    }
}

fn cmd_identity(opts: &GlobalOpts, problem: &ProblemInstance, primal: &str, dual: &str) -> Result<Outcome, CliError> {
    let cfg = opts.quadrature()?;
    let (v, n) = primal_and_dual(problem, primal, dual)?;
    let (vf, nf) = (v.primal().unwrap(), n.dual().unwrap());
    let file = format!("identity-{}-{}-{}", problem.name, v.label(), n.label());
    let feasibility = check_feasibility(nf, &problem.f)?;
    if !feasibility.feasible {
        let summary = vec![
            format!("{} is infeasible: f - div Div n > 0 on {}", n.label(), feasibility.violation),
            "the error identity does not apply; use `certify majorant` instead".into(),
        ];
        let rows = vec![Row::exact("max(f - div Div n)", feasibility.max_residual).note(format!("violation set {}", feasibility.violation))];
        return Ok(finish("identity", rows, true, EXIT_INFEASIBLE, opts.format, file, summary));
    }
    let r = verify_identity(problem, vf, nf, &cfg)?;
    let refs = identity_references(&problem.name, &v.label(), &n.label());
    let at = |i: usize| refs.map(|r| r[i]);
    let rows = vec![
        Row::new("mu_quadratic", r.lhs_primal.quadratic).reference(at(0)),
        Row::new("mu_phi", r.lhs_primal.nonlinear).reference(at(1)),
        Row::new("mu_jump_part", r.lhs_primal.jump_part),
        Row::new("mu", r.lhs_primal.total),
        Row::new("mu_star_quadratic", r.lhs_dual.quadratic).reference(at(2)),
        Row::new("mu_star_phi", r.lhs_dual.nonlinear).reference(at(3)),
        Row::new("mu_star", r.lhs_dual.total),
        Row::new("lhs", r.lhs_total),
        Row::new("rhs_quadratic", r.rhs.quadratic).reference(at(4)),
        Row::new("rhs_obstacle", r.rhs.obstacle).reference(at(5)),
        Row::new("rhs", r.rhs.total),
        Row::exact("residual", r.residual).note(if r.residual <= r.budget { "" } else { "FAIL: exceeds budget" }),
        Row::exact("budget", r.budget),
    ];
    let summary = vec![format!(
        "{} + {} : lhs {} = rhs {} (residual {:.2e}, budget {:.2e})",
        v.label(),
        n.label(),
        report::sig6(r.lhs_total.value),
        report::sig6(r.rhs.total.value),
        r.residual,
        r.budget
    )];
    Ok(finish("identity", rows, r.converged, EXIT_OK, opts.format, file, summary))
}

/// Published coefficient form and efficiencies for the infeasible 1D pair.
const MAJORANT_REFS: ([f64; 3], f64, [(f64, f64); 2]) = ([352.44, 33.08, 189.22], 524.95, [(0.5, 1.66), (1.0, 1.53)]);

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("--beta-grid expects a:b:n, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let k: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(beta_grid(a, b, k)?)
}

fn cmd_majorant(
    opts: &GlobalOpts,
    problem: &ProblemInstance,
    primal: &str,
    dual: &str,
    beta: Option<f64>,
    grid: Option<&str>,
) -> Result<Outcome, CliError> {
    let cfg = opts.quadrature()?;
    let betas = match (beta, grid) {
        (Some(b), _) => Some(beta_grid(b, b, 1)?),
        (None, Some(g)) => Some(parse_grid(g)?),
        (None, None) => None,
    };
    let (v, n) = primal_and_dual(problem, primal, dual)?;
    let c = majorant_components(problem, v.primal().unwrap(), n.dual().unwrap(), &cfg)?;
    let betas = betas.unwrap_or_else(|| vec![c.optimal_beta()]);
    let published = problem.name == "model_1d" && v.label() == "v1" && n.label() == "ntilde";
    let (coef_refs, intercept_ref, eff_refs) = MAJORANT_REFS;
    let reference = |r: f64| published.then_some(r);
    let mismatch_note = "published coefficient form is not reproduced by the stated majorant";

    let k = c.coefficients();
    let mut rows = vec![
        Row::new("quadratic_sq", c.quadratic_sq),
        Row::new("positive_part_sq", c.positive_sq),
        Row::new("obstacle_term", c.obstacle),
        Row::exact("friedrichs", c.friedrichs),
        Row::exact("optimal_beta", c.optimal_beta()),
    ];
    for (name, value, r) in [("coef_const", k.a0, coef_refs[0]), ("coef_beta", k.a1, coef_refs[1]), ("coef_inv_beta", k.a2, coef_refs[2])] {
        let row = Row::exact(name, value).reference(reference(r));
        rows.push(if published && row.is_failure() { row.note(mismatch_note) } else { row });
    }
    if let Some(e) = c.exact {
        rows.push(Row::new("lhs_compat_at_beta0", e.lhs_compat(0.0)).reference(reference(intercept_ref)));
    }
    let mut converged = c.quadratic_sq.converged && c.positive_sq.converged && c.obstacle.converged;
    let mut valid = true;
    let mut summary = vec![format!(
        "M(beta) = {} + {} beta + {} / beta",
        report::sig6(k.a0),
        report::sig6(k.a1),
        report::sig6(k.a2)
    )];
    for beta in betas {
        let r = c.report(beta)?;
        let tag = |s: &str| format!("{s}[beta={}]", report::sig6(beta));
        rows.push(Row::new(tag("term_quadratic"), r.term_quadratic));
        rows.push(Row::new(tag("term_residual"), r.term_residual));
        rows.push(Row::new(tag("term_obstacle"), r.term_obstacle));
        rows.push(Row::new(tag("majorant"), r.majorant_total));
        if let (Some(lhs), Some(compat)) = (r.lhs_total, r.lhs_compat) {
            converged &= lhs.converged;
            let ok = r.is_valid().unwrap_or(true);
            valid &= ok;
            rows.push(Row::new(tag("lhs"), lhs).note(if ok { "" } else { "FAIL: majorant below lhs" }));
            rows.push(Row::new(tag("lhs_compat"), compat));
            rows.push(Row::exact(tag("efficiency"), r.efficiency.unwrap_or(f64::NAN)));
            let eff_ref = eff_refs.iter().find(|(b, _)| *b == beta).map(|(_, e)| *e).filter(|_| published);
            let row = Row::exact(tag("efficiency_compat"), r.efficiency_compat.unwrap_or(f64::NAN)).reference(eff_ref);
            rows.push(if row.is_failure() { row.note(mismatch_note) } else { row });
        }
        summary.push(format!(
            "beta {}: M = {}{}",
            report::sig6(beta),
            report::sig6(r.majorant_total.value),
            r.lhs_total.map(|l| format!(" >= lhs {}", report::sig6(l.value))).unwrap_or_default()
        ));
    }
    let code = if valid { EXIT_OK } else { EXIT_VALIDATION };
    let file = format!("majorant-{}-{}-{}", problem.name, v.label(), n.label());
    Ok(finish("majorant", rows, converged, code, opts.format, file, summary))
}

fn cmd_table(opts: &GlobalOpts, id: u8) -> Result<Outcome, CliError> {
    let cfg = opts.quadrature()?;
    let rows = tables::table(id, &cfg)?;
    let summary = rows.iter().filter(|r| !r.note.is_empty()).map(|r| format!("{}: {}", r.quantity, r.note)).collect();
    Ok(finish("table", rows, true, EXIT_OK, opts.format, format!("table{id}"), summary))
}

fn cmd_load(opts: &GlobalOpts, file: &Path) -> Result<Outcome, CliError> {
    let problem = load_problem_file(file)?;
    let mut rows = vec![
        Row::exact("friedrichs", problem.friedrichs),
        Row::exact("approximations", problem.approximations().len() as f64),
    ];
    let mut summary = vec![format!(
        "{}: {:?}, {} approximation(s), exact solution {}",
        problem.name,
        problem.domain,
        problem.approximations().len(),
        if problem.exact.is_some() { "given" } else { "absent" }
    )];
    for spec in problem.approximations() {
        if !spec.params.is_empty() {
            summary.push(format!("  {} (family: {})", spec.name, spec.description));
            continue;
        }
        let handle = problem.approximation(&spec.name, &BTreeMap::new())?;
        if let Some(n) = handle.dual() {
            let f = check_feasibility(n, &problem.f)?;
            rows.push(Row::exact(format!("{} max(f - div Div n)", spec.name), f.max_residual).note(if f.feasible {
                "feasible".to_string()
            } else {
                format!("infeasible on {}", f.violation)
            }));
        }
        summary.push(format!("  {} ({:?})", spec.name, spec.kind));
    }
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("problem").to_string();
    Ok(finish("load", rows, true, EXIT_OK, opts.format, format!("load-{stem}"), summary))
}

/// Runs a parsed command without touching stdout or the filesystem.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = &cli.opts;
    opts.quadrature()?;
    match &cli.command {
        Command::Identity { problem, primal, dual } => {
            let registry = opts.registry()?;
            cmd_identity(opts, registry.get(problem)?, primal, dual)
        }
        Command::Majorant { problem, primal, dual, beta, beta_grid, .. } => {
            let registry = opts.registry()?;
            cmd_majorant(opts, registry.get(problem)?, primal, dual, *beta, beta_grid.as_deref())
        }
        Command::Table { id } => cmd_table(opts, *id),
        Command::Plot { problem, fields } => {
            let registry = opts.registry()?;
            let svg = plot::plot(registry.get(problem)?, fields)?;
            Ok(Outcome {
                exit_code: EXIT_OK,
                output: svg,
                file_name: format!("plot-{problem}-{}.svg", fields.join("_").replace(['@', '=', ','], "-")),
                summary: Vec::new(),
            })
        }
        Command::Load { file } => cmd_load(opts, file),
    }
}

/// Parses `args`, runs, writes output, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                eprintln!("{line}");
            }
            match cli.opts.out_dir() {
                Some(dir) => {
                    let path = dir.join(&outcome.file_name);
                    if let Err(source) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, &outcome.output)) {
                        eprintln!("error: {}", CliError::Io { path, source });
                        return EXIT_VALIDATION;
                    }
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", outcome.output),
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
