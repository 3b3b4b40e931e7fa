//! Problem instances: data `(Ω, f, φ)`, an optional exact pair `(u, p*)`, and named
//! approximations. Two instances are built in; more can be loaded from problem files.

mod builtin;
mod file;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::fields::{
    check_admissible, check_h_divdiv, hessian, Domain, FieldError, PiecewiseScalarField, PiecewiseSymMatrixField,
    SubdomainSet,
};
use crate::majorant::friedrichs_constant;

pub use builtin::{builtin, builtin_ids, circular_plate, model_1d};
pub use file::{load_problem, load_problem_file};

/// Pointwise tolerance for `p* = ∇∇u`.
pub const PSTAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("problem `{problem}` has no approximation `{name}`")]
    UnknownApproximation { problem: String, name: String },
    #[error("approximation `{name}` has no parameter `{param}`")]
    UnknownParameter { name: String, param: String },
    #[error("parameter `{param}` = {value} is outside [{min}, {max}]")]
    ParameterOutOfRange { param: String, value: f64, min: f64, max: f64 },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid problem:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The exact solution and what is known about its contact region.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub u: PiecewiseScalarField,
    pub p_star: PiecewiseSymMatrixField,
    /// `Ω_φ`.
    pub coincidence: SubdomainSet,
    /// `Γ_u`: interior boundary points (1D) or radii (disk) of `Ω_φ`.
    pub free_boundary: Vec<f64>,
}

impl ExactSolution {
    pub fn new(u: PiecewiseScalarField, p_star: PiecewiseSymMatrixField, coincidence: SubdomainSet) -> Self {
        let free_boundary = coincidence.interfaces(u.domain().extent());
        ExactSolution { u, p_star, coincidence, free_boundary }
    }

    /// `Ω₀ = Ω ∖ Ω_φ`.
    pub fn non_contact(&self) -> SubdomainSet {
        self.coincidence.complement_in(self.u.domain().extent())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxKind {
    Primal,
    Dual,
}

impl fmt::Display for ApproxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApproxKind::Primal => "primal",
            ApproxKind::Dual => "dual",
        })
    }
}

#[derive(Debug, Clone)]
pub enum ApproxField {
    Primal(PiecewiseScalarField),
    Dual(PiecewiseSymMatrixField),
}

/// A constructed approximation.
#[derive(Debug, Clone)]
pub struct ApproximationHandle {
    pub name: String,
    pub kind: ApproxKind,
    pub field: ApproxField,
    pub parameters: BTreeMap<String, f64>,
}

impl ApproximationHandle {
    pub fn primal(&self) -> Option<&PiecewiseScalarField> {
        match &self.field {
            ApproxField::Primal(v) => Some(v),
            ApproxField::Dual(_) => None,
        }
    }

    pub fn dual(&self) -> Option<&PiecewiseSymMatrixField> {
        match &self.field {
            ApproxField::Dual(n) => Some(n),
            ApproxField::Primal(_) => None,
        }
    }

    /// `name` or `name@k=v,...` for display.
    pub fn label(&self) -> String {
        if self.parameters.is_empty() {
            return self.name.clone();
        }
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}@{}", self.name, params.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

type Builder = Arc<dyn Fn(&BTreeMap<String, f64>) -> Result<ApproxField, ProblemError> + Send + Sync>;

/// A named approximation, possibly a one- or multi-parameter family.
#[derive(Clone)]
pub struct ApproximationSpec {
    pub name: String,
    pub kind: ApproxKind,
    pub params: Vec<ParamSpec>,
    pub description: String,
    build: Builder,
}

impl fmt::Debug for ApproximationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApproximationSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ApproximationSpec {
    pub fn fixed(name: &str, description: &str, field: ApproxField) -> Self {
        let kind = match field {
            ApproxField::Primal(_) => ApproxKind::Primal,
            ApproxField::Dual(_) => ApproxKind::Dual,
        };
        ApproximationSpec {
            name: name.to_string(),
            kind,
            params: Vec::new(),
            description: description.to_string(),
            build: Arc::new(move |_| Ok(field.clone())),
        }
    }

    pub fn family<F>(name: &str, description: &str, kind: ApproxKind, params: Vec<ParamSpec>, build: F) -> Self
    where
        F: Fn(&BTreeMap<String, f64>) -> Result<ApproxField, ProblemError> + Send + Sync + 'static,
    {
        ApproximationSpec { name: name.to_string(), kind, params, description: description.to_string(), build: Arc::new(build) }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub domain: Domain,
    pub f: PiecewiseScalarField,
    pub phi: PiecewiseScalarField,
    /// `C_F` in `‖w‖ ≤ C_F ‖∇∇w‖`.
    pub friedrichs: f64,
    pub exact: Option<ExactSolution>,
    approximations: Vec<ApproximationSpec>,
}

impl ProblemInstance {
    /// Assembles and validates an instance. `friedrichs = None` uses the chained constant
    /// of the domain.
    pub fn new(
        name: &str,
        f: PiecewiseScalarField,
        phi: PiecewiseScalarField,
        friedrichs: Option<f64>,
        exact: Option<ExactSolution>,
        approximations: Vec<ApproximationSpec>,
    ) -> Result<Self, ProblemError> {
        let domain = *f.domain();
        let instance = ProblemInstance {
            name: name.to_string(),
            domain,
            f,
            phi,
            friedrichs: friedrichs.unwrap_or_else(|| friedrichs_constant(&domain)),
            exact,
            approximations,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Checks the standing assumptions: shared domain, `φ ≤ 0` on `∂Ω`, and, if an exact
    /// pair is present, `u ∈ 𝕂` and `p* = ∇∇u` on samples of `Ω₀`.
    pub fn validate(&self) -> Result<(), ProblemError> {
        let mut problems = Vec::new();
        if self.phi.domain() != &self.domain {
            problems.push("obstacle: domain differs from the load's".to_string());
        }
        if !(self.friedrichs > 0.0 && self.friedrichs.is_finite()) {
            problems.push(format!("friedrichs: constant {} must be positive", self.friedrichs));
        }
        let (lo, hi) = self.domain.extent();
        let boundary: Vec<f64> = match self.domain {
            Domain::Interval { .. } => vec![lo, hi],
            Domain::Disk { .. } => vec![hi],
        };
        for &s in &boundary {
            for k in 0..16 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
                match self.phi.evaluate(self.domain.point(s, theta)) {
                    Ok(v) if v > 0.0 => {
                        problems.push(format!("obstacle: φ = {v} > 0 on the boundary at {s}"));
                        break;
                    }
                    Ok(_) => {}
                    Err(e) => problems.push(format!("obstacle: cannot evaluate on the boundary: {e}")),
                }
                if matches!(self.domain, Domain::Interval { .. }) {
                    break;
                }
            }
        }
        if let Some(exact) = &self.exact {
            if exact.u.domain() != &self.domain || exact.p_star.domain() != &self.domain {
                problems.push("exact: domain differs from the load's".to_string());
            } else {
                match check_admissible(&exact.u, &self.phi) {
                    Ok(r) if !r.is_admissible() => {
                        problems.push(format!("exact.u: not admissible ({} violations)", r.violations.len()))
                    }
                    Ok(_) => {}
                    Err(e) => problems.push(format!("exact.u: {e}")),
                }
                if let Some(msg) = pstar_mismatch(exact) {
                    problems.push(msg);
                }
                for &g in &exact.free_boundary {
                    if !exact.u.breakpoints().iter().any(|&b| (b - g).abs() <= 1e-12 * b.abs().max(1.0)) {
                        problems.push(format!("exact.u: free boundary {g} is not a piece interface of u"));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ProblemError::Invalid(problems))
        }
    }

    pub fn approximations(&self) -> &[ApproximationSpec] {
        &self.approximations
    }

    pub fn spec(&self, name: &str) -> Result<&ApproximationSpec, ProblemError> {
        self.approximations
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| ProblemError::UnknownApproximation { problem: self.name.clone(), name: name.to_string() })
    }

    /// Builds approximation `name`. Missing parameters default to the lower end of their range.
    /// Primal results must lie in `𝕂`, dual results in `H(div Div)`.
    pub fn approximation(&self, name: &str, params: &BTreeMap<String, f64>) -> Result<ApproximationHandle, ProblemError> {
        let spec = self.spec(name)?;
        let mut values = BTreeMap::new();
        for (k, &v) in params {
            let Some(p) = spec.params.iter().find(|p| &p.name == k) else {
                return Err(ProblemError::UnknownParameter { name: name.to_string(), param: k.clone() });
            };
            if !(p.min..=p.max).contains(&v) {
                return Err(ProblemError::ParameterOutOfRange { param: k.clone(), value: v, min: p.min, max: p.max });
            }
            values.insert(k.clone(), v);
        }
        for p in &spec.params {
            values.entry(p.name.clone()).or_insert(p.min);
        }
        let field = (spec.build)(&values)?;
        match &field {
            ApproxField::Primal(v) => {
                let report = check_admissible(v, &self.phi)?;
                if !report.is_admissible() {
                    return Err(ProblemError::Invalid(vec![format!(
                        "{name}: not admissible, e.g. {}",
                        report.violations[0]
                    )]));
                }
            }
            ApproxField::Dual(n) => {
                let report = check_h_divdiv(n);
                if !report.is_member() {
                    return Err(ProblemError::Invalid(vec![format!(
                        "{name}: not in H(div Div); failing interfaces {:?}",
                        report.failing_interfaces()
                    )]));
                }
            }
        }
        Ok(ApproximationHandle { name: name.to_string(), kind: spec.kind, field, parameters: values })
    }

    /// Shorthand for an approximation with at most one parameter.
    pub fn approx(&self, name: &str, param: Option<f64>) -> Result<ApproximationHandle, ProblemError> {
        let mut params = BTreeMap::new();
        if let Some(v) = param {
            let spec = self.spec(name)?;
            let Some(p) = spec.params.first() else {
                return Err(ProblemError::UnknownParameter { name: name.to_string(), param: "<positional>".into() });
            };
            params.insert(p.name.clone(), v);
        }
        self.approximation(name, &params)
    }
}

fn pstar_mismatch(exact: &ExactSolution) -> Option<String> {
    let h = hessian(&exact.u).compile();
    let p = exact.p_star.compile();
    let domain = *exact.u.domain();
    for &(a, b) in exact.non_contact().components() {
        for k in 1..64 {
            let s = a + (b - a) * k as f64 / 64.0;
            for j in 0..8 {
                let point = domain.point(s, 0.3 + j as f64 * 0.785);
                let (x, y) = (h.eval(point), p.eval(point));
                for i in 0..3 {
                    if (x[i] - y[i]).abs() > PSTAR_TOL * x[i].abs().max(1.0) {
                        return Some(format!("exact.pstar: differs from the Hessian of u at {s} (entry {i}: {} vs {})", y[i], x[i]));
                    }
                }
                if matches!(domain, Domain::Interval { .. }) {
                    break;
                }
            }
        }
    }
    None
}

/// Problems addressable by name: the built-ins plus anything registered.
#[derive(Debug, Clone)]
pub struct Registry {
    problems: BTreeMap<String, ProblemInstance>,
}

impl Registry {
    pub fn with_builtins() -> Self {
        let problems = builtin_ids().iter().map(|id| (id.to_string(), builtin(id).expect("built-in problems are valid"))).collect();
        Registry { problems }
    }

    pub fn register(&mut self, problem: ProblemInstance) {
        self.problems.insert(problem.name.clone(), problem);
    }

    pub fn get(&self, name: &str) -> Result<&ProblemInstance, ProblemError> {
        self.problems.get(name).ok_or_else(|| ProblemError::UnknownProblem(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.problems.keys().map(String::as_str)
    }
}

/// Builds a named approximation of a built-in problem.
pub fn approximation(problem: &str, name: &str, params: &BTreeMap<String, f64>) -> Result<ApproximationHandle, ProblemError> {
    builtin(problem)?.approximation(name, params)
}
