//! The functional majorant
//!
//! ```text
//! 𝔐(v, ñ, β) = ½(1 + β)‖∇∇v − ñ‖² + 3/(2β) C_F² ‖(f − div Div ñ)₊‖² + ∫ (f − div Div ñ)(φ − v)
//! ```
//!
//! bounds `(1 − β)/2 (‖∇∇(u − v)‖² + ‖p* − ñ‖²) + μ_φ(v) + μ*_φ(ñ)` for every `β ∈ (0, 1]`
//! without requiring `ñ` to be feasible. At `β = 1` the quadratic terms on the left vanish.
//! Only the single-parameter form is implemented; splitting Young's inequality with
//! separate parameters per step could sharpen the bound further.

use serde::Serialize;

use crate::estimate::Estimate;
use crate::expr::Point;
use crate::fields::{check_h_divdiv, hessian, merged_breakpoints, scan_runs, Domain, PiecewiseScalarField, PiecewiseSymMatrixField, SAMPLES};
use crate::measures::{self, equilibrium_residual, MeasureError};
use crate::problems::ProblemInstance;
use crate::quadrature::{integrate_region, Geometry, QuadratureConfig, QuadratureError};

/// First positive zero of the Bessel function `J₀`.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404825557695773;

/// Smallest β the optimizer returns; as β → 0 the bound degenerates whenever the residual
/// term is nonzero, and for feasible fields the gain below this is marginal.
pub const BETA_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MajorantError {
    #[error("beta must lie in (0, 1], got {0}")]
    BetaOutOfRange(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl From<QuadratureError> for MajorantError {
    fn from(e: QuadratureError) -> Self {
        MajorantError::Measure(e.into())
    }
}

/// `C` with `‖w‖ ≤ C ‖∇∇w‖` on clamped functions, chained from the first-order constant:
/// `((b − a)/π)²` on an interval, `(R/j₀)²` on a disk.
pub fn friedrichs_constant(domain: &Domain) -> f64 {
    match *domain {
        Domain::Interval { a, b } => ((b - a) / std::f64::consts::PI).powi(2),
        Domain::Disk { radius } => (radius / BESSEL_J0_FIRST_ZERO).powi(2),
    }
}

/// `‖g₊‖²`. In 1D the positivity set is located per piece (512-point bracketing, then
/// bisection) and `g²` is integrated there only; on a disk `max(g, 0)²` is integrated over
/// radii where any probe angle is positive.
pub fn positive_part_l2_sq(g: &PiecewiseScalarField, cfg: &QuadratureConfig) -> Result<Estimate, QuadratureError> {
    let domain = *g.domain();
    let t = g.compile();
    let mut runs = Vec::new();
    for piece in g.pieces() {
        let pt = piece.expr.compile();
        let positive = |s: f64| match domain {
            Domain::Interval { .. } => pt.eval(Point::Line(s)) > 0.0,
            Domain::Disk { .. } => (0..32).any(|j| pt.eval(domain.point(s, 0.05 + j as f64 * std::f64::consts::PI / 16.0)) > 0.0),
        };
        runs.extend(scan_runs(piece.lo, piece.hi, SAMPLES, positive));
    }
    if runs.is_empty() {
        return Ok(Estimate::zero());
    }
    let breaks = g.breakpoints();
    match domain.geometry() {
        Geometry::Line => integrate_region(Geometry::Line, &runs, &breaks, |p| t.eval(p).powi(2), cfg),
        Geometry::Disk => integrate_region(Geometry::Disk, &runs, &breaks, |p| t.eval(p).max(0.0).powi(2), cfg),
    }
}

/// `C_F ‖(f − div Div ñ)₊‖`, an upper bound on the distance from `ñ` to the feasible set.
pub fn projection_bound(n: &PiecewiseSymMatrixField, f: &PiecewiseScalarField, friedrichs: f64, cfg: &QuadratureConfig) -> Result<f64, MajorantError> {
    require_member(n)?;
    let g = equilibrium_residual(f, n).map_err(MeasureError::from)?;
    Ok(friedrichs * positive_part_l2_sq(&g, cfg)?.value.sqrt())
}

fn require_member(n: &PiecewiseSymMatrixField) -> Result<(), MajorantError> {
    let report = check_h_divdiv(n);
    if report.is_member() {
        Ok(())
    } else {
        Err(MeasureError::NotInHDivDiv(report.failing_interfaces()).into())
    }
}

/// Pieces of the left-hand side, available when the problem knows its exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorParts {
    /// `‖∇∇(u − v)‖²`.
    pub primal_sq: Estimate,
    /// `‖p* − ñ‖²`.
    pub dual_sq: Estimate,
    pub mu_phi: Estimate,
    pub mu_star_phi: Estimate,
}

impl ErrorParts {
    /// `(1 − β)/2 (‖∇∇(u − v)‖² + ‖p* − ñ‖²) + μ_φ + μ*_φ`.
    pub fn lhs(&self, beta: f64) -> Estimate {
        (self.primal_sq + self.dual_sq) * (0.5 * (1.0 - beta)) + self.mu_phi + self.mu_star_phi
    }

    /// The same with prefactor `(2 − β)/2`, matching a published lhs line that cannot be
    /// reproduced from the literal bound.
    pub fn lhs_compat(&self, beta: f64) -> Estimate {
        (self.primal_sq + self.dual_sq) * (0.5 * (2.0 - beta)) + self.mu_phi + self.mu_star_phi
    }
}

/// β-independent ingredients; [`MajorantComponents::report`] assembles any β cheaply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorantComponents {
    /// `‖∇∇v − ñ‖²`.
    pub quadratic_sq: Estimate,
    /// `‖(f − div Div ñ)₊‖²`.
    pub positive_sq: Estimate,
    /// `∫ (f − div Div ñ)(φ − v)`.
    pub obstacle: Estimate,
    pub friedrichs: f64,
    pub exact: Option<ErrorParts>,
}

/// `𝔐(β) = a0 + a1 β + a2/β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorantReport {
    pub beta: f64,
    pub term_quadratic: Estimate,
    pub term_residual: Estimate,
    pub term_obstacle: Estimate,
    pub majorant_total: Estimate,
    pub coefficients: Coefficients,
    pub lhs_total: Option<Estimate>,
    pub lhs_compat: Option<Estimate>,
    pub efficiency: Option<f64>,
    pub efficiency_compat: Option<f64>,
}

impl MajorantReport {
    /// `𝔐 ≥ lhs` up to the quadrature budget plus `1e−6` relative; `None` without an exact pair.
    pub fn is_valid(&self) -> Option<bool> {
        self.lhs_total.map(|lhs| {
            let budget = self.majorant_total.error + lhs.error + 1e-6 * lhs.value.abs();
            self.majorant_total.value >= lhs.value - budget
        })
    }
}

impl MajorantComponents {
    pub fn coefficients(&self) -> Coefficients {
        let half_q = 0.5 * self.quadratic_sq.value;
        Coefficients {
            a0: half_q + self.obstacle.value,
            a1: half_q,
            a2: 1.5 * self.friedrichs.powi(2) * self.positive_sq.value,
        }
    }

    pub fn report(&self, beta: f64) -> Result<MajorantReport, MajorantError> {
        check_beta(beta)?;
        let term_quadratic = self.quadratic_sq * (0.5 * (1.0 + beta));
        let term_residual = self.positive_sq * (1.5 * self.friedrichs.powi(2) / beta);
        let term_obstacle = self.obstacle;
        let majorant_total = term_quadratic + term_residual + term_obstacle;
        let lhs_total = self.exact.map(|e| e.lhs(beta));
        let lhs_compat = self.exact.map(|e| e.lhs_compat(beta));
        let ratio = |lhs: Estimate| (lhs.value != 0.0).then(|| majorant_total.value / lhs.value);
        Ok(MajorantReport {
            beta,
            term_quadratic,
            term_residual,
            term_obstacle,
            majorant_total,
            coefficients: self.coefficients(),
            lhs_total,
            lhs_compat,
            efficiency: lhs_total.and_then(ratio),
            efficiency_compat: lhs_compat.and_then(ratio),
        })
    }

    /// `β* = min(1, max(0.05, √(a2/a1)))`; `β* = 1` when both coefficients vanish or `a1 = 0`.
    pub fn optimal_beta(&self) -> f64 {
        let c = self.coefficients();
        if c.a1 <= 0.0 {
            1.0
        } else {
            (c.a2 / c.a1).sqrt().clamp(BETA_FLOOR, 1.0)
        }
    }
}

fn check_beta(beta: f64) -> Result<(), MajorantError> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(MajorantError::BetaOutOfRange(beta))
    }
}

/// Computes every β-independent integral once.
pub fn majorant_components(
    problem: &ProblemInstance,
    v: &PiecewiseScalarField,
    n: &PiecewiseSymMatrixField,
    cfg: &QuadratureConfig,
) -> Result<MajorantComponents, MajorantError> {
    require_member(n)?;
    let hv = hessian(v).compile();
    let nc = n.compile();
    let breaks = merged_breakpoints([v.breakpoints().as_slice(), n.breakpoints().as_slice()]);
    let extent = [problem.domain.extent()];
    let quadratic_sq = integrate_region(problem.domain.geometry(), &extent, &breaks, |p| {
        let (a, b) = (hv.eval(p), nc.eval(p));
        crate::fields::frobenius_sq([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
    }, cfg)?;
    let g = equilibrium_residual(&problem.f, n).map_err(MeasureError::from)?;
    let positive_sq = positive_part_l2_sq(&g, cfg)?;
    let obstacle = measures::obstacle_term(problem, v, n, cfg)?;

    let exact = match &problem.exact {
        None => None,
        Some(_) => {
            let primal = measures::mu_primal(problem, v, cfg)?;
            let dual = measures::mu_dual(problem, n, cfg)?;
            Some(ErrorParts {
                primal_sq: primal.quadratic * 2.0,
                dual_sq: dual.breakdown.quadratic * 2.0,
                mu_phi: primal.nonlinear,
                mu_star_phi: dual.breakdown.nonlinear,
            })
        }
    };
    Ok(MajorantComponents { quadratic_sq, positive_sq, obstacle, friedrichs: problem.friedrichs, exact })
}

/// `𝔐(v, ñ, β)` with the left-hand side and efficiency when the exact pair is known.
pub fn majorant_eval(
    problem: &ProblemInstance,
    v: &PiecewiseScalarField,
    n: &PiecewiseSymMatrixField,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<MajorantReport, MajorantError> {
    check_beta(beta)?;
    majorant_components(problem, v, n, cfg)?.report(beta)
}

/// Minimizes `𝔐` over β in closed form and reports at the minimizer.
pub fn optimize_beta(
    problem: &ProblemInstance,
    v: &PiecewiseScalarField,
    n: &PiecewiseSymMatrixField,
    cfg: &QuadratureConfig,
) -> Result<(f64, MajorantReport), MajorantError> {
    let components = majorant_components(problem, v, n, cfg)?;
    let beta = components.optimal_beta();
    Ok((beta, components.report(beta)?))
}

/// `k` evenly spaced values from `a` to `b` inclusive.
pub fn beta_grid(a: f64, b: f64, k: usize) -> Result<Vec<f64>, MajorantError> {
    let grid: Vec<f64> = match k {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
    };
    for &beta in &grid {
        check_beta(beta)?;
    }
    Ok(grid)
}
