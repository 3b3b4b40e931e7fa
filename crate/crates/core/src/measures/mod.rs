//! Error measures, energies, the error identity, and dual feasibility.
//!
//! For an admissible `v` and a moment field `n` in `H(div Div)`:
//!
//! ```text
//! μ(v)  = ½‖∇∇(u − v)‖² + μ_φ(v),   μ_φ(v)  = ∫_{Ω_φ} (div Div ∇∇u − f)(v − u) − Σ_Γ [Div ∇∇u · ν](v − u)
//! μ*(n) = ½‖p* − n‖²    + μ*_φ(n),  μ*_φ(n) = ∫_{Ω₀} (f − div Div n)(φ − u)
//! μ(v) + μ*(n) = ½‖∇∇v − n‖² + ∫ (f − div Div n)(φ − v)        when f − div Div n ≤ 0
//! ```

use serde::Serialize;

use crate::estimate::Estimate;
use crate::expr::Point;
use crate::fields::{
    check_h_divdiv, div_div, flux_jump, frobenius_sq, hessian, laplacian, merged_breakpoints, scan_runs, Domain,
    FieldError, JumpValue, PiecewiseScalarField, PiecewiseSymMatrixField, SubdomainSet, SAMPLES,
};
use crate::problems::{ExactSolution, ProblemInstance};
use crate::quadrature::{integrate_region, periodic_trapezoid, QuadratureConfig, QuadratureError};

/// `g = f − div Div n` counts as violating `g ≤ 0` only above this.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("problem `{0}` has no exact solution")]
    MissingExact(String),
    #[error("moment field is not in H(div Div): entries or Div jump at {0:?}")]
    NotInHDivDiv(Vec<f64>),
}

/// Quadratic part, nonlinear part (which includes `jump_part`), and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureBreakdown {
    pub quadratic: Estimate,
    pub nonlinear: Estimate,
    pub jump_part: Estimate,
    pub total: Estimate,
}

impl MeasureBreakdown {
    fn new(quadratic: Estimate, nonlinear: Estimate, jump_part: Estimate) -> Self {
        MeasureBreakdown { quadratic, nonlinear, jump_part, total: quadratic + nonlinear }
    }

    /// `100 · nonlinear / total`, the share of the measure due to the nonlinear term.
    pub fn nonlinear_percent(&self) -> f64 {
        if self.total.value == 0.0 {
            0.0
        } else {
            100.0 * self.nonlinear.value / self.total.value
        }
    }

    pub fn converged(&self) -> bool {
        self.total.converged && self.jump_part.converged
    }
}

fn exact(problem: &ProblemInstance) -> Result<&ExactSolution, MeasureError> {
    problem.exact.as_ref().ok_or_else(|| MeasureError::MissingExact(problem.name.clone()))
}

fn whole(domain: &Domain) -> [(f64, f64); 1] {
    [domain.extent()]
}

fn require_h_divdiv(n: &PiecewiseSymMatrixField) -> Result<(), MeasureError> {
    let report = check_h_divdiv(n);
    if report.is_member() {
        Ok(())
    } else {
        Err(MeasureError::NotInHDivDiv(report.failing_interfaces()))
    }
}

/// `f − div Div n` as a piecewise field on the common refinement of both layouts.
pub fn equilibrium_residual(f: &PiecewiseScalarField, n: &PiecewiseSymMatrixField) -> Result<PiecewiseScalarField, FieldError> {
    if f.domain() != n.domain() {
        return Err(FieldError::DomainMismatch);
    }
    let dd = div_div(n);
    let (lo, hi) = f.domain().extent();
    let mut edges = vec![lo];
    edges.extend(merged_breakpoints([f.breakpoints().as_slice(), dd.breakpoints().as_slice()]));
    edges.push(hi);
    let pieces = edges
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[0], w[1], &f.piece_at(mid).expr - &dd.piece_at(mid).expr)
        })
        .collect();
    PiecewiseScalarField::new(*f.domain(), pieces)
}

/// `J(v) = ∫ ½|Δv|² − f v`.
pub fn energy_primal(problem: &ProblemInstance, v: &PiecewiseScalarField, cfg: &QuadratureConfig) -> Result<Estimate, MeasureError> {
    let lap = laplacian(v).compile();
    let (vc, fc) = (v.compile(), problem.f.compile());
    let breaks = merged_breakpoints([v.breakpoints().as_slice(), problem.f.breakpoints().as_slice()]);
    let integrand = |p: Point| 0.5 * lap.eval(p).powi(2) - fc.eval(p) * vc.eval(p);
    Ok(integrate_region(problem.domain.geometry(), &whole(&problem.domain), &breaks, integrand, cfg)?)
}

/// Dual energy: finite only for feasible moment fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DualEnergy {
    Finite(Estimate),
    /// `f − div Div n > 0` on `violation`; the dual functional is `−∞`.
    Infeasible { violation: SubdomainSet },
}

impl DualEnergy {
    pub fn finite(&self) -> Option<Estimate> {
        match self {
            DualEnergy::Finite(e) => Some(*e),
            DualEnergy::Infeasible { .. } => None,
        }
    }
}

/// `I*(n) = −½‖n‖² − ∫ φ (f − div Div n)` for feasible `n`.
pub fn energy_dual(problem: &ProblemInstance, n: &PiecewiseSymMatrixField, cfg: &QuadratureConfig) -> Result<DualEnergy, MeasureError> {
    require_h_divdiv(n)?;
    let feasibility = check_feasibility(n, &problem.f)?;
    if !feasibility.feasible {
        return Ok(DualEnergy::Infeasible { violation: feasibility.violation });
    }
    let g = equilibrium_residual(&problem.f, n)?;
    let (nc, gc, phic) = (n.compile(), g.compile(), problem.phi.compile());
    let breaks = merged_breakpoints([g.breakpoints().as_slice(), problem.phi.breakpoints().as_slice()]);
    let integrand = |p: Point| -0.5 * frobenius_sq(nc.eval(p)) - phic.eval(p) * gc.eval(p);
    Ok(DualEnergy::Finite(integrate_region(problem.domain.geometry(), &whole(&problem.domain), &breaks, integrand, cfg)?))
}

/// `J(u)`, which equals `I*(p*)` by duality.
pub fn exact_energy(problem: &ProblemInstance, cfg: &QuadratureConfig) -> Result<Estimate, MeasureError> {
    energy_primal(problem, &exact(problem)?.u, cfg)
}

/// `½‖a − b‖²` for two moment fields.
fn half_distance_sq(
    domain: &Domain,
    a: &PiecewiseSymMatrixField,
    b: &PiecewiseSymMatrixField,
    cfg: &QuadratureConfig,
) -> Result<Estimate, MeasureError> {
    let (ac, bc) = (a.compile(), b.compile());
    let breaks = merged_breakpoints([a.breakpoints().as_slice(), b.breakpoints().as_slice()]);
    let integrand = |p: Point| {
        let (x, y) = (ac.eval(p), bc.eval(p));
        0.5 * frobenius_sq([x[0] - y[0], x[1] - y[1], x[2] - y[2]])
    };
    Ok(integrate_region(domain.geometry(), &whole(domain), &breaks, integrand, cfg)?)
}

/// `μ_φ(v)`'s free-boundary term `−Σ_Γ [Υ](v − u)` for the flux `Υ` of `p`.
fn jump_term(
    p: &PiecewiseSymMatrixField,
    free_boundary: &[f64],
    v: &PiecewiseScalarField,
    u: &PiecewiseScalarField,
    cfg: &QuadratureConfig,
) -> Result<Estimate, MeasureError> {
    let (vc, uc) = (v.compile(), u.compile());
    let mut total = Estimate::zero();
    for &a in free_boundary {
        let term = match flux_jump(p, a)? {
            JumpValue::Point(j) => Estimate::exact(-j * (vc.eval(Point::Line(a)) - uc.eval(Point::Line(a)))),
            JumpValue::Circle(j) => {
                let jt = j.compile();
                periodic_trapezoid(
                    |theta| {
                        let point = Point::Polar { r: a, theta };
                        -jt.eval(point) * (vc.eval(point) - uc.eval(point)) * a
                    },
                    cfg.angular_points,
                )
            }
        };
        total = total + term;
    }
    Ok(total)
}

/// `μ(v) = ½‖∇∇(u − v)‖² + μ_φ(v)`.
pub fn mu_primal(problem: &ProblemInstance, v: &PiecewiseScalarField, cfg: &QuadratureConfig) -> Result<MeasureBreakdown, MeasureError> {
    let ex = exact(problem)?;
    let hu = hessian(&ex.u);
    let hv = hessian(v);
    let quadratic = half_distance_sq(&problem.domain, &hu, &hv, cfg)?;

    let load = div_div(&hu).compile();
    let (vc, uc, fc) = (v.compile(), ex.u.compile(), problem.f.compile());
    let breaks = merged_breakpoints([ex.u.breakpoints().as_slice(), v.breakpoints().as_slice(), problem.f.breakpoints().as_slice()]);
    let integrand = |p: Point| (load.eval(p) - fc.eval(p)) * (vc.eval(p) - uc.eval(p));
    let interior = integrate_region(problem.domain.geometry(), ex.coincidence.components(), &breaks, integrand, cfg)?;

    let jump = jump_term(&hu, &ex.free_boundary, v, &ex.u, cfg)?;
    Ok(MeasureBreakdown::new(quadratic, interior + jump, jump))
}

/// `μ*(n)` with a feasibility flag; infeasible fields are measured anyway.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualMeasure {
    pub breakdown: MeasureBreakdown,
    pub feasible: bool,
}

/// `μ*(n) = ½‖p* − n‖² + ∫_{Ω₀} (f − div Div n)(φ − u)`.
pub fn mu_dual(problem: &ProblemInstance, n: &PiecewiseSymMatrixField, cfg: &QuadratureConfig) -> Result<DualMeasure, MeasureError> {
    let ex = exact(problem)?;
    let quadratic = half_distance_sq(&problem.domain, &ex.p_star, n, cfg)?;
    let g = equilibrium_residual(&problem.f, n)?;
    let (gc, phic, uc) = (g.compile(), problem.phi.compile(), ex.u.compile());
    let breaks = merged_breakpoints([g.breakpoints().as_slice(), problem.phi.breakpoints().as_slice(), ex.u.breakpoints().as_slice()]);
    let integrand = |p: Point| gc.eval(p) * (phic.eval(p) - uc.eval(p));
    let nonlinear = integrate_region(problem.domain.geometry(), ex.non_contact().components(), &breaks, integrand, cfg)?;
    let feasible = check_feasibility(n, &problem.f)?.feasible;
    Ok(DualMeasure { breakdown: MeasureBreakdown::new(quadratic, nonlinear, Estimate::zero()), feasible })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityRhs {
    /// `½‖∇∇v − n‖²`.
    pub quadratic: Estimate,
    /// `∫ (f − div Div n)(φ − v)`.
    pub obstacle: Estimate,
    pub total: Estimate,
}

/// The computable side of the identity; uses only `(v, n, f, φ)`.
pub fn identity_rhs(
    problem: &ProblemInstance,
    v: &PiecewiseScalarField,
    n: &PiecewiseSymMatrixField,
    cfg: &QuadratureConfig,
) -> Result<IdentityRhs, MeasureError> {
    require_h_divdiv(n)?;
    let quadratic = half_distance_sq(&problem.domain, &hessian(v), n, cfg)?;
    let obstacle = obstacle_term(problem, v, n, cfg)?;
    Ok(IdentityRhs { quadratic, obstacle, total: quadratic + obstacle })
}

/// `∫ (f − div Div n)(φ − v)` over the whole domain.
pub(crate) fn obstacle_term(
    problem: &ProblemInstance,
    v: &PiecewiseScalarField,
    n: &PiecewiseSymMatrixField,
    cfg: &QuadratureConfig,
) -> Result<Estimate, MeasureError> {
    let g = equilibrium_residual(&problem.f, n)?;
    let (gc, phic, vc) = (g.compile(), problem.phi.compile(), v.compile());
    let breaks = merged_breakpoints([g.breakpoints().as_slice(), problem.phi.breakpoints().as_slice(), v.breakpoints().as_slice()]);
    let integrand = |p: Point| gc.eval(p) * (phic.eval(p) - vc.eval(p));
    Ok(integrate_region(problem.domain.geometry(), &whole(&problem.domain), &breaks, integrand, cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs_primal: MeasureBreakdown,
    pub lhs_dual: MeasureBreakdown,
    pub rhs: IdentityRhs,
    pub lhs_total: Estimate,
    /// `|lhs − rhs|`.
    pub residual: f64,
    /// Quadrature error bars of both sides plus floating-point summation slack.
    pub budget: f64,
    pub feasible: bool,
    pub converged: bool,
}

impl IdentityReport {
    /// The identity holds numerically and applies (the dual field is feasible).
    pub fn passed(&self) -> bool {
        self.feasible && self.converged && self.residual <= self.budget
    }
}

/// Evaluates both sides of the identity.
pub fn verify_identity(
    problem: &ProblemInstance,
    v: &PiecewiseScalarField,
    n: &PiecewiseSymMatrixField,
    cfg: &QuadratureConfig,
) -> Result<IdentityReport, MeasureError> {
    let rhs = identity_rhs(problem, v, n, cfg)?;
    let primal = mu_primal(problem, v, cfg)?;
    let dual = mu_dual(problem, n, cfg)?;
    let lhs_total = primal.total + dual.breakdown.total;
    let residual = (lhs_total.value - rhs.total.value).abs();
    let magnitude = [primal.quadratic, primal.nonlinear, dual.breakdown.quadratic, dual.breakdown.nonlinear, rhs.quadratic, rhs.obstacle]
        .iter()
        .map(|e| e.value.abs())
        .sum::<f64>();
    let budget = lhs_total.error + rhs.total.error + 64.0 * f64::EPSILON * magnitude;
    let converged = lhs_total.converged && rhs.total.converged && primal.jump_part.converged;
    Ok(IdentityReport {
        lhs_primal: primal,
        lhs_dual: dual.breakdown,
        rhs,
        lhs_total,
        residual,
        budget,
        feasible: dual.feasible,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Where `f − div Div n > 1e−9`.
    pub violation: SubdomainSet,
    /// Largest sampled value of `f − div Div n`.
    pub max_residual: f64,
}

/// Checks `f − div Div n ≤ 0` with the default resolution of 512 samples per piece.
pub fn check_feasibility(n: &PiecewiseSymMatrixField, f: &PiecewiseScalarField) -> Result<FeasibilityReport, MeasureError> {
    check_feasibility_with(n, f, SAMPLES)
}

/// As [`check_feasibility`] with `samples` grid points per piece. On a disk a radius counts
/// as violating if any probe angle does.
pub fn check_feasibility_with(
    n: &PiecewiseSymMatrixField,
    f: &PiecewiseScalarField,
    samples: usize,
) -> Result<FeasibilityReport, MeasureError> {
    let g = equilibrium_residual(f, n)?;
    let domain = *g.domain();
    let angles: Vec<f64> = match domain {
        Domain::Interval { .. } => vec![0.0],
        Domain::Disk { .. } => (0..32).map(|j| 0.05 + j as f64 * std::f64::consts::PI / 16.0).collect(),
    };
    let mut ranges = Vec::new();
    let mut max_residual = f64::NEG_INFINITY;
    for piece in g.pieces() {
        let t = piece.expr.compile();
        let worst = |s: f64| angles.iter().map(|&th| t.eval(domain.point(s, th))).fold(f64::NEG_INFINITY, f64::max);
        let h = (piece.hi - piece.lo) / samples as f64;
        let grid = (0..samples).map(|k| piece.lo + (k as f64 + 0.5) * h).chain([piece.lo, piece.hi]);
        for s in grid {
            let w = worst(s);
            if w.is_finite() {
                max_residual = max_residual.max(w);
            }
        }
        ranges.extend(scan_runs(piece.lo, piece.hi, samples.max(1), |s| worst(s) > FEASIBILITY_TOL));
    }
    let violation = SubdomainSet::new(domain.geometry(), ranges);
    Ok(FeasibilityReport { feasible: violation.is_empty(), violation, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::model_1d;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn primal_measure_rows() {
        let p = model_1d().unwrap();
        for (eps, quad, nonlin) in [(0.35, 134.060, 250.280), (0.15, 109.904, 68.192), (0.0, 57.60, 0.0)] {
            let v = p.approx("v_eps", Some(eps)).unwrap();
            let m = mu_primal(&p, v.primal().unwrap(), &cfg()).unwrap();
            assert_relative_eq!(m.quadratic.value, quad, max_relative = 5e-5);
            assert_relative_eq!(m.nonlinear.value, nonlin, epsilon = 1e-9, max_relative = 5e-5);
            let gap = energy_primal(&p, v.primal().unwrap(), &cfg()).unwrap() - exact_energy(&p, &cfg()).unwrap();
            assert_relative_eq!(gap.value, m.total.value, max_relative = 1e-10);
        }
    }

    #[test]
    fn dual_measure_and_gap() {
        let p = model_1d().unwrap();
        let n = p.approx("n_eps", Some(0.05)).unwrap();
        let n = n.dual().unwrap();
        let m = mu_dual(&p, n, &cfg()).unwrap();
        assert!(m.feasible);
        assert_relative_eq!(m.breakdown.quadratic.value, 78.510, max_relative = 5e-5);
        assert_relative_eq!(m.breakdown.nonlinear.value, 270.053, max_relative = 5e-5);
        let dual = energy_dual(&p, n, &cfg()).unwrap().finite().unwrap();
        let gap = exact_energy(&p, &cfg()).unwrap() - dual;
        assert_relative_eq!(gap.value, m.breakdown.total.value, max_relative = 1e-10);
    }

    #[test]
    fn infeasible_dual_is_located() {
        let p = model_1d().unwrap();
        let n = p.approx("ntilde", None).unwrap();
        let report = check_feasibility(n.dual().unwrap(), &p.f).unwrap();
        assert!(!report.feasible);
        let c = report.violation.components();
        assert_eq!(c.len(), 2);
        assert_relative_eq!(c[0].0, -1.0);
        assert_relative_eq!(c[0].1, -17.0 / 18.0, epsilon = 1e-12);
        assert_relative_eq!(c[1].0, 17.0 / 18.0, epsilon = 1e-12);
        assert_relative_eq!(report.max_residual, 144.0, max_relative = 1e-2);
        assert!(matches!(energy_dual(&p, n.dual().unwrap(), &cfg()).unwrap(), DualEnergy::Infeasible { .. }));
        assert!(check_feasibility(p.approx("nstar", None).unwrap().dual().unwrap(), &p.f).unwrap().feasible);
    }

    #[test]
    fn identity_rejects_moment_outside_h_divdiv() {
        let p = model_1d().unwrap();
        let v = p.approx("v1", None).unwrap();
        let bad = crate::fields::PiecewiseSymMatrixField::line(
            p.domain,
            vec![
                (-1.0, 0.0, crate::expr::Expr::constant(0.0)),
                (0.0, 1.0, crate::expr::Expr::constant(1.0)),
            ],
        )
        .unwrap();
        assert!(matches!(identity_rhs(&p, v.primal().unwrap(), &bad, &cfg()), Err(MeasureError::NotInHDivDiv(_))));
    }
}
