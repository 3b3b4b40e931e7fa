//! Membership checks: `v ∈ 𝕂` and `n ∈ H(div Div)`.

use serde::Serialize;

use crate::expr::{differentiate, Expr, Point, Var, VarSet};

use super::ops::div_entries_of;
use super::sets::SAMPLES;
use super::{merged_breakpoints, Domain, FieldError, PiecewiseScalarField, PiecewiseSymMatrixField};

/// Tolerance for `v ≥ φ` and for the clamped boundary conditions.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;
/// Tolerance for continuity of entries and of `Div n` across interfaces.
pub const H_DIVDIV_TOL: f64 = 1e-8;

const PROBE_ANGLES: usize = 16;

/// Angles at which 2D interface and boundary conditions are probed; a single dummy angle
/// on a line. The offset keeps the probes off the coordinate axes.
pub(crate) fn probe_angles(domain: &Domain) -> Vec<f64> {
    match domain {
        Domain::Interval { .. } => vec![0.0],
        Domain::Disk { .. } => (0..PROBE_ANGLES)
            .map(|j| 0.1 + 2.0 * std::f64::consts::PI * j as f64 / PROBE_ANGLES as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ViolationKind {
    /// `v − φ` at the point (negative).
    BelowObstacle { gap: f64 },
    /// `v` on `∂Ω`.
    BoundaryValue { value: f64 },
    /// Normal derivative on `∂Ω`.
    BoundarySlope { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub coordinate: f64,
    pub theta: Option<f64>,
    pub kind: ViolationKind,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.theta {
            Some(t) => write!(f, "at r = {}, theta = {}: ", self.coordinate, t)?,
            None => write!(f, "at x = {}: ", self.coordinate)?,
        }
        match self.kind {
            ViolationKind::BelowObstacle { gap } => write!(f, "below the obstacle by {}", -gap),
            ViolationKind::BoundaryValue { value } => write!(f, "boundary value {value} (must be 0)"),
            ViolationKind::BoundarySlope { value } => write!(f, "boundary slope {value} (must be 0)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
    pub points_checked: usize,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn theta_of(domain: &Domain, theta: f64) -> Option<f64> {
    matches!(domain, Domain::Disk { .. }).then_some(theta)
}

/// Checks `v ≥ φ − 1e−9` on a dense grid per segment plus at the interior minima of
/// `v − φ`, and `v = ∂ₙv = 0` on `∂Ω`. Each segment reports at most its worst point.
pub fn check_admissible(v: &PiecewiseScalarField, phi: &PiecewiseScalarField) -> Result<AdmissibilityReport, FieldError> {
    if v.domain() != phi.domain() {
        return Err(FieldError::DomainMismatch);
    }
    let domain = *v.domain();
    let (lo, hi) = domain.extent();
    let var = match domain.vars() {
        VarSet::Line => Var::X,
        VarSet::Polar => Var::R,
    };
    let mut edges = vec![lo];
    edges.extend(merged_breakpoints([v.breakpoints().as_slice(), phi.breakpoints().as_slice()]));
    edges.push(hi);
    let angles = probe_angles(&domain);

    let mut violations = Vec::new();
    let mut checked = 0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let gap_expr: Expr = &v.piece_at(mid).expr - &phi.piece_at(mid).expr;
        let gap = gap_expr.compile();
        let slope = differentiate(&gap_expr, var).compile();
        let mut worst: Option<(f64, f64, f64)> = None;
        let mut consider = |s: f64, t: f64, g: f64| {
            if g < -ADMISSIBILITY_TOL && worst.is_none_or(|(_, _, w)| g < w) {
                worst = Some((s, t, g));
            }
        };
        // The disk centre is a single point whatever theta is; polar expressions may be
        // singular there, so sample from just inside.
        let a_eff = if matches!(domain, Domain::Disk { .. }) && a == 0.0 { 1e-9 * b } else { a };
        let h = (b - a_eff) / SAMPLES as f64;
        for &t in &angles {
            let mut prev_slope = f64::NAN;
            for k in 0..=SAMPLES {
                let s = a_eff + k as f64 * h;
                let p = domain.point(s, t);
                checked += 1;
                let g = gap.eval(p);
                consider(s, t, if g.is_nan() { f64::NEG_INFINITY } else { g });
                let d = slope.eval(p);
                if prev_slope < 0.0 && d > 0.0 {
                    let (mut l, mut r) = (s - h, s);
                    for _ in 0..60 {
                        let m = 0.5 * (l + r);
                        if slope.eval(domain.point(m, t)) < 0.0 {
                            l = m;
                        } else {
                            r = m;
                        }
                    }
                    let m = 0.5 * (l + r);
                    consider(m, t, gap.eval(domain.point(m, t)));
                }
                prev_slope = d;
            }
        }
        if let Some((s, t, g)) = worst {
            violations.push(Violation { coordinate: s, theta: theta_of(&domain, t), kind: ViolationKind::BelowObstacle { gap: g } });
        }
    }

    // Clamped boundary: value and outward normal derivative.
    let ends: Vec<f64> = match domain {
        Domain::Interval { a, b } => vec![a, b],
        Domain::Disk { radius } => vec![radius],
    };
    for end in ends {
        let piece = &v.piece_at(end).expr;
        let dn = differentiate(piece, var);
        for &t in &angles {
            let p = domain.point(end, t);
            let value = piece.evaluate(p)?;
            let slope = dn.evaluate(p)?;
            if value.abs() > ADMISSIBILITY_TOL {
                violations.push(Violation { coordinate: end, theta: theta_of(&domain, t), kind: ViolationKind::BoundaryValue { value } });
            }
            if slope.abs() > ADMISSIBILITY_TOL {
                violations.push(Violation { coordinate: end, theta: theta_of(&domain, t), kind: ViolationKind::BoundarySlope { value: slope } });
            }
            checked += 1;
        }
    }
    Ok(AdmissibilityReport { violations, points_checked: checked })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceFailure {
    pub at: f64,
    pub quantity: &'static str,
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HDivDivReport {
    pub failures: Vec<InterfaceFailure>,
}

impl HDivDivReport {
    pub fn is_member(&self) -> bool {
        self.failures.is_empty()
    }

    /// Distinct interfaces with at least one failure.
    pub fn failing_interfaces(&self) -> Vec<f64> {
        let mut at: Vec<f64> = self.failures.iter().map(|f| f.at).collect();
        at.dedup();
        at
    }
}

/// `n` belongs to `H(div Div)` when its entries and `Div n` are continuous across every
/// interface, so `div Div n` has no singular part there.
pub fn check_h_divdiv(n: &PiecewiseSymMatrixField) -> HDivDivReport {
    let domain = *n.domain();
    let vars = domain.vars();
    let angles = probe_angles(&domain);
    let mut failures = Vec::new();
    for (i, at) in n.breakpoints().into_iter().enumerate() {
        let (l, r) = (&n.pieces()[i].entries, &n.pieces()[i + 1].entries);
        let (ld, rd) = (div_entries_of(l, vars), div_entries_of(r, vars));
        let quantities: [(&'static str, &Expr, &Expr); 5] = [
            ("n11", &l.xx, &r.xx),
            ("n12", &l.xy, &r.xy),
            ("n22", &l.yy, &r.yy),
            ("Div n (x)", &ld.0, &rd.0),
            ("Div n (y)", &ld.1, &rd.1),
        ];
        for (name, le, re) in quantities {
            if le == re {
                continue;
            }
            let (lt, rt) = (le.compile(), re.compile());
            let worst = angles
                .iter()
                .map(|&t| {
                    let p: Point = domain.point(at, t);
                    let (a, b) = (lt.eval(p), rt.eval(p));
                    let m = (a - b).abs();
                    if m.is_nan() || m > H_DIVDIV_TOL * a.abs().max(b.abs()).max(1.0) {
                        if m.is_nan() { f64::INFINITY } else { m }
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            if worst > 0.0 {
                failures.push(InterfaceFailure { at, quantity: name, mismatch: worst });
            }
        }
    }
    HDivDivReport { failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::hessian;

    fn line() -> Domain {
        Domain::Interval { a: -1.0, b: 1.0 }
    }

    fn lx(s: &str) -> Expr {
        Expr::parse(s, VarSet::Line).unwrap()
    }

    #[test]
    fn dipping_below_the_obstacle_is_reported() {
        let phi = PiecewiseScalarField::constant(line(), -1.0).unwrap();
        let bad = PiecewiseScalarField::new(
            line(),
            vec![(-1.0, -0.2, lx("-1 + 0*(x+1)")), (-0.2, 0.2, lx("-1.1")), (0.2, 1.0, lx("-1"))],
        )
        .unwrap();
        let report = check_admissible(&bad, &phi).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::BelowObstacle { gap } if (gap + 0.1).abs() < 1e-12)));
        // and it is not clamped
        assert!(report.violations.iter().any(|v| matches!(v.kind, ViolationKind::BoundaryValue { .. })));
    }

    #[test]
    fn interior_dip_between_samples_is_found() {
        let phi = PiecewiseScalarField::constant(line(), 0.0).unwrap();
        // A clamped bump with a well narrower than the sampling grid.
        let v = PiecewiseScalarField::uniform(line(), lx("(1-x^2)^2*(1 - 2*(1 - 1000000*(x-0.3001)^2))")).unwrap();
        let report = check_admissible(&v, &phi).unwrap();
        assert!(!report.is_admissible());
    }

    #[test]
    fn clamped_bump_is_admissible() {
        let phi = PiecewiseScalarField::constant(line(), -1.0).unwrap();
        let v = PiecewiseScalarField::uniform(line(), lx("(1-x^2)^2")).unwrap();
        assert!(check_admissible(&v, &phi).unwrap().is_admissible());
    }

    #[test]
    fn moment_of_obstacle_solution_is_not_in_h_divdiv() {
        let u = PiecewiseScalarField::new(
            line(),
            vec![
                (-1.0, -0.5, lx("-8*(x+1)^2*(6*x^2+4*x+1)")),
                (-0.5, 0.5, lx("-1")),
                (0.5, 1.0, lx("-8*(x-1)^2*(6*x^2-4*x+1)")),
            ],
        )
        .unwrap();
        let report = check_h_divdiv(&hessian(&u));
        assert!(!report.is_member());
        assert_eq!(report.failing_interfaces(), vec![-0.5, 0.5]);
        assert!(check_h_divdiv(&PiecewiseSymMatrixField::zero(line()).unwrap()).is_member());
    }
}
