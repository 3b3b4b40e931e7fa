use crate::expr::{Expr, VarSet};
use crate::fields::{Domain, PiecewiseScalarField, PiecewiseSymMatrixField, SubdomainSet, SymEntries};
use crate::quadrature::Geometry;

use super::{ApproxField, ApproxKind, ApproximationSpec, ExactSolution, ParamSpec, ProblemError, ProblemInstance};

const IDS: [&str; 2] = ["model_1d", "circular_plate"];

pub fn builtin_ids() -> &'static [&'static str] {
    &IDS
}

pub fn builtin(id: &str) -> Result<ProblemInstance, ProblemError> {
    match id {
        "model_1d" => model_1d(),
        "circular_plate" => circular_plate(),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}

fn lx(s: &str) -> Expr {
    Expr::parse(s, VarSet::Line).unwrap_or_else(|e| panic!("built-in expression `{s}`: {e}"))
}

fn pol(s: &str) -> Expr {
    Expr::parse(s, VarSet::Polar).unwrap_or_else(|e| panic!("built-in expression `{s}`: {e}"))
}

const LINE: Domain = Domain::Interval { a: -1.0, b: 1.0 };

/// A field that is `middle` on `[-c, c]` and `right(x)` / `left(x)` outside; `c = 0`
/// drops the middle piece.
fn symmetric(c: f64, left: Expr, middle: Expr, right: Expr) -> Vec<(f64, f64, Expr)> {
    if c > 0.0 {
        vec![(-1.0, -c, left), (-c, c, middle), (c, 1.0, right)]
    } else {
        vec![(-1.0, 0.0, left), (0.0, 1.0, right)]
    }
}

fn scalar(c: f64, left: &str, middle: &str, right: &str) -> Result<PiecewiseScalarField, ProblemError> {
    Ok(PiecewiseScalarField::new(LINE, symmetric(c, lx(left), lx(middle), lx(right)))?)
}

fn moment(c: f64, left: &str, middle: &str, right: &str) -> Result<PiecewiseSymMatrixField, ProblemError> {
    Ok(PiecewiseSymMatrixField::line(LINE, symmetric(c, lx(left), lx(middle), lx(right)))?)
}

/// `v_ε`: equal to the obstacle on `[ε − 1/2, 1/2 − ε]`, clamped cubic outside.
pub(crate) fn v_eps(eps: f64) -> Result<PiecewiseScalarField, ProblemError> {
    let k = format!("4/(2*{eps}+1)^3");
    scalar(
        0.5 - eps,
        &format!("-{k}*(1+x)^2*(-4*x+6*{eps}-1)"),
        "-1",
        &format!("-{k}*(1-x)^2*(4*x+6*{eps}-1)"),
    )
}

/// `n*_ε`: the `C¹` cubic moment family vanishing on `[ε − 1/2, 1/2 − ε]`.
pub(crate) fn n_eps(eps: f64) -> Result<PiecewiseSymMatrixField, ProblemError> {
    let k = format!("24/(2*{eps}+1)^5");
    moment(
        0.5 - eps,
        &format!("{k}*(2*x-2*{eps}+1)^2*(3+4*x-2*{eps})"),
        "0",
        &format!("{k}*(2*x+2*{eps}-1)^2*(3-4*x-2*{eps})"),
    )
}

/// Clamped beam on `(−1, 1)` over the obstacle `φ ≡ −1` with load `f ≡ −1152`.
pub fn model_1d() -> Result<ProblemInstance, ProblemError> {
    let f = PiecewiseScalarField::constant(LINE, -1152.0)?;
    let phi = PiecewiseScalarField::constant(LINE, -1.0)?;
    let u = scalar(0.5, "-8*(x+1)^2*(6*x^2+4*x+1)", "-1", "-8*(x-1)^2*(6*x^2-4*x+1)")?.with_smoothness(2)?;
    let p_star = moment(0.5, "-48*(2*x+1)*(6*x+5)", "0", "-48*(2*x-1)*(6*x-5)")?;
    let exact = ExactSolution::new(u, p_star, SubdomainSet::new(Geometry::Line, [(-0.5, 0.5)]));

    let eps = || vec![ParamSpec { name: "eps".into(), min: 0.0, max: 0.5 }];
    let approximations = vec![
        ApproximationSpec::fixed(
            "v1",
            "primal; equals the obstacle on [-1/4, 1/4]",
            ApproxField::Primal(scalar(0.25, "-16/27*(x+1)^2*(1-8*x)", "-1", "-16/27*(x-1)^2*(1+8*x)")?),
        ),
        ApproximationSpec::fixed(
            "nstar",
            "dual; feasible, vanishes on [-1/2, 1/2]",
            ApproxField::Dual(moment(0.5, "20*(2*x+1)^2*(5+6*x)", "0", "20*(2*x-1)^2*(5-6*x)")?),
        ),
        ApproximationSpec::fixed(
            "ntilde",
            "dual; infeasible near the ends, vanishes on [-1/3, 1/3]",
            ApproxField::Dual(moment(1.0 / 3.0, "8*(3*x+1)^2*(5+6*x)", "0", "8*(3*x-1)^2*(5-6*x)")?),
        ),
        ApproximationSpec::family("v_eps", "primal family, 0 <= eps <= 1/2", ApproxKind::Primal, eps(), |p| {
            Ok(ApproxField::Primal(v_eps(p["eps"])?))
        }),
        ApproximationSpec::family("n_eps", "dual family, 0 <= eps <= 1/2", ApproxKind::Dual, eps(), |p| {
            Ok(ApproxField::Dual(n_eps(p["eps"])?))
        }),
    ];
    ProblemInstance::new("model_1d", f, phi, None, Some(exact), approximations)
}

const C1: &str = "(9*ln(3)-4)";
const C2: &str = "(208-216*ln(3)+9*ln(3)^2)";

/// Clamped plate on the disk of radius 3 over `φ ≡ −1`, with contact on the unit disk.
pub fn circular_plate() -> Result<ProblemInstance, ProblemError> {
    let disk = Domain::Disk { radius: 3.0 };
    let f = PiecewiseScalarField::uniform(disk, pol(&format!("16*{C1}/{C2}")))?;
    let phi = PiecewiseScalarField::constant(disk, -1.0)?;
    let outer = format!("((r^2-1)*(128+{C1}*(r^2-3))+4*({C1}-32*(1+r^2))*ln(r))/(4*{C2})-1");
    let u = PiecewiseScalarField::new(disk, vec![(0.0, 1.0, pol("-1")), (1.0, 3.0, pol(&outer))])?;

    let shared = format!("2*r^2*({C1}*(r^2-1)-32*ln(r))");
    let p_star = PiecewiseSymMatrixField::new(
        disk,
        vec![
            (0.0, 1.0, SymEntries::zero()),
            (
                1.0,
                3.0,
                SymEntries::plane(
                    pol(&format!("((r^2-1)*cos(2*theta)*({C1}*(r^2+1)-32)+{shared})/({C2}*r^2)")),
                    pol(&format!("((r^2-1)*sin(2*theta)*({C1}*(r^2+1)-32))/({C2}*r^2)")),
                    pol(&format!("((1-r^2)*cos(2*theta)*({C1}*(r^2+1)-32)+{shared})/({C2}*r^2)")),
                ),
            ),
        ],
    )?;
    let exact = ExactSolution::new(u, p_star, SubdomainSet::new(Geometry::Disk, [(0.0, 1.0)]));

    let v2 = PiecewiseScalarField::new(
        disk,
        vec![(0.0, 1.0, pol("-1")), (1.0, 3.0, pol(&format!("{outer}+0.5*(1-cos(pi*(3-r)))")))],
    )?;
    let diag = pol(&format!("(r-1)^3*cos(2*theta)/({C2}*r^2)"));
    let nhat = PiecewiseSymMatrixField::new(
        disk,
        vec![
            (0.0, 1.0, SymEntries::zero()),
            (1.0, 3.0, SymEntries::plane(diag.clone(), pol(&format!("9*(r-1)^3*sin(2*theta)/({C2}*r^2)")), diag)),
        ],
    )?;
    let approximations = vec![
        ApproximationSpec::fixed("v2", "primal; u plus a clamped cosine bump on 1 <= r <= 3", ApproxField::Primal(v2)),
        ApproximationSpec::fixed("nhat", "dual; feasible, vanishes on the unit disk", ApproxField::Dual(nhat)),
    ];
    ProblemInstance::new("circular_plate", f, phi, None, Some(exact), approximations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Point;
    use crate::fields::{coincidence_set, div_div, hessian};
    use approx::assert_relative_eq;

    #[test]
    fn model_data() {
        let p = model_1d().unwrap();
        assert_eq!(p.domain, LINE);
        assert_relative_eq!(p.friedrichs, 4.0 / std::f64::consts::PI.powi(2), max_relative = 1e-15);
        let exact = p.exact.as_ref().unwrap();
        assert_eq!(exact.free_boundary, vec![-0.5, 0.5]);
        for x in [-1.0, 1.0] {
            assert_eq!(exact.u.evaluate(Point::Line(x)).unwrap(), 0.0);
        }
        let g = div_div(&hessian(&exact.u));
        for x in [-0.9, -0.7, 0.6, 0.95] {
            assert_relative_eq!(g.evaluate(Point::Line(x)).unwrap(), -1152.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn v_eps_contact_is_detected_structurally() {
        let p = model_1d().unwrap();
        for eps in [0.0, 0.05, 0.15, 0.25, 0.35] {
            let v = p.approx("v_eps", Some(eps)).unwrap();
            let set = coincidence_set(v.primal().unwrap(), &p.phi, 1e-9).unwrap();
            assert_eq!(set.components(), &[(eps - 0.5, 0.5 - eps)], "eps = {eps}");
        }
        let v0 = p.approx("v_eps", Some(0.0)).unwrap();
        assert_ne!(v0.primal().unwrap(), &p.exact.as_ref().unwrap().u);
        assert!(p.approx("v_eps", Some(0.6)).is_err());
        assert!(p.approx("v_eps", Some(0.5)).is_ok());
        assert!(matches!(builtin("nope"), Err(ProblemError::UnknownProblem(_))));
    }

    #[test]
    fn plate_data() {
        let p = circular_plate().unwrap();
        let exact = p.exact.as_ref().unwrap();
        assert_eq!(exact.free_boundary, vec![1.0]);
        let u = &exact.u;
        let du = crate::fields::derivative(u, 1);
        for k in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            assert!(u.evaluate(Point::Polar { r: 3.0, theta }).unwrap().abs() < 1e-10);
            assert!(du.evaluate(Point::Polar { r: 3.0, theta }).unwrap().abs() < 1e-10);
        }
        assert!(u.clone().with_smoothness(1).is_ok());
        let v2 = p.approx("v2", None).unwrap();
        let set = coincidence_set(v2.primal().unwrap(), &p.phi, 1e-9).unwrap();
        assert_eq!(set.components(), &[(0.0, 1.0)]);
    }
}
