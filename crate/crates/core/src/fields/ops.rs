//! Differential operators on piecewise fields, one-sided limits and interface jumps.

use crate::expr::{differentiate, partial, Axis, Expr, Point, Var, VarSet};

use super::{
    Domain, FieldError, MatrixPiece, PiecewiseScalarField, PiecewiseSymMatrixField, ScalarPiece, SymEntries,
    ENDPOINT_SLACK,
};

fn d2(e: &Expr, a: Axis, b: Axis, vars: VarSet) -> Expr {
    partial(&partial(e, a, vars), b, vars)
}

fn piecewise_scalar(domain: Domain, pieces: Vec<ScalarPiece>) -> PiecewiseScalarField {
    PiecewiseScalarField { domain, pieces, smoothness: None }
}

/// Cartesian Hessian `∇∇v`, piece by piece (in polar variables, valid for `r > 0`).
pub fn hessian(v: &PiecewiseScalarField) -> PiecewiseSymMatrixField {
    let vars = v.domain.vars();
    let pieces = v
        .pieces
        .iter()
        .map(|p| {
            let entries = match vars {
                VarSet::Line => SymEntries::line(differentiate(&differentiate(&p.expr, Var::X), Var::X)),
                VarSet::Polar => SymEntries::plane(
                    d2(&p.expr, Axis::X, Axis::X, vars),
                    d2(&p.expr, Axis::X, Axis::Y, vars),
                    d2(&p.expr, Axis::Y, Axis::Y, vars),
                ),
            };
            MatrixPiece { lo: p.lo, hi: p.hi, entries }
        })
        .collect();
    PiecewiseSymMatrixField { domain: v.domain, pieces }
}

/// `Δv` as the trace of the Hessian.
pub fn laplacian(v: &PiecewiseScalarField) -> PiecewiseScalarField {
    let h = hessian(v);
    let pieces = h
        .pieces
        .iter()
        .map(|p| ScalarPiece { lo: p.lo, hi: p.hi, expr: &p.entries.xx + &p.entries.yy })
        .collect();
    piecewise_scalar(v.domain, pieces)
}

pub(crate) fn div_entries_of(e: &SymEntries, vars: VarSet) -> (Expr, Expr) {
    match vars {
        VarSet::Line => (differentiate(&e.xx, Var::X), Expr::zero()),
        VarSet::Polar => (
            partial(&e.xx, Axis::X, vars) + partial(&e.xy, Axis::Y, vars),
            partial(&e.xy, Axis::X, vars) + partial(&e.yy, Axis::Y, vars),
        ),
    }
}

/// Row-wise divergence `Div n`, returned as its two Cartesian components (the second is
/// zero on a line).
pub fn divergence(n: &PiecewiseSymMatrixField) -> (PiecewiseScalarField, PiecewiseScalarField) {
    let vars = n.domain.vars();
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for p in &n.pieces {
        let (a, b) = div_entries_of(&p.entries, vars);
        first.push(ScalarPiece { lo: p.lo, hi: p.hi, expr: a });
        second.push(ScalarPiece { lo: p.lo, hi: p.hi, expr: b });
    }
    (piecewise_scalar(n.domain, first), piecewise_scalar(n.domain, second))
}

/// `div Div n = ∂xx n11 + 2 ∂xy n12 + ∂yy n22`, piece by piece. Interface terms are not
/// included; see [`check_h_divdiv`](super::check_h_divdiv).
pub fn div_div(n: &PiecewiseSymMatrixField) -> PiecewiseScalarField {
    let vars = n.domain.vars();
    let pieces = n
        .pieces
        .iter()
        .map(|p| {
            let expr = match vars {
                VarSet::Line => differentiate(&differentiate(&p.entries.xx, Var::X), Var::X),
                VarSet::Polar => {
                    d2(&p.entries.xx, Axis::X, Axis::X, vars)
                        + 2.0 * d2(&p.entries.xy, Axis::X, Axis::Y, vars)
                        + d2(&p.entries.yy, Axis::Y, Axis::Y, vars)
                }
            };
            ScalarPiece { lo: p.lo, hi: p.hi, expr }
        })
        .collect();
    piecewise_scalar(n.domain, pieces)
}

/// The `order`-th derivative along the piece coordinate (`d/dx` on a line, `∂/∂r` on a disk).
pub fn derivative(v: &PiecewiseScalarField, order: u8) -> PiecewiseScalarField {
    let var = coordinate_var(&v.domain);
    v.map(|e| (0..order).fold(e.clone(), |acc, _| differentiate(&acc, var)))
}

fn coordinate_var(domain: &Domain) -> Var {
    match domain {
        Domain::Interval { .. } => Var::X,
        Domain::Disk { .. } => Var::R,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Towards smaller `x` (inner annulus on a disk).
    Left,
    /// Towards larger `x` (outer annulus on a disk).
    Right,
}

/// Index of the piece adjoining `at` on `side`, given the piece ranges.
pub(crate) fn adjoining(ranges: &[(f64, f64)], at: f64, side: Side) -> Result<usize, FieldError> {
    let scale = ranges.last().map_or(1.0, |r| r.1.abs()).max(ranges.first().map_or(1.0, |r| r.0.abs())).max(1.0);
    let near = |a: f64| (a - at).abs() <= ENDPOINT_SLACK * scale;
    let found = match side {
        Side::Left => ranges.iter().position(|r| near(r.1)),
        Side::Right => ranges.iter().position(|r| near(r.0)),
    };
    found.ok_or(FieldError::NotAnInterface(at))
}

fn with_coordinate(point: Point, s: f64) -> Point {
    match point {
        Point::Line(_) => Point::Line(s),
        Point::Polar { theta, .. } => Point::Polar { r: s, theta },
    }
}

/// Limit of the `order`-th coordinate derivative of `field` as `point` is approached from
/// `side`. The coordinate of `point` must be a piece endpoint on that side.
pub fn one_sided_limit(field: &PiecewiseScalarField, point: Point, side: Side, order: u8) -> Result<f64, FieldError> {
    if order > 3 {
        return Err(FieldError::OrderOutOfRange(order));
    }
    let at = Domain::coordinate(point);
    let ranges: Vec<(f64, f64)> = field.pieces.iter().map(|p| (p.lo, p.hi)).collect();
    let i = adjoining(&ranges, at, side)?;
    let piece = &field.pieces[i];
    let edge = match side {
        Side::Left => piece.hi,
        Side::Right => piece.lo,
    };
    let var = coordinate_var(&field.domain);
    let d = (0..order).fold(piece.expr.clone(), |acc, _| differentiate(&acc, var));
    Ok(d.evaluate(with_coordinate(point, edge))?)
}

/// Jump of the normal flux `Υ = Div p · ν` across an interface.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpValue {
    /// `p′(a−0) − p′(a+0)`.
    Point(f64),
    /// `(Div p_inner − Div p_outer) · e_r` on the circle, as an expression in `theta`.
    Circle(Expr),
}

impl JumpValue {
    pub fn at(&self, theta: f64) -> f64 {
        match self {
            JumpValue::Point(v) => *v,
            JumpValue::Circle(e) => e.compile().eval(Point::Polar { r: f64::NAN, theta }),
        }
    }
}

/// `[Υ]` at an interior interface. With `ν` the exterior normal of the coincidence set the
/// jump `Υ(Ω_φ side) − Υ(Ω₀ side)` does not depend on which side the set lies, and reduces
/// to left-minus-right (inner-minus-outer) of `Div p` along `+x` (`+e_r`).
pub fn flux_jump(p: &PiecewiseSymMatrixField, at: f64) -> Result<JumpValue, FieldError> {
    let ranges: Vec<(f64, f64)> = p.pieces.iter().map(|q| (q.lo, q.hi)).collect();
    let left = adjoining(&ranges, at, Side::Left)?;
    let right = adjoining(&ranges, at, Side::Right)?;
    if left + 1 != right {
        return Err(FieldError::NotAnInterface(at));
    }
    let vars = p.domain.vars();
    let normal_flux = |i: usize| {
        let (d1, d2) = div_entries_of(&p.pieces[i].entries, vars);
        match vars {
            VarSet::Line => d1,
            VarSet::Polar => Expr::theta().cos() * d1 + Expr::theta().sin() * d2,
        }
    };
    let jump = normal_flux(left) - normal_flux(right);
    match vars {
        VarSet::Line => Ok(JumpValue::Point(jump.evaluate(Point::Line(at))?)),
        VarSet::Polar => Ok(JumpValue::Circle(jump.substitute(Var::R, at))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line() -> Domain {
        Domain::Interval { a: -1.0, b: 1.0 }
    }

    fn lx(s: &str) -> Expr {
        Expr::parse(s, VarSet::Line).unwrap()
    }

    fn pol(s: &str) -> Expr {
        Expr::parse(s, VarSet::Polar).unwrap()
    }

    fn model_u() -> PiecewiseScalarField {
        PiecewiseScalarField::new(
            line(),
            vec![
                (-1.0, -0.5, lx("-8*(x+1)^2*(6*x^2+4*x+1)")),
                (-0.5, 0.5, lx("-1")),
                (0.5, 1.0, lx("-8*(x-1)^2*(6*x^2-4*x+1)")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hessian_of_constant_and_affine_vanishes() {
        let c = PiecewiseScalarField::constant(line(), -1.0).unwrap();
        assert!(hessian(&c).pieces()[0].entries.xx.is_zero());
        let disk = Domain::Disk { radius: 2.0 };
        let affine = PiecewiseScalarField::uniform(disk, pol("3*r*cos(theta) - r*sin(theta) + 2")).unwrap();
        let h = hessian(&affine);
        for k in 0..20 {
            let p = Point::Polar { r: 0.2 + 0.09 * k as f64, theta: 0.7 * k as f64 };
            for v in h.evaluate(p).unwrap() {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hessian_of_model_minimizer_matches_moment() {
        let h = hessian(&model_u());
        let pstar = lx("-48*(2*x+1)*(6*x+5)");
        for k in 1..10 {
            let x = -1.0 + 0.05 * k as f64;
            let a = h.evaluate(Point::Line(x)).unwrap()[0];
            assert_relative_eq!(a, pstar.evaluate(Point::Line(x)).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn radial_square_has_twice_identity_hessian() {
        let w = PiecewiseScalarField::uniform(Domain::Disk { radius: 3.0 }, pol("r^2")).unwrap();
        let h = hessian(&w);
        for k in 0..10 {
            let [xx, xy, yy] = h.evaluate(Point::Polar { r: 0.3 + 0.25 * k as f64, theta: 0.61 * k as f64 }).unwrap();
            assert_relative_eq!(xx, 2.0, epsilon = 1e-12);
            assert!(xy.abs() < 1e-12);
            assert_relative_eq!(yy, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bilaplacian_of_minimizer_is_the_load() {
        let g = div_div(&hessian(&model_u()));
        for x in [-0.9, -0.6, 0.55, 0.8] {
            // u'''' = f = -1152 on the non-contact pieces
            assert_relative_eq!(g.evaluate(Point::Line(x)).unwrap(), -1152.0, max_relative = 1e-12);
        }
        assert_eq!(g.evaluate(Point::Line(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn one_sided_third_derivatives() {
        let u = model_u();
        let at = Point::Line(-0.5);
        assert_relative_eq!(one_sided_limit(&u, at, Side::Left, 3).unwrap(), -192.0, max_relative = 1e-12);
        assert_eq!(one_sided_limit(&u, at, Side::Right, 3).unwrap(), 0.0);
        assert!(matches!(one_sided_limit(&u, Point::Line(0.1), Side::Left, 0), Err(FieldError::NotAnInterface(_))));
        assert!(matches!(one_sided_limit(&u, at, Side::Left, 4), Err(FieldError::OrderOutOfRange(4))));
    }

    #[test]
    fn flux_jump_of_model_moment() {
        let p = hessian(&model_u());
        assert_eq!(flux_jump(&p, 0.5).unwrap(), JumpValue::Point(-192.0));
        assert_eq!(flux_jump(&p, -0.5).unwrap(), JumpValue::Point(-192.0));
        assert!(flux_jump(&p, 0.2).is_err());
    }

    #[test]
    fn smooth_fields_have_no_jump() {
        let w = pol("r^4*cos(theta)^2*sin(theta)^2 + r^3");
        let disk = Domain::Disk { radius: 3.0 };
        let split = PiecewiseScalarField::new(disk, vec![(0.0, 1.0, w.clone()), (1.0, 3.0, w)]).unwrap();
        let jump = flux_jump(&hessian(&split), 1.0).unwrap();
        for k in 0..16 {
            assert!(jump.at(0.4 * k as f64).abs() < 1e-10);
        }
    }
}
