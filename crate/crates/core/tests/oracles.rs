use biharmonic_certify::expr::{Expr, Point, VarSet};
use biharmonic_certify::fields::{hessian, laplacian, Domain, PiecewiseScalarField};
use biharmonic_certify::quadrature::{integrate_region, Geometry, QuadratureConfig};

#[test]
fn polar_hessian_of_x2y2() {
    let disk = Domain::Disk { radius: 2.0 };
    let w = Expr::parse("r^4*cos(theta)^2*sin(theta)^2", VarSet::Polar).unwrap();
    let field = PiecewiseScalarField::uniform(disk, w).unwrap();
    let h = hessian(&field);
    let lap = laplacian(&field);
    for k in 1..20 {
        let (r, theta) = (0.1 * k as f64, 0.37 * k as f64);
        let (x, y) = (r * theta.cos(), r * theta.sin());
        let p = Point::Polar { r, theta };
        let [hxx, hxy, hyy] = h.evaluate(p).unwrap();
        assert!((hxx - 2.0 * y * y).abs() < 1e-12, "xx at {p:?}");
        assert!((hxy - 4.0 * x * y).abs() < 1e-12, "xy at {p:?}");
        assert!((hyy - 2.0 * x * x).abs() < 1e-12, "yy at {p:?}");
        assert!((lap.evaluate(p).unwrap() - 2.0 * r * r).abs() < 1e-12);
    }
}

/// `∫_{B_1} e^{x} = 2π I₁(1)`; the angular trapezoid rule converges geometrically.
#[test]
fn angular_resolution_converges_monotonically() {
    let exact = 2.0 * std::f64::consts::PI * 0.565_159_103_992_485_1;
    let mut last = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        let cfg = QuadratureConfig { angular_points: n, ..QuadratureConfig::default() };
        let got = integrate_region(Geometry::Disk, &[(0.0, 1.0)], &[], |p| match p {
            Point::Polar { r, theta } => (r * theta.cos()).exp(),
            _ => unreachable!(),
        }, &cfg)
        .unwrap();
        let err = (got.value - exact).abs();
        assert!(err < last || err < 1e-13, "n = {n}: {err} after {last}");
        assert!(got.error >= err * 0.1 || err < 1e-13, "n = {n}: reported {} for actual {err}", got.error);
        last = err;
    }
    assert!(last < 1e-12);
}
