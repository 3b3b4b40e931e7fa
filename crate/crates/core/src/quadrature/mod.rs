//! Error-controlled integration of piecewise-smooth integrands on intervals and disks.
//!
//! Intervals use globally adaptive Gauss–Kronrod (7, 15) with every declared breakpoint as
//! a mandatory initial split. Disks use the same rule in `r` per radial piece, tensored with
//! an equispaced periodic trapezoid in `theta`; the angular error is estimated by comparing
//! the full rule with its even-indexed half.

mod gauss_kronrod;
mod norms;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::estimate::Estimate;
use crate::expr::Point;

pub use norms::{l2_norm_sq, l2_norm_sq_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub angular_points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_subdivisions: 2000, angular_points: 64 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let bad = |what: &str| Err(QuadratureError::InvalidConfig(what.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol must be positive");
        }
        if self.max_subdivisions < 1 {
            return bad("max_subdivisions must be at least 1");
        }
        if self.angular_points < 8 || self.angular_points % 2 != 0 {
            return bad("angular_points must be even and at least 8");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl From<IntegralResult> for Estimate {
    fn from(r: IntegralResult) -> Estimate {
        Estimate::new(r.value, r.error_estimate, r.converged)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
}

/// Integrates `f` over `[lo, hi]`, splitting first at every breakpoint inside the interval.
pub fn integrate_1d<F>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(QuadratureError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(IntegralResult { value: 0.0, error_estimate: 0.0, subdivisions_used: 0, converged: true });
    }
    let g = |x: f64| (f(x), 0.0);
    let out = gauss_kronrod::adaptive(
        &g,
        lo,
        hi,
        breakpoints,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_subdivisions,
        |_, _| 0.0,
    )?;
    Ok(IntegralResult {
        value: out.value,
        error_estimate: out.error,
        subdivisions_used: out.panels,
        converged: out.converged,
    })
}

/// Integrates `f(r, theta)` over the annulus `radii[0] <= r <= radii[last]` in polar
/// measure (`r dr dtheta`, the Jacobian is applied here). Interior entries of `radii` are
/// mandatory radial splits.
pub fn integrate_disk<F>(f: F, radii: &[f64], cfg: &QuadratureConfig) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64, f64) -> f64,
{
    cfg.validate()?;
    let (Some(&lo), Some(&hi)) = (radii.first(), radii.last()) else {
        return Err(QuadratureError::InvalidInterval { lo: f64::NAN, hi: f64::NAN });
    };
    if !(0.0 <= lo && lo <= hi) || !hi.is_finite() {
        return Err(QuadratureError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(IntegralResult { value: 0.0, error_estimate: 0.0, subdivisions_used: 0, converged: true });
    }
    let m = cfg.angular_points;
    let angles: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let ring = |r: f64| {
        let mut full = 0.0;
        let mut half = 0.0;
        for (j, &t) in angles.iter().enumerate() {
            let v = f(r, t);
            full += v;
            if j % 2 == 0 {
                half += v;
            }
        }
        (r * full * 2.0 * PI / m as f64, r * half * 4.0 * PI / m as f64)
    };
    let out = gauss_kronrod::adaptive(
        &ring,
        lo,
        hi,
        radii,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_subdivisions,
        |full, half| (full - half).abs(),
    )?;
    Ok(IntegralResult {
        value: out.value,
        error_estimate: out.error,
        subdivisions_used: out.panels,
        converged: out.converged,
    })
}

/// Periodic trapezoid rule for `∫_0^{2π} g(θ) dθ` with `n` equispaced nodes.
/// The error estimate is the difference to the rule on every second node.
pub fn periodic_trapezoid<F>(g: F, n: usize) -> Estimate
where
    F: Fn(f64) -> f64,
{
    let mut full = 0.0;
    let mut half = 0.0;
    for j in 0..n {
        let v = g(2.0 * PI * j as f64 / n as f64);
        full += v;
        if j % 2 == 0 {
            half += v;
        }
    }
    let full = full * 2.0 * PI / n as f64;
    let half = half * 4.0 * PI / n as f64;
    Estimate::new(full, (full - half).abs(), full.is_finite())
}

/// The two geometries fields live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Geometry {
    Line,
    Disk,
}

/// Integrates `f` over a union of ranges (intervals on a line, annuli on a disk), splitting
/// at `breaks`. Ranges are processed in the given order, so sums are reproducible.
pub fn integrate_region<F>(
    geometry: Geometry,
    ranges: &[(f64, f64)],
    breaks: &[f64],
    f: F,
    cfg: &QuadratureConfig,
) -> Result<Estimate, QuadratureError>
where
    F: Fn(Point) -> f64,
{
    let mut total = Estimate::zero();
    for &(lo, hi) in ranges {
        let res = match geometry {
            Geometry::Line => integrate_1d(|x| f(Point::Line(x)), lo, hi, breaks, cfg)?,
            Geometry::Disk => {
                let mut radii = vec![lo];
                radii.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
                radii.push(hi);
                radii.sort_by(f64::total_cmp);
                integrate_disk(|r, theta| f(Point::Polar { r, theta }), &radii, cfg)?
            }
        };
        total = total + res.into();
    }
    Ok(total)
}
