//! Static SVG line plots. Output depends only on the inputs, so files are byte-reproducible.

use std::fmt::Write as _;

use crate::expr::{differentiate, Point, Var};
use crate::fields::{derivative, Domain, PiecewiseScalarField, PiecewiseSymMatrixField};
use crate::problems::{ApproxField, ProblemInstance};

use super::{parse_approx, CliError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const SAMPLES: usize = 400;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A sampled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

enum Field {
    Scalar(PiecewiseScalarField),
    Matrix(PiecewiseSymMatrixField),
}

fn lookup(problem: &ProblemInstance, name: &str) -> Result<Field, CliError> {
    let exact = problem.exact.as_ref();
    Ok(match name {
        "f" => Field::Scalar(problem.f.clone()),
        "phi" => Field::Scalar(problem.phi.clone()),
        "u" if exact.is_some() => Field::Scalar(exact.unwrap().u.clone()),
        "pstar" if exact.is_some() => Field::Matrix(exact.unwrap().p_star.clone()),
        other => match parse_approx(problem, other)?.field {
            ApproxField::Primal(v) => Field::Scalar(v),
            ApproxField::Dual(n) => Field::Matrix(n),
        },
    })
}

/// Resolves a field name; a leading `d` that is not part of a known name means the
/// derivative along the coordinate (`x`, or `r` on a disk).
fn resolve(problem: &ProblemInstance, name: &str) -> Result<Field, CliError> {
    match lookup(problem, name) {
        Ok(field) => Ok(field),
        Err(e) => match name.strip_prefix('d') {
            Some(rest) if !rest.is_empty() => {
                let var = match problem.domain {
                    Domain::Interval { .. } => Var::X,
                    Domain::Disk { .. } => Var::R,
                };
                Ok(match resolve(problem, rest)? {
                    Field::Scalar(v) => Field::Scalar(derivative(&v, 1)),
                    Field::Matrix(n) => Field::Matrix(n.map(|e| differentiate(e, var))),
                })
            }
            _ => Err(e),
        },
    }
}

/// Samples the named fields along the interval, or along the ray `θ = 0` of a disk.
/// Matrix fields contribute their `xx` entry in 1D and all three entries on a disk.
pub fn curves(problem: &ProblemInstance, names: &[String]) -> Result<Vec<Curve>, CliError> {
    let (lo, hi) = problem.domain.extent();
    let grid: Vec<f64> = (0..=SAMPLES).map(|k| lo + (hi - lo) * k as f64 / SAMPLES as f64).collect();
    let at = |s: f64| match problem.domain {
        Domain::Interval { .. } => Point::Line(s),
        Domain::Disk { .. } => Point::Polar { r: s.max(1e-9), theta: 0.0 },
    };
    let mut out = Vec::new();
    for name in names {
        match resolve(problem, name)? {
            Field::Scalar(v) => {
                let t = v.compile();
                out.push(Curve { label: name.clone(), points: grid.iter().map(|&s| (s, t.eval(at(s)))).collect() });
            }
            Field::Matrix(n) => {
                let t = n.compile();
                let entries: &[(usize, &str)] = match problem.domain {
                    Domain::Interval { .. } => &[(0, "")],
                    Domain::Disk { .. } => &[(0, "_11"), (1, "_12"), (2, "_22")],
                };
                for &(i, suffix) in entries {
                    out.push(Curve {
                        label: format!("{name}{suffix}"),
                        points: grid.iter().map(|&s| (s, t.eval(at(s))[i])).collect(),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi - lo).is_finite() || hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.5;
        (lo - pad, hi + pad)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Renders curves into an SVG document.
pub fn svg(title: &str, axis: &str, curves: &[Curve]) -> String {
    let finite = curves.iter().flat_map(|c| c.points.iter()).filter(|p| p.1.is_finite());
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
        ylo = ylo.min(y);
        yhi = yhi.max(y);
    }
    if !xlo.is_finite() {
        (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 0.0);
    }
    let (ylo, yhi) = nice_range(ylo, yhi);
    let sx = |x: f64| MARGIN + (x - xlo) / (xhi - xlo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - ylo) / (yhi - ylo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="black"/>"#);
    if ylo < 0.0 && yhi > 0.0 {
        let z = sy(0.0);
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{z:.2}" x2="{x1}" y2="{z:.2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##);
    }
    for (k, v) in [(0, xlo), (1, 0.5 * (xlo + xhi)), (2, xhi)] {
        let anchor = ["start", "middle", "end"][k];
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#, sx(v), y0 + 16.0, tick(v));
    }
    for v in [ylo, 0.5 * (ylo + yhi), yhi] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, x0 - 4.0, sy(v) + 4.0, tick(v));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 8.0, escape(axis));
    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = c.points.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        let ly = MARGIN + 14.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, x1 - 90.0, x1 - 70.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#, x1 - 66.0, ly + 4.0, escape(&c.label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The SVG for `names` on `problem`.
pub fn plot(problem: &ProblemInstance, names: &[String]) -> Result<String, CliError> {
    let cs = curves(problem, names)?;
    let axis = match problem.domain {
        Domain::Interval { .. } => "x",
        Domain::Disk { .. } => "r (section theta = 0)",
    };
    Ok(svg(&format!("{}: {}", problem.name, names.join(", ")), axis, &cs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::model_1d;

    #[test]
    fn zero_field_is_flat_and_output_is_deterministic() {
        let p = model_1d().unwrap();
        let names = vec!["ddphi".to_string()];
        let cs = curves(&p, &names).unwrap();
        assert!(cs[0].points.iter().all(|&(_, y)| y == 0.0));
        assert_eq!(plot(&p, &names).unwrap(), plot(&p, &names).unwrap());
    }

    #[test]
    fn derivative_prefix_and_unknown_names() {
        let p = model_1d().unwrap();
        let cs = curves(&p, &["pstar".into(), "dpstar".into()]).unwrap();
        assert_eq!(cs.len(), 2);
        // p* = -48(2x-1)(6x-5) on the right, so (p*)' = -48(24x - 16)
        let (x, y) = cs[1].points[350];
        assert!((y - (-48.0 * (24.0 * x - 16.0))).abs() < 1e-8);
        assert!(curves(&p, &["nosuch".into()]).is_err());
        assert!(plot(&p, &["u".into(), "v1".into()]).unwrap().starts_with("<svg"));
    }
}
