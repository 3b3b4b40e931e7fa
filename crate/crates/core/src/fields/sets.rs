use std::fmt;

use serde::Serialize;

use crate::expr::Tape;
use crate::quadrature::Geometry;

use super::checks::probe_angles;
use super::{merged_breakpoints, FieldError, PiecewiseScalarField, ENDPOINT_SLACK};

/// Samples per segment when searching numerically.
pub(crate) const SAMPLES: usize = 512;
const BISECTIONS: usize = 64;

/// A finite union of closed ranges: intervals on a line, annuli (or a disk when the range
/// starts at 0) on a disk. Components are sorted and pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubdomainSet {
    geometry: Geometry,
    components: Vec<(f64, f64)>,
}

impl SubdomainSet {
    /// Normalizes `ranges`: drops reversed entries, sorts, and merges touching components.
    pub fn new(geometry: Geometry, ranges: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut ranges: Vec<(f64, f64)> = ranges.into_iter().filter(|(a, b)| a <= b).collect();
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut components: Vec<(f64, f64)> = Vec::with_capacity(ranges.len());
        for (a, b) in ranges {
            match components.last_mut() {
                Some(last) if a <= last.1 + ENDPOINT_SLACK * last.1.abs().max(1.0) => last.1 = last.1.max(b),
                _ => components.push((a, b)),
            }
        }
        SubdomainSet { geometry, components }
    }

    pub fn empty(geometry: Geometry) -> Self {
        SubdomainSet { geometry, components: Vec::new() }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, s: f64) -> bool {
        self.components.iter().any(|&(a, b)| a <= s && s <= b)
    }

    /// Total length (1D) or area (disk).
    pub fn measure(&self) -> f64 {
        self.components
            .iter()
            .map(|&(a, b)| match self.geometry {
                Geometry::Line => b - a,
                Geometry::Disk => std::f64::consts::PI * (b * b - a * a),
            })
            .sum()
    }

    /// The closure of `extent ∖ self`.
    pub fn complement_in(&self, extent: (f64, f64)) -> SubdomainSet {
        let mut out = Vec::new();
        let mut cursor = extent.0;
        for &(a, b) in &self.components {
            if a > cursor {
                out.push((cursor, a.min(extent.1)));
            }
            cursor = cursor.max(b);
        }
        if cursor < extent.1 {
            out.push((cursor, extent.1));
        }
        SubdomainSet::new(self.geometry, out)
    }

    /// Boundary points (radii) strictly inside `extent`; on a disk the centre is excluded.
    pub fn interfaces(&self, extent: (f64, f64)) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .components
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|&s| s > extent.0 && s < extent.1)
            .collect();
        pts.dedup();
        pts
    }

    pub fn is_subset_of(&self, other: &SubdomainSet) -> bool {
        self.components
            .iter()
            .all(|&(a, b)| other.components.iter().any(|&(c, d)| c <= a + 1e-12 && b <= d + 1e-12))
    }
}

impl fmt::Display for SubdomainSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "∅");
        }
        for (i, (a, b)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            match self.geometry {
                Geometry::Line => write!(f, "[{a}, {b}]")?,
                Geometry::Disk if *a == 0.0 => write!(f, "disk(r ≤ {b})")?,
                Geometry::Disk => write!(f, "annulus({a} ≤ r ≤ {b})")?,
            }
        }
        Ok(())
    }
}

/// Scans `[a, b]` on an interior grid for runs where `pred` holds and refines the run ends
/// by bisection. A run touching the first or last sample extends to the segment end.
pub(crate) fn scan_runs(a: f64, b: f64, samples: usize, pred: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    let h = (b - a) / samples as f64;
    let at = |k: usize| a + (k as f64 + 0.5) * h;
    let refine = |mut bad: f64, mut good: f64| {
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (bad + good);
            if mid == bad || mid == good {
                break;
            }
            if pred(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let hits: Vec<bool> = (0..samples).map(|k| pred(at(k))).collect();
    let mut runs = Vec::new();
    let mut k = 0;
    while k < samples {
        if !hits[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < samples && hits[k] {
            k += 1;
        }
        let end = k - 1;
        let lo = if start == 0 { a } else { refine(at(start - 1), at(start)) };
        let hi = if end == samples - 1 { b } else { refine(at(end + 1), at(end)) };
        runs.push((lo, hi));
    }
    runs
}

/// The set where `|v − φ| ≤ tol`.
///
/// Segments (between the merged breakpoints of both fields) on which the two piece
/// expressions are literally equal are taken whole. Elsewhere `|v − φ| − tol` is sampled on
/// a 512-point grid (and, on a disk, at a fixed set of angles) and run ends are bisected.
/// Isolated touching points narrower than the grid are not reported.
pub fn coincidence_set(v: &PiecewiseScalarField, phi: &PiecewiseScalarField, tol: f64) -> Result<SubdomainSet, FieldError> {
    if v.domain() != phi.domain() {
        return Err(FieldError::DomainMismatch);
    }
    let domain = *v.domain();
    let (lo, hi) = domain.extent();
    let mut edges = vec![lo];
    edges.extend(merged_breakpoints([v.breakpoints().as_slice(), phi.breakpoints().as_slice()]));
    edges.push(hi);
    let angles = probe_angles(&domain);

    let mut ranges = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let (ev, ep) = (&v.piece_at(mid).expr, &phi.piece_at(mid).expr);
        if ev == ep {
            ranges.push((a, b));
            continue;
        }
        let (tv, tp): (Tape, Tape) = (ev.compile(), ep.compile());
        let close = |s: f64| {
            angles.iter().all(|&t| {
                let p = domain.point(s, t);
                (tv.eval(p) - tp.eval(p)).abs() <= tol
            })
        };
        ranges.extend(scan_runs(a, b, SAMPLES, close));
    }
    Ok(SubdomainSet::new(domain.geometry(), ranges))
}

#[cfg(test)]
mod tests {
    use crate::fields::Domain;
    use super::*;
    use crate::expr::{Expr, VarSet};

    fn line() -> Domain {
        Domain::Interval { a: -1.0, b: 1.0 }
    }

    fn lx(s: &str) -> Expr {
        Expr::parse(s, VarSet::Line).unwrap()
    }

    #[test]
    fn normalization_merges_and_sorts() {
        let s = SubdomainSet::new(Geometry::Line, [(0.5, 0.7), (-0.2, 0.1), (0.1, 0.3)]);
        assert_eq!(s.components(), &[(-0.2, 0.3), (0.5, 0.7)]);
        assert!((s.measure() - 0.7).abs() < 1e-15);
        let c = s.complement_in((-1.0, 1.0));
        assert_eq!(c.components(), &[(-1.0, -0.2), (0.3, 0.5), (0.7, 1.0)]);
        assert_eq!(s.interfaces((-1.0, 1.0)), vec![-0.2, 0.3, 0.5, 0.7]);
    }

    #[test]
    fn structural_and_numeric_detection() {
        let phi = PiecewiseScalarField::constant(line(), -1.0).unwrap();
        let v = PiecewiseScalarField::new(
            line(),
            vec![(-1.0, -0.3, lx("-1 + (x+0.3)^2")), (-0.3, 0.3, lx("-1")), (0.3, 1.0, lx("-1 + (x-0.3)^2"))],
        )
        .unwrap();
        let set = coincidence_set(&v, &phi, 1e-9).unwrap();
        assert_eq!(set.components(), &[(-0.3, 0.3)]);

        // A numerically flat stretch with no matching piece structure.
        let w = PiecewiseScalarField::uniform(line(), lx("-1 + 0*x")).unwrap();
        assert_eq!(coincidence_set(&w, &phi, 1e-9).unwrap().components(), &[(-1.0, 1.0)]);

        let bump = PiecewiseScalarField::uniform(line(), lx("x^2 - 1")).unwrap();
        let s = coincidence_set(&bump, &phi, 0.01).unwrap();
        assert_eq!(s.components().len(), 1);
        let (a, b) = s.components()[0];
        assert!((a + 0.1).abs() < 1e-12 && (b - 0.1).abs() < 1e-12, "{a} {b}");
    }
}
