//! Piecewise fields on an interval or a radially layered disk.
//!
//! A field is a list of pieces, each an [`Expr`] on a closed coordinate range (`x` on a
//! line, `r` on a disk). Pieces tile the domain; a point on a shared endpoint belongs to
//! the left (inner) piece.

mod checks;
mod compiled;
mod ops;
mod sets;

use serde::Serialize;

use crate::expr::{EvalError, Expr, Point, Var, VarSet};
use crate::quadrature::Geometry;

pub use checks::{check_admissible, check_h_divdiv, AdmissibilityReport, HDivDivReport, InterfaceFailure, Violation, ViolationKind};
pub use compiled::{frobenius_sq, CompiledMatrix, CompiledScalar};
pub use ops::{derivative, div_div, divergence, flux_jump, hessian, laplacian, one_sided_limit, JumpValue, Side};
pub use sets::{coincidence_set, SubdomainSet};
pub(crate) use sets::{scan_runs, SAMPLES};

/// Relative slack used when matching piece endpoints.
const ENDPOINT_SLACK: f64 = 1e-12;

/// Default tolerance for claimed continuity across interfaces.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("pieces do not tile the domain: {0}")]
    Tiling(String),
    #[error("piece on [{lo}, {hi}] uses variable `{}` which is not a coordinate of this domain", .var.name())]
    ForeignVariable { lo: f64, hi: f64, var: Var },
    #[error("claimed C^{order} continuity fails at {at}: one-sided values differ by {mismatch:e}")]
    Continuity { at: f64, order: u8, mismatch: f64 },
    #[error("{0} is not an interface of the field")]
    NotAnInterface(f64),
    #[error("derivative order {0} is out of range (0..=3)")]
    OrderOutOfRange(u8),
    #[error("{0} lies outside the domain")]
    OutOfDomain(f64),
    #[error("fields live on different domains")]
    DomainMismatch,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Where a field lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Disk { radius: f64 },
}

impl Domain {
    pub fn validate(&self) -> Result<(), FieldError> {
        match *self {
            Domain::Interval { a, b } if a.is_finite() && b.is_finite() && a < b => Ok(()),
            Domain::Interval { a, b } => Err(FieldError::InvalidDomain(format!("interval ({a}, {b}) needs a < b"))),
            Domain::Disk { radius } if radius.is_finite() && radius > 0.0 => Ok(()),
            Domain::Disk { radius } => Err(FieldError::InvalidDomain(format!("disk radius {radius} must be positive"))),
        }
    }

    pub fn vars(&self) -> VarSet {
        match self {
            Domain::Interval { .. } => VarSet::Line,
            Domain::Disk { .. } => VarSet::Polar,
        }
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            Domain::Interval { .. } => Geometry::Line,
            Domain::Disk { .. } => Geometry::Disk,
        }
    }

    /// Range of the piece coordinate: `[a, b]` or `[0, R]`.
    pub fn extent(&self) -> (f64, f64) {
        match *self {
            Domain::Interval { a, b } => (a, b),
            Domain::Disk { radius } => (0.0, radius),
        }
    }

    /// The coordinate along which pieces are laid out.
    pub fn coordinate(point: Point) -> f64 {
        match point {
            Point::Line(x) => x,
            Point::Polar { r, .. } => r,
        }
    }

    /// A point at coordinate `s` (and angle `theta` on a disk).
    pub fn point(&self, s: f64, theta: f64) -> Point {
        match self {
            Domain::Interval { .. } => Point::Line(s),
            Domain::Disk { .. } => Point::Polar { r: s, theta },
        }
    }
}

/// One piece of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPiece {
    pub lo: f64,
    pub hi: f64,
    pub expr: Expr,
}

/// Symmetric 2×2 entries. On a line only `xx` is used and the others are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEntries {
    pub xx: Expr,
    pub xy: Expr,
    pub yy: Expr,
}

impl SymEntries {
    pub fn line(e: Expr) -> Self {
        SymEntries { xx: e, xy: Expr::zero(), yy: Expr::zero() }
    }

    pub fn plane(xx: Expr, xy: Expr, yy: Expr) -> Self {
        SymEntries { xx, xy, yy }
    }

    pub fn zero() -> Self {
        SymEntries::line(Expr::zero())
    }

    pub fn iter(&self) -> [&Expr; 3] {
        [&self.xx, &self.xy, &self.yy]
    }

    fn map(&self, f: impl Fn(&Expr) -> Expr) -> SymEntries {
        SymEntries { xx: f(&self.xx), xy: f(&self.xy), yy: f(&self.yy) }
    }
}

/// One piece of a symmetric matrix field.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPiece {
    pub lo: f64,
    pub hi: f64,
    pub entries: SymEntries,
}

fn check_tiling(domain: &Domain, ranges: &mut [(f64, f64)]) -> Result<(), FieldError> {
    domain.validate()?;
    let (lo, hi) = domain.extent();
    let slack = ENDPOINT_SLACK * (hi - lo).abs().max(1.0);
    if ranges.is_empty() {
        return Err(FieldError::Tiling("no pieces".into()));
    }
    for &(a, b) in ranges.iter() {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(FieldError::Tiling(format!("piece [{a}, {b}] is empty or reversed")));
        }
    }
    if (ranges[0].0 - lo).abs() > slack {
        return Err(FieldError::Tiling(format!("first piece starts at {} instead of {lo}", ranges[0].0)));
    }
    ranges[0].0 = lo;
    let last = ranges.len() - 1;
    if (ranges[last].1 - hi).abs() > slack {
        return Err(FieldError::Tiling(format!("last piece ends at {} instead of {hi}", ranges[last].1)));
    }
    ranges[last].1 = hi;
    for i in 1..ranges.len() {
        let (prev, next) = (ranges[i - 1].1, ranges[i].0);
        if next < prev - slack {
            return Err(FieldError::Tiling(format!("pieces overlap on [{next}, {prev}]")));
        }
        if next > prev + slack {
            return Err(FieldError::Tiling(format!("gap between {prev} and {next}")));
        }
        ranges[i].0 = prev;
    }
    Ok(())
}

fn check_vars(domain: &Domain, lo: f64, hi: f64, e: &Expr) -> Result<(), FieldError> {
    let vars = domain.vars();
    for var in [Var::X, Var::R, Var::Theta] {
        if !vars.contains(var) && e.contains_var(var) {
            return Err(FieldError::ForeignVariable { lo, hi, var });
        }
    }
    Ok(())
}

/// Index of the piece owning coordinate `s`; shared endpoints go left.
fn locate(his: &[f64], s: f64) -> usize {
    his.partition_point(|&h| h < s).min(his.len() - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseScalarField {
    domain: Domain,
    pieces: Vec<ScalarPiece>,
    smoothness: Option<u8>,
}

impl PiecewiseScalarField {
    /// Builds a field from `(lo, hi, expr)` triples given in increasing order.
    pub fn new(domain: Domain, pieces: Vec<(f64, f64, Expr)>) -> Result<Self, FieldError> {
        let mut ranges: Vec<(f64, f64)> = pieces.iter().map(|p| (p.0, p.1)).collect();
        check_tiling(&domain, &mut ranges)?;
        let pieces = pieces
            .into_iter()
            .zip(ranges)
            .map(|((_, _, expr), (lo, hi))| {
                check_vars(&domain, lo, hi, &expr)?;
                Ok(ScalarPiece { lo, hi, expr })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(PiecewiseScalarField { domain, pieces, smoothness: None })
    }

    /// A single expression on the whole domain.
    pub fn uniform(domain: Domain, expr: Expr) -> Result<Self, FieldError> {
        let (lo, hi) = domain.extent();
        PiecewiseScalarField::new(domain, vec![(lo, hi, expr)])
    }

    pub fn constant(domain: Domain, c: f64) -> Result<Self, FieldError> {
        PiecewiseScalarField::uniform(domain, Expr::constant(c))
    }

    /// Claims `C^order` continuity across every interface and validates it.
    pub fn with_smoothness(mut self, order: u8) -> Result<Self, FieldError> {
        if order > 3 {
            return Err(FieldError::OrderOutOfRange(order));
        }
        for at in self.breakpoints() {
            for k in 0..=order {
                for theta in checks::probe_angles(&self.domain) {
                    let point = self.domain.point(at, theta);
                    let l = one_sided_limit(&self, point, Side::Left, k)?;
                    let r = one_sided_limit(&self, point, Side::Right, k)?;
                    let mismatch = (l - r).abs();
                    if mismatch > CONTINUITY_TOL * l.abs().max(r.abs()).max(1.0) {
                        return Err(FieldError::Continuity { at, order: k, mismatch });
                    }
                }
            }
        }
        self.smoothness = Some(order);
        Ok(self)
    }

    pub fn smoothness(&self) -> Option<u8> {
        self.smoothness
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn pieces(&self) -> &[ScalarPiece] {
        &self.pieces
    }

    /// Interior piece boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    pub fn piece_index(&self, s: f64) -> usize {
        self.pieces.iter().position(|p| s <= p.hi).unwrap_or(self.pieces.len() - 1)
    }

    pub fn piece_at(&self, s: f64) -> &ScalarPiece {
        &self.pieces[self.piece_index(s)]
    }

    /// Checked evaluation.
    pub fn evaluate(&self, point: Point) -> Result<f64, FieldError> {
        let s = Domain::coordinate(point);
        let (lo, hi) = self.domain.extent();
        if !(lo..=hi).contains(&s) {
            return Err(FieldError::OutOfDomain(s));
        }
        Ok(self.piece_at(s).expr.evaluate(point)?)
    }

    pub fn compile(&self) -> CompiledScalar {
        CompiledScalar::new(self)
    }

    /// Applies `f` to every piece expression, keeping the layout.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> PiecewiseScalarField {
        PiecewiseScalarField {
            domain: self.domain,
            pieces: self.pieces.iter().map(|p| ScalarPiece { lo: p.lo, hi: p.hi, expr: f(&p.expr) }).collect(),
            smoothness: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSymMatrixField {
    domain: Domain,
    pieces: Vec<MatrixPiece>,
}

impl PiecewiseSymMatrixField {
    pub fn new(domain: Domain, pieces: Vec<(f64, f64, SymEntries)>) -> Result<Self, FieldError> {
        let mut ranges: Vec<(f64, f64)> = pieces.iter().map(|p| (p.0, p.1)).collect();
        check_tiling(&domain, &mut ranges)?;
        let line = matches!(domain, Domain::Interval { .. });
        let pieces = pieces
            .into_iter()
            .zip(ranges)
            .map(|((_, _, entries), (lo, hi))| {
                for e in entries.iter() {
                    check_vars(&domain, lo, hi, e)?;
                }
                if line && !(entries.xy.is_zero() && entries.yy.is_zero()) {
                    return Err(FieldError::InvalidDomain("a field on an interval has a single entry".into()));
                }
                Ok(MatrixPiece { lo, hi, entries })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(PiecewiseSymMatrixField { domain, pieces })
    }

    /// 1D convenience: one scalar expression per piece.
    pub fn line(domain: Domain, pieces: Vec<(f64, f64, Expr)>) -> Result<Self, FieldError> {
        PiecewiseSymMatrixField::new(domain, pieces.into_iter().map(|(a, b, e)| (a, b, SymEntries::line(e))).collect())
    }

    pub fn zero(domain: Domain) -> Result<Self, FieldError> {
        let (lo, hi) = domain.extent();
        PiecewiseSymMatrixField::new(domain, vec![(lo, hi, SymEntries::zero())])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn pieces(&self) -> &[MatrixPiece] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    pub fn piece_index(&self, s: f64) -> usize {
        self.pieces.iter().position(|p| s <= p.hi).unwrap_or(self.pieces.len() - 1)
    }

    pub fn piece_at(&self, s: f64) -> &MatrixPiece {
        &self.pieces[self.piece_index(s)]
    }

    /// Checked evaluation of `(xx, xy, yy)`.
    pub fn evaluate(&self, point: Point) -> Result<[f64; 3], FieldError> {
        let s = Domain::coordinate(point);
        let (lo, hi) = self.domain.extent();
        if !(lo..=hi).contains(&s) {
            return Err(FieldError::OutOfDomain(s));
        }
        let p = self.piece_at(s);
        Ok([p.entries.xx.evaluate(point)?, p.entries.xy.evaluate(point)?, p.entries.yy.evaluate(point)?])
    }

    pub fn compile(&self) -> CompiledMatrix {
        CompiledMatrix::new(self)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> PiecewiseSymMatrixField {
        PiecewiseSymMatrixField {
            domain: self.domain,
            pieces: self.pieces.iter().map(|p| MatrixPiece { lo: p.lo, hi: p.hi, entries: p.entries.map(&f) }).collect(),
        }
    }
}

/// Sorted union of the interior breakpoints of several fields.
pub fn merged_breakpoints<'a>(lists: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = lists.into_iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Domain {
        Domain::Interval { a: -1.0, b: 1.0 }
    }

    fn x(s: &str) -> Expr {
        Expr::parse(s, VarSet::Line).unwrap()
    }

    #[test]
    fn tiling_is_enforced() {
        let ok = PiecewiseScalarField::new(line(), vec![(-1.0, 0.0, x("x")), (0.0, 1.0, x("x"))]);
        assert!(ok.is_ok());
        let gap = PiecewiseScalarField::new(line(), vec![(-1.0, 0.0, x("x")), (0.1, 1.0, x("x"))]);
        assert!(matches!(gap, Err(FieldError::Tiling(_))));
        let overlap = PiecewiseScalarField::new(line(), vec![(-1.0, 0.2, x("x")), (0.1, 1.0, x("x"))]);
        assert!(matches!(overlap, Err(FieldError::Tiling(m)) if m.contains("overlap")));
        let short = PiecewiseScalarField::new(line(), vec![(-1.0, 0.5, x("x"))]);
        assert!(short.is_err());
    }

    #[test]
    fn breakpoint_ties_go_left() {
        let f = PiecewiseScalarField::new(line(), vec![(-1.0, 0.0, x("1")), (0.0, 1.0, x("2"))]).unwrap();
        assert_eq!(f.evaluate(Point::Line(0.0)).unwrap(), 1.0);
        assert_eq!(f.evaluate(Point::Line(1e-15)).unwrap(), 2.0);
        assert_eq!(f.evaluate(Point::Line(-1.0)).unwrap(), 1.0);
        assert!(f.evaluate(Point::Line(1.5)).is_err());
    }

    #[test]
    fn claimed_smoothness_is_validated() {
        let kink = PiecewiseScalarField::new(line(), vec![(-1.0, 0.0, x("0")), (0.0, 1.0, x("x"))]).unwrap();
        assert!(kink.clone().with_smoothness(0).is_ok());
        assert!(matches!(kink.with_smoothness(1), Err(FieldError::Continuity { order: 1, .. })));
    }

    #[test]
    fn foreign_variables_are_rejected() {
        let disk = Domain::Disk { radius: 1.0 };
        assert!(matches!(
            PiecewiseScalarField::uniform(disk, Expr::x()),
            Err(FieldError::ForeignVariable { var: Var::X, .. })
        ));
    }
}
