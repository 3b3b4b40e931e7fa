//! Closed-form expressions in one Cartesian variable `x` or the polar pair `(r, theta)`.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Subtrees are shared freely, which
//! keeps repeated differentiation from blowing up: the derivative of a product reuses the
//! factors instead of copying them. Constructors fold constants and drop trivial identities
//! (`0 + a`, `1 * a`, `a ^ 1`, ...) but make no attempt at canonical simplification.

mod diff;
mod display;
mod parse;
mod tape;

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

pub use diff::{differentiate, partial, Axis};
pub use parse::{parse_expr, ParseError, ParseErrorKind};
pub use tape::Tape;

/// A free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    R,
    Theta,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::R => "r",
            Var::Theta => "theta",
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Var::X => 0,
            Var::R => 1,
            Var::Theta => 2,
        }
    }
}

/// The variables an expression may mention: `{x}` on a line, `{r, theta}` on a disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarSet {
    Line,
    Polar,
}

impl VarSet {
    pub fn contains(self, var: Var) -> bool {
        match self {
            VarSet::Line => var == Var::X,
            VarSet::Polar => matches!(var, Var::R | Var::Theta),
        }
    }
}

/// A point at which an expression is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Polar { r: f64, theta: f64 },
}

impl Point {
    pub(crate) fn slots(self) -> [f64; 3] {
        match self {
            Point::Line(x) => [x, f64::NAN, f64::NAN],
            Point::Polar { r, theta } => [f64::NAN, r, theta],
        }
    }

    fn binds(self, var: Var) -> bool {
        match self {
            Point::Line(_) => var == Var::X,
            Point::Polar { .. } => var != Var::X,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("logarithm of non-positive value {0}")]
    LogDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("variable `{}` is not bound at this point", .0.name())]
    Unbound(Var),
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(Node::Const(c))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Node::Var(v))
    }

    pub fn x() -> Self {
        Expr::var(Var::X)
    }

    pub fn r() -> Self {
        Expr::var(Var::R)
    }

    pub fn theta() -> Self {
        Expr::var(Var::Theta)
    }

    pub fn parse(text: &str, vars: VarSet) -> Result<Self, ParseError> {
        parse_expr(text, vars)
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn powi(&self, n: u32) -> Expr {
        match (n, self.as_const()) {
            (0, _) => Expr::one(),
            (1, _) => self.clone(),
            (_, Some(c)) => Expr::constant(c.powi(n as i32)),
            _ => Expr::new(Node::Pow(self.clone(), n)),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(c) if c > 0.0 => Expr::constant(c.ln()),
            _ => Expr::new(Node::Ln(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::new(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::new(Node::Cos(self.clone())),
        }
    }

    /// True if `var` occurs anywhere in the tree.
    pub fn contains_var(&self, var: Var) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(v) => *v == var,
            Node::Neg(a) | Node::Pow(a, _) | Node::Ln(a) | Node::Sin(a) | Node::Cos(a) => {
                a.contains_var(var)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.contains_var(var) || b.contains_var(var)
            }
        }
    }

    /// Checked evaluation. Domain violations are reported instead of producing NaN.
    pub fn evaluate(&self, point: Point) -> Result<f64, EvalError> {
        let value = match self.node() {
            Node::Const(c) => *c,
            Node::Var(v) => {
                if !point.binds(*v) {
                    return Err(EvalError::Unbound(*v));
                }
                point.slots()[v.slot()]
            }
            Node::Neg(a) => -a.evaluate(point)?,
            Node::Add(a, b) => a.evaluate(point)? + b.evaluate(point)?,
            Node::Sub(a, b) => a.evaluate(point)? - b.evaluate(point)?,
            Node::Mul(a, b) => a.evaluate(point)? * b.evaluate(point)?,
            Node::Div(a, b) => {
                let den = b.evaluate(point)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.evaluate(point)? / den
            }
            Node::Pow(a, n) => a.evaluate(point)?.powi(*n as i32),
            Node::Ln(a) => {
                let arg = a.evaluate(point)?;
                if arg <= 0.0 {
                    return Err(EvalError::LogDomain(arg));
                }
                arg.ln()
            }
            Node::Sin(a) => a.evaluate(point)?.sin(),
            Node::Cos(a) => a.evaluate(point)?.cos(),
        };
        Ok(value)
    }

    /// Replaces every occurrence of `var` by the constant `value`, folding as it goes.
    pub fn substitute(&self, var: Var, value: f64) -> Expr {
        let mut memo = HashMap::new();
        self.substitute_memo(var, value, &mut memo)
    }

    fn substitute_memo(
        &self,
        var: Var,
        value: f64,
        memo: &mut HashMap<*const Node, Expr>,
    ) -> Expr {
        if let Some(done) = memo.get(&self.ptr()) {
            return done.clone();
        }
        let mut go = |e: &Expr| e.substitute_memo(var, value, memo);
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) if *v == var => Expr::constant(value),
            Node::Var(_) => self.clone(),
            Node::Neg(a) => -go(a),
            Node::Add(a, b) => go(a) + go(b),
            Node::Sub(a, b) => go(a) - go(b),
            Node::Mul(a, b) => go(a) * go(b),
            Node::Div(a, b) => go(a) / go(b),
            Node::Pow(a, n) => go(a).powi(*n),
            Node::Ln(a) => go(a).ln(),
            Node::Sin(a) => go(a).sin(),
            Node::Cos(a) => go(a).cos(),
        };
        memo.insert(self.ptr(), out.clone());
        out
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn dag_size(&self) -> usize {
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<*const Node>) {
            if !seen.insert(e.ptr()) {
                return;
            }
            match e.node() {
                Node::Const(_) | Node::Var(_) => {}
                Node::Neg(a) | Node::Pow(a, _) | Node::Ln(a) | Node::Sin(a) | Node::Cos(a) => {
                    walk(a, seen)
                }
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    pub fn compile(&self) -> Tape {
        Tape::compile(self)
    }
}

/// Checked evaluation; free-function form of [`Expr::evaluate`].
pub fn evaluate(e: &Expr, point: Point) -> Result<f64, EvalError> {
    e.evaluate(point)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => match b.node() {
            Node::Neg(inner) => sub(a, inner.clone()),
            _ => Expr::new(Node::Add(a, b)),
        },
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => match b.node() {
            Node::Neg(inner) => add(a, inner.clone()),
            _ => Expr::new(Node::Sub(a, b)),
        },
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::new(Node::Mul(a, b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::new(Node::Div(a, b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::new(Node::Neg(a)),
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $func:ident) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $func(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $func(self, rhs.clone())
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $func(self.clone(), rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $func(self.clone(), rhs.clone())
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $func(self, Expr::constant(rhs))
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $func(self.clone(), Expr::constant(rhs))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $func(Expr::constant(self), rhs)
            }
        }
        impl ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $func(Expr::constant(self), rhs.clone())
            }
        }
    };
}

binary_op!(Add, add, add);
binary_op!(Sub, sub, sub);
binary_op!(Mul, mul, mul);
binary_op!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_constants() {
        let e = Expr::constant(2.0) * Expr::constant(3.0) + 1.0;
        assert_eq!(e.as_const(), Some(7.0));
        let x = Expr::x();
        assert_eq!(&x * 1.0, x);
        assert!((&x * 0.0).is_zero());
        assert_eq!(x.powi(1), x);
        assert_eq!(x.powi(0).as_const(), Some(1.0));
        assert_eq!(-(-x.clone()), x);
    }

    #[test]
    fn checked_evaluation_reports_domain_errors() {
        let e = Expr::x().ln();
        assert!(matches!(e.evaluate(Point::Line(-1.0)), Err(EvalError::LogDomain(_))));
        let q = Expr::one() / Expr::x();
        assert_eq!(q.evaluate(Point::Line(0.0)), Err(EvalError::DivisionByZero));
        assert_eq!(
            Expr::r().evaluate(Point::Line(1.0)),
            Err(EvalError::Unbound(Var::R))
        );
    }

    #[test]
    fn substitute_folds_to_constant() {
        let e = Expr::r().powi(2) * Expr::theta().cos();
        let at_two = e.substitute(Var::R, 2.0);
        assert!(!at_two.contains_var(Var::R));
        let v = at_two
            .evaluate(Point::Polar { r: 99.0, theta: 0.0 })
            .unwrap();
        assert_eq!(v, 4.0);
    }
}
