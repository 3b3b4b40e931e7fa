use std::collections::HashMap;

use super::{Expr, Node, Var, VarSet};

/// Exact symbolic derivative of `e` with respect to `var`.
///
/// Shared subtrees are differentiated once, so the result stays a DAG of size linear in
/// the input for each application.
pub fn differentiate(e: &Expr, var: Var) -> Expr {
    let mut memo = HashMap::new();
    derive(e, var, &mut memo)
}

fn derive(e: &Expr, var: Var, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(v) => Expr::constant(if *v == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => -derive(a, var, memo),
        Node::Add(a, b) => derive(a, var, memo) + derive(b, var, memo),
        Node::Sub(a, b) => derive(a, var, memo) - derive(b, var, memo),
        Node::Mul(a, b) => {
            let da = derive(a, var, memo);
            let db = derive(b, var, memo);
            da * b + a * db
        }
        Node::Div(a, b) => {
            let da = derive(a, var, memo);
            let db = derive(b, var, memo);
            if db.is_zero() {
                da / b
            } else {
                da / b - a * db / b.powi(2)
            }
        }
        Node::Pow(a, n) => {
            let da = derive(a, var, memo);
            f64::from(*n) * a.powi(n - 1) * da
        }
        Node::Ln(a) => derive(a, var, memo) / a,
        Node::Sin(a) => a.cos() * derive(a, var, memo),
        Node::Cos(a) => -(a.sin() * derive(a, var, memo)),
    };
    memo.insert(e.ptr(), d.clone());
    d
}

/// Cartesian direction for [`partial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Cartesian partial derivative of an expression written in the variables of `vars`.
///
/// On a line this is `d/dx` (and `Y` is identically zero). In polar variables the chain rule
/// gives `d/dx = cos(t) d/dr - sin(t)/r d/dt` and `d/dy = sin(t) d/dr + cos(t)/r d/dt`,
/// valid for `r > 0`.
pub fn partial(e: &Expr, axis: Axis, vars: VarSet) -> Expr {
    match (vars, axis) {
        (VarSet::Line, Axis::X) => differentiate(e, Var::X),
        (VarSet::Line, Axis::Y) => Expr::zero(),
        (VarSet::Polar, _) => {
            let dr = differentiate(e, Var::R);
            let dt = differentiate(e, Var::Theta);
            let (c, s) = (Expr::theta().cos(), Expr::theta().sin());
            let angular = dt / Expr::r();
            match axis {
                Axis::X => c * dr - s * angular,
                Axis::Y => s * dr + c * angular,
            }
        }
    }
}
