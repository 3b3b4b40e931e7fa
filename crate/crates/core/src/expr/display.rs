use std::fmt;

use super::{Expr, Node};

// Grammar levels: 1 = expr, 2 = term, 3 = factor, 4 = base.
fn level(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Pow(..) => 3,
        Node::Const(_) | Node::Var(_) | Node::Neg(_) | Node::Ln(_) | Node::Sin(_) | Node::Cos(_) => 4,
    }
}

fn write_at(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(e.node()) < min {
        write!(f, "(")?;
        write_node(e, f)?;
        write!(f, ")")
    } else {
        write_node(e, f)
    }
}

// Right operands and power bases: a bare negative literal there reads badly ("x*-3").
fn write_operand(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if matches!(e.node(), Node::Const(c) if c.is_sign_negative()) {
        write!(f, "(")?;
        write_node(e, f)?;
        write!(f, ")")
    } else {
        write_at(e, min, f)
    }
}

fn write_node(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Const(c) if c.is_sign_negative() => write!(f, "-{}", -c),
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(v) => write!(f, "{}", v.name()),
        Node::Neg(a) => {
            write!(f, "-")?;
            write_at(a, 4, f)
        }
        Node::Add(a, b) => {
            write_at(a, 1, f)?;
            write!(f, " + ")?;
            write_operand(b, 2, f)
        }
        Node::Sub(a, b) => {
            write_at(a, 1, f)?;
            write!(f, " - ")?;
            write_operand(b, 2, f)
        }
        Node::Mul(a, b) => {
            write_at(a, 2, f)?;
            write!(f, "*")?;
            write_operand(b, 3, f)
        }
        Node::Div(a, b) => {
            write_at(a, 2, f)?;
            write!(f, "/")?;
            write_operand(b, 3, f)
        }
        Node::Pow(a, n) => {
            write_operand(a, 4, f)?;
            write!(f, "^{n}")
        }
        Node::Ln(a) => write_call("ln", a, f),
        Node::Sin(a) => write_call("sin", a, f),
        Node::Cos(a) => write_call("cos", a, f),
    }
}

fn write_call(name: &str, arg: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{name}(")?;
    write_at(arg, 1, f)?;
    write!(f, ")")
}

/// Prints in the input grammar; the output parses back to an equivalent expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 1, f)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse_expr, VarSet};

    #[test]
    fn prints_with_minimal_parentheses() {
        let e = parse_expr("-8*(x+1)^2*(6*x^2+4*x+1)", VarSet::Line).unwrap();
        assert_eq!(e.to_string(), "-8*(x + 1)^2*(6*x^2 + 4*x + 1)");
        let e = parse_expr("1-(2-x)", VarSet::Line).unwrap();
        assert_eq!(e.to_string(), "1 - (2 - x)");
        let e = parse_expr("-(x^2)", VarSet::Line).unwrap();
        assert_eq!(e.to_string(), "-(x^2)");
        let e = parse_expr("x*(-3)", VarSet::Line).unwrap();
        assert_eq!(e.to_string(), "x*(-3)");
    }
}
