use std::cell::RefCell;
use std::collections::HashMap;

use super::{Expr, Node, Point};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Slot(usize),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, i32),
    Ln(u32),
    Sin(u32),
    Cos(u32),
}

/// A flattened, deduplicated instruction list for fast repeated evaluation.
///
/// Unlike [`Expr::evaluate`] this does not check domains: a logarithm of a non-positive
/// number or a zero denominator yields NaN or an infinity, which the integrators reject.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
}

thread_local! {
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

impl Tape {
    pub fn compile(e: &Expr) -> Tape {
        let mut ops = Vec::new();
        let mut index = HashMap::new();
        emit(e, &mut ops, &mut index);
        Tape { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval(&self, point: Point) -> f64 {
        self.eval_slots(point.slots())
    }

    pub(crate) fn eval_slots(&self, slots: [f64; 3]) -> f64 {
        if let [Op::Const(c)] = self.ops.as_slice() {
            return *c;
        }
        SCRATCH.with(|cell| {
            let mut regs = cell.borrow_mut();
            regs.clear();
            for op in &self.ops {
                let v = match *op {
                    Op::Const(c) => c,
                    Op::Slot(s) => slots[s],
                    Op::Neg(a) => -regs[a as usize],
                    Op::Add(a, b) => regs[a as usize] + regs[b as usize],
                    Op::Sub(a, b) => regs[a as usize] - regs[b as usize],
                    Op::Mul(a, b) => regs[a as usize] * regs[b as usize],
                    Op::Div(a, b) => regs[a as usize] / regs[b as usize],
                    Op::Pow(a, n) => regs[a as usize].powi(n),
                    Op::Ln(a) => regs[a as usize].ln(),
                    Op::Sin(a) => regs[a as usize].sin(),
                    Op::Cos(a) => regs[a as usize].cos(),
                };
                regs.push(v);
            }
            *regs.last().expect("tape is never empty")
        })
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>, index: &mut HashMap<*const Node, u32>) -> u32 {
    if let Some(&i) = index.get(&e.ptr()) {
        return i;
    }
    let op = match e.node() {
        Node::Const(c) => Op::Const(*c),
        Node::Var(v) => Op::Slot(v.slot()),
        Node::Neg(a) => Op::Neg(emit(a, ops, index)),
        Node::Add(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Add(a, b)
        }
        Node::Sub(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Sub(a, b)
        }
        Node::Mul(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Mul(a, b)
        }
        Node::Div(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Div(a, b)
        }
        Node::Pow(a, n) => Op::Pow(emit(a, ops, index), *n as i32),
        Node::Ln(a) => Op::Ln(emit(a, ops, index)),
        Node::Sin(a) => Op::Sin(emit(a, ops, index)),
        Node::Cos(a) => Op::Cos(emit(a, ops, index)),
    };
    ops.push(op);
    let i = (ops.len() - 1) as u32;
    index.insert(e.ptr(), i);
    i
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{differentiate, parse_expr, Var, VarSet};

    #[test]
    fn tape_matches_tree_evaluation() {
        let e = parse_expr(
            "((r^2-1)*cos(2*theta)*(3*(r^2+1)-32)+2*r^2*(r-32*ln(r)))/(r^2)",
            VarSet::Polar,
        )
        .unwrap();
        let d = differentiate(&differentiate(&e, Var::R), Var::Theta);
        let tape = d.compile();
        for k in 0..20 {
            let p = Point::Polar { r: 1.0 + 0.1 * k as f64, theta: 0.3 * k as f64 };
            let a = d.evaluate(p).unwrap();
            assert!((tape.eval(p) - a).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn shared_subtrees_compile_once() {
        let x = Expr::x();
        let s = (&x + 1.0).sin();
        let e = &s * &s + &s;
        assert!(e.compile().len() <= 6);
    }
}
