use crate::expr::{Point, Tape};

use super::{locate, Domain, PiecewiseScalarField, PiecewiseSymMatrixField};

/// A scalar field flattened to tapes for use inside integrands.
#[derive(Debug, Clone)]
pub struct CompiledScalar {
    his: Vec<f64>,
    tapes: Vec<Tape>,
}

impl CompiledScalar {
    pub fn new(field: &PiecewiseScalarField) -> Self {
        CompiledScalar {
            his: field.pieces().iter().map(|p| p.hi).collect(),
            tapes: field.pieces().iter().map(|p| p.expr.compile()).collect(),
        }
    }

    pub fn eval(&self, point: Point) -> f64 {
        let i = locate(&self.his, Domain::coordinate(point));
        self.tapes[i].eval(point)
    }
}

/// A symmetric matrix field flattened to tapes; evaluates to `[xx, xy, yy]`.
#[derive(Debug, Clone)]
pub struct CompiledMatrix {
    his: Vec<f64>,
    tapes: Vec<[Tape; 3]>,
}

impl CompiledMatrix {
    pub fn new(field: &PiecewiseSymMatrixField) -> Self {
        CompiledMatrix {
            his: field.pieces().iter().map(|p| p.hi).collect(),
            tapes: field
                .pieces()
                .iter()
                .map(|p| [p.entries.xx.compile(), p.entries.xy.compile(), p.entries.yy.compile()])
                .collect(),
        }
    }

    pub fn eval(&self, point: Point) -> [f64; 3] {
        let i = locate(&self.his, Domain::coordinate(point));
        let [a, b, c] = &self.tapes[i];
        [a.eval(point), b.eval(point), c.eval(point)]
    }
}

/// Squared Frobenius norm of a symmetric matrix stored as `[xx, xy, yy]`.
pub fn frobenius_sq(m: [f64; 3]) -> f64 {
    m[0] * m[0] + 2.0 * m[1] * m[1] + m[2] * m[2]
}
