use std::fmt;
use std::ops;

use serde::Serialize;

/// A computed real together with an attached numerical error bound.
///
/// Arithmetic propagates bounds additively (`|a·s|` for scaling), and `converged` is the
/// conjunction of the flags of every contributing integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    pub fn new(value: f64, error: f64, converged: bool) -> Self {
        Estimate { value, error: error.abs(), converged }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0, converged: true }
    }

    pub fn zero() -> Self {
        Estimate::exact(0.0)
    }

    /// True when `other` lies within the combined error bars of both, plus `slack`.
    pub fn agrees_with(&self, other: &Estimate, slack: f64) -> bool {
        (self.value - other.value).abs() <= self.error + other.error + slack
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.1e}", self.value, self.error)
    }
}

impl ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            converged: self.converged && rhs.converged,
        }
    }
}

impl ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
            converged: self.converged && rhs.converged,
        }
    }
}

impl ops::Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, s: f64) -> Estimate {
        Estimate { value: self.value * s, error: self.error * s.abs(), converged: self.converged }
    }
}

impl ops::Neg for Estimate {
    type Output = Estimate;
    fn neg(self) -> Estimate {
        Estimate { value: -self.value, ..self }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::zero(), |a, b| a + b)
    }
}
