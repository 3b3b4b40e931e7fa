use crate::estimate::Estimate;
use crate::fields::{frobenius_sq, PiecewiseScalarField, PiecewiseSymMatrixField};

use super::{integrate_region, QuadratureConfig, QuadratureError};

/// `‖g‖²` over the whole domain.
pub fn l2_norm_sq(g: &PiecewiseScalarField, cfg: &QuadratureConfig) -> Result<Estimate, QuadratureError> {
    let t = g.compile();
    let domain = g.domain();
    integrate_region(domain.geometry(), &[domain.extent()], &g.breakpoints(), |p| t.eval(p).powi(2), cfg)
}

/// `‖n‖² = ∫ Σᵢⱼ nᵢⱼ²` (Frobenius) over the whole domain.
pub fn l2_norm_sq_matrix(n: &PiecewiseSymMatrixField, cfg: &QuadratureConfig) -> Result<Estimate, QuadratureError> {
    let t = n.compile();
    let domain = n.domain();
    integrate_region(domain.geometry(), &[domain.extent()], &n.breakpoints(), |p| frobenius_sq(t.eval(p)), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, VarSet};
    use crate::fields::Domain;

    #[test]
    fn norms_of_simple_fields() {
        let cfg = QuadratureConfig::default();
        let line = Domain::Interval { a: -1.0, b: 1.0 };
        assert_eq!(l2_norm_sq(&PiecewiseScalarField::constant(line, 0.0).unwrap(), &cfg).unwrap().value, 0.0);
        let one = PiecewiseScalarField::constant(line, 1.0).unwrap();
        assert!((l2_norm_sq(&one, &cfg).unwrap().value - 2.0).abs() < 1e-14);

        let disk = Domain::Disk { radius: 1.0 };
        let pol = |s: &str| Expr::parse(s, VarSet::Polar).unwrap();
        let n = PiecewiseSymMatrixField::new(
            disk,
            vec![(0.0, 1.0, crate::fields::SymEntries::plane(pol("1"), pol("1"), pol("0")))],
        )
        .unwrap();
        // 1 + 2·1 + 0 over the unit disk
        assert!((l2_norm_sq_matrix(&n, &cfg).unwrap().value - 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
