//! The majorant for an infeasible dual field: coefficients, a β sweep, and the optimal β.

use biharmonic_certify::majorant::{beta_grid, majorant_components};
use biharmonic_certify::problems::builtin;
use biharmonic_certify::quadrature::QuadratureConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = QuadratureConfig::default();
    let p = builtin("model_1d")?;
    let v = p.approx("v1", None)?;
    let n = p.approx("ntilde", None)?;
    let c = majorant_components(&p, v.primal().unwrap(), n.dual().unwrap(), &cfg)?;
    let k = c.coefficients();
    println!("M(beta) = {:.3} + {:.3} beta + {:.3} / beta", k.a0, k.a1, k.a2);
    println!("{:>6} {:>10} {:>10} {:>10} {:>8} {:>8}", "beta", "majorant", "lhs", "lhs_compat", "eff", "eff_c");
    for beta in beta_grid(0.05, 1.0, 20)? {
        let r = c.report(beta)?;
        println!(
            "{:>6.2} {:>10.3} {:>10.3} {:>10.3} {:>8.3} {:>8.3}",
            beta,
            r.majorant_total.value,
            r.lhs_total.unwrap().value,
            r.lhs_compat.unwrap().value,
            r.efficiency.unwrap(),
            r.efficiency_compat.unwrap()
        );
    }
    let beta = c.optimal_beta();
    println!("optimal beta {beta:.4}: M = {:.3}", c.report(beta)?.majorant_total.value);
    Ok(())
}
