//! Both sides of the error identity for the 1D model and the circular plate.

use biharmonic_certify::measures::verify_identity;
use biharmonic_certify::problems::builtin;
use biharmonic_certify::quadrature::QuadratureConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = QuadratureConfig::default();
    for (problem, primal, dual) in [("model_1d", "v1", "nstar"), ("circular_plate", "v2", "nhat")] {
        let p = builtin(problem)?;
        let v = p.approx(primal, None)?;
        let n = p.approx(dual, None)?;
        let r = verify_identity(&p, v.primal().unwrap(), n.dual().unwrap(), &cfg)?;
        println!("{problem}: ({primal}, {dual})");
        println!("  mu(v)  = {:.6} + {:.6}", r.lhs_primal.quadratic.value, r.lhs_primal.nonlinear.value);
        println!("  mu*(n) = {:.6} + {:.6}", r.lhs_dual.quadratic.value, r.lhs_dual.nonlinear.value);
        println!("  rhs    = {:.6} + {:.6}", r.rhs.quadratic.value, r.rhs.obstacle.value);
        println!("  lhs {:.6} vs rhs {:.6}  residual {:.2e} (budget {:.2e})  {}",
            r.lhs_total.value, r.rhs.total.value, r.residual, r.budget, if r.passed() { "PASS" } else { "FAIL" });
    }
    Ok(())
}
