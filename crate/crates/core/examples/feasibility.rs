//! Locates where a dual field violates `f − div Div n ≤ 0`, and what the majorant pays for it.

use biharmonic_certify::majorant::{friedrichs_constant, projection_bound};
use biharmonic_certify::measures::check_feasibility;
use biharmonic_certify::problems::model_1d;
use biharmonic_certify::quadrature::QuadratureConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = QuadratureConfig::default();
    let p = model_1d()?;
    let cf = friedrichs_constant(&p.domain);
    for name in ["nstar", "ntilde"] {
        let n = p.approx(name, None)?;
        let n = n.dual().unwrap();
        let rep = check_feasibility(n, &p.f)?;
        println!("{name}: feasible = {}, max(f - divDiv n) = {:.4}", rep.feasible, rep.max_residual);
        if !rep.feasible {
            println!("  violated on {} (measure {:.4})", rep.violation, rep.violation.measure());
        }
        println!("  C_F |(f - divDiv n)_+| = {:.4}", projection_bound(n, &p.f, cf, &cfg)?);
    }
    Ok(())
}
