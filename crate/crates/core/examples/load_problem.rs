//! Loads a problem description from disk and reports the energies of its approximations.
//!
//! `cargo run --example load_problem -- examples/data/plate_annulus.problem`

use std::path::PathBuf;

use biharmonic_certify::measures::{energy_dual, energy_primal, DualEnergy};
use biharmonic_certify::problems::load_problem_file;
use biharmonic_certify::quadrature::QuadratureConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/plate_annulus.problem"));
    let cfg = QuadratureConfig::default();
    let p = load_problem_file(&path)?;
    println!("{} on {:?}", p.name, p.domain);
    for spec in p.approximations() {
        let name = spec.name.as_str();
        let a = p.approx(name, None)?;
        if let Some(v) = a.primal() {
            println!("  J({name})  = {:.6}", energy_primal(&p, v, &cfg)?.value);
        }
        if let Some(n) = a.dual() {
            match energy_dual(&p, n, &cfg)? {
                DualEnergy::Finite(e) => println!("  I*({name}) = {:.6}", e.value),
                DualEnergy::Infeasible { violation } => println!("  I*({name}) = -inf (violated on {violation})"),
            }
        }
    }
    Ok(())
}
