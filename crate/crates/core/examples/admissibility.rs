//! Pointwise and interface checks for the built-in approximations.

use biharmonic_certify::fields::{check_admissible, check_h_divdiv};
use biharmonic_certify::problems::{builtin, builtin_ids};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for id in builtin_ids() {
        let p = builtin(id)?;
        for spec in p.approximations() {
            let name = spec.name.as_str();
            let a = match p.approx(name, None) {
                Ok(a) => a,
                Err(_) => continue, // families need a parameter
            };
            if let Some(v) = a.primal() {
                let rep = check_admissible(v, &p.phi)?;
                println!("{id}/{name}: {} points checked, {} violations", rep.points_checked, rep.violations.len());
                for v in rep.violations.iter().take(3) {
                    println!("  {v}");
                }
            }
            if let Some(n) = a.dual() {
                let rep = check_h_divdiv(n);
                println!("{id}/{name}: H(divDiv) member = {}", rep.is_member());
                for f in &rep.failures {
                    println!("  {} jumps by {:.3e} at {}", f.quantity, f.mismatch, f.at);
                }
            }
        }
    }
    Ok(())
}
