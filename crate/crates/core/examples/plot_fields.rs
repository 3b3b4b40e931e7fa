//! Writes an SVG of the exact solution against two approximations to `model_1d.svg`.

use biharmonic_certify::cli::plot::plot;
use biharmonic_certify::problems::model_1d;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = model_1d()?;
    let names: Vec<String> = ["u", "phi", "v1", "v_eps@0.25"].iter().map(|s| s.to_string()).collect();
    let out = std::env::temp_dir().join("model_1d.svg");
    std::fs::write(&out, plot(&p, &names)?)?;
    println!("wrote {}", out.display());
    Ok(())
}
