// Decide whether an invariant volume exists and report its density.

use nhvol::cli::files::SystemFile;
use nhvol::measure::{exactify, AnsatzBasis};
use nhvol::symexpr::SampleOpts;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["falling_disk", "chaplygin_sleigh", "sleigh_oscillator"] {
        let path = format!("{}/systems/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let sys = SystemFile::load(path)?.to_system(SampleOpts::default())?;
        let verdict = exactify(&sys, &AnsatzBasis::default_for(&sys))?;
        println!("{}: {:?}", sys.name, verdict.status);
        if let Some(p) = verdict.potential.as_ref().and_then(|p| p.expr.as_ref()) {
            println!("  ln rho = {}", p.display(&sys.symbols));
        }
        if let Some(w) = verdict.certified_no() {
            println!("  no density: {} (residual {:.2e})", w.reason, w.residual);
        }
        let q = sys.domain.samples(1, 3)?.remove(0);
        if let Some(rho) = verdict.density_at(&q)? {
            println!("  rho at {q:.3?} = {rho:.6} (1 at the base point)");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
