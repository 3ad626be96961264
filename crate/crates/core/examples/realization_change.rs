// Rescaling a constraint `eta -> h eta` shifts the density form by
// `d ln h` plus a multiple of `eta`, so the verdict survives once the
// ansatz basis is transported along.

use nhvol::cli::files::SystemFile;
use nhvol::measure::{exactify, AnsatzBasis};
use nhvol::symexpr::{parse, SampleOpts};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/heisenberg.json");
    let sys = SystemFile::load(path)?.to_system(SampleOpts::default())?;
    let h = parse("2 + sin(z)", &sys.symbols)?;
    let scaled = sys.rescaled(0, &h)?;
    let basis = AnsatzBasis::default_for(&sys);
    let before = exactify(&sys, &basis)?;
    let after = exactify(&scaled, &basis.transported(&sys, 0, &h))?;
    println!("original: {:?}", before.status);
    println!("rescaled: {:?}", after.status);
    if let Some(ks) = after.display_multipliers(&scaled.symbols) {
        println!("  multiplier k = {ks:?}");
    }
    let q = [0.1, -0.2, 0.7];
    if let (Some(a), Some(b)) = (before.density_at(&q)?, after.density_at(&q)?) {
        let hq = h.eval(&q, scaled.params())?;
        let h0 = h.eval(&after.potential.as_ref().unwrap().base, scaled.params())?;
        println!("  rho'/(h rho) normalized = {:.12}", b / a / (hq / h0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
