// Constraint fields, the constraint mass matrix and the Frobenius test.

use nhvol::cli::files::SystemFile;
use nhvol::symexpr::SampleOpts;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["rolling_ball", "heisenberg"] {
        let path = format!("{}/systems/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let sys = SystemFile::load(path)?.to_system(SampleOpts::default())?;
        println!("{}", sys.name);
        let q = sys.domain.samples(1, 5)?.remove(0);
        println!("  at q = {q:.3?}");
        for (a, w) in sys.constraint_fields().iter().enumerate() {
            let comps: Vec<f64> = w.comps.iter().map(|c| c.eval(&q, sys.params())).collect::<Result<_, _>>()?;
            println!("  W^{} = {comps:.4?}", a + 1);
        }
        let mass = sys.mass_matrix();
        for row in &mass.upper {
            let row: Vec<f64> = row.iter().map(|e| e.eval(&q, sys.params())).collect::<Result<_, _>>()?;
            println!("  m^ab row {row:.4?}");
        }
        let frob = sys.frobenius_test()?;
        println!("  holonomic: {} witness: {:?}", frob.holonomic, frob.witness);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
