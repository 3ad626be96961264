// Euler-Poincare-Suslov systems: the divergence covector, annihilator
// membership and the Kozlov eigenvector test.

use nalgebra::{DMatrix, DVector};
use nhvol::cli::files::EpsFile;
use nhvol::liealg::known::so3;
use nhvol::liealg::LieAlgebraSystem;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/eps_sleigh.json");
    let sleigh = EpsFile::load(path)?.to_system()?;
    let mem = sleigh.membership();
    println!("sleigh: tr ad = {:?}", sleigh.trace_ad().as_slice());
    println!("sleigh: theta = {:?}, member {} (residual {:.3})", sleigh.eps_theta().as_slice(), mem.member, mem.residual);

    let inertia = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
    for (label, eta) in [("e3", [0.0, 0.0, 1.0]), ("e1 + e2", [1.0, 1.0, 0.0])] {
        let sys = LieAlgebraSystem::new(so3(), inertia.clone(), DMatrix::from_row_slice(1, 3, &eta))?;
        let k = sys.kozlov_test()?;
        println!("so(3), eta = {label}: kozlov {} (a = {:?}), member {}", k.holds, k.eigenvalue, sys.membership().member);
    }

    let p0 = sleigh.project(&DVector::from_vec(vec![0.4, 1.0, 0.0]));
    let path = sleigh.flow(&p0, 1e-2, 500);
    let last = path.last().unwrap();
    println!("sleigh momentum after t = 5: {:?}, constraint {:.1e}", last.as_slice(), sleigh.constraint_residual(last));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
