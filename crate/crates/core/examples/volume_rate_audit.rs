// Finite-difference check of a candidate density along reduced states.

use nhvol::cli::files::SystemFile;
use nhvol::dynamics::{volume_rate_audit, DynError, ReducedChart};
use nhvol::symexpr::SampleOpts;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/falling_disk.json");
    let sys = SystemFile::load(path)?.to_system(SampleOpts::default())?;
    let chart = ReducedChart::new(&sys)?;
    let states = chart.random_states(&sys.domain, 16, 7)?;
    let (m, r, j) = (1.2, 0.5, 0.15);
    let log_rho = |q: &[f64]| -> Result<f64, DynError> { Ok(-(j + m * r * r * q[2].sin().powi(2)).ln()) };
    let with = volume_rate_audit(&chart, &states, Some(&log_rho))?;
    let without = volume_rate_audit(&chart, &states, None)?;
    println!("rho = 1/(J + m R^2 sin^2 theta): certified {} (relative rate {:.1e})", with.certified, with.max_relative);
    println!("rho = 1:                         certified {} (relative rate {:.1e})", without.certified, without.max_relative);
    if let Some(c) = without.fitted_factor {
        println!("fitted factor in div = -c theta(qdot): c = {:.9} +- {:.1e}", c.mean, c.std);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
