// Integrate the Chaplygin sleigh with RK4 and print the monitors.

use nhvol::cli::files::SystemFile;
use nhvol::dynamics::Integrator;
use nhvol::symexpr::SampleOpts;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/chaplygin_sleigh.json");
    let file = SystemFile::load(path)?;
    let sys = file.to_system(SampleOpts::default())?;
    let init = file.initial.clone().ok_or("sleigh file has an initial state")?;
    let traj = Integrator::new(&sys)?.integrate(&init.q, &init.v, 0.0, 5.0, 1e-3)?;
    println!("steps {}, energy drift {:.2e}, constraint {:.2e}", traj.len() - 1, traj.energy_drift(), traj.max_constraint_residual());
    let mut csv = Vec::new();
    traj.write_csv(&mut csv, &sys.symbols.coords)?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().step_by(1000) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
