// The density form of the falling disk and the torsion identity
// `theta = tr T + d ln det m`.

use nhvol::cli::files::SystemFile;
use nhvol::extalg::KForm;
use nhvol::symexpr::SampleOpts;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/falling_disk.json");
    let sys = SystemFile::load(path)?.to_system(SampleOpts::default())?;
    let theta = sys.density_form()?;
    // the symbolic components are large; compare numerically with the closed form
    let (m, r, j) = (1.2, 0.5, 0.15);
    for q in sys.domain.samples(4, 11)? {
        let comps = theta.eval_components(&q, sys.params())?;
        let t = q[2];
        let want = -2.0 * m * r * r * (2.0 * t).sin() / (2.0 * j + m * r * r - m * r * r * (2.0 * t).cos());
        println!("theta at theta = {t:+.3}: dtheta {:+.9} (closed form {want:+.9}), others {:.1e}", comps[2], [comps[0], comps[1], comps[3], comps[4]].iter().fold(0.0f64, |a, c| a.max(c.abs())));
    }
    let ln_det = KForm::scalar(sys.dim(), sys.mass_matrix().det.ln()).d()?;
    let identity = sys.torsion_trace()?.add(&ln_det).sub(&theta);
    println!("torsion identity holds: {}", identity.zero_test(&sys.domain, sys.opts)?.is_zero);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
