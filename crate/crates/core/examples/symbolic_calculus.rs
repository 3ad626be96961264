// Parse an expression, differentiate it and test an identity by sampling.

use nhvol::symexpr::{is_zero, parse, Domain, Symbols};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let symbols = Symbols::new(&["x", "theta"], &["R"]);
    let e = parse("R*sin(theta)^2 + x*exp(-x^2/2)", &symbols)?;
    let de = e.diff(1);
    println!("f         = {}", e.display(&symbols));
    println!("df/dtheta = {}", de.display(&symbols));
    println!("f(0.5, 1.2) at R = 0.6: {:.6}", e.eval(&[0.5, 1.2], &[0.6])?);

    let dom = Domain::boxed(vec![(-1.0, 1.0), (-3.0, 3.0)]).with_params(vec![0.6]);
    let double_angle = parse("2*R*sin(theta)*cos(theta)", &symbols)?;
    println!("df/dtheta == R sin(2 theta): {}", is_zero(&de.sub(&double_angle), &dom, 64, 1e-9)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
