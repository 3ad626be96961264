// Exterior derivative, wedge products and Cartan's formula on R^3.

use nhvol::extalg::{KForm, VectorField};
use nhvol::symexpr::{parse, Domain, SampleOpts, Symbols};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let symbols = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
    let p = |s: &str| parse(s, &symbols);
    // the contact form of the Heisenberg group
    let eta = KForm::one_form(3, vec![p("y")?, p("-x")?, p("-1")?]);
    let d_eta = eta.d()?;
    let top = eta.wedge(&d_eta)?;
    for (idx, c) in d_eta.terms() {
        println!("d eta [{idx:?}]  = {}", c.display(&symbols));
    }
    println!("eta ^ d eta  = {}", top.coeff(&[0, 1, 2]).display(&symbols));

    let x = VectorField::new(vec![p("cos(z)")?, p("sin(z)")?, p("x*y")?]);
    let cartan = eta.contract(&x)?.d()?.add(&d_eta.contract(&x)?);
    let diff = eta.lie_derivative(&x)?.sub(&cartan);
    let dom = Domain::boxed(vec![(-1.0, 1.0); 3]);
    println!("L_X eta == i_X d eta + d i_X eta: {}", diff.zero_test(&dom, SampleOpts::default())?.is_zero);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
