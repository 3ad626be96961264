// Produce the JSON audit report programmatically.

use nhvol::cli::{audit_value, Common};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/mobius.json");
    let common = Common {
        samples: 48,
        ..Common::default()
    };
    let (code, report) = audit_value(path.as_ref(), &common)?;
    println!("exit code {code}");
    println!("status    {}", report["verdict"]["status"]);
    println!("density   {}", report["verdict"]["potential"]["density_expr"]);
    println!("certified {}", report["rate_audit"]["certified"]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
