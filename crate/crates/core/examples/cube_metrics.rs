//! Cube metrics and the half-space comparison for a few cube pairs.

use zygjet::cube::{equivalence_ratio, poincare, rho, rho_omega};
use zygjet::{Cube, Modulus, Point};

fn main() -> zygjet::Result<()> {
    let holder = Modulus::power(0.5, 1)?;
    let pairs = [
        (Cube::new(Point(vec![0.0]), 1.0)?, Cube::new(Point(vec![0.0]), 2.0)?),
        (Cube::new(Point(vec![0.0]), 0.5)?, Cube::new(Point(vec![0.0]), 0.0625)?),
        (Cube::new(Point(vec![0.0, 0.0]), 0.1)?, Cube::new(Point(vec![3.0, -1.0]), 0.4)?),
    ];
    println!("{:>10} {:>10} {:>10} {:>10}", "rho", "rho_omega", "rho_H", "ratio");
    for (a, b) in &pairs {
        let (za, zb) = (a.to_half_space(), b.to_half_space());
        println!(
            "{:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            rho(a, b)?,
            rho_omega(&holder, a, b)?,
            poincare(&za, &zb)?,
            equivalence_ratio(&za, &zb)?
        );
    }
    Ok(())
}
