//! Nested cubes on which the Lipschitz cube metric collapses while the
//! logarithmic one diverges.

use zygjet::selection::counterexample_family;

fn main() -> zygjet::Result<()> {
    println!("{:>3} {:>14} {:>14} {:>10}", "i", "r_i", "rho_1", "rho");
    for row in counterexample_family(8)? {
        println!("{:>3} {:>14.6e} {:>14.6e} {:>10.4}", row.i, row.r_i, row.rho_1, row.rho);
    }
    Ok(())
}
