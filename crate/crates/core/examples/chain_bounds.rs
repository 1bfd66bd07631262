//! Upper and lower bounds on the chain metric between two jets.

use zygjet::geodesic::{bracket, default_candidates, verify_chain_bound};
use zygjet::{Cube, Jet, JetSpace, Modulus, Point, Poly};

fn main() -> zygjet::Result<()> {
    let space = JetSpace::new(Modulus::power(1.0, 1)?, 1, 1)?;
    let jet = |c: [f64; 2], x: f64, r: f64| Jet::new(Poly::from_coefficients(1, 1, c.to_vec())?, Cube::new(Point(vec![x]), r)?);
    let from = jet([0.0, 1.0], 0.0, 0.05)?;
    let to = jet([2.0, -1.0], 3.0, 0.5)?;
    let candidates = default_candidates(&from, &to, 8)?;
    let b = bracket(&space, &from, &to, &candidates)?;
    println!("delta   {:.6}", space.delta(&from, &to, None)?);
    println!("bracket [{:.6}, {:.6}] over {} intermediate jets", b.lower, b.upper, candidates.len());
    let mut chain = vec![from.clone()];
    chain.extend(candidates);
    chain.push(to);
    let ineq = verify_chain_bound(&space, &chain)?;
    println!("chain bound {:.6} <= {:.6}: {}", ineq.lhs, ineq.rhs, ineq.holds);
    Ok(())
}
