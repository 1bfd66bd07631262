//! Jet distance for the jets in data/hand_jets.json, by each available route.

use serde::Deserialize;
use zygjet::jet::zygmund_delta;
use zygjet::{Cube, Jet, JetSpace, Modulus, Poly};

#[derive(Deserialize)]
struct Entry {
    poly: Poly,
    cube: Cube,
}

#[derive(Deserialize)]
struct Input {
    omega: Modulus,
    jets: Vec<Entry>,
}

fn main() -> anyhow::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/hand_jets.json");
    let input: Input = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let m = input.omega.order();
    let space = JetSpace::new(input.omega, 1, 0)?;
    let a = Jet::new(input.jets[0].poly.clone(), input.jets[0].cube.clone())?;
    let b = Jet::new(input.jets[1].poly.clone(), input.jets[1].cube.clone())?;
    println!("Delta          {:.12}", space.capital_delta(&a, &b, None)?);
    println!("delta          {:.12}", space.delta(&a, &b, None)?);
    println!("delta explicit {:.12}", space.delta_explicit(&a, &b)?);
    println!("delta via psi  {:.12}", space.delta_via_psi(&a, &b, a.cube.center())?);
    println!("closed form    {:.12}", zygmund_delta(&a, &b, m)?);
    Ok(())
}
