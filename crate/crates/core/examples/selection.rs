//! Optimal selection for data/selection_box.json and the subset experiment.

use zygjet::selection::{best_selection, finiteness_experiment, SelectionInstance};

fn main() -> anyhow::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/selection_box.json");
    let inst: SelectionInstance = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let sel = best_selection(&inst)?;
    println!("lambda* = {:.6}", sel.lambda_star);
    for (node, p) in inst.nodes().iter().zip(&sel.polys) {
        println!("  {:?} r={} -> {:?}", node.cube.center().coords(), node.cube.radius(), p.coefficients());
    }
    match finiteness_experiment(&inst, inst.ell(), 7) {
        Ok(f) => println!("N = {}, gamma_hat = {:.6}", f.subset_size, f.gamma_hat),
        Err(e) => println!("subset experiment skipped: {e}"),
    }
    Ok(())
}
