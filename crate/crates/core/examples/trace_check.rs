//! Fits a polynomial field to the samples in data/square_trace.json and
//! reports the extension conditions.

use zygjet::cube::dyadic_radii;
use zygjet::whitney::{build_field, check_conditions, lo_seminorm, FitOptions, SampleSet};

fn main() -> anyhow::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/square_trace.json");
    let samples: SampleSet = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let radii = dyadic_radii(&samples.points(), 4);
    let (field, residuals) = build_field(&samples, &radii, FitOptions::default())?;
    let report = check_conditions(Some(&samples), &field, samples.omega())?;
    println!("cubes           {}", field.len());
    println!("max fit misfit  {:.3e}", residuals.iter().copied().fold(0.0, f64::max));
    println!("lambda_hat      {:.6}", report.lambda_hat);
    println!("lambda_total    {:.6}", report.lambda_total);
    println!("LO seminorm     {:.6}", lo_seminorm(&field, samples.omega())?.value);
    if let Some(w) = report.worst_pair {
        println!("worst pair      {} / {} at {:?}", w.first, w.second, w.alpha);
    }
    Ok(())
}
