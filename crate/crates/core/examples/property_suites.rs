//! Runs two seeded property suites through the same entry point as the CLI.

use zygjet::cli::{execute, Command, Format, RunConfig};

fn main() -> anyhow::Result<()> {
    let config = RunConfig {
        command: Command::Properties { suite: vec!["triangle_rho".into(), "chain_bound".into()] },
        input: None,
        output: None,
        format: Format::Csv,
        seed: 42,
        trials: Some(200),
        tol: None,
    };
    let outcome = execute(&config)?;
    print!("{}", outcome.body);
    println!("all passed: {}", outcome.passed);
    Ok(())
}
