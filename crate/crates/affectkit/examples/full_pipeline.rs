//! The whole thing through the CLI entry point: synthesize, ingest, window,
//! extract features, train, and evaluate, with artifacts on disk.
//!
//! Run with: `cargo run --release --example full_pipeline`

use affectkit::cli::{Cli, Command};

fn main() -> affectkit::Result<()> {
    let out_dir = std::env::temp_dir().join("affectkit-example-pipeline");
    let cli = Cli {
        config: None,
        seed: Some(7),
        jobs: None,
        out_dir: out_dir.clone(),
        command: Command::Pipeline { data_dir: None },
    };
    affectkit::cli::run(cli)?;

    println!("\nartifacts in {}:", out_dir.display());
    for name in ["effective_config.toml", "features.csv", "model.json", "report.json", "metrics.csv"] {
        let size = std::fs::metadata(out_dir.join(name)).map(|m| m.len()).unwrap_or(0);
        println!("  {name} ({size} bytes)");
    }
    Ok(())
}
