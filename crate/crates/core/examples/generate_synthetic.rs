//! Writes a synthetic 84-unit dataset and a matching `config.toml`.
//!
//! ```text
//! cargo run --example generate_synthetic -- data/
//! cargo run --bin epicurve -- all --config data/config.toml
//! ```

use std::path::PathBuf;

use epicurve::synthetic::{example_config, generate, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "synthetic".into()),
    );
    let spec = SyntheticSpec::default();
    let data = generate(&spec)?;
    let (cases, meta) = data.write_to(&dir)?;
    let config = dir.join("config.toml");
    std::fs::write(&config, example_config(&spec))?;
    for p in [cases, meta, config] {
        println!("{}", p.display());
    }
    Ok(())
}
