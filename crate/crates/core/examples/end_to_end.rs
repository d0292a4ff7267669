//! The full command pipeline on the bundled mock configuration, driven
//! through the same entry point as the `adaem` binary.
//!
//! `cargo run --release --example end_to_end -- [out_dir]`

use clap::Parser;

use adaem::cli::{execute, Cli};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("adaem-demo").to_string_lossy().into_owned());
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/mock.toml");
    let _ = std::fs::remove_dir_all(&out);
    let steps: [&[&str]; 9] = [
        &["init"],
        &["run"],
        &["export", "--top-n", "15"],
        &["evaluate"],
        &["rank"],
        &["stats"],
        &["reliability", "--folds", "3"],
        &["prime", "--persona", "p0", "--dim", "achievement", "--boost", "0.3"],
        &["report"],
    ];
    for step in steps {
        let argv: Vec<String> = ["adaem", "--config", config, "--out-dir", &out].iter().chain(step).map(|s| s.to_string()).collect();
        let cli = Cli::try_parse_from(&argv)?;
        let value = execute(&cli, &argv)?;
        let shown = serde_json::to_string(&value)?;
        println!("{:<12} {}", step[0], if shown.len() > 100 { format!("{}...", &shown[..100]) } else { shown });
    }
    println!("outputs in {out}");
    Ok(())
}
