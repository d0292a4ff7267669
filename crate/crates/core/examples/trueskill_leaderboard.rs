//! Value-dimension matches between three hand-written response profiles,
//! rated with TrueSkill and reported as win rates.
//!
//! `cargo run --example trueskill_leaderboard`

use std::collections::BTreeMap;

use adaem::ranking::{leaderboard_csv, process_run, RankingConfig, ResponseTable};
use adaem::values::{ValueSystem, ValueVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = ValueSystem::schwartz();
    let profiles = [
        ("alpha", &["benevolence", "universalism"][..]),
        ("beta", &["power", "achievement", "benevolence"][..]),
        ("gamma", &["tradition"][..]),
    ];
    let models: Vec<String> = profiles.iter().map(|(m, _)| m.to_string()).collect();
    // Each model expresses its profile on most questions, dropping one
    // dimension in rotation.
    let mut table = ResponseTable::new();
    for q in 0..30 {
        let mut row = BTreeMap::new();
        for (m, dims) in &profiles {
            let kept: Vec<&str> = dims.iter().enumerate().filter(|(i, _)| (q + i) % 4 != 0).map(|(_, d)| *d).collect();
            row.insert(m.to_string(), ValueVector::from_dims(&system, &kept)?);
        }
        table.insert(format!("q{q:06}"), row);
    }
    let out = process_run(&table, &models, &system, &RankingConfig::default(), None, None)?;
    print!("{}", leaderboard_csv(&out)?);
    Ok(())
}
