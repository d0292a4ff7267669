//! Raise one mock persona's weight on a dimension and watch its leaderboard
//! row move.
//!
//! `cargo run --release --example priming -- [dimension] [boost]`

use std::sync::Arc;

use adaem::analysis::{priming_experiment, Panel};
use adaem::backends::{BackendSpec, PersonaSpec};
use adaem::elicitation::Templates;
use adaem::ranking::RankingConfig;
use adaem::values::ValueSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let target = args.next().unwrap_or_else(|| "achievement".into());
    let boost: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.3);

    let system = Arc::new(ValueSystem::schwartz());
    let models: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
    let mut specs = vec![BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0))];
    specs.extend(models.iter().enumerate().map(|(i, m)| BackendSpec::mock(m, PersonaSpec::uniform(0.3, i as u64))));
    let panel = Panel { specs, system, templates: Arc::new(Templates::builtin()), judge: "judge".into(), models, points: 3 };

    let questions: Vec<(String, String)> = (0..120)
        .map(|i| (format!("q{i:06}"), format!("Should town {i} replace its parking lots with parks?")))
        .collect();
    let r = priming_experiment(&panel, &questions, "m0", &target, boost, &RankingConfig::default())?;
    for (dim, d) in &r.deltas {
        println!("{dim:<16} {d:+.2}");
    }
    println!("target {:+.2}  same group {:+.2}  opposing {:+.2}", r.target_delta, r.same_group_delta, r.opposing_group_delta);
    Ok(())
}
