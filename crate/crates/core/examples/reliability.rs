//! Five-fold reliability of a mock evaluation: the same panel ranked on
//! disjoint question folds.
//!
//! `cargo run --release --example reliability -- [folds]`

use std::sync::Arc;

use adaem::analysis::{kfold_reliability, Panel};
use adaem::backends::{BackendSpec, PersonaSpec};
use adaem::elicitation::Templates;
use adaem::ranking::{response_table, RankingConfig};
use adaem::values::ValueSystem;

const TOPICS: [&str; 10] =
    ["schools", "hospitals", "employers", "landlords", "banks", "farmers", "courts", "museums", "charities", "airlines"];
const ACTIONS: [&str; 20] = [
    "publish salaries", "ban smartphones", "require volunteering", "open on weekends", "drop fees",
    "share data", "hire by lottery", "reward whistleblowers", "stop advertising", "cut working hours",
    "pay interns", "cap bonuses", "allow pets", "take anonymous complaints", "buy local food",
    "let users set prices", "record meetings", "close on holidays", "refuse cash", "mentor rivals",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let folds: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let system = Arc::new(ValueSystem::schwartz());
    let mut specs = vec![BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0))];
    let models: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
    for (i, m) in models.iter().enumerate() {
        let w: Vec<(&str, f64)> =
            system.dimensions().iter().enumerate().map(|(k, d)| (d.id.as_str(), 0.1 + 0.15 * ((i + k) % 4) as f64)).collect();
        specs.push(BackendSpec::mock(m, PersonaSpec::with_weights(w, i as u64)));
    }
    let panel = Panel { specs, system: system.clone(), templates: Arc::new(Templates::builtin()), judge: "judge".into(), models, points: 3 };

    let questions: Vec<(String, String)> = TOPICS
        .iter()
        .flat_map(|t| ACTIONS.iter().map(move |a| format!("Should {t} {a}?")))
        .enumerate()
        .map(|(i, q)| (format!("q{i:06}"), q))
        .collect();
    let responses = panel.elicitor()?.evaluate(&panel.models, &questions)?;
    let table = response_table(&responses);
    let report = kfold_reliability(&table, folds, 0, &panel.models, &system, &RankingConfig::default())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
