//! One question answered by two mock personas, parsed and labeled by a
//! lexicon judge.
//!
//! `cargo run --example mock_elicitation -- "Should cities ban cars downtown?"`

use std::sync::Arc;

use adaem::backends::{BackendSpec, PersonaSpec, Registry};
use adaem::elicitation::{Elicitor, Templates};
use adaem::values::ValueSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let question = std::env::args().nth(1).unwrap_or_else(|| "Should cities ban cars downtown?".into());
    let system = Arc::new(ValueSystem::schwartz());
    let specs = [
        BackendSpec::mock("caring", PersonaSpec::with_weights([("benevolence", 0.8), ("universalism", 0.6)], 1)),
        BackendSpec::mock("driven", PersonaSpec::with_weights([("achievement", 0.8), ("power", 0.6)], 2)),
        BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0)),
    ];
    let registry = Arc::new(Registry::from_specs(&specs, &system)?);
    let elicitor = Elicitor::new(registry, Arc::new(Templates::builtin()), system.clone(), "judge");

    println!("question labels: {:?}", elicitor.question_labels(&question)?.ones().map(|k| &system.dimensions()[k].id).collect::<Vec<_>>());
    for model in ["caring", "driven"] {
        let r = elicitor.elicit(model, "q000001", &question)?;
        println!("\n{model}: stance {}", r.stance.as_str());
        for o in &r.opinions {
            let labels: Vec<&str> = o
                .labels
                .iter()
                .flat_map(|v| v.ones())
                .map(|k| system.dimensions()[k].id.as_str())
                .collect();
            println!("  {}. {} {labels:?}", o.index, o.text());
        }
    }
    Ok(())
}
