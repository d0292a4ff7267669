//! Composite informativeness score of one question across four personas.
//!
//! `cargo run --example score_question -- "Is it fair to tax inherited wealth?"`

use std::sync::Arc;

use adaem::backends::{BackendSpec, PersonaSpec, Registry};
use adaem::elicitation::{Elicitor, Templates};
use adaem::scoring::{composite_score, OpinionSimilarity};
use adaem::values::ValueSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let question = std::env::args().nth(1).unwrap_or_else(|| "Is it fair to tax inherited wealth?".into());
    let system = Arc::new(ValueSystem::schwartz());
    let mut specs: Vec<BackendSpec> = [
        ("tradition", "security"),
        ("stimulation", "hedonism"),
        ("power", "achievement"),
        ("universalism", "benevolence"),
    ]
    .iter()
    .enumerate()
    .map(|(i, (a, b))| BackendSpec::mock(&format!("m{i}"), PersonaSpec::with_weights([(*a, 0.5), (*b, 0.5)], i as u64)))
    .collect();
    specs.push(BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0)));
    let registry = Arc::new(Registry::from_specs(&specs, &system)?);
    let elicitor = Elicitor::new(registry, Arc::new(Templates::builtin()), system, "judge");

    let models: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
    let responses = elicitor.evaluate(&models, &[("q000001".into(), question.clone())])?;
    let refs: Vec<_> = responses.iter().collect();
    let s = composite_score(&refs, &elicitor.question_labels(&question)?, &OpinionSimilarity::TokenF1)?;
    println!("{question}");
    println!("R_VC {:.3}  R_VD {:.3}  R_OD {:.3}  R_Dis {:.3}  S {:.3}", s.r_vc, s.r_vd, s.r_od, s.r_dis, s.composite);
    Ok(())
}
