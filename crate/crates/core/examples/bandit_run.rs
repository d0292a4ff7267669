//! Mock-backed question search: five seed topics, five personas, UCB pulls.
//!
//! `cargo run --example bandit_run -- [budget] [seed]`

use std::sync::Arc;

use adaem::backends::{BackendSpec, PersonaSpec, Registry};
use adaem::elicitation::{Elicitor, Templates};
use adaem::optimizer::{parse_seeds, Optimizer, RunConfig};
use adaem::scoring::{Embedder, SimilarityConfig};
use adaem::values::ValueSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let budget: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let system = Arc::new(ValueSystem::schwartz());

    // Each persona holds four of the ten dimensions; any two personas share one.
    let dims: Vec<String> = system.dimensions().iter().map(|d| d.id.clone()).collect();
    let pairs: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
    let mut specs: Vec<BackendSpec> = (0..5)
        .map(|i| {
            let own = pairs.iter().zip(&dims).filter(|((a, b), _)| *a == i || *b == i).map(|(_, d)| (d.as_str(), 0.3));
            BackendSpec::mock(&format!("p{i}"), PersonaSpec::with_weights(own, i as u64))
        })
        .collect();
    specs.push(BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0)));

    let registry = Arc::new(Registry::from_specs(&specs, &system)?);
    let elicitor = Elicitor::new(registry, Arc::new(Templates::builtin()), system, "judge");
    let embedder = Embedder::hashed();
    let cfg = RunConfig {
        budget,
        seed,
        p1: vec!["p0".into(), "p1".into()],
        p2: (0..5).map(|i| format!("p{i}")).collect(),
        judge: "judge".into(),
        ..RunConfig::default()
    };
    let seeds = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/seeds.txt"))?;
    let opt = Optimizer::new(cfg, SimilarityConfig::default(), &elicitor, &embedder);
    let mut state = opt.ingest_seeds(&parse_seeds(&seeds)?)?;
    let summary = opt.run(&mut state, None, None)?;

    for p in &state.trajectory {
        let mean = p.mean_score.map_or("-".into(), |m| format!("{m:.2}"));
        println!("pull {:>3}  arm {}  admitted {}  duplicates {}  mean {mean}", p.step, p.arm, p.admitted.len(), p.duplicates);
    }
    for a in &state.arms {
        println!("{:<8} C={:<3} Q={:.2} questions={}", a.topic_id, a.count, a.mean, a.questions.len());
    }
    println!("created {} questions, {} duplicates", summary.questions_created, summary.duplicates);
    if let Some(best) = state.records().filter(|q| q.score.is_some()).max_by(|a, b| a.composite().partial_cmp(&b.composite()).unwrap()) {
        println!("best: {} ({:.2})", best.text, best.composite().unwrap_or_default());
    }
    Ok(())
}
