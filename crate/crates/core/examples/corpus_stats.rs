//! Self-BLEU, distinct-n and novelty of a question file.
//!
//! `cargo run --example corpus_stats -- [questions.txt]`

use adaem::analysis::{corpus_stats, distinct_n};
use adaem::scoring::Embedder;

const REFERENCE: [&str; 3] = [
    "Should governments ban fossil fuel vehicles?",
    "Is it acceptable to use animals in medical research?",
    "Should social media platforms verify the age of users?",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/seeds.txt").into());
    let text = std::fs::read_to_string(&path)?;
    let corpus: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let stats = corpus_stats(&corpus, &REFERENCE, &Embedder::hashed())?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    for n in 1..=3 {
        println!("distinct-{n} {:.3}", distinct_n(&corpus, n)?);
    }
    Ok(())
}
