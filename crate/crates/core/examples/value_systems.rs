//! Built-in value systems, their groups and oppositions, and vector algebra.
//!
//! `cargo run --example value_systems -- [schwartz-10|mft-5|path.toml]`

use adaem::values::{l1_distance, or_aggregate, ValueSystem, ValueVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "schwartz-10".into());
    let system = ValueSystem::load(&name)?;
    println!("{} ({} dimensions)", system.name(), system.len());
    for d in system.dimensions() {
        let (same, opposing) = system.related_dims(&d.id)?;
        println!("  {:<16} group {:<20} same {:?} opposing {:?}", d.id, d.group, same, opposing);
    }

    let dims: Vec<&str> = system.dimensions().iter().map(|d| d.id.as_str()).collect();
    let a = ValueVector::from_dims(&system, &dims[..2])?;
    let b = ValueVector::from_dims(&system, &dims[1..3])?;
    let both = or_aggregate([&a, &b])?;
    println!("a ∪ b has {} dims, |a ∩ b| = {}, L1(a, b) = {}", both.count(), a.intersection_count(&b), l1_distance(&a, &b)?);
    Ok(())
}
