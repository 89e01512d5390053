//! Repairs a bug bundle with the multi-objective search and prints the
//! smallest patches it found.
//!
//!     cargo run --release --example repair -- corpus/bugs/ledger-f1-2 3

use std::path::PathBuf;

use minirepair::genome::edit_script;
use minirepair::pipeline::Prepared;
use minirepair::search::{run_nsga2, SearchConfig};
use minirepair::seeder::SeededBug;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir: PathBuf = args.next().ok_or("usage: repair <bug-dir> [seed]")?.into();
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let bug = SeededBug::load(&dir)?;
    let config = SearchConfig { seed, ..SearchConfig::default() };
    let prep = Prepared::new(bug.program, bug.suite, &config)?;
    println!(
        "{} points, {} negative / {} positive tests ({} dropped)",
        prep.points.len(),
        prep.partition.negative.len(),
        prep.partition.positive.len(),
        prep.partition.dropped.len()
    );

    let result = run_nsga2(prep.problem(), &config);
    for g in result.generations.iter().step_by(10) {
        let best = g.best_f2.map_or("-".to_string(), |f| format!("{f:.4}"));
        println!("generation {:>2}: best f2 {best}, archive {}", g.generation, g.archive_size);
    }
    let Some(size) = result.smallest_size() else {
        println!("no repair in {} evaluations", result.evaluations);
        return Ok(());
    };
    println!(
        "{} patches; first after {} evaluations; smallest size {size}",
        result.archive.len(),
        result.evaluations_to_first.unwrap_or_default()
    );
    for p in result.smallest_patches() {
        println!("--\n{}", edit_script(&prep.program, &p.edits).trim_end());
    }
    Ok(())
}
