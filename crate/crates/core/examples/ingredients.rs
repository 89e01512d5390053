//! Prints the modification points of a bug with their admissible operation
//! types and direct ingredients.
//!
//!     cargo run --example ingredients -- corpus/bugs/ledger-f1-1

use std::path::PathBuf;

use minirepair::ingredients::points_report;
use minirepair::minilang::stmt_inline;
use minirepair::pipeline::Prepared;
use minirepair::search::SearchConfig;
use minirepair::seeder::SeededBug;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args().nth(1).ok_or("usage: ingredients <bug-dir>")?.into();
    let bug = SeededBug::load(&dir)?;
    let prep = Prepared::new(bug.program, bug.suite, &SearchConfig::default())?;
    print!("{}", points_report(&prep.program, &prep.points));
    if let Some(top) = prep.points.first() {
        println!("\ningredients for {}:", prep.program.describe(top.id()));
        for i in &top.ingredients {
            println!("  {}", stmt_inline(&i.statement));
        }
    }
    Ok(())
}
