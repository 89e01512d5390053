//! Compares the ingredients of each modification point under direct
//! screening and under screening with variable renaming.
//!
//!     cargo run --example type_matching -- corpus/bugs/ledger-h2-1

use std::path::PathBuf;

use minirepair::ingredients::Screening;
use minirepair::minilang::stmt_inline;
use minirepair::pipeline::Prepared;
use minirepair::search::SearchConfig;
use minirepair::seeder::SeededBug;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args().nth(1).ok_or("usage: type_matching <bug-dir>")?.into();
    let bug = SeededBug::load(&dir)?;
    let direct = SearchConfig::default();
    let vars = SearchConfig {
        screening: Screening::TypeMatch { vars: true, funcs: false },
        ..direct.clone()
    };
    let mut prep = Prepared::new(bug.program.clone(), bug.suite.clone(), &direct)?;
    let plain: Vec<usize> = prep.points.iter().map(|p| p.ingredients.len()).collect();
    prep.rebuild_points(&vars)?;

    for (point, before) in prep.points.iter().zip(plain) {
        let renamed: Vec<_> = point.ingredients.iter().filter(|i| !i.substitution.is_empty()).collect();
        println!(
            "{}  {} direct, {} with renaming",
            prep.program.describe(point.id()),
            before,
            point.ingredients.len()
        );
        for i in renamed.iter().take(3) {
            let map: Vec<String> = i.substitution.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            println!("    {}  [{}]", stmt_inline(&i.statement), map.join(", "));
        }
    }

    // the statements the seeder changed, and whether their originals are reachable
    for m in &bug.record.mutations {
        let id = prep.program.resolve_id(&m.target).ok_or("unknown target")?;
        let found = prep
            .points
            .iter()
            .filter(|p| p.id() == id)
            .flat_map(|p| &p.ingredients)
            .any(|i| stmt_inline(&i.statement) == m.original);
        println!("{}: original `{}` reachable: {found}", m.target, m.original);
    }
    Ok(())
}
