//! Seeds bugs into the ledger module and prints what changed and which
//! tests now fail.
//!
//!     cargo run --release --example seed_bugs -- 2 H

use minirepair::minilang::{parse_program, parse_suite};
use minirepair::seeder::{seed_bug, BugClass, SeedSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let class = match args.next().as_deref() {
        None | Some("F") => BugClass::F,
        Some("H") => BugClass::H,
        Some(other) => return Err(format!("unknown class {other}").into()),
    };
    let corpus = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let program = parse_program(&std::fs::read_to_string(corpus.join("ledger.ml"))?)?;
    let suite = parse_suite(&std::fs::read_to_string(corpus.join("ledger.suite"))?)?;

    for seed in 0..3 {
        let spec = SeedSpec {
            k,
            class,
            seed,
            require_rename: class == BugClass::H,
            ..SeedSpec::default()
        };
        let (bug, stats) = seed_bug(&program, &suite, &spec);
        println!("seed {seed}: {} attempts, rejections {:?}", stats.attempts, stats.rejections);
        match bug {
            Ok(bug) => {
                for m in &bug.record.mutations {
                    println!("  {} {:?}: `{}` -> `{}`", m.target, m.operator, m.original, m.mutated);
                }
                println!("  failing: {}", bug.record.failing_tests.join(", "));
            }
            Err(e) => println!("  {e}"),
        }
    }
    Ok(())
}
