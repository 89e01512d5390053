//! Ranks statements by Ochiai suspiciousness and shows which tests survive
//! filtering.
//!
//!     cargo run --example localize -- corpus/bugs/ledger-f1-1/program.ml corpus/bugs/ledger-f1-1/tests.suite

use minirepair::localization::{collect_coverage, ochiai_suspiciousness, ranking_report, select_candidates};
use minirepair::filtering::filter_positive_tests;
use minirepair::minilang::{parse_program, parse_suite, DEFAULT_STEP_LIMIT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [program, suite] = &args[..] else {
        return Err("usage: localize <program.ml> <tests.suite>".into());
    };
    let program = parse_program(&std::fs::read_to_string(program)?)?;
    let suite = parse_suite(&std::fs::read_to_string(suite)?)?;

    let matrix = collect_coverage(&program, &suite, DEFAULT_STEP_LIMIT)?;
    let ranking = ochiai_suspiciousness(&matrix);
    let candidates = select_candidates(&ranking, 0.1, 40)?;
    print!("{}", ranking_report(&program, &matrix, &candidates));

    let ids: Vec<_> = candidates.iter().map(|c| c.id).collect();
    let partition = filter_positive_tests(&matrix, &ids);
    println!(
        "\n{} negative, {} positive kept, {} dropped",
        partition.negative.len(),
        partition.positive.len(),
        partition.dropped.len()
    );
    Ok(())
}
