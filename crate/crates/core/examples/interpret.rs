//! Runs a test suite against a program and prints one verdict per test.
//!
//!     cargo run --example interpret -- corpus/ledger.ml corpus/ledger.suite
//!
//! With `--actual`, prints the suite back with every expectation replaced by
//! the value the program actually produced.

use std::process::ExitCode;

use minirepair::minilang::{parse_program, parse_suite, validate_program, TestRunner, Verdict, DEFAULT_STEP_LIMIT};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let actual = args.iter().any(|a| a == "--actual");
    let paths: Vec<&String> = args.iter().filter(|a| !a.starts_with("--")).collect();
    let [program_path, suite_path] = paths[..] else {
        eprintln!("usage: interpret [--actual] <program.ml> <tests.suite>");
        return ExitCode::from(2);
    };
    let read = |p: &str| std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{p}: {e}"));
    let program = match parse_program(&read(program_path)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{program_path}: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = validate_program(&program) {
        eprintln!("{program_path}: {e}");
        return ExitCode::from(2);
    }
    let suite = match parse_suite(&read(suite_path)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{suite_path}: {e}");
            return ExitCode::from(2);
        }
    };

    let runner = TestRunner::new(&program, DEFAULT_STEP_LIMIT);
    let mut failed = 0;
    for test in &suite {
        let outcome = runner.run(test);
        if actual {
            let call = test.to_line();
            let head = call.rsplit_once(" == ").map_or(call.as_str(), |(h, _)| h);
            let value = match outcome.verdict {
                Verdict::RuntimeError => "!error".to_string(),
                _ if test.expect == minirepair::minilang::Expectation::Error && outcome.verdict == Verdict::Pass => {
                    "!error".to_string()
                }
                _ => outcome.detail.clone(),
            };
            println!("{head} == {value}");
            continue;
        }
        if !outcome.verdict.passed() {
            failed += 1;
        }
        println!(
            "{:<5} {:<24} {:>4} steps  {}",
            format!("{:?}", outcome.verdict).to_lowercase(),
            test.name,
            outcome.steps_used,
            outcome.detail
        );
    }
    if !actual {
        println!("{} of {} tests pass", suite.len() - failed, suite.len());
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
