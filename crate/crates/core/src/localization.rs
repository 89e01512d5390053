//! Spectrum-based fault localization.
//!
//! The whole suite is executed once with coverage. Each statement gets an
//! Ochiai score `N_CF / sqrt(N_F * (N_CF + N_CS))`, where `N_CF`/`N_CS` count
//! the failing/passing tests that executed it and `N_F` is the number of
//! failing tests. Statements covered by no test score zero.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write;

use rayon::prelude::*;

use crate::error::{RepairError, Result};
use crate::minilang::{Program, StatementId, Stmt, TestCase, TestRunner, Verdict};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    /// Failing tests covering the statement.
    pub failing: u32,
    /// Passing tests covering the statement.
    pub passing: u32,
}

#[derive(Debug, Clone)]
pub struct CoverageMatrix {
    pub tests: Vec<(TestCase, Verdict)>,
    /// Covered statements per test, parallel to `tests`.
    pub covered: Vec<BTreeSet<StatementId>>,
    /// One entry for every statement of the program, covered or not.
    pub tallies: BTreeMap<StatementId, Tally>,
    pub total_failing: u32,
}

impl CoverageMatrix {
    /// Builds the matrix from per-test results. `statements` lists every
    /// statement that should appear in the tallies.
    pub fn from_runs(
        statements: impl IntoIterator<Item = StatementId>,
        runs: Vec<(TestCase, Verdict, BTreeSet<StatementId>)>,
    ) -> Self {
        let mut tallies: BTreeMap<StatementId, Tally> =
            statements.into_iter().map(|s| (s, Tally::default())).collect();
        let mut tests = Vec::with_capacity(runs.len());
        let mut covered = Vec::with_capacity(runs.len());
        let mut total_failing = 0;
        for (test, verdict, cov) in runs {
            let failed = !verdict.passed();
            total_failing += u32::from(failed);
            for id in &cov {
                let t = tallies.entry(*id).or_default();
                if failed {
                    t.failing += 1;
                } else {
                    t.passing += 1;
                }
            }
            tests.push((test, verdict));
            covered.push(cov);
        }
        CoverageMatrix {
            tests,
            covered,
            tallies,
            total_failing,
        }
    }

    pub fn failing_tests(&self) -> impl Iterator<Item = &TestCase> {
        self.tests.iter().filter(|(_, v)| !v.passed()).map(|(t, _)| t)
    }

    pub fn passing_tests(&self) -> impl Iterator<Item = &TestCase> {
        self.tests.iter().filter(|(_, v)| v.passed()).map(|(t, _)| t)
    }
}

/// Runs every test with coverage. Fails with [`RepairError::NoNegativeTest`]
/// when the whole suite passes.
pub fn collect_coverage(program: &Program, suite: &[TestCase], step_limit: u64) -> Result<CoverageMatrix> {
    let matrix = run_coverage(program, suite, step_limit);
    if matrix.total_failing == 0 {
        return Err(RepairError::NoNegativeTest);
    }
    Ok(matrix)
}

/// Runs every test with coverage, whatever the verdicts.
pub fn run_coverage(program: &Program, suite: &[TestCase], step_limit: u64) -> CoverageMatrix {
    let runner = TestRunner::new(program, step_limit);
    let runs: Vec<_> = suite
        .par_iter()
        .map(|t| {
            let out = runner.run(t);
            (t.clone(), out.verdict, out.covered)
        })
        .collect();
    CoverageMatrix::from_runs(program.statements().iter().map(|s| s.id), runs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuspiciousStatement {
    pub id: StatementId,
    pub susp: f64,
}

pub fn ochiai(failing: u32, passing: u32, total_failing: u32) -> f64 {
    if failing == 0 {
        return 0.0;
    }
    f64::from(failing) / (f64::from(total_failing) * f64::from(failing + passing)).sqrt()
}

/// Scores every statement in the matrix, in statement order.
pub fn ochiai_suspiciousness(matrix: &CoverageMatrix) -> Vec<SuspiciousStatement> {
    matrix
        .tallies
        .iter()
        .map(|(&id, t)| SuspiciousStatement {
            id,
            susp: ochiai(t.failing, t.passing, matrix.total_failing),
        })
        .collect()
}

/// Keeps statements scoring at least `threshold`, most suspicious first
/// (ties by ascending id), capped at `max_points`.
pub fn select_candidates(
    ranking: &[SuspiciousStatement],
    threshold: f64,
    max_points: usize,
) -> Result<Vec<SuspiciousStatement>> {
    let mut selected: Vec<SuspiciousStatement> = ranking
        .iter()
        .copied()
        .filter(|s| s.susp >= threshold && s.susp > 0.0)
        .collect();
    if selected.is_empty() {
        return Err(RepairError::EmptyCandidateSet { threshold });
    }
    selected.sort_by(|a, b| b.susp.total_cmp(&a.susp).then(a.id.cmp(&b.id)));
    selected.truncate(max_points.max(1));
    Ok(selected)
}

/// Statements executed by at least one test, deduplicated by structure
/// within each module, in source order.
pub fn collect_seed_statements(matrix: &CoverageMatrix, program: &Program) -> Vec<Stmt> {
    let covered: HashSet<StatementId> = matrix.covered.iter().flatten().copied().collect();
    let mut seen: HashSet<(u32, &Stmt)> = HashSet::new();
    let mut seeds = Vec::new();
    for s in program.statements() {
        if covered.contains(&s.id) && seen.insert((s.id.module, s)) {
            seeds.push(s.clone());
        }
    }
    seeds
}

/// Tab-separated ranking: statement, N_CF, N_CS, suspiciousness.
pub fn ranking_report(program: &Program, matrix: &CoverageMatrix, ranking: &[SuspiciousStatement]) -> String {
    let mut sorted = ranking.to_vec();
    sorted.sort_by(|a, b| b.susp.total_cmp(&a.susp).then(a.id.cmp(&b.id)));
    let mut out = String::from("statement\tN_CF\tN_CS\tsusp\n");
    for s in sorted {
        let t = matrix.tallies.get(&s.id).copied().unwrap_or_default();
        let _ = writeln!(out, "{}\t{}\t{}\t{:.6}", program.describe(s.id), t.failing, t.passing, s.susp);
    }
    out
}
