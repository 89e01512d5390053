//! Drops positive tests that never execute a candidate statement. Such a
//! test cannot observe any edit made at a candidate location, so removing
//! it leaves the relative fitness of any two validating patches unchanged.

use std::collections::HashSet;

use crate::localization::CoverageMatrix;
use crate::minilang::{StatementId, TestCase};

#[derive(Debug, Clone, Default)]
pub struct TestPartition {
    /// Initially failing tests; never filtered.
    pub negative: Vec<TestCase>,
    /// Positive tests that reach at least one candidate.
    pub positive: Vec<TestCase>,
    /// Positive tests reaching no candidate.
    pub dropped: Vec<TestCase>,
}

impl TestPartition {
    pub fn original_size(&self) -> usize {
        self.negative.len() + self.positive.len() + self.dropped.len()
    }

    pub fn reduced_size(&self) -> usize {
        self.negative.len() + self.positive.len()
    }

    /// Every test: negatives, then retained positives, then dropped ones.
    pub fn full_suite(&self) -> Vec<TestCase> {
        self.negative
            .iter()
            .chain(&self.positive)
            .chain(&self.dropped)
            .cloned()
            .collect()
    }
}

pub fn filter_positive_tests(matrix: &CoverageMatrix, candidates: &[StatementId]) -> TestPartition {
    let wanted: HashSet<StatementId> = candidates.iter().copied().collect();
    let mut partition = TestPartition::default();
    for ((test, verdict), covered) in matrix.tests.iter().zip(&matrix.covered) {
        if !verdict.passed() {
            partition.negative.push(test.clone());
        } else if covered.iter().any(|id| wanted.contains(id)) {
            partition.positive.push(test.clone());
        } else {
            partition.dropped.push(test.clone());
        }
    }
    partition
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::{parse_suite, Verdict};
    use std::collections::BTreeSet;

    fn id(n: u32) -> StatementId {
        StatementId::new(0, 0, n)
    }

    fn run(name: &str, pass: bool, cov: &[u32]) -> (TestCase, Verdict, BTreeSet<StatementId>) {
        let t = parse_suite(&format!("test {name}: f() == 0")).unwrap().remove(0);
        let v = if pass { Verdict::Pass } else { Verdict::Fail };
        (t, v, cov.iter().map(|&n| id(n)).collect())
    }

    #[test]
    fn drops_only_positive_tests_missing_every_candidate() {
        let m = CoverageMatrix::from_runs(
            (0..6).map(id),
            vec![
                run("neg", false, &[4]),
                run("outside", true, &[4, 5]),
                run("touches", true, &[1, 5]),
            ],
        );
        let p = filter_positive_tests(&m, &[id(1), id(2)]);
        assert_eq!(p.negative.len(), 1);
        assert_eq!(p.negative[0].name, "neg");
        assert_eq!(p.positive.iter().map(|t| &t.name[..]).collect::<Vec<_>>(), ["touches"]);
        assert_eq!(p.dropped.iter().map(|t| &t.name[..]).collect::<Vec<_>>(), ["outside"]);
        assert_eq!((p.original_size(), p.reduced_size()), (3, 2));
    }

    #[test]
    fn twenty_positive_tests_thirteen_dropped() {
        let mut runs = vec![run("neg", false, &[0, 1])];
        for i in 0..20 {
            // tests 0..7 reach candidate 1 or 2; the rest only touch 3..5
            let cov: &[u32] = if i < 7 { if i % 2 == 0 { &[1, 3] } else { &[2] } } else { &[3, 4, 5] };
            runs.push(run(&format!("p{i}"), true, cov));
        }
        let m = CoverageMatrix::from_runs((0..6).map(id), runs);
        let p = filter_positive_tests(&m, &[id(1), id(2)]);
        assert_eq!(p.positive.len(), 7);
        assert_eq!(p.dropped.len(), 13);
        assert_eq!(p.negative.len(), 1);
    }
}
