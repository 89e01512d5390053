//! From a buggy program and its suite to a ready-to-search problem.

use crate::error::Result;
use crate::filtering::{filter_positive_tests, TestPartition};
use crate::ingredients::{build_modification_points, ModificationPoint};
use crate::localization::{
    collect_coverage, collect_seed_statements, ochiai_suspiciousness, select_candidates, CoverageMatrix,
    SuspiciousStatement,
};
use crate::minilang::{validate_program, validate_suite, Program, Stmt, TestCase};
use crate::search::{SearchConfig, SearchProblem};

#[derive(Debug, Clone)]
pub struct Prepared {
    pub program: Program,
    pub suite: Vec<TestCase>,
    pub matrix: CoverageMatrix,
    /// Every statement's score, in statement order.
    pub ranking: Vec<SuspiciousStatement>,
    pub candidates: Vec<SuspiciousStatement>,
    pub partition: TestPartition,
    pub seeds: Vec<Stmt>,
    pub points: Vec<ModificationPoint>,
}

impl Prepared {
    /// Validates the inputs, localizes, filters the suite and builds points.
    pub fn new(program: Program, suite: Vec<TestCase>, config: &SearchConfig) -> Result<Self> {
        validate_program(&program)?;
        validate_suite(&program, &suite)?;
        let matrix = collect_coverage(&program, &suite, config.step_limit)?;
        let ranking = ochiai_suspiciousness(&matrix);
        let candidates = select_candidates(&ranking, config.threshold, config.max_points)?;
        let ids: Vec<_> = candidates.iter().map(|c| c.id).collect();
        let partition = filter_positive_tests(&matrix, &ids);
        let seeds = collect_seed_statements(&matrix, &program);
        let points = build_modification_points(&program, &candidates, &seeds, &config.point_options())?;
        Ok(Prepared {
            program,
            suite,
            matrix,
            ranking,
            candidates,
            partition,
            seeds,
            points,
        })
    }

    /// Rebuilds the points for different screening or rule settings,
    /// reusing localization.
    pub fn rebuild_points(&mut self, config: &SearchConfig) -> Result<()> {
        self.points = build_modification_points(&self.program, &self.candidates, &self.seeds, &config.point_options())?;
        Ok(())
    }

    pub fn problem(&self) -> SearchProblem<'_> {
        SearchProblem {
            program: &self.program,
            points: &self.points,
            partition: &self.partition,
            candidates: &self.candidates,
        }
    }
}
