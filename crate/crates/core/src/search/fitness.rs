//! Patch evaluation: decode, apply, validate, run tests.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;

use crate::genome::{apply_edits, decode, Edit, Patch};
use crate::ingredients::ModificationPoint;
use crate::minilang::{validate_program, Program, TestCase, TestRunner, Verdict};

use super::objectives::Objectives;

/// Evaluation settings independent of the genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessSettings {
    /// Weight of the positive-test failure rate.
    pub w: f64,
    /// Maximum number of edits applied; extra edits at less suspicious
    /// points are dropped.
    pub max_edits: Option<usize>,
    /// Evaluate on a fresh random subset of this many positive tests.
    pub sample_size: Option<usize>,
    /// Suppress edits matched by the decoding rules.
    pub suppression_rules: bool,
    pub step_limit: u64,
}

/// Evaluates patches against a fixed program, point list and test split.
/// Results for identical edit lists are reused when sampling is off; every
/// call still counts as one evaluation.
pub struct Evaluator<'a> {
    program: &'a Program,
    points: &'a [ModificationPoint],
    negative: &'a [TestCase],
    positive: &'a [TestCase],
    settings: FitnessSettings,
    cache: HashMap<Vec<Edit>, Objectives>,
    evaluations: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        program: &'a Program,
        points: &'a [ModificationPoint],
        negative: &'a [TestCase],
        positive: &'a [TestCase],
        settings: FitnessSettings,
    ) -> Self {
        Evaluator {
            program,
            points,
            negative,
            positive,
            settings,
            cache: HashMap::new(),
            evaluations: 0,
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn points(&self) -> &'a [ModificationPoint] {
        self.points
    }

    pub fn program(&self) -> &'a Program {
        self.program
    }

    /// Edits a patch stands for after suppression and the edit cap.
    pub fn edits_of(&self, patch: &Patch) -> Vec<Edit> {
        let mut edits = decode(patch, self.points, self.settings.suppression_rules);
        if let Some(cap) = self.settings.max_edits {
            edits.truncate(cap);
        }
        edits
    }

    pub fn evaluate<R: Rng>(&mut self, patch: &Patch, rng: &mut R) -> (Objectives, Vec<Edit>) {
        let edits = self.edits_of(patch);
        let obj = self.evaluate_edits(&edits, rng);
        (obj, edits)
    }

    pub fn evaluate_edits<R: Rng>(&mut self, edits: &[Edit], rng: &mut R) -> Objectives {
        self.evaluations += 1;
        if edits.is_empty() {
            return Objectives::INVALID;
        }
        let cacheable = self.settings.sample_size.is_none();
        if cacheable {
            if let Some(o) = self.cache.get(edits) {
                return *o;
            }
        }
        let obj = self.compute(edits, rng);
        if cacheable {
            self.cache.insert(edits.to_vec(), obj);
        }
        obj
    }

    fn compute<R: Rng>(&self, edits: &[Edit], rng: &mut R) -> Objectives {
        let patched = apply_edits(self.program, edits);
        if validate_program(&patched).is_err() {
            return Objectives::INVALID;
        }
        let runner = TestRunner::new(&patched, self.settings.step_limit);
        let Some(neg_fail) = failures(&runner, self.negative.iter()) else {
            return Objectives::INVALID;
        };
        let neg_rate = rate(neg_fail, self.negative.len());
        let sampled: Option<Vec<&TestCase>> = match self.settings.sample_size {
            Some(k) if k < self.positive.len() => {
                Some(sample(rng, self.positive.len(), k).into_iter().map(|i| &self.positive[i]).collect())
            }
            _ => None,
        };
        let pos_rate = match &sampled {
            Some(subset) => {
                let Some(f) = failures(&runner, subset.iter().copied()) else {
                    return Objectives::INVALID;
                };
                rate(f, subset.len())
            }
            None => {
                let Some(f) = failures(&runner, self.positive.iter()) else {
                    return Objectives::INVALID;
                };
                rate(f, self.positive.len())
            }
        };
        let mut f2 = neg_rate + self.settings.w * pos_rate;
        if f2 == 0.0 && sampled.is_some() {
            let Some(f) = failures(&runner, self.positive.iter()) else {
                return Objectives::INVALID;
            };
            f2 = self.settings.w * rate(f, self.positive.len());
        }
        Objectives::new(edits.len(), f2)
    }
}

/// Number of failing tests, or `None` if any test hit the step limit.
fn failures<'t>(runner: &TestRunner<'_>, tests: impl Iterator<Item = &'t TestCase>) -> Option<usize> {
    let mut failed = 0;
    for t in tests {
        match runner.verdict(t) {
            Verdict::Pass => {}
            Verdict::StepLimitExceeded => return None,
            Verdict::Fail | Verdict::RuntimeError => failed += 1,
        }
    }
    Some(failed)
}

fn rate(failed: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        failed as f64 / total as f64
    }
}

/// `true` if the patched program validates and passes every test.
pub fn passes_all(program: &Program, edits: &[Edit], suite: &[TestCase], step_limit: u64) -> bool {
    let patched = apply_edits(program, edits);
    if validate_program(&patched).is_err() {
        return false;
    }
    let runner = TestRunner::new(&patched, step_limit);
    suite.iter().all(|t| runner.verdict(t).passed())
}
