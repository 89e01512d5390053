//! Search over patches: NSGA-II, a single-objective GA, random search and a
//! deletion-only baseline, all sharing one evaluator and archive.

pub mod fitness;
pub mod objectives;
pub mod operators;

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::filtering::TestPartition;
use crate::genome::{Edit, OpKind, Patch};
use crate::ingredients::{IngredientMode, ModificationPoint, PointOptions, Screening};
use crate::localization::SuspiciousStatement;
use crate::minilang::{Expr, Literal, Program, Stmt, StmtKind, ValueType, DEFAULT_STEP_LIMIT};

pub use fitness::{passes_all, Evaluator, FitnessSettings};
pub use objectives::{crowding_distance, dominates, fast_nondominated_sort, Objectives};
pub use operators::{crossover, hux, init_population, mutate, random_patch, single_point, GeneSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Population size N.
    pub population: usize,
    /// Generations G; the evaluation budget is N * G.
    pub generations: usize,
    /// Minimum suspiciousness of a candidate.
    pub threshold: f64,
    /// Maximum number of modification points.
    pub max_points: usize,
    /// Initialization scale.
    pub mu: f64,
    /// Weight of the positive-test failure rate.
    pub w: f64,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `1/n` when unset.
    pub mutation_prob: Option<f64>,
    pub max_edits: Option<usize>,
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub step_limit: u64,
    pub mode: IngredientMode,
    pub screening: Screening,
    pub ingredient_rules: bool,
    pub operation_rules: bool,
    pub suppression_rules: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 40,
            generations: 50,
            threshold: 0.1,
            max_points: 40,
            mu: 0.06,
            w: 0.5,
            crossover_prob: 1.0,
            mutation_prob: None,
            max_edits: None,
            sample_size: None,
            seed: 0,
            step_limit: DEFAULT_STEP_LIMIT,
            mode: IngredientMode::Package,
            screening: Screening::Direct,
            ingredient_rules: true,
            operation_rules: true,
            suppression_rules: true,
        }
    }
}

impl SearchConfig {
    pub fn point_options(&self) -> PointOptions {
        PointOptions {
            mode: self.mode,
            screening: self.screening,
            ingredient_rules: self.ingredient_rules,
            operation_rules: self.operation_rules,
        }
    }

    pub fn fitness_settings(&self) -> FitnessSettings {
        FitnessSettings {
            w: self.w,
            max_edits: self.max_edits,
            sample_size: self.sample_size,
            suppression_rules: self.suppression_rules,
            step_limit: self.step_limit,
        }
    }

    pub fn budget(&self) -> usize {
        self.population * self.generations
    }
}

/// Everything a search needs besides its configuration.
#[derive(Debug, Clone, Copy)]
pub struct SearchProblem<'a> {
    pub program: &'a Program,
    pub points: &'a [ModificationPoint],
    pub partition: &'a TestPartition,
    /// Candidate statements in suspiciousness order (used by the deletion
    /// baseline, which ignores ingredients).
    pub candidates: &'a [SuspiciousStatement],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Lowest failure rate among valid members of the current population.
    pub best_f2: Option<f64>,
    pub archive_size: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchivedPatch {
    pub edits: Vec<Edit>,
    /// One-based evaluation count at which the patch was first seen.
    pub found_at: usize,
}

impl ArchivedPatch {
    pub fn size(&self) -> usize {
        self.edits.len()
    }
}

#[derive(Debug, Clone)]
pub struct RepairResult {
    /// Distinct test-adequate patches that also pass the full original suite.
    pub archive: Vec<ArchivedPatch>,
    /// Patches that passed the search suite but not the full suite.
    pub anomalies: Vec<Vec<Edit>>,
    pub evaluations: usize,
    pub evaluations_to_first: Option<usize>,
    pub wall_seconds: f64,
    pub generations: Vec<GenerationStats>,
}

impl RepairResult {
    pub fn success(&self) -> bool {
        !self.archive.is_empty()
    }

    pub fn smallest_size(&self) -> Option<usize> {
        self.archive.iter().map(ArchivedPatch::size).min()
    }

    /// Archive entries of the smallest size.
    pub fn smallest_patches(&self) -> Vec<&ArchivedPatch> {
        let Some(min) = self.smallest_size() else {
            return Vec::new();
        };
        self.archive.iter().filter(|p| p.size() == min).collect()
    }
}

/// Collects distinct repairs in discovery order.
#[derive(Default)]
struct Archive {
    seen: HashMap<Vec<Edit>, usize>,
    entries: Vec<ArchivedPatch>,
}

impl Archive {
    fn offer(&mut self, obj: &Objectives, edits: &[Edit], evaluation: usize) {
        if obj.is_repair() && !self.seen.contains_key(edits) {
            self.seen.insert(edits.to_vec(), self.entries.len());
            self.entries.push(ArchivedPatch {
                edits: edits.to_vec(),
                found_at: evaluation,
            });
        }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn finish(self, problem: &SearchProblem<'_>, config: &SearchConfig, evaluations: usize, started: Instant, generations: Vec<GenerationStats>) -> RepairResult {
        let full = problem.partition.full_suite();
        let mut archive = Vec::new();
        let mut anomalies = Vec::new();
        for entry in self.entries {
            if passes_all(problem.program, &entry.edits, &full, config.step_limit) {
                archive.push(entry);
            } else {
                anomalies.push(entry.edits);
            }
        }
        let evaluations_to_first = archive.iter().map(|p| p.found_at).min();
        RepairResult {
            archive,
            anomalies,
            evaluations,
            evaluations_to_first,
            wall_seconds: started.elapsed().as_secs_f64(),
            generations,
        }
    }
}

#[derive(Debug, Clone)]
struct Individual {
    patch: Patch,
    obj: Objectives,
}

/// Which population-based search to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nsga2,
    SingleObjective,
    Random,
}

struct Run<'a, 'p> {
    problem: SearchProblem<'p>,
    config: &'a SearchConfig,
    space: GeneSpace,
    evaluator: Evaluator<'p>,
    archive: Archive,
    rng: ChaCha8Rng,
    stats: Vec<GenerationStats>,
    pm: f64,
}

impl<'a, 'p> Run<'a, 'p> {
    fn new(problem: SearchProblem<'p>, config: &'a SearchConfig) -> Self {
        let space = GeneSpace::from_points(problem.points);
        let pm = config
            .mutation_prob
            .unwrap_or(1.0 / problem.points.len().max(1) as f64);
        Run {
            evaluator: Evaluator::new(
                problem.program,
                problem.points,
                &problem.partition.negative,
                &problem.partition.positive,
                config.fitness_settings(),
            ),
            problem,
            config,
            space,
            archive: Archive::default(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            stats: Vec::new(),
            pm,
        }
    }

    fn evaluate_all(&mut self, patches: Vec<Patch>) -> Vec<Individual> {
        patches
            .into_iter()
            .map(|patch| {
                let (obj, edits) = self.evaluator.evaluate(&patch, &mut self.rng);
                self.archive.offer(&obj, &edits, self.evaluator.evaluations());
                Individual { patch, obj }
            })
            .collect()
    }

    fn record(&mut self, generation: usize, pop: &[Individual]) {
        let best_f2 = pop
            .iter()
            .filter(|i| i.obj.valid)
            .map(|i| i.obj.f2)
            .min_by(f64::total_cmp);
        self.stats.push(GenerationStats {
            generation,
            best_f2,
            archive_size: self.archive.len(),
            evaluations: self.evaluator.evaluations(),
        });
    }

    fn offspring(&mut self, pop: &[Individual], better: &dyn Fn(usize, usize) -> Option<bool>) -> Vec<Patch> {
        let n = self.config.population;
        let mut out = Vec::with_capacity(n + 1);
        while out.len() < n {
            let a = self.tournament(pop.len(), better);
            let b = self.tournament(pop.len(), better);
            let (mut c1, mut c2) = if self.rng.gen_bool(self.config.crossover_prob.clamp(0.0, 1.0)) {
                crossover(&pop[a].patch, &pop[b].patch, &self.space, &mut self.rng)
            } else {
                (pop[a].patch.clone(), pop[b].patch.clone())
            };
            mutate(&mut c1, &self.space, self.pm, &mut self.rng);
            mutate(&mut c2, &self.space, self.pm, &mut self.rng);
            out.push(c1);
            out.push(c2);
        }
        out.truncate(n);
        out
    }

    /// Binary tournament; `better(i, j)` is `None` on a tie.
    fn tournament(&mut self, len: usize, better: &dyn Fn(usize, usize) -> Option<bool>) -> usize {
        let i = self.rng.gen_range(0..len);
        let j = self.rng.gen_range(0..len);
        match better(i, j) {
            Some(true) => i,
            Some(false) => j,
            None => {
                if self.rng.gen_bool(0.5) {
                    i
                } else {
                    j
                }
            }
        }
    }

    fn initial(&mut self) -> Vec<Individual> {
        let patches = init_population(self.config.population, &self.space, self.config.mu, &mut self.rng);
        let pop = self.evaluate_all(patches);
        self.record(0, &pop);
        pop
    }

    fn finish(self, started: Instant) -> RepairResult {
        let evaluations = self.evaluator.evaluations();
        self.archive
            .finish(&self.problem, self.config, evaluations, started, self.stats)
    }
}

/// Rank and crowding of each member, from non-dominated sorting.
fn rank_and_crowding(pop: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let objs: Vec<Objectives> = pop.iter().map(|i| i.obj).collect();
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, front) in fast_nondominated_sort(&objs).iter().enumerate() {
        for (k, d) in front.iter().zip(crowding_distance(&objs, front)) {
            rank[*k] = r;
            crowd[*k] = d;
        }
    }
    (rank, crowd)
}

/// Picks `n` members by front, then by descending crowding distance within
/// the last admitted front.
fn environmental_selection(combined: Vec<Individual>, n: usize) -> Vec<Individual> {
    let objs: Vec<Objectives> = combined.iter().map(|i| i.obj).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for front in fast_nondominated_sort(&objs) {
        if chosen.len() + front.len() <= n {
            chosen.extend(&front);
        } else {
            let d = crowding_distance(&objs, &front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
            chosen.extend(order.into_iter().take(n - chosen.len()).map(|k| front[k]));
        }
        if chosen.len() == n {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
    chosen.into_iter().map(|k| slots[k].take().expect("chosen once")).collect()
}

pub fn run_nsga2(problem: SearchProblem<'_>, config: &SearchConfig) -> RepairResult {
    let started = Instant::now();
    let mut run = Run::new(problem, config);
    let mut pop = run.initial();
    for g in 1..config.generations {
        let (rank, crowd) = rank_and_crowding(&pop);
        let better = |i: usize, j: usize| {
            if rank[i] != rank[j] {
                Some(rank[i] < rank[j])
            } else if crowd[i] != crowd[j] {
                Some(crowd[i] > crowd[j])
            } else {
                None
            }
        };
        let children = run.offspring(&pop, &better);
        let children = run.evaluate_all(children);
        pop.extend(children);
        pop = environmental_selection(pop, config.population);
        run.record(g, &pop);
    }
    run.finish(started)
}

/// Canonical GA on the failure rate alone, keeping the best N of parents and
/// offspring.
pub fn run_single_objective(problem: SearchProblem<'_>, config: &SearchConfig) -> RepairResult {
    let started = Instant::now();
    let mut run = Run::new(problem, config);
    let mut pop = run.initial();
    for g in 1..config.generations {
        let fit: Vec<f64> = pop.iter().map(|i| i.obj.fitness()).collect();
        let better = |i: usize, j: usize| {
            if fit[i] == fit[j] {
                None
            } else {
                Some(fit[i] < fit[j])
            }
        };
        let children = run.offspring(&pop, &better);
        let children = run.evaluate_all(children);
        pop.extend(children);
        pop.sort_by(|a, b| a.obj.fitness().total_cmp(&b.obj.fitness()));
        pop.truncate(config.population);
        run.record(g, &pop);
    }
    run.finish(started)
}

/// Independent random patches drawn like an initial population, one batch of
/// N per generation.
pub fn run_random_search(problem: SearchProblem<'_>, config: &SearchConfig) -> RepairResult {
    let started = Instant::now();
    let mut run = Run::new(problem, config);
    run.initial();
    for g in 1..config.generations {
        let patches = init_population(config.population, &run.space, config.mu, &mut run.rng);
        let pop = run.evaluate_all(patches);
        run.record(g, &pop);
    }
    run.finish(started)
}

pub fn run_search(algorithm: Algorithm, problem: SearchProblem<'_>, config: &SearchConfig) -> RepairResult {
    match algorithm {
        Algorithm::Nsga2 => run_nsga2(problem, config),
        Algorithm::SingleObjective => run_single_objective(problem, config),
        Algorithm::Random => run_random_search(problem, config),
    }
}

/// Single-edit variants tried at a statement by the deletion baseline:
/// delete it; if it is an `if`, force its condition to `false`; insert a
/// `return` of the function's zero value before it.
pub fn deletion_variants(program: &Program, target: &Stmt) -> Vec<Edit> {
    let mut out = vec![Edit {
        kind: OpKind::Delete,
        target: target.id,
        ingredient: None,
    }];
    if let StmtKind::If {
        then_body,
        else_body,
        ..
    } = &target.kind
    {
        out.push(Edit {
            kind: OpKind::Replace,
            target: target.id,
            ingredient: Some(Stmt::new(StmtKind::If {
                cond: Expr::Lit(Literal::Bool(false)),
                then_body: then_body.clone(),
                else_body: else_body.clone(),
            })),
        });
    }
    let ret = program.function(target.id).ret;
    let value = match ret {
        ValueType::Void => Some(None),
        ty => Literal::zero_of(ty).map(|l| Some(Expr::Lit(l))),
    };
    if let Some(value) = value {
        out.push(Edit {
            kind: OpKind::Insert,
            target: target.id,
            ingredient: Some(Stmt::new(StmtKind::Return(value))),
        });
    }
    out
}

/// Tries every deletion variant at every candidate, most suspicious first,
/// with no randomness.
pub fn run_deletion_baseline(problem: SearchProblem<'_>, config: &SearchConfig) -> RepairResult {
    let started = Instant::now();
    let mut evaluator = Evaluator::new(
        problem.program,
        problem.points,
        &problem.partition.negative,
        &problem.partition.positive,
        FitnessSettings {
            sample_size: None,
            ..config.fitness_settings()
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut archive = Archive::default();
    for c in problem.candidates {
        let Some(stmt) = problem.program.find_statement(c.id) else {
            continue;
        };
        for edit in deletion_variants(problem.program, stmt) {
            let edits = [edit];
            let obj = evaluator.evaluate_edits(&edits, &mut rng);
            archive.offer(&obj, &edits, evaluator.evaluations());
        }
    }
    let evaluations = evaluator.evaluations();
    let stats = vec![GenerationStats {
        generation: 0,
        best_f2: None,
        archive_size: archive.len(),
        evaluations,
    }];
    archive.finish(&problem, config, evaluations, started, stats)
}

#[cfg(test)]
mod tests;
