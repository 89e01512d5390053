//! Seeds artificial bugs into a correct program by mutating covered
//! statements, keeping only bugs that localization can see, whose mutations
//! each matter, and that deleting code cannot fix.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{RepairError, Result};
use crate::genome::{apply_edits, Edit, OpKind};
use crate::ingredients::{fits_scope, locate, Location, Screening};
use crate::localization::run_coverage;
use crate::minilang::{
    parse_program, parse_statement, parse_suite, print_program, print_suite, stmt_inline, BinaryOp, Expr, Literal,
    Program, StatementId, Stmt, TestCase, TestRunner, UnaryOp, Verdict,
};
use crate::pipeline::Prepared;
use crate::search::{run_deletion_baseline, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOp {
    ArithmeticSwap,
    RelationalSwap,
    BooleanNegation,
    ConstantPerturbation,
    VariableSubstitution,
}

impl MutationOp {
    pub const ALL: [MutationOp; 5] = [
        MutationOp::ArithmeticSwap,
        MutationOp::RelationalSwap,
        MutationOp::BooleanNegation,
        MutationOp::ConstantPerturbation,
        MutationOp::VariableSubstitution,
    ];
}

/// `F`: every mutated statement has an identical copy elsewhere in its
/// module. `H`: at least one does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BugClass {
    F,
    H,
}

#[derive(Debug, Clone)]
pub struct SeedSpec {
    /// Number of mutated statements.
    pub k: usize,
    pub class: BugClass,
    pub seed: u64,
    pub operators: Vec<MutationOp>,
    /// Restrict mutation to these modules; all modules when empty.
    pub modules: Vec<String>,
    pub max_attempts: usize,
    /// H-class only: require that each non-redundant statement's original
    /// text is reachable with variable renaming but not without.
    pub require_rename: bool,
    /// Localization and search settings used by the admissibility checks.
    pub config: SearchConfig,
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec {
            k: 1,
            class: BugClass::F,
            seed: 0,
            operators: MutationOp::ALL.to_vec(),
            modules: Vec::new(),
            max_attempts: 1000,
            require_rename: false,
            config: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationRecord {
    /// `module:function:ordinal`.
    pub target: String,
    pub operator: MutationOp,
    pub original: String,
    pub mutated: String,
    pub redundant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugRecord {
    pub name: String,
    pub class: BugClass,
    pub k: usize,
    pub seed: u64,
    /// 1-based attempt that produced the bug.
    pub attempt: usize,
    pub mutations: Vec<MutationRecord>,
    pub failing_tests: Vec<String>,
    /// Some original statement is only reachable through variable renaming.
    pub needs_rename: bool,
}

#[derive(Debug, Clone)]
pub struct SeededBug {
    pub program: Program,
    pub suite: Vec<TestCase>,
    pub record: BugRecord,
}

impl SeededBug {
    /// Edits that restore the original statements.
    pub fn ground_truth(&self) -> Result<Vec<Edit>> {
        self.record
            .mutations
            .iter()
            .map(|m| {
                let target = self
                    .program
                    .resolve_id(&m.target)
                    .ok_or_else(|| RepairError::Config(format!("unknown statement {}", m.target)))?;
                Ok(Edit {
                    kind: OpKind::Replace,
                    target,
                    ingredient: Some(parse_statement(&m.original)?),
                })
            })
            .collect()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| RepairError::io(dir, e))?;
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| RepairError::io(&path, e))
        };
        write("program.ml", print_program(&self.program))?;
        write("tests.suite", print_suite(&self.suite))?;
        let json = serde_json::to_string_pretty(&self.record).map_err(|e| RepairError::Config(e.to_string()))?;
        write("bug.json", json + "\n")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| RepairError::io(&path, e))
        };
        let program = parse_program(&read("program.ml")?)?;
        let suite = parse_suite(&read("tests.suite")?)?;
        let record = serde_json::from_str(&read("bug.json")?)
            .map_err(|e| RepairError::Config(format!("{}: {e}", dir.join("bug.json").display())))?;
        Ok(SeededBug { program, suite, record })
    }
}

/// Why a seeding attempt was thrown away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// Not enough eligible statements, or no operator applied.
    NoMutation,
    /// Some test runs into the step limit.
    StepLimit,
    /// A mutated statement is not a localization candidate.
    NotLocalized,
    /// Some non-empty subset of the mutations makes no test fail.
    MaskedMutation,
    /// The deletion baseline finds a test-passing patch.
    DeletionFixable,
    /// An F-class original is not an ingredient at its point.
    OutOfSearchSpace,
    /// An H-class original does not need renaming, or renaming does not
    /// produce it.
    NoRenameNeeded,
}

#[derive(Debug, Clone, Default)]
pub struct SeedStats {
    pub attempts: usize,
    pub rejections: BTreeMap<Rejection, usize>,
}

/// Statements with a structurally identical copy in the same module.
pub fn find_redundant_statements(program: &Program) -> HashSet<StatementId> {
    let mut groups: HashMap<(u32, &Stmt), Vec<StatementId>> = HashMap::new();
    for s in program.statements() {
        groups.entry((s.id.module, s)).or_default().push(s.id);
    }
    groups.into_values().filter(|ids| ids.len() > 1).flatten().collect()
}

const ARITH: [BinaryOp; 5] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Rem];
const REL: [BinaryOp; 6] = [
    BinaryOp::Eq,
    BinaryOp::Ne,
    BinaryOp::Lt,
    BinaryOp::Le,
    BinaryOp::Gt,
    BinaryOp::Ge,
];

fn is_site(op: MutationOp, e: &Expr, location: &Location) -> bool {
    match (op, e) {
        (MutationOp::ArithmeticSwap, Expr::Binary(b, ..)) => b.is_arithmetic(),
        (MutationOp::RelationalSwap, Expr::Binary(b, ..)) => b.is_relational(),
        (MutationOp::BooleanNegation, Expr::Binary(b, ..)) => {
            b.is_relational() || matches!(b, BinaryOp::And | BinaryOp::Or)
        }
        (MutationOp::BooleanNegation, Expr::Unary(UnaryOp::Not, _)) => true,
        (MutationOp::BooleanNegation, Expr::Lit(Literal::Bool(_))) => true,
        (MutationOp::ConstantPerturbation, Expr::Lit(Literal::Int(_) | Literal::Float(_))) => true,
        (MutationOp::VariableSubstitution, Expr::Var(name)) => location
            .scope
            .variable(name)
            .is_some_and(|v| location.scope.variables.iter().any(|o| o.ty == v.ty && o.name != v.name)),
        _ => false,
    }
}

fn pick_other<R: Rng>(set: &[BinaryOp], current: BinaryOp, rng: &mut R) -> BinaryOp {
    let others: Vec<BinaryOp> = set.iter().copied().filter(|&o| o != current).collect();
    *others.choose(rng).expect("operator sets have several members")
}

fn mutate_site<R: Rng>(op: MutationOp, e: &mut Expr, location: &Location, rng: &mut R) {
    match op {
        MutationOp::ArithmeticSwap | MutationOp::RelationalSwap => {
            if let Expr::Binary(b, ..) = e {
                let set: &[BinaryOp] = if op == MutationOp::ArithmeticSwap { &ARITH } else { &REL };
                *b = pick_other(set, *b, rng);
            }
        }
        MutationOp::BooleanNegation => match e {
            Expr::Unary(UnaryOp::Not, inner) => *e = (**inner).clone(),
            Expr::Lit(Literal::Bool(v)) => *v = !*v,
            Expr::Binary(b @ (BinaryOp::And | BinaryOp::Or), ..) if rng.gen_bool(0.5) => {
                *b = if *b == BinaryOp::And { BinaryOp::Or } else { BinaryOp::And };
            }
            _ => *e = Expr::Unary(UnaryOp::Not, Box::new(e.clone())),
        },
        MutationOp::ConstantPerturbation => match e {
            Expr::Lit(Literal::Int(v)) => {
                let choices = [*v + 1, *v - 1, -*v];
                let fresh: Vec<i64> = choices.iter().copied().filter(|c| c != v).collect();
                *v = *fresh.choose(rng).expect("at least two choices differ");
            }
            Expr::Lit(Literal::Float(v)) => {
                let choices = [*v + 1.0, *v - 1.0, -*v];
                let fresh: Vec<f64> = choices.iter().copied().filter(|c| c != v).collect();
                *v = *fresh.choose(rng).expect("at least two choices differ");
            }
            _ => {}
        },
        MutationOp::VariableSubstitution => {
            if let Expr::Var(name) = e {
                if let Some(ty) = location.scope.variable(name).map(|v| v.ty) {
                    let others: Vec<_> = location
                        .scope
                        .variables
                        .iter()
                        .filter(|o| o.ty == ty && o.name != *name)
                        .collect();
                    if let Some(o) = others.choose(rng) {
                        *name = o.name.clone();
                    }
                }
            }
        }
    }
}

/// Applies one random operator at one random site of the statement's own
/// expressions. Returns `None` when no operator from `ops` yields a
/// different statement that still type-checks in place.
pub fn mutate_statement<R: Rng>(stmt: &Stmt, location: &Location, ops: &[MutationOp], rng: &mut R) -> Option<(MutationOp, Stmt)> {
    let mut order = ops.to_vec();
    order.shuffle(rng);
    for op in order {
        let mut sites = 0;
        for e in stmt.own_exprs() {
            e.walk(&mut |x| sites += usize::from(is_site(op, x, location)));
        }
        if sites == 0 {
            continue;
        }
        let pick = rng.gen_range(0..sites);
        let mut out = stmt.clone();
        let mut seen = 0;
        let mut done = false;
        for e in out.own_exprs_mut() {
            walk_sites(e, &mut |x| {
                if done || !is_site(op, x, location) {
                    return false;
                }
                if seen == pick {
                    mutate_site(op, x, location, rng);
                    done = true;
                    return true;
                }
                seen += 1;
                false
            });
        }
        if out != *stmt && fits_scope(&out, location, true) {
            return Some((op, out));
        }
    }
    None
}

/// Pre-order walk that does not descend into a node the callback rewrote.
fn walk_sites(e: &mut Expr, f: &mut dyn FnMut(&mut Expr) -> bool) {
    if f(e) {
        return;
    }
    match e {
        Expr::Lit(_) | Expr::Var(_) => {}
        Expr::Unary(_, inner) => walk_sites(inner, f),
        Expr::Binary(_, l, r) => {
            walk_sites(l, f);
            walk_sites(r, f);
        }
        Expr::Call(_, args) => args.iter_mut().for_each(|a| walk_sites(a, f)),
    }
}

fn replace_edits(targets: &[(StatementId, Stmt)]) -> Vec<Edit> {
    targets
        .iter()
        .map(|(id, s)| Edit {
            kind: OpKind::Replace,
            target: *id,
            ingredient: Some(s.clone()),
        })
        .collect()
}

/// Names of failing tests, or `None` if some test hits the step limit.
fn failing_tests(program: &Program, suite: &[TestCase], step_limit: u64) -> Option<Vec<String>> {
    let runner = TestRunner::new(program, step_limit);
    let mut failed = Vec::new();
    for t in suite {
        match runner.verdict(t) {
            Verdict::Pass => {}
            Verdict::StepLimitExceeded => return None,
            Verdict::Fail | Verdict::RuntimeError => failed.push(t.name.clone()),
        }
    }
    Some(failed)
}

fn has_ingredient(prep: &Prepared, id: StatementId, original: &Stmt) -> bool {
    prep.points.iter().any(|p| {
        p.id() == id && p.operations.contains(&OpKind::Replace) && p.ingredients.iter().any(|i| i.statement == *original)
    })
}

/// One seeding attempt.
pub fn seed_once<R: Rng>(
    program: &Program,
    suite: &[TestCase],
    spec: &SeedSpec,
    eligible: &[StatementId],
    redundant: &HashSet<StatementId>,
    rng: &mut R,
) -> std::result::Result<SeededBug, Rejection> {
    let pool_f: Vec<StatementId> = eligible.iter().copied().filter(|id| redundant.contains(id)).collect();
    let pool_h: Vec<StatementId> = eligible.iter().copied().filter(|id| !redundant.contains(id)).collect();
    let targets: Vec<StatementId> = match spec.class {
        BugClass::F => pool_f.choose_multiple(rng, spec.k).copied().collect(),
        BugClass::H => {
            let Some(&first) = pool_h.choose(rng) else {
                return Err(Rejection::NoMutation);
            };
            let rest: Vec<StatementId> = eligible.iter().copied().filter(|&id| id != first).collect();
            let mut t = vec![first];
            t.extend(rest.choose_multiple(rng, spec.k.saturating_sub(1)).copied());
            t
        }
    };
    if targets.len() != spec.k || spec.k == 0 {
        return Err(Rejection::NoMutation);
    }

    let mut mutations: Vec<(StatementId, Stmt, Stmt, MutationOp)> = Vec::new();
    for &id in &targets {
        let stmt = program.find_statement(id).expect("eligible ids exist");
        let location = locate(program, id).expect("eligible ids exist");
        let Some((op, mutated)) = mutate_statement(stmt, &location, &spec.operators, rng) else {
            return Err(Rejection::NoMutation);
        };
        mutations.push((id, stmt.clone(), mutated, op));
    }
    let all: Vec<(StatementId, Stmt)> = mutations.iter().map(|m| (m.0, m.2.clone())).collect();
    let buggy = apply_edits(program, &replace_edits(&all));
    let step_limit = spec.config.step_limit;
    let Some(failing) = failing_tests(&buggy, suite, step_limit) else {
        return Err(Rejection::StepLimit);
    };
    if failing.is_empty() {
        return Err(Rejection::MaskedMutation);
    }

    // every non-empty proper subset must also be observable
    for mask in 1..(1u32 << spec.k) - 1 {
        let subset: Vec<(StatementId, Stmt)> = (0..spec.k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| all[i].clone())
            .collect();
        let partial = apply_edits(program, &replace_edits(&subset));
        match failing_tests(&partial, suite, step_limit) {
            None => return Err(Rejection::StepLimit),
            Some(f) if f.is_empty() => return Err(Rejection::MaskedMutation),
            Some(_) => {}
        }
    }

    let direct = SearchConfig {
        screening: Screening::Direct,
        ..spec.config.clone()
    };
    let Ok(prep) = Prepared::new(buggy.clone(), suite.to_vec(), &direct) else {
        return Err(Rejection::NotLocalized);
    };
    if !targets.iter().all(|id| prep.candidates.iter().any(|c| c.id == *id)) {
        return Err(Rejection::NotLocalized);
    }
    if run_deletion_baseline(prep.problem(), &direct).success() {
        return Err(Rejection::DeletionFixable);
    }

    let mut needs_rename = false;
    match spec.class {
        BugClass::F => {
            if !mutations.iter().all(|m| has_ingredient(&prep, m.0, &m.1)) {
                return Err(Rejection::OutOfSearchSpace);
            }
        }
        BugClass::H if spec.require_rename => {
            let mut renamed = prep.clone();
            let vars = SearchConfig {
                screening: Screening::TypeMatch { vars: true, funcs: false },
                ..spec.config.clone()
            };
            if renamed.rebuild_points(&vars).is_err() {
                return Err(Rejection::NoRenameNeeded);
            }
            for m in &mutations {
                let reachable_direct = has_ingredient(&prep, m.0, &m.1);
                let reachable_renamed = has_ingredient(&renamed, m.0, &m.1);
                if !reachable_renamed {
                    return Err(Rejection::NoRenameNeeded);
                }
                if !redundant.contains(&m.0) && reachable_direct {
                    return Err(Rejection::NoRenameNeeded);
                }
            }
            needs_rename = true;
        }
        BugClass::H => {}
    }

    let records = mutations
        .iter()
        .map(|(id, original, mutated, op)| MutationRecord {
            target: buggy.describe(*id),
            operator: *op,
            original: stmt_inline(original),
            mutated: stmt_inline(mutated),
            redundant: redundant.contains(id),
        })
        .collect();
    Ok(SeededBug {
        program: buggy,
        suite: suite.to_vec(),
        record: BugRecord {
            name: String::new(),
            class: spec.class,
            k: spec.k,
            seed: spec.seed,
            attempt: 0,
            mutations: records,
            failing_tests: failing,
            needs_rename,
        },
    })
}

/// Retries [`seed_once`] until a bug passes every check or the attempt
/// budget runs out.
pub fn seed_bug(program: &Program, suite: &[TestCase], spec: &SeedSpec) -> (Result<SeededBug>, SeedStats) {
    let mut stats = SeedStats::default();
    let matrix = run_coverage(program, suite, spec.config.step_limit);
    if matrix.total_failing > 0 {
        let msg = "the program to seed must pass its whole suite".to_string();
        return (Err(RepairError::Config(msg)), stats);
    }
    let covered: HashSet<StatementId> = matrix.covered.iter().flatten().copied().collect();
    let modules: Vec<u32> = program
        .modules
        .iter()
        .enumerate()
        .filter(|(_, m)| spec.modules.is_empty() || spec.modules.iter().any(|n| **n == *m.name))
        .map(|(i, _)| i as u32)
        .collect();
    let eligible: Vec<StatementId> = program
        .statements()
        .into_iter()
        .filter(|s| covered.contains(&s.id) && modules.contains(&s.id.module) && !s.own_exprs().is_empty())
        .map(|s| s.id)
        .collect();
    let redundant = find_redundant_statements(program);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for attempt in 1..=spec.max_attempts {
        stats.attempts = attempt;
        match seed_once(program, suite, spec, &eligible, &redundant, &mut rng) {
            Ok(mut bug) => {
                bug.record.attempt = attempt;
                return (Ok(bug), stats);
            }
            Err(r) => *stats.rejections.entry(r).or_default() += 1,
        }
    }
    (
        Err(RepairError::ExhaustedAttempts {
            attempts: spec.max_attempts,
        }),
        stats,
    )
}
