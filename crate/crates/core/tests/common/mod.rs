//! Corpus access and independent reference implementations shared by the
//! integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use minirepair::genome::{Edit, OpKind, Patch};
use minirepair::ingredients::ModificationPoint;
use minirepair::minilang::{
    parse_program, parse_suite, FunctionDef, Program, Stmt, StmtKind, TestCase, ValueType,
};
use minirepair::search::Objectives;
use minirepair::seeder::{BugClass, SeededBug};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Every checked-in bug bundle, sorted by name.
pub fn corpus_bugs() -> Vec<(PathBuf, SeededBug)> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(corpus_dir().join("bugs"))
        .expect("corpus/bugs exists")
        .map(|e| e.expect("readable entry").path())
        .filter(|p| p.join("bug.json").is_file())
        .collect();
    dirs.sort();
    dirs.into_iter()
        .map(|d| {
            let bug = SeededBug::load(&d).expect("bundle loads");
            (d, bug)
        })
        .collect()
}

pub fn bugs_where(pred: impl Fn(&SeededBug) -> bool) -> Vec<(PathBuf, SeededBug)> {
    corpus_bugs().into_iter().filter(|(_, b)| pred(b)).collect()
}

pub fn f_class(k: &[usize]) -> Vec<(PathBuf, SeededBug)> {
    bugs_where(|b| b.record.class == BugClass::F && k.contains(&b.record.k))
}

pub fn h_rename(k: usize) -> Vec<(PathBuf, SeededBug)> {
    bugs_where(|b| b.record.class == BugClass::H && b.record.k == k && b.record.needs_rename)
}

pub fn load_pair(program: &Path, suite: &Path) -> (Program, Vec<TestCase>) {
    let p = parse_program(&std::fs::read_to_string(program).unwrap()).unwrap();
    let s = parse_suite(&std::fs::read_to_string(suite).unwrap()).unwrap();
    (p, s)
}

/// Ochiai from raw counts; zero when nothing failing covers the statement.
pub fn ochiai_by_hand(ncf: usize, ncs: usize, nf: usize) -> f64 {
    if ncf == 0 {
        return 0.0;
    }
    ncf as f64 / ((nf * (ncf + ncs)) as f64).sqrt()
}

/// Pareto dominance over `(f1, f2)`, treating invalid as `(inf, inf)`.
pub fn dominates_by_hand(a: &Objectives, b: &Objectives) -> bool {
    let va = if a.valid { (a.f1 as f64, a.f2) } else { (f64::INFINITY, f64::INFINITY) };
    let vb = if b.valid { (b.f1 as f64, b.f2) } else { (f64::INFINITY, f64::INFINITY) };
    va.0 <= vb.0 && va.1 <= vb.1 && (va.0 < vb.0 || va.1 < vb.1)
}

/// Peels off non-dominated layers one at a time. Each layer is sorted.
pub fn brute_force_levels(pop: &[Objectives]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..pop.len()).collect();
    let mut levels = Vec::new();
    while !left.is_empty() {
        let layer: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates_by_hand(&pop[j], &pop[i])))
            .collect();
        left.retain(|i| !layer.contains(i));
        levels.push(layer);
    }
    levels
}

fn function_of<'p>(program: &'p Program, stmt: &Stmt) -> &'p FunctionDef {
    &program.modules[stmt.id.module as usize].functions[stmt.id.function as usize]
}

/// Whether a block ends every path in a `return`.
fn always_returns(body: &[Stmt]) -> bool {
    match body.last().map(|s| &s.kind) {
        Some(StmtKind::Return(_)) => true,
        Some(StmtKind::If {
            then_body,
            else_body: Some(else_body),
            ..
        }) => always_returns(then_body) && always_returns(else_body),
        Some(StmtKind::Block(inner)) => always_returns(inner),
        _ => false,
    }
}

/// The statement ends the body of a value-returning function, possibly
/// through a trailing if/else or block.
fn ends_function(program: &Program, stmt: &Stmt) -> bool {
    fn on_tail(body: &[Stmt], target: &Stmt) -> bool {
        let Some(last) = body.last() else { return false };
        if last.id == target.id {
            return true;
        }
        match &last.kind {
            StmtKind::If {
                then_body,
                else_body: Some(else_body),
                ..
            } => on_tail(then_body, target) || on_tail(else_body, target),
            StmtKind::Block(inner) => on_tail(inner, target),
            _ => false,
        }
    }
    let f = function_of(program, stmt);
    f.ret != ValueType::Void && on_tail(&f.body, stmt)
}

fn assigned(s: &Stmt) -> Option<&str> {
    match &s.kind {
        StmtKind::Assign { target, .. } => Some(target.as_ref()),
        _ => None,
    }
}

fn is_decl(s: &Stmt) -> bool {
    matches!(s.kind, StmtKind::VarDecl { .. })
}

/// A step-by-step transcription of the decoding procedure: walk the points
/// in order, skip disabled ones, look up the operation and ingredient, and
/// drop the edit if one of the six disabling checks fires.
pub fn decode_by_hand(program: &Program, patch: &Patch, points: &[ModificationPoint], rules: bool) -> Vec<Edit> {
    let mut out = Vec::new();
    for j in 0..points.len() {
        if !patch.b[j] {
            continue;
        }
        let target = &points[j].statement;
        let op = points[j].operations[patch.u[j]];
        if op == OpKind::Delete {
            out.push(Edit {
                kind: op,
                target: target.id,
                ingredient: None,
            });
            continue;
        }
        let ing = &points[j].ingredients[patch.v[j]].statement;
        if rules {
            let same_text = minirepair::minilang::print_stmt(ing) == minirepair::minilang::print_stmt(target);
            let disabled = match op {
                OpKind::Replace => {
                    same_text
                        || (is_decl(target) && !is_decl(ing))
                        || (ends_function(program, target) && !always_returns(std::slice::from_ref(ing)))
                }
                OpKind::Insert => {
                    (is_decl(ing) && is_decl(target))
                        || matches!(ing.kind, StmtKind::Return(_))
                        || (assigned(ing).is_some() && assigned(ing) == assigned(target))
                }
                OpKind::Delete => false,
            };
            if disabled {
                continue;
            }
        }
        out.push(Edit {
            kind: op,
            target: target.id,
            ingredient: Some(ing.clone()),
        });
    }
    out
}

/// `a < b` for `x = n/neg + (1/2) p/pos`, compared exactly.
pub fn exact_order(a: (usize, usize), b: (usize, usize), neg: usize, pos: usize) -> std::cmp::Ordering {
    // scale by 2 * neg * pos
    let value = |(n, p): (usize, usize)| {
        let pos = pos.max(1) as i128;
        2 * n as i128 * pos + p as i128 * neg as i128
    };
    value(a).cmp(&value(b))
}
