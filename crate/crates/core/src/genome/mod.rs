//! The three-part patch genome, decoding to edits, and edit application.
//!
//! A patch over `n` modification points holds a bit vector `b` (which points
//! are edited), `u` (index into each point's operation list) and `v` (index
//! into each point's ingredient list). Indices are zero-based here.

pub mod ops;

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use similar::TextDiff;

use crate::error::{RepairError, Result};
use crate::ingredients::ModificationPoint;
use crate::minilang::validate::definitely_returns;
use crate::minilang::{parse_statement, print_program, stmt_inline, Program, StatementId, Stmt, StmtKind};

pub use ops::{customize_operation_types, OpKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Patch {
    pub b: Vec<bool>,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

impl Patch {
    pub fn empty(n: usize) -> Self {
        Patch {
            b: vec![false; n],
            u: vec![0; n],
            v: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Raw count of enabled points.
    pub fn size(&self) -> usize {
        self.b.iter().filter(|&&x| x).count()
    }

    /// `true` if all genes are within their point's ranges. Genes of points
    /// without ingredients are not checked.
    pub fn in_bounds(&self, points: &[ModificationPoint]) -> bool {
        self.b.len() == points.len()
            && self.u.len() == points.len()
            && self.v.len() == points.len()
            && points.iter().enumerate().all(|(j, p)| {
                self.u[j] < p.operations.len() && (p.ingredients.is_empty() || self.v[j] < p.ingredients.len())
            })
    }
}

/// A single statement-level edit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edit {
    pub kind: OpKind,
    pub target: StatementId,
    /// Absent for deletions.
    pub ingredient: Option<Stmt>,
}

/// Which suppression rule, if any, voids an edit. Rules are numbered 1..=6:
/// replacing with an identical statement; replacing a declaration with a
/// non-declaration; inserting a declaration before a declaration; inserting
/// a `return`; replacing a statement the function's value return depends on
/// with one that does not return; inserting an assignment before an
/// assignment to the same variable.
pub fn suppression_rule(kind: OpKind, point: &ModificationPoint, ingredient: Option<&Stmt>) -> Option<u8> {
    let target = &point.statement;
    let ing = ingredient?;
    let is_decl = |s: &Stmt| matches!(s.kind, StmtKind::VarDecl { .. });
    match kind {
        OpKind::Delete => None,
        OpKind::Replace => {
            if ing == target {
                Some(1)
            } else if is_decl(target) && !is_decl(ing) {
                Some(2)
            } else if point.location.return_critical && !definitely_returns(std::slice::from_ref(ing)) {
                Some(5)
            } else {
                None
            }
        }
        OpKind::Insert => match (&ing.kind, &target.kind) {
            (StmtKind::VarDecl { .. }, StmtKind::VarDecl { .. }) => Some(3),
            (StmtKind::Return(_), _) => Some(4),
            (StmtKind::Assign { target: a, .. }, StmtKind::Assign { target: b, .. }) if a == b => Some(6),
            _ => None,
        },
    }
}

/// The edit point `j` would contribute if enabled, before suppression.
pub fn selected_edit(patch: &Patch, points: &[ModificationPoint], j: usize) -> Edit {
    let p = &points[j];
    let kind = p.operations[patch.u[j].min(p.operations.len() - 1)];
    let ingredient = match kind {
        OpKind::Delete => None,
        _ => Some(p.ingredients[patch.v[j].min(p.ingredients.len() - 1)].statement.clone()),
    };
    Edit {
        kind,
        target: p.id(),
        ingredient,
    }
}

/// Points whose edit survives decoding: enabled, and not suppressed when
/// `rules` is set.
pub fn effective_bits(patch: &Patch, points: &[ModificationPoint], rules: bool) -> Vec<bool> {
    (0..points.len())
        .map(|j| {
            patch.b[j] && {
                let e = selected_edit(patch, points, j);
                !rules || suppression_rule(e.kind, &points[j], e.ingredient.as_ref()).is_none()
            }
        })
        .collect()
}

/// Edits of a patch in point order.
pub fn decode(patch: &Patch, points: &[ModificationPoint], rules: bool) -> Vec<Edit> {
    let mut edits = Vec::new();
    for j in 0..points.len() {
        if !patch.b[j] {
            continue;
        }
        let e = selected_edit(patch, points, j);
        if rules && suppression_rule(e.kind, &points[j], e.ingredient.as_ref()).is_some() {
            continue;
        }
        edits.push(e);
    }
    edits
}

/// Applies edits addressed by original statement ids. The result does not
/// depend on the order of `edits`; statement ids are reassigned afterwards.
pub fn apply_edits(program: &Program, edits: &[Edit]) -> Program {
    let by_target: HashMap<StatementId, &Edit> = edits.iter().map(|e| (e.target, e)).collect();
    let mut out = program.clone();
    if by_target.is_empty() {
        return out;
    }
    for (mi, module) in out.modules.iter_mut().enumerate() {
        for (fi, func) in module.functions.iter_mut().enumerate() {
            let touched = by_target
                .keys()
                .any(|id| id.module as usize == mi && id.function as usize == fi);
            if touched {
                func.body = rebuild(std::mem::take(&mut func.body), &by_target);
            }
        }
    }
    out.renumber();
    out
}

fn rebuild(body: Vec<Stmt>, edits: &HashMap<StatementId, &Edit>) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(body.len() + 1);
    for mut s in body {
        let edit = edits.get(&s.id).copied();
        for b in s.child_blocks_mut() {
            *b = rebuild(std::mem::take(b), edits);
        }
        match edit {
            None => out.push(s),
            Some(e) => match e.kind {
                OpKind::Delete => {}
                OpKind::Replace => out.push(e.ingredient.clone().expect("replace carries an ingredient")),
                OpKind::Insert => {
                    out.push(e.ingredient.clone().expect("insert carries an ingredient"));
                    out.push(s);
                }
            },
        }
    }
    out
}

/// One line per edit: `D <stmt>`, `R <stmt> <text>` or `I <stmt> <text>`,
/// with statements written as `module:function:ordinal`.
pub fn edit_script(program: &Program, edits: &[Edit]) -> String {
    let mut out = String::new();
    for e in edits {
        let _ = write!(out, "{} {}", e.kind.letter(), program.describe(e.target));
        if let Some(ing) = &e.ingredient {
            let _ = write!(out, " {}", stmt_inline(ing));
        }
        out.push('\n');
    }
    out
}

pub fn parse_edit_script(program: &Program, text: &str) -> Result<Vec<Edit>> {
    let mut edits = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| RepairError::Config(format!("edit script line {}: {msg}", n + 1));
        let mut parts = line.splitn(3, ' ');
        let kind = parts
            .next()
            .and_then(|k| k.chars().next().filter(|_| k.len() == 1))
            .and_then(OpKind::from_letter)
            .ok_or_else(|| bad("expected D, R or I"))?;
        let target = parts
            .next()
            .and_then(|t| program.resolve_id(t))
            .ok_or_else(|| bad("unknown statement"))?;
        let ingredient = match (kind, parts.next()) {
            (OpKind::Delete, None) => None,
            (OpKind::Delete, Some(_)) => return Err(bad("deletion takes no statement")),
            (_, Some(text)) => Some(parse_statement(text).map_err(|e| bad(&e.message))?),
            (_, None) => return Err(bad("missing statement")),
        };
        edits.push(Edit {
            kind,
            target,
            ingredient,
        });
    }
    Ok(edits)
}

/// Unified diff of the canonical texts of two programs.
pub fn unified_diff(original: &Program, patched: &Program) -> String {
    let a = print_program(original);
    let b = print_program(patched);
    TextDiff::from_lines(&a, &b)
        .unified_diff()
        .context_radius(3)
        .header("original.ml", "patched.ml")
        .to_string()
}

#[cfg(test)]
mod tests;
