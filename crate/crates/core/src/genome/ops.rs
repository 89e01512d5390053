//! The operation catalog and per-point operation customization.

use serde::{Deserialize, Serialize};

use crate::ingredients::Location;
use crate::minilang::{Stmt, StmtKind};

/// Edit kinds, in their fixed global order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    Delete,
    Replace,
    Insert,
}

impl OpKind {
    pub const ALL: [OpKind; 3] = [OpKind::Delete, OpKind::Replace, OpKind::Insert];

    /// One-based ordinal in the global catalog.
    pub fn ordinal(self) -> usize {
        match self {
            OpKind::Delete => 1,
            OpKind::Replace => 2,
            OpKind::Insert => 3,
        }
    }

    pub fn letter(self) -> char {
        match self {
            OpKind::Delete => 'D',
            OpKind::Replace => 'R',
            OpKind::Insert => 'I',
        }
    }

    pub fn from_letter(c: char) -> Option<OpKind> {
        match c {
            'D' => Some(OpKind::Delete),
            'R' => Some(OpKind::Replace),
            'I' => Some(OpKind::Insert),
            _ => None,
        }
    }
}

/// Operation types admissible at a point.
///
/// With `rules` set, deleting a variable declaration is forbidden, and so is
/// deleting a statement the enclosing non-void function needs in order to
/// return a value. Replace and Insert are always removed when the point has
/// no ingredients.
pub fn customize_operation_types(statement: &Stmt, location: &Location, has_ingredients: bool, rules: bool) -> Vec<OpKind> {
    let mut ops = Vec::with_capacity(3);
    let no_delete = rules
        && (matches!(statement.kind, StmtKind::VarDecl { .. }) || location.return_critical);
    if !no_delete {
        ops.push(OpKind::Delete);
    }
    if has_ingredients {
        ops.push(OpKind::Replace);
        ops.push(OpKind::Insert);
    }
    ops
}
