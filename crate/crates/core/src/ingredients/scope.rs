//! Variable and function scope at a statement location.

use crate::minilang::{Ident, Program, Signature, StatementId, Stmt, StmtKind, ValueType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeVar {
    pub name: Ident,
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeFn {
    pub name: Ident,
    pub signature: Signature,
    pub module: u32,
    pub index: u32,
}

/// Names visible just before a statement.
///
/// Variables are ordered nearest declaration first: locals (most recent
/// first), then parameters, then module globals. Functions list the other
/// functions of the current module, nearest declaration above the current
/// function first, then public functions of other modules, and the enclosing
/// function itself last. Each name appears once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub variables: Vec<ScopeVar>,
    pub functions: Vec<ScopeFn>,
}

impl Scope {
    pub fn variable(&self, name: &str) -> Option<&ScopeVar> {
        self.variables.iter().find(|v| &*v.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&ScopeFn> {
        self.functions.iter().find(|f| &*f.name == name)
    }

    /// Bindings for the type checker; later entries shadow earlier ones.
    pub fn checker_frame(&self) -> Vec<(Ident, ValueType)> {
        self.variables.iter().rev().map(|v| (v.name.clone(), v.ty)).collect()
    }
}

/// A statement's position together with the context the ingredient and
/// operation rules look at.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: StatementId,
    pub scope: Scope,
    /// Inside the body of some `while`.
    pub in_loop: bool,
    /// Last statement of its enclosing block.
    pub last_in_block: bool,
    /// Last statement of the function body itself.
    pub last_in_function: bool,
    /// The function is non-void and the statement lies on the path that makes
    /// its body definitely return (the final statement, or the final
    /// statement of a branch of a final `if`/`else`, recursively).
    pub return_critical: bool,
    pub function_ret: ValueType,
}

struct Search<'a> {
    target: StatementId,
    locals: Vec<(Ident, ValueType)>,
    found: Option<(Vec<(Ident, ValueType)>, bool, bool, bool, bool)>,
    _p: std::marker::PhantomData<&'a ()>,
}

impl Search<'_> {
    /// `spine`: this block's last statement is on the definite-return path.
    fn block(&mut self, body: &[Stmt], in_loop: bool, top: bool, spine: bool) {
        let mark = self.locals.len();
        for (i, s) in body.iter().enumerate() {
            if self.found.is_some() {
                break;
            }
            let last = i + 1 == body.len();
            let on_spine = spine && last;
            if s.id == self.target {
                self.found = Some((self.locals.clone(), in_loop, last, top && last, on_spine));
                break;
            }
            match &s.kind {
                StmtKind::VarDecl { name, ty, .. } => self.locals.push((name.clone(), *ty)),
                StmtKind::If {
                    then_body,
                    else_body,
                    ..
                } => {
                    let branch_spine = on_spine && else_body.is_some();
                    self.block(then_body, in_loop, false, branch_spine);
                    if let Some(eb) = else_body {
                        self.block(eb, in_loop, false, branch_spine);
                    }
                }
                StmtKind::While { body, .. } => self.block(body, true, false, false),
                StmtKind::Block(inner) => self.block(inner, in_loop, false, on_spine),
                _ => {}
            }
        }
        self.locals.truncate(mark);
    }
}

/// Scope and context of statement `id`, or `None` if no such statement exists.
pub fn locate(program: &Program, id: StatementId) -> Option<Location> {
    let module = program.modules.get(id.module as usize)?;
    let func = module.functions.get(id.function as usize)?;
    let mut search = Search {
        target: id,
        locals: Vec::new(),
        found: None,
        _p: std::marker::PhantomData,
    };
    search.block(&func.body, false, true, func.ret != ValueType::Void);
    let (locals, in_loop, last_in_block, last_in_function, return_critical) = search.found?;

    let mut variables: Vec<ScopeVar> = Vec::new();
    let mut push = |name: &Ident, ty: ValueType| {
        if !variables.iter().any(|v| v.name == *name) {
            variables.push(ScopeVar {
                name: name.clone(),
                ty,
            });
        }
    };
    for (n, t) in locals.iter().rev() {
        push(n, *t);
    }
    for p in func.params.iter().rev() {
        push(&p.name, p.ty);
    }
    for g in module.globals.iter().rev() {
        push(&g.name, g.ty);
    }

    Some(Location {
        id,
        scope: Scope {
            variables,
            functions: visible_functions(program, id.module as usize, id.function as usize),
        },
        in_loop,
        last_in_block,
        last_in_function,
        return_critical,
        function_ret: func.ret,
    })
}

fn visible_functions(program: &Program, module: usize, current: usize) -> Vec<ScopeFn> {
    let own = &program.modules[module].functions;
    let entry = |fi: usize| ScopeFn {
        name: own[fi].name.clone(),
        signature: own[fi].signature(),
        module: module as u32,
        index: fi as u32,
    };
    let mut out: Vec<ScopeFn> = (0..current).rev().chain(current + 1..own.len()).map(entry).collect();
    for (mi, m) in program.modules.iter().enumerate() {
        if mi == module {
            continue;
        }
        for (fi, f) in m.functions.iter().enumerate() {
            if f.public && !out.iter().any(|g| g.name == f.name) {
                out.push(ScopeFn {
                    name: f.name.clone(),
                    signature: f.signature(),
                    module: mi as u32,
                    index: fi as u32,
                });
            }
        }
    }
    if current < own.len() {
        out.push(entry(current));
    }
    out
}
