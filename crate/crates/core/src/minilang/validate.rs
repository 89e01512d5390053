//! Static validation: name resolution, type checking, loop-context checks
//! for `break`/`continue`, and definite return for non-void functions.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaticError {
    #[error("{location}: unresolved variable `{name}`")]
    UnresolvedVariable { location: String, name: String },
    #[error("{location}: unresolved function `{name}`")]
    UnresolvedFunction { location: String, name: String },
    #[error("{location}: type mismatch: {detail}")]
    TypeMismatch { location: String, detail: String },
    #[error("{location}: `{keyword}` outside of a loop")]
    MisplacedJump {
        location: String,
        keyword: &'static str,
    },
    #[error("function `{function}` may finish without returning a value")]
    MissingReturn { function: String },
    #[error("duplicate definition of `{name}` in {scope}")]
    Duplicate { name: String, scope: String },
}

impl StaticError {
    pub fn kind(&self) -> &'static str {
        match self {
            StaticError::UnresolvedVariable { .. } => "unresolved variable",
            StaticError::UnresolvedFunction { .. } => "unresolved function",
            StaticError::TypeMismatch { .. } => "type mismatch",
            StaticError::MisplacedJump { .. } => "misplaced break/continue",
            StaticError::MissingReturn { .. } => "missing return",
            StaticError::Duplicate { .. } => "duplicate definition",
        }
    }
}

/// Resolves function names as seen from inside a given module: the module's
/// own functions first, then public functions of other modules.
#[derive(Debug, Clone)]
pub struct FunctionIndex {
    own: Vec<HashMap<Ident, usize>>,
    public: HashMap<Ident, (usize, usize)>,
    signatures: Vec<Vec<Signature>>,
}

impl FunctionIndex {
    pub fn new(program: &Program) -> Self {
        let mut own = Vec::with_capacity(program.modules.len());
        let mut public = HashMap::new();
        let mut signatures = Vec::with_capacity(program.modules.len());
        for (mi, module) in program.modules.iter().enumerate() {
            let mut map = HashMap::new();
            let mut sigs = Vec::with_capacity(module.functions.len());
            for (fi, func) in module.functions.iter().enumerate() {
                map.entry(func.name.clone()).or_insert(fi);
                if func.public {
                    public.entry(func.name.clone()).or_insert((mi, fi));
                }
                sigs.push(func.signature());
            }
            own.push(map);
            signatures.push(sigs);
        }
        FunctionIndex {
            own,
            public,
            signatures,
        }
    }

    pub fn resolve(&self, from_module: usize, name: &str) -> Option<(usize, usize)> {
        if let Some(&fi) = self.own.get(from_module).and_then(|m| m.get(name)) {
            return Some((from_module, fi));
        }
        self.public.get(name).copied()
    }

    pub fn signature(&self, module: usize, function: usize) -> &Signature {
        &self.signatures[module][function]
    }

    pub fn resolve_public(&self, name: &str) -> Option<(usize, usize)> {
        self.public.get(name).copied()
    }
}

/// Which control-flow constraints a [`Checker`] enforces.
#[derive(Debug, Clone, Copy)]
pub struct CheckRules {
    /// Reject `break`/`continue` outside loops.
    pub jumps: bool,
    /// Type-check `return` against the enclosing function's return type.
    pub returns: bool,
}

impl CheckRules {
    pub const FULL: CheckRules = CheckRules {
        jumps: true,
        returns: true,
    };
}

/// Type checker over a stack of lexical frames.
pub struct Checker<'a> {
    frames: Vec<Vec<(Ident, ValueType)>>,
    functions: &'a dyn Fn(&str) -> Option<Signature>,
    ret: ValueType,
    loop_depth: usize,
    rules: CheckRules,
    location: String,
}

impl<'a> Checker<'a> {
    /// `base` lists visible variables, later entries shadowing earlier ones.
    pub fn new(
        base: Vec<(Ident, ValueType)>,
        functions: &'a dyn Fn(&str) -> Option<Signature>,
        ret: ValueType,
        in_loop: bool,
        rules: CheckRules,
        location: String,
    ) -> Self {
        Checker {
            frames: vec![base],
            functions,
            ret,
            loop_depth: usize::from(in_loop),
            rules,
            location,
        }
    }

    fn lookup(&self, name: &str) -> Option<ValueType> {
        self.frames
            .iter()
            .rev()
            .flat_map(|f| f.iter().rev())
            .find(|(n, _)| &**n == name)
            .map(|(_, t)| *t)
    }

    fn mismatch(&self, detail: String) -> StaticError {
        StaticError::TypeMismatch {
            location: self.location.clone(),
            detail,
        }
    }

    pub fn expr_type(&self, e: &Expr) -> Result<ValueType, StaticError> {
        match e {
            Expr::Lit(l) => Ok(l.value_type()),
            Expr::Var(name) => self
                .lookup(name)
                .ok_or_else(|| StaticError::UnresolvedVariable {
                    location: self.location.clone(),
                    name: name.to_string(),
                }),
            Expr::Unary(op, inner) => {
                let t = self.expr_type(inner)?;
                match op {
                    UnaryOp::Neg if t.is_numeric() => Ok(t),
                    UnaryOp::Not if t == ValueType::Bool => Ok(t),
                    _ => Err(self.mismatch(format!("unary operator applied to {t}"))),
                }
            }
            Expr::Binary(op, l, r) => {
                let lt = self.expr_type(l)?;
                let rt = self.expr_type(r)?;
                binary_result(*op, lt, rt).ok_or_else(|| {
                    self.mismatch(format!("`{}` applied to {lt} and {rt}", op.symbol()))
                })
            }
            Expr::Call(name, args) => {
                let sig = self.call_signature(name, args)?;
                if sig.ret == ValueType::Void {
                    return Err(self.mismatch(format!("void function `{name}` used as a value")));
                }
                Ok(sig.ret)
            }
        }
    }

    fn call_signature(&self, name: &Ident, args: &[Expr]) -> Result<Signature, StaticError> {
        let sig = (self.functions)(name).ok_or_else(|| StaticError::UnresolvedFunction {
            location: self.location.clone(),
            name: name.to_string(),
        })?;
        if sig.params.len() != args.len() {
            return Err(self.mismatch(format!(
                "`{name}` takes {} arguments, {} given",
                sig.params.len(),
                args.len()
            )));
        }
        for (arg, &pt) in args.iter().zip(&sig.params) {
            let at = self.expr_type(arg)?;
            if !at.assignable_to(pt) {
                return Err(self.mismatch(format!("argument of type {at} passed as {pt} to `{name}`")));
            }
        }
        Ok(sig)
    }

    pub fn check_block(&mut self, body: &[Stmt]) -> Result<(), StaticError> {
        self.frames.push(Vec::new());
        let result = body.iter().try_for_each(|s| self.check_stmt(s));
        self.frames.pop();
        result
    }

    pub fn check_stmt(&mut self, stmt: &Stmt) -> Result<(), StaticError> {
        match &stmt.kind {
            StmtKind::VarDecl { name, ty, init } => {
                let it = self.expr_type(init)?;
                if !it.assignable_to(*ty) {
                    return Err(self.mismatch(format!("{it} initializer for `{name}: {ty}`")));
                }
                self.frames
                    .last_mut()
                    .expect("at least one frame")
                    .push((name.clone(), *ty));
            }
            StmtKind::Assign { target, value } => {
                let tt = self
                    .lookup(target)
                    .ok_or_else(|| StaticError::UnresolvedVariable {
                        location: self.location.clone(),
                        name: target.to_string(),
                    })?;
                let vt = self.expr_type(value)?;
                if !vt.assignable_to(tt) {
                    return Err(self.mismatch(format!("{vt} assigned to `{target}: {tt}`")));
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.expect_bool(cond)?;
                self.check_block(then_body)?;
                if let Some(eb) = else_body {
                    self.check_block(eb)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.expect_bool(cond)?;
                self.loop_depth += 1;
                let r = self.check_block(body);
                self.loop_depth -= 1;
                r?;
            }
            StmtKind::Return(value) => {
                let vt = match value {
                    Some(e) => self.expr_type(e)?,
                    None => ValueType::Void,
                };
                if self.rules.returns {
                    let ok = if self.ret == ValueType::Void {
                        vt == ValueType::Void
                    } else {
                        vt != ValueType::Void && vt.assignable_to(self.ret)
                    };
                    if !ok {
                        return Err(
                            self.mismatch(format!("returning {vt} from a function returning {}", self.ret))
                        );
                    }
                }
            }
            StmtKind::Break | StmtKind::Continue => {
                if self.rules.jumps && self.loop_depth == 0 {
                    return Err(StaticError::MisplacedJump {
                        location: self.location.clone(),
                        keyword: if matches!(stmt.kind, StmtKind::Break) {
                            "break"
                        } else {
                            "continue"
                        },
                    });
                }
            }
            StmtKind::Call(name, args) => {
                self.call_signature(name, args)?;
            }
            StmtKind::Block(body) => self.check_block(body)?,
        }
        Ok(())
    }

    fn expect_bool(&self, cond: &Expr) -> Result<(), StaticError> {
        let t = self.expr_type(cond)?;
        if t != ValueType::Bool {
            return Err(self.mismatch(format!("condition of type {t}")));
        }
        Ok(())
    }
}

/// Result type of a binary operator, or `None` if the operands do not type-check.
pub fn binary_result(op: BinaryOp, lt: ValueType, rt: ValueType) -> Option<ValueType> {
    use ValueType::*;
    let numeric = lt.is_numeric() && rt.is_numeric();
    let widened = if lt == Float || rt == Float { Float } else { Int };
    match op {
        BinaryOp::Add if lt == Str && rt == Str => Some(Str),
        BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div if numeric => Some(widened),
        BinaryOp::Rem if lt == Int && rt == Int => Some(Int),
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge if numeric => Some(Bool),
        BinaryOp::Eq | BinaryOp::Ne if numeric || (lt == rt && lt != Void) => Some(Bool),
        BinaryOp::And | BinaryOp::Or if lt == Bool && rt == Bool => Some(Bool),
        _ => None,
    }
}

/// `true` if every path through `body` ends in a `return`.
pub fn definitely_returns(body: &[Stmt]) -> bool {
    match body.last().map(|s| &s.kind) {
        Some(StmtKind::Return(_)) => true,
        Some(StmtKind::If {
            then_body,
            else_body: Some(else_body),
            ..
        }) => definitely_returns(then_body) && definitely_returns(else_body),
        Some(StmtKind::Block(inner)) => definitely_returns(inner),
        _ => false,
    }
}

/// Checks a whole program. Reports the first violation found in source order.
pub fn validate_program(program: &Program) -> Result<(), StaticError> {
    let index = FunctionIndex::new(program);
    let mut module_names: Vec<&str> = Vec::new();
    let mut public_names: HashMap<&str, &str> = HashMap::new();
    for module in &program.modules {
        if module_names.contains(&&*module.name) {
            return Err(StaticError::Duplicate {
                name: module.name.to_string(),
                scope: "program".into(),
            });
        }
        module_names.push(&module.name);
        for func in module.functions.iter().filter(|f| f.public) {
            if public_names.insert(&func.name, &module.name).is_some() {
                return Err(StaticError::Duplicate {
                    name: func.name.to_string(),
                    scope: "public functions".into(),
                });
            }
        }
    }

    for (mi, module) in program.modules.iter().enumerate() {
        let mut globals: Vec<(Ident, ValueType)> = Vec::new();
        for g in &module.globals {
            if globals.iter().any(|(n, _)| *n == g.name) {
                return Err(StaticError::Duplicate {
                    name: g.name.to_string(),
                    scope: format!("module {}", module.name),
                });
            }
            if !g.init.value_type().assignable_to(g.ty) {
                return Err(StaticError::TypeMismatch {
                    location: format!("{}::{}", module.name, g.name),
                    detail: format!("{} initializer for global of type {}", g.init.value_type(), g.ty),
                });
            }
            globals.push((g.name.clone(), g.ty));
        }
        let mut seen_functions: Vec<&str> = Vec::new();
        for func in &module.functions {
            if seen_functions.contains(&&*func.name) {
                return Err(StaticError::Duplicate {
                    name: func.name.to_string(),
                    scope: format!("module {}", module.name),
                });
            }
            seen_functions.push(&func.name);
            let mut base = globals.clone();
            for p in &func.params {
                if func.params.iter().filter(|q| q.name == p.name).count() > 1 {
                    return Err(StaticError::Duplicate {
                        name: p.name.to_string(),
                        scope: format!("parameters of {}", func.name),
                    });
                }
                base.push((p.name.clone(), p.ty));
            }
            let resolve = |name: &str| {
                index
                    .resolve(mi, name)
                    .map(|(m, f)| index.signature(m, f).clone())
            };
            let mut checker = Checker::new(
                base,
                &resolve,
                func.ret,
                false,
                CheckRules::FULL,
                format!("{}::{}", module.name, func.name),
            );
            checker.check_block(&func.body)?;
            if func.ret != ValueType::Void && !definitely_returns(&func.body) {
                return Err(StaticError::MissingReturn {
                    function: format!("{}::{}", module.name, func.name),
                });
            }
        }
    }
    Ok(())
}
