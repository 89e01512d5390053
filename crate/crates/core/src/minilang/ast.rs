//! Abstract syntax for MiniLang.
//!
//! Statement equality and hashing are *structural*: they ignore
//! [`StatementId`]s and compare only the shape of the tree. This is what
//! seed deduplication, redundancy detection and the "same AST" operation
//! rule rely on.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Identifiers are shared, so cloning a program only bumps reference counts.
pub type Ident = Arc<str>;

pub fn ident(s: &str) -> Ident {
    Arc::from(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueType {
    Int,
    Float,
    Bool,
    Str,
    Void,
}

impl ValueType {
    /// `true` if a value of type `self` may be stored where `target` is expected.
    pub fn assignable_to(self, target: ValueType) -> bool {
        self == target || (self == ValueType::Int && target == ValueType::Float)
    }

    /// Identical, or related by Int/Float widening in either direction.
    pub fn compatible_with(self, other: ValueType) -> bool {
        self.assignable_to(other) || other.assignable_to(self)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Int | ValueType::Float)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Int => "int",
            ValueType::Float => "float",
            ValueType::Bool => "bool",
            ValueType::Str => "str",
            ValueType::Void => "void",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Position of a statement: module index, function index within the module,
/// and pre-order ordinal within the function body. Ordering is source order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StatementId {
    pub module: u32,
    pub function: u32,
    pub ordinal: u32,
}

impl StatementId {
    pub fn new(module: u32, function: u32, ordinal: u32) -> Self {
        StatementId {
            module,
            function,
            ordinal,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(Arc<str>),
}

impl Literal {
    pub fn value_type(&self) -> ValueType {
        match self {
            Literal::Int(_) => ValueType::Int,
            Literal::Float(_) => ValueType::Float,
            Literal::Bool(_) => ValueType::Bool,
            Literal::Str(_) => ValueType::Str,
        }
    }

    pub fn zero_of(ty: ValueType) -> Option<Literal> {
        match ty {
            ValueType::Int => Some(Literal::Int(0)),
            ValueType::Float => Some(Literal::Float(0.0)),
            ValueType::Bool => Some(Literal::Bool(false)),
            ValueType::Str => Some(Literal::Str(Arc::from(""))),
            ValueType::Void => None,
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Int(a), Literal::Int(b)) => a == b,
            (Literal::Float(a), Literal::Float(b)) => a.to_bits() == b.to_bits(),
            (Literal::Bool(a), Literal::Bool(b)) => a == b,
            (Literal::Str(a), Literal::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Literal::Int(v) => v.hash(state),
            Literal::Float(v) => v.to_bits().hash(state),
            Literal::Bool(v) => v.hash(state),
            Literal::Str(v) => v.hash(state),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter. All binary operators are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem
        )
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Literal),
    Var(Ident),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Ident, Vec<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Lit(Literal::Int(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(ident(name))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Visits every sub-expression in pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Lit(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
        }
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        match self {
            Expr::Lit(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) => e.walk_mut(f),
            Expr::Binary(_, l, r) => {
                l.walk_mut(f);
                r.walk_mut(f);
            }
            Expr::Call(_, args) => args.iter_mut().for_each(|a| a.walk_mut(f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    VarDecl {
        name: Ident,
        ty: ValueType,
        init: Expr,
    },
    Assign {
        target: Ident,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Call(Ident, Vec<Expr>),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StmtTag {
    VarDecl,
    Assign,
    If,
    While,
    Return,
    Break,
    Continue,
    Call,
    Block,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: StatementId,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Stmt {}

impl Hash for Stmt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt {
            id: StatementId::default(),
            kind,
        }
    }

    pub fn tag(&self) -> StmtTag {
        match self.kind {
            StmtKind::VarDecl { .. } => StmtTag::VarDecl,
            StmtKind::Assign { .. } => StmtTag::Assign,
            StmtKind::If { .. } => StmtTag::If,
            StmtKind::While { .. } => StmtTag::While,
            StmtKind::Return(_) => StmtTag::Return,
            StmtKind::Break => StmtTag::Break,
            StmtKind::Continue => StmtTag::Continue,
            StmtKind::Call(..) => StmtTag::Call,
            StmtKind::Block(_) => StmtTag::Block,
        }
    }

    /// Nested statement lists owned by this statement (then/else, loop body, block).
    pub fn child_blocks(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                let mut v = vec![then_body];
                if let Some(e) = else_body {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } => vec![body],
            StmtKind::Block(body) => vec![body],
            _ => Vec::new(),
        }
    }

    pub fn child_blocks_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                let mut v = vec![then_body];
                if let Some(e) = else_body {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } => vec![body],
            StmtKind::Block(body) => vec![body],
            _ => Vec::new(),
        }
    }

    /// Expressions belonging to this statement itself, excluding nested statements.
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::VarDecl { init, .. } => vec![init],
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(Some(e)) => vec![e],
            StmtKind::Call(_, args) => args.iter().collect(),
            StmtKind::Return(None) | StmtKind::Break | StmtKind::Continue | StmtKind::Block(_) => {
                Vec::new()
            }
        }
    }

    pub fn own_exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::VarDecl { init, .. } => vec![init],
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(Some(e)) => vec![e],
            StmtKind::Call(_, args) => args.iter_mut().collect(),
            StmtKind::Return(None) | StmtKind::Break | StmtKind::Continue | StmtKind::Block(_) => {
                Vec::new()
            }
        }
    }

    /// Visits this statement and all nested statements in pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        for block in self.child_blocks() {
            for s in block {
                s.walk(f);
            }
        }
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Stmt)) {
        f(self);
        for block in self.child_blocks_mut() {
            for s in block.iter_mut() {
                s.walk_mut(f);
            }
        }
    }

    /// Number of statements in this subtree, including itself.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: Ident,
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub params: Vec<ValueType>,
    pub ret: ValueType,
}

impl Signature {
    /// Parameter-wise compatibility with identical arity; no contravariance.
    pub fn compatible_with(&self, other: &Signature) -> bool {
        self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.compatible_with(*b))
            && self.ret.compatible_with(other.ret)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionDef {
    pub name: Ident,
    pub public: bool,
    pub params: Vec<Param>,
    pub ret: ValueType,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    pub fn signature(&self) -> Signature {
        Signature {
            params: self.params.iter().map(|p| p.ty).collect(),
            ret: self.ret,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalDecl {
    pub name: Ident,
    pub ty: ValueType,
    pub init: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceModule {
    pub name: Ident,
    pub globals: Vec<GlobalDecl>,
    pub functions: Vec<FunctionDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub modules: Vec<SourceModule>,
}

impl Program {
    /// Reassigns every statement id in source order.
    pub fn renumber(&mut self) {
        for (mi, module) in self.modules.iter_mut().enumerate() {
            for (fi, func) in module.functions.iter_mut().enumerate() {
                let mut ordinal = 0u32;
                for s in func.body.iter_mut() {
                    s.walk_mut(&mut |st| {
                        st.id = StatementId::new(mi as u32, fi as u32, ordinal);
                        ordinal += 1;
                    });
                }
            }
        }
    }

    pub fn function(&self, id: StatementId) -> &FunctionDef {
        &self.modules[id.module as usize].functions[id.function as usize]
    }

    /// All statements in source order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        for module in &self.modules {
            for func in &module.functions {
                for s in &func.body {
                    s.walk(&mut |st| out.push(st));
                }
            }
        }
        out
    }

    pub fn statement_count(&self) -> usize {
        self.statements().len()
    }

    pub fn find_statement(&self, id: StatementId) -> Option<&Stmt> {
        let func = self
            .modules
            .get(id.module as usize)?
            .functions
            .get(id.function as usize)?;
        let mut found = None;
        for s in &func.body {
            s.walk(&mut |st| {
                if st.id == id && found.is_none() {
                    found = Some(st);
                }
            });
        }
        found
    }

    /// Human-readable `module:function:ordinal` form.
    pub fn describe(&self, id: StatementId) -> String {
        match self
            .modules
            .get(id.module as usize)
            .and_then(|m| m.functions.get(id.function as usize).map(|f| (m, f)))
        {
            Some((m, f)) => format!("{}:{}:{}", m.name, f.name, id.ordinal),
            None => format!("?{}:?{}:{}", id.module, id.function, id.ordinal),
        }
    }

    /// Inverse of [`Program::describe`].
    pub fn resolve_id(&self, text: &str) -> Option<StatementId> {
        let mut parts = text.rsplitn(3, ':');
        let ordinal: u32 = parts.next()?.parse().ok()?;
        let func = parts.next()?;
        let module = parts.next()?;
        let mi = self.modules.iter().position(|m| &*m.name == module)?;
        let fi = self.modules[mi]
            .functions
            .iter()
            .position(|f| &*f.name == func)?;
        Some(StatementId::new(mi as u32, fi as u32, ordinal))
    }
}
