//! Deterministic tree-walking interpreter with a step budget and optional
//! statement coverage recording.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::ast::*;
use super::suite::{Expectation, TestCase};
use super::validate::FunctionIndex;

/// Default per-test step budget.
pub const DEFAULT_STEP_LIMIT: u64 = 100_000;
/// Absolute tolerance for comparing floating-point results against expectations.
pub const FLOAT_TOLERANCE: f64 = 1e-9;
const MAX_CALL_DEPTH: usize = 100;
const MAX_STRING_LEN: usize = 1 << 20;

#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(Arc<str>),
    Void,
}

impl Value {
    fn from_literal(l: &Literal) -> Value {
        match l {
            Literal::Int(v) => Value::Int(*v),
            Literal::Float(v) => Value::Float(*v),
            Literal::Bool(v) => Value::Bool(*v),
            Literal::Str(s) => Value::Str(s.clone()),
        }
    }

    fn widen_to(self, ty: ValueType) -> Value {
        match (self, ty) {
            (Value::Int(v), ValueType::Float) => Value::Float(v as f64),
            (v, _) => v,
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    /// Equality used for test verdicts: exact, except floats within [`FLOAT_TOLERANCE`].
    pub fn matches_literal(&self, expected: &Literal) -> bool {
        match (self, expected) {
            (Value::Int(a), Literal::Int(b)) => a == b,
            (Value::Bool(a), Literal::Bool(b)) => a == b,
            (Value::Str(a), Literal::Str(b)) => a == b,
            (Value::Float(_), _) | (_, Literal::Float(_)) => {
                let b = match expected {
                    Literal::Int(v) => *v as f64,
                    Literal::Float(v) => *v,
                    _ => return false,
                };
                match self.as_f64() {
                    Some(a) => (a - b).abs() <= FLOAT_TOLERANCE,
                    None => false,
                }
            }
            _ => false,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Void => f.write_str("void"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    RuntimeError,
    StepLimitExceeded,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    pub verdict: Verdict,
    pub covered: BTreeSet<StatementId>,
    pub steps_used: u64,
    /// Returned value or error text, for diagnostics.
    pub detail: String,
}

#[derive(Debug)]
enum Fault {
    Runtime(String),
    StepLimit,
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Value),
}

/// Runs tests against one program. Building the runner resolves the call
/// graph once; every run starts from freshly initialised globals.
pub struct TestRunner<'p> {
    program: &'p Program,
    index: FunctionIndex,
    step_limit: u64,
}

struct Machine<'r, 'p> {
    runner: &'r TestRunner<'p>,
    globals: Vec<Vec<(Ident, Value)>>,
    locals: Vec<(Ident, Value)>,
    steps: u64,
    depth: usize,
    coverage: Option<HashSet<StatementId>>,
}

impl<'p> TestRunner<'p> {
    pub fn new(program: &'p Program, step_limit: u64) -> Self {
        TestRunner {
            program,
            index: FunctionIndex::new(program),
            step_limit,
        }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    /// Runs a test and records the set of statements whose execution began.
    pub fn run(&self, test: &TestCase) -> ExecutionOutcome {
        self.run_inner(test, true)
    }

    /// Verdict only; skips coverage bookkeeping.
    pub fn verdict(&self, test: &TestCase) -> Verdict {
        self.run_inner(test, false).verdict
    }

    fn run_inner(&self, test: &TestCase, record: bool) -> ExecutionOutcome {
        let mut m = Machine {
            runner: self,
            globals: self
                .program
                .modules
                .iter()
                .map(|module| {
                    module
                        .globals
                        .iter()
                        .map(|g| (g.name.clone(), Value::from_literal(&g.init).widen_to(g.ty)))
                        .collect()
                })
                .collect(),
            locals: Vec::with_capacity(32),
            steps: 0,
            depth: 0,
            coverage: record.then(HashSet::new),
        };
        let result = match self.index.resolve_public(&test.function) {
            Some((mi, fi)) => {
                let args = test.args.iter().map(Value::from_literal).collect();
                m.call(mi, fi, args)
            }
            None => Err(Fault::Runtime(format!("no public function `{}`", test.function))),
        };
        let (verdict, detail) = match (&result, &test.expect) {
            (Err(Fault::StepLimit), _) => (Verdict::StepLimitExceeded, "step limit".to_string()),
            (Err(Fault::Runtime(msg)), Expectation::Error) => (Verdict::Pass, msg.clone()),
            (Err(Fault::Runtime(msg)), Expectation::Value(_)) => (Verdict::RuntimeError, msg.clone()),
            (Ok(v), Expectation::Value(expected)) => {
                let verdict = if v.matches_literal(expected) {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                (verdict, v.to_string())
            }
            (Ok(v), Expectation::Error) => (Verdict::Fail, v.to_string()),
        };
        ExecutionOutcome {
            verdict,
            covered: m
                .coverage
                .map(|c| c.into_iter().collect())
                .unwrap_or_default(),
            steps_used: m.steps,
            detail,
        }
    }
}

/// Convenience wrapper: run one test with coverage.
pub fn execute_test(program: &Program, test: &TestCase, step_limit: u64) -> ExecutionOutcome {
    TestRunner::new(program, step_limit).run(test)
}

impl Machine<'_, '_> {
    fn tick(&mut self) -> Result<(), Fault> {
        self.steps += 1;
        if self.steps >= self.runner.step_limit {
            return Err(Fault::StepLimit);
        }
        Ok(())
    }

    fn call(&mut self, mi: usize, fi: usize, args: Vec<Value>) -> Result<Value, Fault> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Fault::Runtime("call stack overflow".into()));
        }
        self.tick()?;
        let func = &self.runner.program.modules[mi].functions[fi];
        let base = self.locals.len();
        for (p, a) in func.params.iter().zip(args) {
            self.locals.push((p.name.clone(), a.widen_to(p.ty)));
        }
        self.depth += 1;
        let flow = self.exec_block(mi, base, &func.body);
        self.depth -= 1;
        self.locals.truncate(base);
        match flow? {
            Flow::Return(v) => Ok(v.widen_to(func.ret)),
            _ if func.ret == ValueType::Void => Ok(Value::Void),
            _ => Err(Fault::Runtime(format!("`{}` finished without a value", func.name))),
        }
    }

    fn exec_block(&mut self, mi: usize, frame: usize, body: &[Stmt]) -> Result<Flow, Fault> {
        let mark = self.locals.len();
        let mut flow = Flow::Normal;
        for s in body {
            flow = self.exec(mi, frame, s)?;
            if !matches!(flow, Flow::Normal) {
                break;
            }
        }
        self.locals.truncate(mark);
        Ok(flow)
    }

    fn exec(&mut self, mi: usize, frame: usize, stmt: &Stmt) -> Result<Flow, Fault> {
        self.tick()?;
        if let Some(cov) = self.coverage.as_mut() {
            cov.insert(stmt.id);
        }
        match &stmt.kind {
            StmtKind::VarDecl { name, ty, init } => {
                let v = self.eval(mi, frame, init)?.widen_to(*ty);
                self.locals.push((name.clone(), v));
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(mi, frame, value)?;
                self.store(mi, frame, target, v)?;
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                if self.eval_bool(mi, frame, cond)? {
                    return self.exec_block(mi, frame, then_body);
                } else if let Some(eb) = else_body {
                    return self.exec_block(mi, frame, eb);
                }
            }
            StmtKind::While { cond, body } => loop {
                if !self.eval_bool(mi, frame, cond)? {
                    break;
                }
                match self.exec_block(mi, frame, body)? {
                    Flow::Break => break,
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal | Flow::Continue => {}
                }
                self.tick()?;
            },
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(mi, frame, e)?,
                    None => Value::Void,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
            StmtKind::Call(name, args) => {
                self.invoke(mi, frame, name, args)?;
            }
            StmtKind::Block(body) => return self.exec_block(mi, frame, body),
        }
        Ok(Flow::Normal)
    }

    fn store(&mut self, mi: usize, frame: usize, name: &str, v: Value) -> Result<(), Fault> {
        if let Some(slot) = self.locals[frame..]
            .iter_mut()
            .rev()
            .find(|(n, _)| &**n == name)
        {
            slot.1 = coerce_like(&slot.1, v);
            return Ok(());
        }
        if let Some(slot) = self.globals[mi].iter_mut().find(|(n, _)| &**n == name) {
            slot.1 = coerce_like(&slot.1, v);
            return Ok(());
        }
        Err(Fault::Runtime(format!("unbound variable `{name}`")))
    }

    fn load(&self, mi: usize, frame: usize, name: &str) -> Result<Value, Fault> {
        if let Some((_, v)) = self.locals[frame..].iter().rev().find(|(n, _)| &**n == name) {
            return Ok(v.clone());
        }
        if let Some((_, v)) = self.globals[mi].iter().find(|(n, _)| &**n == name) {
            return Ok(v.clone());
        }
        Err(Fault::Runtime(format!("unbound variable `{name}`")))
    }

    fn invoke(&mut self, mi: usize, frame: usize, name: &str, args: &[Expr]) -> Result<Value, Fault> {
        let (tm, tf) = self
            .runner
            .index
            .resolve(mi, name)
            .ok_or_else(|| Fault::Runtime(format!("unbound function `{name}`")))?;
        let mut values = Vec::with_capacity(args.len());
        for a in args {
            values.push(self.eval(mi, frame, a)?);
        }
        self.call(tm, tf, values)
    }

    fn eval_bool(&mut self, mi: usize, frame: usize, e: &Expr) -> Result<bool, Fault> {
        match self.eval(mi, frame, e)? {
            Value::Bool(b) => Ok(b),
            other => Err(Fault::Runtime(format!("expected bool, found {other}"))),
        }
    }

    fn eval(&mut self, mi: usize, frame: usize, e: &Expr) -> Result<Value, Fault> {
        match e {
            Expr::Lit(l) => Ok(Value::from_literal(l)),
            Expr::Var(name) => self.load(mi, frame, name),
            Expr::Unary(op, inner) => match (op, self.eval(mi, frame, inner)?) {
                (UnaryOp::Neg, Value::Int(v)) => v
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or_else(|| Fault::Runtime("integer overflow".into())),
                (UnaryOp::Neg, Value::Float(v)) => Ok(Value::Float(-v)),
                (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (_, v) => Err(Fault::Runtime(format!("bad unary operand {v}"))),
            },
            Expr::Binary(BinaryOp::And, l, r) => {
                Ok(Value::Bool(self.eval_bool(mi, frame, l)? && self.eval_bool(mi, frame, r)?))
            }
            Expr::Binary(BinaryOp::Or, l, r) => {
                Ok(Value::Bool(self.eval_bool(mi, frame, l)? || self.eval_bool(mi, frame, r)?))
            }
            Expr::Binary(op, l, r) => {
                let lv = self.eval(mi, frame, l)?;
                let rv = self.eval(mi, frame, r)?;
                binary(*op, lv, rv)
            }
            Expr::Call(name, args) => self.invoke(mi, frame, name, args),
        }
    }
}

fn coerce_like(current: &Value, new: Value) -> Value {
    match (current, new) {
        (Value::Float(_), Value::Int(v)) => Value::Float(v as f64),
        (_, v) => v,
    }
}

fn binary(op: BinaryOp, lv: Value, rv: Value) -> Result<Value, Fault> {
    use Value::*;
    let overflow = || Fault::Runtime("integer overflow".into());
    match (lv, rv) {
        (Int(a), Int(b)) => Ok(match op {
            BinaryOp::Add => Int(a.checked_add(b).ok_or_else(overflow)?),
            BinaryOp::Sub => Int(a.checked_sub(b).ok_or_else(overflow)?),
            BinaryOp::Mul => Int(a.checked_mul(b).ok_or_else(overflow)?),
            BinaryOp::Div | BinaryOp::Rem if b == 0 => {
                return Err(Fault::Runtime("division by zero".into()))
            }
            BinaryOp::Div => Int(a.checked_div(b).ok_or_else(overflow)?),
            BinaryOp::Rem => Int(a.checked_rem(b).ok_or_else(overflow)?),
            BinaryOp::Eq => Bool(a == b),
            BinaryOp::Ne => Bool(a != b),
            BinaryOp::Lt => Bool(a < b),
            BinaryOp::Le => Bool(a <= b),
            BinaryOp::Gt => Bool(a > b),
            BinaryOp::Ge => Bool(a >= b),
            BinaryOp::And | BinaryOp::Or => return Err(Fault::Runtime("bad operands".into())),
        }),
        (l @ (Int(_) | Float(_)), r @ (Int(_) | Float(_))) => {
            let a = l.as_f64().expect("numeric");
            let b = r.as_f64().expect("numeric");
            Ok(match op {
                BinaryOp::Add => Float(a + b),
                BinaryOp::Sub => Float(a - b),
                BinaryOp::Mul => Float(a * b),
                BinaryOp::Div if b == 0.0 => return Err(Fault::Runtime("division by zero".into())),
                BinaryOp::Div => Float(a / b),
                BinaryOp::Eq => Bool(a == b),
                BinaryOp::Ne => Bool(a != b),
                BinaryOp::Lt => Bool(a < b),
                BinaryOp::Le => Bool(a <= b),
                BinaryOp::Gt => Bool(a > b),
                BinaryOp::Ge => Bool(a >= b),
                _ => return Err(Fault::Runtime("bad float operands".into())),
            })
        }
        (Str(a), Str(b)) => Ok(match op {
            BinaryOp::Add if a.len() + b.len() > MAX_STRING_LEN => {
                return Err(Fault::Runtime("string too long".into()))
            }
            BinaryOp::Add => {
                let mut s = String::with_capacity(a.len() + b.len());
                s.push_str(&a);
                s.push_str(&b);
                Str(Arc::from(s))
            }
            BinaryOp::Eq => Bool(a == b),
            BinaryOp::Ne => Bool(a != b),
            _ => return Err(Fault::Runtime("bad string operands".into())),
        }),
        (Bool(a), Bool(b)) => Ok(match op {
            BinaryOp::Eq => Bool(a == b),
            BinaryOp::Ne => Bool(a != b),
            _ => return Err(Fault::Runtime("bad bool operands".into())),
        }),
        (l, r) => Err(Fault::Runtime(format!("bad operands {l} and {r}"))),
    }
}
