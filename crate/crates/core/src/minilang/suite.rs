//! Unit-test suites: one `test <name>: <fn>(<literal>, ...) == <literal>|!error`
//! entry per line. `#` starts a comment line.

use thiserror::Error;

use super::ast::*;
use super::parser::{Parser, SyntaxError, Tok};
use super::printer::literal;
use super::validate::FunctionIndex;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expectation {
    Value(Literal),
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestCase {
    pub name: String,
    pub function: Ident,
    pub args: Vec<Literal>,
    pub expect: Expectation,
}

impl TestCase {
    pub fn to_line(&self) -> String {
        let args: Vec<String> = self.args.iter().map(literal).collect();
        let expected = match &self.expect {
            Expectation::Value(l) => literal(l),
            Expectation::Error => "!error".to_string(),
        };
        format!(
            "test {}: {}({}) == {}",
            self.name,
            self.function,
            args.join(", "),
            expected
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuiteError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("test `{test}`: {message}")]
    Invalid { test: String, message: String },
}

impl From<SyntaxError> for SuiteError {
    fn from(e: SyntaxError) -> Self {
        SuiteError::Syntax {
            line: e.line,
            message: e.message,
        }
    }
}

pub fn parse_suite(text: &str) -> Result<Vec<TestCase>, SuiteError> {
    let mut tests = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tc = parse_test_line(line).map_err(|e| SuiteError::Syntax {
            line: lineno + 1,
            message: e.message,
        })?;
        if tests.iter().any(|t: &TestCase| t.name == tc.name) {
            return Err(SuiteError::Syntax {
                line: lineno + 1,
                message: format!("duplicate test name `{}`", tc.name),
            });
        }
        tests.push(tc);
    }
    Ok(tests)
}

fn parse_test_line(line: &str) -> Result<TestCase, SyntaxError> {
    let mut p = Parser::new(line)?;
    match p.bump() {
        Tok::Ident(w) if w == "test" => {}
        _ => return Err(p.error("expected `test`")),
    }
    let name = p.ident()?.to_string();
    p.expect(Tok::Colon, "`:`")?;
    let function = p.ident()?;
    p.expect(Tok::LParen, "`(`")?;
    let mut args = Vec::new();
    if *p.peek() != Tok::RParen {
        loop {
            args.push(p.literal()?);
            if *p.peek() == Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect(Tok::RParen, "`)`")?;
    p.expect(Tok::EqEq, "`==`")?;
    let expect = if *p.peek() == Tok::Bang {
        p.bump();
        match p.bump() {
            Tok::Ident(w) if w == "error" => Expectation::Error,
            _ => return Err(p.error("expected `!error`")),
        }
    } else {
        Expectation::Value(p.literal()?)
    };
    if *p.peek() != Tok::Eof {
        return Err(p.error("trailing input after expectation"));
    }
    Ok(TestCase {
        name,
        function,
        args,
        expect,
    })
}

pub fn print_suite(tests: &[TestCase]) -> String {
    let mut out = String::new();
    for t in tests {
        out.push_str(&t.to_line());
        out.push('\n');
    }
    out
}

/// Every test must call an existing public function with well-typed literals.
pub fn validate_suite(program: &Program, tests: &[TestCase]) -> Result<(), SuiteError> {
    let index = FunctionIndex::new(program);
    for t in tests {
        let invalid = |message: String| SuiteError::Invalid {
            test: t.name.clone(),
            message,
        };
        let (mi, fi) = index
            .resolve_public(&t.function)
            .ok_or_else(|| invalid(format!("no public function `{}`", t.function)))?;
        let sig = index.signature(mi, fi);
        if sig.params.len() != t.args.len() {
            return Err(invalid(format!(
                "`{}` takes {} arguments, {} given",
                t.function,
                sig.params.len(),
                t.args.len()
            )));
        }
        for (a, &pt) in t.args.iter().zip(&sig.params) {
            if !a.value_type().assignable_to(pt) {
                return Err(invalid(format!("argument {} is not a {pt}", literal(a))));
            }
        }
        if let Expectation::Value(v) = &t.expect {
            let vt = v.value_type();
            let ok = vt.assignable_to(sig.ret) || (sig.ret == ValueType::Int && vt == ValueType::Float);
            if !ok {
                return Err(invalid(format!(
                    "expected {} but `{}` returns {}",
                    literal(v),
                    t.function,
                    sig.ret
                )));
            }
        }
    }
    Ok(())
}
