//! Hand-written lexer and recursive-descent parser for MiniLang source text.

use std::sync::Arc;

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Module,
    Pub,
    Fn,
    Var,
    If,
    Else,
    While,
    Return,
    Break,
    Continue,
    True,
    False,
    TyInt,
    TyFloat,
    TyBool,
    TyStr,
    TyVoid,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Arrow,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| SyntaxError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                out.push(Token {
                    tok: Tok::Newline,
                    line,
                    column: col,
                });
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '%' => push(Tok::Percent, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'=') => push(Tok::EqEq, 2, &mut i, &mut col),
            '=' => push(Tok::Assign, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::NotEq, 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Le, 2, &mut i, &mut col),
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '>' if chars.get(i + 1) == Some(&'=') => push(Tok::Ge, 2, &mut i, &mut col),
            '>' => push(Tok::Gt, 1, &mut i, &mut col),
            '&' if chars.get(i + 1) == Some(&'&') => push(Tok::AndAnd, 2, &mut i, &mut col),
            '|' if chars.get(i + 1) == Some(&'|') => push(Tok::OrOr, 2, &mut i, &mut col),
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(err(tl, tc, "unterminated string literal".into()))
                        }
                        Some('"') => break,
                        Some('\\') => {
                            let esc = match chars.get(j + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('"') => '"',
                                Some('\\') => '\\',
                                other => {
                                    return Err(err(
                                        tl,
                                        tc,
                                        format!("bad escape sequence {:?}", other),
                                    ))
                                }
                            };
                            s.push(esc);
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                let width = j + 1 - i;
                push(Tok::Str(s), width, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut is_float = false;
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    is_float = true;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        is_float = true;
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let tok = if is_float {
                    Tok::Float(
                        text.parse()
                            .map_err(|_| err(tl, tc, format!("bad float literal {text}")))?,
                    )
                } else {
                    Tok::Int(
                        text.parse()
                            .map_err(|_| err(tl, tc, format!("integer literal {text} out of range")))?,
                    )
                };
                push(tok, j - i, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "module" => Tok::Module,
                    "pub" => Tok::Pub,
                    "fn" => Tok::Fn,
                    "var" => Tok::Var,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "return" => Tok::Return,
                    "break" => Tok::Break,
                    "continue" => Tok::Continue,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "int" => Tok::TyInt,
                    "float" => Tok::TyFloat,
                    "bool" => Tok::TyBool,
                    "str" => Tok::TyStr,
                    "void" => Tok::TyVoid,
                    _ => Tok::Ident(word),
                };
                push(tok, j - i, &mut i, &mut col);
            }
            other => return Err(err(line, col, format!("unexpected character {other:?}"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> SyntaxError {
        let t = &self.toks[self.pos];
        SyntaxError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    pub(crate) fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    pub(crate) fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Semi) {
            self.bump();
        }
    }

    pub(crate) fn ident(&mut self) -> Result<Ident, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(ident(&name))
            }
            other => Err(self.error(format!("expected identifier, found {other:?}"))),
        }
    }

    fn value_type(&mut self) -> Result<ValueType, SyntaxError> {
        let ty = match self.peek() {
            Tok::TyInt => ValueType::Int,
            Tok::TyFloat => ValueType::Float,
            Tok::TyBool => ValueType::Bool,
            Tok::TyStr => ValueType::Str,
            Tok::TyVoid => ValueType::Void,
            other => return Err(self.error(format!("expected type, found {other:?}"))),
        };
        self.bump();
        Ok(ty)
    }

    pub(crate) fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut modules = Vec::new();
        self.skip_newlines();
        while *self.peek() != Tok::Eof {
            modules.push(self.module()?);
            self.skip_newlines();
        }
        if modules.is_empty() {
            return Err(self.error("a program must contain at least one module"));
        }
        let mut program = Program { modules };
        program.renumber();
        Ok(program)
    }

    fn module(&mut self) -> Result<SourceModule, SyntaxError> {
        self.expect(Tok::Module, "`module`")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Var => globals.push(self.global()?),
                Tok::Pub | Tok::Fn => functions.push(self.function()?),
                other => {
                    return Err(self.error(format!(
                        "expected global or function declaration, found {other:?}"
                    )))
                }
            }
        }
        Ok(SourceModule {
            name,
            globals,
            functions,
        })
    }

    fn global(&mut self) -> Result<GlobalDecl, SyntaxError> {
        self.expect(Tok::Var, "`var`")?;
        let name = self.ident()?;
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.value_type()?;
        let init = if *self.peek() == Tok::Assign {
            self.bump();
            self.literal()?
        } else {
            Literal::zero_of(ty).ok_or_else(|| self.error("globals cannot be void"))?
        };
        self.end_of_statement()?;
        Ok(GlobalDecl { name, ty, init })
    }

    /// A literal, optionally preceded by a minus sign for numbers.
    pub(crate) fn literal(&mut self) -> Result<Literal, SyntaxError> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let lit = match self.peek().clone() {
            Tok::Int(v) => Literal::Int(if negative { -v } else { v }),
            Tok::Float(v) => Literal::Float(if negative { -v } else { v }),
            Tok::True if !negative => Literal::Bool(true),
            Tok::False if !negative => Literal::Bool(false),
            Tok::Str(s) if !negative => Literal::Str(Arc::from(s.as_str())),
            other => return Err(self.error(format!("expected literal, found {other:?}"))),
        };
        self.bump();
        Ok(lit)
    }

    fn function(&mut self) -> Result<FunctionDef, SyntaxError> {
        let public = if *self.peek() == Tok::Pub {
            self.bump();
            true
        } else {
            false
        };
        self.expect(Tok::Fn, "`fn`")?;
        let name = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let pname = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.value_type()?;
                params.push(Param { name: pname, ty });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let ret = if *self.peek() == Tok::Arrow {
            self.bump();
            self.value_type()?
        } else {
            ValueType::Void
        };
        let body = self.block()?;
        Ok(FunctionDef {
            name,
            public,
            params,
            ret,
            body,
        })
    }

    /// `{ stmt* }`
    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut body = Vec::new();
        loop {
            self.skip_newlines();
            if *self.peek() == Tok::RBrace {
                self.bump();
                return Ok(body);
            }
            if *self.peek() == Tok::Eof {
                return Err(self.error("unexpected end of input inside block"));
            }
            body.push(self.statement()?);
        }
    }

    fn end_of_statement(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Newline | Tok::Semi => {
                self.bump();
                Ok(())
            }
            Tok::RBrace | Tok::Eof => Ok(()),
            other => Err(self.error(format!("expected end of statement, found {other:?}"))),
        }
    }

    pub(crate) fn statement(&mut self) -> Result<Stmt, SyntaxError> {
        let kind = match self.peek().clone() {
            Tok::Var => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.value_type()?;
                if ty == ValueType::Void {
                    return Err(self.error("variables cannot be void"));
                }
                let init = if *self.peek() == Tok::Assign {
                    self.bump();
                    self.expr()?
                } else {
                    Expr::Lit(Literal::zero_of(ty).expect("non-void"))
                };
                self.end_of_statement()?;
                StmtKind::VarDecl { name, ty, init }
            }
            Tok::If => return self.if_statement(),
            Tok::While => {
                self.bump();
                let cond = self.expr()?;
                let body = self.block()?;
                self.end_of_statement()?;
                StmtKind::While { cond, body }
            }
            Tok::Return => {
                self.bump();
                let value = match self.peek() {
                    Tok::Newline | Tok::Semi | Tok::RBrace | Tok::Eof => None,
                    _ => Some(self.expr()?),
                };
                self.end_of_statement()?;
                StmtKind::Return(value)
            }
            Tok::Break => {
                self.bump();
                self.end_of_statement()?;
                StmtKind::Break
            }
            Tok::Continue => {
                self.bump();
                self.end_of_statement()?;
                StmtKind::Continue
            }
            Tok::LBrace => {
                let body = self.block()?;
                self.end_of_statement()?;
                StmtKind::Block(body)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                match self.peek() {
                    Tok::Assign => {
                        self.bump();
                        let value = self.expr()?;
                        self.end_of_statement()?;
                        StmtKind::Assign {
                            target: name,
                            value,
                        }
                    }
                    Tok::LParen => {
                        let args = self.call_args()?;
                        self.end_of_statement()?;
                        StmtKind::Call(name, args)
                    }
                    other => {
                        return Err(self.error(format!(
                            "expected `=` or `(` after identifier, found {other:?}"
                        )))
                    }
                }
            }
            other => return Err(self.error(format!("expected statement, found {other:?}"))),
        };
        Ok(Stmt::new(kind))
    }

    fn if_statement(&mut self) -> Result<Stmt, SyntaxError> {
        self.expect(Tok::If, "`if`")?;
        let cond = self.expr()?;
        let then_body = self.block()?;
        let else_body = if *self.peek() == Tok::Else {
            self.bump();
            if *self.peek() == Tok::If {
                Some(vec![self.if_statement()?])
            } else {
                let b = self.block()?;
                self.end_of_statement()?;
                Some(b)
            }
        } else {
            self.end_of_statement()?;
            None
        };
        Ok(Stmt::new(StmtKind::If {
            cond,
            then_body,
            else_body,
        }))
    }

    pub(crate) fn call_args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(args)
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            Tok::Percent => BinaryOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Tok::Minus => {
                // `-<number>` folds into a negative literal
                match self.peek_at(1).clone() {
                    Tok::Int(v) => {
                        self.bump();
                        self.bump();
                        Ok(Expr::Lit(Literal::Int(-v)))
                    }
                    Tok::Float(v) => {
                        self.bump();
                        self.bump();
                        Ok(Expr::Lit(Literal::Float(-v)))
                    }
                    _ => {
                        self.bump();
                        Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
                    }
                }
            }
            Tok::Bang => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Lit(Literal::Int(v)))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr::Lit(Literal::Float(v)))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Lit(Literal::Bool(true)))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Lit(Literal::Bool(false)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Literal::Str(Arc::from(s.as_str()))))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if *self.peek() == Tok::LParen {
                    Ok(Expr::Call(name, self.call_args()?))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => Err(self.error(format!("expected expression, found {other:?}"))),
        }
    }
}

/// Parses canonical (or free-form) MiniLang source into a program with
/// statement ids assigned in source order.
pub fn parse_program(source: &str) -> Result<Program, SyntaxError> {
    Parser::new(source)?.program()
}

/// Parses a single statement, as used in edit scripts. Multi-line and
/// single-line (`;`-separated) forms are both accepted.
pub fn parse_statement(source: &str) -> Result<Stmt, SyntaxError> {
    let mut p = Parser::new(source)?;
    p.skip_newlines();
    let stmt = p.statement()?;
    p.skip_newlines();
    if *p.peek() != Tok::Eof {
        return Err(p.error("trailing input after statement"));
    }
    Ok(stmt)
}

pub fn parse_expr(source: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.skip_newlines();
    if *p.peek() != Tok::Eof {
        return Err(p.error("trailing input after expression"));
    }
    Ok(e)
}
