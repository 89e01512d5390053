//! Canonical text form. Every statement starts on its own line, so a
//! statement is identified by the line its header is printed on.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for (i, module) in program.modules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_module(module, &mut out);
    }
    out
}

fn print_module(module: &SourceModule, out: &mut String) {
    let _ = writeln!(out, "module {} {{", module.name);
    for g in &module.globals {
        let _ = writeln!(out, "{INDENT}var {}: {} = {}", g.name, g.ty, literal(&g.init));
    }
    for (i, func) in module.functions.iter().enumerate() {
        if i > 0 || !module.globals.is_empty() {
            out.push('\n');
        }
        print_function(func, out);
    }
    out.push_str("}\n");
}

pub fn function_header(func: &FunctionDef) -> String {
    let params: Vec<String> = func
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.ty))
        .collect();
    let mut s = format!(
        "{}fn {}({})",
        if func.public { "pub " } else { "" },
        func.name,
        params.join(", ")
    );
    if func.ret != ValueType::Void {
        let _ = write!(s, " -> {}", func.ret);
    }
    s
}

fn print_function(func: &FunctionDef, out: &mut String) {
    let _ = writeln!(out, "{INDENT}{} {{", function_header(func));
    print_block(&func.body, 2, out);
    let _ = writeln!(out, "{INDENT}}}");
}

fn print_block(body: &[Stmt], depth: usize, out: &mut String) {
    for s in body {
        print_stmt_at(s, depth, out);
    }
}

fn pad(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn print_stmt_at(stmt: &Stmt, depth: usize, out: &mut String) {
    pad(depth, out);
    match &stmt.kind {
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            let _ = writeln!(out, "if {} {{", expr(cond));
            print_block(then_body, depth + 1, out);
            pad(depth, out);
            match else_body {
                Some(eb) => {
                    out.push_str("} else {\n");
                    print_block(eb, depth + 1, out);
                    pad(depth, out);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while {} {{", expr(cond));
            print_block(body, depth + 1, out);
            pad(depth, out);
            out.push_str("}\n");
        }
        StmtKind::Block(body) => {
            out.push_str("{\n");
            print_block(body, depth + 1, out);
            pad(depth, out);
            out.push_str("}\n");
        }
        _ => {
            out.push_str(&simple_stmt(stmt));
            out.push('\n');
        }
    }
}

/// Multi-line canonical rendering of a single statement at depth zero.
pub fn print_stmt(stmt: &Stmt) -> String {
    let mut out = String::new();
    print_stmt_at(stmt, 0, &mut out);
    out
}

/// Single-line rendering; compound statements use `;` separators.
pub fn stmt_inline(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            let mut s = format!("if {} {}", expr(cond), inline_block(then_body));
            if let Some(eb) = else_body {
                let _ = write!(s, " else {}", inline_block(eb));
            }
            s
        }
        StmtKind::While { cond, body } => format!("while {} {}", expr(cond), inline_block(body)),
        StmtKind::Block(body) => inline_block(body),
        _ => simple_stmt(stmt),
    }
}

fn inline_block(body: &[Stmt]) -> String {
    if body.is_empty() {
        return "{ }".to_string();
    }
    let inner: Vec<String> = body.iter().map(stmt_inline).collect();
    format!("{{ {} }}", inner.join("; "))
}

fn simple_stmt(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::VarDecl { name, ty, init } => format!("var {name}: {ty} = {}", expr(init)),
        StmtKind::Assign { target, value } => format!("{target} = {}", expr(value)),
        StmtKind::Return(Some(e)) => format!("return {}", expr(e)),
        StmtKind::Return(None) => "return".to_string(),
        StmtKind::Break => "break".to_string(),
        StmtKind::Continue => "continue".to_string(),
        StmtKind::Call(name, args) => call(name, args),
        _ => stmt_inline(stmt),
    }
}

pub fn literal(lit: &Literal) -> String {
    match lit {
        Literal::Int(v) => v.to_string(),
        Literal::Float(v) => format!("{v:?}"),
        Literal::Bool(v) => v.to_string(),
        Literal::Str(s) => {
            let mut out = String::with_capacity(s.len() + 2);
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
    }
}

fn call(name: &Ident, args: &[Expr]) -> String {
    let args: Vec<String> = args.iter().map(expr).collect();
    format!("{name}({})", args.join(", "))
}

pub fn expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

const UNARY_PREC: u8 = 7;

fn write_expr(e: &Expr, min_prec: u8, out: &mut String) {
    match e {
        Expr::Lit(l) => out.push_str(&literal(l)),
        Expr::Var(v) => out.push_str(v),
        Expr::Call(name, args) => out.push_str(&call(name, args)),
        Expr::Unary(op, inner) => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            });
            // `-5` would re-parse as a negative literal, so keep the parentheses
            let numeric_lit = matches!(**inner, Expr::Lit(Literal::Int(_) | Literal::Float(_)));
            if *op == UnaryOp::Neg && numeric_lit {
                out.push('(');
                write_expr(inner, 0, out);
                out.push(')');
            } else {
                write_expr(inner, UNARY_PREC, out);
            }
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let paren = p < min_prec;
            if paren {
                out.push('(');
            }
            write_expr(l, p, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(r, p + 1, out);
            if paren {
                out.push(')');
            }
        }
    }
}
