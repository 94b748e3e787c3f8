// SPDX-License-Identifier: Apache-2.0

//! Canonical source rendering. Structure is preserved exactly, so
//! `parse(render(ast))` yields the same tree as `ast`.

use std::fmt::Write;

use super::ast::*;

pub fn render(ast: &Ast) -> String {
    let mut out = String::new();
    for (i, f) in ast.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        render_function(f, &mut out);
    }
    out
}

fn render_function(f: &Function, out: &mut String) {
    let params: Vec<String> = f.params.iter().map(|p| format!("{} {}", p.ty.keyword(), p.name)).collect();
    let _ = writeln!(out, "{} {}({}) {{", f.ret_ty.keyword(), f.name, params.join(", "));
    for s in &f.body {
        render_stmt(s, 1, out);
    }
    out.push_str("}\n");
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

/// Renders a statement without indentation or trailing newline, when it fits on one line.
pub fn render_simple(s: &Stmt) -> Option<String> {
    Some(match &s.kind {
        StmtKind::Decl { ty, name, size, init } => {
            let mut t = format!("{} {}", ty.keyword(), name);
            if let Some(n) = size {
                let _ = write!(t, "[{n}]");
            }
            if let Some(init) = init {
                let _ = write!(t, " = {}", render_rhs(init));
            }
            t
        }
        StmtKind::Assign { target, op, value } => {
            let lhs = render_lvalue(target);
            match (op, value) {
                (AssignOp::Inc, _) => format!("{lhs}++"),
                (AssignOp::Dec, _) => format!("{lhs}--"),
                (op, Some(v)) => {
                    let sym = match op {
                        AssignOp::Set => "=",
                        AssignOp::Add => "+=",
                        AssignOp::Sub => "-=",
                        AssignOp::Mul => "*=",
                        AssignOp::Div => "/=",
                        AssignOp::Mod => "%=",
                        AssignOp::Inc | AssignOp::Dec => unreachable!(),
                    };
                    format!("{lhs} {sym} {}", render_rhs(v))
                }
                (_, None) => format!("{lhs} = 0"),
            }
        }
        StmtKind::Expr(e) => render_expr(e),
        _ => return None,
    })
}

fn render_stmt(s: &Stmt, level: usize, out: &mut String) {
    if let Some(text) = render_simple(s) {
        indent(level, out);
        let _ = writeln!(out, "{text};");
        return;
    }
    match &s.kind {
        StmtKind::If { cond, then_branch, else_branch } => {
            indent(level, out);
            render_if(cond, then_branch, else_branch.as_deref(), level, out);
        }
        StmtKind::While { cond, body } => {
            indent(level, out);
            let _ = write!(out, "while ({})", render_expr(cond));
            render_body(body, level, out);
            out.push('\n');
        }
        StmtKind::For { init, cond, step, body } => {
            indent(level, out);
            let init = init.as_ref().and_then(|s| render_simple(s)).unwrap_or_default();
            let cond = cond.as_ref().map(render_expr).unwrap_or_default();
            let step = step.as_ref().and_then(|s| render_simple(s)).unwrap_or_default();
            let _ = write!(out, "for ({init}; {cond}; {step})");
            render_body(body, level, out);
            out.push('\n');
        }
        StmtKind::Break => {
            indent(level, out);
            out.push_str("break;\n");
        }
        StmtKind::Return(e) => {
            indent(level, out);
            match e {
                Some(e) => {
                    let _ = writeln!(out, "return {};", render_expr(e));
                }
                None => out.push_str("return;\n"),
            }
        }
        StmtKind::Print(e) => {
            indent(level, out);
            let _ = writeln!(out, "print({});", render_expr(e));
        }
        StmtKind::Block(stmts) => {
            indent(level, out);
            out.push_str("{\n");
            for s in stmts {
                render_stmt(s, level + 1, out);
            }
            indent(level, out);
            out.push_str("}\n");
        }
        StmtKind::Empty => {
            indent(level, out);
            out.push_str(";\n");
        }
        StmtKind::Decl { .. } | StmtKind::Assign { .. } | StmtKind::Expr(_) => unreachable!(),
    }
}

fn render_if(cond: &Expr, then_branch: &Stmt, else_branch: Option<&Stmt>, level: usize, out: &mut String) {
    let _ = write!(out, "if ({})", render_expr(cond));
    render_body(then_branch, level, out);
    match else_branch {
        None => out.push('\n'),
        Some(e) => {
            if matches!(then_branch.kind, StmtKind::Block(_)) {
                out.push(' ');
            } else {
                out.push('\n');
                indent(level, out);
            }
            out.push_str("else");
            match &e.kind {
                StmtKind::If { cond, then_branch, else_branch } => {
                    out.push(' ');
                    render_if(cond, then_branch, else_branch.as_deref(), level, out);
                }
                _ => {
                    render_body(e, level, out);
                    out.push('\n');
                }
            }
        }
    }
}

/// Renders a loop or branch body after its header; no trailing newline.
fn render_body(body: &Stmt, level: usize, out: &mut String) {
    match &body.kind {
        StmtKind::Block(stmts) => {
            out.push_str(" {\n");
            for s in stmts {
                render_stmt(s, level + 1, out);
            }
            indent(level, out);
            out.push('}');
        }
        _ => {
            out.push('\n');
            let mut inner = String::new();
            render_stmt(body, level + 1, &mut inner);
            out.push_str(inner.trim_end_matches('\n'));
        }
    }
}

pub fn render_lvalue(lv: &LValue) -> String {
    match lv {
        LValue::Var(n) => n.clone(),
        LValue::Index(n, i) => format!("{n}[{}]", render_expr(i)),
    }
}

pub fn render_rhs(r: &Rhs) -> String {
    match r {
        Rhs::Read => "read()".to_string(),
        Rhs::Expr(e) => render_expr(e),
    }
}

pub fn render_expr(e: &Expr) -> String {
    render_prec(e, 0)
}

fn render_prec(e: &Expr, ctx: u8) -> String {
    match e {
        Expr::Int(v) if *v < 0 && ctx > 0 => format!("({v})"),
        Expr::Int(v) => v.to_string(),
        Expr::Real(t) if t.starts_with('-') && ctx > 0 => format!("({t})"),
        Expr::Real(t) => t.clone(),
        Expr::Bool(b) => b.to_string(),
        Expr::Var(n) => n.clone(),
        Expr::Index(n, i) => format!("{n}[{}]", render_prec(i, 0)),
        Expr::Call(n, args) => {
            let args: Vec<String> = args.iter().map(|a| render_prec(a, 0)).collect();
            format!("{n}({})", args.join(", "))
        }
        Expr::Unary(UnOp::Neg, inner) => {
            let body = render_prec(inner, 7);
            if body.starts_with('-') {
                format!("-({body})")
            } else {
                format!("-{body}")
            }
        }
        Expr::Unary(UnOp::Not, inner) => format!("!{}", render_prec(inner, 7)),
        Expr::Cast(t, inner) => format!("({}) {}", t.keyword(), render_prec(inner, 7)),
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            // left-associative: the right operand needs parens at equal precedence
            let text = format!("{} {} {}", render_prec(l, p), op.symbol(), render_prec(r, p + 1));
            if p < ctx {
                format!("({text})")
            } else {
                text
            }
        }
    }
}
