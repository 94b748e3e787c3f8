// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::ParseError;

/// Storage class of a program variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarType {
    Int,
    Float,
    IntArray(usize),
}

impl VarType {
    pub fn of(ty: Type, size: Option<usize>) -> VarType {
        match (ty, size) {
            (_, Some(n)) => VarType::IntArray(n),
            (Type::Float, None) => VarType::Float,
            _ => VarType::Int,
        }
    }
}

/// Type of an expression value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExprType {
    Int,
    Real,
    Bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarInfo {
    pub ty: VarType,
    pub is_param: bool,
    /// Position of the declaration within the function, parameters first.
    pub order: usize,
}

/// Variables of one function, keyed by their (unique) resolved names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeEnv {
    pub vars: BTreeMap<String, VarInfo>,
    pub ret: Option<Type>,
    /// Return types of every function in the program, for calls.
    pub functions: BTreeMap<String, Type>,
}

impl TypeEnv {
    pub fn of_function(ast: &Ast, f: &Function) -> TypeEnv {
        let mut vars = BTreeMap::new();
        for (i, p) in f.params.iter().enumerate() {
            vars.insert(p.name.clone(), VarInfo { ty: VarType::of(p.ty, None), is_param: true, order: i });
        }
        let mut order = f.params.len();
        f.walk(&mut |s| {
            if let StmtKind::Decl { ty, name, size, .. } = &s.kind {
                vars.insert(name.clone(), VarInfo { ty: VarType::of(*ty, *size), is_param: false, order });
                order += 1;
            }
        });
        let functions = ast.functions.iter().map(|g| (g.name.clone(), g.ret_ty)).collect();
        TypeEnv { vars, ret: Some(f.ret_ty), functions }
    }

    pub fn var_type(&self, name: &str) -> Option<VarType> {
        self.vars.get(name).map(|v| v.ty)
    }

    /// Variables in declaration order.
    pub fn ordered(&self) -> Vec<(&String, &VarInfo)> {
        let mut v: Vec<_> = self.vars.iter().collect();
        v.sort_by_key(|(_, info)| info.order);
        v
    }

    pub fn expr_type(&self, e: &Expr) -> Result<ExprType, String> {
        Ok(match e {
            Expr::Int(_) => ExprType::Int,
            Expr::Real(_) => ExprType::Real,
            Expr::Bool(_) => ExprType::Bool,
            Expr::Var(n) => match self.var_type(n) {
                Some(VarType::Int) => ExprType::Int,
                Some(VarType::Float) => ExprType::Real,
                Some(VarType::IntArray(_)) => return Err(format!("array `{n}` used as a value")),
                None => return Err(format!("unknown variable `{n}`")),
            },
            Expr::Index(n, i) => {
                if !matches!(self.var_type(n), Some(VarType::IntArray(_))) {
                    return Err(format!("`{n}` is not an array"));
                }
                if self.expr_type(i)? == ExprType::Real {
                    return Err("array index must be an integer".into());
                }
                ExprType::Int
            }
            Expr::Unary(UnOp::Not, inner) => {
                self.expr_type(inner)?;
                ExprType::Bool
            }
            Expr::Unary(UnOp::Neg, inner) => match self.expr_type(inner)? {
                ExprType::Real => ExprType::Real,
                _ => ExprType::Int,
            },
            Expr::Cast(Type::Float, inner) => {
                self.expr_type(inner)?;
                ExprType::Real
            }
            Expr::Cast(_, inner) => {
                self.expr_type(inner)?;
                ExprType::Int
            }
            Expr::Binary(op, l, r) => {
                let (lt, rt) = (self.expr_type(l)?, self.expr_type(r)?);
                if op.is_comparison() || op.is_logical() {
                    ExprType::Bool
                } else if *op == BinOp::Mod {
                    if lt == ExprType::Real || rt == ExprType::Real {
                        return Err("`%` needs integer operands".into());
                    }
                    ExprType::Int
                } else if lt == ExprType::Real || rt == ExprType::Real {
                    ExprType::Real
                } else {
                    ExprType::Int
                }
            }
            Expr::Call(name, args) => {
                for a in args {
                    self.expr_type(a)?;
                }
                match self.functions.get(name) {
                    Some(Type::Float) => ExprType::Real,
                    Some(_) => ExprType::Int,
                    None => return Err(format!("unknown function `{name}`")),
                }
            }
        })
    }
}

/// Rejects ill-typed expressions, e.g. `%` on reals.
pub fn typecheck(ast: &Ast) -> Result<(), ParseError> {
    for f in &ast.functions {
        let env = TypeEnv::of_function(ast, f);
        let mut err = None;
        let check = |e: &Expr, span: Span, err: &mut Option<ParseError>| {
            if err.is_none() {
                if let Err(message) = env.expr_type(e) {
                    *err = Some(ParseError::Semantic { line: span.line, col: span.col, message });
                }
            }
        };
        f.walk(&mut |s| {
            let span = s.span;
            match &s.kind {
                StmtKind::Decl { init: Some(Rhs::Expr(e)), .. } => check(e, span, &mut err),
                StmtKind::Assign { target, value, op } => {
                    if let LValue::Index(_, i) = target {
                        check(i, span, &mut err);
                    }
                    if let Some(Rhs::Expr(e)) = value {
                        check(e, span, &mut err);
                    }
                    if *op == AssignOp::Mod && env.var_type(target.name()) == Some(VarType::Float) && err.is_none() {
                        err = Some(ParseError::Semantic {
                            line: span.line,
                            col: span.col,
                            message: "`%=` needs an integer target".into(),
                        });
                    }
                }
                StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => check(cond, span, &mut err),
                StmtKind::For { cond: Some(c), .. } => check(c, span, &mut err),
                StmtKind::Return(Some(e)) | StmtKind::Print(e) | StmtKind::Expr(e) => check(e, span, &mut err),
                _ => {}
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}
