// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Identifies a statement within one parsed program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StmtId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Type {
    Int,
    Float,
    Void,
}

impl Type {
    pub fn keyword(self) -> &'static str {
        match self {
            Type::Int => "int",
            Type::Float => "float",
            Type::Void => "void",
        }
    }
}

/// Labels carried by syntax nodes that open a control-flow automaton state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    FuncEntry,
    LoopEntry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    /// The comparison with the opposite truth value, e.g. `<` for `>=`.
    pub fn negated_comparison(self) -> Option<BinOp> {
        Some(match self {
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    /// Real literal kept in its decimal spelling so it can be read exactly.
    Real(String),
    Bool(bool),
    Var(String),
    Index(String, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Cast(Type, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Logical negation, pushing through comparisons and literals.
    pub fn negate(&self) -> Expr {
        match self {
            Expr::Bool(b) => Expr::Bool(!b),
            Expr::Unary(UnOp::Not, inner) => (**inner).clone(),
            Expr::Binary(op, l, r) if op.is_comparison() => {
                Expr::Binary(op.negated_comparison().unwrap(), l.clone(), r.clone())
            }
            other => Expr::Unary(UnOp::Not, Box::new(other.clone())),
        }
    }

    /// Calls `f` on every variable name read by this expression.
    pub fn visit_vars(&self, f: &mut dyn FnMut(&str)) {
        match self {
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => {}
            Expr::Var(v) => f(v),
            Expr::Index(a, i) => {
                f(a);
                i.visit_vars(f);
            }
            Expr::Unary(_, e) | Expr::Cast(_, e) => e.visit_vars(f),
            Expr::Binary(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| out.push(v.to_string()));
        out
    }

    /// Renames variables through `map`; names absent from the map are kept.
    pub fn rename(&self, map: &dyn Fn(&str) -> Option<String>) -> Expr {
        let r = |e: &Expr| Box::new(e.rename(map));
        match self {
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(v) => Expr::Var(map(v).unwrap_or_else(|| v.clone())),
            Expr::Index(a, i) => Expr::Index(map(a).unwrap_or_else(|| a.clone()), r(i)),
            Expr::Unary(op, e) => Expr::Unary(*op, r(e)),
            Expr::Cast(t, e) => Expr::Cast(*t, r(e)),
            Expr::Binary(op, l, rr) => Expr::Binary(*op, r(l), r(rr)),
            Expr::Call(name, args) => Expr::Call(name.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    pub fn has_call(&self) -> bool {
        match self {
            Expr::Call(..) => true,
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) | Expr::Var(_) => false,
            Expr::Index(_, e) | Expr::Unary(_, e) | Expr::Cast(_, e) => e.has_call(),
            Expr::Binary(_, l, r) => l.has_call() || r.has_call(),
        }
    }
}

/// Right-hand side of an assignment or initializer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rhs {
    Expr(Expr),
    Read,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Inc,
    Dec,
}

impl AssignOp {
    pub fn binop(self) -> Option<BinOp> {
        Some(match self {
            AssignOp::Add | AssignOp::Inc => BinOp::Add,
            AssignOp::Sub | AssignOp::Dec => BinOp::Sub,
            AssignOp::Mul => BinOp::Mul,
            AssignOp::Div => BinOp::Div,
            AssignOp::Mod => BinOp::Mod,
            AssignOp::Set => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LValue {
    Var(String),
    Index(String, Expr),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n) | LValue::Index(n, _) => n,
        }
    }

    pub fn as_expr(&self) -> Expr {
        match self {
            LValue::Var(n) => Expr::Var(n.clone()),
            LValue::Index(n, i) => Expr::Index(n.clone(), Box::new(i.clone())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stmt {
    pub id: StmtId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum StmtKind {
    Decl { ty: Type, name: String, size: Option<usize>, init: Option<Rhs> },
    Assign { target: LValue, op: AssignOp, value: Option<Rhs> },
    If { cond: Expr, then_branch: Box<Stmt>, else_branch: Option<Box<Stmt>> },
    While { cond: Expr, body: Box<Stmt> },
    For { init: Option<Box<Stmt>>, cond: Option<Expr>, step: Option<Box<Stmt>>, body: Box<Stmt> },
    Break,
    Return(Option<Expr>),
    Print(Expr),
    Block(Vec<Stmt>),
    /// Expression evaluated for its effect, i.e. a call.
    Expr(Expr),
    Empty,
}

impl Stmt {
    pub fn label(&self) -> Option<Label> {
        match self.kind {
            StmtKind::While { .. } | StmtKind::For { .. } => Some(Label::LoopEntry),
            _ => None,
        }
    }

    /// Calls `f` on this statement and every nested statement, preorder.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
            StmtKind::While { body, .. } => body.walk(f),
            StmtKind::For { init, step, body, .. } => {
                if let Some(i) = init {
                    i.walk(f);
                }
                if let Some(s) = step {
                    s.walk(f);
                }
                body.walk(f);
            }
            StmtKind::Block(stmts) => stmts.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Stmt)) {
        f(self);
        match &mut self.kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.walk_mut(f);
                if let Some(e) = else_branch {
                    e.walk_mut(f);
                }
            }
            StmtKind::While { body, .. } => body.walk_mut(f),
            StmtKind::For { init, step, body, .. } => {
                if let Some(i) = init {
                    i.walk_mut(f);
                }
                if let Some(s) = step {
                    s.walk_mut(f);
                }
                body.walk_mut(f);
            }
            StmtKind::Block(stmts) => stmts.iter_mut().for_each(|s| s.walk_mut(f)),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Param {
    pub ty: Type,
    pub name: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Function {
    pub ret_ty: Type,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl Function {
    pub fn label(&self) -> Label {
        Label::FuncEntry
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        self.body.iter().for_each(|s| s.walk(f));
    }

    pub fn loop_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |s| {
            if s.label() == Some(Label::LoopEntry) {
                n += 1
            }
        });
        n
    }
}

/// A parsed and resolved program: one or more function definitions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ast {
    pub functions: Vec<Function>,
    /// Next unused statement id, for passes that insert statements.
    pub next_id: u32,
}

impl Ast {
    /// The function executed by the interpreter: `main` if present, else the first.
    pub fn entry_function(&self) -> &Function {
        self.functions.iter().find(|f| f.name == "main").unwrap_or(&self.functions[0])
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn count_labels(&self, label: Label) -> usize {
        match label {
            Label::FuncEntry => self.functions.len(),
            Label::LoopEntry => self.functions.iter().map(Function::loop_count).sum(),
        }
    }

    pub fn fresh_id(&mut self) -> StmtId {
        let id = StmtId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn find_stmt(&self, id: StmtId) -> Option<&Stmt> {
        let mut found = None;
        for f in &self.functions {
            f.walk(&mut |s| {
                if s.id == id && found.is_none() {
                    found = Some(s)
                }
            });
        }
        found
    }
}
