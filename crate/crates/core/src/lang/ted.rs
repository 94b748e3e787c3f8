// SPDX-License-Identifier: Apache-2.0

//! AST size and ordered tree edit distance with unit costs.

use super::ast::*;

/// Ordered labeled tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: impl Into<String>) -> Tree {
        Tree { label: label.into(), children: Vec::new() }
    }

    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree { label: label.into(), children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }
}

pub fn ast_tree(ast: &Ast) -> Tree {
    Tree::node("program", ast.functions.iter().map(function_tree).collect())
}

fn function_tree(f: &Function) -> Tree {
    let mut children: Vec<Tree> =
        f.params.iter().map(|p| Tree::leaf(format!("param {} {}", p.ty.keyword(), p.name))).collect();
    children.extend(f.body.iter().map(stmt_tree));
    Tree::node(format!("function {} {}", f.ret_ty.keyword(), f.name), children)
}

fn opt_stmt(s: &Option<Box<Stmt>>) -> Tree {
    s.as_ref().map(|s| stmt_tree(s)).unwrap_or_else(|| Tree::leaf("none"))
}

fn rhs_tree(r: &Rhs) -> Tree {
    match r {
        Rhs::Read => Tree::leaf("read"),
        Rhs::Expr(e) => expr_tree(e),
    }
}

fn lvalue_tree(lv: &LValue) -> Tree {
    match lv {
        LValue::Var(n) => Tree::leaf(format!("var {n}")),
        LValue::Index(n, i) => Tree::node(format!("index {n}"), vec![expr_tree(i)]),
    }
}

fn stmt_tree(s: &Stmt) -> Tree {
    match &s.kind {
        StmtKind::Decl { ty, name, size, init } => {
            let label = match size {
                Some(n) => format!("decl {} {name}[{n}]", ty.keyword()),
                None => format!("decl {} {name}", ty.keyword()),
            };
            Tree::node(label, init.iter().map(rhs_tree).collect())
        }
        StmtKind::Assign { target, op, value } => {
            let mut children = vec![lvalue_tree(target)];
            children.extend(value.iter().map(rhs_tree));
            Tree::node(format!("assign {op:?}"), children)
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            let mut children = vec![expr_tree(cond), stmt_tree(then_branch)];
            if let Some(e) = else_branch {
                children.push(stmt_tree(e));
            }
            Tree::node("if", children)
        }
        StmtKind::While { cond, body } => Tree::node("while", vec![expr_tree(cond), stmt_tree(body)]),
        StmtKind::For { init, cond, step, body } => Tree::node(
            "for",
            vec![
                opt_stmt(init),
                cond.as_ref().map(expr_tree).unwrap_or_else(|| Tree::leaf("none")),
                opt_stmt(step),
                stmt_tree(body),
            ],
        ),
        StmtKind::Break => Tree::leaf("break"),
        StmtKind::Return(e) => Tree::node("return", e.iter().map(expr_tree).collect()),
        StmtKind::Print(e) => Tree::node("print", vec![expr_tree(e)]),
        StmtKind::Block(stmts) => Tree::node("block", stmts.iter().map(stmt_tree).collect()),
        StmtKind::Expr(e) => Tree::node("expr", vec![expr_tree(e)]),
        StmtKind::Empty => Tree::leaf("empty"),
    }
}

fn expr_tree(e: &Expr) -> Tree {
    match e {
        Expr::Int(v) => Tree::leaf(format!("int {v}")),
        Expr::Real(t) => Tree::leaf(format!("real {t}")),
        Expr::Bool(b) => Tree::leaf(format!("bool {b}")),
        Expr::Var(n) => Tree::leaf(format!("var {n}")),
        Expr::Index(n, i) => Tree::node(format!("index {n}"), vec![expr_tree(i)]),
        Expr::Unary(op, inner) => Tree::node(format!("{op:?}"), vec![expr_tree(inner)]),
        Expr::Binary(op, l, r) => Tree::node(op.symbol(), vec![expr_tree(l), expr_tree(r)]),
        Expr::Call(n, args) => Tree::node(format!("call {n}"), args.iter().map(expr_tree).collect()),
        Expr::Cast(t, inner) => Tree::node(format!("cast {}", t.keyword()), vec![expr_tree(inner)]),
    }
}

/// Number of nodes in the syntax tree.
pub fn ast_size(ast: &Ast) -> usize {
    ast_tree(ast).size()
}

pub fn tree_edit_distance(a: &Ast, b: &Ast) -> usize {
    tree_distance(&ast_tree(a), &ast_tree(b))
}

struct Postorder<'a> {
    labels: Vec<&'a str>,
    /// Leftmost leaf descendant of each node, in postorder indices.
    lml: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(t: &'a Tree) -> Self {
        let mut p = Postorder { labels: Vec::new(), lml: Vec::new(), keyroots: Vec::new() };
        p.visit(t);
        let n = p.labels.len();
        // keyroots: nodes whose leftmost leaf is not shared with a later node
        let mut seen = vec![false; n];
        for i in (0..n).rev() {
            if !seen[p.lml[i]] {
                seen[p.lml[i]] = true;
                p.keyroots.push(i);
            }
        }
        p.keyroots.sort_unstable();
        p
    }

    fn visit(&mut self, t: &'a Tree) -> usize {
        let mut first = None;
        for c in &t.children {
            let l = self.visit(c);
            first.get_or_insert(l);
        }
        let idx = self.labels.len();
        self.labels.push(&t.label);
        self.lml.push(first.unwrap_or(idx));
        self.lml[idx]
    }
}

/// Zhang-Shasha edit distance; insert, delete and relabel each cost 1.
pub fn tree_distance(a: &Tree, b: &Tree) -> usize {
    let (pa, pb) = (Postorder::new(a), Postorder::new(b));
    let (n, m) = (pa.labels.len(), pb.labels.len());
    let mut td = vec![vec![0usize; m]; n];
    let mut fd = vec![vec![0usize; m + 1]; n + 1];
    for &i in &pa.keyroots {
        for &j in &pb.keyroots {
            let (li, lj) = (pa.lml[i], pb.lml[j]);
            // fd is indexed with an offset: row r stands for postorder node li + r - 1
            fd[0][0] = 0;
            for x in li..=i {
                fd[x - li + 1][0] = fd[x - li][0] + 1;
            }
            for y in lj..=j {
                fd[0][y - lj + 1] = fd[0][y - lj] + 1;
            }
            for x in li..=i {
                for y in lj..=j {
                    let (r, c) = (x - li + 1, y - lj + 1);
                    let del = fd[r - 1][c] + 1;
                    let ins = fd[r][c - 1] + 1;
                    if pa.lml[x] == li && pb.lml[y] == lj {
                        let rel = fd[r - 1][c - 1] + usize::from(pa.labels[x] != pb.labels[y]);
                        fd[r][c] = del.min(ins).min(rel);
                        td[x][y] = fd[r][c];
                    } else {
                        let (r2, c2) = (pa.lml[x] - li, pb.lml[y] - lj);
                        fd[r][c] = del.min(ins).min(fd[r2][c2] + td[x][y]);
                    }
                }
            }
        }
    }
    td[n - 1][m - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(label: &str, children: Vec<Tree>) -> Tree {
        Tree::node(label, children)
    }

    #[test]
    fn classic_example() {
        // f(d(a, c(b)), e) vs f(c(d(a, b)), e): distance 2
        let a = t("f", vec![t("d", vec![t("a", vec![]), t("c", vec![t("b", vec![])])]), t("e", vec![])]);
        let b = t("f", vec![t("c", vec![t("d", vec![t("a", vec![]), t("b", vec![])])]), t("e", vec![])]);
        assert_eq!(tree_distance(&a, &b), 2);
    }

    #[test]
    fn single_nodes() {
        assert_eq!(tree_distance(&Tree::leaf("a"), &Tree::leaf("a")), 0);
        assert_eq!(tree_distance(&Tree::leaf("a"), &Tree::leaf("b")), 1);
        assert_eq!(tree_distance(&Tree::leaf("a"), &t("a", vec![Tree::leaf("b"), Tree::leaf("c")])), 2);
    }
}
