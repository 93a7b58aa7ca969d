//! The analyzed language: syntax tree, concrete syntax, and labeling.
//!
//! Profile annotations are part of the syntax: every `if` carries the
//! probability that its condition holds (`@3/5`), every `while` an upper
//! bound on its trip count (`@100`), every `parif` arm a guard probability,
//! and every `parfor` its replication count.

mod ast;
mod parser;
mod render;

pub use ast::{
    AExpr, ArithOp, BExpr, BoolOp, CmpOp, Label, ParArm, Program, Span, Stmt, StmtKind, VarId,
    VarName, VarTable,
};
pub use parser::{parse, ParseError};
pub use render::{render, render_aexpr, render_bexpr, stmt_head};

/// Every variable read, written, address-taken, or dereferenced in `stmt`,
/// once each, in order of first occurrence.
pub fn collect_vars(stmt: &Stmt) -> Vec<VarName> {
    let mut table = VarTable::new();
    collect_stmt(stmt, &mut table);
    table.names().to_vec()
}

fn collect_stmt(stmt: &Stmt, out: &mut VarTable) {
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            out.insert(target.clone());
            collect_aexpr(value, out);
        }
        StmtKind::AddrOf { target, source } => {
            out.insert(target.clone());
            out.insert(source.clone());
        }
        StmtKind::Store { pointer, value } => {
            out.insert(pointer.clone());
            collect_aexpr(value, out);
        }
        StmtKind::Load { target, pointer } => {
            out.insert(target.clone());
            out.insert(pointer.clone());
        }
        StmtKind::Skip => {}
        StmtKind::Seq(stmts) | StmtKind::Par(stmts) => {
            for s in stmts {
                collect_stmt(s, out);
            }
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            collect_bexpr(cond, out);
            collect_stmt(then_branch, out);
            collect_stmt(else_branch, out);
        }
        StmtKind::While { cond, body, .. } => {
            collect_bexpr(cond, out);
            collect_stmt(body, out);
        }
        StmtKind::ParIf(arms) => {
            for arm in arms {
                collect_bexpr(&arm.cond, out);
                collect_stmt(&arm.body, out);
            }
        }
        StmtKind::ParFor { body, .. } => collect_stmt(body, out),
    }
}

fn collect_aexpr(e: &AExpr, out: &mut VarTable) {
    match e {
        AExpr::Num(_) => {}
        AExpr::Var(x) => {
            out.insert(x.clone());
        }
        AExpr::Bin(l, _, r) => {
            collect_aexpr(l, out);
            collect_aexpr(r, out);
        }
    }
}

fn collect_bexpr(b: &BExpr, out: &mut VarTable) {
    match b {
        BExpr::True | BExpr::False => {}
        BExpr::Not(inner) => collect_bexpr(inner, out),
        BExpr::Cmp(l, _, r) => {
            collect_aexpr(l, out);
            collect_aexpr(r, out);
        }
        BExpr::Logic(l, _, r) => {
            collect_bexpr(l, out);
            collect_bexpr(r, out);
        }
    }
}
