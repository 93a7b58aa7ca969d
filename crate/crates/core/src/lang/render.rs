//! Canonical pretty-printer. `parse(render(p))` reproduces `p` exactly,
//! labels included. Probabilities are always written as reduced `a/b`.

use super::ast::{AExpr, ArithOp, BExpr, BoolOp, CmpOp, Program, Stmt, StmtKind};

const INDENT: &str = "    ";

pub fn render(program: &Program) -> String {
    let mut out = String::new();
    render_body(&program.body, 0, &mut out);
    out
}

fn render_body(stmt: &Stmt, depth: usize, out: &mut String) {
    match &stmt.kind {
        StmtKind::Seq(stmts) => {
            for s in stmts {
                render_stmt(s, depth, out);
            }
        }
        _ => render_stmt(stmt, depth, out),
    }
}

fn render_block(stmt: &Stmt, depth: usize, out: &mut String) {
    out.push_str("{\n");
    render_body(stmt, depth + 1, out);
    push_indent(depth, out);
    out.push('}');
}

fn push_indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn render_stmt(stmt: &Stmt, depth: usize, out: &mut String) {
    push_indent(depth, out);
    match &stmt.kind {
        StmtKind::Seq(_) => unreachable!("sequences are flattened into their parent block"),
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => {
            out.push_str(&stmt_head(stmt));
            out.push(' ');
            render_block(then_branch, depth, out);
            out.push_str(" else ");
            render_block(else_branch, depth, out);
        }
        StmtKind::While { body, .. } | StmtKind::ParFor { body, .. } => {
            out.push_str(&stmt_head(stmt));
            out.push(' ');
            render_block(body, depth, out);
        }
        StmtKind::Par(threads) => {
            out.push_str("par");
            for t in threads {
                out.push(' ');
                render_block(t, depth, out);
            }
        }
        StmtKind::ParIf(arms) => {
            out.push_str("parif");
            for arm in arms {
                out.push_str(&format!(" ({} @{}) ", render_bexpr(&arm.cond), arm.prob.to_fraction_string()));
                render_block(&arm.body, depth, out);
            }
        }
        _ => out.push_str(&stmt_head(stmt)),
    }
    out.push('\n');
}

/// One-line summary of a statement: the full text for primitive
/// statements, the header (without blocks) for compound ones.
pub fn stmt_head(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Assign { target, value } => format!("{target} := {};", render_aexpr(value)),
        StmtKind::AddrOf { target, source } => format!("{target} := &{source};"),
        StmtKind::Store { pointer, value } => format!("*{pointer} := {};", render_aexpr(value)),
        StmtKind::Load { target, pointer } => format!("{target} := *{pointer};"),
        StmtKind::Skip => "skip;".to_string(),
        StmtKind::Seq(stmts) => format!("<sequence of {}>", stmts.len()),
        StmtKind::If { cond, p_true, .. } => {
            format!("if ({}) @{}", render_bexpr(cond), p_true.to_fraction_string())
        }
        StmtKind::While {
            cond, trip_bound, ..
        } => format!("while ({}) @{trip_bound}", render_bexpr(cond)),
        StmtKind::Par(threads) => format!("par <{} threads>", threads.len()),
        StmtKind::ParIf(arms) => format!("parif <{} arms>", arms.len()),
        StmtKind::ParFor { count, .. } => format!("parfor @{count}"),
    }
}

fn arith_prec(op: ArithOp) -> u8 {
    match op {
        ArithOp::Add | ArithOp::Sub => 1,
        ArithOp::Mul => 2,
    }
}

pub fn render_aexpr(e: &AExpr) -> String {
    match e {
        AExpr::Num(n) if *n < 0 => format!("(0 - {})", n.unsigned_abs()),
        AExpr::Num(n) => n.to_string(),
        AExpr::Var(x) => x.to_string(),
        AExpr::Bin(l, op, r) => {
            let prec = arith_prec(*op);
            let left = match &**l {
                AExpr::Bin(_, lop, _) if arith_prec(*lop) < prec => format!("({})", render_aexpr(l)),
                _ => render_aexpr(l),
            };
            let right = match &**r {
                AExpr::Bin(_, rop, _) if arith_prec(*rop) <= prec => format!("({})", render_aexpr(r)),
                _ => render_aexpr(r),
            };
            format!("{left} {} {right}", op.symbol())
        }
    }
}

fn bool_prec(b: &BExpr) -> u8 {
    match b {
        BExpr::Logic(_, BoolOp::Or, _) => 1,
        BExpr::Logic(_, BoolOp::And, _) => 2,
        BExpr::Not(_) => 3,
        BExpr::Cmp(..) => 4,
        BExpr::True | BExpr::False => 5,
    }
}

pub fn render_bexpr(b: &BExpr) -> String {
    match b {
        BExpr::True => "true".to_string(),
        BExpr::False => "false".to_string(),
        BExpr::Not(inner) => {
            if bool_prec(inner) >= 3 {
                format!("!{}", render_bexpr(inner))
            } else {
                format!("!({})", render_bexpr(inner))
            }
        }
        BExpr::Cmp(l, op, r) => {
            let sym = match op {
                CmpOp::Eq => "==",
                CmpOp::Le => "<=",
            };
            format!("{} {sym} {}", render_aexpr(l), render_aexpr(r))
        }
        BExpr::Logic(l, op, r) => {
            let prec = bool_prec(b);
            let sym = match op {
                BoolOp::And => "&&",
                BoolOp::Or => "||",
            };
            let left = if bool_prec(l) < prec {
                format!("({})", render_bexpr(l))
            } else {
                render_bexpr(l)
            };
            let right = if bool_prec(r) <= prec {
                format!("({})", render_bexpr(r))
            } else {
                render_bexpr(r)
            };
            format!("{left} {sym} {right}")
        }
    }
}
