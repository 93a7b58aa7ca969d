//! Abstract syntax of the analyzed language.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::prob::Prob;

/// A program variable. Always matches `[A-Za-z_][A-Za-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Option<VarName> {
        let name = name.into();
        let mut chars = name.chars();
        let head_ok = chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if head_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            Some(VarName(name))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Dense index of a variable inside a [`VarTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// The finite, ordered variable set of a program (first-occurrence order).
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    names: Vec<VarName>,
    index: HashMap<VarName, VarId>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: impl IntoIterator<Item = VarName>) -> Self {
        let mut table = VarTable::new();
        for name in names {
            table.insert(name);
        }
        table
    }

    /// Inserts `name` if absent and returns its id.
    pub fn insert(&mut self, name: VarName) -> VarId {
        if let Some(&id) = self.index.get(&name) {
            return id;
        }
        let id = VarId(self.names.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    pub fn id(&self, name: &VarName) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        VarName::new(name).and_then(|n| self.id(&n))
    }

    pub fn name(&self, id: VarId) -> &VarName {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[VarName] {
        &self.names
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len()).map(VarId)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for VarTable {}

/// Program-point identifier, assigned in preorder starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based source position of a statement's first token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    pub fn apply(self, lhs: i64, rhs: i64) -> i64 {
        match self {
            ArithOp::Add => lhs.wrapping_add(rhs),
            ArithOp::Sub => lhs.wrapping_sub(rhs),
            ArithOp::Mul => lhs.wrapping_mul(rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AExpr {
    Num(i64),
    Var(VarName),
    Bin(Box<AExpr>, ArithOp, Box<AExpr>),
}

impl AExpr {
    pub fn var(name: &str) -> AExpr {
        AExpr::Var(VarName::new(name).expect("valid identifier"))
    }

    pub fn bin(lhs: AExpr, op: ArithOp, rhs: AExpr) -> AExpr {
        AExpr::Bin(Box::new(lhs), op, Box::new(rhs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BExpr {
    True,
    False,
    Not(Box<BExpr>),
    Cmp(AExpr, CmpOp, AExpr),
    Logic(Box<BExpr>, BoolOp, Box<BExpr>),
}

/// One arm of a `parif`: the thread `body` is spawned when `cond` holds
/// (with profiled probability `prob`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParArm {
    pub cond: BExpr,
    pub prob: Prob,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `x := e`
    Assign { target: VarName, value: AExpr },
    /// `x := &y`
    AddrOf { target: VarName, source: VarName },
    /// `*x := e`
    Store { pointer: VarName, value: AExpr },
    /// `x := *y`
    Load { target: VarName, pointer: VarName },
    Skip,
    /// Sequential composition of two or more statements, none of which is
    /// itself a `Seq`.
    Seq(Vec<Stmt>),
    If {
        cond: BExpr,
        p_true: Prob,
        then_branch: Box<Stmt>,
        else_branch: Box<Stmt>,
    },
    While {
        cond: BExpr,
        trip_bound: u64,
        body: Box<Stmt>,
    },
    Par(Vec<Stmt>),
    ParIf(Vec<ParArm>),
    ParFor { count: u64, body: Box<Stmt> },
}

/// A labeled statement. Equality ignores the source span.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub label: Label,
    pub span: Span,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.kind == other.kind
    }
}

impl Eq for Stmt {}

impl Stmt {
    /// An unlabeled statement; labels are assigned by [`Program::new`].
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt {
            label: Label(0),
            span: Span::default(),
            kind,
        }
    }

    pub fn with_span(kind: StmtKind, span: Span) -> Stmt {
        Stmt {
            label: Label(0),
            span,
            kind,
        }
    }

    /// Builds a `Seq`, flattening nested sequences; a single statement is
    /// returned unchanged and an empty list becomes `skip`.
    pub fn seq(stmts: Vec<Stmt>) -> Stmt {
        let mut flat = Vec::with_capacity(stmts.len());
        for s in stmts {
            match s.kind {
                StmtKind::Seq(inner) => flat.extend(inner),
                _ => flat.push(s),
            }
        }
        match flat.len() {
            0 => Stmt::new(StmtKind::Skip),
            1 => flat.pop().unwrap(),
            _ => {
                let span = flat[0].span;
                Stmt::with_span(StmtKind::Seq(flat), span)
            }
        }
    }

    /// Direct sub-statements in source order.
    pub fn children(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::Assign { .. }
            | StmtKind::AddrOf { .. }
            | StmtKind::Store { .. }
            | StmtKind::Load { .. }
            | StmtKind::Skip => Vec::new(),
            StmtKind::Seq(stmts) | StmtKind::Par(stmts) => stmts.iter().collect(),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => vec![then_branch, else_branch],
            StmtKind::While { body, .. } | StmtKind::ParFor { body, .. } => vec![body],
            StmtKind::ParIf(arms) => arms.iter().map(|a| &a.body).collect(),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Stmt> {
        match &mut self.kind {
            StmtKind::Assign { .. }
            | StmtKind::AddrOf { .. }
            | StmtKind::Store { .. }
            | StmtKind::Load { .. }
            | StmtKind::Skip => Vec::new(),
            StmtKind::Seq(stmts) | StmtKind::Par(stmts) => stmts.iter_mut().collect(),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => vec![then_branch.as_mut(), else_branch.as_mut()],
            StmtKind::While { body, .. } | StmtKind::ParFor { body, .. } => vec![body.as_mut()],
            StmtKind::ParIf(arms) => arms.iter_mut().map(|a| &mut a.body).collect(),
        }
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Stmt)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    /// Every label in the statement tree, in preorder (source order).
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.walk(&mut |s| out.push(s.label));
        out
    }

    /// Reassigns labels in preorder starting from `next`, which is advanced
    /// past the last label used.
    pub fn relabel(&mut self, next: &mut u32) {
        self.label = Label(*next);
        *next += 1;
        for child in self.children_mut() {
            child.relabel(next);
        }
    }
}

/// A parsed (or constructed) program: its labeled body and variable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub body: Stmt,
    pub vars: Arc<VarTable>,
}

impl Program {
    /// Labels `body` in preorder and collects its variables.
    pub fn new(mut body: Stmt) -> Program {
        let mut next = 1;
        body.relabel(&mut next);
        let vars = VarTable::from_names(super::collect_vars(&body));
        Program {
            body,
            vars: Arc::new(vars),
        }
    }

    /// The same program over a variable table extended with `extra` names
    /// (appended in the given order when not already present).
    pub fn with_extra_vars(&self, extra: impl IntoIterator<Item = VarName>) -> Program {
        let mut vars = (*self.vars).clone();
        for name in extra {
            vars.insert(name);
        }
        Program {
            body: self.body.clone(),
            vars: Arc::new(vars),
        }
    }

    /// Finds the statement carrying `label`.
    pub fn stmt(&self, label: Label) -> Option<&Stmt> {
        let mut found = None;
        self.body.walk(&mut |s| {
            if s.label == label && found.is_none() {
                found = Some(s);
            }
        });
        found
    }
}
