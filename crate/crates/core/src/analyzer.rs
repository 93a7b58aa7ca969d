//! Probabilistic points-to analysis as a syntax-directed transfer engine.
//!
//! Each statement form has exactly one rule, so the analyzer computes a
//! single principal derivation `S : pts → pts'`; subsumption is available
//! separately through [`check_leq_judgment`]. The interesting cases:
//!
//! * `x := *y` joins the `n` ways `x` could be assigned, weighted by the
//!   probabilities of `y`'s targets.
//! * `*x := e` updates every target `z` of `x`, weighting the old and the new
//!   value of `z` by `1 - p` and `p`.
//! * `if` weights its branches by the annotated probability.
//! * `while` joins the body iterates `1..=n` for the annotated trip bound `n`
//!   ([`WhileMode::Paper`]), or iterates `0..=n` ([`WhileMode::Safe`], which
//!   also covers runs that never enter the loop).
//! * `par` solves the mutually recursive thread premises (every thread starts
//!   from the join of the pre type and all other threads' posts) by Jacobi
//!   iteration.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lang::{AExpr, Label, ParArm, Program, Span, Stmt, StmtKind, VarId, VarName};
use crate::prob::Prob;
use crate::pts::{nabla, lub, AddrProbSet, Address, PtsError, PtsType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Pts(#[from] PtsError),
    #[error("par at line {line} did not stabilize within {rounds} rounds")]
    ParDiverged { line: u32, rounds: usize },
    #[error("pre type does not range over the program's variables")]
    PreMismatch,
    #[error("probabilities at line {line} need denominators of more than {bits} bits")]
    PrecisionLimit { line: u32, bits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WhileMode {
    /// Join of iterates `1..=n` only.
    Paper,
    /// Join of iterates `0..=n`; sound for loops that run zero times.
    #[default]
    Safe,
}

impl WhileMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WhileMode::Paper => "paper",
            WhileMode::Safe => "safe",
        }
    }
}

impl std::str::FromStr for WhileMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(WhileMode::Paper),
            "safe" => Ok(WhileMode::Safe),
            other => Err(format!("unknown while mode `{other}` (expected `paper` or `safe`)")),
        }
    }
}

/// When the `par` solver may stop short of an exact fixpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParStop {
    /// Keep iterating until an exact fixpoint or the round cap; only at the
    /// cap is a support-stable round accepted.
    Exact,
    /// Accept the first round (from the second on) whose supports match the
    /// previous round. Probabilities are then those of that round.
    #[default]
    Support,
}

impl ParStop {
    pub fn as_str(self) -> &'static str {
        match self {
            ParStop::Exact => "exact",
            ParStop::Support => "support",
        }
    }
}

impl std::str::FromStr for ParStop {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(ParStop::Exact),
            "support" => Ok(ParStop::Support),
            other => Err(format!("unknown par stop rule `{other}` (expected `exact` or `support`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzerConfig {
    pub while_mode: WhileMode,
    /// Jacobi rounds allowed per `par`. At least 2.
    pub par_round_cap: usize,
    pub par_stop: ParStop,
    /// Fail with [`AnalyzeError::PrecisionLimit`] once a probability's
    /// denominator grows past this many bits. Unlimited when `None`.
    pub max_denominator_bits: Option<u64>,
    /// `parfor @n` joins the posts of `par` with `1..=n` copies when set;
    /// otherwise it analyzes exactly `n` copies.
    pub parfor_stabilize: bool,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            while_mode: WhileMode::Safe,
            par_round_cap: 16,
            par_stop: ParStop::Support,
            max_denominator_bits: None,
            parfor_stabilize: true,
        }
    }
}

/// Points-to types before and after every labeled statement.
///
/// A statement analyzed several times (loop bodies, par threads) keeps the
/// types of its last visit, which for `par` is the converged round.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnalysisResult {
    pub pre: BTreeMap<Label, PtsType>,
    pub post: BTreeMap<Label, PtsType>,
    pub warnings: Vec<String>,
}

impl AnalysisResult {
    fn record(&mut self, label: Label, pre: &PtsType, post: &PtsType) {
        self.pre.insert(label, pre.clone());
        self.post.insert(label, post.clone());
    }

    fn warn(&mut self, message: String) {
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
    }
}

/// The outcome of solving one `par`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParSolution {
    pub post: PtsType,
    /// The per-thread premise solutions `pts₁ … ptsₙ`.
    pub thread_posts: Vec<PtsType>,
    pub rounds: usize,
    /// `false` when the last round only matched the previous one on supports.
    pub exact: bool,
}

/// A `par` thread; `parif` arms are guarded threads `if b @p then S else skip`.
#[derive(Clone, Copy)]
pub enum Thread<'a> {
    Plain(&'a Stmt),
    Guarded(&'a ParArm),
}

fn var_id(pts: &PtsType, x: &VarName) -> Result<VarId, AnalyzeError> {
    pts.vars()
        .id(x)
        .ok_or_else(|| PtsError::UnknownVariable(x.to_string()).into())
}

/// `n : ∅`, `x : pts(x)`, `e₁ ⊕ e₂ : ∅`.
pub fn type_aexpr(e: &AExpr, pts: &PtsType) -> Result<AddrProbSet, PtsError> {
    match e {
        AExpr::Var(x) => pts.get_named(x).cloned(),
        AExpr::Num(_) | AExpr::Bin(..) => Ok(AddrProbSet::new()),
    }
}

/// Analyzes `stmt` from `pts`, recording every visited statement in `out`.
pub fn transfer(
    stmt: &Stmt,
    pts: &PtsType,
    cfg: &AnalyzerConfig,
    out: &mut AnalysisResult,
) -> Result<PtsType, AnalyzeError> {
    let post = match &stmt.kind {
        StmtKind::Assign { target, value } => {
            pts.with(var_id(pts, target)?, type_aexpr(value, pts)?)?
        }
        StmtKind::AddrOf { target, source } => {
            let y = Address(var_id(pts, source)?);
            pts.with(var_id(pts, target)?, AddrProbSet::singleton(y, Prob::one()))?
        }
        StmtKind::Load { target, pointer } => {
            let x = var_id(pts, target)?;
            let y = var_id(pts, pointer)?;
            let targets = pts.get(y);
            if targets.is_empty() {
                out.warn(format!(
                    "line {}: `{target} := *{pointer}` may abort: `{pointer}` has no known target",
                    stmt.span.line
                ));
                pts.with(x, AddrProbSet::new())?
            } else {
                let ways = targets
                    .iter()
                    .map(|(Address(z), p)| Ok((pts.with(x, pts.get(z).clone())?, p.clone())))
                    .collect::<Result<Vec<_>, PtsError>>()?;
                let weighted: Vec<(&PtsType, Prob)> = ways.iter().map(|(t, p)| (t, p.clone())).collect();
                let joined = nabla(&weighted)?;
                pts.with(x, joined.get(x).clone())?
            }
        }
        StmtKind::Store { pointer, value } => {
            let x = var_id(pts, pointer)?;
            let targets = pts.get(x);
            if targets.is_empty() {
                out.warn(format!(
                    "line {}: `*{pointer} := ...` may abort: `{pointer}` has no known target",
                    stmt.span.line
                ));
                pts.clone()
            } else {
                let assigned = type_aexpr(value, pts)?;
                let mut result = pts.clone();
                for (Address(z), p) in targets.iter() {
                    let updated = pts.with(z, assigned.clone())?;
                    let joined = nabla(&[(pts, p.complement()), (&updated, p.clone())])?;
                    result.set(z, joined.get(z).clone())?;
                }
                result
            }
        }
        StmtKind::Skip => pts.clone(),
        StmtKind::Seq(stmts) => {
            let mut cur = pts.clone();
            for s in stmts {
                cur = transfer(s, &cur, cfg, out)?;
            }
            cur
        }
        StmtKind::If {
            p_true,
            then_branch,
            else_branch,
            ..
        } => {
            let t = transfer(then_branch, pts, cfg, out)?;
            let f = transfer(else_branch, pts, cfg, out)?;
            nabla(&[(&t, p_true.clone()), (&f, p_true.complement())])?
        }
        StmtKind::While {
            trip_bound, body, ..
        } => transfer_while(*trip_bound, body, pts, cfg, out)?,
        StmtKind::Par(threads) => {
            let threads: Vec<Thread> = threads.iter().map(Thread::Plain).collect();
            solve_par(&threads, stmt.span, pts, cfg, out)?.post
        }
        StmtKind::ParIf(arms) => {
            let threads: Vec<Thread> = arms.iter().map(Thread::Guarded).collect();
            solve_par(&threads, stmt.span, pts, cfg, out)?.post
        }
        StmtKind::ParFor { count, body } => transfer_parfor(*count, body, stmt.span, pts, cfg, out)?,
    };
    if let Some(bits) = cfg.max_denominator_bits {
        if post.max_denominator_bits() > bits {
            return Err(AnalyzeError::PrecisionLimit {
                line: stmt.span.line,
                bits,
            });
        }
    }
    out.record(stmt.label, pts, &post);
    Ok(post)
}

fn transfer_while(
    bound: u64,
    body: &Stmt,
    pts: &PtsType,
    cfg: &AnalyzerConfig,
    out: &mut AnalysisResult,
) -> Result<PtsType, AnalyzeError> {
    if bound == 0 {
        return Ok(pts.clone());
    }
    let (denominator, mut iterates) = match cfg.while_mode {
        WhileMode::Paper => (bound, Vec::new()),
        WhileMode::Safe => (bound + 1, vec![(pts.clone(), 1u64)]),
    };
    let mut cur = pts.clone();
    let mut i = 1;
    while i <= bound {
        let next = transfer(body, &cur, cfg, out)?;
        if next == cur {
            // A fixed iterate repeats for every remaining trip.
            let remaining = bound - i + 1;
            match iterates.last_mut() {
                Some(last) if last.0 == next => last.1 += remaining,
                _ => iterates.push((next, remaining)),
            }
            break;
        }
        iterates.push((next.clone(), 1));
        cur = next;
        i += 1;
    }
    let weighted: Vec<(&PtsType, Prob)> = iterates
        .iter()
        .map(|(t, k)| {
            let w = Prob::ratio(*k, denominator).expect("iterate weights sum to one");
            (t, w)
        })
        .collect();
    Ok(nabla(&weighted)?)
}

fn transfer_parfor(
    count: u64,
    body: &Stmt,
    span: Span,
    pts: &PtsType,
    cfg: &AnalyzerConfig,
    out: &mut AnalysisResult,
) -> Result<PtsType, AnalyzeError> {
    let copies = |k: u64| vec![Thread::Plain(body); k as usize];
    if !cfg.parfor_stabilize {
        return Ok(solve_par(&copies(count), span, pts, cfg, out)?.post);
    }
    let mut posts = Vec::with_capacity(count as usize);
    for k in 1..=count {
        posts.push(solve_par(&copies(k), span, pts, cfg, out)?.post);
    }
    if count >= 2 {
        let earlier = lub(&posts[..posts.len() - 1])?;
        if !posts[posts.len() - 1].leq(&earlier)? {
            out.warn(format!(
                "line {}: parfor supports were still growing at {count} copies",
                span.line
            ));
        }
    }
    Ok(lub(&posts)?)
}

fn transfer_thread(
    thread: Thread,
    pts: &PtsType,
    cfg: &AnalyzerConfig,
    out: &mut AnalysisResult,
) -> Result<PtsType, AnalyzeError> {
    match thread {
        Thread::Plain(s) => transfer(s, pts, cfg, out),
        Thread::Guarded(arm) => {
            let taken = transfer(&arm.body, pts, cfg, out)?;
            Ok(nabla(&[(&taken, arm.prob.clone()), (pts, arm.prob.complement())])?)
        }
    }
}

/// Solves the `par` premises `Sᵢ : ∇{(pts,1/n), (ptsⱼ,1/n) | j≠i} → ptsᵢ`.
///
/// Jacobi iteration from `ptsᵢ = pts`: each round recomputes every thread
/// from the previous round's values. It stops when a round reproduces the
/// previous one exactly. Otherwise a round whose supports match the
/// previous one is accepted with a warning: under [`ParStop::Support`] the
/// first such round from the second on, under [`ParStop::Exact`] only the
/// round at `cfg.par_round_cap`. Reaching the cap without support stability
/// is an error. The result is `∇((pts₁,1/n), …, (ptsₙ,1/n))`.
///
/// Load and store rules multiply probabilities together, so the exact
/// iterates' denominators can grow exponentially from round to round.
pub fn solve_par(
    threads: &[Thread],
    span: Span,
    pts: &PtsType,
    cfg: &AnalyzerConfig,
    out: &mut AnalysisResult,
) -> Result<ParSolution, AnalyzeError> {
    let n = threads.len();
    assert!(n >= 1, "par needs at least one thread");
    if n == 1 {
        // ∇((pts, 1)) = pts, so the only premise does not depend on itself.
        let post = transfer_thread(threads[0], pts, cfg, out)?;
        return Ok(ParSolution {
            post: post.clone(),
            thread_posts: vec![post],
            rounds: 1,
            exact: true,
        });
    }

    let w = Prob::reciprocal(n);
    let cap = cfg.par_round_cap.max(2);
    let warnings_before = out.warnings.len();
    let mut prev: Vec<PtsType> = vec![pts.clone(); n];
    let mut rounds = 0;
    let mut exact = false;

    while rounds < cap {
        rounds += 1;
        // Only the final round's warnings describe the derivation.
        out.warnings.truncate(warnings_before);
        let mut next = Vec::with_capacity(n);
        for (i, thread) in threads.iter().enumerate() {
            let mut inputs: Vec<(&PtsType, Prob)> = vec![(pts, w.clone())];
            inputs.extend(
                prev.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, t)| (t, w.clone())),
            );
            let input = nabla(&inputs)?;
            next.push(transfer_thread(*thread, &input, cfg, out)?);
        }
        if next == prev {
            exact = true;
            break;
        }
        let supports_stable = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| a.equiv(b))
            .collect::<Result<Vec<bool>, PtsError>>()?
            .into_iter()
            .all(|b| b);
        prev = next;
        let accept = supports_stable
            && match cfg.par_stop {
                ParStop::Support => rounds >= 2,
                ParStop::Exact => rounds == cap,
            };
        if accept {
            out.warn(format!(
                "line {}: par reached no exact fixpoint; using the support-stable iterate of round {rounds}",
                span.line
            ));
            break;
        }
        if rounds == cap {
            return Err(AnalyzeError::ParDiverged {
                line: span.line,
                rounds: cap,
            });
        }
    }

    let weighted: Vec<(&PtsType, Prob)> = prev.iter().map(|t| (t, w.clone())).collect();
    Ok(ParSolution {
        post: nabla(&weighted)?,
        thread_posts: prev,
        rounds,
        exact,
    })
}

/// Analyzes the whole program from `pre`.
pub fn analyze_program(
    program: &Program,
    pre: &PtsType,
    cfg: &AnalyzerConfig,
) -> Result<AnalysisResult, AnalyzeError> {
    if **pre.vars() != *program.vars {
        return Err(AnalyzeError::PreMismatch);
    }
    let mut out = AnalysisResult::default();
    transfer(&program.body, pre, cfg, &mut out)?;
    Ok(out)
}

/// Subsumption check: `S : pts₁ → pts₂` may be weakened to
/// `S : pts₁' → pts₂'` when `pts₁' ≤ pts₁` and `pts₂ ≤ pts₂'`.
pub fn check_leq_judgment(
    pre_weak: &PtsType,
    pre: &PtsType,
    post: &PtsType,
    post_weak: &PtsType,
) -> bool {
    pre_weak.leq(pre).unwrap_or(false) && post.leq(post_weak).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn p(n: u64, d: u64) -> Prob {
        Prob::ratio(n, d).unwrap()
    }

    fn set(program: &Program, entries: &[(&str, Prob)]) -> AddrProbSet {
        let mut s = AddrProbSet::new();
        for (a, q) in entries {
            s.insert(Address(program.vars.id_of(a).unwrap()), q.clone());
        }
        s
    }

    fn get<'a>(program: &Program, pts: &'a PtsType, x: &str) -> &'a AddrProbSet {
        pts.get(program.vars.id_of(x).unwrap())
    }

    fn post(program: &Program, cfg: &AnalyzerConfig) -> PtsType {
        let result = analyze_program(program, &PtsType::bottom(&program.vars), cfg).unwrap();
        result.post[&program.body.label].clone()
    }

    #[test]
    fn expression_types() {
        let prog = parse("a := &c; x := 7;").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert!(type_aexpr(&AExpr::Num(7), &pts).unwrap().is_empty());
        assert_eq!(type_aexpr(&AExpr::var("a"), &pts).unwrap(), set(&prog, &[("c", Prob::one())]));
        let sum = AExpr::bin(AExpr::var("a"), crate::lang::ArithOp::Add, AExpr::var("x"));
        assert!(type_aexpr(&sum, &pts).unwrap().is_empty());
    }

    #[test]
    fn address_assignment() {
        let prog = parse("a := &c;").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert_eq!(*get(&prog, &pts, "a"), set(&prog, &[("c", Prob::one())]));
    }

    #[test]
    fn load_joins_target_sets() {
        // y ↦ {(a',1/2),(b',1/2)}, a ↦ {(c',1)}, b ↦ ∅.
        let prog = parse("a := &c; b := 0; par { y := &a; } { y := &b; } x := *y;").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert_eq!(*get(&prog, &pts, "y"), set(&prog, &[("a", p(1, 2)), ("b", p(1, 2))]));
        assert_eq!(*get(&prog, &pts, "x"), set(&prog, &[("c", p(1, 2))]));
    }

    #[test]
    fn store_updates_each_target_weakly() {
        let prog = parse("a := &c; b := &d; w := &e; par { y := &a; } { y := &b; } *y := w;").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert_eq!(*get(&prog, &pts, "a"), set(&prog, &[("c", p(1, 2)), ("e", p(1, 2))]));
        assert_eq!(*get(&prog, &pts, "b"), set(&prog, &[("d", p(1, 2)), ("e", p(1, 2))]));

        let strong = parse("a := &c; w := &e; y := &a; *y := w;").unwrap();
        let pts = post(&strong, &AnalyzerConfig::default());
        assert_eq!(*get(&strong, &pts, "a"), set(&strong, &[("e", Prob::one())]));
    }

    #[test]
    fn empty_dereferences_warn() {
        let prog = parse("x := *y; *y := 3;").unwrap();
        let result = analyze_program(&prog, &PtsType::bottom(&prog.vars), &AnalyzerConfig::default()).unwrap();
        assert_eq!(result.warnings.len(), 2, "{:?}", result.warnings);
        assert!(result.post[&prog.body.label].is_bottom());
    }

    #[test]
    fn if_weights_branches() {
        let prog = parse("a := &c; if (x <= 0) @0.6 { b := &c; } else { b := &d; }").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert_eq!(*get(&prog, &pts, "b"), set(&prog, &[("c", p(3, 5)), ("d", p(2, 5))]));
        assert_eq!(*get(&prog, &pts, "a"), set(&prog, &[("c", Prob::one())]));
    }

    #[test]
    fn two_thread_par_splits_evenly() {
        let prog = parse("a := &c; par { a := &c; } { a := &d; }").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert_eq!(*get(&prog, &pts, "a"), set(&prog, &[("c", p(1, 2)), ("d", p(1, 2))]));
    }

    #[test]
    fn worked_par_example_converges_in_two_rounds() {
        let prog = parse("par { if (b <= 0) @0.4 { x := &y; } else { x := 5; } } { x := &z; }").unwrap();
        let StmtKind::Par(threads) = &prog.body.kind else { panic!() };
        let threads: Vec<Thread> = threads.iter().map(Thread::Plain).collect();
        let mut out = AnalysisResult::default();
        let sol = solve_par(
            &threads,
            prog.body.span,
            &PtsType::bottom(&prog.vars),
            &AnalyzerConfig::default(),
            &mut out,
        )
        .unwrap();
        assert!(sol.exact);
        assert_eq!(sol.rounds, 2);
        assert_eq!(*get(&prog, &sol.thread_posts[0], "x"), set(&prog, &[("y", p(2, 5))]));
        assert_eq!(*get(&prog, &sol.thread_posts[1], "x"), set(&prog, &[("z", Prob::one())]));
        assert_eq!(*get(&prog, &sol.post, "x"), set(&prog, &[("y", p(1, 5)), ("z", p(1, 2))]));
    }

    #[test]
    fn single_thread_par_is_plain_transfer() {
        let prog = parse("par { a := &c; }").unwrap();
        let pts = post(&prog, &AnalyzerConfig::default());
        assert_eq!(*get(&prog, &pts, "a"), set(&prog, &[("c", Prob::one())]));
    }

    #[test]
    fn while_modes() {
        let prog = parse("x := &y; while (i <= 0) @1 { x := 5; }").unwrap();
        let paper = AnalyzerConfig { while_mode: WhileMode::Paper, ..AnalyzerConfig::default() };
        assert!(get(&prog, &post(&prog, &paper), "x").is_empty());
        assert_eq!(
            *get(&prog, &post(&prog, &AnalyzerConfig::default()), "x"),
            set(&prog, &[("y", p(1, 2))])
        );
        let zero = parse("x := &y; while (true) @0 { x := 5; }").unwrap();
        assert_eq!(
            *get(&zero, &post(&zero, &paper), "x"),
            set(&zero, &[("y", Prob::one())])
        );
    }

    #[test]
    fn while_iterates_compose() {
        // Iterate 1: b ↦ a's old target ∅, a ↦ {c'}; iterate 2: b ↦ {c'}.
        let prog = parse("while (true) @2 { b := a; a := &c; }").unwrap();
        let paper = AnalyzerConfig { while_mode: WhileMode::Paper, ..AnalyzerConfig::default() };
        let pts = post(&prog, &paper);
        assert_eq!(*get(&prog, &pts, "a"), set(&prog, &[("c", Prob::one())]));
        assert_eq!(*get(&prog, &pts, "b"), set(&prog, &[("c", p(1, 2))]));
    }

    #[test]
    fn parfor_joins_replications() {
        let prog = parse("parfor @3 { a := &c; }").unwrap();
        let result = analyze_program(&prog, &PtsType::bottom(&prog.vars), &AnalyzerConfig::default()).unwrap();
        let pts = &result.post[&prog.body.label];
        assert_eq!(*get(&prog, pts, "a"), set(&prog, &[("c", Prob::one())]));
        assert!(result.warnings.is_empty(), "{:?}", result.warnings);

        let exact = AnalyzerConfig { parfor_stabilize: false, ..AnalyzerConfig::default() };
        assert_eq!(post(&prog, &exact), *pts);
    }

    #[test]
    fn every_label_is_recorded() {
        let prog = parse("a := &c; if (true) @1/2 { skip; } else { par { b := a; } { c := 1; } } while (a == a) @2 { d := *a; }").unwrap();
        let result = analyze_program(&prog, &PtsType::bottom(&prog.vars), &AnalyzerConfig::default()).unwrap();
        let labels = prog.body.labels();
        assert_eq!(result.pre.keys().copied().collect::<Vec<_>>(), labels);
        assert_eq!(result.post.keys().copied().collect::<Vec<_>>(), labels);
    }

    #[test]
    fn subsumption_check() {
        let prog = parse("a := &c;").unwrap();
        let b = PtsType::bottom(&prog.vars);
        let q = post(&prog, &AnalyzerConfig::default());
        assert!(check_leq_judgment(&b, &q, &q, &q));
        assert!(check_leq_judgment(&q, &q, &b, &b));
        assert!(!check_leq_judgment(&q, &b, &b, &b));
    }

    #[test]
    fn pre_must_match_program_vars() {
        let prog = parse("a := &c;").unwrap();
        let other = parse("z := 1;").unwrap();
        assert_eq!(
            analyze_program(&prog, &PtsType::bottom(&other.vars), &AnalyzerConfig::default()),
            Err(AnalyzeError::PreMismatch)
        );
    }

    const GEOMETRIC: &str = "parif (true @1/3) { b := &b; a := a; } (true @2/3) { b := &b; } (true @2/3) { a := &a; }";

    fn solve(src: &str, cfg: &AnalyzerConfig) -> (ParSolution, Vec<String>) {
        let prog = parse(src).unwrap();
        let threads: Vec<Thread> = match &prog.body.kind {
            StmtKind::ParIf(arms) => arms.iter().map(Thread::Guarded).collect(),
            StmtKind::Par(ts) => ts.iter().map(Thread::Plain).collect(),
            _ => panic!("expected a parallel statement"),
        };
        let mut out = AnalysisResult::default();
        let sol = solve_par(&threads, prog.body.span, &PtsType::bottom(&prog.vars), cfg, &mut out).unwrap();
        (sol, out.warnings)
    }

    #[test]
    fn support_stop_accepts_the_first_stable_round() {
        let (sol, warnings) = solve(GEOMETRIC, &AnalyzerConfig::default());
        // Round 2 still adds support (the arms see each other's targets).
        assert!(!sol.exact);
        assert_eq!(sol.rounds, 3);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn exact_stop_iterates_to_the_cap() {
        let cfg = AnalyzerConfig { par_stop: ParStop::Exact, par_round_cap: 6, ..AnalyzerConfig::default() };
        let (sol, _) = solve(GEOMETRIC, &cfg);
        assert!(!sol.exact);
        assert_eq!(sol.rounds, 6);
        let (support, _) = solve(GEOMETRIC, &AnalyzerConfig::default());
        assert!(sol.post.equiv(&support.post).unwrap());
        assert_ne!(sol.post, support.post);
    }

    #[test]
    fn exact_fixpoints_are_unaffected_by_the_stop_rule() {
        let src = "par { x := &y; } { x := &z; }";
        let exact = AnalyzerConfig { par_stop: ParStop::Exact, ..AnalyzerConfig::default() };
        let (a, _) = solve(src, &exact);
        let (b, _) = solve(src, &AnalyzerConfig::default());
        assert!(a.exact && b.exact);
        assert_eq!(a, b);
    }

    #[test]
    fn precision_limit_is_reported() {
        let prog = parse(GEOMETRIC).unwrap();
        let cfg = AnalyzerConfig {
            par_stop: ParStop::Exact,
            par_round_cap: 8,
            max_denominator_bits: Some(16),
            ..AnalyzerConfig::default()
        };
        assert!(matches!(
            analyze_program(&prog, &PtsType::bottom(&prog.vars), &cfg),
            Err(AnalyzeError::PrecisionLimit { line: 1, bits: 16 })
        ));
    }
}
