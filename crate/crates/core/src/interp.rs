//! Reference probabilistic interpreter.
//!
//! Statements run over weighted states `(γ, p)`. Assignments keep the
//! weight, a taken `if` branch multiplies it by the branch's annotated
//! probability, and `par` runs every serialization of its threads (whole
//! threads, in every one of the `n!` orders) with each result scaled by
//! `1/n!`. Threads are never interleaved at statement granularity.
//!
//! The result of [`run`] is the full multiset of outcomes, in a fixed order:
//! permutations are visited lexicographically and each path's outcomes are
//! emitted in execution order.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::lang::{AExpr, BExpr, BoolOp, CmpOp, ParArm, Stmt, StmtKind, VarName, VarTable};
use crate::prob::Prob;
use crate::pts::{Address, Env, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("`par` with {threads} threads exceeds the permutation cap of {cap}")]
    TooManyThreads { threads: u64, cap: usize },
    #[error("variable `{0}` is not part of the environment")]
    UnknownVariable(String),
}

/// Result of evaluating an expression: a value or the failure marker `!`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalResult<T> {
    Value(T),
    Fail,
}

impl<T> EvalResult<T> {
    pub fn is_fail(&self) -> bool {
        matches!(self, EvalResult::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedEnv {
    pub env: Env,
    pub weight: Prob,
}

impl WeightedEnv {
    pub fn new(env: Env, weight: Prob) -> Self {
        WeightedEnv { env, weight }
    }

    /// `(γ, 1)`.
    pub fn certain(env: Env) -> Self {
        WeightedEnv::new(env, Prob::one())
    }
}

/// One terminal outcome of a run.
///
/// `Abort` and `OutOfFuel` carry the path weight at which they occurred
/// (scaled by the enclosing branch and permutation factors like any other
/// outcome), so that all outcome weights of a run add up to at most the
/// starting weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Final(WeightedEnv),
    Abort(Prob),
    OutOfFuel(Prob),
}

impl Outcome {
    pub fn weight(&self) -> &Prob {
        match self {
            Outcome::Final(w) => &w.weight,
            Outcome::Abort(p) | Outcome::OutOfFuel(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Loop iterations allowed along a single path.
    pub fuel: u64,
    /// Largest `par` (after `parif`/`parfor` desugaring) that will be enumerated.
    pub permutation_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fuel: 1000,
            permutation_cap: 7,
        }
    }
}

fn lookup(env: &Env, x: &VarName) -> crate::lang::VarId {
    env.vars()
        .id(x)
        .unwrap_or_else(|| panic!("variable `{x}` missing from the environment"))
}

/// Arithmetic evaluation; `⊕` on anything but two integers fails.
///
/// `env` must cover every variable of `e`.
pub fn eval_aexpr(e: &AExpr, env: &Env) -> EvalResult<Value> {
    match e {
        AExpr::Num(n) => EvalResult::Value(Value::Int(*n)),
        AExpr::Var(x) => EvalResult::Value(env.get(lookup(env, x))),
        AExpr::Bin(l, op, r) => match (eval_aexpr(l, env), eval_aexpr(r, env)) {
            (EvalResult::Value(Value::Int(a)), EvalResult::Value(Value::Int(b))) => {
                EvalResult::Value(Value::Int(op.apply(a, b)))
            }
            _ => EvalResult::Fail,
        },
    }
}

/// Boolean evaluation. `==` compares any two non-failing values (so equal
/// addresses are equal), `<=` needs integers, and connectives are strict in
/// failure on both sides.
pub fn eval_bexpr(b: &BExpr, env: &Env) -> EvalResult<bool> {
    use EvalResult::{Fail, Value as V};
    match b {
        BExpr::True => V(true),
        BExpr::False => V(false),
        BExpr::Not(inner) => match eval_bexpr(inner, env) {
            V(v) => V(!v),
            Fail => Fail,
        },
        BExpr::Cmp(l, CmpOp::Eq, r) => match (eval_aexpr(l, env), eval_aexpr(r, env)) {
            (V(a), V(b)) => V(a == b),
            _ => Fail,
        },
        BExpr::Cmp(l, CmpOp::Le, r) => match (eval_aexpr(l, env), eval_aexpr(r, env)) {
            (V(Value::Int(a)), V(Value::Int(b))) => V(a <= b),
            _ => Fail,
        },
        BExpr::Logic(l, op, r) => match (eval_bexpr(l, env), eval_bexpr(r, env)) {
            (V(a), V(b)) => V(match op {
                BoolOp::And => a && b,
                BoolOp::Or => a || b,
            }),
            _ => Fail,
        },
    }
}

/// Intermediate result: a finished path keeps its remaining fuel.
enum Step {
    Live(Env, Prob, u64),
    Abort(Prob),
    OutOfFuel(Prob),
}

impl Step {
    fn scaled(self, q: &Prob) -> Step {
        match self {
            Step::Live(env, w, fuel) => Step::Live(env, w.mul(q), fuel),
            Step::Abort(w) => Step::Abort(w.mul(q)),
            Step::OutOfFuel(w) => Step::OutOfFuel(w.mul(q)),
        }
    }
}

/// A thread of a `par`; `parif` arms become guarded threads
/// (`if b @p then S else skip`).
#[derive(Clone, Copy)]
enum Thread<'a> {
    Plain(&'a Stmt),
    Guarded(&'a ParArm),
}

/// Executes `stmt` from `start` and returns every outcome.
pub fn run(stmt: &Stmt, start: WeightedEnv, cfg: &RunConfig) -> Result<Vec<Outcome>, RunError> {
    check_vars(stmt, start.env.vars())?;
    let steps = exec(stmt, start.env, start.weight, cfg.fuel, cfg)?;
    Ok(steps
        .into_iter()
        .map(|s| match s {
            Step::Live(env, weight, _) => Outcome::Final(WeightedEnv { env, weight }),
            Step::Abort(w) => Outcome::Abort(w),
            Step::OutOfFuel(w) => Outcome::OutOfFuel(w),
        })
        .collect())
}

fn check_vars(stmt: &Stmt, vars: &Arc<VarTable>) -> Result<(), RunError> {
    for x in crate::lang::collect_vars(stmt) {
        if vars.id(&x).is_none() {
            return Err(RunError::UnknownVariable(x.to_string()));
        }
    }
    Ok(())
}

fn exec(stmt: &Stmt, mut env: Env, w: Prob, fuel: u64, cfg: &RunConfig) -> Result<Vec<Step>, RunError> {
    let steps = match &stmt.kind {
        StmtKind::Assign { target, value } => match eval_aexpr(value, &env) {
            EvalResult::Value(v) => {
                env.set(lookup(&env, target), v);
                vec![Step::Live(env, w, fuel)]
            }
            EvalResult::Fail => vec![Step::Abort(w)],
        },
        StmtKind::AddrOf { target, source } => {
            let addr = Value::Addr(Address(lookup(&env, source)));
            env.set(lookup(&env, target), addr);
            vec![Step::Live(env, w, fuel)]
        }
        StmtKind::Store { pointer, value } => match env.get(lookup(&env, pointer)) {
            Value::Addr(Address(z)) => match eval_aexpr(value, &env) {
                EvalResult::Value(v) => {
                    env.set(z, v);
                    vec![Step::Live(env, w, fuel)]
                }
                EvalResult::Fail => vec![Step::Abort(w)],
            },
            Value::Int(_) => vec![Step::Abort(w)],
        },
        StmtKind::Load { target, pointer } => match env.get(lookup(&env, pointer)) {
            Value::Addr(Address(z)) => {
                let v = env.get(z);
                env.set(lookup(&env, target), v);
                vec![Step::Live(env, w, fuel)]
            }
            Value::Int(_) => vec![Step::Abort(w)],
        },
        StmtKind::Skip => vec![Step::Live(env, w, fuel)],
        StmtKind::Seq(stmts) => {
            let mut states = vec![Step::Live(env, w, fuel)];
            for s in stmts {
                let mut next = Vec::with_capacity(states.len());
                for st in states {
                    match st {
                        Step::Live(env, w, fuel) => next.extend(exec(s, env, w, fuel, cfg)?),
                        done => next.push(done),
                    }
                }
                states = next;
            }
            states
        }
        StmtKind::If {
            cond,
            p_true,
            then_branch,
            else_branch,
        } => exec_if(cond, p_true, then_branch, else_branch, env, w, fuel, cfg)?,
        StmtKind::While { cond, body, .. } => exec_while(cond, body, env, w, fuel, cfg)?,
        StmtKind::Par(threads) => {
            let threads: Vec<Thread> = threads.iter().map(Thread::Plain).collect();
            exec_par(&threads, env, w, fuel, cfg)?
        }
        StmtKind::ParIf(arms) => {
            let threads: Vec<Thread> = arms.iter().map(Thread::Guarded).collect();
            exec_par(&threads, env, w, fuel, cfg)?
        }
        StmtKind::ParFor { count, body } => {
            if *count > cfg.permutation_cap as u64 {
                return Err(RunError::TooManyThreads {
                    threads: *count,
                    cap: cfg.permutation_cap,
                });
            }
            let threads = vec![Thread::Plain(body); *count as usize];
            exec_par(&threads, env, w, fuel, cfg)?
        }
    };
    Ok(steps)
}

#[allow(clippy::too_many_arguments)]
fn exec_if(
    cond: &BExpr,
    p_true: &Prob,
    then_branch: &Stmt,
    else_branch: &Stmt,
    env: Env,
    w: Prob,
    fuel: u64,
    cfg: &RunConfig,
) -> Result<Vec<Step>, RunError> {
    let (branch, factor) = match eval_bexpr(cond, &env) {
        EvalResult::Fail => return Ok(vec![Step::Abort(w)]),
        EvalResult::Value(true) => (then_branch, p_true.clone()),
        EvalResult::Value(false) => (else_branch, p_true.complement()),
    };
    Ok(exec(branch, env, w, fuel, cfg)?
        .into_iter()
        .map(|s| s.scaled(&factor))
        .collect())
}

fn exec_while(
    cond: &BExpr,
    body: &Stmt,
    env: Env,
    w: Prob,
    fuel: u64,
    cfg: &RunConfig,
) -> Result<Vec<Step>, RunError> {
    let mut out = Vec::new();
    // Depth-first, so outcomes come out in execution order.
    let mut pending = vec![(env, w, fuel)];
    while let Some((env, w, fuel)) = pending.pop() {
        match eval_bexpr(cond, &env) {
            EvalResult::Fail => out.push(Step::Abort(w)),
            EvalResult::Value(false) => out.push(Step::Live(env, w, fuel)),
            EvalResult::Value(true) if fuel == 0 => out.push(Step::OutOfFuel(w)),
            EvalResult::Value(true) => {
                let mut live = Vec::new();
                for st in exec(body, env, w, fuel - 1, cfg)? {
                    match st {
                        Step::Live(env, w, fuel) => live.push((env, w, fuel)),
                        done => out.push(done),
                    }
                }
                pending.extend(live.into_iter().rev());
            }
        }
    }
    Ok(out)
}

fn exec_thread(thread: Thread, env: Env, w: Prob, fuel: u64, cfg: &RunConfig) -> Result<Vec<Step>, RunError> {
    match thread {
        Thread::Plain(s) => exec(s, env, w, fuel, cfg),
        Thread::Guarded(arm) => {
            let skip = Stmt::new(StmtKind::Skip);
            exec_if(&arm.cond, &arm.prob, &arm.body, &skip, env, w, fuel, cfg)
        }
    }
}

fn exec_par(threads: &[Thread], env: Env, w: Prob, fuel: u64, cfg: &RunConfig) -> Result<Vec<Step>, RunError> {
    let n = threads.len();
    if n > cfg.permutation_cap {
        return Err(RunError::TooManyThreads {
            threads: n as u64,
            cap: cfg.permutation_cap,
        });
    }
    let factor = Prob::inverse_factorial(n);
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        let mut states = vec![Step::Live(env.clone(), w.clone(), fuel)];
        for &t in &order {
            let mut next = Vec::with_capacity(states.len());
            for st in states {
                match st {
                    Step::Live(env, w, fuel) => next.extend(exec_thread(threads[t], env, w, fuel, cfg)?),
                    done => next.push(done),
                }
            }
            states = next;
        }
        out.extend(states.into_iter().map(|s| s.scaled(&factor)));
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(out)
}

/// Advances `perm` to the next permutation in lexicographic order; returns
/// `false` once the last one has been visited.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Sum of the weights of the `Final` outcomes.
pub fn total_mass(outcomes: &[Outcome]) -> Prob {
    let sum = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Final(w) => Some(w.weight.as_rational().clone()),
            _ => None,
        })
        .fold(BigRational::zero(), |a, b| a + b);
    Prob::from_rational_unchecked(sum)
}

/// Outcomes grouped for display: identical final environments are merged
/// and their weights summed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSummary {
    pub finals: Vec<(Env, Prob)>,
    pub abort: Prob,
    pub out_of_fuel: Prob,
    pub total: Prob,
}

pub fn summarize(outcomes: &[Outcome]) -> OutcomeSummary {
    let mut finals: Vec<(Env, BigRational)> = Vec::new();
    let mut index: BTreeMap<Env, usize> = BTreeMap::new();
    let mut abort = BigRational::zero();
    let mut out_of_fuel = BigRational::zero();
    for o in outcomes {
        match o {
            Outcome::Final(w) => match index.get(&w.env) {
                Some(&i) => finals[i].1 += w.weight.as_rational(),
                None => {
                    index.insert(w.env.clone(), finals.len());
                    finals.push((w.env.clone(), w.weight.as_rational().clone()));
                }
            },
            Outcome::Abort(p) => abort += p.as_rational(),
            Outcome::OutOfFuel(p) => out_of_fuel += p.as_rational(),
        }
    }
    OutcomeSummary {
        finals: finals
            .into_iter()
            .map(|(e, p)| (e, Prob::from_rational_unchecked(p)))
            .collect(),
        abort: Prob::from_rational_unchecked(abort),
        out_of_fuel: Prob::from_rational_unchecked(out_of_fuel),
        total: total_mass(outcomes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, Program, VarId};

    fn start(p: &Program) -> WeightedEnv {
        WeightedEnv::certain(Env::zeroed(&p.vars))
    }

    fn addr(p: &Program, name: &str) -> Value {
        Value::Addr(Address(p.vars.id_of(name).unwrap()))
    }

    fn id(p: &Program, name: &str) -> VarId {
        p.vars.id_of(name).unwrap()
    }

    #[test]
    fn expression_evaluation() {
        let p = parse("x := 0; y := 0;").unwrap();
        let env = Env::zeroed(&p.vars).with(id(&p, "x"), addr(&p, "y"));
        assert_eq!(eval_aexpr(&AExpr::Num(5), &env), EvalResult::Value(Value::Int(5)));
        assert_eq!(eval_aexpr(&AExpr::var("x"), &env), EvalResult::Value(addr(&p, "y")));
        let plus = AExpr::bin(AExpr::var("x"), crate::lang::ArithOp::Add, AExpr::Num(1));
        assert_eq!(eval_aexpr(&plus, &env), EvalResult::Fail);
        let plus = AExpr::bin(AExpr::var("y"), crate::lang::ArithOp::Mul, AExpr::Num(3));
        assert_eq!(eval_aexpr(&plus, &env), EvalResult::Value(Value::Int(0)));
    }

    #[test]
    fn boolean_evaluation() {
        let p = parse("x := 0; y := 0;").unwrap();
        let env = Env::zeroed(&p.vars).with(id(&p, "x"), addr(&p, "y"));
        let le = BExpr::Cmp(AExpr::var("x"), CmpOp::Le, AExpr::Num(0));
        assert_eq!(eval_bexpr(&BExpr::True, &env), EvalResult::Value(true));
        assert_eq!(eval_bexpr(&le, &env), EvalResult::Fail);
        let eq = BExpr::Cmp(AExpr::var("x"), CmpOp::Eq, AExpr::var("x"));
        assert_eq!(eval_bexpr(&eq, &env), EvalResult::Value(true));
        let mixed = BExpr::Cmp(AExpr::var("x"), CmpOp::Eq, AExpr::Num(0));
        assert_eq!(eval_bexpr(&mixed, &env), EvalResult::Value(false));
        // No short-circuit: a failing right operand poisons `false && _`.
        let and = BExpr::Logic(Box::new(BExpr::False), BoolOp::And, Box::new(le.clone()));
        assert_eq!(eval_bexpr(&and, &env), EvalResult::Fail);
        assert_eq!(eval_bexpr(&BExpr::Not(Box::new(le)), &env), EvalResult::Fail);
    }

    #[test]
    fn two_thread_par_yields_both_orders() {
        let p = parse("par { a := &c; } { a := &d; }").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        let half = Prob::ratio(1, 2).unwrap();
        let env0 = Env::zeroed(&p.vars);
        assert_eq!(
            out,
            vec![
                Outcome::Final(WeightedEnv::new(env0.with(id(&p, "a"), addr(&p, "d")), half.clone())),
                Outcome::Final(WeightedEnv::new(env0.with(id(&p, "a"), addr(&p, "c")), half)),
            ]
        );
        assert_eq!(total_mass(&out), Prob::one());
    }

    #[test]
    fn taken_branch_scales_weight() {
        let p = parse("if (0 <= 0) @0.6 { b := &c; } else { b := &d; }").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        let env = Env::zeroed(&p.vars).with(id(&p, "b"), addr(&p, "c"));
        assert_eq!(out, vec![Outcome::Final(WeightedEnv::new(env, Prob::ratio(3, 5).unwrap()))]);
        assert_eq!(total_mass(&out), Prob::ratio(3, 5).unwrap());
    }

    #[test]
    fn store_through_integer_aborts() {
        let p = parse("*x := 1;").unwrap();
        let env = Env::zeroed(&p.vars).with(id(&p, "x"), Value::Int(7));
        let out = run(&p.body, WeightedEnv::certain(env), &RunConfig::default()).unwrap();
        assert_eq!(out, vec![Outcome::Abort(Prob::one())]);
        assert_eq!(total_mass(&out), Prob::zero());
    }

    #[test]
    fn load_and_store_through_pointers() {
        let p = parse("x := &y; y := 4; *x := y + 1; z := *x;").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        let Outcome::Final(w) = &out[0] else { panic!("{out:?}") };
        assert_eq!(w.env.get(id(&p, "y")), Value::Int(5));
        assert_eq!(w.env.get(id(&p, "z")), Value::Int(5));
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn abort_stops_the_path() {
        let p = parse("y := *x; z := &y;").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        assert_eq!(out, vec![Outcome::Abort(Prob::one())]);
    }

    #[test]
    fn while_loops_and_fuel() {
        let p = parse("while (i <= 2) @0 { i := i + 1; }").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        let Outcome::Final(w) = &out[0] else { panic!() };
        assert_eq!(w.env.get(id(&p, "i")), Value::Int(3));
        assert_eq!(w.weight, Prob::one());

        let spin = parse("while (true) @1 { skip; }").unwrap();
        let cfg = RunConfig { fuel: 5, ..RunConfig::default() };
        assert_eq!(run(&spin.body, start(&spin), &cfg).unwrap(), vec![Outcome::OutOfFuel(Prob::one())]);

        let bad = parse("x := &y; while (x <= 1) @1 { skip; }").unwrap();
        assert_eq!(run(&bad.body, start(&bad), &cfg).unwrap(), vec![Outcome::Abort(Prob::one())]);
    }

    #[test]
    fn three_threads_give_six_outcomes() {
        let p = parse("par { a := 1; } { b := 2; } { c := a + b; }").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        assert_eq!(out.len(), 6);
        assert!(out.iter().all(|o| *o.weight() == Prob::ratio(1, 6).unwrap()));
        let summary = summarize(&out);
        // c ends up as 0, 1, 2 or 3 depending on what ran before it.
        assert_eq!(summary.finals.len(), 4);
        assert_eq!(summary.total, Prob::one());
    }

    #[test]
    fn parif_and_parfor_desugar_to_par() {
        let p = parse("parif (true @1/4) { a := &b; } (false @1/3) { a := &c; }").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        assert_eq!(out.len(), 2);
        // true arm taken (1/4), false arm skipped (2/3), each order 1/2.
        assert!(out.iter().all(|o| *o.weight() == Prob::ratio(1, 12).unwrap()));

        let p = parse("parfor @3 { a := a + 1; }").unwrap();
        let out = run(&p.body, start(&p), &RunConfig::default()).unwrap();
        assert_eq!(out.len(), 6);
        let summary = summarize(&out);
        assert_eq!(summary.finals.len(), 1);
        assert_eq!(summary.finals[0].0.get(id(&p, "a")), Value::Int(3));
    }

    #[test]
    fn permutation_cap_is_enforced() {
        let p = parse("parfor @4 { skip; }").unwrap();
        let cfg = RunConfig { permutation_cap: 3, ..RunConfig::default() };
        assert_eq!(
            run(&p.body, start(&p), &cfg),
            Err(RunError::TooManyThreads { threads: 4, cap: 3 })
        );
        let p = parse("par { skip; } { skip; } { skip; } { skip; }").unwrap();
        assert!(run(&p.body, start(&p), &cfg).is_err());
    }

    #[test]
    fn unknown_variables_are_rejected() {
        let p = parse("x := 1;").unwrap();
        let other = parse("y := 1;").unwrap();
        assert_eq!(
            run(&other.body, start(&p), &RunConfig::default()),
            Err(RunError::UnknownVariable("y".into()))
        );
    }

    #[test]
    fn permutations_are_lexicographic() {
        let mut perm = vec![0, 1, 2];
        let mut seen = vec![perm.clone()];
        while next_permutation(&mut perm) {
            seen.push(perm.clone());
        }
        assert_eq!(
            seen,
            vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]
        );
    }
}
