//! Seeded random programs and the soundness fuzz loop.
//!
//! Generated programs are always within reach of the analyzer's premises:
//! loops are counter loops whose concrete trip count never exceeds the
//! annotated bound, branch probabilities lie strictly between 0 and 1, and
//! loop counters are never address-taken.

use std::fmt::Write as _;

use probpts_core::analyzer::{AnalyzeError, AnalyzerConfig};
use probpts_core::interp::RunConfig;
use probpts_core::lang::{
    parse, render, AExpr, ArithOp, BExpr, BoolOp, CmpOp, ParArm, Program, Stmt, StmtKind, VarName,
};
use probpts_core::pts::{Env, PtsType};
use probpts_core::Prob;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::check::{check_program, CheckError, Verdict};

/// Outcomes a single generated program may produce before it is resampled.
pub const PATH_LIMIT: u128 = 10_000;

const DATA_VARS: [&str; 4] = ["a", "b", "c", "d"];
/// Denominator size limit the fuzz harness analyzes under by default.
pub const DEFAULT_MAX_BITS: u64 = 4096;

/// Labeled statements a generated program may have before it is resampled.
pub const STMT_LIMIT: usize = 40;

/// Parallel constructs nested deeper than this are not generated: each level
/// runs its own fixpoint over the enclosing level's iterates, and exact
/// rationals grow too quickly beyond two levels.
pub const MAX_PAR_NESTING: usize = 3;

const PROBS: [(u64, u64); 6] = [(1, 4), (1, 3), (1, 2), (3, 5), (2, 3), (3, 4)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzConfigError {
    #[error("{name} must be at most {max} (got {value})")]
    TooLarge { name: &'static str, max: u64, value: u64 },
    #[error("{0} must be positive")]
    Zero(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    pub max_vars: usize,
    pub max_threads: usize,
    pub max_loop_bound: u64,
    pub max_depth: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 1,
            count: 100,
            max_vars: 4,
            max_threads: 3,
            max_loop_bound: 2,
            max_depth: 4,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), FuzzConfigError> {
        let limits: [(&'static str, u64, u64); 4] = [
            ("max_vars", 4, self.max_vars as u64),
            ("max_threads", 3, self.max_threads as u64),
            ("max_loop_bound", 2, self.max_loop_bound),
            ("max_depth", 4, self.max_depth as u64),
        ];
        for (name, max, value) in limits {
            if value > max {
                return Err(FuzzConfigError::TooLarge { name, max, value });
            }
        }
        if self.count == 0 {
            return Err(FuzzConfigError::Zero("count"));
        }
        if self.max_vars == 0 {
            return Err(FuzzConfigError::Zero("max_vars"));
        }
        if self.max_threads == 0 {
            return Err(FuzzConfigError::Zero("max_threads"));
        }
        Ok(())
    }

    /// Seed of the `i`-th case.
    pub fn case_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

fn var(name: &str) -> VarName {
    VarName::new(name).expect("generator names are identifiers")
}

fn stmt(kind: StmtKind) -> Stmt {
    Stmt::new(kind)
}

/// Upper bound on the number of outcomes one run from a single state yields.
pub fn path_bound(s: &Stmt) -> u128 {
    fn fact(n: usize) -> u128 {
        (1..=n as u128).product()
    }
    match &s.kind {
        StmtKind::Seq(ss) => ss.iter().map(path_bound).fold(1, u128::saturating_mul),
        // Conditions are concrete, so a run takes exactly one branch.
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => path_bound(then_branch).max(path_bound(else_branch)),
        StmtKind::While {
            trip_bound, body, ..
        } => path_bound(body).saturating_pow((*trip_bound).min(64) as u32),
        StmtKind::Par(ts) => ts
            .iter()
            .map(path_bound)
            .fold(fact(ts.len()), u128::saturating_mul),
        StmtKind::ParIf(arms) => arms
            .iter()
            .map(|a| path_bound(&a.body))
            .fold(fact(arms.len()), u128::saturating_mul),
        StmtKind::ParFor { count, body } => {
            fact(*count as usize).saturating_mul(path_bound(body).saturating_pow(*count as u32))
        }
        _ => 1,
    }
}

/// Random program builder over a fixed set of data variables.
pub struct Generator<'a> {
    cfg: &'a FuzzConfig,
    rng: ChaCha8Rng,
    vars: Vec<&'static str>,
    counters: usize,
    par_nesting: usize,
}

impl<'a> Generator<'a> {
    pub fn new(cfg: &'a FuzzConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=cfg.max_vars.clamp(1, DATA_VARS.len()));
        Generator {
            cfg,
            rng,
            vars: DATA_VARS[..n].to_vec(),
            counters: 0,
            par_nesting: 0,
        }
    }

    /// A program within [`PATH_LIMIT`] and [`STMT_LIMIT`], shrinking the
    /// nesting depth after repeated oversized draws.
    pub fn program(&mut self) -> Program {
        let mut attempt = 0;
        loop {
            self.counters = 0;
            self.par_nesting = 0;
            let depth = self.cfg.max_depth.saturating_sub(attempt / 8);
            let body = self.block(depth);
            if path_bound(&body) <= PATH_LIMIT && body.labels().len() <= STMT_LIMIT {
                return Program::new(body);
            }
            attempt += 1;
        }
    }

    fn pick_var(&mut self) -> VarName {
        var(self.vars.choose(&mut self.rng).expect("at least one variable"))
    }

    fn prob(&mut self) -> Prob {
        let (n, d) = *PROBS.choose(&mut self.rng).expect("nonempty");
        Prob::ratio(n, d).expect("valid probability")
    }

    fn block(&mut self, depth: usize) -> Stmt {
        let len = self.rng.gen_range(1..=3);
        Stmt::seq((0..len).map(|_| self.stmt(depth)).collect())
    }

    fn stmt(&mut self, depth: usize) -> Stmt {
        if depth > 0 && self.rng.gen_bool(0.35) {
            self.compound(depth)
        } else {
            self.leaf()
        }
    }

    fn atom(&mut self) -> AExpr {
        if self.rng.gen_bool(0.5) {
            AExpr::Var(self.pick_var())
        } else {
            AExpr::Num(self.rng.gen_range(0..=2))
        }
    }

    fn leaf(&mut self) -> Stmt {
        let x = self.pick_var();
        let y = self.pick_var();
        let kind = match self.rng.gen_range(0..13) {
            0..=3 => StmtKind::AddrOf {
                target: x,
                source: y,
            },
            4 | 5 => StmtKind::Assign {
                target: x,
                value: AExpr::Var(y),
            },
            6 | 7 => StmtKind::Load {
                target: x,
                pointer: y,
            },
            8 | 9 => StmtKind::Store {
                pointer: x,
                value: self.atom(),
            },
            10 => StmtKind::Assign {
                target: x,
                value: AExpr::Num(self.rng.gen_range(0..=3)),
            },
            11 => {
                let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul]
                    .choose(&mut self.rng)
                    .expect("nonempty");
                StmtKind::Assign {
                    target: x,
                    value: AExpr::bin(AExpr::Var(y), op, self.atom()),
                }
            }
            _ => StmtKind::Skip,
        };
        stmt(kind)
    }

    fn bexpr(&mut self, depth: usize) -> BExpr {
        match self.rng.gen_range(0..10) {
            0 => BExpr::True,
            1 => BExpr::False,
            2 if depth > 0 => BExpr::Not(Box::new(self.bexpr(depth - 1))),
            3 if depth > 0 => {
                let op = if self.rng.gen_bool(0.5) {
                    BoolOp::And
                } else {
                    BoolOp::Or
                };
                BExpr::Logic(Box::new(self.bexpr(depth - 1)), op, Box::new(self.bexpr(depth - 1)))
            }
            _ => {
                let op = if self.rng.gen_bool(0.5) {
                    CmpOp::Eq
                } else {
                    CmpOp::Le
                };
                BExpr::Cmp(self.atom(), op, self.atom())
            }
        }
    }

    fn compound(&mut self, depth: usize) -> Stmt {
        let threads = self.cfg.max_threads;
        let parallel = self.par_nesting < MAX_PAR_NESTING;
        loop {
            match self.rng.gen_range(0..5) {
                0 => {
                    let cond = self.bexpr(1);
                    let p_true = self.prob();
                    return stmt(StmtKind::If {
                        cond,
                        p_true,
                        then_branch: Box::new(self.block(depth - 1)),
                        else_branch: Box::new(self.block(depth - 1)),
                    });
                }
                1 => return self.counter_loop(depth),
                2 if parallel && threads >= 2 => {
                    let n = self.rng.gen_range(2..=threads);
                    self.par_nesting += 1;
                    let ts = (0..n).map(|_| self.block(depth - 1)).collect();
                    self.par_nesting -= 1;
                    return stmt(StmtKind::Par(ts));
                }
                3 if parallel => {
                    self.par_nesting += 1;
                    let n = self.rng.gen_range(1..=threads);
                    let arms = (0..n)
                        .map(|_| ParArm {
                            cond: self.bexpr(1),
                            prob: self.prob(),
                            body: self.block(depth - 1),
                        })
                        .collect();
                    self.par_nesting -= 1;
                    return stmt(StmtKind::ParIf(arms));
                }
                4 if parallel => {
                    let count = self.rng.gen_range(1..=threads) as u64;
                    self.par_nesting += 1;
                    let body = Box::new(self.block(depth - 1));
                    self.par_nesting -= 1;
                    return stmt(StmtKind::ParFor { count, body });
                }
                _ => continue,
            }
        }
    }

    /// `iK := 0; while (iK <= t - 1) @B { body; iK := iK + 1; }` with `t <= B`.
    fn counter_loop(&mut self, depth: usize) -> Stmt {
        self.counters += 1;
        let i = var(&format!("i{}", self.counters));
        let bound = self.rng.gen_range(0..=self.cfg.max_loop_bound);
        let trips = self.rng.gen_range(0..=bound) as i64;
        let limit = AExpr::bin(AExpr::Num(trips), ArithOp::Sub, AExpr::Num(1));
        let step = stmt(StmtKind::Assign {
            target: i.clone(),
            value: AExpr::bin(AExpr::Var(i.clone()), ArithOp::Add, AExpr::Num(1)),
        });
        let body = Stmt::seq(vec![self.block(depth - 1), step]);
        Stmt::seq(vec![
            stmt(StmtKind::Assign {
                target: i.clone(),
                value: AExpr::Num(0),
            }),
            stmt(StmtKind::While {
                cond: BExpr::Cmp(AExpr::Var(i), CmpOp::Le, limit),
                trip_bound: bound,
                body: Box::new(body),
            }),
        ])
    }

    /// A program that can neither abort nor branch: only `x := n`,
    /// `x := &y`, `x := y` and `skip`, composed by sequencing, `par` and
    /// `parfor`.
    pub fn mass_program(&mut self) -> Program {
        loop {
            let depth = self.cfg.max_depth.min(2);
            let body = self.mass_block(depth);
            if path_bound(&body) <= PATH_LIMIT {
                return Program::new(body);
            }
        }
    }

    fn mass_block(&mut self, depth: usize) -> Stmt {
        let len = self.rng.gen_range(1..=3);
        Stmt::seq((0..len).map(|_| self.mass_stmt(depth)).collect())
    }

    fn mass_stmt(&mut self, depth: usize) -> Stmt {
        let threads = self.cfg.max_threads;
        if depth > 0 && self.rng.gen_bool(0.4) {
            if threads >= 2 && self.rng.gen_bool(0.6) {
                let n = self.rng.gen_range(2..=threads);
                return stmt(StmtKind::Par((0..n).map(|_| self.mass_block(depth - 1)).collect()));
            }
            let count = self.rng.gen_range(1..=threads) as u64;
            return stmt(StmtKind::ParFor {
                count,
                body: Box::new(self.mass_block(depth - 1)),
            });
        }
        self.straight_leaf()
    }

    fn straight_leaf(&mut self) -> Stmt {
        let x = self.pick_var();
        let y = self.pick_var();
        stmt(match self.rng.gen_range(0..4) {
            0 => StmtKind::AddrOf {
                target: x,
                source: y,
            },
            1 => StmtKind::Assign {
                target: x,
                value: AExpr::Var(y),
            },
            2 => StmtKind::Assign {
                target: x,
                value: AExpr::Num(self.rng.gen_range(0..=3)),
            },
            _ => StmtKind::Skip,
        })
    }

    /// `par` of `n` threads, each a short sequence of non-failing leaves.
    pub fn straight_par(&mut self, n: usize) -> Program {
        let threads = (0..n)
            .map(|_| {
                let len = self.rng.gen_range(1..=3);
                Stmt::seq((0..len).map(|_| self.straight_leaf()).collect())
            })
            .collect();
        Program::new(stmt(StmtKind::Par(threads)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseResult {
    Pass,
    Fail(String),
    /// Some paths ran out of fuel.
    OutOfFuel,
    /// The analysis hit its denominator size limit.
    PrecisionLimit,
    Error(String),
}

/// Generates, renders and re-parses one case, then checks it from the
/// all-zero environment and the bottom type.
pub fn run_case(cfg: &FuzzConfig, index: usize, analyzer: &AnalyzerConfig) -> (String, CaseResult) {
    let generated = Generator::new(cfg, cfg.case_seed(index)).program();
    let text = render(&generated);
    let program = match parse(&text) {
        Ok(p) => p,
        Err(e) => return (text, CaseResult::Error(format!("rendered program does not parse: {e}"))),
    };
    let env = Env::zeroed(&program.vars);
    let pre = PtsType::bottom(&program.vars);
    let result = match check_program(&program, env, &pre, analyzer, &RunConfig::default()) {
        Ok(report) => match report.verdict {
            Verdict::Sound => CaseResult::Pass,
            Verdict::Inconclusive { .. } => CaseResult::OutOfFuel,
            Verdict::Violation(c) => CaseResult::Fail(format!(
                "final state {} (weight {}) is not modeled by {}: {} holds {} outside its support",
                c.env,
                c.weight,
                report.post,
                c.var,
                c.address.render(&program.vars)
            )),
        },
        Err(CheckError::Analyze(AnalyzeError::PrecisionLimit { .. })) => CaseResult::PrecisionLimit,
        Err(CheckError::Analyze(e)) => CaseResult::Error(format!("analysis failed: {e}")),
        Err(CheckError::Run(e)) => CaseResult::Error(format!("run failed: {e}")),
    };
    (text, result)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FuzzSummary {
    pub passed: usize,
    pub failed: usize,
    pub out_of_fuel: usize,
    pub precision_limited: usize,
    pub errors: usize,
    /// `(case seed, program text, reason)` for each failing or erroring case, in seed order.
    pub findings: Vec<(u64, String, String)>,
}

impl FuzzSummary {
    /// Cases that reached no verdict.
    pub fn inconclusive(&self) -> usize {
        self.out_of_fuel + self.precision_limited
    }

    pub fn total(&self) -> usize {
        self.passed + self.failed + self.inconclusive() + self.errors
    }
}

pub fn run_fuzz(cfg: &FuzzConfig, analyzer: &AnalyzerConfig) -> FuzzSummary {
    let mut summary = FuzzSummary::default();
    for i in 0..cfg.count {
        let (text, result) = run_case(cfg, i, analyzer);
        match result {
            CaseResult::Pass => summary.passed += 1,
            CaseResult::OutOfFuel => summary.out_of_fuel += 1,
            CaseResult::PrecisionLimit => summary.precision_limited += 1,
            CaseResult::Fail(why) => {
                summary.failed += 1;
                summary.findings.push((cfg.case_seed(i), text, why));
            }
            CaseResult::Error(why) => {
                summary.errors += 1;
                summary.findings.push((cfg.case_seed(i), text, why));
            }
        }
    }
    summary
}

/// Human-readable summary; byte-identical for identical inputs.
pub fn format_summary(cfg: &FuzzConfig, analyzer: &AnalyzerConfig, s: &FuzzSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "fuzz: seed={} count={} max_vars={} max_threads={} max_loop_bound={} max_depth={} mode={} max_bits={}",
        cfg.seed,
        cfg.count,
        cfg.max_vars,
        cfg.max_threads,
        cfg.max_loop_bound,
        cfg.max_depth,
        analyzer.while_mode.as_str(),
        analyzer
            .max_denominator_bits
            .map_or_else(|| "none".to_string(), |b| b.to_string())
    );
    let _ = writeln!(out, "passed: {}", s.passed);
    let _ = writeln!(out, "failed: {}", s.failed);
    let _ = writeln!(
        out,
        "inconclusive: {} (out of fuel: {}, precision limit: {})",
        s.inconclusive(),
        s.out_of_fuel,
        s.precision_limited
    );
    let _ = writeln!(out, "errors: {}", s.errors);
    for (seed, text, why) in &s.findings {
        let _ = writeln!(out, "\ncase seed {seed}: {why}");
        out.push_str(text);
    }
    out
}
