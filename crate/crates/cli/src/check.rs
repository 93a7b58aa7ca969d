//! Empirical soundness check: every final state of an exhaustive run must
//! be modeled by the analyzer's post type.

use probpts_core::analyzer::{analyze_program, AnalyzeError, AnalyzerConfig};
use probpts_core::interp::{run, Outcome, RunConfig, RunError, WeightedEnv};
use probpts_core::lang::{Program, VarName};
use probpts_core::pts::{Address, Env, PtsType, Value};
use probpts_core::Prob;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// A final state the post type does not model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub env: Env,
    pub weight: Prob,
    pub var: VarName,
    pub address: Address,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sound,
    Violation(Counterexample),
    /// Some paths ran out of fuel; the finals seen so far were all modeled.
    Inconclusive { out_of_fuel: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub post: PtsType,
    pub finals: usize,
    pub outcomes: usize,
}

/// First variable whose concrete address falls outside its support.
pub fn find_escape(post: &PtsType, env: &Env) -> Option<(VarName, Address)> {
    env.vars().ids().find_map(|x| match env.get(x) {
        Value::Addr(a) if !post.get(x).contains(a) => Some((env.vars().name(x).clone(), a)),
        _ => None,
    })
}

/// Analyzes `program` from `pre` and runs it from `env`, which should model `pre`.
pub fn check_program(
    program: &Program,
    env: Env,
    pre: &PtsType,
    analyzer: &AnalyzerConfig,
    runner: &RunConfig,
) -> Result<CheckReport, CheckError> {
    let analysis = analyze_program(program, pre, analyzer)?;
    let post = analysis.post[&program.body.label].clone();
    let outcomes = run(&program.body, WeightedEnv::certain(env), runner)?;

    let mut finals = 0;
    let mut out_of_fuel = 0;
    let mut violation = None;
    for o in &outcomes {
        match o {
            Outcome::Final(w) => {
                finals += 1;
                if violation.is_none() {
                    if let Some((var, address)) = find_escape(&post, &w.env) {
                        violation = Some(Counterexample {
                            env: w.env.clone(),
                            weight: w.weight.clone(),
                            var,
                            address,
                        });
                    }
                }
            }
            Outcome::OutOfFuel(_) => out_of_fuel += 1,
            Outcome::Abort(_) => {}
        }
    }
    let verdict = match violation {
        Some(c) => Verdict::Violation(c),
        None if out_of_fuel > 0 => Verdict::Inconclusive { out_of_fuel },
        None => Verdict::Sound,
    };
    Ok(CheckReport {
        verdict,
        post,
        finals,
        outcomes: outcomes.len(),
    })
}
