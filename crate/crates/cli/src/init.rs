//! `--init x=3,y=&z` initial environments.

use std::sync::Arc;

use probpts_core::lang::{Program, VarName};
use probpts_core::pts::{Address, AddrProbSet, Env, PtsType, Value};
use probpts_core::Prob;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitError {
    #[error("malformed --init entry `{0}` (expected `x=INT` or `x=&y`)")]
    Malformed(String),
    #[error("--init assigns `{0}` twice")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitValue {
    Int(i64),
    Addr(VarName),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InitSpec {
    pub entries: Vec<(VarName, InitValue)>,
}

impl InitSpec {
    pub fn parse(text: &str) -> Result<InitSpec, InitError> {
        let mut entries: Vec<(VarName, InitValue)> = Vec::new();
        for raw in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let malformed = || InitError::Malformed(raw.to_string());
            let (lhs, rhs) = raw.split_once('=').ok_or_else(malformed)?;
            let var = VarName::new(lhs.trim()).ok_or_else(malformed)?;
            let rhs = rhs.trim();
            let value = match rhs.strip_prefix('&') {
                Some(target) => InitValue::Addr(VarName::new(target.trim()).ok_or_else(malformed)?),
                None => InitValue::Int(rhs.parse().map_err(|_| malformed())?),
            };
            if entries.iter().any(|(v, _)| *v == var) {
                return Err(InitError::Duplicate(var.to_string()));
            }
            entries.push((var, value));
        }
        Ok(InitSpec { entries })
    }

    /// Variables mentioned by the spec, in order.
    fn names(&self) -> Vec<VarName> {
        let mut out = Vec::new();
        for (var, value) in &self.entries {
            out.push(var.clone());
            if let InitValue::Addr(t) = value {
                out.push(t.clone());
            }
        }
        out
    }

    /// Extends the program's variables with any the spec mentions, then
    /// builds the initial environment (unassigned variables hold 0) and the
    /// matching pre type, which gives each initialized address probability 1.
    pub fn apply(&self, program: &Program) -> (Program, Env, PtsType) {
        let program = program.with_extra_vars(self.names());
        let vars = Arc::clone(&program.vars);
        let mut env = Env::zeroed(&vars);
        let mut pre = PtsType::bottom(&vars);
        for (var, value) in &self.entries {
            let x = vars.id(var).expect("variable was just added");
            match value {
                InitValue::Int(n) => env.set(x, Value::Int(*n)),
                InitValue::Addr(t) => {
                    let a = Address(vars.id(t).expect("variable was just added"));
                    env.set(x, Value::Addr(a));
                    pre.set(x, AddrProbSet::singleton(a, Prob::one()))
                        .expect("singleton of mass one");
                }
            }
        }
        (program, env, pre)
    }
}
