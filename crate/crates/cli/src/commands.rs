//! Subcommand bodies. Each writes to the given streams and returns the
//! process exit code.

use std::io::Write;
use std::path::Path;

use probpts_core::analyzer::{analyze_program, AnalyzerConfig};
use probpts_core::interp::{run, summarize, RunConfig, WeightedEnv};
use probpts_core::lang::{parse, Program};
use probpts_core::pts::PtsType;
use probpts_core::Prob;

use crate::check::{check_program, CheckError, Verdict};
use crate::fuzz::{format_summary, run_fuzz, FuzzConfig};
use crate::init::InitSpec;
use crate::report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNSOUND: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub format: Format,
    pub analyzer: AnalyzerConfig,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub init: InitSpec,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub init: InitSpec,
    pub analyzer: AnalyzerConfig,
    pub run: RunConfig,
}

fn load(path: &Path, err: &mut dyn Write) -> Result<Program, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    parse(&text).map_err(|e| {
        let _ = writeln!(err, "{}:{e}", path.display());
        EXIT_PARSE
    })
}

fn fraction(p: &Prob) -> String {
    format!("{} ({})", p, p.to_decimal_string())
}

pub fn cmd_analyze(path: &Path, opts: &AnalyzeOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let program = match load(path, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let pre = PtsType::bottom(&program.vars);
    let analysis = match analyze_program(&program, &pre, &opts.analyzer) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let report = Report::build(&path.display().to_string(), opts.analyzer.while_mode, &program, &analysis);
    let text = match opts.format {
        Format::Table => report.to_table(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json()).expect("plain JSON value");
            s.push('\n');
            s
        }
    };
    let _ = out.write_all(text.as_bytes());
    EXIT_OK
}

pub fn cmd_run(path: &Path, opts: &RunOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let program = match load(path, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let (program, env, _) = opts.init.apply(&program);
    let outcomes = match run(&program.body, WeightedEnv::certain(env), &opts.run) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let summary = summarize(&outcomes);
    for (env, p) in &summary.finals {
        let _ = writeln!(out, "{env}  {}", fraction(p));
    }
    let _ = writeln!(out, "abort: {}", fraction(&summary.abort));
    let _ = writeln!(out, "out-of-fuel: {}", fraction(&summary.out_of_fuel));
    let _ = writeln!(out, "total_mass: {}", fraction(&summary.total));
    let _ = writeln!(out, "outcomes: {}", outcomes.len());
    EXIT_OK
}

pub fn cmd_check(path: &Path, opts: &CheckOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let program = match load(path, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let (program, env, pre) = opts.init.apply(&program);
    let report = match check_program(&program, env, &pre, &opts.analyzer, &opts.run) {
        Ok(r) => r,
        Err(CheckError::Analyze(e)) => {
            let _ = writeln!(err, "error: analysis failed: {e}");
            return EXIT_CONFIG;
        }
        Err(CheckError::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let _ = writeln!(out, "post: {}", report.post);
    let _ = writeln!(out, "outcomes: {} ({} final)", report.outcomes, report.finals);
    match report.verdict {
        Verdict::Sound => {
            let _ = writeln!(out, "sound: every final state is modeled by the post type");
            EXIT_OK
        }
        Verdict::Violation(c) => {
            let _ = writeln!(
                out,
                "violation: final state {} (weight {}) has {} = {}, outside its support",
                c.env,
                c.weight,
                c.var,
                c.address.render(&program.vars)
            );
            EXIT_UNSOUND
        }
        Verdict::Inconclusive { out_of_fuel } => {
            let _ = writeln!(
                out,
                "inconclusive: {out_of_fuel} path(s) ran out of fuel; all finished paths are modeled"
            );
            let _ = writeln!(
                out,
                "hint: raise --fuel (now {}) to explore them",
                opts.run.fuel
            );
            EXIT_INCONCLUSIVE
        }
    }
}

pub fn cmd_fuzz(cfg: &FuzzConfig, analyzer: &AnalyzerConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CONFIG;
    }
    let summary = run_fuzz(cfg, analyzer);
    let _ = out.write_all(format_summary(cfg, analyzer, &summary).as_bytes());
    if summary.failed > 0 {
        EXIT_UNSOUND
    } else {
        EXIT_OK
    }
}
