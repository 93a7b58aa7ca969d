use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use probpts_cli::commands::{
    cmd_analyze, cmd_check, cmd_fuzz, cmd_run, AnalyzeOptions, CheckOptions, Format, RunOptions,
    EXIT_CONFIG,
};
use probpts_cli::fuzz::{FuzzConfig, DEFAULT_MAX_BITS};
use probpts_cli::init::InitSpec;
use probpts_core::analyzer::{AnalyzerConfig, ParStop, WhileMode};
use probpts_core::interp::RunConfig;

#[derive(Parser)]
#[command(name = "probpts", version, about = "Probabilistic points-to analysis for fork-join programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Safe,
}

impl From<ModeArg> for WhileMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => WhileMode::Paper,
            ModeArg::Safe => WhileMode::Safe,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PreArg {
    Bottom,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParStopArg {
    Exact,
    Support,
}

#[derive(clap::Args)]
struct Analysis {
    #[arg(long, value_enum, default_value = "safe")]
    while_mode: ModeArg,
    /// Jacobi rounds allowed per `par`.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(2..))]
    par_rounds: u64,
    /// `support` stops a `par` at the first support-stable round; `exact`
    /// keeps iterating to the round cap.
    #[arg(long, value_enum, default_value = "support")]
    par_stop: ParStopArg,
    /// Give up once a probability's denominator exceeds this many bits.
    #[arg(long)]
    max_bits: Option<u64>,
}

impl Analysis {
    fn config(&self) -> AnalyzerConfig {
        AnalyzerConfig {
            while_mode: self.while_mode.into(),
            par_round_cap: self.par_rounds as usize,
            par_stop: match self.par_stop {
                ParStopArg::Exact => ParStop::Exact,
                ParStopArg::Support => ParStop::Support,
            },
            max_denominator_bits: self.max_bits,
            ..AnalyzerConfig::default()
        }
    }
}

#[derive(clap::Args)]
struct Exec {
    /// Loop iterations allowed along one path.
    #[arg(long, default_value_t = 1000)]
    fuel: u64,
    /// Initial values, e.g. `x=3,y=&z`; other variables start at 0.
    #[arg(long, default_value = "")]
    init: String,
    /// Largest `par` the interpreter will enumerate.
    #[arg(long, default_value_t = 7)]
    parcap: usize,
}

impl Exec {
    fn parts(&self) -> Result<(InitSpec, RunConfig), String> {
        let init = InitSpec::parse(&self.init).map_err(|e| e.to_string())?;
        Ok((
            init,
            RunConfig {
                fuel: self.fuel,
                permutation_cap: self.parcap,
            },
        ))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the points-to type before and after every statement.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[command(flatten)]
        analysis: Analysis,
        /// Initial points-to type.
        #[arg(long, value_enum, default_value = "bottom")]
        pre: PreArg,
    },
    /// Enumerate every outcome of the program.
    Run {
        file: PathBuf,
        #[command(flatten)]
        exec: Exec,
    },
    /// Check that every final state is modeled by the analyzed post type.
    Check {
        file: PathBuf,
        #[command(flatten)]
        analysis: Analysis,
        #[command(flatten)]
        exec: Exec,
    },
    /// Check randomly generated programs.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_vars: usize,
        #[arg(long, default_value_t = 3)]
        max_threads: usize,
        #[arg(long, default_value_t = 2)]
        max_loop_bound: u64,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, value_enum, default_value = "safe")]
        while_mode: ModeArg,
        /// Denominator size limit; cases exceeding it count as inconclusive.
        #[arg(long, default_value_t = DEFAULT_MAX_BITS)]
        max_bits: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = match cli.command {
        Command::Analyze {
            file,
            format,
            analysis,
            pre: PreArg::Bottom,
        } => {
            let opts = AnalyzeOptions {
                format: match format {
                    FormatArg::Table => Format::Table,
                    FormatArg::Json => Format::Json,
                },
                analyzer: analysis.config(),
            };
            cmd_analyze(&file, &opts, &mut out, &mut err)
        }
        Command::Run { file, exec } => match exec.parts() {
            Ok((init, run)) => cmd_run(&file, &RunOptions { init, run }, &mut out, &mut err),
            Err(e) => config_error(&mut err, &e),
        },
        Command::Check {
            file,
            analysis,
            exec,
        } => match exec.parts() {
            Ok((init, run)) => {
                let opts = CheckOptions {
                    init,
                    analyzer: analysis.config(),
                    run,
                };
                cmd_check(&file, &opts, &mut out, &mut err)
            }
            Err(e) => config_error(&mut err, &e),
        },
        Command::Fuzz {
            seed,
            count,
            max_vars,
            max_threads,
            max_loop_bound,
            max_depth,
            while_mode,
            max_bits,
        } => {
            let cfg = FuzzConfig {
                seed,
                count,
                max_vars,
                max_threads,
                max_loop_bound,
                max_depth,
            };
            let analyzer = AnalyzerConfig {
                while_mode: while_mode.into(),
                max_denominator_bits: Some(max_bits),
                ..AnalyzerConfig::default()
            };
            cmd_fuzz(&cfg, &analyzer, &mut out, &mut err)
        }
    };
    ExitCode::from(code as u8)
}

fn config_error(err: &mut dyn io::Write, message: &str) -> i32 {
    let _ = writeln!(err, "error: {message}");
    EXIT_CONFIG
}
