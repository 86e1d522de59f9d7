//! `cps-lab`: JSON-in, JSON-out driver for the bid-ask market toolkit.
//!
//! Exit status: 0 on success, 1 when the checked condition is violated, 2 on
//! input errors.

mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cps_lab::acceptance::DEFAULT_SEED;
use cps_lab::cps::CpsBounds;
use cps_lab::pathlab::excursions::ExcursionOptions;
use cps_lab::pathlab::Scenario;
use cps_lab::{Condition, CpsOptions, Execution};

use commands::{choose_arith, in_kernel, node_count, parse_json, Arith, SimulateArgs};
use report::{assemble, emit, read_input, CliError, InputFile, Outcome, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "cps-lab", version, about = "Bid-ask envelopes, no-arbitrage checks and consistent price systems on event trees")]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConditionArg {
    NaNf,
    NaPs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExecutionArg {
    Envelopes,
    Raw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    Larsson,
    Admissibility,
    Brownian,
    SpreadWalk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CorpusArg {
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Actual bid/ask envelopes, spread, and crossing set.
    Envelopes { spec: PathBuf },
    /// Self-financing ledger and portfolio values of a strategy.
    Value {
        spec: PathBuf,
        strategy: PathBuf,
        /// Admissibility constant to check.
        #[arg(long = "M", value_name = "M")]
        m: Option<String>,
        #[arg(long, value_enum, default_value = "envelopes")]
        execution: ExecutionArg,
    },
    /// Decide a no-arbitrage condition.
    Check {
        spec: PathBuf,
        #[arg(long, value_enum)]
        condition: ConditionArg,
        /// Require exact rational arithmetic.
        #[arg(long)]
        certified: bool,
    },
    /// Construct a consistent price system.
    FindCps {
        spec: PathBuf,
        #[arg(long)]
        certified: bool,
        /// Keep the price strictly inside positive spreads.
        #[arg(long)]
        strict: bool,
        /// Bound the price by the quoted instead of the actual bid and ask.
        #[arg(long)]
        raw_bounds: bool,
    },
    /// No-arbitrage verdict and consistent price system side by side.
    Duality {
        spec: PathBuf,
        #[arg(long)]
        certified: bool,
    },
    /// Simulate bid/ask paths and decompose their spread excursions.
    Simulate {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long = "n-scen", default_value_t = 100)]
        n_scen: usize,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Spread values at most this are treated as zero.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Increments above this count as jumps.
        #[arg(long, default_value_t = 1e-2)]
        jump_threshold: f64,
        /// Jump date of the larsson scenario.
        #[arg(long, default_value_t = 0.5)]
        t1: f64,
        /// Truncation level of the admissibility scenario.
        #[arg(long, default_value_t = 16)]
        level: u32,
        /// Include the sampled paths in the report.
        #[arg(long)]
        paths: bool,
    },
    /// Check the drift and martingale moment bounds on random supermartingales.
    Doob {
        #[arg(long, value_enum, default_value = "random")]
        corpus: CorpusArg,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        branching: usize,
    },
    /// Run the acceptance suite.
    Accept {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Reduced corpus sizes.
        #[arg(long)]
        quick: bool,
        /// Negative control: corrupt the envelopes used by the tree criteria.
        #[arg(long)]
        mutate_envelopes: bool,
    },
}

fn arith_env() -> Option<String> {
    std::env::var("CPS_LAB_ARITH").ok()
}

fn load_spec(path: &Path, certified: bool) -> Result<(InputFile, serde_json::Value, Arith), CliError> {
    let input = read_input(path)?;
    let spec = parse_json(&input.text)?;
    let arith = choose_arith(arith_env().as_deref(), certified, node_count(&spec))?;
    Ok((input, spec, arith))
}

fn run(cli: &Cli) -> Result<(RunConfig, Vec<InputFile>, Outcome), CliError> {
    let out = cli.out.as_ref().map(|p| p.display().to_string());
    let mut config = match &cli.command {
        Command::Envelopes { .. } => RunConfig::new("envelopes"),
        Command::Value { .. } => RunConfig::new("value"),
        Command::Check { .. } => RunConfig::new("check"),
        Command::FindCps { .. } => RunConfig::new("find-cps"),
        Command::Duality { .. } => RunConfig::new("duality"),
        Command::Simulate { .. } => RunConfig::new("simulate"),
        Command::Doob { .. } => RunConfig::new("doob"),
        Command::Accept { .. } => RunConfig::new("accept"),
    };
    config.out = out;
    let (inputs, outcome) = match &cli.command {
        Command::Envelopes { spec } => {
            let (input, spec, arith) = load_spec(spec, false)?;
            let o = in_kernel(arith, &spec, |m| Ok((commands::envelopes(m), false)), |m| Ok((commands::envelopes(m), false)))?;
            (vec![input], o)
        }
        Command::Value { spec, strategy, m, execution } => {
            let (input, spec, arith) = load_spec(spec, false)?;
            let strat = read_input(strategy)?;
            let exec = match execution {
                ExecutionArg::Envelopes => Execution::Envelopes,
                ExecutionArg::Raw => Execution::Raw,
            };
            config = config.option("M", m).option("execution", exec);
            let text = strat.text.clone();
            let o = in_kernel(
                arith,
                &spec,
                |model| commands::value(model, &text, m.as_deref(), exec),
                |model| commands::value(model, &text, m.as_deref(), exec),
            )?;
            (vec![input, strat], o)
        }
        Command::Check { spec, condition, certified } => {
            let (input, spec, arith) = load_spec(spec, *certified)?;
            let cond = match condition {
                ConditionArg::NaNf => Condition::NaNf,
                ConditionArg::NaPs => Condition::NaPs,
            };
            config.certified = *certified;
            config = config.option("condition", cond);
            let o = in_kernel(arith, &spec, |m| commands::check(m, cond), |m| commands::check(m, cond))?;
            (vec![input], o)
        }
        Command::FindCps { spec, certified, strict, raw_bounds } => {
            let (input, spec, arith) = load_spec(spec, *certified)?;
            let opts = CpsOptions { bounds: if *raw_bounds { CpsBounds::Raw } else { CpsBounds::Envelopes }, strict: *strict };
            config.certified = *certified;
            config = config.option("strict", strict).option("bounds", opts.bounds);
            let o = in_kernel(arith, &spec, |m| commands::find(m, opts), |m| commands::find(m, opts))?;
            (vec![input], o)
        }
        Command::Duality { spec, certified } => {
            let (input, spec, arith) = load_spec(spec, *certified)?;
            config.certified = *certified;
            let o = in_kernel(arith, &spec, commands::duality, commands::duality)?;
            (vec![input], o)
        }
        Command::Simulate { scenario, n_scen, grid, seed, eps, jump_threshold, t1, level, paths } => {
            let scenario = match scenario {
                ScenarioArg::Larsson => Scenario::Larsson { horizon: 1.0, t1: *t1 },
                ScenarioArg::Admissibility => Scenario::Admissibility,
                ScenarioArg::Brownian => Scenario::brownian_default(),
                ScenarioArg::SpreadWalk => Scenario::spread_walk_default(),
            };
            config.seed = Some(*seed);
            config.grid = Some(*grid);
            config.scenarios = Some(*n_scen);
            config = config
                .option("scenario", &scenario)
                .option("eps", eps)
                .option("jump_threshold", jump_threshold)
                .option("level", level)
                .option("paths", paths);
            let args = SimulateArgs {
                scenario,
                n_scen: *n_scen,
                grid: *grid,
                seed: *seed,
                excursions: ExcursionOptions { eps: *eps, jump_threshold: *jump_threshold, ..ExcursionOptions::default() },
                include_paths: *paths,
                level: *level,
            };
            let (result, violated) = commands::simulate(&args)?;
            (vec![], Outcome { arithmetic: "float", result, violated })
        }
        Command::Doob { corpus: CorpusArg::Random, count, seed, depth, branching } => {
            let arith = choose_arith(arith_env().as_deref(), false, 0)?;
            config.seed = Some(*seed);
            config.scenarios = Some(*count);
            config = config.option("corpus", "random").option("depth", depth).option("branching", branching);
            let (result, violated) = commands::doob(*count, *seed, *depth, *branching, arith)?;
            (vec![], Outcome { arithmetic: arith.name(), result, violated })
        }
        Command::Accept { seed, quick, mutate_envelopes } => {
            choose_arith(arith_env().as_deref(), true, 0)?;
            config.certified = true;
            config.seed = Some(*seed);
            config = config.option("quick", quick).option("mutate_envelopes", mutate_envelopes);
            let (result, violated) = commands::accept(*seed, *quick, *mutate_envelopes);
            (vec![], Outcome { arithmetic: "rational", result, violated })
        }
    };
    config.inputs = inputs.iter().map(|i| i.path.clone()).collect();
    Ok((config, inputs, outcome))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli).and_then(|(config, inputs, outcome)| {
        emit(&assemble(&config, &inputs, &outcome), cli.out.as_deref())?;
        Ok(outcome.violated)
    }) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
