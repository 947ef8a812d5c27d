//! Command-line front end: every experiment and utility is a subcommand
//! driven by one TOML config.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stablelab::verify::schema_sections;

#[derive(Parser, Debug)]
#[command(name = "stablelab", version, about = "Stable Lévy operators, heat kernels and Schauder-ratio experiments")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More output (-v prints reports to stdout).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Suppress the summary lines.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed (overrides the config's seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lévy symbol ψ(ξ) by closed form and adaptive quadrature.
    #[command(after_help = help(&["measure", "symbol", "output"]))]
    Symbol(Common),
    /// Hölder and Besov norms and the dyadic block profile of a catalog function.
    #[command(name = "lp-norms", after_help = help(&["grid", "measure", "lp", "output"]))]
    LpNorms(Common),
    /// Applies the nonlocal operator and the drift term to a catalog function.
    #[command(name = "apply-op", after_help = help(&["measure", "coefficients", "grid", "apply", "output"]))]
    ApplyOp(Common),
    /// Monte Carlo samples of X_{s,t} and their density estimate.
    #[command(name = "kernel-mc", after_help = help(&["params", "measure", "coefficients", "kernel", "output"]))]
    KernelMc(Common),
    /// Dyadic moment decay of the transition density.
    #[command(after_help = help(&["params", "measure", "coefficients", "cru", "output"]))]
    Cru(Common),
    /// Solves the Cauchy problem; with a [mollify] section also runs the
    /// mollified-coefficient ladder.
    #[command(after_help = help(&["params", "measure", "coefficients", "grid", "solver", "mollify", "output"]))]
    Solve(Common),
    /// Schauder ratio on a refinement ladder.
    #[command(after_help = help(&["params", "measure", "coefficients", "grid", "solver", "schauder", "output"]))]
    Schauder(Common),
    /// Randomized checks of the Hölder-space lemmas.
    #[command(name = "regularity-suite", after_help = help(&["regularity", "output"]))]
    RegularitySuite(Common),
}

fn help(sections: &[&str]) -> String {
    format!("Config keys:\n{}", schema_sections(sections))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let verbosity = if cli.quiet { 0 } else { 1 + cli.verbose };
    let (common, run): (&Common, commands::Runner) = match &cli.command {
        Command::Symbol(c) => (c, commands::symbol),
        Command::LpNorms(c) => (c, commands::lp_norms),
        Command::ApplyOp(c) => (c, commands::apply_op),
        Command::KernelMc(c) => (c, commands::kernel_mc),
        Command::Cru(c) => (c, commands::cru),
        Command::Solve(c) => (c, commands::solve),
        Command::Schauder(c) => (c, commands::schauder),
        Command::RegularitySuite(c) => (c, commands::regularity_suite),
    };
    ExitCode::from(commands::execute(common, run, verbosity))
}
