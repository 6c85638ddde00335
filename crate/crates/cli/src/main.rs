// Negated float comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cmd;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "stratdp",
    version,
    about = "Stratified differentially private mean estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean-estimation error and parity error on Gaussian mixtures over (n, k) grids.
    MeanSweep(cmd::mean_sweep::MeanSweepArgs),
    /// Stratification penalty bounds across a Dirichlet α grid.
    Bounds(cmd::bounds::BoundsArgs),
    /// Coinpress variants on a categorical CSV with a growing list of group attributes.
    CoinpressCsv(cmd::coinpress_csv::CoinpressCsvArgs),
    /// Fit a symmetric Dirichlet α to observed group shares.
    FitAlpha(cmd::fit_alpha::FitAlphaArgs),
    /// Workload and parity error of the noisy-histogram synthesizer across ε.
    SynthEval(cmd::synth_eval::SynthEvalArgs),
    /// Write one Gaussian mixture dataset as `group_id,value` rows.
    GenMixture(cmd::gen_mixture::GenMixtureArgs),
    /// Dump exact marginals of a categorical CSV.
    Marginals(cmd::marginals::MarginalsArgs),
}

/// Options shared by every subcommand.
#[derive(Clone, Args)]
pub struct Common {
    /// Master seed.
    #[arg(long, env = "STRATDP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG line chart derived from the CSV.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Treat degenerate-statistics warnings as errors (exit code 4).
    #[arg(long)]
    pub strict: bool,
}

// Output paths are left out so the recorded config is identical across reruns into other files.
impl std::fmt::Debug for Common {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Common")
            .field("seed", &self.seed)
            .field("strict", &self.strict)
            .finish()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MeanSweep(a) => cmd::mean_sweep::run(a),
        Command::Bounds(a) => cmd::bounds::run(a),
        Command::CoinpressCsv(a) => cmd::coinpress_csv::run(a),
        Command::FitAlpha(a) => cmd::fit_alpha::run(a),
        Command::SynthEval(a) => cmd::synth_eval::run(a),
        Command::GenMixture(a) => cmd::gen_mixture::run(a),
        Command::Marginals(a) => cmd::marginals::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
