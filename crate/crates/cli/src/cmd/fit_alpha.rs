use std::path::PathBuf;

use clap::Args;

use stratdp::tabular::partition;
use stratdp::theory::{fit_dirichlet_alpha, AlphaGrid, Saturation};
use stratdp::RngHandle;

use super::load_table;
use crate::output::{config_err, num, CliResult, Report, Sink};
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct FitAlphaArgs {
    /// Observed group shares, summing to 1.
    #[arg(long, value_delimiter = ',', conflicts_with = "data")]
    pub proportions: Option<Vec<f64>>,
    /// Categorical CSV whose group shares are fitted (needs --schema and --group-attrs).
    #[arg(long, requires_all = ["schema", "group_attrs"])]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub group_attrs: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha_lo: f64,
    #[arg(long, default_value_t = 1e3)]
    pub alpha_hi: f64,
    /// Grid points per refinement pass.
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
    /// Monte Carlo draws per candidate α.
    #[arg(long, default_value_t = 20_000)]
    pub draws: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: FitAlphaArgs) -> CliResult<()> {
    let sink = Sink::open(&args.common)?;
    let shares = match (&args.proportions, &args.data) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => {
            let schema = args.schema.as_ref().expect("required by clap");
            let data = load_table(path, schema)?;
            let names = args.group_attrs.as_ref().expect("required by clap");
            let attrs = data.schema().indices_of(names)?;
            let p = partition(&data, &attrs)?;
            let n = data.len().max(1) as f64;
            p.sizes().iter().map(|&s| s as f64 / n).collect()
        }
        (None, None) => return Err(config_err("give --proportions or --data")),
    };
    let grid = AlphaGrid {
        lo: args.alpha_lo,
        hi: args.alpha_hi,
        steps: args.steps,
    };
    let fit = fit_dirichlet_alpha(
        &shares,
        grid,
        args.draws,
        RngHandle::new(args.common.seed, 0),
    )?;

    let mut report = Report::new("fit-alpha", &args.common, &args);
    report.note("fit: total-variation distance between sorted shares and the Monte Carlo mean of sorted Dirichlet draws");
    let saturation = match fit.saturated {
        Some(Saturation::Lower) => {
            report.warn("fitted alpha is pinned at the grid bottom; shares are sparser than the grid allows");
            "lower"
        }
        Some(Saturation::Upper) => {
            report.warn("fitted alpha is pinned at the grid top; shares are close to uniform");
            "upper"
        }
        None => "none",
    };
    report.columns(&["alpha", "distance", "k", "saturated", "proportions"]);
    let used: Vec<String> = fit.proportions.iter().map(|&p| num(p)).collect();
    report.row(vec![
        num(fit.alpha),
        num(fit.distance),
        shares.len().to_string(),
        saturation.into(),
        used.join(" "),
    ]);
    report.finish(sink, None, args.common.strict)
}
