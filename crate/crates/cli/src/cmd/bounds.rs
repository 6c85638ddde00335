use clap::Args;
use rayon::prelude::*;

use stratdp::theory::{expected_sum_log_mc, lemma1_max, sparse_ref, thm1_bound, DirichletParams};
use stratdp::RngHandle;

use crate::output::{config_err, nonempty, num, CliResult, Report, Sink};
use crate::svg::LineChart;
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Dirichlet α grid [default: 0.20, 0.25, …, 0.95].
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Dirichlet draws for the Monte Carlo column.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

fn default_alpha_grid() -> Vec<f64> {
    (0..16).map(|i| (20 + 5 * i) as f64 / 100.0).collect()
}

pub fn run(args: BoundsArgs) -> CliResult<()> {
    let alphas = args.alpha.clone().unwrap_or_else(default_alpha_grid);
    nonempty(&alphas, "alpha")?;
    if args.trials == 0 {
        return Err(config_err("--trials must be at least 1"));
    }
    let lemma = lemma1_max(args.n, args.k)?;
    // Undefined at n = k; reported as nan rather than failing the whole table.
    let sparse = sparse_ref(args.n, args.k).unwrap_or(f64::NAN);
    let params = alphas
        .iter()
        .map(|&a| DirichletParams::new(a, args.k))
        .collect::<Result<Vec<_>, _>>()?;
    let sink = Sink::open(&args.common)?;

    let rows = params
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rng = RngHandle::new(args.common.seed, i as u64).rng();
            let mc = expected_sum_log_mc(p, args.n, args.trials, &mut rng)?;
            Ok((thm1_bound(p, args.n)?, mc.mean))
        })
        .collect::<Result<Vec<_>, stratdp::Error>>()?;

    let mut report = Report::new("bounds", &args.common, &args);
    report.note("values: expected or maximal sum over groups of ln|G_i|, sizes real-valued");
    if sparse.is_nan() {
        report.warn("sparse reference undefined for n = k");
    }
    report.columns(&["alpha", "thm1", "lemma1_max", "sparse_ref", "mc_mean"]);
    let mut chart = LineChart::new(
        &format!("Sum of log group sizes, n={}, k={}", args.n, args.k),
        "alpha",
        "value",
    );
    for (&a, &(thm1, mc)) in alphas.iter().zip(&rows) {
        report.row(vec![num(a), num(thm1), num(lemma), num(sparse), num(mc)]);
        chart.push("Dirichlet expectation", a, thm1);
        chart.push("equal-size maximum", a, lemma);
        chart.push("sparse reference", a, sparse);
        chart.push("Monte Carlo", a, mc);
    }
    report.finish(sink, Some(chart), args.common.strict)
}
