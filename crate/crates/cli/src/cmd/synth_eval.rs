use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use stratdp::tabular::{
    all_k_way_workload, parity_error_tabular, partition, size_weights, strat_histogram_synth,
    workload_error, DegeneratePolicy,
};
use stratdp::{GroupKey, RngHandle};

use super::load_table;
use crate::output::{config_err, mean_sd, nonempty, num, CliResult, Report, Sink};
use crate::svg::LineChart;
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct SynthEvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Attributes defining the strata.
    #[arg(long, value_delimiter = ',', required = true)]
    pub group_attrs: Vec<String>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01,0.05,0.1,0.5,1.0,5.0"
    )]
    pub eps_grid: Vec<f64>,
    /// Seeds per ε.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Marginal size of the workload (capped at the attribute count).
    #[arg(long, default_value_t = 3)]
    pub way: usize,
    /// Synthetic records per run; default |D|.
    #[arg(long)]
    pub n_out: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

const VARIANTS: [&str; 2] = ["stratified", "vanilla"];

struct RunOutcome {
    workload: f64,
    parity: Option<f64>,
    undefined_terms: usize,
    missing_groups: usize,
    fallbacks: usize,
}

pub fn run(args: SynthEvalArgs) -> CliResult<()> {
    nonempty(&args.eps_grid, "eps-grid")?;
    if args.trials == 0 {
        return Err(config_err("--trials must be at least 1"));
    }
    if args.eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(config_err("--eps-grid values must be > 0"));
    }
    let sink = Sink::open(&args.common)?;
    let data = load_table(&args.data, &args.schema)?;
    if data.is_empty() {
        return Err(stratdp::Error::EmptyDataset.into());
    }
    let schema = data.schema();
    let groups = schema.indices_of(&args.group_attrs)?;
    let way = args.way.clamp(1, schema.len());
    let workload = all_k_way_workload(schema, way, 1.0)?;
    let n_out = args.n_out.unwrap_or(data.len());
    let strat_weights = size_weights(&partition(&data, &groups)?);
    let vanilla_weights = vec![(GroupKey(Vec::new()), 1.0)];

    let jobs: Vec<(usize, usize, usize)> = (0..args.eps_grid.len())
        .flat_map(|e| (0..args.trials).flat_map(move |t| (0..2).map(move |v| (e, t, v))))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(e, trial, variant)| {
            let eps = args.eps_grid[e];
            let mut rng = RngHandle::new(args.common.seed, trial as u64)
                .derive(e as u64)
                .rng();
            let (attrs, weights): (&[usize], _) = if variant == 0 {
                (&groups, &strat_weights)
            } else {
                (&[], &vanilla_weights)
            };
            let out = strat_histogram_synth(
                &data,
                attrs,
                eps,
                weights,
                n_out,
                DegeneratePolicy::Uniform,
                &mut rng,
            )?;
            let parity = parity_error_tabular(&data, &out.data, &groups, None)?;
            Ok(RunOutcome {
                workload: workload_error(&data, &out.data, &workload)?,
                parity: parity.aggregate.is_finite().then_some(parity.aggregate),
                undefined_terms: parity.undefined_terms,
                missing_groups: parity.missing_groups,
                fallbacks: out.uniform_fallbacks + out.degenerate_strata,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut report = Report::new("synth-eval", &args.common, &args);
    report.note(
        "privacy: (eps, 0)-DP per synthetic dataset; eps split evenly over the measured attributes",
    );
    report.note(format!(
        "workload: all {way}-way marginals, {} queries",
        workload.len()
    ));
    report.note(
        "parity: mean over non-group attributes of the parity error of group means, omega = 1/k",
    );
    report.note(
        "variants: stratified measures per group; vanilla measures the whole table as one group",
    );
    report.columns(&[
        "eps",
        "variant",
        "trials",
        "workload_mean",
        "workload_sd",
        "parity_mean",
        "parity_sd",
        "fallbacks",
    ]);
    let mut chart = LineChart::new("Workload error", "epsilon", "error")
        .log_x(true)
        .log_y(true);
    let (mut undefined, mut missing) = (0, 0);
    for (e, &eps) in args.eps_grid.iter().enumerate() {
        for (v, name) in VARIANTS.iter().enumerate() {
            let runs: Vec<&RunOutcome> = jobs
                .iter()
                .zip(&outcomes)
                .filter(|((je, _, jv), _)| *je == e && *jv == v)
                .map(|(_, o)| o)
                .collect();
            let wl: Vec<f64> = runs.iter().map(|r| r.workload).collect();
            let par: Vec<f64> = runs.iter().filter_map(|r| r.parity).collect();
            let fallbacks: usize = runs.iter().map(|r| r.fallbacks).sum();
            undefined += runs.iter().map(|r| r.undefined_terms).sum::<usize>();
            missing += runs.iter().map(|r| r.missing_groups).sum::<usize>();
            let (wm, ws) = mean_sd(&wl);
            let (pm, ps) = mean_sd(&par);
            report.row(vec![
                num(eps),
                name.to_string(),
                runs.len().to_string(),
                num(wm),
                num(ws),
                num(pm),
                num(ps),
                fallbacks.to_string(),
            ]);
            chart.push(*name, eps, wm);
        }
    }
    let fallbacks: usize = outcomes.iter().map(|o| o.fallbacks).sum();
    if fallbacks > 0 {
        report.warn(format!(
            "{fallbacks} noisy marginal(s) had no mass and were sampled uniformly"
        ));
    }
    if undefined > 0 {
        report.warn(format!(
            "{undefined} parity term(s) undefined (zero true mean) and skipped"
        ));
    }
    if missing > 0 {
        report.warn(format!(
            "{missing} real group(s) absent from synthetic data, estimated as 0"
        ));
    }
    report.finish(sink, Some(chart), args.common.strict)
}
