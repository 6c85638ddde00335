use std::path::PathBuf;

use clap::Args;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use stratdp::coinpress::{pub_strat_coinpress, strat_coinpress, uvm_rec, CoinpressConfig};
use stratdp::datagen::sample_sd;
use stratdp::parity::{default_omega, normalized_error, parity_error_skipping};
use stratdp::tabular::{partition, Partition, TabularDataset};
use stratdp::RngHandle;

use super::{load_table, matched_rho, resolve_t, rho_schedule};
use crate::output::{config_err, mean_sd, nonempty, num, pair, CliResult, Report, Sink};
use crate::svg::LineChart;
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct CoinpressCsvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Grouping attributes, added one at a time (the first row uses no grouping).
    #[arg(long, value_delimiter = ',')]
    pub group_attrs: Vec<String>,
    /// Integer-coded columns whose means are estimated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<String>,
    /// Coinpress runs at ρ = ε²/2.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Coinpress steps [default: 4].
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub rho_schedule: Option<Vec<f64>>,
    /// Prior interval; default [0, domain size − 1] of each target.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    /// Known standard deviation; default a quarter of the prior interval width.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Fraction of rows held out as public data for weight estimation; 0 disables it.
    #[arg(long, default_value_t = 0.1)]
    pub holdout_frac: f64,
    #[command(flatten)]
    pub common: Common,
}

const METHODS: [&str; 3] = ["coinpress", "strat_coinpress", "pub_strat_coinpress"];

#[derive(Debug, Clone, Default)]
struct Outcome {
    error: Option<f64>,
    parity: Option<f64>,
    skipped_terms: usize,
    failed: bool,
}

struct Setting {
    label: String,
    partition: Partition,
    target: usize,
    target_name: String,
    cfg: CoinpressConfig,
}

pub fn run(args: CoinpressCsvArgs) -> CliResult<()> {
    nonempty(&args.targets, "targets")?;
    if args.trials == 0 {
        return Err(config_err("--trials must be at least 1"));
    }
    if !(0.0..1.0).contains(&args.holdout_frac) {
        return Err(config_err("--holdout-frac must lie in [0, 1)"));
    }
    let t = resolve_t(args.t, args.rho_schedule.as_deref())?;
    let schedule = rho_schedule(t, args.rho_schedule.as_deref(), matched_rho(args.eps))?;
    let sink = Sink::open(&args.common)?;
    let data = load_table(&args.data, &args.schema)?;
    if data.is_empty() {
        return Err(stratdp::Error::EmptyDataset.into());
    }
    let schema = data.schema();
    let group_idx = schema.indices_of(&args.group_attrs)?;
    let target_idx = schema.indices_of(&args.targets)?;

    let mut settings = Vec::new();
    for depth in 0..=group_idx.len() {
        let p = partition(&data, &group_idx[..depth])?;
        let label = if depth == 0 {
            "none".to_string()
        } else {
            args.group_attrs[..depth].join("+")
        };
        for (&target, name) in target_idx.iter().zip(&args.targets) {
            let range = match &args.range {
                Some(r) => pair(r, "range")?,
                None => (0.0, (schema.domain(target) - 1).max(1) as f64),
            };
            let sigma = args.sigma.unwrap_or((range.1 - range.0) / 4.0);
            settings.push(Setting {
                label: label.clone(),
                partition: p.clone(),
                target,
                target_name: name.clone(),
                cfg: CoinpressConfig::new(range, sigma, schedule.clone(), args.beta)?,
            });
        }
    }

    let holdout_rows =
        ((args.holdout_frac * data.len() as f64).round() as usize).min(data.len() - 1);
    let per_trial = (0..args.trials)
        .into_par_iter()
        .map(|trial| {
            let handle = RngHandle::new(args.common.seed, trial as u64);
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut handle.derive(1).rng());
            let mut public = vec![false; data.len()];
            order[..holdout_rows].iter().for_each(|&r| public[r] = true);
            settings
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    run_setting(
                        &data,
                        s,
                        &public,
                        holdout_rows > 0,
                        handle.derive(100 + i as u64),
                    )
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut report = Report::new("coinpress-csv", &args.common, &args);
    report.note(format!(
        "privacy: Coinpress at rho = eps^2/2 = {} zCDP per release",
        num(matched_rho(args.eps))
    ));
    report.note("error: |estimate - empirical global mean| / sd of the private rows");
    report.note("parity: omega = 1/k; coinpress uses its global estimate for every group");
    if holdout_rows == 0 {
        report.note("pub_strat_coinpress omitted: no public holdout (--holdout-frac is 0)");
    } else {
        report.note(format!(
            "public holdout: {holdout_rows} rows, excluded from the private sample"
        ));
    }
    report.columns(&[
        "target",
        "group_attrs",
        "k",
        "method",
        "trials",
        "err_mean",
        "err_sd",
        "parity_mean",
        "parity_sd",
        "failed",
    ]);
    let mut chart =
        LineChart::new("Normalized mean error vs number of groups", "k", "error").log_y(true);
    let mut skipped_total = 0;
    let mut constant_targets = Vec::new();
    for (i, s) in settings.iter().enumerate() {
        for (m, name) in METHODS.iter().enumerate() {
            if m == 2 && holdout_rows == 0 {
                continue;
            }
            let outs: Vec<&Outcome> = per_trial.iter().map(|t| &t[i][m]).collect();
            let errs: Vec<f64> = outs.iter().filter_map(|o| o.error).collect();
            let pars: Vec<f64> = outs.iter().filter_map(|o| o.parity).collect();
            let failed = outs.iter().filter(|o| o.failed).count();
            skipped_total += outs.iter().map(|o| o.skipped_terms).sum::<usize>();
            if errs.is_empty() && failed < outs.len() && !constant_targets.contains(&s.target_name)
            {
                constant_targets.push(s.target_name.clone());
            }
            let (em, es) = mean_sd(&errs);
            let (pm, ps) = mean_sd(&pars);
            let err_cells = if errs.is_empty() {
                ["undefined".to_string(), "undefined".to_string()]
            } else {
                [num(em), num(es)]
            };
            let [e0, e1] = err_cells;
            report.row(vec![
                s.target_name.clone(),
                s.label.clone(),
                s.partition.k().to_string(),
                name.to_string(),
                errs.len().to_string(),
                e0,
                e1,
                num(pm),
                num(ps),
                failed.to_string(),
            ]);
            chart.push(
                format!("{} {name}", s.target_name),
                s.partition.k() as f64,
                em,
            );
            if failed > 0 {
                report.warn(format!(
                    "{name} failed in {failed} trial(s) for {} grouped by {} (a group absent from the holdout)",
                    s.target_name, s.label
                ));
            }
        }
    }
    for t in constant_targets {
        report.warn(format!(
            "target {t} is constant on the private rows; normalized error undefined"
        ));
    }
    if skipped_total > 0 {
        report.warn(format!(
            "{skipped_total} parity term(s) undefined (zero true mean) and skipped"
        ));
    }
    report.finish(sink, Some(chart), args.common.strict)
}

fn run_setting(
    data: &TabularDataset,
    s: &Setting,
    public: &[bool],
    with_holdout: bool,
    handle: RngHandle,
) -> CliResult<Vec<Outcome>> {
    let sample = s.partition.sample_rows(data, s.target, |r| !public[r])?;
    let k = sample.k();
    let pooled = sample.pooled();
    let truth_global = sample.global_mean();
    let scale = sample_sd(&pooled);
    let mut truth = sample.group_means();
    truth.push(truth_global);
    let omega = default_omega(k);
    let score = |global: f64, groups: Option<Vec<f64>>| -> CliResult<Outcome> {
        let mut est = groups.unwrap_or_else(|| vec![global; k]);
        est.push(global);
        let (p, skipped) = parity_error_skipping(&truth, &est, omega)?;
        Ok(Outcome {
            error: normalized_error(global, truth_global, scale),
            parity: (skipped < truth.len()).then_some(p),
            skipped_terms: skipped,
            failed: false,
        })
    };

    let mut out = Vec::with_capacity(METHODS.len());
    let (c, _) = uvm_rec(&pooled, &s.cfg, &mut handle.rng())?;
    out.push(score(c, None)?);
    let sc = strat_coinpress(&sample, &s.cfg, &sample.size_weights(), &mut handle.rng())?;
    out.push(score(sc.global, Some(sc.group_estimates()))?);
    out.push(if with_holdout {
        let holdout = s.partition.sample_rows(data, s.target, |r| public[r])?;
        match pub_strat_coinpress(&sample, &s.cfg, &holdout, &mut handle.rng()) {
            Ok(r) => score(r.global, Some(r.group_estimates()))?,
            Err(stratdp::Error::MissingGroupWeight(_)) => Outcome {
                failed: true,
                ..Default::default()
            },
            Err(e) => return Err(e.into()),
        }
    } else {
        Outcome::default()
    });
    Ok(out)
}
