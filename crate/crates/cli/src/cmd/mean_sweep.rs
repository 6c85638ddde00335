use clap::Args;
use rayon::prelude::*;

use stratdp::coinpress::{pub_strat_coinpress, strat_coinpress, uvm_rec, CoinpressConfig};
use stratdp::datagen::{gaussian_mixture, sample_sd, MixtureSpec};
use stratdp::mean::{private_mean, stratified_laplace, ClipConfig};
use stratdp::parity::{default_omega, normalized_error, parity_error_skipping};
use stratdp::{RngHandle, StratifiedSample};

use super::{matched_rho, resolve_t, rho_schedule};
use crate::output::{config_err, mean_sd, nonempty, num, pair, CliResult, Report, Sink};
use crate::svg::LineChart;
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct MeanSweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub k_grid: Vec<usize>,
    /// Dirichlet concentration of the group sizes.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Laplace ε values; Coinpress runs at ρ = ε²/2.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Coinpress steps [default: 4].
    #[arg(long)]
    pub t: Option<usize>,
    /// Relative step budgets; overrides the default {1, …, 1, 5} split and sets t.
    #[arg(long, value_delimiter = ',')]
    pub rho_schedule: Option<Vec<f64>>,
    /// Coinpress prior interval.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-100,100"
    )]
    pub range: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Known standard deviation for Coinpress; default max(σ upper bound, population sd).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Laplace bound R on |μ|.
    #[arg(long, default_value_t = 3.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    /// Public holdout size as a fraction of n; 0 disables the holdout-weighted method.
    #[arg(long, default_value_t = 0.1)]
    pub holdout_frac: f64,
    /// Use |Gᵢ| = n/k instead of Dirichlet-proportional sizes.
    #[arg(long)]
    pub equal_sizes: bool,
    #[command(flatten)]
    pub common: Common,
}

const METHODS: [&str; 5] = [
    "laplace",
    "strat_laplace",
    "coinpress",
    "strat_coinpress",
    "pub_strat_coinpress",
];

#[derive(Debug, Default, Clone)]
struct MethodOutcome {
    error: Option<f64>,
    parity: Option<f64>,
    skipped_terms: usize,
    failed: bool,
}

fn validate(a: &MeanSweepArgs) -> CliResult<()> {
    nonempty(&a.n_grid, "n-grid")?;
    nonempty(&a.k_grid, "k-grid")?;
    nonempty(&a.eps_grid, "eps-grid")?;
    if a.trials == 0 {
        return Err(config_err("--trials must be at least 1"));
    }
    if !(0.0..1.0).contains(&a.holdout_frac) {
        return Err(config_err("--holdout-frac must lie in [0, 1)"));
    }
    pair(&a.range, "range")?;
    Ok(())
}

pub fn run(args: MeanSweepArgs) -> CliResult<()> {
    validate(&args)?;
    let sink = Sink::open(&args.common)?;
    let clip = ClipConfig::new(args.r, args.gamma)?;
    let range = pair(&args.range, "range")?;
    let t = resolve_t(args.t, args.rho_schedule.as_deref())?;

    let mut grid = Vec::new();
    for &n in &args.n_grid {
        for &k in &args.k_grid {
            for &eps in &args.eps_grid {
                if k == 0 || n < k {
                    return Err(config_err(format!("need n >= k >= 1, got n={n}, k={k}")));
                }
                let rho = matched_rho(eps);
                let schedule = rho_schedule(t, args.rho_schedule.as_deref(), rho)?;
                // Validate once up front so worker errors are data-only.
                CoinpressConfig::new(
                    range,
                    args.sigma.unwrap_or(1.0),
                    schedule.clone(),
                    args.beta,
                )?;
                grid.push((n, k, eps, schedule));
            }
        }
    }

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..args.trials).map(move |tr| (g, tr)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(g, trial)| {
            let (n, k, eps, ref schedule) = grid[g];
            let handle = RngHandle::new(args.common.seed, trial as u64).derive(g as u64);
            run_trial(&args, &clip, range, n, k, eps, schedule, handle)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = Report::new("mean-sweep", &args.common, &args);
    report.note("privacy: Laplace methods at (eps, 0)-DP; Coinpress methods at rho = eps^2/2 zCDP");
    report.note("error: |estimate - empirical global mean| / pooled sample sd");
    report.note(
        "parity: omega = 1/k; non-stratified methods use the global estimate for every group",
    );
    if args.holdout_frac == 0.0 {
        report.note("pub_strat_coinpress omitted: --holdout-frac is 0");
    }
    report.columns(&[
        "n",
        "k",
        "eps",
        "method",
        "trials",
        "err_mean",
        "err_sd",
        "parity_mean",
        "parity_sd",
        "failed",
    ]);
    let mut chart = LineChart::new("Normalized global error", "n", "error")
        .log_x(true)
        .log_y(true);
    let multi = args.k_grid.len() > 1 || args.eps_grid.len() > 1;
    let mut skipped_total = 0;
    for (g, (n, k, eps, _)) in grid.iter().enumerate() {
        let rows = &outcomes[g * args.trials..(g + 1) * args.trials];
        for (m, name) in METHODS.iter().enumerate() {
            if m == 4 && args.holdout_frac == 0.0 {
                continue;
            }
            let errs: Vec<f64> = rows.iter().filter_map(|r| r[m].error).collect();
            let pars: Vec<f64> = rows.iter().filter_map(|r| r[m].parity).collect();
            let failed = rows.iter().filter(|r| r[m].failed).count();
            skipped_total += rows.iter().map(|r| r[m].skipped_terms).sum::<usize>();
            let (em, es) = mean_sd(&errs);
            let (pm, ps) = mean_sd(&pars);
            report.row(vec![
                n.to_string(),
                k.to_string(),
                num(*eps),
                name.to_string(),
                errs.len().to_string(),
                num(em),
                num(es),
                num(pm),
                num(ps),
                failed.to_string(),
            ]);
            let series = if multi {
                format!("{name} k={k} eps={}", num(*eps))
            } else {
                name.to_string()
            };
            chart.push(series, *n as f64, em);
            if failed > 0 {
                report.warn(format!(
                    "{name} failed in {failed} trial(s) at n={n}, k={k}"
                ));
            }
        }
    }
    if skipped_total > 0 {
        report.warn(format!(
            "{skipped_total} parity term(s) undefined (zero true mean) and skipped"
        ));
    }
    report.finish(sink, Some(chart), args.common.strict)
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    args: &MeanSweepArgs,
    clip: &ClipConfig,
    range: (f64, f64),
    n: usize,
    k: usize,
    eps: f64,
    schedule: &[f64],
    handle: RngHandle,
) -> CliResult<Vec<MethodOutcome>> {
    let spec = MixtureSpec {
        equal_sizes: args.equal_sizes,
        ..MixtureSpec::new(n, k, args.alpha)
    };
    let mix = gaussian_mixture(&spec, &mut handle.derive(1).rng())?;
    let sample = &mix.sample;
    let pooled = sample.pooled();
    let truth_global = sample.global_mean();
    let scale = sample_sd(&pooled);
    let mut truth = sample.group_means();
    truth.push(truth_global);
    let omega = default_omega(k);

    let score = |global: f64, groups: Option<Vec<f64>>| -> CliResult<MethodOutcome> {
        let mut est = groups.unwrap_or_else(|| vec![global; k]);
        est.push(global);
        let (p, skipped) = parity_error_skipping(&truth, &est, omega)?;
        Ok(MethodOutcome {
            error: normalized_error(global, truth_global, scale),
            parity: (skipped < truth.len()).then_some(p),
            skipped_terms: skipped,
            failed: false,
        })
    };

    let sigma = args
        .sigma
        .unwrap_or_else(|| spec.sigma_range.1.max(mix.population_sd()));
    let cfg = CoinpressConfig::new(range, sigma, schedule.to_vec(), args.beta)?;
    // Stratified and pooled variants of one mechanism share a noise stream, so k = 1 matches exactly.
    let laplace = handle.derive(3);
    let coin = handle.derive(4);
    let weights = sample.size_weights();

    let mut out = Vec::with_capacity(METHODS.len());
    out.push(score(
        private_mean(&pooled, clip, eps, &mut laplace.rng())?,
        None,
    )?);
    let sl = stratified_laplace(sample, clip, eps, &mut laplace.rng())?;
    out.push(score(sl.global, Some(sl.group_estimates()))?);
    let (c, _) = uvm_rec(&pooled, &cfg, &mut coin.rng())?;
    out.push(score(c, None)?);
    let sc = strat_coinpress(sample, &cfg, &weights, &mut coin.rng())?;
    out.push(score(sc.global, Some(sc.group_estimates()))?);
    out.push(if args.holdout_frac > 0.0 {
        let m = ((args.holdout_frac * n as f64).round() as usize).max(1);
        let holdout: StratifiedSample = mix.sample_holdout(m, &mut handle.derive(2).rng())?;
        match pub_strat_coinpress(sample, &cfg, &holdout, &mut coin.rng()) {
            Ok(r) => score(r.global, Some(r.group_estimates()))?,
            Err(stratdp::Error::MissingGroupWeight(_)) => MethodOutcome {
                failed: true,
                ..Default::default()
            },
            Err(e) => return Err(e.into()),
        }
    } else {
        MethodOutcome::default()
    });
    Ok(out)
}
