pub mod bounds;
pub mod coinpress_csv;
pub mod fit_alpha;
pub mod gen_mixture;
pub mod marginals;
pub mod mean_sweep;
pub mod synth_eval;

use std::path::Path;

use stratdp::coinpress::{default_rho_schedule, scale_schedule};
use stratdp::tabular::{load_csv, Schema, TabularDataset};

use crate::output::{config_err, CliResult};

/// Coinpress step budgets: explicit shares rescaled to `rho_total`, or the default split over `t` steps.
pub fn rho_schedule(t: usize, shares: Option<&[f64]>, rho_total: f64) -> CliResult<Vec<f64>> {
    match shares {
        Some([]) => Err(config_err("--rho-schedule must not be empty")),
        Some(s) if s.iter().any(|x| !(*x > 0.0)) => {
            Err(config_err("--rho-schedule shares must be > 0"))
        }
        Some(s) => Ok(scale_schedule(s, rho_total)),
        None => Ok(default_rho_schedule(t, rho_total)?),
    }
}

/// Number of Coinpress steps from `--t` and `--rho-schedule`.
pub fn resolve_t(t: Option<usize>, schedule: Option<&[f64]>) -> CliResult<usize> {
    match (t, schedule) {
        (Some(t), Some(s)) if t != s.len() => Err(config_err(
            "--t disagrees with the length of --rho-schedule",
        )),
        (_, Some(s)) => Ok(s.len()),
        (Some(0), None) => Err(config_err("--t must be at least 1")),
        (t, None) => Ok(t.unwrap_or(4)),
    }
}

/// ρ = ε²/2, the zCDP level implied by (ε, 0)-DP.
pub fn matched_rho(epsilon: f64) -> f64 {
    epsilon * epsilon / 2.0
}

pub fn load_table(data: &Path, schema: &Path) -> CliResult<TabularDataset> {
    let schema = Schema::from_file(schema)?;
    Ok(load_csv(data, &schema)?)
}
