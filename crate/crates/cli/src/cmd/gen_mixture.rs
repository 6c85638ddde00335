use clap::Args;

use stratdp::datagen::{gaussian_mixture, MixtureSpec};
use stratdp::RngHandle;

use crate::output::{num, CliResult, Report, Sink};
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct GenMixtureArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu_prior_sd: f64,
    #[arg(long)]
    pub equal_sizes: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: GenMixtureArgs) -> CliResult<()> {
    let spec = MixtureSpec {
        mu_prior_sd: args.mu_prior_sd,
        equal_sizes: args.equal_sizes,
        ..MixtureSpec::new(args.n, args.k, args.alpha)
    };
    let sink = Sink::open(&args.common)?;
    let mix = gaussian_mixture(&spec, &mut RngHandle::new(args.common.seed, 0).rng())?;
    let mut report = Report::new("gen-mixture", &args.common, &args);
    let list = |xs: &[f64]| xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ");
    report.note(format!("proportions: {}", list(&mix.proportions)));
    report.note(format!("mu: {}", list(&mix.mus)));
    report.note(format!("sigma: {}", list(&mix.sigmas)));
    report.columns(&["group_id", "value"]);
    for s in mix.sample.strata() {
        for &v in &s.values {
            report.row(vec![s.key.to_string(), num(v)]);
        }
    }
    report.finish(sink, None, args.common.strict)
}
