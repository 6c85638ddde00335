use std::path::PathBuf;

use clap::Args;

use stratdp::tabular::{all_k_way_workload, marginal};

use super::load_table;
use crate::output::{config_err, CliResult, Report, Sink};
use crate::Common;

#[derive(Debug, Clone, Args)]
pub struct MarginalsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// One attribute subset, e.g. `SEX,RAC1P`; repeat for several.
    #[arg(long = "attrs")]
    pub attrs: Vec<String>,
    /// Dump every subset of this size instead.
    #[arg(long, conflicts_with = "attrs")]
    pub way: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: MarginalsArgs) -> CliResult<()> {
    let sink = Sink::open(&args.common)?;
    let data = load_table(&args.data, &args.schema)?;
    let schema = data.schema();
    let subsets: Vec<Vec<usize>> = match args.way {
        Some(w) => all_k_way_workload(schema, w, 1.0)?
            .queries()
            .iter()
            .map(|(s, _)| s.clone())
            .collect(),
        None if args.attrs.is_empty() => return Err(config_err("give --attrs or --way")),
        None => args
            .attrs
            .iter()
            .map(|list| schema.indices_of(&list.split(',').map(str::trim).collect::<Vec<_>>()))
            .collect::<Result<_, _>>()?,
    };
    let mut report = Report::new("marginals", &args.common, &args);
    report.note(format!("records: {}", data.len()));
    for s in subsets {
        report.row(vec![marginal(&data, &s)?.dump(schema)]);
    }
    report.finish(sink, None, args.common.strict)
}
