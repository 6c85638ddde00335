//! Integer-coded categorical tables: ingestion, intersectional partitions,
//! marginal queries, workload error, and a stratified noisy-histogram
//! synthesizer.

mod dataset;
mod marginal;
mod synth;

pub use dataset::{load_csv, partition, read_csv, Attribute, Partition, Schema, TabularDataset};
pub use marginal::{all_k_way_workload, cell_index, marginal, workload_error, Marginal, Workload};
pub use synth::{
    parity_error_tabular, size_weights, strat_histogram_synth, DegeneratePolicy, SynthOutput,
    TabularParity,
};
