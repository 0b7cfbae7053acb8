//! Experiment orchestration: configuration files, the prime-table cache,
//! the worker pool, the two end-to-end pipelines and plot-data emission.
//!
//! Reports carry no wall-clock data; timings are returned separately so
//! that a report is a pure function of configuration and worker count.

mod cache;
mod config;
mod pipeline;
mod plots;
mod pool;

pub use cache::{PrimeCache, CACHE_ENV};
pub use config::{ExperimentConfig, NSelection};
pub use pipeline::{
    block_starts, input_hash, run_theorem3i_pipeline, run_theorem3ii_pipeline, BlockRecord, Diagnostic,
    ExperimentReport, MetricRecord, PipelineKind, SieveRecord, Timing, VERSION,
};
pub use plots::{emit_plotdata, plot_csv, plot_schema, PlotKind};
pub use pool::WorkerPool;
