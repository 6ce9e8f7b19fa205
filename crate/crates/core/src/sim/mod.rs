//! Synthetic linear-model experiments.

mod design;
mod harness;
mod null;
mod report;

pub use design::{gen_design, gen_signal, SignMode};
pub use harness::{
    replicate_rng, run_knockoffs, run_replicate, run_sweep, Preset, Procedure, SimConfig,
    SweepParam,
};
pub use null::{coin_flip_false_count, coin_flip_stats};
pub use report::{write_aggregate, write_tidy, Aggregate, Record, SimReport};
