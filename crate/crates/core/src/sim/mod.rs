//! Finite-length validation: graphs, channel sampling, decoders, experiments.

pub mod alist;
pub mod channel;
pub mod decoders;
pub mod experiment;
pub mod graph;

pub use channel::{bsc_sample, trial_seed};
pub use decoders::{
    decode_bp, decode_gallager_a, decode_three_level, DecodeResult, DecoderKind, Workspace,
};
pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentRow, ExperimentStats, OperatingPoint, TrialSetup,
};
pub use graph::{build_graph, GraphOptions, TannerGraph};
