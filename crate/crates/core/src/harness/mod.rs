//! Experiment runner: configuration, seeded noise, runs and artifacts.

mod noise;
mod output;
mod report;
mod runs;
mod spec;

pub use noise::{level_seed, NoiseRealization};
pub use output::{colormap, join_indices, write_heatmap, Table};
pub use report::{Check, Report};
pub use runs::{
    emit_weights_figure, is_singleton_at, run, run_example1, run_example2, run_example3, run_example4, run_figure1,
    run_figure2, tikhonov_weights, write_weights, GAMMA_TOL, HIT_AMPLITUDE,
};
pub use spec::{
    default_layouts, ConfigFile, Experiment, ExperimentSpec, Overrides, Surrogate, TikhonovWeights,
    DEFAULT_BOUNDARY_CELL, DEFAULT_INTERIOR_CELL, FIGURE2_ASYMMETRIC_PAIR, FIGURE2_PAIR,
};
