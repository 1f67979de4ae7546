//! Finite-key decoy-state analysis.

pub mod chernoff;
pub mod lp;
pub mod pipeline;
mod program;
pub mod rate;

pub use chernoff::{
    binary_entropy, chernoff_b, chernoff_delta, expectation_bounds, h_interval, ChernoffBound, HInterval,
    DEFAULT_EPSILON,
};
pub use lp::{estimate_e11ph_upper, estimate_s11_lower, DecoyLp, GainRow, HConstraint, SourceTerm, DEFAULT_N_CUT};
pub use pipeline::{finite_key_pipeline, finite_key_pipeline_with, PipelineOptions};
pub use rate::{key_rate, KeyRateReport, RateInputs, DEFAULT_F};
