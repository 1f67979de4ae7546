//! Protocol parameter search and rate predictions.

pub mod curve;
pub mod search;

pub use curve::{rate_vs_loss, simultaneity_rate, CurvePoint, ProtocolMode};
pub use search::{
    in_bounds, objective, optimize_protocol, optimize_protocol_with, OptimizationResult, OptimizerOptions, TracePoint,
};
