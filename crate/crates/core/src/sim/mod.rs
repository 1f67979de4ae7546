//! Physical layer: relay interference, click statistics, tallies, HOM scans
//! and coincidence counting.

pub mod bsm;
pub mod coincidence;
pub mod gains;
pub mod hom;
pub mod montecarlo;

pub use bsm::{click_probability, mean_detector_counts, psi_minus_probability, BsmOutcome, DetectorMeans};
pub use coincidence::{four_fold_count, CycleFlags};
pub use gains::{expected_gains, expected_gains_with, expected_table, ExpectedGain};
pub use hom::{
    coherence_factor, hom_coincidence, hom_monte_carlo, hom_scan, kappa_at_delay, kappa_for_visibility, pulse_sigma,
    CombState, HomCounts, HomScanResult, SourceModel,
};
pub use montecarlo::{analytic_tally, simulate_tally, simulate_tally_sharded, SimMode};
