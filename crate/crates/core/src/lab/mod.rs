//! Discretised sum–product laboratory on dyadic grids.
//!
//! Sets are [`GridSet`]s: integer cell indices at scale `δ = 2^−n` inside an
//! origin interval. Measures are [`DyadicMeasure`]s whose cells are
//! represented by their left endpoints; arithmetic pushforwards are computed
//! exactly on those representatives and binned with a few guard bits.

mod cover;
mod experiment;
mod generate;
mod grid;
mod measure;
mod sigma;
mod slope;

pub use cover::{productset_cover, quotientset_cover, sumset_cover, Sign, MAX_KERNEL_CELLS};
pub use experiment::{
    scale_row, theorem_a_experiment, ExperimentOptions, ScaleRow, SetFamily,
};
pub use generate::{
    ap_gp_intersection_set, ap_gp_intersection_with, cantor_set, digit_restricted_set,
    discretise, free_positions, random_frostman_set, BlockLabel,
};
pub use grid::{GridFile, GridSet};
pub use measure::{
    convolve, dyadic_entropy, entropy_dimension_profile, frostman_constant, multiply_measures,
    point_mass, quotient_measures, restrict_measure, restrict_to_interval, restriction_property,
    uniform_measure, DyadicMeasure, Mode,
};
pub use sigma::{counting_frostman_constant, sigma_report, sigma_report_with, SigmaReport, SigmaTolerance};
pub use slope::{
    check_discretised_slope_inequality, slope_measure, SlopeCheck, SlopeTerm, SlopeVariant,
    DEFAULT_GUARD, SAMPLED_PAIRS, SLOPE_PAIR_CAP,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("scale mismatch: {left} vs {right}")]
    ScaleMismatch { left: u32, right: u32 },
    #[error("invalid grid set: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("restriction to {0} has zero mass")]
    EmptyRestriction(String),
    #[error("division by a cell at 0")]
    ZeroDenominator,
    #[error("exact weights overflow 128 bits")]
    Overflow,
    #[error("malformed grid file: {0}")]
    Format(String),
}

#[cfg(test)]
mod tests;
