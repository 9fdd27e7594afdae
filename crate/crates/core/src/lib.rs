//! Fine-grained reliability of V2V links at a road intersection.
//!
//! Interfering vehicles form thinned Poisson point processes on two
//! perpendicular roads. Given a TX/RX pair, the crate computes the average
//! success probability in closed form, the conditional success probability of
//! individual interferer realizations, the empirical meta distribution and its
//! Beta approximation, and the largest Aloha probability that meets a
//! reliability target.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod meta;
pub mod output;
pub mod quadrature;
pub mod reliability;
pub mod rng;
pub mod scenario;
pub mod special;
pub mod traffic;

pub use analytic::{average_success, laplace_factor, solve_optimal_pi, AverageReliability, DesignSpec};
pub use channel::{classify_link, path_loss, ChannelModel, ChannelParams, CoefficientUnit, LinkClass};
pub use error::{Error, Result};
pub use geometry::{manhattan_separation, tx_position_at_separation, Position, Road, RoadExtent, Trajectory};
pub use harness::{
    run_meta_study, run_separation_sweep, run_validation, MetaStudy, SweepPoint, SweepResult, ValidationReport,
};
pub use meta::{beta_cdf_complement, bimodality_gap, empirical_meta_cdf, fit_beta_moments, BetaParams, EmpiricalMeta};
pub use output::MetaSummary;
pub use reliability::{
    conditional_success_closed_form, conditional_success_mc, ConditionalReliability, Link, RadioParams,
};
pub use scenario::{PiChoice, Scenario, ScenarioBuilder};
pub use traffic::{sample_realization, Realization, TrafficParams};
