//! Rounding unit vectors to signs with a slowed-down sticky diffusion, plus
//! everything needed to use it end to end on MAXCUT: a low-rank SDP solver,
//! hyperplane rounding and exact Gaussian-process baselines, Monte Carlo
//! verification of the arcsine correlation law, and exact small-instance
//! oracles.
//!
//! Modules follow the pipeline order:
//!
//! - [`numerics`]: Gaussian CDF/quantile and counter-based random streams.
//! - [`speed`]: admissible diffusion speed functions on `[-1, 1]`.
//! - [`diffusion`]: the continuous (Euler–Maruyama) and discrete-time
//!   rounding engines, coupled across vectors by one shared driver.
//! - [`oracle`]: the exponentially discounted Gaussian process, its
//!   closed-form martingale, hyperplane rounding and the arcsine law.
//! - [`sdp`]: weighted graphs and the block-coordinate MAXCUT SDP solver.
//! - [`pipeline`]: end-to-end rounding runs, brute-force oracles, the
//!   identity verification harness and reporting.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along with
// the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod sdp;
pub mod speed;

pub use diffusion::{
    absorption_stats, simulate_discrete, simulate_sticky, simulate_sticky_streamed,
    AbsorptionStats, BrownianIncrements, DiffusionConfig, Embedding, SignAssignment,
    TrajectoryBatch,
};
pub use error::{Error, Result};
pub use numerics::{normal_cdf, normal_quantile, sample_gaussian, RngStream};
pub use oracle::{
    arcsin_law, closed_form_m, hyperplane_round, pair_correlation, simulate_z, simulate_z_terminal,
    MartingalePath, PairCorrelation, ZPath,
};
pub use pipeline::{
    brute_force_maxcut, compare_schemes, cut_value, expected_cut_arcsin, gw_constant, gw_minimizer,
    round_once, run_pipeline, verify_identity, CutResult, IdentityReport, IdentityRow,
    PairAgreement, RoundingScheme, SchemeComparison, SchemeStats,
};
pub use sdp::{
    default_rank, sdp_objective, solve_maxcut_sdp, SdpConfig, SdpSolution, WeightedGraph,
};
pub use speed::{power_speed, xi, SpeedFunction, SpeedValidation};
