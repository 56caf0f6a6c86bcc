//! Capacity toolkit for the diamond channel with one noisy relay and one
//! noiseless relay.
//!
//! The transmitter's input X reaches a noiseless relay directly and a noisy
//! relay through a discrete memoryless channel p(y|x); the relays talk to
//! the receiver over orthogonal links of rates R1 (noisy relay) and R2
//! (noiseless relay). This crate evaluates the single-letter capacity region,
//! optimizes it numerically, computes the cut-set bound, checks the
//! Kaspi–Berger dual form of the region, and simulates the combined
//! decode-and-forward / compress-and-forward scheme at small blocklength.
//!
//! All information quantities are in nats.
//!
//! The kernels in [`prob`], [`channel`] and [`region`] are generic over the
//! scalar type (`f32`/`f64`, see [`Real`]); the aliases below fix `f64`,
//! which is what the optimizer and simulator use.

// Negated float comparisons such as `!(x > 0.0)` are used on purpose so that
// NaN inputs are rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod format;
pub mod optimize;
pub mod prob;
pub mod region;
pub mod scalar;
pub mod sim;

pub use channel::{binary_entropy_bits, binary_entropy_inverse, build_paper_example};
pub use error::{Error, Result};
pub use format::{ChannelFile, DistributionFile};
pub use optimize::{
    maximize_rate, penalized_objective, simplex_embed, OptimizationResult, OptimizerConfig,
};
pub use prob::csiszar_sum_check;
pub use region::{
    check_triple, corner_points, cut_set_bound, dual_bounds, evaluate_bounds, joint_from_factors,
    CornerPoint, DualBounds,
};
pub use scalar::{to_bits, to_nats, Real};
pub use sim::{
    generate_codebooks, run_trials, strongly_typical, Codebook, CodebookSizes, RelayOutput,
    SimConfig, SimOutcome, Simulator,
};

pub type Pmf = prob::Pmf<f64>;
pub type ConditionalKernel = prob::ConditionalKernel<f64>;
pub type JointPmf = prob::JointPmf<f64>;
pub type Dmc = channel::Dmc<f64>;
pub type DiamondDistribution = region::DiamondDistribution<f64>;
pub type RegionEval = region::RegionEval<f64>;
pub type RateTriple = region::RateTriple<f64>;

pub type JointPmf32 = prob::JointPmf<f32>;
pub type Dmc32 = channel::Dmc<f32>;
pub type DiamondDistribution32 = region::DiamondDistribution<f32>;
pub type RegionEval32 = region::RegionEval<f32>;
