//! Discrete phase configuration for reconfigurable intelligent surfaces.
//!
//! Every instance reduces to maximizing `|Σ_i e^{jω_i} z_i|` over phases
//! `ω_i` drawn from `2^B` evenly spaced levels. [`solve_das`] finds the global
//! optimum by sweeping `L·N` candidates after a sort, so a solve costs
//! `O(L N log N)` rather than `L^N`.

pub mod baselines;
pub mod bench;
pub mod channels;
pub mod codebook;
pub mod das;
pub mod error;
pub mod input;
pub mod reduce;
pub mod types;

pub use baselines::{
    branch_and_bound, codebook_solution, exhaustive, quantized_alignment, trivial_codebook,
    BaselineKind, EXHAUSTIVE_CAP,
};
pub use bench::{
    aggregate, run_plan, BenchMethod, ChannelModel, ExperimentPlan, Summary, TrialRecord,
};
pub use codebook::CodebookGrid;
pub use das::{enumerate_candidates, solve_binary, solve_das, CandidateSet};
pub use error::{Error, Result};
pub use reduce::{dehomogenize, homogenize, CascadedChannel, RankOneMatrix};
pub use types::{
    continuous_bound, evaluate, inner_product, Method, PhaseConfig, QuantizationScheme,
    RankOneObjective, Solution,
};

pub use num_complex::Complex64;
