//! Rank-based stochastic particle approximation of scalar viscous
//! conservation laws, with exact Burgers reference, Wasserstein error
//! estimators and a Monte-Carlo convergence harness.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod exact;
pub mod flux;
pub mod harness;
pub mod init;
pub mod kernel;
pub mod metrics;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;

pub use engine::{
    euler_step, ordinal_ranks, rank_counts, simulate, sorted_view, DriftScheme, ParticleEnsemble,
    SimulationConfig, Simulator, StepSchedule, TieRule,
};
pub use error::{Error, Result};
pub use exact::BurgersSolution;
pub use flux::{FluxFunction, FluxKind};
pub use harness::{
    emit, preset, run_study, strong_error_point, weak_error_point, Destination, ErrorKind,
    ErrorRow, ErrorTable, Format, PointEstimate, StudySpec, Sweep,
};
pub use init::{init_w1_to_m, iid_positions, optimal_positions, InitialDistribution, Initialization};
pub use kernel::HeatKernel;
pub use metrics::{
    empirical_cdf_at, phi_grid, psi_grid_free, w1_cdf_form, w_rho_empirical, GridSpec,
};
pub use rng::{GaussianSource, NoiseStream, ZeroNoise};
pub use scalar::Scalar;

pub type Flux = FluxFunction<f64>;
pub type Distribution = InitialDistribution<f64>;
pub type Init = Initialization<f64>;
pub type Config = SimulationConfig<f64>;
pub type Ensemble = ParticleEnsemble<f64>;
pub type Burgers = BurgersSolution<f64>;
pub type Kernel = HeatKernel<f64>;
pub type Grid = GridSpec<f64>;
pub type Study = StudySpec<f64>;
