//! Optimal sequential signal precisions for an agent tracking a
//! time-varying Gaussian state.
//!
//! The agent observes `s_n = theta(t_n) + eps_n` with `eps_n ~ N(0, 1/p_n)`
//! and pays `c p_n` for precision `p_n`. Its loss at each step is the
//! posterior variance of `theta(t_n)` plus that cost. This crate provides
//!
//! * the state processes ([`kernels`]): Brownian motion, Ornstein-Uhlenbeck
//!   and a random straight line;
//! * posterior inference and residual variances ([`posterior`]);
//! * myopic and forward-looking precision rules ([`strategies`]);
//! * end-to-end simulation and discounted objectives ([`simulation`]);
//! * brute-force verifiers ([`oracle`]).
//!
//! Everything is generic over the floating-point type through [`Scalar`];
//! the `*64` aliases below fix it to `f64`.
//!
//! ```
//! use gp_acquire::{brownian_myopic_trajectory, BrownianParams64, TimeGrid64};
//!
//! let params = BrownianParams64::new(0.0, 1.0, 1.0).unwrap();
//! let grid = TimeGrid64::uniform(0.0, 1.0, 4).unwrap();
//! let traj = brownian_myopic_trajectory(&params, &grid, 0.25).unwrap();
//! assert_eq!(traj.steps[0].precision, 1.0);
//! ```

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod linalg;
pub mod oracle;
pub mod posterior;
pub mod rng;
pub mod scalar;
pub mod simulation;
pub mod strategies;

pub use error::{Error, Result};
pub use kernels::{
    ou_general_cov, sample_path, sample_path_with, BrownianParams, LinearParams, OUParams, ProcessKind, ProcessSpec,
    TimeGrid,
};
pub use oracle::{golden_section, minimize_psi, psi, value_iterate, RGridSpec, ScalarMinResult, ValueIterationResult};
pub use posterior::{
    gram_plus_noise, markov_coefficients, posterior_at, posterior_variance_at, residual_variance_brownian,
    residual_variance_general, residual_variance_markov, residual_variance_markov_closed, Posterior, PosteriorSummary,
    ResidualVariance, SignalHistory, SignalRecord,
};
pub use scalar::Scalar;
pub use simulation::{
    default_query_times, discounted_objective, monte_carlo_action_loss, run_scenario, scenario_trajectory,
    truncation_horizon, ActionLoss, RunResult, Scenario, ScenarioStrategy,
};
pub use strategies::{
    brownian_myopic_trajectory, fixed_trajectory, forward_looking_trajectory, generic_myopic_trajectory,
    myopic_precision, ou_myopic_trajectory, planning_for_step, planning_residual, solve_planning_v,
    steady_state_myopic, CostParams, MyopicChoice, PlanningSolution, StrategyMode, StrategyStep, StrategyTrajectory,
};

pub type BrownianParams64 = BrownianParams<f64>;
pub type OUParams64 = OUParams<f64>;
pub type LinearParams64 = LinearParams<f64>;
pub type ProcessSpec64 = ProcessSpec<f64>;
pub type TimeGrid64 = TimeGrid<f64>;
pub type SignalHistory64 = SignalHistory<f64>;
pub type CostParams64 = CostParams<f64>;
pub type StrategyTrajectory64 = StrategyTrajectory<f64>;
pub type PlanningSolution64 = PlanningSolution<f64>;
pub type Scenario64 = Scenario<f64>;
pub type RunResult64 = RunResult<f64>;

pub type ProcessSpec32 = ProcessSpec<f32>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type StrategyTrajectory32 = StrategyTrajectory<f32>;
