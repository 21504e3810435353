//! End-to-end runs: pick precisions under a strategy, draw a state path and
//! the signals it generates, and track the posterior stage by stage.

use crate::error::{Error, Result};
use crate::kernels::{sample_path_with, BrownianParams, ProcessSpec, TimeGrid};
use crate::posterior::{Posterior, PosteriorSummary, SignalHistory, SignalRecord};
use crate::rng;
use crate::scalar::Scalar;
use crate::strategies::{
    brownian_myopic_trajectory, check_delta, fixed_trajectory, forward_looking_trajectory, generic_myopic_trajectory,
    ou_myopic_trajectory, CostParams, StrategyTrajectory,
};

/// Number of points in the default posterior-curve grid.
pub const DEFAULT_QUERY_POINTS: usize = 201;

/// Truncation tolerance for discounted objectives.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Upper bound on the truncation horizon.
pub const MAX_HORIZON: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioStrategy<T> {
    Myopic,
    ForwardLooking,
    FixedPrecisions(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub process: ProcessSpec<T>,
    pub grid: TimeGrid<T>,
    pub cost: CostParams<T>,
    pub strategy: ScenarioStrategy<T>,
    pub seed: u64,
    /// Times at which to report the posterior after each signal.
    pub query_times: Option<Vec<T>>,
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if let ScenarioStrategy::FixedPrecisions(ps) = &self.strategy {
            if ps.len() != self.grid.len() {
                return Err(Error::InvalidParameter {
                    name: "precisions",
                    reason: format!("{} precisions for {} grid points", ps.len(), self.grid.len()),
                });
            }
            if let Some(p) = ps.iter().find(|p| !(**p >= T::zero() && p.is_finite())) {
                return Err(Error::InvalidParameter {
                    name: "precisions",
                    reason: format!("must be finite and nonnegative, got {p}"),
                });
            }
        }
        if let Some(q) = &self.query_times {
            if let Some(t) = q.iter().find(|t| !(**t >= T::zero())) {
                return Err(Error::NegativeTime(t.as_f64()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T> {
    pub trajectory: StrategyTrajectory<T>,
    /// `(t, theta(t))` on the union of the signal grid and the query times.
    pub realized_path: Vec<(T, T)>,
    /// Realized `s_n`; `None` where nothing was bought.
    pub signal_values: Vec<Option<T>>,
    /// Entry `k` is the posterior after the first `k` signals, so entry 0 is
    /// the prior. Present when the scenario has query times.
    pub posterior_curves: Option<Vec<Vec<PosteriorSummary<T>>>>,
    /// Discounted objective from the first signal on; present when
    /// `delta > 0`.
    pub discounted_objective: Option<T>,
}

/// `count` evenly spaced points on `[0, last signal time + 1]`.
pub fn default_query_times<T: Scalar>(grid: &TimeGrid<T>) -> Vec<T> {
    let end = grid.times().last().copied().unwrap_or(T::zero()) + T::one();
    evenly_spaced(T::zero(), end, DEFAULT_QUERY_POINTS)
}

pub fn evenly_spaced<T: Scalar>(start: T, end: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / T::from_usize(count - 1).unwrap();
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        end
                    } else {
                        start + step * T::from_usize(i).unwrap()
                    }
                })
                .collect()
        }
    }
}

/// Precisions the scenario's strategy prescribes on its grid.
pub fn scenario_trajectory<T: Scalar>(scn: &Scenario<T>) -> Result<StrategyTrajectory<T>> {
    let c = scn.cost.c();
    match (&scn.strategy, &scn.process) {
        (ScenarioStrategy::Myopic, ProcessSpec::Brownian(p)) => brownian_myopic_trajectory(p, &scn.grid, c),
        (ScenarioStrategy::Myopic, ProcessSpec::OU(p)) if p.is_stationary() => ou_myopic_trajectory(p, &scn.grid, c),
        (ScenarioStrategy::Myopic, spec) => generic_myopic_trajectory(spec, &scn.grid, c),
        (ScenarioStrategy::ForwardLooking, ProcessSpec::Brownian(p)) => {
            forward_looking_trajectory(p, &scn.grid, &scn.cost)
        }
        (ScenarioStrategy::ForwardLooking, _) => Err(Error::RequiresBrownian("forward-looking planning")),
        (ScenarioStrategy::FixedPrecisions(ps), spec) => fixed_trajectory(spec, &scn.grid, ps, c),
    }
}

fn merged_times<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut all: Vec<T> = a.iter().chain(b).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).expect("finite times"));
    all.dedup();
    all
}

/// Signal noise for one realization: `theta(t_n) + z / sqrt(p_n)` for each
/// informative step, drawn in step order from the signal stream.
fn draw_signals<T: Scalar, R: rand::Rng + ?Sized>(states: &[T], precisions: &[T], rng: &mut R) -> Vec<Option<T>> {
    states
        .iter()
        .zip(precisions)
        .map(|(&theta, &p)| (p > T::zero()).then(|| theta + T::standard_normal(rng) / p.sqrt()))
        .collect()
}

/// Runs a scenario. Deterministic in `scn.seed`: the state path comes from
/// stream 0 and the signal noise from stream 1 (see [`crate::rng`]).
pub fn run_scenario<T: Scalar>(scn: &Scenario<T>) -> Result<RunResult<T>> {
    scn.validate()?;
    let trajectory = scenario_trajectory(scn)?;
    let times = scn.grid.times();
    let precisions = trajectory.precisions();

    let query = scn.query_times.clone().unwrap_or_default();
    let path_times = TimeGrid::new(merged_times(times, &query))?;
    let mut path_rng = rng::substream(scn.seed, rng::PATH_STREAM);
    let path = sample_path_with(&scn.process, &path_times, &mut path_rng);
    let realized_path: Vec<(T, T)> = path_times.times().iter().copied().zip(path).collect();
    let states: Vec<T> = times
        .iter()
        .map(|t| {
            let i = path_times
                .times()
                .binary_search_by(|x| x.partial_cmp(t).unwrap())
                .expect("grid time on merged path");
            realized_path[i].1
        })
        .collect();

    let mut signal_rng = rng::substream(scn.seed, rng::SIGNAL_STREAM);
    let signal_values = draw_signals(&states, &precisions, &mut signal_rng);

    let posterior_curves = match &scn.query_times {
        None => None,
        Some(q) => {
            let full = SignalHistory::new(
                times
                    .iter()
                    .zip(&precisions)
                    .zip(&signal_values)
                    .map(|((&t, &p), v)| SignalRecord {
                        time: t,
                        precision: p,
                        value: *v,
                    })
                    .collect(),
            )?;
            let curves = (0..=times.len())
                .map(|k| {
                    let post = Posterior::new(&scn.process, &full.prefix(k))?;
                    q.iter().map(|&t| post.summary(t)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Some(curves)
        }
    };

    let discounted_objective = if scn.cost.delta() > T::zero() && !trajectory.is_empty() {
        Some(discounted_objective(&trajectory, scn.cost.delta(), 0)?)
    } else {
        None
    };

    Ok(RunResult {
        trajectory,
        realized_path,
        signal_values,
        posterior_curves,
        discounted_objective,
    })
}

/// `sum_{i >= n} delta^(t_i - t_n) psi_i` over the recorded steps, with the
/// last step assumed to repeat forever at the final spacing (closed-form
/// geometric tail). Build the trajectory out to [`truncation_horizon`] when
/// it has not converged by its last step.
pub fn discounted_objective<T: Scalar>(trajectory: &StrategyTrajectory<T>, delta: T, from_index: usize) -> Result<T> {
    check_delta(delta)?;
    let steps = &trajectory.steps;
    if from_index >= steps.len() {
        return Err(Error::IndexOutOfRange {
            index: from_index,
            len: steps.len(),
        });
    }
    let t0 = steps[from_index].time;
    let head: T = steps[from_index..]
        .iter()
        .map(|s| delta.powf(s.time - t0) * s.payoff)
        .sum();
    let last = steps[steps.len() - 1];
    let spacing = if steps.len() >= 2 {
        last.time - steps[steps.len() - 2].time
    } else {
        T::one()
    };
    let q = delta.powf(spacing);
    let tail = last.payoff * delta.powf(last.time - t0) * q / (T::one() - q);
    Ok(head + tail)
}

/// Smallest `N` with `delta^N (sigma0^2 + sigma^2 N + c p_max) / (1 - delta)`
/// below [`TAIL_TOLERANCE`], capped at [`MAX_HORIZON`]; unit spacing.
pub fn truncation_horizon<T: Scalar>(params: &BrownianParams<T>, cost: &CostParams<T>, p_max: T) -> usize {
    let delta = cost.delta();
    let tol = T::lit(TAIL_TOLERANCE);
    (0..MAX_HORIZON)
        .find(|&n| {
            let nf = T::from_usize(n).unwrap();
            delta.powf(nf) * (params.variance(nf) + cost.c() * p_max) / (T::one() - delta) < tol
        })
        .unwrap_or(MAX_HORIZON)
}

/// Monte Carlo estimate of the expected squared error of the optimal action
/// `a_n = E[theta(t_n) | I_n]`, per step.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionLoss<T> {
    pub mean_sq_error: Vec<T>,
    pub std_error: Vec<T>,
    /// Posterior variances the estimate should match.
    pub analytic: Vec<T>,
    pub draws: usize,
}

/// Replicate `k` reuses the scenario with seed `seed + k`.
pub fn monte_carlo_action_loss<T: Scalar>(scn: &Scenario<T>, draws: usize) -> Result<ActionLoss<T>> {
    scn.validate()?;
    if draws == 0 {
        return Err(Error::InvalidParameter {
            name: "draws",
            reason: "need at least one draw".into(),
        });
    }
    let trajectory = scenario_trajectory(scn)?;
    let times = scn.grid.times();
    let precisions = trajectory.precisions();
    let history = SignalHistory::from_schedule(times, &precisions)?;
    let prior_means: Vec<T> = times
        .iter()
        .map(|&t| scn.process.prior_mean(t))
        .collect::<Result<_>>()?;

    // gains[n] pairs the informative indices among the first n+1 signals
    // with their weights in the posterior mean of theta(t_n)
    let gains: Vec<(Vec<usize>, Vec<T>)> = (0..times.len())
        .map(|n| {
            let prefix = history.prefix(n + 1);
            let idx: Vec<usize> = (0..=n).filter(|&i| precisions[i] > T::zero()).collect();
            let k = Posterior::new(&scn.process, &prefix)?.gain(times[n])?;
            Ok((idx, k))
        })
        .collect::<Result<_>>()?;

    let n_steps = times.len();
    let mut mean = vec![T::zero(); n_steps];
    let mut m2 = vec![T::zero(); n_steps];
    for k in 0..draws {
        let seed = rng::replicate_seed(scn.seed, k as u64);
        let mut path_rng = rng::substream(seed, rng::PATH_STREAM);
        let states = sample_path_with(&scn.process, &scn.grid, &mut path_rng);
        let mut signal_rng = rng::substream(seed, rng::SIGNAL_STREAM);
        let signals = draw_signals(&states, &precisions, &mut signal_rng);
        let count = T::from_usize(k + 1).unwrap();
        for n in 0..n_steps {
            let (idx, weights) = &gains[n];
            let action = prior_means[n]
                + idx
                    .iter()
                    .zip(weights)
                    .map(|(&i, &w)| w * (signals[i].expect("informative signal") - prior_means[i]))
                    .sum::<T>();
            let err = (action - states[n]) * (action - states[n]);
            let d = err - mean[n];
            mean[n] = mean[n] + d / count;
            m2[n] = m2[n] + d * (err - mean[n]);
        }
    }
    let n_draws = T::from_usize(draws).unwrap();
    let std_error = m2
        .iter()
        .map(|&s| {
            if draws > 1 {
                (s / (n_draws - T::one()) / n_draws).sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(ActionLoss {
        mean_sq_error: mean,
        std_error,
        analytic: trajectory.posterior_vars(),
        draws,
    })
}
