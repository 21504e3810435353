//! Optimal precision rules.
//!
//! A myopic agent picks each precision to minimize the current payoff
//! `psi_n(p) = Var(theta(t_n) | I_n) + c p`. The solution depends on the past
//! only through the residual variance `R_n`: buy nothing while
//! `R_n <= sqrt(c)`, otherwise buy exactly enough to bring the posterior
//! variance down to `sqrt(c)`.
//!
//! A forward-looking agent minimizes the discounted sum of payoffs. For a
//! Brownian state on a uniform grid the same two-phase shape survives, with
//! the target `sqrt(c)` replaced by the root `V` of
//! `1/c = 1/V^2 - delta/(V + sigma^2)^2`.

use crate::error::{Error, Result};
use crate::kernels::{BrownianParams, OUParams, ProcessSpec, TimeGrid};
use crate::posterior::{residual_variance_general, SignalHistory, SignalRecord};
use crate::scalar::Scalar;

/// Marginal cost `c > 0` of precision and discount factor `0 <= delta < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams<T> {
    c: T,
    delta: T,
}

impl<T: Scalar> CostParams<T> {
    pub fn new(c: T, delta: T) -> Result<Self> {
        check_cost(c)?;
        check_delta(delta)?;
        Ok(Self { c, delta })
    }

    pub fn myopic(c: T) -> Result<Self> {
        Self::new(c, T::zero())
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

fn check_cost<T: Scalar>(c: T) -> Result<()> {
    if c > T::zero() && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "c",
            reason: format!("must be finite and positive, got {c}"),
        })
    }
}

pub(crate) fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if delta >= T::zero() && delta < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must lie in [0, 1), got {delta}"),
        })
    }
}

fn check_positive<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {x}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyMode {
    Myopic,
    ForwardLooking,
    /// Precisions supplied by the caller.
    Fixed,
}

/// One decision: residual variance before the signal, the precision bought,
/// the resulting posterior variance and the step payoff `psi_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyStep<T> {
    /// Zero-based signal index.
    pub n: usize,
    pub time: T,
    pub residual_var: T,
    pub precision: T,
    pub posterior_var: T,
    pub payoff: T,
}

impl<T: Scalar> StrategyStep<T> {
    fn new(n: usize, time: T, residual_var: T, precision: T, posterior_var: T, c: T) -> Self {
        Self {
            n,
            time,
            residual_var,
            precision,
            posterior_var,
            payoff: posterior_var + c * precision,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTrajectory<T> {
    pub steps: Vec<StrategyStep<T>>,
    pub mode: StrategyMode,
}

impl<T: Scalar> StrategyTrajectory<T> {
    pub fn precisions(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.precision).collect()
    }

    pub fn posterior_vars(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.posterior_var).collect()
    }

    pub fn residual_vars(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.residual_var).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Myopic choice at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MyopicChoice<T> {
    pub precision: T,
    pub posterior_var: T,
}

/// `p* = max{1/sqrt(c) - 1/R, 0}` and the posterior variance `min{R, sqrt(c)}`.
///
/// At `R = sqrt(c)` nothing is bought. `R = 0` (state already known) is
/// accepted and yields `(0, 0)`.
pub fn myopic_precision<T: Scalar>(residual_var: T, c: T) -> MyopicChoice<T> {
    let target = c.sqrt();
    if residual_var <= target {
        MyopicChoice {
            precision: T::zero(),
            posterior_var: residual_var,
        }
    } else {
        MyopicChoice {
            precision: target.recip() - residual_var.recip(),
            posterior_var: target,
        }
    }
}

/// Myopic precisions for a Brownian state in closed form.
///
/// With `t_bar = (sqrt(c) - sigma0^2) / sigma^2` the agent waits while
/// `t_n <= t_bar`, makes a catch-up purchase at the first time past it, and
/// from then on tops up the variance `sigma^2 dt_n` accumulated between
/// signals. For `sigma = 0` a single purchase is made if the prior variance
/// exceeds `sqrt(c)`, and none after it.
pub fn brownian_myopic_trajectory<T: Scalar>(
    params: &BrownianParams<T>,
    grid: &TimeGrid<T>,
    c: T,
) -> Result<StrategyTrajectory<T>> {
    check_cost(c)?;
    let target = c.sqrt();
    let steps = two_phase_brownian(params, grid.times(), target, c);
    Ok(StrategyTrajectory {
        steps,
        mode: StrategyMode::Myopic,
    })
}

/// Shared closed form of the myopic and forward-looking Brownian policies,
/// which differ only in the target posterior variance.
fn two_phase_brownian<T: Scalar>(params: &BrownianParams<T>, times: &[T], target: T, c: T) -> Vec<StrategyStep<T>> {
    let s2 = params.sigma() * params.sigma();
    let prior0 = params.sigma0() * params.sigma0();
    let mut steps = Vec::with_capacity(times.len());

    if s2 == T::zero() {
        let mut post_prev = prior0;
        for (n, &t) in times.iter().enumerate() {
            let r = post_prev;
            let (p, post) = if r > target {
                (target.recip() - r.recip(), target)
            } else {
                (T::zero(), r)
            };
            steps.push(StrategyStep::new(n, t, r, p, post, c));
            post_prev = post;
        }
        return steps;
    }

    let t_bar = (target - prior0) / s2;
    for (n, &t) in times.iter().enumerate() {
        let prior = prior0 + s2 * t;
        let (residual, precision) = if n == 0 {
            let p = if t <= t_bar {
                T::zero()
            } else {
                target.recip() - prior.recip()
            };
            (prior, p)
        } else {
            let dt = t - times[n - 1];
            let prev_post = (prior0 + s2 * times[n - 1]).min(target);
            let residual = prev_post + s2 * dt;
            let p = if t <= t_bar {
                T::zero()
            } else if t <= t_bar + dt {
                target.recip() - prior.recip()
            } else {
                target.recip() - (target + s2 * dt).recip()
            };
            (residual, p)
        };
        steps.push(StrategyStep::new(n, t, residual, precision, prior.min(target), c));
    }
    steps
}

/// Myopic precisions for a stationary OU state in closed form.
///
/// With `rho_n = exp(-alpha (t_n - t_{n-1}))`, the residual variance after a
/// purchase is `rho_n^2 sqrt(c) + (1 - rho_n^2) sigma0^2`. Nothing is ever
/// bought when `sqrt(c) >= sigma0^2`.
pub fn ou_myopic_trajectory<T: Scalar>(
    params: &OUParams<T>,
    grid: &TimeGrid<T>,
    c: T,
) -> Result<StrategyTrajectory<T>> {
    check_cost(c)?;
    if !params.is_stationary() {
        return Err(Error::NonStationary {
            alpha: params.alpha().as_f64(),
            stationary: OUParams::stationary_alpha(params.sigma(), params.sigma0()).as_f64(),
        });
    }
    let target = c.sqrt();
    let prior = params.sigma0() * params.sigma0();
    let buys = target < prior;
    let times = grid.times();
    let steps = times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            if !buys {
                return StrategyStep::new(n, t, prior, T::zero(), prior, c);
            }
            let residual = if n == 0 {
                prior
            } else {
                let rho2 = (-T::lit(2.0) * params.alpha() * (t - times[n - 1])).exp();
                rho2 * target + (T::one() - rho2) * prior
            };
            StrategyStep::new(n, t, residual, target.recip() - residual.recip(), target, c)
        })
        .collect();
    Ok(StrategyTrajectory {
        steps,
        mode: StrategyMode::Myopic,
    })
}

/// Myopic precisions for any of the kernels: at each step compute `R_n` by
/// the matrix route over the precisions already chosen, then apply
/// [`myopic_precision`].
pub fn generic_myopic_trajectory<T: Scalar>(
    spec: &ProcessSpec<T>,
    grid: &TimeGrid<T>,
    c: T,
) -> Result<StrategyTrajectory<T>> {
    check_cost(c)?;
    let mut history = SignalHistory::empty();
    let mut steps = Vec::with_capacity(grid.len());
    for (n, &t) in grid.times().iter().enumerate() {
        history.push(SignalRecord::new(t, T::zero()))?;
        let residual = residual_variance_general(spec, &history, n)?.value;
        let choice = myopic_precision(residual, c);
        history.set_precision(n, choice.precision)?;
        steps.push(StrategyStep::new(
            n,
            t,
            residual,
            choice.precision,
            choice.posterior_var,
            c,
        ));
    }
    Ok(StrategyTrajectory {
        steps,
        mode: StrategyMode::Myopic,
    })
}

/// Trajectory under caller-chosen precisions, with `R_n` by the matrix route.
pub fn fixed_trajectory<T: Scalar>(
    spec: &ProcessSpec<T>,
    grid: &TimeGrid<T>,
    precisions: &[T],
    c: T,
) -> Result<StrategyTrajectory<T>> {
    check_cost(c)?;
    let history = SignalHistory::from_schedule(grid.times(), precisions)?;
    let steps = history
        .records()
        .iter()
        .enumerate()
        .map(|(n, rec)| {
            let residual = residual_variance_general(spec, &history, n)?.value;
            let post = if residual <= T::zero() {
                T::zero()
            } else {
                (residual.recip() + rec.precision).recip()
            };
            Ok(StrategyStep::new(n, rec.time, residual, rec.precision, post, c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrategyTrajectory {
        steps,
        mode: StrategyMode::Fixed,
    })
}

/// Steady state of the forward-looking Brownian problem on a unit grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanningSolution<T> {
    /// Steady posterior variance `V`.
    pub v: T,
    /// Per-step state variance the solution was computed for.
    pub sigma: T,
    /// `1/V - 1/(V + sigma^2)`.
    pub steady_precision: T,
    /// `V + c (1/V - 1/(V + sigma^2))`.
    pub steady_payoff: T,
}

impl<T: Scalar> PlanningSolution<T> {
    /// Waiting threshold `(V - sigma0^2) / sigma^2`.
    pub fn waiting_threshold(&self, sigma0: T) -> T {
        (self.v - sigma0 * sigma0) / (self.sigma * self.sigma)
    }
}

/// `g(V) = 1/V^2 - delta/(V + sigma^2)^2 - 1/c`, strictly decreasing in `V`.
pub fn planning_residual<T: Scalar>(v: T, sigma: T, c: T, delta: T) -> T {
    let s2 = sigma * sigma;
    (v * v).recip() - delta / ((v + s2) * (v + s2)) - c.recip()
}

/// Root `V` in `(0, sqrt(c)]` of `1/c = 1/V^2 - delta/(V + sigma^2)^2`.
///
/// Bisection on `(1e-12 sqrt(c), sqrt(c)]`, carried to full working
/// precision (at most 200 halvings). `V = sqrt(c)` exactly when `delta = 0`.
pub fn solve_planning_v<T: Scalar>(sigma: T, c: T, delta: T) -> Result<PlanningSolution<T>> {
    check_positive("sigma", sigma)?;
    check_cost(c)?;
    check_delta(delta)?;
    let root_c = c.sqrt();
    let v = if delta == T::zero() {
        root_c
    } else {
        let mut lo = T::lit(1e-12) * root_c;
        let mut hi = root_c;
        for _ in 0..200 {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if planning_residual(mid, sigma, c, delta) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // pick the endpoint with the smaller residual
        if planning_residual(lo, sigma, c, delta).abs() < planning_residual(hi, sigma, c, delta).abs() {
            lo
        } else {
            hi
        }
    };
    let s2 = sigma * sigma;
    let steady_precision = v.recip() - (v + s2).recip();
    Ok(PlanningSolution {
        v,
        sigma,
        steady_precision,
        steady_payoff: v + c * steady_precision,
    })
}

/// Forward-looking precisions for a Brownian state.
///
/// The grid must be uniformly spaced. A spacing `dt` other than one is
/// handled by solving the unit-step problem with per-step variance
/// `sigma^2 dt` and per-step discount `delta^dt`. With `delta = 0` this is
/// exactly [`brownian_myopic_trajectory`].
pub fn forward_looking_trajectory<T: Scalar>(
    params: &BrownianParams<T>,
    grid: &TimeGrid<T>,
    cost: &CostParams<T>,
) -> Result<StrategyTrajectory<T>> {
    let dt = grid.uniform_step()?.unwrap_or(T::one());
    let plan = planning_for_step(params.sigma(), dt, cost)?;
    let steps = two_phase_brownian(params, grid.times(), plan.v, cost.c());
    Ok(StrategyTrajectory {
        steps,
        mode: StrategyMode::ForwardLooking,
    })
}

/// Planning solution for signals spaced `dt` apart.
pub fn planning_for_step<T: Scalar>(sigma: T, dt: T, cost: &CostParams<T>) -> Result<PlanningSolution<T>> {
    check_positive("dt", dt)?;
    solve_planning_v(sigma * dt.sqrt(), cost.c(), cost.delta().powf(dt))
}

/// Long-run myopic precision `1/sqrt(c) - 1/(sqrt(c) + sigma^2 dt)` and
/// payoff `2 sqrt(c) - c/(sqrt(c) + sigma^2 dt)` on a grid with spacing `dt`.
pub fn steady_state_myopic<T: Scalar>(sigma: T, dt: T, c: T) -> Result<(T, T)> {
    check_positive("sigma", sigma)?;
    check_positive("dt", dt)?;
    check_cost(c)?;
    let root_c = c.sqrt();
    let reset = root_c + sigma * sigma * dt;
    Ok((root_c.recip() - reset.recip(), T::lit(2.0) * root_c - c / reset))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> TimeGrid<f64> {
        TimeGrid::uniform(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn myopic_examples() {
        let a = myopic_precision(1.0, 0.25);
        assert_eq!((a.precision, a.posterior_var), (1.0, 0.5));
        let b = myopic_precision(0.4, 0.25);
        assert_eq!((b.precision, b.posterior_var), (0.0, 0.4));
        let c = myopic_precision(1.5f64, 0.25);
        assert!((c.precision - 4.0 / 3.0).abs() < 1e-15);
        // tie: no purchase
        assert_eq!(myopic_precision(0.5, 0.25).precision, 0.0);
    }

    #[test]
    fn brownian_closed_form() {
        let p = BrownianParams::new(0.0, 1.0, 1.0).unwrap();
        let tr = brownian_myopic_trajectory(&p, &unit_grid(5), 0.25).unwrap();
        assert_eq!(tr.steps[0].precision, 1.0);
        for s in &tr.steps[1..] {
            assert!((s.precision - 4.0 / 3.0).abs() < 1e-15);
            assert!((s.residual_var - 1.5).abs() < 1e-15);
        }
        assert!(tr.steps.iter().all(|s| s.posterior_var == 0.5));
    }

    #[test]
    fn late_start_threshold() {
        // t_bar = (1 - 0.01)/0.04 = 24.75
        let p = BrownianParams::new(0.0, 0.2, 0.1).unwrap();
        let grid = unit_grid(40);
        let tr = brownian_myopic_trajectory(&p, &grid, 1.0).unwrap();
        for s in &tr.steps {
            assert_eq!(s.precision == 0.0, s.time <= 24.75, "t = {}", s.time);
        }
        // iterate the one-step rule with the Brownian recursion
        let mut post = 0.0;
        for s in &tr.steps {
            let r = if s.n == 0 { p.variance(s.time) } else { post + 0.04 };
            let choice = myopic_precision(r, 1.0);
            assert!((choice.precision - s.precision).abs() < 1e-12);
            post = choice.posterior_var;
        }
    }

    #[test]
    fn frozen_state_buys_once() {
        let p = BrownianParams::new(0.0, 0.0, 2.0).unwrap();
        let tr = brownian_myopic_trajectory(&p, &unit_grid(4), 0.25).unwrap();
        assert_eq!(tr.precisions(), vec![2.0 - 0.25, 0.0, 0.0, 0.0]);
        assert!(tr.posterior_vars().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn ou_closed_form() {
        let p = OUParams::new(1.0, 1.0).unwrap();
        let tr = ou_myopic_trajectory(&p, &unit_grid(4), 0.25).unwrap();
        assert_eq!(tr.steps[0].precision, 1.0);
        for s in &tr.steps[1..] {
            assert!((s.precision - 0.775).abs() < 1e-3);
        }
        let cheap = ou_myopic_trajectory(&p, &unit_grid(4), 1.0).unwrap();
        assert!(cheap.precisions().iter().all(|&x| x == 0.0));
        let far = ou_myopic_trajectory(&p, &TimeGrid::new(vec![0.0, 80.0]).unwrap(), 0.25).unwrap();
        assert!((far.steps[1].precision - 1.0).abs() < 1e-12);
        let off = OUParams::with_alpha(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(
            ou_myopic_trajectory(&off, &unit_grid(3), 0.25),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn planning_root() {
        let s = solve_planning_v(1.0, 0.25, 0.0).unwrap();
        assert_eq!(s.v, 0.5);
        let s = solve_planning_v(1.0f64, 0.25, 0.9).unwrap();
        assert!(s.v < 0.5);
        assert!(planning_residual(s.v, 1.0, 0.25, 0.9).abs() < 1e-10);
        let mid = solve_planning_v(1.0, 0.25, 0.5).unwrap();
        assert!(mid.v > s.v);
        assert!(solve_planning_v(1.0, 0.25, 1.0).is_err());
        assert!(solve_planning_v(0.0, 0.25, 0.5).is_err());
    }

    #[test]
    fn forward_looking_reduces_to_myopic() {
        let p = BrownianParams::new(0.0, 0.6, 0.3).unwrap();
        let grid = TimeGrid::uniform(0.5, 0.5, 20).unwrap();
        let fwd = forward_looking_trajectory(&p, &grid, &CostParams::new(0.3, 0.0).unwrap()).unwrap();
        let my = brownian_myopic_trajectory(&p, &grid, 0.3).unwrap();
        assert_eq!(fwd.steps, my.steps);
        let bad = TimeGrid::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert!(forward_looking_trajectory(&p, &bad, &CostParams::new(0.3, 0.5).unwrap()).is_err());
    }

    #[test]
    fn steady_myopic_values() {
        let (p, psi) = steady_state_myopic(1.0f64, 1.0, 0.25).unwrap();
        assert!((p - 4.0 / 3.0).abs() < 1e-15);
        assert!((psi - 5.0 / 6.0).abs() < 1e-15);
        let (p, psi) = steady_state_myopic(1e-6f64, 1e-6, 0.25).unwrap();
        // payoff tends to 2 sqrt(c) - c / sqrt(c) = sqrt(c)
        assert!(p < 1e-10 && (psi - 0.5).abs() < 1e-10);
    }
}
