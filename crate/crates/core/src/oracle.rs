//! Brute-force checks that share no code path with the closed forms: a
//! golden-section minimizer for the one-step payoff and value iteration on
//! the residual-variance state of the forward-looking Brownian problem.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strategies::{check_delta, CostParams};

/// Width to which [`minimize_psi`] narrows its bracket.
pub const PSI_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinResult<T> {
    pub argmin: T,
    pub min_value: T,
    pub evaluations: usize,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`. The left endpoint is
/// evaluated too and wins ties, so a minimum sitting on the boundary is
/// returned exactly.
pub fn golden_section<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> ScalarMinResult<T> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        evaluations += 1;
        if x1 >= x2 {
            break;
        }
    }
    let (mut argmin, mut min_value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let f_lo = f(lo);
    evaluations += 1;
    if f_lo <= min_value {
        argmin = lo;
        min_value = f_lo;
    }
    ScalarMinResult {
        argmin,
        min_value,
        evaluations,
    }
}

/// `psi(p) = (1/R + p)^{-1} + c p`.
pub fn psi<T: Scalar>(residual_var: T, c: T, p: T) -> T {
    (residual_var.recip() + p).recip() + c * p
}

/// Minimizes `psi` over `p` in `[0, 10/sqrt(c)]` by golden-section search.
pub fn minimize_psi<T: Scalar>(residual_var: T, c: T) -> ScalarMinResult<T> {
    let hi = T::lit(10.0) / c.sqrt();
    let tol = T::lit(PSI_TOLERANCE).max(hi * T::epsilon() * T::lit(4.0));
    golden_section(|p| psi(residual_var, c, p), T::zero(), hi, tol)
}

/// Uniform grid of residual variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RGridSpec<T> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
}

impl<T: Scalar> RGridSpec<T> {
    /// Grid on `[sqrt(c (1 - delta)) / 4, 4 (sigma0^2 + sigma^2 t_max)]`.
    /// The steady variance `V` is at least `sqrt(c (1 - delta))`, so the
    /// lower end sits below `V/4` without having to know `V`.
    pub fn covering(sigma0: T, sigma: T, t_max: T, cost: &CostParams<T>, points: usize) -> Self {
        let lo = (cost.c() * (T::one() - cost.delta())).sqrt() / T::lit(4.0);
        let hi = T::lit(4.0) * (sigma0 * sigma0 + sigma * sigma * t_max);
        Self { lo, hi, points }
    }

    pub fn values(&self) -> Vec<T> {
        let last = T::from_usize(self.points - 1).unwrap();
        (0..self.points)
            .map(|i| self.lo + (self.hi - self.lo) * T::from_usize(i).unwrap() / last)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIterationResult<T> {
    pub grid: Vec<T>,
    pub value_fn: Vec<T>,
    /// Optimal precision at each grid point.
    pub policy: Vec<T>,
    /// Steady posterior variance of the dynamics the policy induces.
    pub fixed_point_v: T,
    pub iterations: usize,
    /// Sup-norm change of the value function at each sweep.
    pub sweep_deltas: Vec<T>,
}

impl<T: Scalar> ValueIterationResult<T> {
    /// Largest grid value at which the policy buys nothing, scanning up
    /// from the bottom of the grid.
    pub fn purchase_cutoff(&self) -> T {
        let first_buy = self
            .policy
            .iter()
            .position(|&p| p > T::zero())
            .unwrap_or(self.grid.len());
        if first_buy == 0 {
            self.grid[0]
        } else {
            self.grid[first_buy - 1]
        }
    }
}

/// Linear interpolation on a uniform grid, extrapolating from the end
/// segments.
fn interpolate<T: Scalar>(lo: T, step: T, values: &[T], x: T) -> T {
    let last = values.len() - 1;
    let pos = (x - lo) / step;
    let i = pos.floor().to_isize().unwrap_or(0).clamp(0, last as isize - 1) as usize;
    let w = pos - T::from_usize(i).unwrap();
    values[i] + w * (values[i + 1] - values[i])
}

/// Sweep limit for [`value_iterate`].
pub const MAX_SWEEPS: usize = 100_000;

/// Sup-norm change at which [`value_iterate`] stops.
pub const SWEEP_TOLERANCE: f64 = 1e-10;

/// Value iteration for the forward-looking Brownian problem on unit steps,
/// with the residual variance `R` as the state:
///
/// `W(R) = min_p [ v + c p + delta W(v + sigma^2) ]`, `v = (1/R + p)^{-1}`.
///
/// Off-grid values of `W` are linearly interpolated. Each sweep reads only
/// the previous value function, so grid points are updated in parallel.
pub fn value_iterate<T: Scalar>(
    sigma: T,
    cost: &CostParams<T>,
    r_grid: &RGridSpec<T>,
) -> Result<ValueIterationResult<T>> {
    check_delta(cost.delta())?;
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be positive, got {sigma}"),
        });
    }
    if r_grid.points < 2 || !(r_grid.lo > T::zero()) || !(r_grid.hi > r_grid.lo) {
        return Err(Error::InvalidParameter {
            name: "r_grid",
            reason: "need at least two points on 0 < lo < hi".into(),
        });
    }
    let c = cost.c();
    let delta = cost.delta();
    let s2 = sigma * sigma;
    let grid = r_grid.values();
    let step = (r_grid.hi - r_grid.lo) / T::from_usize(r_grid.points - 1).unwrap();
    let p_hi = T::lit(10.0) / c.sqrt();
    let tol = T::lit(PSI_TOLERANCE).max(p_hi * T::epsilon() * T::lit(4.0));

    let bellman = |w: &[T], r: T| {
        golden_section(
            |p| {
                let v = (r.recip() + p).recip();
                v + c * p + delta * interpolate(r_grid.lo, step, w, v + s2)
            },
            T::zero(),
            p_hi,
            tol,
        )
    };

    let mut value = vec![T::zero(); grid.len()];
    let mut sweep_deltas = Vec::new();
    let mut iterations = 0;
    loop {
        let next: Vec<T> = grid.par_iter().map(|&r| bellman(&value, r).min_value).collect();
        let change = next
            .iter()
            .zip(&value)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        value = next;
        iterations += 1;
        sweep_deltas.push(change);
        if !change.is_finite() || (iterations > 50 && change > sweep_deltas[0] * T::lit(1e6)) {
            return Err(Error::Divergence {
                iterations,
                last_delta: change.as_f64(),
            });
        }
        if change < T::lit(SWEEP_TOLERANCE) || iterations >= MAX_SWEEPS {
            break;
        }
    }

    let policy: Vec<T> = grid.par_iter().map(|&r| bellman(&value, r).argmin).collect();
    let chosen_var: Vec<T> = grid
        .iter()
        .zip(&policy)
        .map(|(&r, &p)| (r.recip() + p).recip())
        .collect();

    // iterate R -> v(R) + sigma^2 under the interpolated policy
    let mut r = grid[grid.len() / 2];
    for _ in 0..100_000 {
        let next = interpolate(r_grid.lo, step, &chosen_var, r) + s2;
        let done = (next - r).abs() < T::lit(1e-13).max(T::epsilon() * T::lit(8.0));
        r = next;
        if done {
            break;
        }
    }
    let fixed_point_v = r - s2;

    Ok(ValueIterationResult {
        grid,
        value_fn: value,
        policy,
        fixed_point_v,
        iterations,
        sweep_deltas,
    })
}
