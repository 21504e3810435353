//! Posterior beliefs about the state given noisy signals, and the residual
//! variance `R_n = Var(theta(t_n) | s_1..s_{n-1})` that drives the choice of
//! each precision.
//!
//! Three routes to `R_n` are provided and cross-checked in the tests:
//!
//! * the matrix route ([`residual_variance_general`]), valid for any kernel;
//! * the one-step Gauss-Markov recursion ([`residual_variance_markov`]) and
//!   its Brownian special case ([`residual_variance_brownian`]);
//! * the closed form under optimal myopic play
//!   ([`residual_variance_markov_closed`]).
//!
//! Signals with zero precision carry no information. The matrix routes drop
//! their rows and columns outright, which is the exact limit of giving them
//! infinite noise variance.

use crate::error::{Error, Result};
use crate::kernels::{validate_times, ProcessKind, ProcessSpec, TimeGrid};
use crate::linalg::{condition_one, Cholesky, Matrix};
use crate::scalar::{condition_limit, Scalar};

/// One signal `s = theta(time) + noise`, `noise ~ N(0, 1/precision)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalRecord<T> {
    pub time: T,
    pub precision: T,
    /// Realized signal, present only when draws were simulated.
    pub value: Option<T>,
}

impl<T: Scalar> SignalRecord<T> {
    pub fn new(time: T, precision: T) -> Self {
        Self {
            time,
            precision,
            value: None,
        }
    }

    pub fn with_value(time: T, precision: T, value: T) -> Self {
        Self {
            time,
            precision,
            value: Some(value),
        }
    }

    pub fn is_informative(&self) -> bool {
        self.precision > T::zero()
    }
}

/// Signals ordered by strictly increasing time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalHistory<T> {
    records: Vec<SignalRecord<T>>,
}

impl<T: Scalar> SignalHistory<T> {
    pub fn new(records: Vec<SignalRecord<T>>) -> Result<Self> {
        let times: Vec<T> = records.iter().map(|r| r.time).collect();
        validate_times(&times)?;
        for r in &records {
            check_precision(r.precision)?;
        }
        Ok(Self { records })
    }

    pub fn empty() -> Self {
        Self { records: Vec::new() }
    }

    /// Value-free history with the given times and precisions.
    pub fn from_schedule(times: &[T], precisions: &[T]) -> Result<Self> {
        if times.len() != precisions.len() {
            return Err(Error::InvalidParameter {
                name: "precisions",
                reason: format!("{} precisions for {} times", precisions.len(), times.len()),
            });
        }
        Self::new(
            times
                .iter()
                .zip(precisions)
                .map(|(&t, &p)| SignalRecord::new(t, p))
                .collect(),
        )
    }

    pub fn push(&mut self, record: SignalRecord<T>) -> Result<()> {
        check_precision(record.precision)?;
        validate_times(&[record.time])?;
        if let Some(last) = self.records.last() {
            if record.time <= last.time {
                return Err(Error::NotIncreasing {
                    index: self.records.len(),
                    time: record.time.as_f64(),
                });
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[SignalRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The first `k` records.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            records: self.records[..k.min(self.records.len())].to_vec(),
        }
    }

    pub fn set_precision(&mut self, index: usize, precision: T) -> Result<()> {
        check_precision(precision)?;
        let len = self.records.len();
        let r = self
            .records
            .get_mut(index)
            .ok_or(Error::IndexOutOfRange { index, len })?;
        r.precision = precision;
        Ok(())
    }
}

fn check_precision<T: Scalar>(p: T) -> Result<()> {
    if p >= T::zero() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "precision",
            reason: format!("must be finite and nonnegative, got {p}"),
        })
    }
}

/// Posterior `N(mean, variance)` of `theta(query_time)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary<T> {
    pub query_time: T,
    pub mean: T,
    pub variance: T,
}

/// `R_n`, with `n` the zero-based index of the signal about to be chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualVariance<T> {
    pub n: usize,
    pub value: T,
}

fn signal_matrix<T: Scalar>(spec: &ProcessSpec<T>, recs: &[SignalRecord<T>]) -> Matrix<T> {
    Matrix::from_fn(recs.len(), |i, j| {
        let cov = spec.cov_unchecked(recs[i].time, recs[j].time);
        if i == j {
            cov + recs[i].precision.recip()
        } else {
            cov
        }
    })
}

fn factor_checked<T: Scalar>(a: &Matrix<T>, times: impl Fn() -> Vec<f64>) -> Result<Cholesky<T>> {
    let (ch, cond) = condition_one(a);
    match ch {
        Some(ch) if cond <= condition_limit::<T>() => Ok(ch),
        _ => Err(Error::Singular {
            times: times(),
            condition: cond.as_f64(),
        }),
    }
}

/// Covariance matrix of the signals: `Cov(theta(t_i), theta(t_j)) + [i = j] / p_i`.
///
/// Every record must carry a positive precision; filter zero-precision
/// records first.
pub fn gram_plus_noise<T: Scalar>(spec: &ProcessSpec<T>, history: &SignalHistory<T>) -> Result<Matrix<T>> {
    if let Some(index) = history.records.iter().position(|r| !r.is_informative()) {
        return Err(Error::ZeroPrecision { index });
    }
    Ok(signal_matrix(spec, &history.records))
}

/// Factored posterior for a fixed history, reusable across query times.
#[derive(Debug, Clone)]
pub struct Posterior<'a, T> {
    spec: &'a ProcessSpec<T>,
    informative: Vec<SignalRecord<T>>,
    chol: Option<Cholesky<T>>,
    /// `Sigma^{-1} (y - E[y])` when every informative record has a value.
    weights: Option<Vec<T>>,
}

impl<'a, T: Scalar> Posterior<'a, T> {
    pub fn new(spec: &'a ProcessSpec<T>, history: &SignalHistory<T>) -> Result<Self> {
        let informative: Vec<SignalRecord<T>> =
            history.records.iter().copied().filter(|r| r.is_informative()).collect();
        if informative.is_empty() {
            return Ok(Self {
                spec,
                informative,
                chol: None,
                weights: Some(Vec::new()),
            });
        }
        let sigma = signal_matrix(spec, &informative);
        let chol = factor_checked(&sigma, || informative.iter().map(|r| r.time.as_f64()).collect())?;
        let centered: Option<Vec<T>> = informative
            .iter()
            .map(|r| r.value.map(|v| v - spec.mean_unchecked(r.time)))
            .collect();
        let weights = centered.map(|c| chol.solve(&c));
        Ok(Self {
            spec,
            informative,
            chol: Some(chol),
            weights,
        })
    }

    fn cross_cov(&self, t: T) -> Vec<T> {
        self.informative
            .iter()
            .map(|r| self.spec.cov_unchecked(t, r.time))
            .collect()
    }

    /// `Var(theta(t) | history)`; independent of the signal values.
    pub fn variance(&self, t: T) -> Result<T> {
        let prior = self.spec.prior_var(t)?;
        let Some(chol) = &self.chol else {
            return Ok(prior);
        };
        let w = self.cross_cov(t);
        let k = chol.solve(&w);
        let explained: T = w.iter().zip(&k).map(|(&a, &b)| a * b).sum();
        Ok((prior - explained).max(T::zero()).min(prior))
    }

    /// `E[theta(t) | history]`.
    pub fn mean(&self, t: T) -> Result<T> {
        let prior = self.spec.prior_mean(t)?;
        let weights = self.weights.as_ref().ok_or_else(|| {
            let index = self.informative.iter().position(|r| r.value.is_none()).unwrap_or(0);
            Error::MissingSignalValue { index }
        })?;
        let w = self.cross_cov(t);
        Ok(prior + w.iter().zip(weights).map(|(&a, &b)| a * b).sum::<T>())
    }

    /// Coefficients `k` with `E[theta(t) | history] = E[theta(t)] + k . (y - E[y])`
    /// over the informative records, in order.
    pub fn gain(&self, t: T) -> Result<Vec<T>> {
        self.spec.prior_var(t)?;
        match &self.chol {
            Some(chol) => Ok(chol.solve(&self.cross_cov(t))),
            None => Ok(Vec::new()),
        }
    }

    pub fn summary(&self, t: T) -> Result<PosteriorSummary<T>> {
        Ok(PosteriorSummary {
            query_time: t,
            mean: self.mean(t)?,
            variance: self.variance(t)?,
        })
    }
}

/// Posterior mean and variance of `theta(t)`. Zero-precision records are
/// ignored; every other record needs a realized value.
pub fn posterior_at<T: Scalar>(spec: &ProcessSpec<T>, history: &SignalHistory<T>, t: T) -> Result<PosteriorSummary<T>> {
    Posterior::new(spec, history)?.summary(t)
}

/// Posterior variance of `theta(t)`; signal values are not needed.
pub fn posterior_variance_at<T: Scalar>(spec: &ProcessSpec<T>, history: &SignalHistory<T>, t: T) -> Result<T> {
    Posterior::new(spec, history)?.variance(t)
}

/// `R_n` by inverting `G_n + D_n`: the prior covariance of
/// `theta(t_1..t_n)` plus noise variances `1/p_i` for the earlier signals and
/// zero for signal `n`. `1/R_n` is the last diagonal entry of the inverse.
///
/// `n` is zero-based; precisions of records `0..n` are used and the
/// precision of record `n` is ignored.
pub fn residual_variance_general<T: Scalar>(
    spec: &ProcessSpec<T>,
    history: &SignalHistory<T>,
    n: usize,
) -> Result<ResidualVariance<T>> {
    let len = history.len();
    let target = history.records.get(n).ok_or(Error::IndexOutOfRange { index: n, len })?;
    let prior = spec.cov_unchecked(target.time, target.time);
    if n == 0 || prior <= T::zero() {
        return Ok(ResidualVariance { n, value: prior });
    }
    let mut rows: Vec<(T, T)> = history.records[..n]
        .iter()
        .filter(|r| r.is_informative())
        .map(|r| (r.time, r.precision.recip()))
        .collect();
    rows.push((target.time, T::zero()));
    let m = rows.len();
    let a = Matrix::from_fn(m, |i, j| {
        let cov = spec.cov_unchecked(rows[i].0, rows[j].0);
        if i == j {
            cov + rows[i].1
        } else {
            cov
        }
    });
    let chol = factor_checked(&a, || rows.iter().map(|r| r.0.as_f64()).collect())?;
    let inv = chol.inverse();
    Ok(ResidualVariance {
        n,
        value: inv.get(m - 1, m - 1).recip(),
    })
}

/// Brownian residual variance: the previous posterior variance plus the
/// variance `sigma^2 dt` accumulated since.
pub fn residual_variance_brownian<T: Scalar>(prev_posterior_var: T, dt: T, sigma: T) -> T {
    prev_posterior_var + sigma * sigma * dt
}

/// Regression coefficient `beta` and conditional variance `gamma` of
/// `theta(t)` on `theta(t_prev)`, so that
/// `theta(t) | theta(t_prev) ~ N(. + beta theta(t_prev), gamma)`.
pub fn markov_coefficients<T: Scalar>(spec: &ProcessSpec<T>, t_prev: T, t: T) -> Result<(T, T)> {
    if spec.kind() == ProcessKind::Linear {
        return Err(Error::NotMarkov(ProcessKind::Linear.name()));
    }
    let var_prev = spec.prior_var(t_prev)?;
    let var = spec.prior_var(t)?;
    let cov = spec.prior_cov(t, t_prev)?;
    if var_prev <= T::zero() {
        // theta(t_prev) is known a priori and carries no information
        return Ok((T::zero(), var));
    }
    let beta = cov / var_prev;
    Ok((beta, (var - beta * cov).max(T::zero())))
}

/// One step of the Gauss-Markov recursion
/// `R_n = beta_n^2 Var(theta(t_{n-1}) | I_{n-1}) + gamma_n`.
///
/// `posterior_vars[i]` is the posterior variance after signal `i`; only
/// entry `n - 1` is read. For `n = 0` the prior variance is returned.
pub fn residual_variance_markov<T: Scalar>(
    spec: &ProcessSpec<T>,
    grid: &TimeGrid<T>,
    posterior_vars: &[T],
    n: usize,
) -> Result<T> {
    let times = grid.times();
    if n >= times.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: times.len(),
        });
    }
    if spec.kind() == ProcessKind::Linear {
        return Err(Error::NotMarkov(ProcessKind::Linear.name()));
    }
    if n == 0 {
        return spec.prior_var(times[0]);
    }
    let prev = *posterior_vars.get(n - 1).ok_or(Error::IndexOutOfRange {
        index: n - 1,
        len: posterior_vars.len(),
    })?;
    let (beta, gamma) = markov_coefficients(spec, times[n - 1], times[n])?;
    Ok(beta * beta * prev + gamma)
}

/// `R_n` under optimal myopic play at every earlier step, as the minimum
/// over the chains that restart either from the prior at the first signal
/// or from the target variance `sqrt(c)` at some later one.
pub fn residual_variance_markov_closed<T: Scalar>(
    spec: &ProcessSpec<T>,
    grid: &TimeGrid<T>,
    c: T,
    n: usize,
) -> Result<T> {
    let times = grid.times();
    if n >= times.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: times.len(),
        });
    }
    if spec.kind() == ProcessKind::Linear {
        return Err(Error::NotMarkov(ProcessKind::Linear.name()));
    }
    let first = spec.prior_var(times[0])?;
    if n == 0 {
        return Ok(first);
    }
    let target = c.sqrt();
    let mut product = T::one();
    let mut accumulated = T::zero();
    let mut best = T::infinity();
    for m in (1..=n).rev() {
        let (beta, gamma) = markov_coefficients(spec, times[m - 1], times[m])?;
        accumulated = accumulated + gamma * product;
        product = product * beta * beta;
        best = best.min(target * product + accumulated);
    }
    Ok(best.min(first * product + accumulated))
}
