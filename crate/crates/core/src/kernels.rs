//! Prior mean and covariance functions of the three state processes, plus
//! exact joint sampling on a time grid.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

fn check_time<T: Scalar>(t: T) -> Result<()> {
    if t >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t.as_f64()))
    }
}

fn require(name: &'static str, ok: bool, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason.to_string(),
        })
    }
}

/// Brownian motion with drift `mu`, scale `sigma` and initial value
/// `N(0, sigma0^2)`.
///
/// `sigma = 0` is accepted and describes a frozen state with an unknown
/// starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianParams<T> {
    mu: T,
    sigma: T,
    sigma0: T,
}

impl<T: Scalar> BrownianParams<T> {
    pub fn new(mu: T, sigma: T, sigma0: T) -> Result<Self> {
        require("mu", mu.is_finite(), "must be finite")?;
        require(
            "sigma",
            sigma >= T::zero() && sigma.is_finite(),
            "must be finite and nonnegative",
        )?;
        require(
            "sigma0",
            sigma0 >= T::zero() && sigma0.is_finite(),
            "must be finite and nonnegative",
        )?;
        Ok(Self { mu, sigma, sigma0 })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    /// Prior variance `sigma0^2 + sigma^2 t`.
    pub fn variance(&self, t: T) -> T {
        self.sigma0 * self.sigma0 + self.sigma * self.sigma * t
    }
}

/// Ornstein-Uhlenbeck process `d theta = -alpha theta dt + sigma dW` with
/// `theta(0) ~ N(0, sigma0^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUParams<T> {
    sigma: T,
    sigma0: T,
    alpha: T,
}

impl<T: Scalar> OUParams<T> {
    /// Stationary parametrization: `alpha = sigma^2 / (2 sigma0^2)`, so the
    /// prior variance is `sigma0^2` at every time.
    pub fn new(sigma: T, sigma0: T) -> Result<Self> {
        require(
            "sigma",
            sigma > T::zero() && sigma.is_finite(),
            "must be finite and positive",
        )?;
        require(
            "sigma0",
            sigma0 > T::zero() && sigma0.is_finite(),
            "must be finite and positive",
        )?;
        let alpha = Self::stationary_alpha(sigma, sigma0);
        require(
            "alpha",
            alpha > T::zero() && alpha.is_finite(),
            "sigma^2/(2 sigma0^2) must be finite and positive",
        )?;
        Ok(Self { sigma, sigma0, alpha })
    }

    /// Arbitrary mean-reversion rate. `sigma0 = 0` is allowed here.
    pub fn with_alpha(sigma: T, sigma0: T, alpha: T) -> Result<Self> {
        require(
            "sigma",
            sigma > T::zero() && sigma.is_finite(),
            "must be finite and positive",
        )?;
        require(
            "sigma0",
            sigma0 >= T::zero() && sigma0.is_finite(),
            "must be finite and nonnegative",
        )?;
        require(
            "alpha",
            alpha > T::zero() && alpha.is_finite(),
            "must be finite and positive",
        )?;
        Ok(Self { sigma, sigma0, alpha })
    }

    pub fn stationary_alpha(sigma: T, sigma0: T) -> T {
        sigma * sigma / (T::lit(2.0) * sigma0 * sigma0)
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// True when `alpha` matches `sigma^2/(2 sigma0^2)` to a relative 1e-12
    /// (scaled by epsilon for narrow types).
    pub fn is_stationary(&self) -> bool {
        if self.sigma0 <= T::zero() {
            return false;
        }
        let target = Self::stationary_alpha(self.sigma, self.sigma0);
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        ((self.alpha - target) / target).abs() <= tol
    }
}

/// Straight line `theta(t) = theta0 + beta t` with independent
/// `theta0 ~ N(0, sigma0^2)` and `beta ~ N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams<T> {
    mu: T,
    sigma: T,
    sigma0: T,
}

impl<T: Scalar> LinearParams<T> {
    pub fn new(mu: T, sigma: T, sigma0: T) -> Result<Self> {
        require("mu", mu.is_finite(), "must be finite")?;
        require(
            "sigma",
            sigma >= T::zero() && sigma.is_finite(),
            "must be finite and nonnegative",
        )?;
        require(
            "sigma0",
            sigma0 >= T::zero() && sigma0.is_finite(),
            "must be finite and nonnegative",
        )?;
        Ok(Self { mu, sigma, sigma0 })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    Brownian,
    OU,
    Linear,
}

impl ProcessKind {
    pub fn name(self) -> &'static str {
        match self {
            ProcessKind::Brownian => "Brownian",
            ProcessKind::OU => "Ornstein-Uhlenbeck",
            ProcessKind::Linear => "linear",
        }
    }
}

/// A Gaussian state process, identified by its prior mean and covariance
/// functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessSpec<T> {
    Brownian(BrownianParams<T>),
    OU(OUParams<T>),
    Linear(LinearParams<T>),
}

impl<T: Scalar> ProcessSpec<T> {
    pub fn kind(&self) -> ProcessKind {
        match self {
            ProcessSpec::Brownian(_) => ProcessKind::Brownian,
            ProcessSpec::OU(_) => ProcessKind::OU,
            ProcessSpec::Linear(_) => ProcessKind::Linear,
        }
    }

    /// `E[theta(t)]`.
    pub fn prior_mean(&self, t: T) -> Result<T> {
        check_time(t)?;
        Ok(self.mean_unchecked(t))
    }

    /// `Cov(theta(t), theta(t2))`.
    pub fn prior_cov(&self, t: T, t2: T) -> Result<T> {
        check_time(t)?;
        check_time(t2)?;
        Ok(self.cov_unchecked(t, t2))
    }

    /// `Var(theta(t))`.
    pub fn prior_var(&self, t: T) -> Result<T> {
        self.prior_cov(t, t)
    }

    pub(crate) fn mean_unchecked(&self, t: T) -> T {
        match self {
            ProcessSpec::Brownian(p) => p.mu * t,
            ProcessSpec::OU(_) => T::zero(),
            ProcessSpec::Linear(p) => p.mu * t,
        }
    }

    pub(crate) fn cov_unchecked(&self, t: T, t2: T) -> T {
        match self {
            ProcessSpec::Brownian(p) => p.sigma0 * p.sigma0 + p.sigma * p.sigma * t.min(t2),
            ProcessSpec::OU(p) if p.is_stationary() => p.sigma0 * p.sigma0 * (-p.alpha * (t - t2).abs()).exp(),
            ProcessSpec::OU(p) => ou_cov_unchecked(p, t, t2),
            ProcessSpec::Linear(p) => p.sigma0 * p.sigma0 + p.sigma * p.sigma * (t * t2),
        }
    }
}

fn ou_cov_unchecked<T: Scalar>(p: &OUParams<T>, t: T, t2: T) -> T {
    let near = p.alpha * (t - t2).abs();
    let far = p.alpha * (t + t2);
    // e^{-near} - e^{-far} written to survive alpha -> 0
    let gap = -(-near).exp() * (-(far - near)).exp_m1();
    p.sigma0 * p.sigma0 * (-far).exp() + p.sigma * p.sigma / (T::lit(2.0) * p.alpha) * gap
}

/// OU covariance for an arbitrary `alpha > 0`, which need not be the
/// stationary choice. Tends to the Brownian covariance as `alpha -> 0`.
pub fn ou_general_cov<T: Scalar>(params: &OUParams<T>, t: T, t2: T) -> Result<T> {
    check_time(t)?;
    check_time(t2)?;
    Ok(ou_cov_unchecked(params, t, t2))
}

/// Strictly increasing, nonnegative observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    times: Vec<T>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        validate_times(&times)?;
        Ok(Self { times })
    }

    /// `count` points `start, start + step, ...`.
    pub fn uniform(start: T, step: T, count: usize) -> Result<Self> {
        require(
            "step",
            step > T::zero() && step.is_finite(),
            "must be finite and positive",
        )?;
        let times = (0..count).map(|i| start + step * T::from_usize(i).unwrap()).collect();
        Self::new(times)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Common spacing when every step agrees with the first to a relative
    /// 1e-9; `None` for grids with fewer than two points.
    pub fn uniform_step(&self) -> Result<Option<T>> {
        if self.times.len() < 2 {
            return Ok(None);
        }
        let first = self.times[1] - self.times[0];
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
        for (i, w) in self.times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if ((step - first) / first).abs() > tol {
                return Err(Error::NonUniformGrid {
                    index: i + 1,
                    step: step.as_f64(),
                    expected: first.as_f64(),
                });
            }
        }
        Ok(Some(first))
    }

    pub fn into_times(self) -> Vec<T> {
        self.times
    }
}

pub(crate) fn validate_times<T: Scalar>(times: &[T]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::InvalidParameter {
                name: "times",
                reason: format!("entry {i} is not finite"),
            });
        }
        check_time(t)?;
        if i > 0 && t <= times[i - 1] {
            return Err(Error::NotIncreasing {
                index: i,
                time: t.as_f64(),
            });
        }
    }
    Ok(())
}

/// One exact joint draw of `(theta(t_1), ..., theta(t_N))` from the path
/// stream of `seed`.
pub fn sample_path<T: Scalar>(spec: &ProcessSpec<T>, grid: &TimeGrid<T>, seed: u64) -> Vec<T> {
    let mut rng = rng::substream(seed, rng::PATH_STREAM);
    sample_path_with(spec, grid, &mut rng)
}

/// As [`sample_path`], drawing from a caller-supplied generator.
pub fn sample_path_with<T: Scalar, R: Rng + ?Sized>(spec: &ProcessSpec<T>, grid: &TimeGrid<T>, rng: &mut R) -> Vec<T> {
    let times = grid.times();
    let mut out = Vec::with_capacity(times.len());
    match spec {
        ProcessSpec::Brownian(p) => {
            let mut theta = p.sigma0 * T::standard_normal(rng);
            let mut prev = T::zero();
            for &t in times {
                let dt = t - prev;
                theta = theta + p.mu * dt + p.sigma * dt.sqrt() * T::standard_normal(rng);
                out.push(theta);
                prev = t;
            }
        }
        ProcessSpec::OU(p) => {
            let mut theta = p.sigma0 * T::standard_normal(rng);
            let mut prev = T::zero();
            let half_var = p.sigma * p.sigma / (T::lit(2.0) * p.alpha);
            for &t in times {
                let dt = t - prev;
                let keep = (-p.alpha * dt).exp();
                let var = half_var * -(-T::lit(2.0) * p.alpha * dt).exp_m1();
                theta = keep * theta + var.max(T::zero()).sqrt() * T::standard_normal(rng);
                out.push(theta);
                prev = t;
            }
        }
        ProcessSpec::Linear(p) => {
            let intercept = p.sigma0 * T::standard_normal(rng);
            let slope = p.mu + p.sigma * T::standard_normal(rng);
            out.extend(times.iter().map(|&t| intercept + slope * t));
        }
    }
    out
}
