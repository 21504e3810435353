//! Oracle cross-checks behind `gp-acquire verify`.

use gp_acquire::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    MyopicOracle,
    MatrixVsRecursion,
    PlanningDp,
    KernelLimits,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::MyopicOracle,
        Suite::MatrixVsRecursion,
        Suite::PlanningDp,
        Suite::KernelLimits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MyopicOracle => "myopic-oracle",
            Suite::MatrixVsRecursion => "matrix-vs-recursion",
            Suite::PlanningDp => "planning-dp",
            Suite::KernelLimits => "kernel-limits",
        }
    }

    /// Resolves a suite name; `all` expands to every suite.
    pub fn parse(name: &str) -> Option<Vec<Suite>> {
        if name == "all" {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL.iter().find(|s| s.name() == name).map(|s| vec![*s])
    }

    pub fn run(self, seed: u64) -> Vec<Check> {
        match self {
            Suite::MyopicOracle => myopic_oracle(seed),
            Suite::MatrixVsRecursion => matrix_vs_recursion(seed),
            Suite::PlanningDp => planning_dp(),
            Suite::KernelLimits => kernel_limits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub what: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation < self.tolerance
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}: max deviation {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.what,
            self.deviation,
            self.tolerance
        )
    }
}

fn check(suite: Suite, what: impl Into<String>, deviation: f64, tolerance: f64) -> Check {
    Check {
        suite: suite.name(),
        what: what.into(),
        // a NaN deviation must fail
        deviation: if deviation.is_nan() { f64::INFINITY } else { deviation },
        tolerance,
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

fn myopic_oracle(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev: f64 = 0.0;
    for _ in 0..1000 {
        let r = log_uniform(&mut rng, 1e-2, 1e2);
        let c = log_uniform(&mut rng, 1e-2, 1e2);
        let closed = myopic_precision(r, c).precision;
        dev = dev.max((minimize_psi(r, c).argmin - closed).abs());
    }
    vec![check(
        Suite::MyopicOracle,
        "golden-section argmin vs closed form, 1000 cases",
        dev,
        1e-6,
    )]
}

fn matrix_vs_recursion(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev_matrix: f64 = 0.0;
    let mut dev_closed: f64 = 0.0;
    let mut failures = 0;
    for k in 0..100 {
        let spec = if k % 2 == 0 {
            ProcessSpec::Brownian(
                BrownianParams::new(0.0, rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)).unwrap(),
            )
        } else {
            ProcessSpec::OU(OUParams::new(rng.random_range(0.2..2.0), rng.random_range(0.3..2.0)).unwrap())
        };
        let n = rng.random_range(2..=15);
        let mut t = rng.random_range(0.0..1.0);
        let times: Vec<f64> = (0..n)
            .map(|_| {
                let now = t;
                t += rng.random_range(0.1..2.0);
                now
            })
            .collect();
        let precisions: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.4) {
                    0.0
                } else {
                    rng.random_range(0.1..10.0)
                }
            })
            .collect();
        let c = log_uniform(&mut rng, 1e-2, 4.0);
        match compare_routes(&spec, &times, &precisions, c) {
            Ok((m, cl)) => {
                dev_matrix = dev_matrix.max(m);
                dev_closed = dev_closed.max(cl);
            }
            Err(_) => failures += 1,
        }
    }
    let fail_dev = if failures > 0 { f64::INFINITY } else { 0.0 };
    vec![
        check(
            Suite::MatrixVsRecursion,
            "matrix route vs recursion, 100 scenarios",
            dev_matrix.max(fail_dev),
            1e-8,
        ),
        check(
            Suite::MatrixVsRecursion,
            "closed form vs recursion under optimal play",
            dev_closed.max(fail_dev),
            1e-10,
        ),
    ]
}

fn compare_routes(spec: &ProcessSpec64, times: &[f64], precisions: &[f64], c: f64) -> Result<(f64, f64)> {
    let grid = TimeGrid::new(times.to_vec())?;
    let history = SignalHistory::from_schedule(times, precisions)?;
    let post = (0..times.len())
        .map(|i| posterior_variance_at(spec, &history.prefix(i + 1), times[i]))
        .collect::<Result<Vec<_>>>()?;
    let mut dev_matrix: f64 = 0.0;
    let mut dev_closed: f64 = 0.0;
    let mut post_opt = Vec::with_capacity(times.len());
    for n in 0..times.len() {
        let matrix = residual_variance_general(spec, &history, n)?.value;
        dev_matrix = dev_matrix.max((matrix - residual_variance_markov(spec, &grid, &post, n)?).abs());
        let r = residual_variance_markov(spec, &grid, &post_opt, n)?;
        dev_closed = dev_closed.max((r - residual_variance_markov_closed(spec, &grid, c, n)?).abs());
        post_opt.push(myopic_precision(r, c).posterior_var);
    }
    Ok((dev_matrix, dev_closed))
}

fn planning_dp() -> Vec<Check> {
    let (sigma, c) = (1.0f64, 0.25);
    [0.5, 0.9]
        .iter()
        .map(|&delta| {
            let dev = CostParams::new(c, delta)
                .and_then(|cost| {
                    let root = solve_planning_v(sigma, c, delta)?.v;
                    let grid = RGridSpec::covering(1.0, sigma, 1.0, &cost, 2000);
                    Ok((value_iterate(sigma, &cost, &grid)?.fixed_point_v - root).abs())
                })
                .unwrap_or(f64::INFINITY);
            check(
                Suite::PlanningDp,
                format!("value iteration V vs root, sigma = 1, c = 0.25, delta = {delta}"),
                dev,
                1e-3,
            )
        })
        .collect()
}

fn kernel_limits() -> Vec<Check> {
    let times = [0.0, 0.5, 1.5, 2.0, 3.0];
    let bm = ProcessSpec::Brownian(BrownianParams::new(0.0, 1.0, 1.0).unwrap());
    let ou = OUParams::with_alpha(1.0f64, 1.0, 1e-6).unwrap();
    let dev = times
        .iter()
        .flat_map(|&t| times.iter().map(move |&s| (t, s)))
        .map(|(t, s)| (ou_general_cov(&ou, t, s).unwrap() - bm.prior_cov(t, s).unwrap()).abs())
        .fold(0.0, f64::max);
    vec![check(
        Suite::KernelLimits,
        "OU (alpha = 1e-6) vs Brownian covariance, 5-point grid",
        dev,
        1e-4,
    )]
}
