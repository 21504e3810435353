//! The four subcommands, written against `io::Write` so tests can capture
//! their output.

use std::io::Write;
use std::path::PathBuf;

use gp_acquire::{
    myopic_precision, planning_for_step, run_scenario, scenario_trajectory, steady_state_myopic, CostParams,
    ProcessSpec, RunResult64,
};
use rayon::prelude::*;

use crate::config::NamedScenario;
use crate::svg::{learning_figure, series_figure, Series, StagePanel};
use crate::table::{fmt_num, write_precisions, write_simulation, PrecisionRow, RecordKind, SimulationRow};
use crate::verify::Suite;
use crate::CliError;

/// Half-width of the plotted credible band, in posterior standard deviations.
pub const BAND_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

/// Rendered outputs for one scenario.
struct Artifacts {
    name: String,
    csv: Vec<u8>,
    svg: String,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))
}

fn emit(artifacts: Vec<Artifacts>, opts: &OutputOptions, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &opts.dir {
        None => {
            if artifacts.len() > 1 {
                return Err(CliError::Config("--output is required for a batch of scenarios".into()));
            }
            if opts.format == Format::Both {
                return Err(CliError::Config("--format both requires --output".into()));
            }
            for a in &artifacts {
                match opts.format {
                    Format::Svg => out.write_all(a.svg.as_bytes()).map_err(io)?,
                    _ => out.write_all(&a.csv).map_err(io)?,
                }
            }
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for a in &artifacts {
                let mut write = |ext: &str, bytes: &[u8]| {
                    let path = dir.join(format!("{}.{ext}", a.name));
                    std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    writeln!(out, "wrote {}", path.display()).map_err(io)
                };
                if opts.format != Format::Svg {
                    write("csv", &a.csv)?;
                }
                if opts.format != Format::Csv {
                    write("svg", a.svg.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

/// Rows of the precisions table, and whether it carries `p_dagger`.
pub fn precision_rows(named: &NamedScenario) -> Result<(Vec<PrecisionRow>, bool), CliError> {
    let scn = &named.scenario;
    let trajectory = scenario_trajectory(scn)?;
    let c = scn.cost.c();
    let target = match (&scn.process, scn.cost.delta() > 0.0) {
        (ProcessSpec::Brownian(p), true) => {
            let dt = scn.grid.uniform_step()?.unwrap_or(1.0);
            Some(planning_for_step(p.sigma(), dt, &scn.cost)?.v)
        }
        _ => None,
    };
    let rows = trajectory
        .steps
        .iter()
        .map(|s| PrecisionRow {
            n: s.n + 1,
            t_n: s.time,
            r_n: s.residual_var,
            p_star: myopic_precision(s.residual_var, c).precision,
            p_dagger: target.map(|v| (1.0 / v - 1.0 / s.residual_var).max(0.0)),
            posterior_var: s.posterior_var,
            payoff: s.payoff,
        })
        .collect();
    Ok((rows, target.is_some()))
}

fn precision_artifacts(named: &NamedScenario) -> Result<Artifacts, CliError> {
    let (rows, with_dagger) = precision_rows(named)?;
    let mut csv = Vec::new();
    write_precisions(&mut csv, &rows, with_dagger)?;

    let series = |label: &str, color: &'static str, f: &dyn Fn(&PrecisionRow) -> f64| Series {
        label: label.into(),
        color,
        points: rows.iter().map(|r| (r.t_n, f(r))).collect(),
    };
    let mut precision = vec![series("p_star", "#1f4e9c", &|r| r.p_star)];
    if with_dagger {
        precision.push(series("p_dagger", "#d35400", &|r| r.p_dagger.unwrap_or(0.0)));
    }
    let variance = vec![
        series("R_n", "#7f7f7f", &|r| r.r_n),
        series("posterior_var", "#1f4e9c", &|r| r.posterior_var),
    ];
    let svg = series_figure(&[
        (format!("{}: precision", named.name), precision),
        (format!("{}: variance", named.name), variance),
    ]);
    Ok(Artifacts {
        name: named.name.clone(),
        csv,
        svg,
    })
}

/// Long-format rows for a simulated run.
pub fn simulation_rows(run: &RunResult64, times: &[f64]) -> Vec<SimulationRow> {
    let mut rows: Vec<SimulationRow> = run
        .realized_path
        .iter()
        .map(|&(t, v)| SimulationRow {
            record: RecordKind::Path,
            stage: None,
            t,
            value: v,
            variance: None,
            lower: None,
            upper: None,
        })
        .collect();
    let precisions = run.trajectory.precisions();
    for (n, (&t, s)) in times.iter().zip(&run.signal_values).enumerate() {
        if let Some(v) = s {
            rows.push(SimulationRow {
                record: RecordKind::Signal,
                stage: Some(n + 1),
                t,
                value: *v,
                variance: Some(1.0 / precisions[n]),
                lower: None,
                upper: None,
            });
        }
    }
    for (k, curve) in run.posterior_curves.iter().flatten().enumerate() {
        for p in curve {
            let half = BAND_Z * p.variance.sqrt();
            rows.push(SimulationRow {
                record: RecordKind::Posterior,
                stage: Some(k),
                t: p.query_time,
                value: p.mean,
                variance: Some(p.variance),
                lower: Some(p.mean - half),
                upper: Some(p.mean + half),
            });
        }
    }
    rows
}

/// Panels for the prior and for each stage that added an informative
/// signal. Stages after a zero-precision step repeat the previous one and
/// are skipped.
pub fn stage_panels(run: &RunResult64, times: &[f64]) -> Vec<StagePanel> {
    let Some(curves) = &run.posterior_curves else {
        return Vec::new();
    };
    curves
        .iter()
        .enumerate()
        .filter(|(k, _)| *k == 0 || run.signal_values[k - 1].is_some())
        .map(|(k, curve)| StagePanel {
            title: if k == 0 {
                "prior".into()
            } else {
                format!("after signal {k} (t = {})", fmt_num(times[k - 1]))
            },
            path: run.realized_path.clone(),
            signals: times[..k]
                .iter()
                .zip(&run.signal_values)
                .filter_map(|(&t, s)| s.map(|v| (t, v)))
                .collect(),
            band: curve
                .iter()
                .map(|p| {
                    let half = BAND_Z * p.variance.sqrt();
                    (p.query_time, p.mean, p.mean - half, p.mean + half)
                })
                .collect(),
        })
        .collect()
}

fn simulation_artifacts(named: &NamedScenario) -> Result<Artifacts, CliError> {
    let run = run_scenario(&named.scenario)?;
    let times = named.scenario.grid.times();
    let mut csv = Vec::new();
    write_simulation(&mut csv, &simulation_rows(&run, times))?;
    Ok(Artifacts {
        name: named.name.clone(),
        csv,
        svg: learning_figure(&stage_panels(&run, times)),
    })
}

fn run_batch(
    scenarios: &[NamedScenario],
    opts: &OutputOptions,
    jobs: usize,
    out: &mut dyn Write,
    build: fn(&NamedScenario) -> Result<Artifacts, CliError>,
) -> Result<(), CliError> {
    let artifacts = pool(jobs)?.install(|| {
        scenarios
            .par_iter()
            .map(|s| {
                build(s).map_err(|e| match e {
                    CliError::Numerical(m) => CliError::Numerical(format!("{}: {m}", s.name)),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    emit(artifacts, opts, out)
}

pub fn cmd_precisions(
    scenarios: &[NamedScenario],
    opts: &OutputOptions,
    jobs: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    run_batch(scenarios, opts, jobs, out, precision_artifacts)
}

pub fn cmd_simulate(
    scenarios: &[NamedScenario],
    opts: &OutputOptions,
    jobs: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    run_batch(scenarios, opts, jobs, out, simulation_artifacts)
}

/// Runs the suites, printing one line per check. Fails if any check does.
pub fn cmd_verify(suites: &[Suite], seed: u64, jobs: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let checks: Vec<_> = pool(jobs)?.install(|| suites.par_iter().map(|s| s.run(seed)).collect());
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    let mut failed = 0;
    for c in checks.iter().flatten() {
        writeln!(out, "{}", c.line()).map_err(io)?;
        failed += (!c.passed()) as usize;
    }
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} check(s) out of tolerance")));
    }
    writeln!(out, "all checks passed").map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyParams {
    pub sigma: f64,
    pub dt: f64,
    pub c: f64,
    pub delta: f64,
    pub sigma0: f64,
}

/// One column of the steady-state summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyColumn {
    pub target_var: f64,
    /// Time at which prior variance first reaches the target; negative when
    /// purchases start immediately.
    pub waiting_threshold: f64,
    pub precision: f64,
    pub payoff: f64,
}

pub fn steady_columns(p: &SteadyParams) -> Result<(SteadyColumn, SteadyColumn), CliError> {
    if !(p.sigma0 >= 0.0 && p.sigma0.is_finite()) {
        return Err(CliError::Config(format!(
            "--sigma0: must be nonnegative, got {}",
            p.sigma0
        )));
    }
    let flag = |e: gp_acquire::Error| match e {
        gp_acquire::Error::InvalidParameter { name, reason } => CliError::Config(format!("--{name}: {reason}")),
        other => other.into(),
    };
    let cost = CostParams::new(p.c, p.delta).map_err(flag)?;
    let (precision, payoff) = steady_state_myopic(p.sigma, p.dt, p.c).map_err(flag)?;
    let s2 = p.sigma * p.sigma;
    let threshold = |v: f64| (v - p.sigma0 * p.sigma0) / s2;
    let root_c = p.c.sqrt();
    let myopic = SteadyColumn {
        target_var: root_c,
        waiting_threshold: threshold(root_c),
        precision,
        payoff,
    };
    let plan = planning_for_step(p.sigma, p.dt, &cost).map_err(flag)?;
    let forward = SteadyColumn {
        target_var: plan.v,
        waiting_threshold: threshold(plan.v),
        precision: plan.steady_precision,
        payoff: plan.steady_payoff,
    };
    Ok((myopic, forward))
}

pub fn cmd_steady(p: &SteadyParams, out: &mut dyn Write) -> Result<(), CliError> {
    let (m, f) = steady_columns(p)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(
        out,
        "steady state: sigma = {}, dt = {}, c = {}, delta = {}, sigma0 = {}",
        fmt_num(p.sigma),
        fmt_num(p.dt),
        fmt_num(p.c),
        fmt_num(p.delta),
        fmt_num(p.sigma0)
    )
    .map_err(io)?;
    writeln!(
        out,
        "{:<20}{:>20}{:>20}{:>20}",
        "quantity", "myopic", "forward-looking", "difference"
    )
    .map_err(io)?;
    let lines = [
        ("target variance", m.target_var, f.target_var),
        ("waiting threshold", m.waiting_threshold, f.waiting_threshold),
        ("steady precision", m.precision, f.precision),
        ("steady payoff", m.payoff, f.payoff),
    ];
    for (label, a, b) in lines {
        writeln!(
            out,
            "{label:<20}{:>20}{:>20}{:>20}",
            fmt_num(a),
            fmt_num(b),
            fmt_num(b - a)
        )
        .map_err(io)?;
    }
    Ok(())
}
