//! Scenario configuration files (TOML).
//!
//! A file holds either one scenario at the top level or a batch under
//! `[[scenario]]`. Unknown keys are rejected everywhere.
//!
//! ```toml
//! seed = 2024
//!
//! [process]
//! kind = "brownian"      # brownian | ou | linear
//! mu = 0.0               # brownian and linear only
//! sigma = 1.0
//! sigma0 = 1.0
//! # alpha = 0.5          # ou only; defaults to sigma^2 / (2 sigma0^2)
//!
//! [grid]
//! times = [0.0, 1.0, 2.0]
//! # or: start = 0.0, step = 1.0, count = 50
//!
//! [cost]
//! c = 0.25
//! delta = 0.0
//!
//! [strategy]
//! mode = "fixed"         # myopic | forward-looking | fixed
//! precisions = [10.0, 10.0, 10.0]
//!
//! [output]
//! name = "figure1"
//! query_points = 201
//! query_end = 3.0
//! ```

use std::path::Path;

use gp_acquire::simulation::{evenly_spaced, DEFAULT_QUERY_POINTS};
use gp_acquire::{
    BrownianParams, CostParams, LinearParams, OUParams, ProcessSpec, ProcessSpec64, Scenario64, ScenarioStrategy,
    TimeGrid,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub process: ProcessConfig,
    pub grid: GridConfig,
    pub cost: CostConfig,
    #[serde(default)]
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProcessConfig {
    Brownian {
        #[serde(default)]
        mu: f64,
        sigma: f64,
        sigma0: f64,
    },
    Ou {
        sigma: f64,
        sigma0: f64,
        alpha: Option<f64>,
    },
    Linear {
        #[serde(default)]
        mu: f64,
        sigma: f64,
        sigma0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub times: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub step: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub c: f64,
    #[serde(default)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Myopic,
    ForwardLooking,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    #[serde(default)]
    pub mode: Mode,
    pub precisions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub name: Option<String>,
    pub query_points: Option<usize>,
    pub query_end: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchConfig {
    scenario: Vec<ScenarioConfig>,
}

/// A validated scenario together with the name its outputs are written
/// under.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedScenario {
    pub name: String,
    pub scenario: Scenario64,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

/// Maps a library parameter error onto the config field it came from.
fn param_error(section: &str, err: gp_acquire::Error) -> CliError {
    match err {
        gp_acquire::Error::InvalidParameter { name, reason } => invalid(&format!("{section}.{name}"), reason),
        other => invalid(section, other),
    }
}

impl GridConfig {
    fn build(&self) -> Result<TimeGrid<f64>, CliError> {
        let grid = match (&self.times, self.start, self.step, self.count) {
            (Some(times), None, None, None) => TimeGrid::new(times.clone()),
            (None, start, Some(step), Some(count)) => {
                if count == 0 {
                    return Err(invalid("grid.count", "must be at least 1"));
                }
                if !(step > 0.0) {
                    return Err(invalid("grid.step", format!("must be positive, got {step}")));
                }
                TimeGrid::uniform(start.unwrap_or(0.0), step, count)
            }
            (Some(_), ..) => {
                return Err(invalid(
                    "grid",
                    "give either `times` or `start`/`step`/`count`, not both",
                ))
            }
            (None, _, None, _) => return Err(invalid("grid.step", "missing (or give `times`)")),
            (None, _, _, None) => return Err(invalid("grid.count", "missing (or give `times`)")),
        };
        let grid = grid.map_err(|e| invalid("grid.times", e))?;
        if grid.is_empty() {
            return Err(invalid("grid.times", "must not be empty"));
        }
        Ok(grid)
    }
}

impl ProcessConfig {
    fn build(&self) -> Result<ProcessSpec64, CliError> {
        let err = |e| param_error("process", e);
        Ok(match *self {
            ProcessConfig::Brownian { mu, sigma, sigma0 } => {
                ProcessSpec::Brownian(BrownianParams::new(mu, sigma, sigma0).map_err(err)?)
            }
            ProcessConfig::Ou {
                sigma,
                sigma0,
                alpha: None,
            } => ProcessSpec::OU(OUParams::new(sigma, sigma0).map_err(err)?),
            ProcessConfig::Ou {
                sigma,
                sigma0,
                alpha: Some(alpha),
            } => ProcessSpec::OU(OUParams::with_alpha(sigma, sigma0, alpha).map_err(err)?),
            ProcessConfig::Linear { mu, sigma, sigma0 } => {
                ProcessSpec::Linear(LinearParams::new(mu, sigma, sigma0).map_err(err)?)
            }
        })
    }
}

impl ScenarioConfig {
    /// Checks every field and builds the library scenario.
    pub fn build(&self, name: String) -> Result<NamedScenario, CliError> {
        let process = self.process.build()?;
        let grid = self.grid.build()?;
        let cost = CostParams::new(self.cost.c, self.cost.delta).map_err(|e| param_error("cost", e))?;
        let brownian = matches!(process, ProcessSpec::Brownian(_));
        if self.cost.delta > 0.0 && !brownian {
            return Err(invalid(
                "cost.delta",
                "discounting is only supported for a brownian process",
            ));
        }
        if self.cost.delta > 0.0 {
            grid.uniform_step()
                .map_err(|e| invalid("grid.times", format!("discounting needs evenly spaced times; {e}")))?;
        }

        let strategy = match (self.strategy.mode, &self.strategy.precisions) {
            (Mode::Fixed, Some(ps)) => {
                if ps.len() != grid.len() {
                    return Err(invalid(
                        "strategy.precisions",
                        format!("{} values for {} grid points", ps.len(), grid.len()),
                    ));
                }
                if let Some(p) = ps.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
                    return Err(invalid(
                        "strategy.precisions",
                        format!("must be finite and nonnegative, got {p}"),
                    ));
                }
                ScenarioStrategy::FixedPrecisions(ps.clone())
            }
            (Mode::Fixed, None) => return Err(invalid("strategy.precisions", "required when mode = \"fixed\"")),
            (_, Some(_)) => return Err(invalid("strategy.precisions", "only allowed when mode = \"fixed\"")),
            (Mode::Myopic, None) => ScenarioStrategy::Myopic,
            (Mode::ForwardLooking, None) => {
                if !brownian {
                    return Err(invalid("strategy.mode", "forward-looking needs a brownian process"));
                }
                ScenarioStrategy::ForwardLooking
            }
        };

        let last = *grid.times().last().expect("nonempty grid");
        let end = self.output.query_end.unwrap_or(last + 1.0);
        if !(end > 0.0 && end.is_finite()) {
            return Err(invalid("output.query_end", format!("must be positive, got {end}")));
        }
        let points = self.output.query_points.unwrap_or(DEFAULT_QUERY_POINTS);
        if points < 2 {
            return Err(invalid("output.query_points", "must be at least 2"));
        }

        Ok(NamedScenario {
            name: self.output.name.clone().unwrap_or(name),
            scenario: Scenario64 {
                process,
                grid,
                cost,
                strategy,
                seed: self.seed,
                query_times: Some(evenly_spaced(0.0, end, points)),
            },
        })
    }
}

/// Parses a config file's text. `stem` names outputs of scenarios that do
/// not set `output.name`; batch entries get `stem-1`, `stem-2`, ...
pub fn parse_config(text: &str, stem: &str) -> Result<Vec<NamedScenario>, CliError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let configs = if table.contains_key("scenario") {
        let batch: BatchConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if batch.scenario.is_empty() {
            return Err(invalid("scenario", "batch is empty"));
        }
        batch
            .scenario
            .into_iter()
            .enumerate()
            .map(|(k, c)| (format!("{stem}-{}", k + 1), c))
            .collect::<Vec<_>>()
    } else {
        let single: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        vec![(stem.to_string(), single)]
    };
    let scenarios = configs
        .into_iter()
        .enumerate()
        .map(|(k, (name, c))| {
            c.build(name).map_err(|e| match e {
                CliError::Config(msg) if table.contains_key("scenario") => {
                    CliError::Config(format!("scenario[{k}].{msg}"))
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(invalid(
            "output.name",
            format!("`{}` used by more than one scenario", w[0]),
        ));
    }
    Ok(scenarios)
}

pub fn load_config(path: &Path) -> Result<Vec<NamedScenario>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_config(&text, stem).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIGURE1: &str = r#"
        seed = 7
        [process]
        kind = "brownian"
        sigma = 1.0
        sigma0 = 1.0
        [grid]
        times = [0.0, 1.0, 2.0]
        [cost]
        c = 0.25
        [strategy]
        mode = "fixed"
        precisions = [10.0, 10.0, 10.0]
    "#;

    fn config_err(text: &str) -> String {
        match parse_config(text, "x") {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_single_scenario() {
        let s = parse_config(FIGURE1, "figure1").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].name, "figure1");
        assert_eq!(s[0].scenario.seed, 7);
        assert_eq!(s[0].scenario.grid.times(), &[0.0, 1.0, 2.0]);
        assert_eq!(s[0].scenario.query_times.as_ref().unwrap().len(), DEFAULT_QUERY_POINTS);
    }

    #[test]
    fn parses_uniform_grid_and_ou_default_alpha() {
        let s = parse_config(
            r#"
            [process]
            kind = "ou"
            sigma = 1.0
            sigma0 = 1.0
            [grid]
            step = 1.0
            count = 5
            [cost]
            c = 0.25
            "#,
            "ou",
        )
        .unwrap();
        match &s[0].scenario.process {
            ProcessSpec::OU(p) => assert!(p.is_stationary()),
            other => panic!("{other:?}"),
        }
        assert_eq!(s[0].scenario.grid.len(), 5);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(config_err(&FIGURE1.replace("seed = 7", "seed = 7\nsede = 1")).contains("sede"));
        assert!(config_err(&FIGURE1.replace("sigma0 = 1.0", "sigma0 = 1.0\nalpha = 2.0")).contains("alpha"));
        assert!(config_err(&FIGURE1.replace("kind = \"brownian\"", "kind = \"levy\"")).contains("levy"));
    }

    #[test]
    fn names_offending_fields() {
        assert!(config_err(&FIGURE1.replace("c = 0.25", "c = -1.0")).starts_with("cost.c"));
        assert!(config_err(&FIGURE1.replace("sigma = 1.0", "sigma = -1.0")).starts_with("process.sigma"));
        assert!(config_err(&FIGURE1.replace("[10.0, 10.0, 10.0]", "[10.0]")).starts_with("strategy.precisions"));
        assert!(config_err(&FIGURE1.replace("[0.0, 1.0, 2.0]", "[0.0, 2.0, 1.0]")).starts_with("grid.times"));
        let linear_fwd = FIGURE1
            .replace("brownian", "linear")
            .replace("mode = \"fixed\"", "mode = \"forward-looking\"")
            .replace("precisions = [10.0, 10.0, 10.0]", "");
        assert!(config_err(&linear_fwd).starts_with("strategy.mode"));
    }

    #[test]
    fn batch_names_and_errors() {
        let entry = |c: f64| {
            format!(
                "[[scenario]]\n[scenario.process]\nkind = \"brownian\"\nsigma = 1.0\nsigma0 = 1.0\n\
                 [scenario.grid]\nstep = 1.0\ncount = 10\n[scenario.cost]\nc = {c:?}\ndelta = 0.5\n\
                 [scenario.strategy]\nmode = \"forward-looking\"\n"
            )
        };
        let s = parse_config(&format!("{}{}", entry(0.25), entry(0.5)), "sweep").unwrap();
        assert_eq!(
            s.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
            ["sweep-1", "sweep-2"]
        );
        let bad = format!("{}{}", entry(0.25), entry(0.0));
        assert!(
            config_err(&bad).starts_with("scenario[1].cost.c"),
            "{}",
            config_err(&bad)
        );
    }
}
