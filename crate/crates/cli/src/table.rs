//! CSV output and the matching readers.
//!
//! Precisions (`precisions` command), one row per step:
//!
//! | column | meaning |
//! |---|---|
//! | `n` | step, starting at 1 |
//! | `t_n` | signal time |
//! | `R_n` | residual variance before the signal |
//! | `p_star` | myopic precision at `R_n` |
//! | `p_dagger` | forward-looking precision at `R_n`; only when `delta > 0` |
//! | `posterior_var` | posterior variance after the signal |
//! | `payoff` | `posterior_var + c * p` for the precision actually bought |
//!
//! `R_n`, `posterior_var` and `payoff` follow the configured strategy.
//!
//! Simulation (`simulate` command), long format:
//!
//! | column | meaning |
//! |---|---|
//! | `record` | `path`, `signal` or `posterior` |
//! | `stage` | empty for `path`; signal step `n` for `signal`; number of signals seen for `posterior` (0 = prior) |
//! | `t` | time |
//! | `value` | state, signal, or posterior mean |
//! | `variance` | signal noise variance `1/p`, or posterior variance |
//! | `lower`, `upper` | posterior mean -/+ 1.96 standard deviations |
//!
//! Numbers are written with 12 significant digits.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::CliError;

/// Formats `x` with 12 significant digits, `%g` style: plain notation for
/// exponents in `[-5, 12)`, scientific otherwise, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct PrecisionRow {
    pub n: usize,
    pub t_n: f64,
    #[serde(rename = "R_n")]
    pub r_n: f64,
    pub p_star: f64,
    #[serde(default)]
    pub p_dagger: Option<f64>,
    pub posterior_var: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Path,
    Signal,
    Posterior,
}

impl RecordKind {
    fn as_str(self) -> &'static str {
        match self {
            RecordKind::Path => "path",
            RecordKind::Signal => "signal",
            RecordKind::Posterior => "posterior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SimulationRow {
    pub record: RecordKind,
    pub stage: Option<usize>,
    pub t: f64,
    pub value: f64,
    pub variance: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_precisions<W: Write>(out: W, rows: &[PrecisionRow], with_dagger: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n", "t_n", "R_n", "p_star"];
    if with_dagger {
        header.push("p_dagger");
    }
    header.extend(["posterior_var", "payoff"]);
    w.write_record(&header).map_err(io_err)?;
    for r in rows {
        let mut rec = vec![r.n.to_string(), fmt_num(r.t_n), fmt_num(r.r_n), fmt_num(r.p_star)];
        if with_dagger {
            rec.push(opt(r.p_dagger));
        }
        rec.extend([fmt_num(r.posterior_var), fmt_num(r.payoff)]);
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_simulation<W: Write>(out: W, rows: &[SimulationRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["record", "stage", "t", "value", "variance", "lower", "upper"])
        .map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.record.as_str().to_string(),
            r.stage.map(|s| s.to_string()).unwrap_or_default(),
            fmt_num(r.t),
            fmt_num(r.value),
            opt(r.variance),
            opt(r.lower),
            opt(r.upper),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn read_rows<R: Read, T: serde::de::DeserializeOwned>(input: R) -> Result<Vec<T>, CliError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Config(format!("malformed CSV: {e}")))
}

pub fn read_precisions<R: Read>(input: R) -> Result<Vec<PrecisionRow>, CliError> {
    read_rows(input)
}

pub fn read_simulation<R: Read>(input: R) -> Result<Vec<SimulationRow>, CliError> {
    read_rows(input)
}
