//! Per-step diagnostics and their CSV form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use wsav_core::grid::integrate;
use wsav_core::potential::energy_split;
use wsav_core::{SavState, StepParams, StepReport};

use crate::error::{HarnessError, Result};

pub const HEADER: [&str; 10] = [
    "t",
    "lambda",
    "r",
    "E",
    "E_mod",
    "E_norm",
    "mass",
    "mass_dev",
    "newton_iters",
    "dissipation",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    /// NaN on the initial row.
    pub lambda: f64,
    pub r: f64,
    pub energy: f64,
    pub energy_mod: f64,
    /// `E(t) / E(0)`
    pub energy_norm: f64,
    pub mass: f64,
    pub mass_dev: f64,
    pub newton_iters: u32,
    pub dissipation: f64,
}

/// Accumulates rows for one trajectory.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub rows: Vec<Row>,
    e0: f64,
    m0: f64,
    mass_scale: f64,
}

impl TimeSeries {
    /// Starts the series with the row for `state0`.
    pub fn start(state0: &SavState, sp: &StepParams) -> Result<Self> {
        let split = energy_split(&state0.phi, state0.r, 0.0, &sp.ops, &sp.pparams)?;
        let m0 = integrate(&state0.phi);
        let abs_mass = integrate(&state0.phi.map(f64::abs));
        // a zero-mean field has no meaningful relative mass; fall back to ∫|φ⁰|
        let mass_scale = if m0.abs() >= 1e-8 * abs_mass { m0.abs() } else { abs_mass };
        let mut series = Self { rows: Vec::new(), e0: split.total, m0, mass_scale };
        let first = Row {
            t: state0.t,
            lambda: f64::NAN,
            r: state0.r,
            energy: split.total,
            energy_mod: split.total - split.nonlinear + state0.r * state0.r - sp.pparams.shift(),
            energy_norm: 1.0,
            mass: m0,
            mass_dev: 0.0,
            newton_iters: 0,
            dissipation: 0.0,
        };
        series.rows.push(first);
        Ok(series)
    }

    pub fn push(&mut self, state: &SavState, report: &StepReport) {
        self.rows.push(Row {
            t: state.t,
            lambda: report.lambda_used,
            r: report.r_new,
            energy: report.energy.total,
            energy_mod: report.energy.modified,
            energy_norm: report.energy.total / self.e0,
            mass: report.mass,
            mass_dev: self.mass_deviation(report.mass),
            newton_iters: report.newton_iters,
            dissipation: report.mu_dissipation,
        });
    }

    pub fn initial_energy(&self) -> f64 {
        self.e0
    }

    pub fn mass_deviation(&self, mass: f64) -> f64 {
        if self.mass_scale == 0.0 {
            (mass - self.m0).abs()
        } else {
            (mass - self.m0).abs() / self.mass_scale
        }
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f(r.t),
            fmt_f(r.lambda),
            fmt_f(r.r),
            fmt_f(r.energy),
            fmt_f(r.energy_mod),
            fmt_f(r.energy_norm),
            fmt_f(r.mass),
            fmt_f(r.mass_dev),
            r.newton_iters.to_string(),
            fmt_f(r.dissipation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> std::result::Result<Vec<Row>, String> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |k: usize| -> std::result::Result<f64, String> {
            rec[k].parse().map_err(|_| format!("row {}: bad {} {:?}", i + 1, HEADER[k], &rec[k]))
        };
        rows.push(Row {
            t: f(0)?,
            lambda: f(1)?,
            r: f(2)?,
            energy: f(3)?,
            energy_mod: f(4)?,
            energy_norm: f(5)?,
            mass: f(6)?,
            mass_dev: f(7)?,
            newton_iters: rec[8]
                .parse()
                .map_err(|_| format!("row {}: bad newton_iters {:?}", i + 1, &rec[8]))?,
            dissipation: f(9)?,
        });
    }
    Ok(rows)
}

pub fn write_timeseries(rows: &[Row], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(rows, file).map_err(|e| HarnessError::format(path, e.to_string()))
}

pub fn read_timeseries(path: &Path) -> Result<Vec<Row>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_csv(file).map_err(|m| HarnessError::format(path, m))
}
