//! Trajectory runs and the convergence / weight studies built on them.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::thread;

use wsav_core::error::EquationState;
use wsav_core::grid::{norm_l2, norm_linf};
use wsav_core::stepper::step;
use wsav_core::{Error, LambdaPolicy, RealField, SavState, StepReport};

use crate::config::{lambda_name, scheme_name, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::record::{write_timeseries, TimeSeries};
use crate::snapshot::write_snapshot;

/// Why a trajectory stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    pub step: u64,
    pub t: f64,
    pub error: Error,
}

impl StepFailure {
    /// One `key=value` line describing the failure.
    pub fn record(&self) -> String {
        let mut s = format!("status=failed step={} t={:.16e}", self.step, self.t);
        let state = |s: &mut String, st: &EquationState| {
            let _ = write!(
                s,
                " scheme={} r_prev={:.16e} sqrt_ec={:.16e} a={:.16e} b={:.16e} en_prev={:.16e}",
                scheme_name(st.scheme),
                st.r_prev,
                st.sqrt_ec,
                st.a,
                st.b,
                st.en_prev
            );
        };
        match &self.error {
            Error::Unsolvable { lambda, state: st } => {
                let _ = write!(s, " kind=unsolvable lambda={lambda}");
                state(&mut s, st);
            }
            Error::NoAdmissibleWeight { state: st } => {
                s += " kind=no_admissible_weight";
                state(&mut s, st);
            }
            other => {
                let _ = write!(s, " kind=error message={:?}", other.to_string());
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub series: TimeSeries,
    pub final_state: SavState,
    pub failure: Option<StepFailure>,
}

/// Runs `cfg`, calling `observer` after every accepted step.
///
/// A failing step ends the run but is not an error: the partial series and
/// the failure are returned. When `cfg.out` is set the configuration, the
/// series, snapshots and any failure record are written there.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    mut observer: impl FnMut(&SavState, &StepReport),
) -> Result<Trajectory> {
    let n_steps = cfg.n_steps()?;
    let sp = cfg.step_params()?;
    let mut state = cfg.initial_state()?;
    let mut series = TimeSeries::start(&state, &sp)?;
    let out = cfg.out.as_deref();
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let path = dir.join("config.txt");
        fs::write(&path, cfg.to_text()).map_err(|e| HarnessError::io(&path, e))?;
        if cfg.snapshot_every > 0 {
            write_snapshot(&state.phi, &snapshot_path(dir, 0))?;
        }
    }

    let mut failure = None;
    for _ in 0..n_steps {
        match step(&state, &sp, cfg.scheme) {
            Ok((next, report)) => {
                series.push(&next, &report);
                observer(&next, &report);
                state = next;
                if let Some(dir) = out {
                    if cfg.snapshot_every > 0 && state.step % cfg.snapshot_every == 0 {
                        write_snapshot(&state.phi, &snapshot_path(dir, state.step))?;
                    }
                }
            }
            Err(error) => {
                failure = Some(StepFailure { step: state.step + 1, t: state.t + sp.tau, error });
                break;
            }
        }
    }

    if let Some(dir) = out {
        write_timeseries(&series.rows, &dir.join("timeseries.csv"))?;
        if let Some(f) = &failure {
            let path = dir.join("failure.txt");
            fs::write(&path, f.record() + "\n").map_err(|e| HarnessError::io(&path, e))?;
        }
    }
    Ok(Trajectory { series, final_state: state, failure })
}

pub fn snapshot_path(dir: &Path, step: u64) -> std::path::PathBuf {
    dir.join(format!("phi_{step:08}.bin"))
}

fn run_many(configs: Vec<ExperimentConfig>) -> Vec<Result<Trajectory>> {
    thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| s.spawn(move || run_experiment(c, |_, _| {})))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run panicked")).collect()
    })
}

/// `log₂(prev / cur)`; `None` when either value is zero or missing.
pub fn rate(prev: Option<f64>, cur: Option<f64>) -> Option<f64> {
    match (prev, cur) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub e2: Option<f64>,
    pub rate2: Option<f64>,
    pub einf: Option<f64>,
    pub rate_inf: Option<f64>,
    pub failure: Option<String>,
}

fn check_halving(values: &[f64], what: &str) -> Result<()> {
    if values.len() < 2 {
        return Err(HarnessError::Config(format!("{what} list needs at least two entries")));
    }
    for w in values.windows(2) {
        if (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0] {
            return Err(HarnessError::Config(format!("{what} list must halve: {} then {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Self-convergence in time: `e(τ) = ‖φ_τ(T) - φ_{τ/2}(T)‖` in `l²` and `l∞`.
///
/// `taus` must halve at every entry; one row per consecutive pair.
pub fn convergence_study(
    base: &ExperimentConfig,
    taus: &[f64],
    t_end: f64,
) -> Result<Vec<ConvergenceRow>> {
    check_halving(taus, "tau")?;
    let configs: Vec<ExperimentConfig> = taus
        .iter()
        .map(|&tau| ExperimentConfig { tau, steps: None, t_end: Some(t_end), out: None, ..base.clone() })
        .collect();
    for c in &configs {
        c.n_steps()?;
    }
    let finals: Vec<std::result::Result<RealField, String>> = run_many(configs)
        .into_iter()
        .map(|r| match r {
            Ok(Trajectory { failure: None, final_state, .. }) => Ok(final_state.phi),
            Ok(Trajectory { failure: Some(f), .. }) => Err(f.record()),
            Err(e) => Err(e.to_string()),
        })
        .collect();

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for i in 0..taus.len() - 1 {
        let (e2, einf, failure) = match (&finals[i], &finals[i + 1]) {
            (Ok(a), Ok(b)) => {
                let d = a.add_scaled(-1.0, b)?;
                (Some(norm_l2(&d)), Some(norm_linf(&d)), None)
            }
            (Err(m), _) | (_, Err(m)) => (None, None, Some(m.clone())),
        };
        let prev = rows.last();
        rows.push(ConvergenceRow {
            tau: taus[i],
            rate2: rate(prev.and_then(|p| p.e2), e2),
            rate_inf: rate(prev.and_then(|p| p.einf), einf),
            e2,
            einf,
            failure,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub lambda: f64,
    pub error: Option<f64>,
    pub rate: Option<f64>,
    pub failure: Option<String>,
}

/// `√(∫₀ᵀ (a - b)²)` by the trapezoidal rule over shared sample times.
pub fn trapezoid_l2(t: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    let integral: f64 = t
        .windows(2)
        .zip(sq.windows(2))
        .map(|(tw, s)| 0.5 * (tw[1] - tw[0]) * (s[0] + s[1]))
        .sum();
    integral.sqrt()
}

/// Modified-energy gaps `‖Ē_λ - Ē_{λ/2}‖` for a halving list of fixed
/// weights, with rates `log₂(prev / cur)`.
pub fn lambda_energy_study(
    base: &ExperimentConfig,
    lambdas: &[f64],
    t_end: f64,
) -> Result<Vec<LambdaRow>> {
    check_halving(lambdas, "lambda")?;
    let configs: Vec<ExperimentConfig> = lambdas
        .iter()
        .map(|&l| ExperimentConfig {
            lambda: LambdaPolicy::Fixed(l),
            steps: None,
            t_end: Some(t_end),
            out: None,
            ..base.clone()
        })
        .collect();
    for c in &configs {
        c.n_steps()?;
    }
    let runs: Vec<std::result::Result<Trajectory, String>> = run_many(configs)
        .into_iter()
        .map(|r| match r {
            Ok(t) if t.failure.is_none() => Ok(t),
            Ok(t) => Err(t.failure.unwrap().record()),
            Err(e) => Err(e.to_string()),
        })
        .collect();

    let mut rows: Vec<LambdaRow> = Vec::new();
    for i in 0..lambdas.len() - 1 {
        let (error, failure) = match (&runs[i], &runs[i + 1]) {
            (Ok(a), Ok(b)) => {
                let t: Vec<f64> = a.series.rows.iter().map(|r| r.t).collect();
                let ea: Vec<f64> = a.series.rows.iter().map(|r| r.energy_mod).collect();
                let eb: Vec<f64> = b.series.rows.iter().map(|r| r.energy_mod).collect();
                (Some(trapezoid_l2(&t, &ea, &eb)), None)
            }
            (Err(m), _) | (_, Err(m)) => (None, Some(m.clone())),
        };
        let prev = rows.last().and_then(|p| p.error);
        rows.push(LambdaRow { lambda: lambdas[i], rate: rate(prev, error), error, failure });
    }
    Ok(rows)
}

/// Reference step size for error studies: `1e-5` at desk scale, `1e-6`
/// with the original grid sizes.
pub fn reference_tau(cfg: &ExperimentConfig) -> f64 {
    if cfg.full_scale {
        1e-6
    } else {
        1e-5
    }
}

/// Relative deviation `|E - E_ref| / |E_ref|` of `run` from a `λ = 0`
/// reference at the run's sample times.
pub fn reference_energy_deviation(cfg: &ExperimentConfig, run: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let tau_ref = reference_tau(cfg);
    let stride = (cfg.tau / tau_ref).round() as usize;
    if stride == 0 || ((stride as f64) * tau_ref - cfg.tau).abs() > 1e-9 * cfg.tau {
        return Err(HarnessError::Config(format!(
            "tau {} is not a multiple of the reference step {tau_ref}",
            cfg.tau
        )));
    }
    let ref_cfg = ExperimentConfig {
        tau: tau_ref,
        steps: cfg.n_steps().ok().map(|n| n * stride as u64),
        t_end: None,
        lambda: LambdaPolicy::LagrangeStrict,
        out: None,
        ..cfg.clone()
    };
    let reference = run_experiment(&ref_cfg, |_, _| {})?;
    if let Some(f) = reference.failure {
        return Err(HarnessError::Config(format!("reference run failed: {}", f.record())));
    }
    Ok(run
        .series
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, row)| {
            let r = reference.series.rows.get(i * stride)?;
            Some((row.t, (row.energy - r.energy).abs() / r.energy.abs()))
        })
        .collect())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("tau,e2,rate2,einf,rate_inf,failure\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{},{},{},{},{}",
            r.tau,
            opt(r.e2),
            opt(r.rate2),
            opt(r.einf),
            opt(r.rate_inf),
            r.failure.as_deref().map(|m| format!("{m:?}")).unwrap_or_default()
        );
    }
    s
}

pub fn lambda_csv(rows: &[LambdaRow]) -> String {
    let mut s = String::from("lambda,error,rate,failure\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{},{},{}",
            r.lambda,
            opt(r.error),
            opt(r.rate),
            r.failure.as_deref().map(|m| format!("{m:?}")).unwrap_or_default()
        );
    }
    s
}

/// Human-readable label of a run, e.g. `sine/be/lambda=min`.
pub fn label(cfg: &ExperimentConfig) -> String {
    format!("{}/{}/lambda={}", cfg.preset, scheme_name(cfg.scheme), lambda_name(cfg.lambda))
}
