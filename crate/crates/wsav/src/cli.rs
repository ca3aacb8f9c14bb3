//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_pairs, ExperimentConfig, Preset};
use crate::error::{HarnessError, Result};
use crate::record::write_csv;
use crate::study::{convergence_csv, convergence_study, label, lambda_csv, lambda_energy_study, run_experiment};

/// Exit code for a run that stopped on a failing step.
pub const EXIT_STEP_FAILURE: i32 = 1;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wsav", version, about = "Weighted SAV solvers for phase-field gradient flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory and write its time series.
    Run(Common),
    /// Temporal self-convergence over a halving list of step sizes.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Number of error rows; runs one more step size than this.
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Modified-energy gaps between fixed weights 1, 1/2, 1/4, ...
    LambdaStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Print the preset names and what they set up.
    ListPresets,
}

#[derive(Debug, Args)]
struct Common {
    /// sine, cross, curve2, curve3, curve4 or torus.
    #[arg(long)]
    preset: Option<String>,
    /// `key = value` file using the long flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// be or cn.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Shift C under the auxiliary square root.
    #[arg(long = "shift", visible_alias = "C", allow_hyphen_values = true)]
    shift: Option<String>,
    /// Step size; for `converge` the coarsest one.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<String>,
    /// min, 0, 1 or a fixed weight in [0, 1].
    #[arg(long)]
    lambda: Option<String>,
    /// Modes per axis, e.g. 64, 128x128 or 32x32x32.
    #[arg(long)]
    grid: Option<String>,
    /// lo,hi on every axis.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    snapshot_every: Option<String>,
    #[arg(long)]
    tol_lambda: Option<String>,
    /// Samples per parametric curve.
    #[arg(long)]
    samples: Option<String>,
    /// Use the large grids (128² sine, 256² curves, 128³ torus).
    #[arg(long)]
    full_scale: bool,
    /// Accepted for compatibility; runs are always deterministic.
    #[arg(long, hide = true)]
    seed_free: bool,
}

impl Common {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, x: &Option<String>| {
            if let Some(s) = x {
                v.push((k, s.clone()));
            }
        };
        put("scheme", &self.scheme);
        put("grid", &self.grid);
        put("domain", &self.domain);
        put("nu", &self.nu);
        put("eps", &self.eps);
        put("gamma", &self.gamma);
        put("delta", &self.delta);
        put("shift", &self.shift);
        put("tau", &self.tau);
        put("steps", &self.steps);
        put("t-end", &self.t_end);
        put("lambda", &self.lambda);
        put("snapshot-every", &self.snapshot_every);
        put("tol-lambda", &self.tol_lambda);
        put("samples", &self.samples);
        v
    }

    /// Preset, then config file, then flags.
    fn build(&self) -> Result<ExperimentConfig> {
        let pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                parse_pairs(&text).map_err(|e| HarnessError::format(path, e.to_string()))?
            }
            None => Vec::new(),
        };
        let preset: Preset = match (&self.preset, pairs.iter().find(|p| p.1 == "preset")) {
            (Some(p), _) => p.parse()?,
            (None, Some((_, _, p))) => p.parse()?,
            (None, None) => Preset::Sine,
        };
        let mut cfg = ExperimentConfig::preset(preset);
        if self.full_scale {
            cfg.set_full_scale();
        }
        for (line, k, v) in &pairs {
            if k == "preset" {
                continue;
            }
            cfg.set(k, v).map_err(|e| {
                let path = self.config.as_deref().unwrap_or_else(|| "config".as_ref());
                HarnessError::format(path, format!("line {line}: {e}"))
            })?;
        }
        // an explicit time horizon replaces the preset's, whichever form it takes
        if self.steps.is_some() && self.t_end.is_none() {
            cfg.t_end = None;
        }
        if self.t_end.is_some() && self.steps.is_none() {
            cfg.steps = None;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, &v).map_err(|e| HarnessError::Config(format!("--{k}: {e}")))?;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn t_end_of(cfg: &ExperimentConfig) -> Result<f64> {
    match (cfg.t_end, cfg.steps) {
        (Some(t), _) => Ok(t),
        (None, Some(n)) => Ok(n as f64 * cfg.tau),
        (None, None) => Err(HarnessError::Config("either steps or t-end is required".into())),
    }
}

fn halving(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * 0.5f64.powi(i as i32)).collect()
}

fn write_output(cfg: &ExperimentConfig, file: &str, text: &str) -> Result<()> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            let path = dir.join(file);
            fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
        }
        None => {
            let _ = io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::ListPresets => {
            for p in Preset::ALL {
                println!("{:<8} {}", p.name(), p.description());
            }
            Ok(0)
        }
        Command::Run(common) => {
            let cfg = common.build()?;
            let traj = run_experiment(&cfg, |_, _| {})?;
            if cfg.out.is_none() {
                let _ = write_csv(&traj.series.rows, io::stdout().lock());
            }
            match traj.failure {
                Some(f) => {
                    eprintln!("{}", f.record());
                    Ok(EXIT_STEP_FAILURE)
                }
                None => Ok(0),
            }
        }
        Command::Converge { common, levels } => {
            let mut cfg = common.build()?;
            if common.tau.is_none() {
                cfg.tau = 0.25e-3;
            }
            let t_end = t_end_of(&cfg)?;
            let taus = halving(cfg.tau, levels + 1);
            eprintln!("converge {} T={t_end} levels={levels}", label(&cfg));
            let rows = convergence_study(&cfg, &taus, t_end)?;
            write_output(&cfg, "convergence.csv", &convergence_csv(&rows))?;
            Ok(if rows.iter().any(|r| r.failure.is_some()) { EXIT_STEP_FAILURE } else { 0 })
        }
        Command::LambdaStudy { common, levels } => {
            let cfg = common.build()?;
            let t_end = t_end_of(&cfg)?;
            let lambdas = halving(1.0, levels + 1);
            eprintln!("lambda-study {} T={t_end} levels={levels}", label(&cfg));
            let rows = lambda_energy_study(&cfg, &lambdas, t_end)?;
            write_output(&cfg, "lambda_study.csv", &lambda_csv(&rows))?;
            Ok(if rows.iter().any(|r| r.failure.is_some()) { EXIT_STEP_FAILURE } else { 0 })
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
