//! Experiment presets and `key = value` configuration.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use wsav_core::initial::{initial_field, Curve, ShapeKind, SignedDistanceSpec, DEFAULT_SAMPLES};
use wsav_core::stepper::{init_state, DEFAULT_TOL_LAMBDA};
use wsav_core::{Grid, LambdaPolicy, PotentialParams, SavState, Scheme, StepParams};

use crate::error::{HarnessError, Result};
use crate::fft;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Sine,
    Cross,
    Curve2,
    Curve3,
    Curve4,
    Torus,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Sine,
        Preset::Cross,
        Preset::Curve2,
        Preset::Curve3,
        Preset::Curve4,
        Preset::Torus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sine => "sine",
            Preset::Cross => "cross",
            Preset::Curve2 => "curve2",
            Preset::Curve3 => "curve3",
            Preset::Curve4 => "curve4",
            Preset::Torus => "torus",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Sine => "0.05 sin x cos y on [0,2pi)^2, Cahn-Hilliard, eps 0.1, gamma 4",
            Preset::Cross => "cross-shaped region (curve I) on [-2,2)^2, eps 0.01, gamma 0",
            Preset::Curve2 => "curve II on [-2,2)^2, eps 0.01, gamma 2",
            Preset::Curve3 => "astroid (curve III) on [-2,2)^2, eps 0.01, gamma 1",
            Preset::Curve4 => "curve IV on [-2,2)^2, fractional mobility nu 0.5, eps 0.01",
            Preset::Torus => "torus R=0.6 r=0.3 on [-1,1)^3, eps 0.02, gamma 4",
        }
    }

    pub fn shape(self) -> ShapeKind {
        match self {
            Preset::Sine => ShapeKind::Sinusoidal { amplitude: 0.05 },
            Preset::Cross => ShapeKind::Cross,
            Preset::Curve2 => ShapeKind::Parametric(Curve::II),
            Preset::Curve3 => ShapeKind::Parametric(Curve::III),
            Preset::Curve4 => ShapeKind::Parametric(Curve::IV),
            Preset::Torus => ShapeKind::Torus { major: 0.6, minor: 0.3 },
        }
    }
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown preset {s:?}")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme> {
    match s {
        "be" => Ok(Scheme::BackwardEuler),
        "cn" => Ok(Scheme::CrankNicolson),
        _ => Err(HarnessError::Config(format!("unknown scheme {s:?} (expected be or cn)"))),
    }
}

pub fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::BackwardEuler => "be",
        Scheme::CrankNicolson => "cn",
    }
}

/// `min`, `0`, `1` or a fixed weight in `[0, 1]`.
pub fn parse_lambda(s: &str) -> Result<LambdaPolicy> {
    match s {
        "min" => Ok(LambdaPolicy::AdaptiveMin),
        "0" => Ok(LambdaPolicy::LagrangeStrict),
        "1" => Ok(LambdaPolicy::NonlinearEnergy),
        _ => {
            let v: f64 = parse_num("lambda", s)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(HarnessError::Config(format!("lambda must lie in [0, 1], got {v}")));
            }
            Ok(LambdaPolicy::Fixed(v))
        }
    }
}

pub fn lambda_name(p: LambdaPolicy) -> String {
    match p {
        LambdaPolicy::AdaptiveMin => "min".into(),
        LambdaPolicy::LagrangeStrict => "0".into(),
        LambdaPolicy::NonlinearEnergy => "1".into(),
        LambdaPolicy::Fixed(v) => format!("{v}"),
    }
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse {s:?}")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(HarnessError::Config(format!("{key}: expected true or false, got {s:?}"))),
    }
}

/// Everything needed to reproduce one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub scheme: Scheme,
    /// Modes per axis; its length is the dimension.
    pub grid: Vec<usize>,
    /// The same `[lo, hi)` on every axis.
    pub domain: (f64, f64),
    pub nu: f64,
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
    pub shift: f64,
    pub tau: f64,
    pub steps: Option<u64>,
    pub t_end: Option<f64>,
    pub lambda: LambdaPolicy,
    pub out: Option<PathBuf>,
    /// Write a snapshot every this many steps; 0 disables.
    pub snapshot_every: u64,
    pub tol_lambda: f64,
    pub samples: usize,
    pub full_scale: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults for `preset`.
    pub fn preset(preset: Preset) -> Self {
        let base = Self {
            preset,
            scheme: Scheme::BackwardEuler,
            grid: vec![64, 64],
            domain: (-2.0, 2.0),
            nu: 1.0,
            eps: 0.01,
            gamma: 0.0,
            delta: wsav_core::potential::DEFAULT_DELTA,
            shift: wsav_core::potential::DEFAULT_SHIFT,
            tau: 1e-3,
            steps: None,
            t_end: Some(1.0),
            lambda: LambdaPolicy::AdaptiveMin,
            out: None,
            snapshot_every: 0,
            tol_lambda: DEFAULT_TOL_LAMBDA,
            samples: DEFAULT_SAMPLES,
            full_scale: false,
        };
        match preset {
            Preset::Sine => Self {
                domain: (0.0, 2.0 * PI),
                eps: 0.1,
                gamma: 4.0,
                t_end: Some(0.5),
                ..base
            },
            Preset::Cross => base,
            Preset::Curve2 => Self {
                scheme: Scheme::CrankNicolson,
                gamma: 2.0,
                tau: 1e-4,
                t_end: Some(0.1),
                ..base
            },
            Preset::Curve3 => Self {
                scheme: Scheme::CrankNicolson,
                gamma: 1.0,
                tau: 1e-4,
                ..base
            },
            Preset::Curve4 => Self {
                scheme: Scheme::CrankNicolson,
                nu: 0.5,
                gamma: 2.0,
                ..base
            },
            Preset::Torus => Self {
                scheme: Scheme::CrankNicolson,
                grid: vec![32, 32, 32],
                domain: (-1.0, 1.0),
                eps: 0.02,
                gamma: 4.0,
                tau: 1e-4,
                t_end: Some(0.01),
                ..base
            },
        }
    }

    /// Switches to the large grids: 128² for sine, 256² for the curves, 128³ for the torus.
    pub fn set_full_scale(&mut self) {
        self.full_scale = true;
        self.grid = match self.preset {
            Preset::Sine => vec![128, 128],
            Preset::Torus => vec![128, 128, 128],
            _ => vec![256, 256],
        };
    }

    /// Applies one `key = value` setting. Keys match the long CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "preset" => {
                let out = self.out.take();
                *self = Self::preset(value.parse()?);
                self.out = out;
            }
            "scheme" => self.scheme = parse_scheme(value)?,
            "grid" => self.grid = parse_grid(value, self.grid.len())?,
            "domain" => self.domain = parse_domain(value)?,
            "nu" => self.nu = parse_num("nu", value)?,
            "eps" => self.eps = parse_num("eps", value)?,
            "gamma" => self.gamma = parse_num("gamma", value)?,
            "delta" => self.delta = parse_num("delta", value)?,
            "C" | "shift" => self.shift = parse_num("C", value)?,
            "tau" => self.tau = parse_num("tau", value)?,
            "steps" => {
                self.steps = Some(parse_num("steps", value)?);
            }
            "t-end" => self.t_end = Some(parse_num("t-end", value)?),
            "lambda" => self.lambda = parse_lambda(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "snapshot-every" => self.snapshot_every = parse_num("snapshot-every", value)?,
            "tol-lambda" => self.tol_lambda = parse_num("tol-lambda", value)?,
            "samples" => self.samples = parse_num("samples", value)?,
            "full-scale" => {
                if parse_bool("full-scale", value)? {
                    self.set_full_scale();
                }
            }
            other => return Err(HarnessError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, k, v) in parse_pairs(text)? {
            self.set(&k, &v)
                .map_err(|e| HarnessError::Config(format!("line {lineno}: {e}")))?;
        }
        Ok(())
    }

    /// The settings as a `key = value` document readable by [`Self::apply_text`].
    pub fn to_text(&self) -> String {
        let grid: Vec<String> = self.grid.iter().map(|n| n.to_string()).collect();
        let mut s = format!(
            "preset = {}\nscheme = {}\ngrid = {}\ndomain = {},{}\nnu = {}\neps = {}\ngamma = {}\n\
             delta = {}\nC = {}\ntau = {}\nlambda = {}\ntol-lambda = {}\nsamples = {}\n",
            self.preset,
            scheme_name(self.scheme),
            grid.join("x"),
            self.domain.0,
            self.domain.1,
            self.nu,
            self.eps,
            self.gamma,
            self.delta,
            self.shift,
            self.tau,
            lambda_name(self.lambda),
            self.tol_lambda,
            self.samples,
        );
        if let Some(n) = self.steps {
            s += &format!("steps = {n}\n");
        }
        if let Some(t) = self.t_end {
            s += &format!("t-end = {t}\n");
        }
        if self.snapshot_every > 0 {
            s += &format!("snapshot-every = {}\n", self.snapshot_every);
        }
        s
    }

    /// Number of steps, reconciling `steps` with `t_end`.
    pub fn n_steps(&self) -> Result<u64> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(HarnessError::Config(format!("tau must be positive, got {}", self.tau)));
        }
        let from_t = |t: f64| -> Result<u64> {
            let n = (t / self.tau).round();
            if !(t >= 0.0) || (n * self.tau - t).abs() > 1e-9 * t.max(self.tau) {
                return Err(HarnessError::Config(format!(
                    "t-end {t} is not a multiple of tau {}",
                    self.tau
                )));
            }
            Ok(n as u64)
        };
        match (self.steps, self.t_end) {
            (Some(n), Some(t)) => {
                if from_t(t)? != n {
                    return Err(HarnessError::Config(format!(
                        "steps = {n} disagrees with t-end = {t} at tau = {}",
                        self.tau
                    )));
                }
                Ok(n)
            }
            (Some(n), None) => Ok(n),
            (None, Some(t)) => from_t(t),
            (None, None) => Err(HarnessError::Config("either steps or t-end is required".into())),
        }
    }

    pub fn make_grid(&self) -> Result<Grid> {
        let extents = vec![self.domain; self.grid.len()];
        Ok(Grid::new(&self.grid, &extents)?)
    }

    pub fn potential(&self) -> Result<PotentialParams> {
        Ok(PotentialParams::new(self.gamma, self.delta, self.shift)?)
    }

    pub fn step_params(&self) -> Result<StepParams> {
        let grid = self.make_grid()?;
        let ops = fft::operators(grid, self.nu, self.eps, self.gamma)?;
        let mut sp = StepParams::new(self.tau, self.lambda, ops, self.potential()?)?;
        sp.tol_lambda = self.tol_lambda;
        sp.validate()?;
        Ok(sp)
    }

    pub fn shape_spec(&self) -> Result<SignedDistanceSpec> {
        Ok(SignedDistanceSpec::with_samples(self.preset.shape(), self.samples)?)
    }

    pub fn initial_state(&self) -> Result<SavState> {
        let phi = initial_field(self.make_grid()?, &self.shape_spec()?, self.eps)?;
        Ok(init_state(phi, &self.potential()?)?)
    }
}

/// `(line number, key, value)` for every setting in a `key = value` document.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", i + 1)))?;
        pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// `64`, `64x64` or `32x32x32`; a single size is repeated `dim` times.
pub fn parse_grid(s: &str, dim: usize) -> Result<Vec<usize>> {
    let parts: Vec<usize> = s
        .split(['x', 'X', ','])
        .map(|p| parse_num("grid", p))
        .collect::<Result<_>>()?;
    match parts.len() {
        1 => Ok(vec![parts[0]; dim.max(2)]),
        2 | 3 => Ok(parts),
        _ => Err(HarnessError::Config(format!("grid: expected 1 to 3 sizes, got {s:?}"))),
    }
}

/// `lo,hi`, applied to every axis.
pub fn parse_domain(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| HarnessError::Config(format!("domain: expected lo,hi, got {s:?}")))?;
    Ok((parse_num("domain", a)?, parse_num("domain", b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::preset(Preset::Curve3);
        c.set("lambda", "0.25").unwrap();
        c.set("grid", "32").unwrap();
        let mut d = ExperimentConfig::preset(Preset::Sine);
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn steps_and_t_end() {
        let mut c = ExperimentConfig::preset(Preset::Sine);
        assert_eq!(c.n_steps().unwrap(), 500);
        c.set("steps", "400").unwrap();
        assert!(c.n_steps().is_err());
        c.t_end = None;
        assert_eq!(c.n_steps().unwrap(), 400);
        c.set("t-end", "0.0004").unwrap();
        c.set("steps", "0").unwrap();
        assert!(c.n_steps().is_err());
        c.set("tau", "3e-4").unwrap();
        c.steps = None;
        c.t_end = Some(0.001);
        assert!(c.n_steps().is_err());
    }

    #[test]
    fn lambda_forms() {
        assert_eq!(parse_lambda("min").unwrap(), LambdaPolicy::AdaptiveMin);
        assert_eq!(parse_lambda("0").unwrap(), LambdaPolicy::LagrangeStrict);
        assert_eq!(parse_lambda("1").unwrap(), LambdaPolicy::NonlinearEnergy);
        assert_eq!(parse_lambda("0.5").unwrap(), LambdaPolicy::Fixed(0.5));
        assert!(parse_lambda("1.5").is_err());
        assert!(parse_lambda("x").is_err());
    }

    #[test]
    fn comments_and_errors() {
        let mut c = ExperimentConfig::preset(Preset::Sine);
        c.apply_text("# comment\n\ntau = 1e-4  # trailing\n").unwrap();
        assert_eq!(c.tau, 1e-4);
        let err = c.apply_text("tau 1e-4").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        assert!(c.apply_text("bogus = 1").is_err());
    }
}
