use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{alpha_to_theta, theta_to_alpha, ThetaAlpha};
use crate::operator::FiberOperator;
use crate::verification::{CheckInput, CheckKind, Refinement, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberConfig {
    Eigenvalues(Vec<f64>),
    /// Row-major entries of a symmetric nonnegative matrix.
    Matrix(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Z(f64),
    Theta(f64),
    Alpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::config("format", format!("expected json or csv, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A complete run description. JSON is the canonical serialization; the
/// flat `key = value` form maps onto the same fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub fiber: FiberConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<Parameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Refinement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub output: OutputConfig,
    /// Record wall-clock time in reports; off keeps reports byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
}

fn default_samples() -> usize {
    100
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                n_points: 800,
                t_max: 30.0,
            },
            fiber: FiberConfig::Eigenvalues(vec![0.0]),
            parameter: None,
            check: None,
            sweep: None,
            window: None,
            seed: 0,
            samples: default_samples(),
            output: OutputConfig::default(),
            timing: false,
        }
    }
}

pub const FLAT_KEYS: [&str; 16] = [
    "n_points",
    "t_max",
    "fiber",
    "fiber_matrix",
    "z",
    "theta",
    "alpha",
    "check",
    "sweep_points",
    "sweep_t_max",
    "window",
    "seed",
    "samples",
    "out",
    "format",
    "timing",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::config(key, format!("cannot parse '{}': {e}", value.trim())))
}

pub(crate) fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses JSON if the text starts with `{`, the flat format otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::config("json", e.to_string()))
        } else {
            Self::parse_flat(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `key = value` lines; `#` starts a comment. Unset keys keep their defaults.
    pub fn parse_flat(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected key = value, got '{line}'")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one flat key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_points" => self.grid.n_points = parse_num(key, value)?,
            "t_max" => self.grid.t_max = parse_num(key, value)?,
            "fiber" => self.fiber = FiberConfig::Eigenvalues(parse_list(key, value)?),
            "fiber_matrix" => self.fiber = FiberConfig::Matrix(parse_list(key, value)?),
            "z" => self.parameter = Some(Parameter::Z(parse_num(key, value)?)),
            "theta" => self.parameter = Some(Parameter::Theta(parse_num(key, value)?)),
            "alpha" => self.parameter = Some(Parameter::Alpha(parse_num(key, value)?)),
            "check" => self.check = Some(value.to_string()),
            "sweep_points" => self.sweep = Some(Refinement::Points(parse_list(key, value)?)),
            "sweep_t_max" => self.sweep = Some(Refinement::Length(parse_list(key, value)?)),
            "window" => {
                let v: Vec<f64> = parse_list(key, value)?;
                if v.len() != 2 {
                    return Err(Error::config(key, format!("expected lo,hi, got {} values", v.len())));
                }
                self.window = Some([v[0], v[1]]);
            }
            "seed" => self.seed = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "out" => self.output.path = Some(PathBuf::from(value)),
            "format" => self.output.format = value.parse()?,
            "timing" => self.timing = parse_num(key, value)?,
            _ => {
                return Err(Error::config(
                    key,
                    format!("unknown key, expected one of {}", FLAT_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_flat(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_points = {}", self.grid.n_points);
        let _ = writeln!(s, "t_max = {}", self.grid.t_max);
        match &self.fiber {
            FiberConfig::Eigenvalues(v) => {
                let _ = writeln!(s, "fiber = {}", join(v));
            }
            FiberConfig::Matrix(v) => {
                let _ = writeln!(s, "fiber_matrix = {}", join(v));
            }
        }
        match self.parameter {
            Some(Parameter::Z(v)) => {
                let _ = writeln!(s, "z = {v}");
            }
            Some(Parameter::Theta(v)) => {
                let _ = writeln!(s, "theta = {v}");
            }
            Some(Parameter::Alpha(v)) => {
                let _ = writeln!(s, "alpha = {v}");
            }
            None => {}
        }
        if let Some(c) = &self.check {
            let _ = writeln!(s, "check = {c}");
        }
        match &self.sweep {
            Some(Refinement::Points(v)) => {
                let _ = writeln!(s, "sweep_points = {}", join(v));
            }
            Some(Refinement::Length(v)) => {
                let _ = writeln!(s, "sweep_t_max = {}", join(v));
            }
            None => {}
        }
        if let Some([lo, hi]) = self.window {
            let _ = writeln!(s, "window = {lo},{hi}");
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "samples = {}", self.samples);
        if let Some(p) = &self.output.path {
            let _ = writeln!(s, "out = {}", p.display());
        }
        let _ = writeln!(
            s,
            "format = {}",
            match self.output.format {
                Format::Json => "json",
                Format::Csv => "csv",
            }
        );
        let _ = writeln!(s, "timing = {}", self.timing);
        s
    }

    pub fn fiber_operator(&self) -> Result<FiberOperator> {
        match &self.fiber {
            FiberConfig::Eigenvalues(v) => {
                if v.is_empty() {
                    return Err(Error::config("fiber", "at least one eigenvalue is required"));
                }
                if let Some(bad) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                    return Err(Error::config("fiber", format!("eigenvalues must be finite and >= 0, got {bad}")));
                }
                FiberOperator::diagonal(v).map_err(|e| Error::config("fiber", e.to_string()))
            }
            FiberConfig::Matrix(v) => {
                let m = (v.len() as f64).sqrt().round() as usize;
                if m == 0 || m * m != v.len() {
                    return Err(Error::config(
                        "fiber_matrix",
                        format!("{} entries do not form a square matrix", v.len()),
                    ));
                }
                FiberOperator::new(DMatrix::from_row_slice(m, m, v))
                    .map_err(|e| Error::config("fiber_matrix", e.to_string()))
            }
        }
    }

    pub fn theta_alpha(&self) -> Result<Option<ThetaAlpha>> {
        match self.parameter {
            Some(Parameter::Theta(t)) => theta_to_alpha(t)
                .map(Some)
                .map_err(|e| Error::config("theta", e.to_string())),
            Some(Parameter::Alpha(a)) => alpha_to_theta(a)
                .map(Some)
                .map_err(|e| Error::config("alpha", e.to_string())),
            _ => Ok(None),
        }
    }

    pub fn z(&self) -> Option<f64> {
        match self.parameter {
            Some(Parameter::Z(z)) => Some(z),
            _ => None,
        }
    }

    pub fn check_kind(&self) -> Result<CheckKind> {
        let name = self
            .check
            .as_deref()
            .ok_or_else(|| Error::config("check", "no check named"))?;
        name.parse().map_err(|e: Error| Error::config("check", e.to_string()))
    }

    /// Validates everything a check reads and builds its input.
    pub fn check_input(&self, kind: CheckKind) -> Result<CheckInput> {
        if self.grid.n_points < 2 {
            return Err(Error::config("n_points", format!("must be at least 2, got {}", self.grid.n_points)));
        }
        if !(self.grid.t_max > 0.0) || !self.grid.t_max.is_finite() {
            return Err(Error::config("t_max", format!("must be positive, got {}", self.grid.t_max)));
        }
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        let fiber = self.fiber_operator()?;
        let theta_alpha = self.theta_alpha()?;
        if kind.needs_z() && self.z().is_none() {
            return Err(Error::config("z", format!("check {kind} requires z (and not theta/alpha)")));
        }
        if kind.needs_window() && theta_alpha.is_none() {
            return Err(Error::config("theta", format!("check {kind} requires theta or alpha")));
        }
        let window = match self.window {
            Some([lo, hi]) if lo < hi => Some(Window { lo, hi }),
            Some([lo, hi]) => return Err(Error::config("window", format!("need lo < hi, got {lo},{hi}"))),
            None => None,
        };
        Ok(CheckInput {
            fiber,
            n_points: self.grid.n_points,
            t_max: self.grid.t_max,
            z: self.z(),
            theta_alpha,
            window,
            seed: self.seed,
            samples: self.samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_and_json_agree() {
        let text = "# demo\nn_points = 400\nt_max = 20\nfiber = 0, 1, 4\nz = -1\ncheck = resolvent-kernel\nseed = 7\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.grid, GridConfig { n_points: 400, t_max: 20.0 });
        assert_eq!(cfg.fiber, FiberConfig::Eigenvalues(vec![0.0, 1.0, 4.0]));
        assert_eq!(cfg.parameter, Some(Parameter::Z(-1.0)));
        assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&cfg.to_flat()).unwrap(), cfg);
    }

    #[test]
    fn canonical_json_is_idempotent() {
        let json = RunConfig::default().to_json();
        assert_eq!(RunConfig::parse(&json).unwrap().to_json(), json);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::parse("n_points = many").unwrap_err();
        assert!(e.to_string().contains("n_points"), "{e}");
        let e = RunConfig::parse("colour = red").unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = RunConfig::parse("theta = 1.5").unwrap().theta_alpha().unwrap_err();
        assert!(e.to_string().contains("theta must lie in (0,1)"), "{e}");
        let e = RunConfig::parse("fiber = 0,-1").unwrap().fiber_operator().unwrap_err();
        assert!(e.to_string().contains("fiber"), "{e}");
        let e = RunConfig::parse("fiber_matrix = 1,2,3").unwrap().fiber_operator().unwrap_err();
        assert!(e.to_string().contains("fiber_matrix"), "{e}");
        let cfg = RunConfig::parse("theta = 0.5").unwrap();
        let e = cfg.check_input(CheckKind::ResolventKernel).unwrap_err();
        assert!(e.is_usage() && e.to_string().contains("`z`"), "{e}");
    }

    #[test]
    fn matrix_fiber() {
        let cfg = RunConfig::parse("fiber_matrix = 2,1,1,2").unwrap();
        let l = cfg.fiber_operator().unwrap();
        assert_eq!(l.dim(), 2);
        assert!((l.min_eigenvalue() - 1.0).abs() < 1e-14);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            2usize..5000,
            0.1f64..500.0,
            prop::collection::vec(0.0f64..10.0, 1..5),
            prop::option::of(prop_oneof![
                (-10.0f64..-0.01).prop_map(Parameter::Z),
                (0.01f64..0.99).prop_map(Parameter::Theta),
                (0.01f64..10.0).prop_map(Parameter::Alpha),
            ]),
            prop::option::of(prop::sample::select(CheckKind::ALL.to_vec())),
            prop::option::of(prop::collection::vec(2usize..2000, 2..4).prop_map(Refinement::Points)),
            any::<u64>(),
            1usize..1000,
            any::<bool>(),
        )
            .prop_map(|(n, t, ev, parameter, check, sweep, seed, samples, timing)| RunConfig {
                grid: GridConfig { n_points: n, t_max: t },
                fiber: FiberConfig::Eigenvalues(ev),
                parameter,
                check: check.map(|k| k.name().to_string()),
                sweep,
                window: None,
                seed,
                samples,
                output: OutputConfig::default(),
                timing,
            })
    }

    proptest! {
        #[test]
        fn round_trips(cfg in arb_config()) {
            let json = cfg.to_json();
            let back = RunConfig::parse(&json).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_json(), json);
            prop_assert_eq!(RunConfig::parse(&cfg.to_flat()).unwrap(), cfg);
        }
    }
}
