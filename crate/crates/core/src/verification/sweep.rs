use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    check_boundary_bounds, check_krein_formula, check_projection_diff_spectrum, check_projection_kernel,
    check_resolvent_diff_spectrum, check_resolvent_kernel, check_weidmann_random, Window,
};
use super::report::{CheckReport, SweepResult, SweepRow};
use super::spectra::log_log_slope;
use crate::error::{Error, Result};
use crate::grid::{make_uniform_grid, Grid};
use crate::kernels::ThetaAlpha;
use crate::operator::FiberOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    ResolventKernel,
    KreinFormula,
    ProjectionKernel,
    ResolventSpectrum,
    ProjectionSpectrum,
    WeidmannPairing,
    BoundaryBounds,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::ResolventKernel,
        CheckKind::KreinFormula,
        CheckKind::ProjectionKernel,
        CheckKind::ResolventSpectrum,
        CheckKind::ProjectionSpectrum,
        CheckKind::WeidmannPairing,
        CheckKind::BoundaryBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::ResolventKernel => "resolvent-kernel",
            CheckKind::KreinFormula => "krein-formula",
            CheckKind::ProjectionKernel => "projection-kernel",
            CheckKind::ResolventSpectrum => "resolvent-spectrum",
            CheckKind::ProjectionSpectrum => "projection-spectrum",
            CheckKind::WeidmannPairing => "weidmann-pairing",
            CheckKind::BoundaryBounds => "boundary-bounds",
        }
    }

    pub fn needs_z(self) -> bool {
        matches!(
            self,
            CheckKind::ResolventKernel | CheckKind::KreinFormula | CheckKind::ResolventSpectrum
        )
    }

    pub fn needs_window(self) -> bool {
        matches!(self, CheckKind::ProjectionKernel | CheckKind::ProjectionSpectrum)
    }

    /// Residual tracked by sweeps.
    pub fn headline_residual(self) -> &'static str {
        match self {
            CheckKind::ResolventKernel | CheckKind::KreinFormula => "relative_spectral_error",
            CheckKind::ProjectionKernel => "sup_error",
            CheckKind::ResolventSpectrum => "separated_variables",
            CheckKind::ProjectionSpectrum => "bound_excess",
            CheckKind::WeidmannPairing => "pairing_error",
            CheckKind::BoundaryBounds => "trace_ratio",
        }
    }

    /// Declared convergence band `(slope, half_width)` of the headline residual.
    pub fn expected_order(self) -> Option<(f64, f64)> {
        match self {
            CheckKind::ResolventKernel | CheckKind::KreinFormula => Some((-2.0, 0.5)),
            CheckKind::ProjectionKernel => Some((-1.0, 0.5)),
            _ => None,
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::invalid(format!("unknown check '{s}', expected one of {}", names.join(", ")))
        })
    }
}

/// Everything a check may need; unused fields are ignored.
#[derive(Debug, Clone)]
pub struct CheckInput {
    pub fiber: FiberOperator,
    pub n_points: usize,
    pub t_max: f64,
    pub z: Option<f64>,
    pub theta_alpha: Option<ThetaAlpha>,
    pub window: Option<Window>,
    pub seed: u64,
    pub samples: usize,
}

impl CheckInput {
    pub fn grid(&self) -> Result<Grid> {
        make_uniform_grid(self.n_points, self.t_max)
    }

    fn z(&self, kind: CheckKind) -> Result<f64> {
        self.z
            .ok_or_else(|| Error::config("z", format!("check {kind} requires a real spectral parameter z")))
    }

    fn theta_alpha(&self, kind: CheckKind) -> Result<ThetaAlpha> {
        self.theta_alpha
            .ok_or_else(|| Error::config("theta", format!("check {kind} requires theta or alpha")))
    }
}

pub fn run_check(kind: CheckKind, input: &CheckInput) -> Result<CheckReport> {
    let l = &input.fiber;
    match kind {
        CheckKind::WeidmannPairing => check_weidmann_random(input.seed, input.samples),
        CheckKind::ResolventKernel => check_resolvent_kernel(l, &input.grid()?, input.z(kind)?),
        CheckKind::KreinFormula => check_krein_formula(l, &input.grid()?, input.z(kind)?),
        CheckKind::ResolventSpectrum => check_resolvent_diff_spectrum(l, &input.grid()?, input.z(kind)?),
        CheckKind::ProjectionKernel => {
            check_projection_kernel(l, &input.grid()?, input.theta_alpha(kind)?, input.window)
        }
        CheckKind::ProjectionSpectrum => check_projection_diff_spectrum(l, &input.grid()?, input.theta_alpha(kind)?),
        CheckKind::BoundaryBounds => check_boundary_bounds(l, &input.grid()?, input.samples, input.seed),
    }
}

/// A refinement schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// Point counts at the base `t_max`.
    Points(Vec<usize>),
    /// Truncation lengths at the base spacing `t_max / n_points`.
    Length(Vec<f64>),
}

impl Refinement {
    pub fn len(&self) -> usize {
        match self {
            Refinement::Points(v) => v.len(),
            Refinement::Length(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            Refinement::Points(_) => "n_points",
            Refinement::Length(_) => "t_max",
        }
    }
}

/// Runs `kind` across the schedule, in parallel, and fits the log–log slope
/// of its headline residual. Kernel windows stay fixed at the base grid's.
pub fn run_sweep(kind: CheckKind, base: &CheckInput, schedule: &Refinement) -> Result<SweepResult> {
    if schedule.len() < 2 {
        return Err(Error::invalid(format!(
            "a sweep needs at least two refinement levels, got {}",
            schedule.len()
        )));
    }
    if kind.expected_order().is_none() {
        return Err(Error::invalid(format!("check {kind} has no declared convergence order")));
    }
    let mut fixed = base.clone();
    if kind.needs_window() && fixed.window.is_none() {
        fixed.window = Some(Window::default_for(&base.grid()?));
    }
    let inputs: Vec<(f64, CheckInput)> = match schedule {
        Refinement::Points(ns) => ns
            .iter()
            .map(|&n| (n as f64, CheckInput { n_points: n, ..fixed.clone() }))
            .collect(),
        Refinement::Length(ts) => {
            let h = base.t_max / base.n_points as f64;
            ts.iter()
                .map(|&t| {
                    let n = (t / h).round() as usize;
                    (t, CheckInput { n_points: n, t_max: t, ..fixed.clone() })
                })
                .collect()
        }
    };
    let key = kind.headline_residual();
    let mut rows = inputs
        .par_iter()
        .map(|(param, input)| {
            let report = run_check(kind, input)?;
            Ok(SweepRow {
                param: *param,
                residual: report.residual(key).expect("headline residual is reported"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.param, r.residual)).collect();
    Ok(SweepResult {
        check_name: kind.name().to_string(),
        refinement: schedule.name().to_string(),
        observed_order: log_log_slope(&pairs),
        expected_order: kind.expected_order(),
        rows,
    })
}
