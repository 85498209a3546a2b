use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One named residual with the tolerance it is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Outcome of one verification.
///
/// `passed` is true iff every residual is at most its tolerance; a NaN
/// residual fails. `tolerance` is the tolerance of the headline residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub parameters: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Residual>,
    pub spectra: BTreeMap<String, Vec<f64>>,
    pub passed: bool,
    pub tolerance: f64,
    pub elapsed_seconds: f64,
}

impl CheckReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).map(|r| r.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Residual lines, one per entry, for terminal output.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} [{}]",
            self.check_name,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for (name, r) in &self.residuals {
            s.push_str(&format!(
                "\n  {name}: {:.3e} (tol {:.1e}) {}",
                r.value,
                r.tolerance,
                if r.passed() { "ok" } else { "FAILED" }
            ));
        }
        s
    }
}

pub(crate) struct ReportBuilder {
    name: String,
    parameters: BTreeMap<String, Value>,
    residuals: BTreeMap<String, Residual>,
    spectra: BTreeMap<String, Vec<f64>>,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            residuals: BTreeMap::new(),
            spectra: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn residual(&mut self, key: &str, value: f64, tolerance: f64) -> &mut Self {
        self.residuals.insert(key.to_string(), Residual { value, tolerance });
        self
    }

    pub fn spectrum(&mut self, key: &str, values: Vec<f64>) -> &mut Self {
        self.spectra.insert(key.to_string(), values);
        self
    }

    pub fn finish(&mut self, headline_tolerance: f64) -> CheckReport {
        let passed = !self.residuals.is_empty() && self.residuals.values().all(Residual::passed);
        CheckReport {
            check_name: self.name.clone(),
            parameters: std::mem::take(&mut self.parameters),
            residuals: std::mem::take(&mut self.residuals),
            spectra: std::mem::take(&mut self.spectra),
            passed,
            tolerance: headline_tolerance,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// One refinement level of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub residual: f64,
}

/// Residuals of a check over a refinement schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub check_name: String,
    pub refinement: String,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln residual` against `ln param`.
    pub observed_order: Option<f64>,
    /// Declared band `(center, half_width)` for the slope, if the check has one.
    pub expected_order: Option<(f64, f64)>,
}

impl SweepResult {
    pub fn within_band(&self) -> bool {
        match (self.observed_order, self.expected_order) {
            (Some(p), Some((c, w))) => (p - c).abs() <= w,
            _ => false,
        }
    }

    /// `param,residual` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,residual\n");
        for r in &self.rows {
            s.push_str(&format!("{},{}\n", r.param, r.residual));
        }
        s
    }
}
