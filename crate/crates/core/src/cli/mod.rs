//! Command-line front end: `verify`, `sweep` and `dump`.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or config error, 3 numeric error.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::{FiberConfig, Format, GridConfig, OutputConfig, Parameter, RunConfig, FLAT_KEYS};

use crate::error::{Error, Result};
use crate::grid::make_uniform_grid;
use crate::kernels::{hankel_k, projection_diff_kernel, resolvent_diff_kernel, SpectralKernel};
use crate::operator::eigh;
use crate::verification::spectra::{block_spectrum, fiber_blocks};
use crate::verification::{
    fd_projection_difference, fd_resolvent_difference, run_check, run_sweep, CheckReport, Refinement, SweepResult,
};
use crate::Complex64;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "halfline", version, about = "Neumann/Dirichlet operator checks on the half-line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one check and write its report.
    Verify(Flags),
    /// Run a check over a refinement schedule and fit the convergence order.
    Sweep {
        #[command(flatten)]
        flags: Flags,
        /// Point counts at fixed t_max.
        #[arg(long, value_delimiter = ',', conflicts_with = "lengths")]
        points: Option<Vec<usize>>,
        /// Truncation lengths at fixed spacing.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<f64>>,
    },
    /// Write kernel values or a spectrum: kernel, spectrum, projection-kernel, hankel.
    Dump {
        what: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Args)]
struct Flags {
    /// Config file, flat `key = value` or JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    check: Option<String>,
    /// Comma-separated fiber eigenvalues.
    #[arg(long, allow_hyphen_values = true)]
    fiber: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tmax: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Kernel comparison window `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Record elapsed time in reports.
    #[arg(long)]
    timing: bool,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let params = [self.z.is_some(), self.theta.is_some(), self.alpha.is_some()];
        if params.iter().filter(|&&b| b).count() > 1 {
            return Err(Error::config("parameter", "give exactly one of --z, --theta, --alpha"));
        }
        let text = |v: f64| v.to_string();
        let overrides: [(&str, Option<String>); 12] = [
            ("check", self.check.clone()),
            ("fiber", self.fiber.clone()),
            ("z", self.z.map(text)),
            ("theta", self.theta.map(text)),
            ("alpha", self.alpha.map(text)),
            ("n_points", self.n.map(|v| v.to_string())),
            ("t_max", self.tmax.map(text)),
            ("seed", self.seed.map(|v| v.to_string())),
            ("samples", self.samples.map(|v| v.to_string())),
            ("window", self.window.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.timing {
            cfg.timing = true;
        }
        Ok(cfg)
    }
}

/// Exit code for an error: 2 for input problems, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Config { .. } | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        Error::NonFiniteKernel { .. }
        | Error::NonFiniteAtEigenvalue { .. }
        | Error::SingularResolvent { .. }
        | Error::NoConvergence(_) => EXIT_NUMERIC,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let outcome = match cli.command {
        Command::Verify(flags) => flags.resolve().and_then(|cfg| cmd_verify(&cfg, stdout, stderr)),
        Command::Sweep { flags, points, lengths } => flags.resolve().and_then(|mut cfg| {
            if let Some(p) = points {
                cfg.sweep = Some(Refinement::Points(p));
            }
            if let Some(l) = lengths {
                cfg.sweep = Some(Refinement::Length(l));
            }
            cmd_sweep(&cfg, stdout, stderr)
        }),
        Command::Dump { what, flags } => flags.resolve().and_then(|cfg| cmd_dump(&cfg, &what, stdout)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(cfg: &RunConfig, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.output.path {
        Some(p) => std::fs::write(p, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn report_csv(r: &CheckReport) -> String {
    let mut s = String::from("residual,value,tolerance,passed\n");
    for (name, res) in &r.residuals {
        s.push_str(&format!("{name},{},{},{}\n", res.value, res.tolerance, res.passed()));
    }
    s
}

pub fn cmd_verify(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let kind = cfg.check_kind()?;
    let input = cfg.check_input(kind)?;
    let mut report = run_check(kind, &input)?;
    if !cfg.timing {
        report.elapsed_seconds = 0.0;
    }
    report.parameters.insert("seed".into(), json!(cfg.seed));
    let body = match cfg.output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report_csv(&report),
    };
    emit(cfg, &body, stdout)?;
    let _ = writeln!(stderr, "{}", report.summary());
    Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let kind = cfg.check_kind()?;
    let input = cfg.check_input(kind)?;
    let schedule = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep_points", "no refinement schedule given"))?;
    let result: SweepResult = run_sweep(kind, &input, schedule)?;
    let body = match cfg.output.format {
        Format::Json => serde_json::to_string_pretty(&result)? + "\n",
        Format::Csv => result.to_csv(),
    };
    emit(cfg, &body, stdout)?;
    let (c, w) = result.expected_order.expect("sweeps run only with a declared order");
    let _ = writeln!(
        stderr,
        "{kind}: observed order {:.3}, expected {c} ± {w}",
        result.observed_order.unwrap_or(f64::NAN)
    );
    Ok(if result.within_band() { EXIT_PASS } else { EXIT_FAIL })
}

pub const DUMP_KINDS: [&str; 4] = ["kernel", "spectrum", "projection-kernel", "hankel"];

type KernelRow = (f64, f64, usize, usize, Complex64);

fn kernel_rows(kernel: &SpectralKernel, cfg: &RunConfig) -> Result<Vec<KernelRow>> {
    let grid = make_uniform_grid(cfg.grid.n_points, cfg.grid.t_max)?;
    let m = kernel.fiber_dim();
    let mut rows = Vec::with_capacity(grid.len() * grid.len() * m * m);
    for &t in grid.nodes() {
        for &tau in grid.nodes() {
            let k = kernel.evaluate(t, tau);
            for a in 0..m {
                for b in 0..m {
                    rows.push((t, tau, a, b, k[(a, b)]));
                }
            }
        }
    }
    Ok(rows)
}

fn spectrum_body(values: &[f64], format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let mut s = String::from("eigenvalue\n");
            for v in values {
                s.push_str(&format!("{v}\n"));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(values)? + "\n",
    })
}

/// Writes kernel values (`kernel`, `projection-kernel`) or eigenvalues
/// (`spectrum` of the finite-difference difference, `hankel`).
pub fn cmd_dump(cfg: &RunConfig, what: &str, stdout: &mut dyn Write) -> Result<i32> {
    let body = match what {
        "kernel" | "projection-kernel" => {
            let l = cfg.fiber_operator()?;
            let kernel = if what == "kernel" {
                let z = cfg
                    .z()
                    .ok_or_else(|| Error::config("z", "dump kernel requires z"))?;
                resolvent_diff_kernel(&l, Complex64::from(z))?
            } else {
                let ta = cfg
                    .theta_alpha()?
                    .ok_or_else(|| Error::config("theta", "dump projection-kernel requires theta or alpha"))?;
                projection_diff_kernel(&l, ta.alpha())?
            };
            let rows = kernel_rows(&kernel, cfg)?;
            match cfg.output.format {
                Format::Csv => {
                    let mut s = String::from("t,tau,fiber_row,fiber_col,value_re,value_im\n");
                    for (t, tau, a, b, v) in rows {
                        s.push_str(&format!("{t},{tau},{a},{b},{},{}\n", v.re, v.im));
                    }
                    s
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(t, tau, a, b, v)| {
                            json!({"t": t, "tau": tau, "fiber_row": a, "fiber_col": b, "value_re": v.re, "value_im": v.im})
                        })
                        .collect();
                    serde_json::to_string_pretty(&v)? + "\n"
                }
            }
        }
        "spectrum" => {
            let l = cfg.fiber_operator()?;
            let grid = make_uniform_grid(cfg.grid.n_points, cfg.grid.t_max)?;
            let m = match (cfg.z(), cfg.theta_alpha()?) {
                (Some(z), _) => fd_resolvent_difference(&l, &grid, z)?,
                (None, Some(ta)) => fd_projection_difference(&l, &grid, ta.alpha())?,
                (None, None) => return Err(Error::config("z", "dump spectrum requires z, theta or alpha")),
            };
            spectrum_body(&block_spectrum(&fiber_blocks(m.data(), &l))?, cfg.output.format)?
        }
        "hankel" => {
            let grid = make_uniform_grid(cfg.grid.n_points, cfg.grid.t_max)?;
            let e = eigh(hankel_k(&grid).data())?;
            spectrum_body(e.eigenvalues().as_slice(), cfg.output.format)?
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown dump '{other}', expected one of {}",
                DUMP_KINDS.join(", ")
            )))
        }
    };
    emit(cfg, &body, stdout)?;
    Ok(EXIT_PASS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("halfline").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn verify_passes_and_reports_json() {
        let (code, out, _) = run_args(&["verify", "--check", "resolvent-kernel", "--fiber", "0", "--z", "-1", "--n", "200"]);
        assert_eq!(code, EXIT_PASS);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["check_name"], "resolvent-kernel");
        assert_eq!(v["elapsed_seconds"], 0.0);
    }

    #[test]
    fn identical_runs_give_identical_bytes() {
        let args = ["verify", "--check", "boundary-bounds", "--fiber", "0,1", "--n", "100", "--seed", "3", "--samples", "5"];
        assert_eq!(run_args(&args).1, run_args(&args).1);
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_args(&["verify", "--check", "projection-spectrum", "--theta", "1.5"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("theta must lie in (0,1)"), "{err}");
        assert_eq!(run_args(&["verify", "--check", "bogus", "--z", "-1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["dump", "nothing"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["verify", "--z", "-1", "--theta", "0.5", "--check", "resolvent-kernel"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["sweep", "--check", "resolvent-kernel", "--z", "-1", "--points", "200"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
    }

    #[test]
    fn numeric_errors_exit_three() {
        assert_eq!(exit_code(&Error::NoConvergence(4)), EXIT_NUMERIC);
        assert_eq!(
            exit_code(&Error::SingularResolvent { z: "0".into(), eigenvalue: 0.0, distance: 0.0 }),
            EXIT_NUMERIC
        );
    }

    #[test]
    fn dump_kernel_scalar_case() {
        let (code, out, _) = run_args(&["dump", "kernel", "--fiber", "0", "--z", "-1", "--n", "5", "--tmax", "1", "--format", "csv"]);
        assert_eq!(code, EXIT_PASS);
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), "t,tau,fiber_row,fiber_col,value_re,value_im");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 25);
        for row in rows {
            let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((f[4] - (-(f[0] + f[1])).exp()).abs() < 1e-15 && f[5] == 0.0);
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "check = resolvent-kernel\nz = -1\nn_points = 50\nt_max = 10\n").unwrap();
        let flags = Flags {
            config: Some(path),
            check: None,
            fiber: Some("1,2".into()),
            z: None,
            theta: None,
            alpha: None,
            n: Some(60),
            tmax: None,
            seed: None,
            samples: None,
            window: None,
            out: None,
            format: None,
            timing: false,
        };
        let cfg = flags.resolve().unwrap();
        assert_eq!(cfg.grid, GridConfig { n_points: 60, t_max: 10.0 });
        assert_eq!(cfg.fiber, FiberConfig::Eigenvalues(vec![1.0, 2.0]));
        assert_eq!(cfg.parameter, Some(Parameter::Z(-1.0)));
    }
}
