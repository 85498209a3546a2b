//! Cross-checks between the finite-difference operators and the closed-form
//! kernels, with structured reports and convergence sweeps.

mod checks;
mod report;
pub mod spectra;
mod sweep;

pub use checks::{
    band_limited, check_boundary_bounds, check_krein_formula, check_projection_diff_spectrum,
    check_projection_kernel, check_resolvent_diff_spectrum, check_resolvent_kernel, check_weidmann_pairing,
    check_weidmann_random, fd_difference, fd_pair, fd_projection_difference, fd_resolvent_difference,
    solution_norm_ratio, trace_ratio, weidmann_sides, Window, EXACT_TOL, FILL_MESH, FILL_RADIUS, FILL_TARGET,
    KERNEL_TOL, PAIRING_TOL, PROJECTION_SUP_TOL, SPECTRUM_BOUND_SLACK, SPECTRUM_TOL, TRANSFORMATION_TOL,
    ZERO_OPERATOR_TOL,
};
pub use report::{CheckReport, Residual, SweepResult, SweepRow};
pub use sweep::{run_check, run_sweep, CheckKind, CheckInput, Refinement};
