//! Closed-form operators: resolvent- and projection-difference kernels,
//! solution and Dirichlet-to-Neumann operators, the Krein-type assembly,
//! the Hankel operator `K`, and the rank-one/separated-variables forms.

mod boundary;
mod hankel;
mod maps;
mod spectral;

pub use boundary::{dtn_operator, krein_assemble, ntd_operator, solution_operator};
pub use hankel::{hankel_k, psi0, rank_one_b, scaled_grid_similarity, separated_variables_operator};
pub use maps::{alpha_to_theta, resolvent_eigenvalue_map, theta_to_alpha, ThetaAlpha};
pub use spectral::{projection_diff_kernel, resolvent_diff_kernel, sinc, KernelParameter, SpectralKernel};
