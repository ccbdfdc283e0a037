//! Friable-integer analytics: the Dickman–de Bruijn function and its
//! relatives, exact and approximate counts of y-friable integers, and the
//! classical constants attached to them.

pub mod cache;
pub mod consts;
pub mod counting;
pub mod dde;
pub mod error;
pub mod numeric;
pub mod poly;
pub mod primes;
pub mod special_functions;
pub mod stats;
pub mod xi_asymptotics;

pub use dde::{
    ratio_convergence_check, scalar_product, solve_adjoint_backward, solve_forward,
    AdjointSolution, DdeSpec, PiecewiseSolution,
};
pub use error::{Error, Result};
pub use poly::LocalPoly;
pub use primes::PrimeTable;
pub use cache::Cache;
pub use counting::{
    buchstab_identity_check, estimate_bundle, hildebrand_identity_check, lambda_debruijn, log_psi_z,
    phi_buchstab_estimate, phi_debruijn_refined, phi_exact, psi_binomial_lower, psi_bruteforce,
    psi_dickman, psi_exact, psi_rankin_upper, psi_saddle_ht, rankin_alpha, BundleConfig, CountMethod,
    CountResult, EstimateBundle, PhiCounter, PsiCounter, SaddlePoint,
};
pub use special_functions::{
    ein, e1, omega, rho, rho_laplace_closed, rho_laplace_numeric, sigma_kappa, tau_delta,
    OmegaEvaluator, RhoEvaluator, SigmaEvaluator, TauEvaluator,
};
pub use stats::{
    golomb_dickman_rho, golomb_dickman_shepp_lloyd, longest_cycle_cdf, mu_exact, sum_log_p,
    sum_recip_p, PartitionCycleSummary,
};
pub use xi_asymptotics::{xi, XiValue};
