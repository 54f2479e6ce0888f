//! Independent evaluation of `ρ(x0)` on the model space `L²(ℝ^{2n})`:
//! the second-order coefficient is sandwiched between Bergman projections
//! and evaluated at the origin with exact Gaussian moments.

mod fock;
mod identities;
mod oracle;

pub use fock::{
    gaussian_moment, gaussian_moment_quadrature, Key, ModelContext, PolyGauss, DEFAULT_DEGREE,
    KERNEL_RTOL, MIN_DEGREE,
};
pub use identities::{
    jet_identities, model_identities, monomial_keys, partial, phi, random_poly, spectrum_residual,
    IdentityCheck, IDENTITY_TOL,
};
pub use oracle::{
    displayed_terms, ladder_terms, q2_polynomial, q_polynomial, rho_oracle, rho_oracle_with,
    DisplayedTerms, LadderTerms, OracleBreakdown,
};
