//! Magnetic Laplacians on a flat or conformally flat 2-torus, discretized with
//! Peierls links on a uniform grid. The low cluster of `Δ_p - p τ` is isolated
//! and its moments are compared with quadratures of `ρ`.

mod cluster;
mod config;
mod eigen;
mod lattice;

pub use cluster::{
    cluster_for, density_compare, detect_cluster, inversions, linear_fit, rho_quadrature, write_csv,
    Cluster, ClusterReport, RhoQuadrature, TorusRun, CSV_HEADER,
};
pub use config::{EigenOptions, TorusConfig, TorusField, TorusMetric, TrigMode, FLUX_TOL};
pub use eigen::{dense_spectrum, low_spectrum, SolverKind, Spectrum};
pub use lattice::{assemble, Csr, LatticeOperator, HERMITIAN_TOL};
