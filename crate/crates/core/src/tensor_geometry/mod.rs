//! Pointwise geometry of a metric and magnetic field on a chart.

pub mod chart;
pub mod connection;
pub mod covariant;
pub mod endos;
pub mod jets;

pub use chart::{ChartField, MetricJet};
pub use connection::{christoffel, riemann, Connection, Riemann};
pub use covariant::{
    contract, covariant_jet, covariant_jet_fd, ChartJet, CovariantDerivs, GeometryJet, JetResiduals,
    JetSource,
};
pub use endos::{endos_at, mu0_estimate, PointEndos};
pub use jets::{MatJet, SelfAdjointEigen};
