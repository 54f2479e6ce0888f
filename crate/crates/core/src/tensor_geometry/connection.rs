//! Levi-Civita connection and curvature from metric jets.

use nalgebra::DMatrix;

use super::chart::{ChartField, MetricJet};
use crate::error::{Error, Result};

/// Christoffel symbols and their first partials at a point.
///
/// `gamma[a]` is the matrix `(Gamma_a)^k_j = Gamma^k_{a j}`, i.e. the
/// connection matrix in direction `d_a`, so that
/// `nabla_a V = d_a V + Gamma_a V`.
#[derive(Clone, Debug)]
pub struct Connection {
    pub gamma: Vec<DMatrix<f64>>,
    /// `dgamma[b][a] = d_b Gamma_a`
    pub dgamma: Vec<Vec<DMatrix<f64>>>,
}

impl Connection {
    pub fn from_metric_jet(jet: &MetricJet) -> Result<Self> {
        let m = jet.g.nrows();
        let ginv = jet
            .g
            .clone()
            .try_inverse()
            .filter(|_| (&jet.g + jet.g.transpose()).scale(0.5).cholesky().is_some())
            .ok_or_else(|| Error::DegenerateMetric { point: vec![] })?;
        let dginv: Vec<DMatrix<f64>> = jet.dg.iter().map(|d| -(&ginv * d * &ginv)).collect();

        // lowered symbols Gamma_{l,ij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij) and partials
        let lowered = |l: usize, i: usize, j: usize| {
            0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)])
        };
        let dlowered = |b: usize, l: usize, i: usize, j: usize| {
            0.5 * (jet.ddg[b][i][(j, l)] + jet.ddg[b][j][(i, l)] - jet.ddg[b][l][(i, j)])
        };

        let gamma = (0..m)
            .map(|a| {
                DMatrix::from_fn(m, m, |k, j| {
                    (0..m).map(|l| ginv[(k, l)] * lowered(l, a, j)).sum()
                })
            })
            .collect();
        let dgamma = (0..m)
            .map(|b| {
                (0..m)
                    .map(|a| {
                        DMatrix::from_fn(m, m, |k, j| {
                            (0..m)
                                .map(|l| {
                                    dginv[b][(k, l)] * lowered(l, a, j)
                                        + ginv[(k, l)] * dlowered(b, l, a, j)
                                })
                                .sum()
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(Connection { gamma, dgamma })
    }

    pub fn at(field: &ChartField, x: &[f64]) -> Result<Self> {
        Self::from_metric_jet(&field.metric_jet(x)).map_err(|e| match e {
            Error::DegenerateMetric { .. } => Error::DegenerateMetric { point: x.to_vec() },
            other => other,
        })
    }

    /// `Gamma^k_{ij}` as a nested array `[k][i][j]`.
    pub fn symbols(&self) -> Vec<Vec<Vec<f64>>> {
        let m = self.gamma.len();
        (0..m)
            .map(|k| {
                (0..m)
                    .map(|i| (0..m).map(|j| self.gamma[i][(k, j)]).collect())
                    .collect()
            })
            .collect()
    }

    /// Curvature endomorphisms `R(d_i, d_j) = d_i Gamma_j - d_j Gamma_i + [Gamma_i, Gamma_j]`.
    pub fn curvature(&self) -> Riemann {
        let m = self.gamma.len();
        let endo = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        &self.dgamma[i][j] - &self.dgamma[j][i] + &self.gamma[i] * &self.gamma[j]
                            - &self.gamma[j] * &self.gamma[i]
                    })
                    .collect()
            })
            .collect();
        Riemann { endo }
    }
}

/// Riemann tensor as endomorphisms: `endo[i][j][(l, k)] = R^l_{k i j}`.
#[derive(Clone, Debug)]
pub struct Riemann {
    pub endo: Vec<Vec<DMatrix<f64>>>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.endo.len()
    }

    /// `R^l_{kij}`
    pub fn component(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        self.endo[i][j][(l, k)]
    }

    /// `R_{lkij} = g_{lm} R^m_{kij}`
    pub fn lowered(&self, g: &DMatrix<f64>, l: usize, k: usize, i: usize, j: usize) -> f64 {
        (0..self.dim())
            .map(|m| g[(l, m)] * self.endo[i][j][(m, k)])
            .sum()
    }

    /// Sectional curvature of the plane spanned by coordinate axes `i, j`.
    pub fn sectional(&self, g: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        // <R(d_i, d_j) d_j, d_i> / (g_ii g_jj - g_ij^2)
        self.lowered(g, i, j, i, j) / (g[(i, i)] * g[(j, j)] - g[(i, j)].powi(2))
    }

    /// Worst violation of the algebraic Riemann symmetries and first Bianchi identity.
    pub fn symmetry_residual(&self, g: &DMatrix<f64>) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let r = self.lowered(g, a, b, c, d);
                        worst = worst
                            .max((r + self.lowered(g, a, b, d, c)).abs())
                            .max((r + self.lowered(g, b, a, c, d)).abs())
                            .max((r - self.lowered(g, c, d, a, b)).abs());
                        let bianchi = self.component(a, b, c, d)
                            + self.component(a, c, d, b)
                            + self.component(a, d, b, c);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn christoffel(field: &ChartField, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    Ok(Connection::at(field, x)?.symbols())
}

pub fn riemann(field: &ChartField, x: &[f64]) -> Result<Riemann> {
    Ok(Connection::at(field, x)?.curvature())
}
