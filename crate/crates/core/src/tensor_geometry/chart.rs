use nalgebra::DMatrix;

use super::jets::MatJet;
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Metric `g` and magnetic potential `A` on a chart of `R^{2n}`.
///
/// The magnetic 2-form is `B = dA` with `B_ij = d_i A_j - d_j A_i`, so it is
/// closed by construction.
#[derive(Clone, Debug)]
pub struct ChartField {
    pub n: usize,
    /// Row-major `2n x 2n` entries; `g[i * 2n + j]` and `g[j * 2n + i]` must agree.
    pub g: Vec<ScalarField>,
    /// `2n` components of the potential.
    pub a: Vec<ScalarField>,
    pub x0: Vec<f64>,
}

/// `g`, its first and second partials at one point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

impl ChartField {
    /// Assemble a field, checking shapes and symmetry of the metric tables.
    pub fn new(n: usize, g: Vec<ScalarField>, a: Vec<ScalarField>, x0: Vec<f64>) -> Result<Self> {
        let m = 2 * n;
        if n == 0 {
            return Err(Error::config("n", "half-dimension must be positive"));
        }
        if g.len() != m * m {
            return Err(Error::config("g", format!("expected {} entries", m * m)));
        }
        if a.len() != m {
            return Err(Error::config("A", format!("expected {m} components")));
        }
        if x0.len() != m {
            return Err(Error::config("x0", format!("expected {m} coordinates")));
        }
        if g.iter().chain(a.iter()).any(|f| f.dim != m) {
            return Err(Error::config("g", "field dimension does not match 2n"));
        }
        let field = ChartField { n, g, a, x0 };
        // symmetry spot check at the base point and a nearby point
        for x in [field.x0.clone(), field.x0.iter().map(|v| v + 0.137).collect()] {
            for i in 0..m {
                for j in 0..i {
                    let d = field.g[i * m + j].eval(&x) - field.g[j * m + i].eval(&x);
                    if d.abs() > 1e-12 {
                        return Err(Error::config(
                            format!("g[{i}][{j}]"),
                            "metric table is not symmetric",
                        ));
                    }
                }
            }
        }
        Ok(field)
    }

    /// Flat metric `g = Id`.
    pub fn flat_metric(n: usize) -> Vec<ScalarField> {
        let m = 2 * n;
        (0..m * m)
            .map(|k| ScalarField::constant(m, if k / m == k % m { 1.0 } else { 0.0 }))
            .collect()
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn with_base_point(&self, x0: &[f64]) -> ChartField {
        ChartField {
            x0: x0.to_vec(),
            ..self.clone()
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| self.g[i * m + j].eval(x))
    }

    pub fn metric_jet(&self, x: &[f64]) -> MetricJet {
        let m = self.dim();
        let ent = |i: usize, j: usize, axes: &[usize]| self.g[i * m + j].deriv(x, axes);
        MetricJet {
            g: DMatrix::from_fn(m, m, |i, j| ent(i, j, &[])),
            dg: (0..m)
                .map(|a| DMatrix::from_fn(m, m, |i, j| ent(i, j, &[a])))
                .collect(),
            ddg: (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| DMatrix::from_fn(m, m, |i, j| ent(i, j, &[a, b])))
                        .collect()
                })
                .collect(),
        }
    }

    /// Components `B_ij(x)` of the 2-form.
    pub fn b_form_at(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| {
            self.a[j].deriv(x, &[i]) - self.a[i].deriv(x, &[j])
        })
    }

    /// Second-order jet of `B_ij` (uses third derivatives of `A`).
    pub fn b_form_jet(&self, x: &[f64]) -> MatJet {
        let m = self.dim();
        let comp = |i: usize, j: usize, extra: &[usize]| {
            let mut ai = vec![i];
            ai.extend_from_slice(extra);
            let mut aj = vec![j];
            aj.extend_from_slice(extra);
            self.a[j].deriv(x, &ai) - self.a[i].deriv(x, &aj)
        };
        MatJet {
            value: DMatrix::from_fn(m, m, |i, j| comp(i, j, &[])),
            d1: (0..m)
                .map(|a| DMatrix::from_fn(m, m, |i, j| comp(i, j, &[a])))
                .collect(),
            d2: (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| DMatrix::from_fn(m, m, |i, j| comp(i, j, &[a, b])))
                        .collect()
                })
                .collect(),
        }
    }

    /// Largest `|dB|` component at `x`; identically zero for `B = dA`.
    pub fn closedness_residual(&self, x: &[f64]) -> f64 {
        let jet = self.b_form_jet(x);
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let r = jet.d1[k][(i, j)] + jet.d1[i][(j, k)] + jet.d1[j][(k, i)];
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// Check positive definiteness of `g` at each sample point.
    pub fn check_metric(&self, samples: &[Vec<f64>]) -> Result<()> {
        for x in samples {
            let g = self.metric_at(x);
            let sym = (&g + g.transpose()) * 0.5;
            if sym.cholesky().is_none() {
                return Err(Error::DegenerateMetric { point: x.clone() });
            }
        }
        Ok(())
    }
}
