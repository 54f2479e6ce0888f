use nalgebra::DMatrix;
use serde::Serialize;

use super::chart::ChartField;
use super::jets::SelfAdjointEigen;
use crate::error::{Error, Result};

/// Pointwise endomorphisms built from `g` and `B` at one chart point.
#[derive(Clone, Debug, Serialize)]
pub struct PointEndos {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    /// `B(u, v) = g(B_endo u, v)`
    pub b_endo: DMatrix<f64>,
    /// `J = B (B^* B)^{-1/2}`
    pub j: DMatrix<f64>,
    /// `|J| = (B^* B)^{1/2}`, eigenvalues `a_j` each twice
    pub abs_j: DMatrix<f64>,
    pub tau: f64,
}

/// Relative floor below which the smallest eigenvalue of `|B|` counts as zero.
const NONDEGENERACY_RTOL: f64 = 1e-10;

/// `B_endo = -g^{-1} B_form` (from `B_ij = g_{kj} B^k_i` and skewness).
pub(crate) fn b_endo_from(g: &DMatrix<f64>, b_form: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    g.clone().try_inverse().map(|ginv| -(ginv * b_form))
}

pub fn endos_at(field: &ChartField, x: &[f64]) -> Result<PointEndos> {
    let g = field.metric_at(x);
    let b_form = field.b_form_at(x);
    let b_endo =
        b_endo_from(&g, &b_form).ok_or_else(|| Error::DegenerateMetric { point: x.to_vec() })?;
    let b_sq = -(&b_endo * &b_endo);
    let eig = SelfAdjointEigen::new(&b_sq, &g)
        .map_err(|_| Error::DegenerateMetric { point: x.to_vec() })?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let bottom = eig.values[0];
    if !(bottom > NONDEGENERACY_RTOL * top) || top == 0.0 {
        return Err(Error::DegenerateField {
            point: x.to_vec(),
            det: b_form.determinant(),
        });
    }
    let s: Vec<f64> = eig.values.iter().map(|v| v.sqrt()).collect();
    let abs_j = eig.reassemble(&s);
    let inv_s: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    let j = &b_endo * eig.reassemble(&inv_s);
    let tau = 0.5 * abs_j.trace();
    Ok(PointEndos {
        x: x.to_vec(),
        g,
        b_endo,
        j,
        abs_j,
        tau,
    })
}

impl PointEndos {
    /// Eigenvalues of `|J|` (each `a_j` appears twice), ascending.
    pub fn abs_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(SelfAdjointEigen::new(&self.abs_j, &self.g)?.values)
    }

    /// Worst residual over the pointwise invariants: g-skewness of `B_endo`,
    /// `J^2 = -1`, `g`-orthogonality of `J`, `g`-self-adjointness of `|J|`,
    /// and `tau = tr|J| / 2`.
    pub fn invariant_residual(&self) -> f64 {
        let m = self.g.nrows();
        let id = DMatrix::<f64>::identity(m, m);
        let skew = (&self.g * &self.b_endo + self.b_endo.transpose() * &self.g).amax();
        let jsq = (&self.j * &self.j + &id).amax();
        let orth = (self.j.transpose() * &self.g * &self.j - &self.g).amax();
        let ga = &self.g * &self.abs_j;
        let selfadj = (&ga - ga.transpose()).amax();
        let tau = (self.tau - 0.5 * self.abs_j.trace()).abs();
        skew.max(jsq).max(orth).max(selfadj).max(tau)
    }
}

/// `mu_0` over a sample grid: minimum of the smallest eigenvalue of `|J|`.
pub fn mu0_estimate(field: &ChartField, grid: &[Vec<f64>]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Precondition("mu0 estimate needs a non-empty grid".into()));
    }
    let mut best = f64::INFINITY;
    for x in grid {
        let e = endos_at(field, x)?;
        best = best.min(e.abs_eigenvalues()?[0]);
    }
    Ok(best)
}
