//! Second-order Taylor jets of matrix-valued functions.
//!
//! A [`MatJet`] carries `M(x0)`, all first partials and all second partials.
//! Products, inverses and square roots propagate exactly, which is how the
//! pointwise matrix functions `|B|` and `J = B |B|^{-1}` get their derivatives.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MatJet {
    pub value: DMatrix<f64>,
    /// `d1[a] = d_a M`
    pub d1: Vec<DMatrix<f64>>,
    /// `d2[a][b] = d_a d_b M` (symmetric in `a, b`)
    pub d2: Vec<Vec<DMatrix<f64>>>,
}

impl MatJet {
    pub fn vars(&self) -> usize {
        self.d1.len()
    }

    pub fn constant(value: DMatrix<f64>, vars: usize) -> Self {
        let z = DMatrix::zeros(value.nrows(), value.ncols());
        MatJet {
            d1: vec![z.clone(); vars],
            d2: vec![vec![z; vars]; vars],
            value,
        }
    }

    pub fn map(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> MatJet {
        MatJet {
            value: f(&self.value),
            d1: self.d1.iter().map(&f).collect(),
            d2: self
                .d2
                .iter()
                .map(|row| row.iter().map(&f).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> MatJet {
        self.map(|m| m * c)
    }

    pub fn mul(&self, other: &MatJet) -> MatJet {
        let m = self.vars();
        let (a, b) = (self, other);
        let d1 = (0..m)
            .map(|i| &a.d1[i] * &b.value + &a.value * &b.d1[i])
            .collect();
        let d2 = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        &a.d2[i][j] * &b.value
                            + &a.d1[i] * &b.d1[j]
                            + &a.d1[j] * &b.d1[i]
                            + &a.value * &b.d2[i][j]
                    })
                    .collect()
            })
            .collect();
        MatJet {
            value: &a.value * &b.value,
            d1,
            d2,
        }
    }

    pub fn inverse(&self) -> Option<MatJet> {
        let x = self.value.clone().try_inverse()?;
        let m = self.vars();
        let d1: Vec<DMatrix<f64>> = (0..m).map(|i| -(&x * &self.d1[i] * &x)).collect();
        let d2 = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        &x * &self.d1[j] * &x * &self.d1[i] * &x
                            + &x * &self.d1[i] * &x * &self.d1[j] * &x
                            - &x * &self.d2[i][j] * &x
                    })
                    .collect()
            })
            .collect();
        Some(MatJet { value: x, d1, d2 })
    }

    /// Square root of a `g`-self-adjoint positive definite matrix field.
    ///
    /// The value is taken in a `g`-orthonormal gauge (Cholesky of `g`), where
    /// the operator is symmetric. Derivatives solve the Sylvester equations
    /// `S' S + S S' = M'` and `S'' S + S S'' = M'' - S'_a S'_b - S'_b S'_a`
    /// in the eigenbasis of `S`, which stay well posed under eigenvalue
    /// degeneracy because `s_i + s_j > 0`.
    pub fn sqrt_selfadjoint(&self, g: &DMatrix<f64>) -> Result<MatJet> {
        let gauge = SelfAdjointEigen::new(&self.value, g)?;
        if gauge.values.iter().any(|&v| v <= 0.0) {
            return Err(Error::Precondition(
                "square root of a non-positive operator".into(),
            ));
        }
        let s: Vec<f64> = gauge.values.iter().map(|v| v.sqrt()).collect();
        let value = gauge.reassemble(&s);
        let sylvester = |c: &DMatrix<f64>| -> DMatrix<f64> {
            let mut t = &gauge.inv_vectors * c * &gauge.vectors;
            for i in 0..t.nrows() {
                for j in 0..t.ncols() {
                    t[(i, j)] /= s[i] + s[j];
                }
            }
            &gauge.vectors * t * &gauge.inv_vectors
        };
        let m = self.vars();
        let d1: Vec<DMatrix<f64>> = self.d1.iter().map(|c| sylvester(c)).collect();
        let d2 = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let rhs = &self.d2[i][j] - &d1[i] * &d1[j] - &d1[j] * &d1[i];
                        sylvester(&rhs)
                    })
                    .collect()
            })
            .collect();
        Ok(MatJet { value, d1, d2 })
    }
}

/// Eigendecomposition of a `g`-self-adjoint operator `M` in chart coordinates:
/// `M = V diag(values) V^{-1}` with `V` `g`-orthonormal columns.
#[derive(Clone, Debug)]
pub struct SelfAdjointEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub inv_vectors: DMatrix<f64>,
}

impl SelfAdjointEigen {
    pub fn new(op: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<Self> {
        let l = cholesky_lower(g)?;
        let lt = l.transpose();
        let lt_inv = lt
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateMetric { point: vec![] })?;
        let mut sym = &lt * op * &lt_inv;
        // symmetrize away rounding
        sym = (&sym + sym.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let q = DMatrix::from_fn(op.nrows(), op.ncols(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok(SelfAdjointEigen {
            values,
            vectors: &lt_inv * &q,
            inv_vectors: q.transpose() * &lt,
        })
    }

    pub fn reassemble(&self, values: &[f64]) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
        &self.vectors * d * &self.inv_vectors
    }
}

pub fn cholesky_lower(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (g + g.transpose()) * 0.5;
    sym.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::DegenerateMetric { point: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;

    // M(x) = P(x) for a 2x2 SPD polynomial family; compare jet derivatives with
    // finite differences of the pointwise square root.
    fn family(x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                2.0 + x[0] + 0.3 * x[1] * x[1],
                0.4 * x[0] * x[1] + 0.1,
                0.4 * x[0] * x[1] + 0.1,
                1.5 - 0.5 * x[1] + x[0] * x[0],
            ],
        )
    }

    fn jet_of_family(x: &[f64]) -> MatJet {
        let h = 1e-4;
        let f = |y: &[f64]| family(y);
        let mut d1 = Vec::new();
        let mut d2 = vec![Vec::new(); 2];
        for a in 0..2 {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[a] += h;
            m[a] -= h;
            d1.push((f(&p) - f(&m)) / (2.0 * h));
        }
        // exact second derivatives of the quadratic family
        let dd = [
            [
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]),
                DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.4, 0.0]),
            ],
            [
                DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.4, 0.0]),
                DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.0, 0.0]),
            ],
        ];
        for a in 0..2 {
            for b in 0..2 {
                d2[a].push(dd[a][b].clone());
            }
        }
        MatJet {
            value: f(x),
            d1,
            d2,
        }
    }

    fn pointwise_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
        let e = m.clone().symmetric_eigen();
        let s = e.eigenvalues.map(|v| v.sqrt());
        &e.eigenvectors * DMatrix::from_diagonal(&s) * e.eigenvectors.transpose()
    }

    #[test]
    fn sqrt_jet_matches_finite_differences() {
        let x = [0.2, -0.3];
        let g = DMatrix::identity(2, 2);
        let jet = jet_of_family(&x).sqrt_selfadjoint(&g).unwrap();
        assert!((&jet.value * &jet.value - family(&x)).norm() < 1e-12);
        let h = 1e-4;
        for a in 0..2 {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[a] += h;
            m[a] -= h;
            let fd = (pointwise_sqrt(&family(&p)) - pointwise_sqrt(&family(&m))) / (2.0 * h);
            assert!((fd - &jet.d1[a]).norm() < 1e-7);
            for b in 0..2 {
                let mut pp = x.to_vec();
                let mut pm = x.to_vec();
                let mut mp = x.to_vec();
                let mut mm = x.to_vec();
                pp[a] += h;
                pp[b] += h;
                pm[a] += h;
                pm[b] -= h;
                mp[a] -= h;
                mp[b] += h;
                mm[a] -= h;
                mm[b] -= h;
                let fd2 = (pointwise_sqrt(&family(&pp)) - pointwise_sqrt(&family(&pm))
                    - pointwise_sqrt(&family(&mp))
                    + pointwise_sqrt(&family(&mm)))
                    / (4.0 * h * h);
                assert!((fd2 - &jet.d2[a][b]).norm() < 1e-5, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn inverse_jet_is_consistent() {
        let x = [0.1, 0.4];
        let j = jet_of_family(&x);
        let inv = j.inverse().unwrap();
        let prod = j.mul(&inv);
        let id = DMatrix::<f64>::identity(2, 2);
        assert!((&prod.value - id).norm() < 1e-13);
        for a in 0..2 {
            assert!(prod.d1[a].norm() < 1e-12);
            for b in 0..2 {
                assert!(prod.d2[a][b].norm() < 1e-11);
            }
        }
    }
}
