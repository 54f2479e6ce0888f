//! The diagonalizing frame of `𝒥` at the base point and the `q`-coefficient
//! tables built from `∇𝒥`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor_geometry::jets::cholesky_lower;
use crate::tensor_geometry::{GeometryJet, PointEndos};
use crate::tensors::{FrameIdx, Tensor3};

/// Relative width of an eigenvalue cluster treated as one degenerate `a_j`.
pub const CLUSTER_RTOL: f64 = 1e-9;

/// Orthonormal frame with `𝒥 w_j = a_j w_j`, `w_j = (e_{2j-1} - i e_{2j}) / √2`.
#[derive(Clone, Debug)]
pub struct DiagonalFrame {
    pub n: usize,
    /// Ascending.
    pub a: Vec<f64>,
    /// `e[2j]`, `e[2j+1]` pair with `w[j]`; chart coordinates.
    pub e: Vec<DVector<f64>>,
    /// Normalized so that `g(w_j, conj w_k) = δ_jk`.
    pub w: Vec<DVector<Complex64>>,
    pub x0: Vec<f64>,
}

#[derive(Serialize)]
struct FrameDto<'a> {
    n: usize,
    a: &'a [f64],
    x0: &'a [f64],
    e: Vec<Vec<f64>>,
    w_re: Vec<Vec<f64>>,
    w_im: Vec<Vec<f64>>,
}

impl Serialize for DiagonalFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrameDto {
            n: self.n,
            a: &self.a,
            x0: &self.x0,
            e: self.e.iter().map(|v| v.iter().copied().collect()).collect(),
            w_re: self.w.iter().map(|v| v.iter().map(|c| c.re).collect()).collect(),
            w_im: self.w.iter().map(|v| v.iter().map(|c| c.im).collect()).collect(),
        }
        .serialize(s)
    }
}

fn real_pair(w: &DVector<Complex64>) -> (DVector<f64>, DVector<f64>) {
    let s = std::f64::consts::SQRT_2;
    (w.map(|c| s * c.re), w.map(|c| -s * c.im))
}

/// Make the largest-magnitude entry (first one on ties) real positive.
fn fix_phase(v: &mut DVector<Complex64>) {
    let top = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(c) = v.iter().find(|c| c.norm() >= top * (1.0 - 1e-9)).copied() {
        let phase = c.conj() / c.norm();
        *v *= phase;
    }
}

/// Orthonormal basis of `span(cols)` chosen by projecting unit axes in order.
fn axis_basis(span: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    let dim = span[0].len();
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(span.len());
    for axis in 0..dim {
        if out.len() == span.len() {
            break;
        }
        // projection of the axis onto span
        let mut v = DVector::<Complex64>::zeros(dim);
        for s in span {
            v += s * s[axis].conj();
        }
        for b in &out {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            out.push(v / Complex64::new(nv, 0.0));
        }
    }
    // axes always span, but guard against a numerically thin projection
    if out.len() < span.len() {
        return span.to_vec();
    }
    out
}

/// Eigenframe of `𝒥` on `T^(1,0)` at `endos.x`.
pub fn build_frame(endos: &PointEndos) -> Result<DiagonalFrame> {
    let m = endos.g.nrows();
    let n = m / 2;
    let l = cholesky_lower(&endos.g)?;
    let lt = l.transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric { point: endos.x.clone() })?;
    // skew in an orthonormal gauge; -iB̂ is Hermitian with eigenvalues ±a_j
    let bh = &lt * &endos.b_endo * &lt_inv;
    let bh = (&bh - bh.transpose()) * 0.5;
    let h = bh.map(|v| Complex64::new(0.0, -v));
    let eig = h.symmetric_eigen();
    let mut pos: Vec<(f64, DVector<Complex64>)> = (0..m)
        .filter(|&i| eig.eigenvalues[i] > 0.0)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
        .collect();
    if pos.len() != n {
        return Err(Error::DegenerateField {
            point: endos.x.clone(),
            det: endos.b_endo.determinant(),
        });
    }
    pos.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut a = Vec::with_capacity(n);
    let mut hat: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pos[end].0 - pos[start].0 <= CLUSTER_RTOL * pos[end].0 {
            end += 1;
        }
        let span: Vec<_> = pos[start..end].iter().map(|p| p.1.clone()).collect();
        let mean = pos[start..end].iter().map(|p| p.0).sum::<f64>() / (end - start) as f64;
        for v in axis_basis(&span) {
            a.push(if end - start > 1 { mean } else { pos[start].0 });
            hat.push(v);
        }
        start = end;
    }

    let lt_inv_c = lt_inv.map(|v| Complex64::new(v, 0.0));
    let mut w = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(m);
    for v in hat {
        let mut wj = &lt_inv_c * v;
        fix_phase(&mut wj);
        let (e1, e2) = real_pair(&wj);
        e.push(e1);
        e.push(e2);
        w.push(wj);
    }
    Ok(DiagonalFrame {
        n,
        a,
        e,
        w,
        x0: endos.x.clone(),
    })
}

impl DiagonalFrame {
    /// `w'_k = Σ_j u[(j, k)] w_j`. `u` must be unitary and only mix equal `a_j`.
    pub fn rotated(&self, u: &DMatrix<Complex64>) -> Result<DiagonalFrame> {
        let n = self.n;
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::Precondition("rotation has the wrong size".into()));
        }
        let unit = (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)).norm();
        if unit > 1e-10 {
            return Err(Error::Precondition(format!(
                "rotation is not unitary (defect {unit:.2e})"
            )));
        }
        for j in 0..n {
            for k in 0..n {
                let gap = (self.a[j] - self.a[k]).abs();
                if u[(j, k)].norm() > 1e-12 && gap > CLUSTER_RTOL * self.a[j].max(self.a[k]) {
                    return Err(Error::Precondition(
                        "rotation mixes distinct eigenvalues".into(),
                    ));
                }
            }
        }
        let w: Vec<DVector<Complex64>> = (0..n)
            .map(|k| {
                (0..n).fold(DVector::zeros(self.w[0].len()), |acc, j| {
                    acc + &self.w[j] * u[(j, k)]
                })
            })
            .collect();
        let mut e = Vec::with_capacity(2 * n);
        for wj in &w {
            let (e1, e2) = real_pair(wj);
            e.push(e1);
            e.push(e2);
        }
        Ok(DiagonalFrame {
            n,
            a: self.a.clone(),
            e,
            w,
            x0: self.x0.clone(),
        })
    }

    /// Worst residual over orthonormality, `J e_{2j-1} = e_{2j}`,
    /// `𝒥 w_j = a_j w_j`, `|𝒥| w_j = a_j w_j` and `τ = Σ a_j`.
    pub fn invariant_residual(&self, endos: &PointEndos) -> f64 {
        let g = &endos.g;
        let mut worst: f64 = 0.0;
        for (k, ek) in self.e.iter().enumerate() {
            for (l, el) in self.e.iter().enumerate() {
                let d = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((ek.dot(&(g * el)) - d).abs());
            }
        }
        for j in 0..self.n {
            worst = worst.max((&endos.j * &self.e[2 * j] - &self.e[2 * j + 1]).amax());
            let bc = endos.b_endo.map(|v| Complex64::new(v, 0.0));
            let ac = endos.abs_j.map(|v| Complex64::new(v, 0.0));
            let wj = &self.w[j];
            // 𝒥 = -iB
            let jw = (&bc * wj) * Complex64::new(0.0, -1.0);
            worst = worst.max((jw - wj.map(|c| c * self.a[j])).camax());
            worst = worst.max((&ac * wj - wj.map(|c| c * self.a[j])).camax());
        }
        worst.max((endos.tau - self.a.iter().sum::<f64>()).abs())
    }
}

/// `q_{j,kl}`, `q_{j,k l̄}`, `q_{j,k̄ l̄}`, each indexed `[j, k, l]`.
#[derive(Clone, Debug, Serialize)]
pub struct QCoeffs {
    pub n: usize,
    pub q_hol: Tensor3,
    pub q_mix: Tensor3,
    pub q_anti: Tensor3,
}

pub fn q_coefficients(jet: &GeometryJet) -> QCoeffs {
    let n = jet.n;
    let f = FrameIdx { n };
    let d = &jet.d_jc;
    let mut q_hol = Tensor3::zeros(n);
    let mut q_mix = Tensor3::zeros(n);
    let mut q_anti = Tensor3::zeros(n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                q_hol[[j, k, l]] = d[[f.z(k), f.z(l), f.zb(j)]];
                q_mix[[j, k, l]] = d[[f.z(k), f.zb(l), f.zb(j)]] + d[[f.zb(l), f.z(k), f.zb(j)]];
                q_anti[[j, k, l]] = d[[f.zb(k), f.zb(l), f.zb(j)]];
            }
        }
    }
    QCoeffs {
        n,
        q_hol,
        q_mix,
        q_anti,
    }
}

impl QCoeffs {
    pub fn zeros(n: usize) -> Self {
        QCoeffs {
            n,
            q_hol: Tensor3::zeros(n),
            q_mix: Tensor3::zeros(n),
            q_anti: Tensor3::zeros(n),
        }
    }

    /// Worst residual of the three antiholomorphic identities:
    /// `q_{l,k̄j̄} = -q_{j,k̄l̄}`, `q_{j,k̄j̄} = 0`, and the cyclic sum.
    pub fn antisymmetry_residual(&self) -> f64 {
        let q = &self.q_anti;
        let mut worst: f64 = 0.0;
        for [j, k, l] in q.indices() {
            worst = worst.max((q[[l, k, j]] + q[[j, k, l]]).norm());
            worst = worst.max((q[[j, k, l]] + q[[l, j, k]] + q[[k, l, j]]).norm());
            if j == l {
                worst = worst.max(q[[j, k, j]].norm());
            }
        }
        worst
    }

    /// Worst residual of the two derived identities for `|q_{j,k̄l̄} ± q_{j,l̄k̄}|^2`.
    pub fn derived_residual(&self) -> f64 {
        let q = &self.q_anti;
        let mut worst: f64 = 0.0;
        for [j, k, l] in q.indices() {
            let (x, y, z) = (q[[j, k, l]], q[[j, l, k]], q[[k, j, l]]);
            let cross = (x.conj() * y + x * y.conj()).re;
            let r1 = cross - (x.norm_sqr() + y.norm_sqr() - z.norm_sqr());
            let r2 = (x + y).norm_sqr() - (2.0 * x.norm_sqr() + 2.0 * y.norm_sqr() - z.norm_sqr());
            worst = worst.max(r1.abs()).max(r2.abs());
        }
        worst
    }

    /// Largest `|q|` entry over all three tables.
    pub fn scale(&self) -> f64 {
        self.q_hol
            .max_abs()
            .max(self.q_mix.max_abs())
            .max(self.q_anti.max_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::tensor_geometry::{endos_at, ChartField};

    fn constant_field(a: &[f64]) -> ChartField {
        let n = a.len();
        let m = 2 * n;
        let mut pot = vec![ScalarField::zero(m); m];
        for (j, &aj) in a.iter().enumerate() {
            let (x, y) = (2 * j, 2 * j + 1);
            let mut px = vec![0; m];
            px[y] = 1;
            let mut py = vec![0; m];
            py[x] = 1;
            pot[x] = ScalarField::monomial(m, -0.5 * aj, &px);
            pot[y] = ScalarField::monomial(m, 0.5 * aj, &py);
        }
        ChartField::new(n, ChartField::flat_metric(n), pot, vec![0.0; m]).unwrap()
    }

    #[test]
    fn planar_frame_matches_hand_computation() {
        let f = constant_field(&[1.7]);
        let endos = endos_at(&f, &f.x0).unwrap();
        let fr = build_frame(&endos).unwrap();
        assert!((fr.a[0] - 1.7).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // w = (∂x - i∂y)/√2 up to phase; the phase fix picks exactly this one
        assert!((fr.w[0][0] - Complex64::new(s, 0.0)).norm() < 1e-14);
        assert!((fr.w[0][1] - Complex64::new(0.0, -s)).norm() < 1e-14);
        assert!(fr.invariant_residual(&endos) < 1e-13);
    }

    #[test]
    fn block_diagonal_frame_is_sorted() {
        let f = constant_field(&[3.0, 1.25]);
        let endos = endos_at(&f, &f.x0).unwrap();
        let fr = build_frame(&endos).unwrap();
        assert_eq!(fr.a.len(), 2);
        assert!((fr.a[0] - 1.25).abs() < 1e-13 && (fr.a[1] - 3.0).abs() < 1e-13);
        assert!(fr.invariant_residual(&endos) < 1e-13);
    }

    #[test]
    fn degenerate_frame_is_deterministic_and_rotatable() {
        let f = constant_field(&[2.0, 2.0]);
        let endos = endos_at(&f, &f.x0).unwrap();
        let fr = build_frame(&endos).unwrap();
        assert!(fr.invariant_residual(&endos) < 1e-13);
        let again = build_frame(&endos).unwrap();
        assert_eq!(fr.w, again.w);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let u = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(c, 0.0),
            ],
        );
        let r = fr.rotated(&u).unwrap();
        assert!(r.invariant_residual(&endos) < 1e-13);
    }
}
