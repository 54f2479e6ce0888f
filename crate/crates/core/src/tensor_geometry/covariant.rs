//! Covariant derivative jets of `B`, `|B|` and `J`, contracted with a
//! complexified frame.
//!
//! Coordinate-level data lives in [`ChartJet`]; [`GeometryJet`] holds its
//! contraction with one [`DiagonalFrame`]. Re-contracting with a rotated frame
//! is cheap, which is what the gauge-covariance checks use.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::chart::{ChartField, MetricJet};
use super::connection::{Connection, Riemann};
use super::endos::{b_endo_from, endos_at};
use super::jets::MatJet;
use crate::error::{Error, Result};
use crate::frame_spectral::DiagonalFrame;
use crate::tensors::{FrameIdx, Tensor3, Tensor4};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// First and second covariant derivatives of an endomorphism field in chart
/// coordinates: `first[a] = nabla_a Psi`, `second[a][b] = (nabla nabla Psi)_(a, b)`.
#[derive(Clone, Debug)]
pub struct CovariantDerivs {
    pub value: DMatrix<f64>,
    pub first: Vec<DMatrix<f64>>,
    pub second: Vec<Vec<DMatrix<f64>>>,
}

impl CovariantDerivs {
    /// `nabla_a Psi = d_a Psi + [Gamma_a, Psi]` and
    /// `(nabla nabla Psi)_(a,b) = d_a (nabla_b Psi) + [Gamma_a, nabla_b Psi] - Gamma^c_{ab} nabla_c Psi`.
    pub fn new(conn: &Connection, psi: &MatJet) -> Self {
        let m = psi.vars();
        let comm = |x: &DMatrix<f64>, y: &DMatrix<f64>| x * y - y * x;
        let first: Vec<DMatrix<f64>> = (0..m)
            .map(|a| &psi.d1[a] + comm(&conn.gamma[a], &psi.value))
            .collect();
        let second = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let mut t = &psi.d2[a][b]
                            + comm(&conn.dgamma[a][b], &psi.value)
                            + comm(&conn.gamma[b], &psi.d1[a])
                            + comm(&conn.gamma[a], &first[b]);
                        for (c, fc) in first.iter().enumerate() {
                            // Gamma^c_{ab} = (Gamma_a)^c_b
                            t -= fc * conn.gamma[a][(c, b)];
                        }
                        t
                    })
                    .collect()
            })
            .collect();
        CovariantDerivs {
            value: psi.value.clone(),
            first,
            second,
        }
    }
}

/// How the partial derivatives of the endomorphism fields were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum JetSource {
    Exact,
    FiniteDifference,
}

/// Everything coordinate-level at the base point.
#[derive(Clone, Debug)]
pub struct ChartJet {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub connection: Connection,
    pub riemann: Riemann,
    /// `B_endo`
    pub b: CovariantDerivs,
    /// `|B|`
    pub abs: CovariantDerivs,
    pub j: CovariantDerivs,
    pub source: JetSource,
}

fn metric_matjet(mj: &MetricJet) -> MatJet {
    MatJet {
        value: mj.g.clone(),
        d1: mj.dg.clone(),
        d2: mj.ddg.clone(),
    }
}

fn endo_jets(g_jet: &MatJet, b_form: &MatJet, x: &[f64]) -> Result<(MatJet, MatJet, MatJet)> {
    let ginv = g_jet
        .inverse()
        .ok_or_else(|| Error::DegenerateMetric { point: x.to_vec() })?;
    let b = ginv.mul(b_form).scale(-1.0);
    let b_sq = b.mul(&b).scale(-1.0);
    let abs = b_sq
        .sqrt_selfadjoint(&g_jet.value)
        .map_err(|_| Error::DegenerateField {
            point: x.to_vec(),
            det: b_form.value.determinant(),
        })?;
    let abs_inv = abs.inverse().ok_or_else(|| Error::DegenerateField {
        point: x.to_vec(),
        det: b_form.value.determinant(),
    })?;
    let j = b.mul(&abs_inv);
    Ok((b, abs, j))
}

impl ChartJet {
    /// Exact jets from the analytic field representation.
    pub fn exact(field: &ChartField, x: &[f64]) -> Result<Self> {
        // validates nondegeneracy with a proper error before differentiating
        endos_at(field, x)?;
        let mj = field.metric_jet(x);
        let connection = Connection::at(field, x)?;
        let (b, abs, j) = endo_jets(&metric_matjet(&mj), &field.b_form_jet(x), x)?;
        Ok(Self::assemble(x, mj.g, connection, &b, &abs, &j, JetSource::Exact))
    }

    /// Jets from central differences of pointwise `g` and `B_endo, |B|, J`
    /// with step `h`; an `O(h^2)` cross-check of [`ChartJet::exact`].
    pub fn finite_difference(field: &ChartField, x: &[f64], h: f64) -> Result<Self> {
        let m = field.dim();
        let fd = |f: &dyn Fn(&[f64]) -> Result<DMatrix<f64>>| -> Result<MatJet> {
            let shifted = |offs: &[(usize, f64)]| {
                let mut y = x.to_vec();
                for &(a, s) in offs {
                    y[a] += s * h;
                }
                f(&y)
            };
            let value = f(x)?;
            let mut d1 = Vec::with_capacity(m);
            let mut d2 = vec![vec![DMatrix::zeros(m, m); m]; m];
            for a in 0..m {
                let p = shifted(&[(a, 1.0)])?;
                let q = shifted(&[(a, -1.0)])?;
                d1.push((&p - &q) / (2.0 * h));
                d2[a][a] = (p + q - &value * 2.0) / (h * h);
            }
            for a in 0..m {
                for b in 0..a {
                    let pp = shifted(&[(a, 1.0), (b, 1.0)])?;
                    let pm = shifted(&[(a, 1.0), (b, -1.0)])?;
                    let mp = shifted(&[(a, -1.0), (b, 1.0)])?;
                    let mm = shifted(&[(a, -1.0), (b, -1.0)])?;
                    let v = (pp - pm - mp + mm) / (4.0 * h * h);
                    d2[a][b] = v.clone();
                    d2[b][a] = v;
                }
            }
            Ok(MatJet { value, d1, d2 })
        };
        let gj = fd(&|y| Ok(field.metric_at(y)))?;
        let mj = MetricJet {
            g: gj.value.clone(),
            dg: gj.d1.clone(),
            ddg: gj.d2.clone(),
        };
        let connection = Connection::from_metric_jet(&mj)
            .map_err(|_| Error::DegenerateMetric { point: x.to_vec() })?;
        let b = fd(&|y| {
            b_endo_from(&field.metric_at(y), &field.b_form_at(y))
                .ok_or_else(|| Error::DegenerateMetric { point: y.to_vec() })
        })?;
        let abs = fd(&|y| Ok(endos_at(field, y)?.abs_j))?;
        let j = fd(&|y| Ok(endos_at(field, y)?.j))?;
        Ok(Self::assemble(
            x,
            mj.g,
            connection,
            &b,
            &abs,
            &j,
            JetSource::FiniteDifference,
        ))
    }

    fn assemble(
        x: &[f64],
        g: DMatrix<f64>,
        connection: Connection,
        b: &MatJet,
        abs: &MatJet,
        j: &MatJet,
        source: JetSource,
    ) -> Self {
        let riemann = connection.curvature();
        ChartJet {
            x: x.to_vec(),
            g,
            b: CovariantDerivs::new(&connection, b),
            abs: CovariantDerivs::new(&connection, abs),
            j: CovariantDerivs::new(&connection, j),
            riemann,
            connection,
            source,
        }
    }

    /// `⟨(∇_{e_u} J) e_v, e_w⟩` in a real orthonormal frame, flattened `[u][v][w]`.
    pub fn real_frame_nabla_j(&self, e: &[DVector<f64>]) -> Vec<f64> {
        let m = e.len();
        let mut out = Vec::with_capacity(m * m * m);
        for eu in e {
            let dir: DMatrix<f64> = self
                .j
                .first
                .iter()
                .zip(eu.iter())
                .fold(DMatrix::zeros(m, m), |acc, (d, c)| acc + d * *c);
            let gd = &self.g * dir;
            for ev in e {
                let col = &gd * ev;
                for ew in e {
                    out.push(ew.dot(&col));
                }
            }
        }
        out
    }
}

/// Frame-contracted jets consumed by the closed-form and oracle evaluators.
///
/// Complex pairings are the bilinear extension of `g`, so
/// `⟨d/dz_j, d/dzbar_k⟩ = δ_jk / 2`.
#[derive(Clone, Debug)]
pub struct GeometryJet {
    pub n: usize,
    pub a: Vec<f64>,
    pub frame: DiagonalFrame,
    /// `⟨(∇_{E_u} 𝒥) E_v, E_w⟩`
    pub d_jc: Tensor3,
    /// `⟨(∇∇𝒥)_(E_u, E_v) E_w, E_x⟩`
    pub dd_jc: Tensor4,
    pub d_j: Tensor3,
    pub d_abs: Tensor3,
    pub dd_abs: Tensor4,
    /// `⟨R(E_u, E_v) E_w, E_x⟩`
    pub rc: Tensor4,
    pub tau0: f64,
    pub chart: Arc<ChartJet>,
}

/// Columns are the frame vectors `E_u` in chart coordinates.
fn frame_matrix(frame: &DiagonalFrame) -> DMatrix<Complex64> {
    let n = frame.n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if c < n {
            frame.w[c][r] * s
        } else {
            frame.w[c - n][r].conj() * s
        }
    })
}

struct Contractor {
    e: DMatrix<Complex64>,
    et_g: DMatrix<Complex64>,
}

impl Contractor {
    fn new(frame: &DiagonalFrame, g: &DMatrix<f64>) -> Self {
        let e = frame_matrix(frame);
        let gc = g.map(|v| Complex64::new(v, 0.0));
        let et_g = e.transpose() * gc;
        Contractor { e, et_g }
    }

    /// `F[(w, v)] = ⟨M E_v, E_w⟩`
    fn endo(&self, m: &DMatrix<f64>) -> DMatrix<Complex64> {
        &self.et_g * m.map(|v| Complex64::new(v, 0.0)) * &self.e
    }

    /// `Σ_a E_u^a M_a` for each frame index `u`.
    fn directional(&self, ms: &[DMatrix<f64>]) -> Vec<DMatrix<Complex64>> {
        let dim = self.e.nrows();
        (0..dim)
            .map(|u| {
                let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                for (a, m) in ms.iter().enumerate() {
                    let c = self.e[(a, u)];
                    if c != Complex64::new(0.0, 0.0) {
                        acc += self.endo(m) * c;
                    }
                }
                acc
            })
            .collect()
    }

    fn rank3(&self, first: &[DMatrix<f64>], factor: Complex64) -> Tensor3 {
        let dim = self.e.nrows();
        let dirs = self.directional(first);
        let mut t = Tensor3::zeros(dim);
        for [u, v, w] in t.clone().indices() {
            t[[u, v, w]] = dirs[u][(w, v)] * factor;
        }
        t
    }

    fn rank4(&self, second: &[Vec<DMatrix<f64>>], factor: Complex64) -> Tensor4 {
        let dim = self.e.nrows();
        // contract the second slot first: inner[a][u'] = Σ_b E_{u'}^b second[a][b]
        let inner: Vec<Vec<DMatrix<Complex64>>> =
            second.iter().map(|row| self.directional(row)).collect();
        let mut t = Tensor4::zeros(dim);
        for u in 0..dim {
            for v in 0..dim {
                let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                for (a, row) in inner.iter().enumerate() {
                    acc += &row[v] * self.e[(a, u)];
                }
                for w in 0..dim {
                    for x in 0..dim {
                        t[[u, v, w, x]] = acc[(x, w)] * factor;
                    }
                }
            }
        }
        t
    }
}

/// Frame-contract a chart jet.
pub fn contract(chart: Arc<ChartJet>, frame: &DiagonalFrame) -> GeometryJet {
    let c = Contractor::new(frame, &chart.g);
    let one = Complex64::new(1.0, 0.0);
    // 𝒥 = -i B
    let d_jc = c.rank3(&chart.b.first, -I);
    let dd_jc = c.rank4(&chart.b.second, -I);
    let d_j = c.rank3(&chart.j.first, one);
    let d_abs = c.rank3(&chart.abs.first, one);
    let dd_abs = c.rank4(&chart.abs.second, one);
    let rc = c.rank4(&chart.riemann.endo, one);
    let tau0 = 0.5 * chart.abs.value.trace();
    GeometryJet {
        n: frame.n,
        a: frame.a.clone(),
        frame: frame.clone(),
        d_jc,
        dd_jc,
        d_j,
        d_abs,
        dd_abs,
        rc,
        tau0,
        chart,
    }
}

/// Exact covariant jet at the frame's base point.
pub fn covariant_jet(field: &ChartField, frame: &DiagonalFrame) -> Result<GeometryJet> {
    let chart = ChartJet::exact(field, &frame.x0)?;
    Ok(contract(Arc::new(chart), frame))
}

/// Same as [`covariant_jet`] but from central differences with step `h`.
pub fn covariant_jet_fd(field: &ChartField, frame: &DiagonalFrame, h: f64) -> Result<GeometryJet> {
    let chart = ChartJet::finite_difference(field, &frame.x0, h)?;
    Ok(contract(Arc::new(chart), frame))
}

/// Residuals of the structural identities a valid jet satisfies.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct JetResiduals {
    pub skew: f64,
    pub closedness: f64,
    pub commutator: f64,
    pub abs_selfadjoint: f64,
    pub riemann: f64,
}

impl JetResiduals {
    pub fn max(&self) -> f64 {
        self.skew
            .max(self.closedness)
            .max(self.commutator)
            .max(self.abs_selfadjoint)
            .max(self.riemann)
    }
}

impl GeometryJet {
    pub fn idx(&self) -> FrameIdx {
        FrameIdx { n: self.n }
    }

    /// Eigenvalue of `𝒥` on frame vector `u`: `a_j` on `d/dz_j`, `-a_j` on `d/dzbar_j`.
    pub fn eigen_of(&self, u: usize) -> f64 {
        if u < self.n {
            self.a[u]
        } else {
            -self.a[u - self.n]
        }
    }

    /// `F[(w, v)] = ⟨𝒥 E_v, E_w⟩` from the pointwise field, independent of the eigen-decomposition.
    pub fn jc_frame(&self) -> DMatrix<Complex64> {
        Contractor::new(&self.frame, &self.chart.g).endo(&self.chart.b.value) * (-I)
    }

    /// Re-contract the same chart data with another frame.
    pub fn regauge(&self, frame: &DiagonalFrame) -> GeometryJet {
        contract(self.chart.clone(), frame)
    }

    pub fn residuals(&self) -> JetResiduals {
        let mut r = JetResiduals::default();
        for [u, v, w] in self.d_jc.indices() {
            let t = self.d_jc[[u, v, w]];
            r.skew = r.skew.max((t + self.d_jc[[u, w, v]]).norm());
            let cyc = t + self.d_jc[[v, w, u]] + self.d_jc[[w, u, v]];
            r.closedness = r.closedness.max(cyc.norm());
            let s = self.d_abs[[u, v, w]] - self.d_abs[[u, w, v]];
            r.abs_selfadjoint = r.abs_selfadjoint.max(s.norm());
        }
        for [u, v, w, x] in self.dd_jc.indices() {
            let lhs = self.dd_jc[[u, v, w, x]] - self.dd_jc[[v, u, w, x]];
            // ⟨[R(u,v), 𝒥] E_w, E_x⟩ with 𝒥 skew for the bilinear pairing
            let rhs = self.rc[[u, v, w, x]] * (self.eigen_of(w) + self.eigen_of(x));
            r.commutator = r.commutator.max((lhs - rhs).norm());
        }
        for [a, b, c, d] in self.rc.indices() {
            let t = self.rc[[a, b, c, d]];
            let worst = (t + self.rc[[b, a, c, d]])
                .norm()
                .max((t + self.rc[[a, b, d, c]]).norm())
                .max((t - self.rc[[c, d, a, b]]).norm())
                .max((t + self.rc[[b, c, a, d]] + self.rc[[c, a, b, d]]).norm());
            r.riemann = r.riemann.max(worst);
        }
        r
    }

    /// Largest absolute entry over all derivative arrays, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        [
            self.d_jc.max_abs(),
            self.dd_jc.max_abs(),
            self.d_abs.max_abs(),
            self.dd_abs.max_abs(),
            self.rc.max_abs(),
            self.a.iter().cloned().fold(0.0, f64::max),
        ]
        .into_iter()
        .fold(1.0, f64::max)
    }
}
