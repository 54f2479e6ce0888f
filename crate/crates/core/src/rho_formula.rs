//! Closed-form evaluation of the spectral density `ρ(x0)` from a
//! [`GeometryJet`], in the `𝒥` form, in the polar form `𝒥 = -i J |𝒥|`, and in
//! the two special cases `|𝒥| = 2π Id` and `∇J = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor_geometry::GeometryJet;
use crate::tensors::{FrameIdx, Tensor3};

/// Relative size of the imaginary residue accepted in real-valued sums.
pub const IM_RTOL: f64 = 1e-8;
/// Relative size below which a derivative array counts as vanishing in the
/// special-case preconditions.
pub const PRECONDITION_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    PolarForm,
    SpecialCase,
}

/// `ρ = A0 + A1 + J1 + J2` with each group kept separately.
#[derive(Clone, Debug, Serialize)]
pub struct RhoBreakdown {
    pub a: Vec<f64>,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    pub rho: f64,
    pub provenance: Provenance,
    pub im_residue: f64,
    /// Raw groups in evaluation order; for the polar form these are its seven groups.
    pub groups: Vec<f64>,
}

struct Acc {
    re: Vec<f64>,
    im: f64,
    mag: f64,
}

impl Acc {
    fn new(k: usize) -> Self {
        Acc {
            re: vec![0.0; k],
            im: 0.0,
            mag: 0.0,
        }
    }

    fn finish(&self, a: &[f64], provenance: Provenance, groups: [f64; 4]) -> Result<RhoBreakdown> {
        if self.im > IM_RTOL * (1.0 + self.mag) {
            return Err(Error::InconsistentJet {
                what: "imaginary part of a real-valued group".into(),
                residual: self.im,
            });
        }
        let [a0, a1, j1, j2] = groups;
        let rho = a0 + a1 + j1 + j2;
        if !rho.is_finite() {
            return Err(Error::InconsistentJet {
                what: "non-finite density".into(),
                residual: f64::NAN,
            });
        }
        Ok(RhoBreakdown {
            a: a.to_vec(),
            a0,
            a1,
            j1,
            j2,
            rho,
            provenance,
            im_residue: self.im,
            groups: self.re.clone(),
        })
    }

    fn add(&mut self, slot: usize, v: Complex64) {
        self.re[slot] += v.re;
        self.mag += v.norm();
    }

    fn close_complex(&mut self, slot_sum: Complex64) {
        self.im = self.im.max(slot_sum.im.abs());
    }
}

/// Weight of the `|⟨(∇_{z_k}𝒥) ∂z̄_j, ∂z̄_l⟩|²` group relative to `8/(a_k(a_j+a_l))`.
///
/// `q_{j,k l̄} - q_{l,k j̄} = -3 ⟨(∇_{z_k}𝒥) ∂z̄_j, ∂z̄_l⟩` by skewness and
/// closedness, so the `8/9` weight on `|q_{j,k l̄} - q_{l,k j̄}|²` becomes `8`.
pub const J1_WEIGHT: f64 = 1.0;
/// The weight `1/9` that results from dropping the `⟨(∇_{z_k}𝒥) ∂z̄_l, ∂z̄_j⟩`
/// half of `q_{j,k l̄}`; kept for comparison reports only.
pub const J1_WEIGHT_UNCORRECTED: f64 = 1.0 / 9.0;

/// The four-group formula in `∇𝒥`, `∇∇𝒥` and `∇∇|𝒥|`.
pub fn rho_closed(jet: &GeometryJet) -> Result<RhoBreakdown> {
    rho_closed_weighted(jet, J1_WEIGHT)
}

/// [`rho_closed`] with an explicit weight on the `J1` group.
pub fn rho_closed_weighted(jet: &GeometryJet, j1_weight: f64) -> Result<RhoBreakdown> {
    let n = jet.n;
    let f = FrameIdx { n };
    let a = &jet.a;
    let mut acc = Acc::new(4);

    let mut s0 = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let v = jet.dd_jc[[f.z(j), f.z(k), f.zb(j), f.zb(k)]] * (-8.0 / (a[j] + a[k]));
            s0 += v;
            acc.add(0, v);
        }
    }
    acc.close_complex(s0);

    // tr A = 4 Σ_k ⟨A ∂z_k, ∂z̄_k⟩
    let mut s1 = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let idx = [f.z(j), f.zb(j), f.z(k), f.zb(k)];
            let v = (jet.dd_jc[idx] - jet.dd_abs[idx]) * (4.0 / a[j]);
            s1 += v;
            acc.add(1, v);
        }
    }
    acc.close_complex(s1);

    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let t1 = jet.d_jc[[f.z(k), f.zb(j), f.zb(l)]].norm_sqr();
                acc.re[2] += j1_weight * 8.0 / (a[k] * (a[j] + a[l])) * t1;
                let t2 = jet.d_jc[[f.zb(k), f.zb(j), f.zb(l)]].norm_sqr();
                acc.re[3] += 8.0 / (a[k] * (a[j] + a[k] + a[l])) * t2;
            }
        }
    }
    acc.mag += acc.re[2] + acc.re[3];
    let g = [acc.re[0], acc.re[1], acc.re[2], acc.re[3]];
    acc.finish(a, Provenance::ClosedForm, g)
}

/// `⟨(X Y) V, W⟩` for `X = ∇_{E_x} S`, `Y = ∇_{E_y} T`, by completeness
/// `V = Σ_s 2 ⟨V, E_s̄⟩ E_s`.
fn compose(
    f: FrameIdx,
    s: &Tensor3,
    x: usize,
    t: &Tensor3,
    y: usize,
    v: usize,
    w: usize,
) -> Complex64 {
    (0..f.dim())
        .map(|u| t[[y, v, f.conj(u)]] * s[[x, u, w]] * 2.0)
        .sum()
}

/// The seven-group polar-decomposition formula.
///
/// Breakdown slots: `A0 = G1 + G2 + G3 + G4`, `A1 = G5`, `J1 = G6`, `J2 = G7`;
/// `groups` keeps `G1..G7`.
pub fn rho_polar(jet: &GeometryJet) -> Result<RhoBreakdown> {
    let n = jet.n;
    let f = FrameIdx { n };
    let a = &jet.a;
    let (dj, dabs, ddabs) = (&jet.d_j, &jet.d_abs, &jet.dd_abs);
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Acc::new(7);
    let mut sums = [Complex64::new(0.0, 0.0); 5];

    for j in 0..n {
        for k in 0..n {
            let (zj, zbj, zk, zbk) = (f.z(j), f.zb(j), f.z(k), f.zb(k));
            let pair = |s: &Tensor3, x: usize, t: &Tensor3, y: usize, v: usize, w: usize| {
                compose(f, s, x, t, y, v, w) + compose(f, t, y, s, x, v, w)
            };

            let g1 = pair(dj, zbj, dj, zj, zk, zbk) * (2.0 * a[k] * (a[k] - a[j])
                / (a[j] * (a[j] + a[k])));
            let g2 = pair(dj, zj, dj, zbk, zbj, zk) * 2.0;
            let g3 = (pair(dj, zj, dabs, zbj, zk, zbk) + pair(dj, zbj, dabs, zj, zk, zbk))
                * i
                * (2.0 * (a[j] - a[k]) / (a[j] * (a[j] + a[k])));
            let g4 = (pair(dj, zj, dabs, zbk, zk, zbj) + pair(dj, zbk, dabs, zj, zk, zbj))
                * i
                * (-4.0 / (a[j] + a[k]));
            let g5 = (ddabs[[zj, zbk, zbj, zk]] - ddabs[[zj, zbj, zbk, zk]]) * (8.0 / (a[j] + a[k]));
            for (slot, v) in [g1, g2, g3, g4, g5].into_iter().enumerate() {
                sums[slot] += v;
                acc.add(slot, v);
            }
        }
    }
    for s in sums {
        acc.close_complex(s);
    }

    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let d = dabs[[f.zb(l), f.zb(j), f.z(k)]] - dabs[[f.zb(j), f.zb(l), f.z(k)]];
                acc.re[5] += J1_WEIGHT * 8.0 / (a[k] * (a[j] + a[l])) * d.norm_sqr();
                let e = dj[[f.zb(k), f.zb(l), f.zb(j)]];
                acc.re[6] += 2.0 * (a[l] + a[j]).powi(2) / (a[k] * (a[j] + a[k] + a[l]))
                    * e.norm_sqr();
            }
        }
    }
    acc.mag += acc.re[5] + acc.re[6];
    let r = &acc.re;
    let g = [r[0] + r[1] + r[2] + r[3], r[4], r[5], r[6]];
    acc.finish(a, Provenance::PolarForm, g)
}

fn vanishing(t: &[Complex64], scale: f64) -> f64 {
    let worst = t.iter().map(|c| c.norm()).fold(0.0, f64::max);
    worst / scale.max(1.0)
}

/// `(1/24) |∇J|^2` with the full Frobenius norm in the real orthonormal frame.
///
/// Requires `a_j = 2π` and `∇|𝒥| = 0`, `∇∇|𝒥| = 0` at the base point.
pub fn rho_almost_kahler(jet: &GeometryJet) -> Result<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let spread = jet
        .a
        .iter()
        .map(|&x| (x - two_pi).abs())
        .fold(0.0, f64::max);
    if spread > PRECONDITION_RTOL * two_pi {
        return Err(Error::Precondition(format!(
            "almost-Kähler case needs every a_j = 2π (off by {spread:.2e})"
        )));
    }
    let flat = vanishing(&jet.d_abs.data, jet.scale()).max(vanishing(&jet.dd_abs.data, jet.scale()));
    if flat > PRECONDITION_RTOL {
        return Err(Error::Precondition(format!(
            "almost-Kähler case needs |𝒥| = 2π Id near x0 (∇|𝒥| of relative size {flat:.2e})"
        )));
    }
    let comps = jet.chart.real_frame_nabla_j(&jet.frame.e);
    Ok(comps.iter().map(|c| c * c).sum::<f64>() / 24.0)
}

/// Two-group formula valid when `∇J = 0` at the base point:
/// `Σ 8/(a_j+a_k) ⟨(∇∇|𝒥|)_(z_j, z̄_k) ∂z̄_j - (∇∇|𝒥|)_(z_j, z̄_j) ∂z̄_k, ∂z_k⟩`
/// plus the `|∇|𝒥||^2` group. The orientation of the first group is the one
/// that agrees with [`rho_closed`] on fields where `∇J` vanishes only at `x0`.
pub fn rho_kahler_case(jet: &GeometryJet) -> Result<RhoBreakdown> {
    let parallel = vanishing(&jet.d_j.data, jet.scale());
    if parallel > PRECONDITION_RTOL {
        return Err(Error::Precondition(format!(
            "Kähler case needs ∇J = 0 (relative size {parallel:.2e})"
        )));
    }
    let n = jet.n;
    let f = FrameIdx { n };
    let a = &jet.a;
    let mut acc = Acc::new(2);
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let v = (jet.dd_abs[[f.z(j), f.zb(k), f.zb(j), f.z(k)]]
                - jet.dd_abs[[f.z(j), f.zb(j), f.zb(k), f.z(k)]])
                * (8.0 / (a[j] + a[k]));
            s += v;
            acc.add(0, v);
        }
    }
    acc.close_complex(s);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let d = jet.d_abs[[f.zb(l), f.zb(j), f.z(k)]] - jet.d_abs[[f.zb(j), f.zb(l), f.z(k)]];
                acc.re[1] += J1_WEIGHT * 8.0 / (a[k] * (a[j] + a[l])) * d.norm_sqr();
            }
        }
    }
    acc.mag += acc.re[1];
    let g = [0.0, acc.re[0], acc.re[1], 0.0];
    acc.finish(a, Provenance::SpecialCase, g)
}
