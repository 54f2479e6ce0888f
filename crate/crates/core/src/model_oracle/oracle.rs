//! `ρ(x0) = A0 + A1 + A2 - A3` evaluated by operator calculus on the model
//! space, and the per-term closed forms it is compared against.

use num_complex::Complex64;
use serde::Serialize;

use super::fock::{ModelContext, PolyGauss, DEFAULT_DEGREE};
use crate::error::{Error, Result};
use crate::frame_spectral::QCoeffs;
use crate::rho_formula::IM_RTOL;
use crate::tensor_geometry::GeometryJet;
use crate::tensors::FrameIdx;

#[derive(Clone, Debug, Serialize)]
pub struct OracleBreakdown {
    pub a: Vec<f64>,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "A3")]
    pub a3: f64,
    pub rho: f64,
    pub degree: usize,
    pub im_residue: f64,
}

/// `Z^u` for frame index `u`: `z_u` if `u < n`, else `z̄_{u-n}`.
fn frame_coordinate(n: usize, u: usize) -> PolyGauss {
    if u < n {
        PolyGauss::coordinate(n, u, false)
    } else {
        PolyGauss::coordinate(n, u - n, true)
    }
}

/// `Σ_{u,v} c(u, v) Z^u Z^v` as a bare polynomial.
fn quadratic(n: usize, c: impl Fn(usize, usize) -> Complex64) -> PolyGauss {
    let mut out = PolyGauss::zero(n);
    for u in 0..2 * n {
        for v in 0..2 * n {
            let cu = c(u, v);
            if cu == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (ku, _) in frame_coordinate(n, u).terms() {
                for (kv, _) in frame_coordinate(n, v).terms() {
                    out.push(ku.iter().zip(kv).map(|(x, y)| x + y).collect(), cu);
                }
            }
        }
    }
    out
}

/// `Q2(Z,Z)` with `Q2(U,V) = Σ_j ⟨(∇∇𝒥)_(U,V) ∂z_j, ∂z̄_j⟩ - ¼ tr (∇∇|𝒥|)_(U,V)`.
pub fn q2_polynomial(jet: &GeometryJet) -> PolyGauss {
    let n = jet.n;
    let f = FrameIdx { n };
    quadratic(n, |u, v| {
        (0..n)
            .map(|j| jet.dd_jc[[u, v, f.z(j), f.zb(j)]] - jet.dd_abs[[u, v, f.z(j), f.zb(j)]])
            .sum()
    })
}

/// `q_j(Z,Z) = Σ_{k,l} q_{j,kl} z_k z_l + q_{j,k l̄} z_k z̄_l + q_{j,k̄ l̄} z̄_k z̄_l`.
pub fn q_polynomial(q: &QCoeffs, j: usize) -> PolyGauss {
    let n = q.n;
    let mut out = PolyGauss::zero(n);
    for k in 0..n {
        for l in 0..n {
            let (zk, zl, zbk, zbl) = (k, l, n + k, n + l);
            let mut key = vec![0u32; 2 * n];
            key[zk] += 1;
            key[zl] += 1;
            out.push(key, q.q_hol[[j, k, l]]);
            let mut key = vec![0u32; 2 * n];
            key[zk] += 1;
            key[zbl] += 1;
            out.push(key, q.q_mix[[j, k, l]]);
            let mut key = vec![0u32; 2 * n];
            key[zbk] += 1;
            key[zbl] += 1;
            out.push(key, q.q_anti[[j, k, l]]);
        }
    }
    out
}

/// Splits `q_j(Z,Z)` into its holomorphic, mixed and antiholomorphic parts.
fn q_parts(q: &QCoeffs, j: usize) -> [PolyGauss; 3] {
    let n = q.n;
    let full = q_polynomial(q, j);
    let mut parts = [PolyGauss::zero(n), PolyGauss::zero(n), PolyGauss::zero(n)];
    for (k, &c) in full.terms() {
        let anti: u32 = k[n..].iter().sum();
        parts[anti as usize].push(k.clone(), c);
    }
    parts
}

fn real(v: Complex64, im: &mut f64) -> f64 {
    *im = im.max(v.im.abs());
    v.re
}

/// The oracle with the default truncation degree.
pub fn rho_oracle(jet: &GeometryJet, q: &QCoeffs) -> Result<OracleBreakdown> {
    rho_oracle_with(&ModelContext::new(&jet.a, DEFAULT_DEGREE)?, jet, q)
}

pub fn rho_oracle_with(ctx: &ModelContext, jet: &GeometryJet, q: &QCoeffs) -> Result<OracleBreakdown> {
    let n = jet.n;
    if q.n != n || ctx.n != n {
        return Err(Error::Precondition(format!(
            "jet has n = {n}, q has n = {}, context has n = {}",
            q.n, ctx.n
        )));
    }
    let f = FrameIdx { n };
    let p00 = ctx.p00();
    let ground = ctx.bergman0();
    let mut im = 0.0f64;

    let mut s0 = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            s0 += jet.rc[[f.z(j), f.z(k), f.zb(j), f.zb(k)]] * 4.0;
        }
    }
    let a0 = real(s0, &mut im);

    let q2p = ctx.multiply(&q2_polynomial(jet), &ground)?;
    let a1 = real(ctx.inner(&q2p, &ground)? / p00, &mut im);

    let qp: Vec<PolyGauss> = (0..n)
        .map(|j| ctx.multiply(&q_polynomial(q, j), &ground))
        .collect::<Result<_>>()?;
    let mut a2 = 0.0;
    for x in &qp {
        a2 += 4.0 / 9.0 * ctx.norm_sqr(x)? / p00;
    }

    let bqp: Vec<PolyGauss> = qp
        .iter()
        .enumerate()
        .map(|(j, x)| ctx.apply_b(j, x))
        .collect::<Result<_>>()?;
    let mut s3 = Complex64::new(0.0, 0.0);
    for w in &bqp {
        let lw = ctx.inverse_l(w)?;
        for x in &bqp {
            s3 += ctx.inner(&lw, x)? * (4.0 / 9.0) / p00;
        }
    }
    let a3 = real(s3, &mut im);

    let mag = a0.abs() + a1.abs() + a2.abs() + a3.abs();
    if im > IM_RTOL * (1.0 + mag) {
        return Err(Error::InconsistentJet {
            what: "imaginary part of an oracle term".into(),
            residual: im,
        });
    }
    Ok(OracleBreakdown {
        a: jet.a.clone(),
        a0,
        a1,
        a2,
        a3,
        rho: a0 + a1 + a2 - a3,
        degree: ctx.degree,
        im_residue: im,
    })
}

/// `b_j q_j 𝒫(·,0)` split by Landau level and `𝓛^{-1}` of each piece, for every `j`.
///
/// `u[j][0] = b_j (hol 𝒫)`, `u[j][1] = b_j (1 - 𝒫)(mix 𝒫)`, `u[j][2] = b_j 𝒫(mix 𝒫)`,
/// `u[j][3] = b_j (anti 𝒫)`; `v[j][i] = 𝓛^{-1} u[j][i]`.
#[derive(Clone, Debug)]
pub struct LadderTerms {
    pub u: Vec<[PolyGauss; 4]>,
    pub v: Vec<[PolyGauss; 4]>,
}

pub fn ladder_terms(ctx: &ModelContext, q: &QCoeffs) -> Result<LadderTerms> {
    let ground = ctx.bergman0();
    let mut u = Vec::with_capacity(q.n);
    let mut v = Vec::with_capacity(q.n);
    for j in 0..q.n {
        let [hol, mix, anti] = q_parts(q, j);
        let mix_p = ctx.multiply(&mix, &ground)?;
        let mix_kernel = ctx.project_p(&mix_p)?;
        let pieces = [
            ctx.multiply(&hol, &ground)?,
            mix_p.sub(&mix_kernel),
            mix_kernel,
            ctx.multiply(&anti, &ground)?,
        ];
        let uj: [PolyGauss; 4] = [
            ctx.apply_b(j, &pieces[0])?,
            ctx.apply_b(j, &pieces[1])?,
            ctx.apply_b(j, &pieces[2])?,
            ctx.apply_b(j, &pieces[3])?,
        ];
        let vj = [
            ctx.inverse_l(&uj[0])?,
            ctx.inverse_l(&uj[1])?,
            ctx.inverse_l(&uj[2])?,
            ctx.inverse_l(&uj[3])?,
        ];
        u.push(uj);
        v.push(vj);
    }
    Ok(LadderTerms { u, v })
}

impl LadderTerms {
    /// `I_i / 𝒫(0,0) = (Σ_j' v_i, Σ_j u_i) / 𝒫(0,0)` for `i = 1..4`.
    pub fn i_terms(&self, ctx: &ModelContext) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for vj in &self.v {
                for uj in &self.u {
                    s += ctx.inner(&vj[i], &uj[i])?;
                }
            }
            *slot = s.re / ctx.p00();
        }
        Ok(out)
    }

    /// Largest normalized pairing between different levels, over all `u` and `v` pieces.
    pub fn cross_level_overlap(&self, ctx: &ModelContext) -> Result<f64> {
        let all: Vec<(usize, &PolyGauss)> = self
            .u
            .iter()
            .chain(&self.v)
            .flat_map(|row| row.iter().enumerate())
            .collect();
        let norms: Vec<f64> = all
            .iter()
            .map(|(_, x)| ctx.norm_sqr(x).map(f64::sqrt))
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for (p, (ip, x)) in all.iter().enumerate() {
            for (r, (ir, y)) in all.iter().enumerate() {
                if ip == ir || norms[p] == 0.0 || norms[r] == 0.0 {
                    continue;
                }
                let c = ctx.inner(x, y)?.norm() / (norms[p] * norms[r]);
                worst = worst.max(c);
            }
        }
        Ok(worst)
    }
}

/// Per-term closed forms of `A0`, `A1`, `A2` and `I1..I4`,
/// each divided by `𝒫(0,0)` where applicable.
#[derive(Clone, Debug, Serialize)]
pub struct DisplayedTerms {
    /// `-Σ 8/(a_j+a_k) ⟨(∇∇𝒥)_(z_j, z_k) ∂z̄_j, ∂z̄_k⟩`.
    pub a0: f64,
    /// `Σ_j (1/a_j)(tr (∇∇𝒥)_(z_j, z̄_j) - tr (∇∇|𝒥|)_(z_j, z̄_j))`.
    pub a1: f64,
    pub a2: f64,
    pub i: [f64; 4],
}

pub fn displayed_terms(jet: &GeometryJet, q: &QCoeffs) -> DisplayedTerms {
    let n = jet.n;
    let f = FrameIdx { n };
    let a = &jet.a;
    let mut a0 = 0.0;
    let mut a1 = 0.0;
    for j in 0..n {
        for k in 0..n {
            a0 -= 8.0 / (a[j] + a[k]) * jet.dd_jc[[f.z(j), f.z(k), f.zb(j), f.zb(k)]].re;
            let idx = [f.z(j), f.zb(j), f.z(k), f.zb(k)];
            a1 += 4.0 / a[j] * (jet.dd_jc[idx] - jet.dd_abs[idx]).re;
        }
    }

    let (h, m, x) = (&q.q_hol, &q.q_mix, &q.q_anti);
    let mut a2 = 0.0;
    let mut i = [0.0; 4];
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let delta = if k == l { 1.0 } else { 0.0 };
                let hs = (h[[j, k, l]] + h[[j, l, k]]).norm_sqr();
                let xs = (x[[j, k, l]] + x[[j, l, k]]).norm_sqr();
                let ms = m[[j, k, l]].norm_sqr();
                a2 += 8.0 / (9.0 * a[k] * a[l]) * (hs + 2.0 * (1.0 + delta) * ms + xs);

                i[0] += hs * 2.0 / (a[k] * a[l]);

                let cross = 2.0 * (m[[j, k, l]].conj() * m[[l, k, j]]).re;
                i[1] += ms * 4.0 * a[j] / (a[k] * a[l] * (a[j] + a[l]))
                    + cross * 2.0 / (a[k] * (a[j] + a[l]));

                let denom = a[j] * a[k] * a[l] * (a[j] + a[k] + a[l]);
                let xcross = 2.0 * (x[[j, k, l]].conj() * x[[j, l, k]]).re;
                i[3] += x[[j, k, l]].norm_sqr() * 2.0 * (a[j] - a[l]).powi(2) / denom
                    - xcross * 2.0 * (a[j] - a[l]) * (a[k] - a[j]) / denom;
            }
            i[2] += m[[j, k, k]].norm_sqr() * 4.0 / (a[k] * a[k]);
        }
    }
    DisplayedTerms { a0, a1, a2, i }
}
