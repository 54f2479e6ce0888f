//! Polynomial-times-Gaussian calculus on `ℝ^{2n} = ℂ^n`.
//!
//! A [`PolyGauss`] stores `Σ c_{βγ} z^β z̄^γ` and stands for that polynomial
//! times `G = exp(-¼ Σ a_j |z_j|²)`. Every operation acts on the polynomial
//! part with the Gaussian absorbed exactly.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default truncation degree; `q_j(Z,Z)`, `b q 𝒫` and all pairings close below it.
pub const DEFAULT_DEGREE: usize = 6;
/// Smallest admissible truncation degree.
pub const MIN_DEGREE: usize = 6;
/// Relative kernel component tolerated by [`ModelContext::inverse_l`].
pub const KERNEL_RTOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exponent pair `(β, γ)` flattened as `β ++ γ`.
pub type Key = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyGauss {
    pub n: usize,
    coeffs: BTreeMap<Key, Complex64>,
}

impl PolyGauss {
    pub fn zero(n: usize) -> Self {
        PolyGauss {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    /// `c z^β z̄^γ G`.
    pub fn monomial(beta: &[u32], gamma: &[u32], c: Complex64) -> Self {
        assert_eq!(beta.len(), gamma.len());
        let mut p = PolyGauss::zero(beta.len());
        p.push(beta.iter().chain(gamma).copied().collect(), c);
        p
    }

    /// `c G`.
    pub fn constant(n: usize, c: Complex64) -> Self {
        let zeros = vec![0; n];
        PolyGauss::monomial(&zeros, &zeros, c)
    }

    /// `z_j` (`anti = false`) or `z̄_j` (`anti = true`) as a bare factor.
    pub fn coordinate(n: usize, j: usize, anti: bool) -> Self {
        let mut key = vec![0; 2 * n];
        key[if anti { n + j } else { j }] = 1;
        let mut p = PolyGauss::zero(n);
        p.push(key, Complex64::new(1.0, 0.0));
        p
    }

    pub fn push(&mut self, key: Key, c: Complex64) {
        debug_assert_eq!(key.len(), 2 * self.n);
        if c == ZERO {
            return;
        }
        match self.coeffs.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, beta: &[u32], gamma: &[u32]) -> Complex64 {
        let key: Key = beta.iter().chain(gamma).copied().collect();
        self.coeffs.get(&key).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree `max |β| + |γ|`; zero for the zero element.
    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|k| k.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Value of the polynomial part at the origin.
    pub fn at_origin(&self) -> Complex64 {
        self.coeffs
            .get(&vec![0; 2 * self.n])
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = PolyGauss::zero(self.n);
        for (k, v) in &self.coeffs {
            out.push(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &PolyGauss) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.push(k.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &PolyGauss) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Constant data of the model operator at one point: the eigenvalues `a_j`,
/// the truncation degree and the Gaussian moment table.
#[derive(Clone, Debug)]
pub struct ModelContext {
    pub n: usize,
    pub a: Vec<f64>,
    pub degree: usize,
    /// `moments[j][m] = m! (2/a_j)^m (2π/a_j)`.
    moments: Vec<Vec<f64>>,
}

/// `∫_ℂ |z|^{2m} e^{-½ a |z|²} dZ = m! (2/a)^m (2π/a)`.
pub fn gaussian_moment(m: usize, a: f64) -> f64 {
    (1..=m).fold(2.0 * std::f64::consts::PI / a, |acc, k| {
        acc * k as f64 * 2.0 / a
    })
}

/// The same moment by numerical quadrature of the radial integral.
pub fn gaussian_moment_quadrature(m: usize, a: f64) -> f64 {
    let radius = ((2.0 / a) * (80.0 + 6.0 * m as f64)).sqrt();
    let f = |r: f64| r.powi(2 * m as i32 + 1) * (-0.5 * a * r * r).exp();
    let out = quadrature::double_exponential::integrate(f, 0.0, radius, 1e-15);
    2.0 * std::f64::consts::PI * out.integral
}

impl ModelContext {
    pub fn new(a: &[f64], degree: usize) -> Result<Self> {
        if degree < MIN_DEGREE {
            return Err(Error::Precondition(format!(
                "truncation degree {degree} is below {MIN_DEGREE}"
            )));
        }
        if a.is_empty() || a.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Precondition(format!(
                "model eigenvalues must be positive, got {a:?}"
            )));
        }
        let moments = a
            .iter()
            .map(|&aj| (0..=degree).map(|m| gaussian_moment(m, aj)).collect())
            .collect();
        Ok(ModelContext {
            n: a.len(),
            a: a.to_vec(),
            degree,
            moments,
        })
    }

    /// Replaces one moment table entry; used to show that the identity checks
    /// detect a corrupted table.
    pub fn with_moment(mut self, j: usize, m: usize, value: f64) -> Self {
        self.moments[j][m] = value;
        self
    }

    /// Worst relative gap between the table and radial quadrature.
    pub fn moment_quadrature_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, row) in self.moments.iter().enumerate() {
            for (m, &v) in row.iter().enumerate() {
                let q = gaussian_moment_quadrature(m, self.a[j]);
                worst = worst.max((v - q).abs() / v.abs());
            }
        }
        worst
    }

    pub fn moment(&self, j: usize, m: usize) -> f64 {
        self.moments[j][m]
    }

    /// `𝒫(0,0) = Π a_j / (2π)^n`.
    pub fn p00(&self) -> f64 {
        self.a
            .iter()
            .map(|&aj| aj / (2.0 * std::f64::consts::PI))
            .product()
    }

    /// `𝒫(·, 0) = 𝒫(0,0) G`.
    pub fn bergman0(&self) -> PolyGauss {
        PolyGauss::constant(self.n, Complex64::new(self.p00(), 0.0))
    }

    fn check(&self, f: &PolyGauss) -> Result<()> {
        if f.n != self.n {
            return Err(Error::Precondition(format!(
                "PolyGauss has n = {}, context has n = {}",
                f.n, self.n
            )));
        }
        let d = f.degree();
        if d > self.degree {
            return Err(Error::DegreeOverflow {
                needed: d,
                bound: self.degree,
            });
        }
        Ok(())
    }

    fn bounded(&self, f: PolyGauss) -> Result<PolyGauss> {
        self.check(&f)?;
        Ok(f)
    }

    /// `b_j`: polynomial part `p ↦ -2 ∂_{z_j} p + a_j z̄_j p`.
    pub fn apply_b(&self, j: usize, f: &PolyGauss) -> Result<PolyGauss> {
        self.check(f)?;
        let n = self.n;
        let mut out = PolyGauss::zero(n);
        for (k, &c) in f.terms() {
            if k[j] > 0 {
                let mut d = k.clone();
                d[j] -= 1;
                out.push(d, c * (-2.0 * k[j] as f64));
            }
            let mut m = k.clone();
            m[n + j] += 1;
            out.push(m, c * self.a[j]);
        }
        self.bounded(out)
    }

    /// `b_j⁺`: polynomial part `p ↦ 2 ∂_{z̄_j} p`.
    pub fn apply_b_plus(&self, j: usize, f: &PolyGauss) -> Result<PolyGauss> {
        self.check(f)?;
        let n = self.n;
        let mut out = PolyGauss::zero(n);
        for (k, &c) in f.terms() {
            if k[n + j] > 0 {
                let mut d = k.clone();
                d[n + j] -= 1;
                out.push(d, c * (2.0 * k[n + j] as f64));
            }
        }
        Ok(out)
    }

    /// `𝓛 = Σ_j b_j b_j⁺`.
    pub fn apply_l(&self, f: &PolyGauss) -> Result<PolyGauss> {
        let mut out = PolyGauss::zero(self.n);
        for j in 0..self.n {
            out = out.add(&self.apply_b(j, &self.apply_b_plus(j, f)?)?);
        }
        Ok(out)
    }

    /// Product with a bare polynomial `p` (its Gaussian reading is ignored).
    pub fn multiply(&self, p: &PolyGauss, f: &PolyGauss) -> Result<PolyGauss> {
        self.check(f)?;
        assert_eq!(p.n, self.n);
        let mut out = PolyGauss::zero(self.n);
        for (kp, &cp) in p.terms() {
            for (kf, &cf) in f.terms() {
                let key = kp.iter().zip(kf).map(|(x, y)| x + y).collect();
                out.push(key, cp * cf);
            }
        }
        self.bounded(out)
    }

    /// `∫ f h̄ dZ`, linear in `f`, conjugate-linear in `h`.
    pub fn inner(&self, f: &PolyGauss, h: &PolyGauss) -> Result<Complex64> {
        self.check(f)?;
        self.check(h)?;
        let n = self.n;
        let mut acc = ZERO;
        for (kf, &cf) in f.terms() {
            'pair: for (kh, &ch) in h.terms() {
                let mut w = 1.0;
                for j in 0..n {
                    let zpow = kf[j] + kh[n + j];
                    if zpow != kf[n + j] + kh[j] {
                        continue 'pair;
                    }
                    w *= self.moment(j, zpow as usize);
                }
                acc += cf * ch.conj() * w;
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self, f: &PolyGauss) -> Result<f64> {
        Ok(self.inner(f, f)?.re)
    }

    /// Orthogonal projection onto `ker 𝓛 = {holomorphic polynomial · G}`.
    pub fn project_p(&self, f: &PolyGauss) -> Result<PolyGauss> {
        self.check(f)?;
        let n = self.n;
        let mut out = PolyGauss::zero(n);
        'term: for (k, &c) in f.terms() {
            let mut key = vec![0; 2 * n];
            let mut w = 1.0;
            for j in 0..n {
                let (mu, nu) = (k[j], k[n + j]);
                if mu < nu {
                    continue 'term;
                }
                key[j] = mu - nu;
                w *= self.moment(j, mu as usize) / self.moment(j, (mu - nu) as usize);
            }
            out.push(key, c * w);
        }
        Ok(out)
    }

    /// Solves `𝓛 u = f` with `u ⟂ ker 𝓛`.
    ///
    /// `𝓛` sends `z^β z̄^γ` to `2(γ·a) z^β z̄^γ - 4 Σ_j β_j γ_j z^{β-e_j} z̄^{γ-e_j}`,
    /// so the coefficients are fixed by descending total degree.
    pub fn inverse_l(&self, f: &PolyGauss) -> Result<PolyGauss> {
        self.check(f)?;
        let n = self.n;
        let fnorm = self.norm_sqr(f)?.sqrt();
        if fnorm == 0.0 {
            return Ok(PolyGauss::zero(n));
        }
        let kernel = self.norm_sqr(&self.project_p(f)?)?.sqrt();
        if kernel > KERNEL_RTOL * fnorm {
            return Err(Error::KernelComponent {
                ratio: kernel / fnorm,
            });
        }

        let mut keys: BTreeSet<(usize, Key)> = BTreeSet::new();
        for (k, _) in f.terms() {
            let t_max: Vec<u32> = (0..n).map(|j| k[j].min(k[n + j])).collect();
            for t in lattice_below(&t_max) {
                let mut key = k.clone();
                for j in 0..n {
                    key[j] -= t[j];
                    key[n + j] -= t[j];
                }
                let deg = key.iter().map(|&e| e as usize).sum();
                keys.insert((deg, key));
            }
        }

        let mut u: BTreeMap<Key, Complex64> = BTreeMap::new();
        for (_, key) in keys.iter().rev() {
            let gamma_a: f64 = (0..n).map(|j| key[n + j] as f64 * self.a[j]).sum();
            if key[n..].iter().all(|&g| g == 0) {
                continue;
            }
            let mut rhs = f.coeffs.get(key).copied().unwrap_or(ZERO);
            for j in 0..n {
                let mut up = key.clone();
                up[j] += 1;
                up[n + j] += 1;
                if let Some(&c) = u.get(&up) {
                    rhs += c * (4.0 * up[j] as f64 * up[n + j] as f64);
                }
            }
            u.insert(key.clone(), rhs / (2.0 * gamma_a));
        }
        let mut sol = PolyGauss::zero(n);
        for (k, c) in u {
            sol.push(k, c);
        }
        let sol = sol.sub(&self.project_p(&sol)?);

        let resid = self.norm_sqr(&self.apply_l(&sol)?.sub(f))?.sqrt();
        if resid > KERNEL_RTOL * fnorm {
            return Err(Error::Invariant {
                name: "inverse_L residual".into(),
                residual: resid / fnorm,
                tol: KERNEL_RTOL,
            });
        }
        Ok(sol)
    }
}

/// All `t` with `0 ≤ t ≤ t_max` componentwise.
fn lattice_below(t_max: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &m in t_max {
        out = out
            .into_iter()
            .flat_map(|pre| {
                (0..=m).map(move |v| {
                    let mut p = pre.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn ground_state_norm_is_reproducing() {
        let ctx = ModelContext::new(&[1.3, 2.1], 6).unwrap();
        let p = ctx.bergman0();
        assert!((ctx.norm_sqr(&p).unwrap() - ctx.p00()).abs() < 1e-14);
    }

    #[test]
    fn inverse_on_first_excited_level() {
        let ctx = ModelContext::new(&[1.5, 2.5], 6).unwrap();
        let f = ctx
            .apply_b(1, &PolyGauss::monomial(&[1, 0], &[0, 0], c(1.0)))
            .unwrap();
        let u = ctx.inverse_l(&f).unwrap();
        let expect = f.scale(c(1.0 / 5.0));
        assert!(u.sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn kernel_input_is_rejected() {
        let ctx = ModelContext::new(&[1.0], 6).unwrap();
        let f = PolyGauss::monomial(&[2], &[0], c(1.0));
        assert!(matches!(ctx.inverse_l(&f), Err(Error::KernelComponent { .. })));
    }

    #[test]
    fn overflow_is_an_error() {
        let ctx = ModelContext::new(&[1.0], 6).unwrap();
        let f = PolyGauss::monomial(&[3], &[3], c(1.0));
        assert!(matches!(
            ctx.apply_b(0, &f),
            Err(Error::DegreeOverflow { needed: 7, bound: 6 })
        ));
    }
}
