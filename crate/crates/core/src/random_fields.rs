//! Seeded generators for test and benchmark fields.
//!
//! Coordinates are interleaved `(x_1, y_1, ..., x_n, y_n)`; the constant part
//! of every potential is `A = 1/2 Σ a_k (x_k dy_k - y_k dx_k)`, so
//! `B(x0) = Σ a_k dx_k ∧ dy_k` whenever the perturbation vanishes there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{AxisFactor, ScalarField, Term, Wave};
use crate::tensor_geometry::ChartField;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn xi(j: usize) -> usize {
    2 * j
}

fn yi(j: usize) -> usize {
    2 * j + 1
}

fn unit_power(m: usize, axes: &[usize]) -> Vec<u32> {
    let mut p = vec![0u32; m];
    for &a in axes {
        p[a] += 1;
    }
    p
}

/// `A = 1/2 Σ a_k (x_k dy_k - y_k dx_k)`.
pub fn standard_potential(a: &[f64]) -> Vec<ScalarField> {
    let m = 2 * a.len();
    let mut pot = vec![ScalarField::zero(m); m];
    for (j, &aj) in a.iter().enumerate() {
        pot[xi(j)] = ScalarField::monomial(m, -0.5 * aj, &unit_power(m, &[yi(j)]));
        pot[yi(j)] = ScalarField::monomial(m, 0.5 * aj, &unit_power(m, &[xi(j)]));
    }
    pot
}

/// Flat metric, constant field with eigenvalues `a`.
pub fn constant_field(a: &[f64]) -> ChartField {
    let n = a.len();
    ChartField::new(n, ChartField::flat_metric(n), standard_potential(a), vec![0.0; 2 * n])
        .expect("constant field is well formed")
}

/// Every monomial of total degree in `degrees` on `m` axes.
fn monomials(m: usize, degrees: std::ops::RangeInclusive<usize>) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(m: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for a in start..m {
            cur.push(a);
            rec(m, left - 1, a, cur, out);
            cur.pop();
        }
    }
    for d in degrees {
        let mut lists = Vec::new();
        rec(m, d, 0, &mut Vec::new(), &mut lists);
        out.extend(lists.iter().map(|axes| unit_power(m, axes)));
    }
    out
}

fn random_poly(
    r: &mut ChaCha8Rng,
    m: usize,
    degrees: std::ops::RangeInclusive<usize>,
    scale: f64,
) -> ScalarField {
    let mut f = ScalarField::zero(m);
    for p in monomials(m, degrees) {
        let c: f64 = r.random_range(-1.0..1.0) * scale;
        f = f.add(&ScalarField::monomial(m, c, &p));
    }
    f
}

/// `g = Id + P(x)` with `P` symmetric, linear plus quadratic, `|P_ij| ≤ 0.2 / 2n`
/// on the box `|x_k| ≤ 0.5`, so `g` stays uniformly positive there.
pub fn random_metric(r: &mut ChaCha8Rng, n: usize) -> Vec<ScalarField> {
    let m = 2 * n;
    let mf = m as f64;
    let bound = 0.5 * mf + 0.25 * mf * (mf + 1.0) / 2.0;
    let s = 0.2 / mf / bound;
    let mut g = ChartField::flat_metric(n);
    for i in 0..m {
        for j in i..m {
            let p = random_poly(r, m, 1..=2, s);
            g[i * m + j] = g[i * m + j].add(&p);
            if i != j {
                g[j * m + i] = g[j * m + i].add(&p);
            }
        }
    }
    g
}

/// Quadratic and cubic perturbation of the potential with a few trigonometric terms.
fn random_potential_perturbation(r: &mut ChaCha8Rng, m: usize, scale: f64) -> Vec<ScalarField> {
    (0..m)
        .map(|_| {
            let mut f = random_poly(r, m, 2..=3, scale);
            // x_k^2 * sin(w x_l) style term keeps trig paths exercised
            let k = r.random_range(0..m);
            let l = r.random_range(0..m);
            let w: f64 = r.random_range(0.5..2.0);
            let c: f64 = r.random_range(-1.0..1.0) * scale;
            let t = Term::new(c, [AxisFactor::pow(k, 2), AxisFactor::wave(l, Wave::Sin(w))])
                .unwrap_or_else(|| Term::new(c, [AxisFactor::pow(k, 3)]).unwrap());
            f.push(t);
            f
        })
        .collect()
}

/// Random eigenvalues in `[1, 3]`, random metric and potential, `x0` in `[-0.3, 0.3]^{2n}`.
pub fn random_field(n: usize, seed: u64) -> ChartField {
    let mut r = rng(seed);
    let m = 2 * n;
    let a: Vec<f64> = (0..n).map(|_| r.random_range(1.0..3.0)).collect();
    let g = random_metric(&mut r, n);
    let pot: Vec<ScalarField> = standard_potential(&a)
        .iter()
        .zip(random_potential_perturbation(&mut r, m, 0.3))
        .map(|(p, q)| p.add(&q))
        .collect();
    let x0 = (0..m).map(|_| r.random_range(-0.3..0.3)).collect();
    ChartField::new(n, g, pot, x0).expect("generated field is well formed")
}

/// `x0 = 0`, `g(0) = Id` and all `a_j` equal to `a0` at the base point.
pub fn degenerate_field(n: usize, a0: f64, seed: u64) -> ChartField {
    let mut r = rng(seed);
    let m = 2 * n;
    let g = random_metric(&mut r, n);
    let pot: Vec<ScalarField> = standard_potential(&vec![a0; n])
        .iter()
        .zip(random_potential_perturbation(&mut r, m, 0.3))
        .map(|(p, q)| p.add(&q))
        .collect();
    ChartField::new(n, g, pot, vec![0.0; m]).expect("generated field is well formed")
}

/// `B = 2π ω_0` and `g = P^T P` with `P(x, y) = (x, y + S(x) x)`-type symplectic
/// shear, so `|𝒥| = 2π Id` everywhere while `∇J ≠ 0`.
pub fn almost_kahler_field(n: usize, seed: u64) -> ChartField {
    let mut r = rng(seed);
    let m = 2 * n;
    // symmetric n x n polynomial shear
    let mut s = vec![ScalarField::zero(m); n * n];
    for k in 0..n {
        for l in k..n {
            let p = random_poly(&mut r, m, 1..=2, 0.25);
            s[k * n + l] = p.clone();
            s[l * n + k] = p;
        }
    }
    // Darboux block form g = [[I + S^2, S], [S, I]], mapped to interleaved axes
    let mut g = ChartField::flat_metric(n);
    for k in 0..n {
        for l in 0..n {
            let mut s2 = ScalarField::zero(m);
            for q in 0..n {
                s2 = s2.add(&s[k * n + q].checked_mul(&s[q * n + l]).expect("polynomial product"));
            }
            let xx = xi(k) * m + xi(l);
            g[xx] = g[xx].add(&s2);
            g[xi(k) * m + yi(l)] = g[xi(k) * m + yi(l)].add(&s[k * n + l]);
            g[yi(k) * m + xi(l)] = g[yi(k) * m + xi(l)].add(&s[l * n + k]);
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let x0 = (0..m).map(|_| r.random_range(-0.3..0.3)).collect();
    ChartField::new(n, g, standard_potential(&vec![two_pi; n]), x0)
        .expect("generated field is well formed")
}

/// Flat `C^n` with `A = -1/2 dφ ∘ J_0` for a strictly plurisubharmonic
/// polynomial `φ`; `J = J_0` is parallel while `|𝒥|` varies.
pub fn kahler_field(n: usize, seed: u64) -> ChartField {
    let mut r = rng(seed);
    let m = 2 * n;
    let a: Vec<f64> = (0..n).map(|_| r.random_range(1.0..3.0)).collect();
    let mut phi = ScalarField::zero(m);
    for (j, &aj) in a.iter().enumerate() {
        phi = phi
            .add(&ScalarField::monomial(m, 0.5 * aj, &unit_power(m, &[xi(j), xi(j)])))
            .add(&ScalarField::monomial(m, 0.5 * aj, &unit_power(m, &[yi(j), yi(j)])));
    }
    phi = phi.add(&random_poly(&mut r, m, 3..=4, 0.08));
    // J_0 d/dx_j = d/dy_j, J_0 d/dy_j = -d/dx_j
    let mut pot = vec![ScalarField::zero(m); m];
    for j in 0..n {
        pot[xi(j)] = phi.partial(yi(j)).scaled(-0.5);
        pot[yi(j)] = phi.partial(xi(j)).scaled(0.5);
    }
    let x0 = (0..m).map(|_| r.random_range(-0.2..0.2)).collect();
    ChartField::new(n, ChartField::flat_metric(n), pot, x0).expect("generated field is well formed")
}

/// Metric and potential perturbations of order two and three at `x0 = 0`:
/// `∂g(0) = 0` and `∂B(0) = 0`, so `∇J = 0` at the base point only, while `∇∇|𝒥| ≠ 0`.
pub fn pointwise_parallel_field(n: usize, seed: u64) -> ChartField {
    let mut r = rng(seed);
    let m = 2 * n;
    let a: Vec<f64> = (0..n).map(|_| r.random_range(1.0..3.0)).collect();
    let pot: Vec<ScalarField> = standard_potential(&a)
        .iter()
        .map(|p| p.add(&random_poly(&mut r, m, 3..=3, 0.3)))
        .collect();
    // quadratic-only metric perturbation keeps Γ(0) = 0 but curves the chart
    let mut g = ChartField::flat_metric(n);
    let s = 0.1 / (m * m) as f64;
    for i in 0..m {
        for j in i..m {
            let p = random_poly(&mut r, m, 2..=2, s);
            g[i * m + j] = g[i * m + j].add(&p);
            if i != j {
                g[j * m + i] = g[j * m + i].add(&p);
            }
        }
    }
    ChartField::new(n, g, pot, vec![0.0; m])
        .expect("generated field is well formed")
}

/// General surface field: random metric, `b = b0 + perturbation`.
pub fn surface_field(seed: u64) -> ChartField {
    random_field(1, seed)
}

/// Conformal plane `g = e^{2 eps x} δ` with `B = b dx ∧ dy`.
pub fn conformal_field(eps: f64, b: f64) -> ChartField {
    let m = 2;
    let e = ScalarField::from_terms(
        m,
        vec![Term::new(1.0, [AxisFactor::wave(0, Wave::Exp(2.0 * eps))]).unwrap()],
    );
    let g = vec![e.clone(), ScalarField::zero(m), ScalarField::zero(m), e];
    let pot = vec![
        ScalarField::monomial(m, -0.5 * b, &[0, 1]),
        ScalarField::monomial(m, 0.5 * b, &[1, 0]),
    ];
    ChartField::new(1, g, pot, vec![0.0, 0.0]).expect("conformal field is well formed")
}

/// Flat plane with `b(x) = b0 + eps cos x`, potential `A = (b0 x + eps sin x) dy`.
pub fn cosine_field(b0: f64, eps: f64) -> ChartField {
    let m = 2;
    let mut ay = ScalarField::monomial(m, b0, &[1, 0]);
    ay.push(Term::new(eps, [AxisFactor::wave(0, Wave::Sin(1.0))]).unwrap());
    ChartField::new(1, ChartField::flat_metric(1), vec![ScalarField::zero(m), ay], vec![0.0, 0.0])
        .expect("cosine field is well formed")
}

/// Round sphere chart `(θ, φ)` of radius `r` with `B = b vol_g`.
pub fn sphere_field(radius: f64, b: f64, x0: [f64; 2]) -> ChartField {
    let m = 2;
    let r2 = radius * radius;
    // sin^2 θ = (1 - cos 2θ) / 2
    let mut gpp = ScalarField::constant(m, 0.5 * r2);
    gpp.push(Term::new(-0.5 * r2, [AxisFactor::wave(0, Wave::Cos(2.0))]).unwrap());
    let g = vec![
        ScalarField::constant(m, r2),
        ScalarField::zero(m),
        ScalarField::zero(m),
        gpp,
    ];
    // d_θ A_φ = b r^2 sin θ
    let a_phi = ScalarField::from_terms(
        m,
        vec![Term::new(-b * r2, [AxisFactor::wave(0, Wave::Cos(1.0))]).unwrap()],
    );
    ChartField::new(1, g, vec![ScalarField::zero(m), a_phi], x0.to_vec())
        .expect("sphere field is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_field(2, 7);
        let b = random_field(2, 7);
        assert_eq!(a.x0, b.x0);
        assert_eq!(a.metric_at(&a.x0), b.metric_at(&b.x0));
    }

    #[test]
    fn random_metrics_are_positive_on_the_box() {
        for seed in 0..20 {
            let f = random_field(2, seed);
            let corners: Vec<Vec<f64>> = (0..16)
                .map(|c| (0..4).map(|k| if c >> k & 1 == 1 { 0.5 } else { -0.5 }).collect())
                .collect();
            f.check_metric(&corners).unwrap();
        }
    }
}
