use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AxisFactor, ScalarField, Term, Wave};
use crate::tensor_geometry::ChartField;

/// `cos · cos(κ·x) + sin · sin(κ·x)` with `κ = 2π (kx/Lx, ky/Ly)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigMode {
    pub kx: i32,
    pub ky: i32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `b(x, y) = b0 + Σ modes`; the total flux is `b0 Lx Ly`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusField {
    pub b0: f64,
    #[serde(default)]
    pub modes: Vec<TrigMode>,
}

/// `g = w δ` with `w = w0 + Σ modes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TorusMetric {
    Flat,
    Conformal {
        w0: f64,
        #[serde(default)]
        modes: Vec<TrigMode>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenOptions {
    /// Residual bound relative to the operator norm estimate.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Chebyshev filter degree per sweep.
    #[serde(default = "default_degree")]
    pub filter_degree: usize,
    #[serde(default)]
    pub seed: u64,
    /// Below this matrix dimension a dense Hermitian solve is used.
    #[serde(default = "default_dense_max")]
    pub dense_max: usize,
}

fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    400
}
fn default_degree() -> usize {
    80
}
fn default_dense_max() -> usize {
    900
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: default_tol(),
            max_iter: default_max_iter(),
            filter_degree: default_degree(),
            seed: 0,
            dense_max: default_dense_max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub field: TorusField,
    #[serde(default = "flat")]
    pub metric: TorusMetric,
    pub p_list: Vec<u32>,
    #[serde(default)]
    pub eigen: EigenOptions,
    /// Points per axis of the periodic grid used to integrate `ρ`.
    #[serde(default = "default_quad")]
    pub quad_points: usize,
}

fn flat() -> TorusMetric {
    TorusMetric::Flat
}
fn default_quad() -> usize {
    32
}

/// Relative tolerance on `b0 Lx Ly / 2π` being an integer.
pub const FLUX_TOL: f64 = 1e-10;

fn wave_pair(k: i32, len: f64) -> (Wave, Wave) {
    let w = 2.0 * std::f64::consts::PI * k as f64 / len;
    (Wave::Cos(w), Wave::Sin(w))
}

/// `cos(κ·x)` and `sin(κ·x)` expanded into separable terms.
fn phase_fields(kx: i32, ky: i32, lx: f64, ly: f64) -> (ScalarField, ScalarField) {
    let (cx, sx) = wave_pair(kx, lx);
    let (cy, sy) = wave_pair(ky, ly);
    let t = |c: f64, a: Wave, b: Wave| {
        Term::new(c, [AxisFactor::wave(0, a), AxisFactor::wave(1, b)])
    };
    let cos = ScalarField::from_terms(2, [t(1.0, cx, cy), t(-1.0, sx, sy)].into_iter().flatten().collect());
    let sin = ScalarField::from_terms(2, [t(1.0, sx, cy), t(1.0, cx, sy)].into_iter().flatten().collect());
    (cos, sin)
}

fn modes_field(base: f64, modes: &[TrigMode], lx: f64, ly: f64) -> ScalarField {
    let mut f = ScalarField::constant(2, base);
    for m in modes {
        let (c, s) = phase_fields(m.kx, m.ky, lx, ly);
        f = f.add(&c.scaled(m.cos)).add(&s.scaled(m.sin));
    }
    f
}

impl TorusConfig {
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// `b0 Lx Ly / 2π`, required to be a positive integer.
    pub fn flux_quanta(&self) -> f64 {
        self.field.b0 * self.area() / (2.0 * std::f64::consts::PI)
    }

    pub fn n_flux(&self) -> u32 {
        self.flux_quanta().round() as u32
    }

    pub fn b_field(&self) -> ScalarField {
        modes_field(self.field.b0, &self.field.modes, self.lx, self.ly)
    }

    pub fn conformal_factor(&self) -> ScalarField {
        match &self.metric {
            TorusMetric::Flat => ScalarField::constant(2, 1.0),
            TorusMetric::Conformal { w0, modes } => modes_field(*w0, modes, self.lx, self.ly),
        }
    }

    /// Potential on the fundamental domain: Landau gauge `A_y = b0 x` for the
    /// mean field plus the periodic stream-function potential of each mode.
    pub fn potential(&self) -> [ScalarField; 2] {
        let mut ax = ScalarField::zero(2);
        let mut ay = ScalarField::monomial(2, self.field.b0, &[1, 0]);
        for m in &self.field.modes {
            let kx = 2.0 * std::f64::consts::PI * m.kx as f64 / self.lx;
            let ky = 2.0 * std::f64::consts::PI * m.ky as f64 / self.ly;
            let k2 = kx * kx + ky * ky;
            let (c, s) = phase_fields(m.kx, m.ky, self.lx, self.ly);
            // curl (A_x, A_y) = cos(κ·x) for A = (-κy sin, κx sin)/|κ|², = sin(κ·x) for (κy cos, -κx cos)/|κ|²
            ax = ax
                .add(&s.scaled(-m.cos * ky / k2))
                .add(&c.scaled(m.sin * ky / k2));
            ay = ay
                .add(&s.scaled(m.cos * kx / k2))
                .add(&c.scaled(-m.sin * kx / k2));
        }
        [ax, ay]
    }

    /// The same data as a chart field, for pointwise evaluation of `ρ`.
    pub fn chart_field(&self) -> Result<ChartField> {
        let w = self.conformal_factor();
        let [ax, ay] = self.potential();
        let g = vec![w.clone(), ScalarField::zero(2), ScalarField::zero(2), w];
        ChartField::new(1, g, vec![ax, ay], vec![0.0, 0.0])
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 * self.hx(), j as f64 * self.hy()]
    }

    /// Smallest admissible points per axis for the largest `p`:
    /// `h ≤ √(Lx Ly) / (8 √(p_max N_flux))`, i.e. `N ≥ 8 √(p_max N_flux)` on a square torus.
    pub fn required_points(&self) -> [usize; 2] {
        let p_max = self.p_list.iter().copied().max().unwrap_or(1) as f64;
        let h = self.area().sqrt() / (8.0 * (p_max * self.n_flux() as f64).sqrt());
        [(self.lx / h - 1e-9).ceil() as usize, (self.ly / h - 1e-9).ceil() as usize]
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be positive, got {v}")))
            }
        };
        pos("lx", self.lx)?;
        pos("ly", self.ly)?;
        pos("field.b0", self.field.b0)?;
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::config("nx/ny", "need at least 3 points per axis"));
        }
        if self.p_list.is_empty() || self.p_list.contains(&0) {
            return Err(Error::config("p_list", "needs positive tensor powers"));
        }
        let modes = self.field.modes.iter().chain(match &self.metric {
            TorusMetric::Flat => [].iter(),
            TorusMetric::Conformal { modes, .. } => modes.iter(),
        });
        for (i, m) in modes.enumerate() {
            if m.kx == 0 && m.ky == 0 {
                return Err(Error::config(
                    format!("modes[{i}]"),
                    "zero wave vector belongs in the constant term",
                ));
            }
        }
        let q = self.flux_quanta();
        if (q - q.round()).abs() > FLUX_TOL * q.abs().max(1.0) || q.round() < 1.0 {
            return Err(Error::FluxIntegrality { flux_quanta: q });
        }
        let [rx, ry] = self.required_points();
        if self.nx < rx {
            return Err(Error::Resolution { axis: 0, have: self.nx, required: rx });
        }
        if self.ny < ry {
            return Err(Error::Resolution { axis: 1, have: self.ny, required: ry });
        }
        let (b, w) = (self.b_field(), self.conformal_factor());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let x = self.node(i, j);
                if w.eval(&x) <= 0.0 {
                    return Err(Error::DegenerateMetric { point: x.to_vec() });
                }
                if b.eval(&x) <= 0.0 {
                    return Err(Error::DegenerateField { point: x.to_vec(), det: b.eval(&x) });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TorusConfig {
        TorusConfig {
            nx: 40,
            ny: 40,
            lx: 2.0 * std::f64::consts::PI,
            ly: 2.0 * std::f64::consts::PI,
            field: TorusField {
                b0: 1.0 / std::f64::consts::PI,
                modes: vec![TrigMode { kx: 1, ky: 2, cos: 0.05, sin: -0.03 }],
            },
            metric: TorusMetric::Flat,
            p_list: vec![4],
            eigen: EigenOptions::default(),
            quad_points: 16,
        }
    }

    #[test]
    fn potential_curl_is_the_field() {
        let c = cfg();
        let [ax, ay] = c.potential();
        let b = c.b_field();
        for x in [[0.3, 1.1], [2.0, 5.5], [4.4, 0.2]] {
            let curl = ay.deriv(&x, &[0]) - ax.deriv(&x, &[1]);
            assert!((curl - b.eval(&x)).abs() < 1e-13);
        }
    }

    #[test]
    fn non_integral_flux_is_refused() {
        let mut c = cfg();
        c.field.b0 = 0.3;
        assert!(matches!(c.validate(), Err(Error::FluxIntegrality { .. })));
    }

    #[test]
    fn coarse_grid_is_refused_with_the_required_size() {
        let mut c = cfg();
        c.p_list = vec![40];
        match c.validate() {
            Err(Error::Resolution { required, .. }) => assert_eq!(required, 72),
            other => panic!("{other:?}"),
        }
    }
}
