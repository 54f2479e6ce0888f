//! Analytic scalar functions on a coordinate chart.
//!
//! A [`ScalarField`] is a finite sum of separable terms
//! `c * prod_axis x_axis^k * h(w x_axis)` with `h` one of `1`, `cos`, `sin`, `exp`.
//! Partial derivatives of any order are evaluated exactly, and line integrals
//! along coordinate axes have closed forms, so nothing downstream needs
//! finite differences.

use std::f64::consts::FRAC_PI_2;

/// Periodic or exponential part of a one-axis factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Wave {
    One,
    Cos(f64),
    Sin(f64),
    Exp(f64),
}

impl Wave {
    fn deriv(&self, t: f64, order: usize) -> f64 {
        match *self {
            Wave::One => {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Wave::Cos(w) => w.powi(order as i32) * (w * t + order as f64 * FRAC_PI_2).cos(),
            Wave::Sin(w) => w.powi(order as i32) * (w * t + order as f64 * FRAC_PI_2).sin(),
            Wave::Exp(w) => w.powi(order as i32) * (w * t).exp(),
        }
    }

    /// `m`-fold antiderivative evaluated at `t`, or `None` when it is not
    /// again a wave (zero frequency).
    fn antideriv(&self, t: f64, m: usize) -> Option<f64> {
        match *self {
            Wave::One => None,
            Wave::Cos(w) | Wave::Sin(w) | Wave::Exp(w) if w == 0.0 => None,
            Wave::Cos(w) => Some(w.powi(-(m as i32)) * (w * t - m as f64 * FRAC_PI_2).cos()),
            Wave::Sin(w) => Some(w.powi(-(m as i32)) * (w * t - m as f64 * FRAC_PI_2).sin()),
            Wave::Exp(w) => Some(w.powi(-(m as i32)) * (w * t).exp()),
        }
    }

    /// Collapse zero-frequency waves to constants.
    fn normalized(self) -> (f64, Wave) {
        match self {
            Wave::Cos(w) if w == 0.0 => (1.0, Wave::One),
            Wave::Sin(w) if w == 0.0 => (0.0, Wave::One),
            Wave::Exp(w) if w == 0.0 => (1.0, Wave::One),
            other => (1.0, other),
        }
    }
}

/// `x^pow * wave(x)` along a single axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisFactor {
    pub axis: usize,
    pub pow: u32,
    pub wave: Wave,
}

impl AxisFactor {
    pub fn pow(axis: usize, pow: u32) -> Self {
        AxisFactor {
            axis,
            pow,
            wave: Wave::One,
        }
    }

    pub fn wave(axis: usize, wave: Wave) -> Self {
        AxisFactor { axis, pow: 0, wave }
    }

    fn deriv(&self, t: f64, order: usize) -> f64 {
        // Leibniz over x^k * h
        let k = self.pow as usize;
        let mut sum = 0.0;
        let mut binom = 1.0;
        for i in 0..=order {
            if i > 0 {
                binom = binom * (order - i + 1) as f64 / i as f64;
            }
            if i > k {
                break;
            }
            let hd = self.wave.deriv(t, order - i);
            if hd == 0.0 {
                continue;
            }
            sum += binom * falling(k, i) * t.powi((k - i) as i32) * hd;
        }
        sum
    }

    /// Antiderivative at `t` (arbitrary constant).
    fn antideriv(&self, t: f64) -> f64 {
        let k = self.pow as usize;
        match self.wave.antideriv(t, 1) {
            None => {
                let (c, w) = self.wave.normalized();
                debug_assert_eq!(w, Wave::One);
                c * t.powi(k as i32 + 1) / (k as f64 + 1.0)
            }
            Some(_) => {
                // repeated integration by parts
                let mut sum = 0.0;
                let mut sign = 1.0;
                for i in 0..=k {
                    let h = self.wave.antideriv(t, i + 1).unwrap();
                    sum += sign * falling(k, i) * t.powi((k - i) as i32) * h;
                    sign = -sign;
                }
                sum
            }
        }
    }
}

fn falling(k: usize, i: usize) -> f64 {
    (0..i).map(|j| (k - j) as f64).product()
}

/// One separable term; `factors` holds at most one entry per axis, sorted by axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<AxisFactor>,
}

impl Term {
    pub fn new(coeff: f64, factors: impl IntoIterator<Item = AxisFactor>) -> Option<Self> {
        let mut term = Term {
            coeff,
            factors: Vec::new(),
        };
        for f in factors {
            term = term.times_factor(f)?;
        }
        Some(term)
    }

    fn times_factor(mut self, f: AxisFactor) -> Option<Self> {
        let (c, wave) = f.wave.normalized();
        self.coeff *= c;
        let f = AxisFactor { wave, ..f };
        match self.factors.iter_mut().find(|g| g.axis == f.axis) {
            Some(g) => {
                let wave = match (g.wave, f.wave) {
                    (Wave::One, w) | (w, Wave::One) => w,
                    (Wave::Exp(a), Wave::Exp(b)) => Wave::Exp(a + b),
                    _ => return None,
                };
                g.pow += f.pow;
                g.wave = wave;
            }
            None => {
                self.factors.push(f);
                self.factors.sort_by_key(|g| g.axis);
            }
        }
        Some(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.factors
            .iter()
            .fold(self.coeff, |acc, f| acc * f.deriv(x[f.axis], 0))
    }

    fn deriv(&self, x: &[f64], orders: &[usize]) -> f64 {
        for (axis, &o) in orders.iter().enumerate() {
            if o > 0 && !self.factors.iter().any(|f| f.axis == axis) {
                return 0.0;
            }
        }
        self.factors
            .iter()
            .fold(self.coeff, |acc, f| acc * f.deriv(x[f.axis], orders[f.axis]))
    }
}

/// Finite sum of separable analytic terms on `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub dim: usize,
    pub terms: Vec<Term>,
}

impl ScalarField {
    pub fn zero(dim: usize) -> Self {
        ScalarField {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut f = Self::zero(dim);
        if c != 0.0 {
            f.terms.push(Term {
                coeff: c,
                factors: Vec::new(),
            });
        }
        f
    }

    /// `c * x^powers` (monomial with one exponent per axis).
    pub fn monomial(dim: usize, c: f64, powers: &[u32]) -> Self {
        let factors = powers
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(axis, &k)| AxisFactor::pow(axis, k));
        ScalarField {
            dim,
            terms: vec![Term::new(c, factors).expect("pure powers always multiply")],
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<Term>) -> Self {
        ScalarField { dim, terms }
    }

    pub fn push(&mut self, term: Term) {
        if term.coeff != 0.0 {
            self.terms.push(term);
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Mixed partial derivative; `axes` lists one entry per differentiation.
    pub fn deriv(&self, x: &[f64], axes: &[usize]) -> f64 {
        let mut orders = vec![0usize; self.dim];
        for &a in axes {
            orders[a] += 1;
        }
        self.terms.iter().map(|t| t.deriv(x, &orders)).sum()
    }

    /// Symbolic partial derivative along `axis`.
    pub fn partial(&self, axis: usize) -> ScalarField {
        let mut out = ScalarField::zero(self.dim);
        for t in &self.terms {
            let Some(idx) = t.factors.iter().position(|f| f.axis == axis) else {
                continue;
            };
            let f = t.factors[idx];
            if f.pow > 0 {
                let mut d = t.clone();
                d.coeff *= f.pow as f64;
                d.factors[idx].pow -= 1;
                out.push(d);
            }
            let (c, wave) = match f.wave {
                Wave::One => continue,
                Wave::Cos(w) => (-w, Wave::Sin(w)),
                Wave::Sin(w) => (w, Wave::Cos(w)),
                Wave::Exp(w) => (w, Wave::Exp(w)),
            };
            let mut d = t.clone();
            d.coeff *= c;
            d.factors[idx].wave = wave;
            out.push(d);
        }
        out.prune()
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= c;
        }
        out.prune()
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    /// Product of two fields; `None` if some product of waves on a shared
    /// axis leaves the representable family (e.g. `exp * cos`).
    pub fn checked_mul(&self, other: &ScalarField) -> Option<ScalarField> {
        let mut out = ScalarField::zero(self.dim);
        for a in &self.terms {
            for b in &other.terms {
                for t in mul_terms(a, b)? {
                    out.push(t);
                }
            }
        }
        Some(out.prune())
    }

    /// Exact integral of the field along `axis` from `x` to `x + len * e_axis`.
    pub fn line_integral(&self, x: &[f64], axis: usize, len: f64) -> f64 {
        let t0 = x[axis];
        let t1 = t0 + len;
        self.terms
            .iter()
            .map(|t| {
                let mut rest = t.coeff;
                let mut along = None;
                for f in &t.factors {
                    if f.axis == axis {
                        along = Some(f);
                    } else {
                        rest *= f.deriv(x[f.axis], 0);
                    }
                }
                match along {
                    None => rest * len,
                    Some(f) => rest * (f.antideriv(t1) - f.antideriv(t0)),
                }
            })
            .sum()
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|t| t.coeff != 0.0);
        self
    }
}

fn mul_terms(a: &Term, b: &Term) -> Option<Vec<Term>> {
    // expand products of trig waves on shared axes with product-to-sum
    let mut partial = vec![Term {
        coeff: a.coeff * b.coeff,
        factors: a.factors.clone(),
    }];
    for f in &b.factors {
        let mut next = Vec::new();
        for t in partial {
            let shared = t.factors.iter().find(|g| g.axis == f.axis).copied();
            match shared {
                Some(g) if is_trig(g.wave) && is_trig(f.wave) => {
                    for (c, wave) in trig_product(g.wave, f.wave) {
                        let mut u = t.clone();
                        let slot = u.factors.iter_mut().find(|h| h.axis == f.axis).unwrap();
                        slot.pow += f.pow;
                        slot.wave = Wave::One;
                        u.coeff *= c;
                        next.push(u.times_factor(AxisFactor::wave(f.axis, wave))?);
                    }
                }
                _ => next.push(t.times_factor(*f)?),
            }
        }
        partial = next;
    }
    Some(partial)
}

fn is_trig(w: Wave) -> bool {
    matches!(w, Wave::Cos(_) | Wave::Sin(_))
}

fn trig_product(a: Wave, b: Wave) -> [(f64, Wave); 2] {
    match (a, b) {
        (Wave::Cos(p), Wave::Cos(q)) => [(0.5, Wave::Cos(p - q)), (0.5, Wave::Cos(p + q))],
        (Wave::Sin(p), Wave::Sin(q)) => [(0.5, Wave::Cos(p - q)), (-0.5, Wave::Cos(p + q))],
        (Wave::Sin(p), Wave::Cos(q)) => [(0.5, Wave::Sin(p + q)), (0.5, Wave::Sin(p - q))],
        (Wave::Cos(p), Wave::Sin(q)) => [(0.5, Wave::Sin(p + q)), (0.5, Wave::Sin(q - p))],
        _ => unreachable!("trig_product called on non-trig waves"),
    }
}
