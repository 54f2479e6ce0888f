use nalgebra::DMatrix;
use num_complex::Complex64;

use super::config::TorusConfig;
use crate::error::{Error, Result};

/// Hermiticity bound for an assembled operator, relative to its largest entry.
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Compressed sparse rows over `Complex64`.
#[derive(Clone, Debug)]
pub struct Csr {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let dim = rows.len();
        let mut indptr = Vec::with_capacity(dim + 1);
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            // coincident neighbours on tiny grids are merged
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Csr { dim, indptr, indices, values }
    }

    /// Build from `(row, col, value)` entries; repeated positions are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let mut rows = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::Precondition(format!("entry ({r}, {c}) outside a {dim}x{dim} matrix")));
            }
            rows[r].push((c, v));
        }
        Ok(Csr::from_rows(rows))
    }

    /// `D A D*` with `D = diag(e^{i θ})`, the action of a lattice gauge transformation.
    pub fn gauge_transformed(&self, theta: &[f64]) -> Csr {
        assert_eq!(theta.len(), self.dim, "one angle per node");
        let mut out = self.clone();
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                out.values[k] *= Complex64::from_polar(1.0, theta[r] - theta[c]);
            }
        }
        out
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|e| e.0 == c).map_or(Complex64::new(0.0, 0.0), |e| e.1)
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `A X` column by column.
    pub fn apply_block(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut y = DMatrix::zeros(x.nrows(), x.ncols());
        for k in 0..x.ncols() {
            let (xs, ys) = (x.column(k), &mut y.column_mut(k));
            self.matvec(xs.as_slice(), ys.as_mut_slice());
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `max |A_rc - conj(A_cr)| / max |A_rc|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst / scale
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in 0..self.dim {
            let (mut d, mut off) = (0.0, 0.0);
            for (c, v) in self.row(r) {
                if c == r {
                    d = v.re;
                } else {
                    off += v.norm();
                }
            }
            lo = lo.min(d - off);
            hi = hi.max(d + off);
        }
        (lo, hi)
    }
}

/// `Δ_p - p τ` on the periodic grid, with nodes indexed `i + nx j`.
#[derive(Clone, Debug)]
pub struct LatticeOperator {
    pub p: u32,
    pub nx: usize,
    pub ny: usize,
    pub matrix: Csr,
    /// Link from `(i, j)` to `(i + 1, j)`.
    pub ux: Vec<Complex64>,
    /// Link from `(i, j)` to `(i, j + 1)`.
    pub uy: Vec<Complex64>,
    /// `τ = b / w` at the nodes.
    pub tau: Vec<f64>,
    /// Conformal factor at the nodes.
    pub weight: Vec<f64>,
}

impl LatticeOperator {
    pub fn dim(&self) -> usize {
        self.nx * self.ny
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        (i % self.nx) + self.nx * (j % self.ny)
    }

    /// Counter-clockwise holonomy angle of each plaquette.
    pub fn plaquette_angles(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let h = self.ux[self.idx(i, j)]
                    * self.uy[self.idx(i + 1, j)]
                    * self.ux[self.idx(i, j + 1)].conj()
                    * self.uy[self.idx(i, j)].conj();
                out.push(h.arg());
            }
        }
        out
    }

    /// Deviation of the summed plaquette angles from `-2π p N_flux`.
    pub fn total_flux_residual(&self, n_flux: u32) -> f64 {
        let total: f64 = self.plaquette_angles().iter().sum();
        (total + 2.0 * std::f64::consts::PI * self.p as f64 * n_flux as f64).abs()
    }
}

/// Assemble the five-point magnetic Laplacian, weighted by `w^{-1/2}` on both
/// sides for a conformal metric, minus `p τ` on the diagonal.
pub fn assemble(cfg: &TorusConfig, p: u32) -> Result<LatticeOperator> {
    cfg.validate()?;
    let (nx, ny, hx, hy) = (cfg.nx, cfg.ny, cfg.hx(), cfg.hy());
    let pf = p as f64;
    let [ax, ay] = cfg.potential();
    let (b, w) = (cfg.b_field(), cfg.conformal_factor());
    let dim = nx * ny;
    let idx = |i: usize, j: usize| (i % nx) + nx * (j % ny);

    let mut ux = vec![Complex64::new(0.0, 0.0); dim];
    let mut uy = ux.clone();
    let (mut tau, mut weight) = (vec![0.0; dim], vec![0.0; dim]);
    for j in 0..ny {
        for i in 0..nx {
            let x = cfg.node(i, j);
            let mut phase_x = -pf * ax.line_integral(&x, 0, hx);
            if i + 1 == nx {
                // sections on the torus satisfy ψ(x + Lx, y) = exp(i p b0 Lx y) ψ(x, y)
                phase_x += pf * cfg.field.b0 * cfg.lx * x[1];
            }
            let phase_y = -pf * ay.line_integral(&x, 1, hy);
            let r = idx(i, j);
            ux[r] = Complex64::from_polar(1.0, phase_x);
            uy[r] = Complex64::from_polar(1.0, phase_y);
            weight[r] = w.eval(&x);
            tau[r] = b.eval(&x) / weight[r];
        }
    }

    let (cx, cy) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    let mut rows = Vec::with_capacity(dim);
    for j in 0..ny {
        for i in 0..nx {
            let r = idx(i, j);
            let sw = |c: usize| 1.0 / (weight[r] * weight[c]).sqrt();
            let (e, wst, n, s) = (idx(i + 1, j), idx(i + nx - 1, j), idx(i, j + 1), idx(i, j + ny - 1));
            rows.push(vec![
                (r, Complex64::new((2.0 * cx + 2.0 * cy) / weight[r] - pf * tau[r], 0.0)),
                (e, -ux[r] * cx * sw(e)),
                (wst, -ux[wst].conj() * cx * sw(wst)),
                (n, -uy[r] * cy * sw(n)),
                (s, -uy[s].conj() * cy * sw(s)),
            ]);
        }
    }
    let matrix = Csr::from_rows(rows);
    let herm = matrix.hermiticity_residual();
    if herm > HERMITIAN_TOL {
        return Err(Error::Invariant { name: "lattice hermiticity".into(), residual: herm, tol: HERMITIAN_TOL });
    }
    let op = LatticeOperator { p, nx, ny, matrix, ux, uy, tau, weight };
    let flux = op.total_flux_residual(cfg.n_flux());
    let flux_tol = 1e-9 * (1.0 + pf * cfg.n_flux() as f64);
    if flux > flux_tol {
        return Err(Error::Invariant { name: "plaquette flux".into(), residual: flux, tol: flux_tol });
    }
    Ok(op)
}
