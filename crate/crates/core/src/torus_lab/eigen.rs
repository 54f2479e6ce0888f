use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::EigenOptions;
use super::lattice::Csr;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dense,
    ChebyshevFiltered,
}

/// The lowest eigenpairs of a Hermitian matrix in ascending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one column per value.
    pub vectors: DMatrix<Complex64>,
    /// `‖A v - λ v‖` per pair.
    pub residuals: Vec<f64>,
    pub norm_estimate: f64,
    pub iterations: usize,
    pub kind: SolverKind,
}

fn residuals(a: &Csr, v: &DMatrix<Complex64>, av: &DMatrix<Complex64>, values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(k, &l)| (av.column(k) - v.column(k) * Complex64::new(l, 0.0)).norm())
        .take(a.dim)
        .collect()
}

/// Ascending Hermitian eigendecomposition of a small dense matrix.
fn hermitian_eigen(h: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let dim = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Full spectrum through a dense Hermitian solve.
pub fn dense_spectrum(a: &Csr, k: usize) -> Spectrum {
    let dense = a.to_dense();
    let (values, vectors) = hermitian_eigen(dense);
    let k = k.min(a.dim);
    let v = vectors.columns(0, k).into_owned();
    let av = a.apply_block(&v);
    let (lo, hi) = a.gershgorin();
    Spectrum {
        residuals: residuals(a, &v, &av, &values[..k]),
        values: values[..k].to_vec(),
        vectors: v,
        norm_estimate: lo.abs().max(hi.abs()),
        iterations: 1,
        kind: SolverKind::Dense,
    }
}

/// Scaled Chebyshev filter damping `[cut, upper]` and amplifying below `cut`;
/// `low` is an estimate of the smallest eigenvalue.
fn chebyshev_filter(a: &Csr, x: &DMatrix<Complex64>, degree: usize, cut: f64, upper: f64, low: f64) -> DMatrix<Complex64> {
    let e = 0.5 * (upper - cut);
    let c = 0.5 * (upper + cut);
    let mut sigma = e / (low - c);
    let tau = 2.0 / sigma;
    let shift = |y: &DMatrix<Complex64>| a.apply_block(y) - y * Complex64::new(c, 0.0);
    let mut prev = x.clone();
    let mut cur = shift(x) * Complex64::new(sigma / e, 0.0);
    for _ in 1..degree {
        let next_sigma = 1.0 / (tau - sigma);
        let next = shift(&cur) * Complex64::new(2.0 * next_sigma / e, 0.0)
            - &prev * Complex64::new(sigma * next_sigma, 0.0);
        prev = cur;
        cur = next;
        sigma = next_sigma;
    }
    cur
}

fn orthonormalize(x: DMatrix<Complex64>) -> DMatrix<Complex64> {
    x.qr().q()
}

/// The `k` lowest eigenpairs with `‖A v - λ v‖ ≤ tol ‖A‖`. Small matrices are
/// solved densely; otherwise Chebyshev-filtered subspace iteration on a block
/// of `k + max(10, k/2)` vectors, enlarged whenever a stretch of sweeps fails to
/// halve the worst residual (a degenerate level straddling the filter cut).
pub fn low_spectrum(a: &Csr, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
    if k == 0 {
        return Err(Error::Precondition("requested zero eigenpairs".into()));
    }
    let extra = (k / 2).max(10);
    let mut block = k + extra;
    if a.dim <= opts.dense_max || 2 * block >= a.dim {
        return Ok(dense_spectrum(a, k));
    }
    let (lo, hi) = a.gershgorin();
    let norm = lo.abs().max(hi.abs());
    let bound = opts.tol * norm;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_block = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    };
    let mut x = random_block(a.dim, block);
    let mut worst = f64::INFINITY;
    let mut checkpoint = (0, f64::INFINITY);
    for it in 1..=opts.max_iter {
        let q = orthonormalize(x);
        let aq = a.apply_block(&q);
        let (theta, w) = hermitian_eigen(q.adjoint() * &aq);
        let v = q * &w;
        let av = aq * &w;
        let res = residuals(a, &v, &av, &theta[..k]);
        worst = res.iter().copied().fold(0.0, f64::max);
        if worst <= bound {
            return Ok(Spectrum {
                values: theta[..k].to_vec(),
                vectors: v.columns(0, k).into_owned(),
                residuals: res,
                norm_estimate: norm,
                iterations: it,
                kind: SolverKind::ChebyshevFiltered,
            });
        }
        let cut = theta[block - 1];
        let filtered = chebyshev_filter(a, &v, opts.filter_degree, cut, hi, theta[0]);
        if it - checkpoint.0 >= STALL_SWEEPS {
            if worst > 0.5 * checkpoint.1 && 2 * (block + extra) < a.dim {
                let fresh = random_block(a.dim, extra);
                block += extra;
                x = DMatrix::from_fn(a.dim, block, |r, c| {
                    if c < filtered.ncols() { filtered[(r, c)] } else { fresh[(r, c - filtered.ncols())] }
                });
                checkpoint = (it, worst);
                continue;
            }
            checkpoint = (it, worst);
        }
        x = filtered;
    }
    Err(Error::Convergence { iterations: opts.max_iter, residual: worst / norm })
}

/// Sweeps between stagnation checks.
const STALL_SWEEPS: usize = 6;
