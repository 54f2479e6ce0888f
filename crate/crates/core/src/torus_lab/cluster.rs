use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::TorusConfig;
use super::eigen::{low_spectrum, SolverKind};
use super::lattice::assemble;
use crate::error::{Error, Result};
use crate::frame_spectral::build_frame;
use crate::rho_formula::rho_closed;
use crate::tensor_geometry::{covariant_jet, endos_at};

/// A low-lying cluster split from the rest of the spectrum by a gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub eigenvalues: Vec<f64>,
    /// Largest eigenvalue inside the cluster.
    pub gap_lo: f64,
    /// Smallest eigenvalue above the cluster.
    pub gap_hi: f64,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Split ascending `values` at the widest consecutive gap whose lower end lies
/// below `threshold`. The gap must straddle `threshold`.
pub fn detect_cluster(values: &[f64], threshold: f64) -> Result<Cluster> {
    let best = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < threshold)
        .max_by(|(_, a), (_, b)| (a[1] - a[0]).total_cmp(&(b[1] - b[0])));
    match best {
        Some((i, w)) if w[1] >= threshold => Ok(Cluster {
            eigenvalues: values[..=i].to_vec(),
            gap_lo: w[0],
            gap_hi: w[1],
        }),
        Some((_, w)) => Err(Error::NoGap {
            threshold,
            detail: format!("widest gap [{:.4}, {:.4}] closes below the threshold", w[0], w[1]),
        }),
        None => Err(Error::NoGap {
            threshold,
            detail: format!("{} eigenvalues, none below the threshold with a successor", values.len()),
        }),
    }
}

/// `(1/vol) ∫ ρ dμ` and `(1/vol) ∫ ρ² dμ` with `dμ = b dx dy`, by the periodic
/// trapezoid rule on `quad_points²` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RhoQuadrature {
    pub volume: f64,
    pub rho_mean: f64,
    pub rho_sq_mean: f64,
    pub rho_max_abs: f64,
}

pub fn rho_quadrature(cfg: &TorusConfig) -> Result<RhoQuadrature> {
    let field = cfg.chart_field()?;
    let b = cfg.b_field();
    let q = cfg.quad_points.max(1);
    let (hx, hy) = (cfg.lx / q as f64, cfg.ly / q as f64);
    let samples: Vec<(f64, f64)> = (0..q * q)
        .into_par_iter()
        .map(|k| {
            let x = [(k % q) as f64 * hx, (k / q) as f64 * hy];
            let at = field.with_base_point(&x);
            let frame = build_frame(&endos_at(&at, &x)?)?;
            let rho = rho_closed(&covariant_jet(&at, &frame)?)?.rho;
            Ok((rho, b.eval(&x) * hx * hy))
        })
        .collect::<Result<_>>()?;
    let volume: f64 = samples.iter().map(|s| s.1).sum();
    Ok(RhoQuadrature {
        volume,
        rho_mean: samples.iter().map(|(r, m)| r * m).sum::<f64>() / volume,
        rho_sq_mean: samples.iter().map(|(r, m)| r * r * m).sum::<f64>() / volume,
        rho_max_abs: samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub p: u32,
    pub d_p: usize,
    pub expected_d_p: usize,
    pub mean_lambda: f64,
    pub mean_lambda_sq: f64,
    pub quad_rho_mean: f64,
    pub quad_rho_sq_mean: f64,
    pub gap_lo: f64,
    pub gap_hi: f64,
    /// `p μ0`, the cluster threshold.
    pub threshold: f64,
    pub max_abs_lambda: f64,
    pub max_residual: f64,
    pub iterations: usize,
    pub solver: SolverKind,
    pub eigenvalues: Vec<f64>,
}

impl ClusterReport {
    pub fn mean_discrepancy(&self) -> f64 {
        (self.mean_lambda - self.quad_rho_mean).abs()
    }

    pub fn sq_discrepancy(&self) -> f64 {
        (self.mean_lambda_sq - self.quad_rho_sq_mean).abs()
    }
}

/// Lowest cluster of `Δ_p - p τ` for one `p`, enlarging the eigensolver block
/// until an eigenvalue above `p μ0` is resolved.
pub fn cluster_for(cfg: &TorusConfig, p: u32, mu0: f64, quad: &RhoQuadrature) -> Result<ClusterReport> {
    let op = assemble(cfg, p)?;
    let expected = p as usize * cfg.n_flux() as usize;
    let threshold = p as f64 * mu0;
    let mut k = (expected + expected / 8 + 4).min(op.dim());
    loop {
        let spec = low_spectrum(&op.matrix, k, &cfg.eigen)?;
        let top = *spec.values.last().unwrap();
        if top <= threshold && k < op.dim() {
            k = (2 * k).min(op.dim());
            continue;
        }
        let cl = detect_cluster(&spec.values, threshold)?;
        let d = cl.size() as f64;
        let max_residual = spec.residuals.iter().copied().fold(0.0, f64::max) / spec.norm_estimate;
        return Ok(ClusterReport {
            p,
            d_p: cl.size(),
            expected_d_p: expected,
            mean_lambda: cl.eigenvalues.iter().sum::<f64>() / d,
            mean_lambda_sq: cl.eigenvalues.iter().map(|l| l * l).sum::<f64>() / d,
            quad_rho_mean: quad.rho_mean,
            quad_rho_sq_mean: quad.rho_sq_mean,
            gap_lo: cl.gap_lo,
            gap_hi: cl.gap_hi,
            threshold,
            max_abs_lambda: cl.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max),
            max_residual,
            iterations: spec.iterations,
            solver: spec.kind,
            eigenvalues: cl.eigenvalues,
        });
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    (slope, my - slope * mx)
}

/// Number of consecutive increases in `values`.
pub fn inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusRun {
    pub n_flux: u32,
    pub mu0: f64,
    pub quadrature: RhoQuadrature,
    /// Slope of the upper gap edge against `p`.
    pub gap_edge_slope: f64,
    /// `gap_edge_slope / (2 μ0)`.
    pub gap_edge_ratio: f64,
    /// Log-log slope of the mean discrepancy against `p`; negative means decay.
    pub mean_rate: f64,
    pub sq_rate: f64,
    pub mean_inversions: usize,
    pub sq_inversions: usize,
    pub reports: Vec<ClusterReport>,
}

/// Cluster statistics for every `p` in the config, compared with quadratures of `ρ`.
pub fn density_compare(cfg: &TorusConfig) -> Result<TorusRun> {
    cfg.validate()?;
    let (b, w) = (cfg.b_field(), cfg.conformal_factor());
    let mu0 = (0..cfg.nx * cfg.ny)
        .map(|k| {
            let x = cfg.node(k % cfg.nx, k / cfg.nx);
            b.eval(&x) / w.eval(&x)
        })
        .fold(f64::INFINITY, f64::min);
    let quad = rho_quadrature(cfg)?;
    let mut ps = cfg.p_list.clone();
    ps.sort_unstable();
    ps.dedup();
    let reports: Vec<ClusterReport> =
        ps.par_iter().map(|&p| cluster_for(cfg, p, mu0, &quad)).collect::<Result<_>>()?;

    let pf: Vec<f64> = reports.iter().map(|r| r.p as f64).collect();
    let (gap_edge_slope, _) = linear_fit(&pf, &reports.iter().map(|r| r.gap_hi).collect::<Vec<_>>());
    let log_p: Vec<f64> = pf.iter().map(|p| p.ln()).collect();
    let rate = |f: fn(&ClusterReport) -> f64| {
        let y: Vec<f64> = reports.iter().map(|r| f(r).max(f64::MIN_POSITIVE).ln()).collect();
        linear_fit(&log_p, &y).0
    };
    let series = |f: fn(&ClusterReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    Ok(TorusRun {
        n_flux: cfg.n_flux(),
        mu0,
        quadrature: quad,
        gap_edge_slope,
        gap_edge_ratio: gap_edge_slope / (2.0 * mu0),
        mean_rate: rate(ClusterReport::mean_discrepancy),
        sq_rate: rate(ClusterReport::sq_discrepancy),
        mean_inversions: inversions(&series(ClusterReport::mean_discrepancy)),
        sq_inversions: inversions(&series(ClusterReport::sq_discrepancy)),
        reports,
    })
}

pub const CSV_HEADER: [&str; 8] =
    ["p", "d_p", "mean_lambda", "mean_lambda_sq", "quad_rho_mean", "quad_rho_sq_mean", "gap_lo", "gap_hi"];

pub fn write_csv<W: Write>(reports: &[ClusterReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record([
            r.p.to_string(),
            r.d_p.to_string(),
            format!("{:.12e}", r.mean_lambda),
            format!("{:.12e}", r.mean_lambda_sq),
            format!("{:.12e}", r.quad_rho_mean),
            format!("{:.12e}", r.quad_rho_sq_mean),
            format!("{:.12e}", r.gap_lo),
            format!("{:.12e}", r.gap_hi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_splits_at_the_widest_straddling_gap() {
        let v = [-0.1, 0.0, 0.05, 0.3, 2.0, 2.1, 5.0];
        let c = detect_cluster(&v, 1.0).unwrap();
        assert_eq!(c.size(), 4);
        assert_eq!((c.gap_lo, c.gap_hi), (0.3, 2.0));
    }

    #[test]
    fn no_gap_when_everything_is_below() {
        assert!(matches!(detect_cluster(&[0.0, 0.1, 0.2], 1.0), Err(Error::NoGap { .. })));
    }

    #[test]
    fn inversions_count_increases() {
        assert_eq!(inversions(&[5.0, 4.0, 4.5, 3.0, 2.0]), 1);
    }
}
