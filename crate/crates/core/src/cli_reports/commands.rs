use serde::Serialize;

use super::config::{Mode, RunConfig, Tolerances};
use crate::error::{Error, Result};
use crate::frame_spectral::{build_frame, q_coefficients};
use crate::model_oracle::{
    displayed_terms, jet_identities, model_identities, rho_oracle_with, DisplayedTerms, IdentityCheck, ModelContext,
    OracleBreakdown,
};
use crate::random_fields::random_field;
use crate::rho_formula::{rho_closed, rho_closed_weighted, rho_polar, RhoBreakdown, J1_WEIGHT_UNCORRECTED};
use crate::tensor_geometry::{covariant_jet, endos_at, ChartField, GeometryJet};
use crate::torus_lab::{density_compare, write_csv, TorusRun};

/// Jet residuals above this multiple of the jet scale disqualify a field.
pub const JET_RTOL: f64 = 1e-8;

/// Common envelope of every report; field order is fixed.
#[derive(Clone, Debug, Serialize)]
pub struct Report<T> {
    pub command: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub result: T,
}

/// Rendered output of one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub mode: Mode,
    pub pass: bool,
    pub json: String,
    pub csv: Option<String>,
    pub summary: Vec<String>,
}

fn envelope<T: Serialize>(mode: Mode, cfg: &RunConfig, pass: bool, result: T) -> Report<T> {
    Report {
        command: mode.name(),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        tolerances: cfg.tolerances.clone(),
        pass,
        result,
    }
}

fn render<T: Serialize>(mode: Mode, cfg: &RunConfig, pass: bool, result: T, summary: Vec<String>) -> Outcome {
    let json = serde_json::to_string_pretty(&envelope(mode, cfg, pass, result)).expect("report serializes");
    Outcome { mode, pass, json, csv: None, summary }
}

/// Jet at the field's base point in its diagonalizing frame.
pub fn jet_at(field: &ChartField) -> Result<GeometryJet> {
    let frame = build_frame(&endos_at(field, &field.x0)?)?;
    covariant_jet(field, &frame)
}

fn configured_field(cfg: &RunConfig) -> Result<ChartField> {
    cfg.field_spec().ok_or_else(|| Error::config("field", "this command needs a field spec"))?.to_field()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoReport {
    pub a: Vec<f64>,
    pub closed: RhoBreakdown,
    pub polar: RhoBreakdown,
    pub difference: f64,
    pub relative_difference: f64,
    /// `ρ` with the `J1` group weighted by `1/9`, kept for comparison.
    pub rho_j1_weight_one_ninth: f64,
}

pub fn rho_report(field: &ChartField) -> Result<RhoReport> {
    let jet = jet_at(field)?;
    let closed = rho_closed(&jet)?;
    let polar = rho_polar(&jet)?;
    Ok(RhoReport {
        a: closed.a.clone(),
        difference: polar.rho - closed.rho,
        relative_difference: rel(polar.rho, closed.rho),
        rho_j1_weight_one_ninth: rho_closed_weighted(&jet, J1_WEIGHT_UNCORRECTED)?.rho,
        closed,
        polar,
    })
}

pub fn cmd_rho(cfg: &RunConfig) -> Result<Outcome> {
    let r = rho_report(&configured_field(cfg)?)?;
    let pass = r.relative_difference <= cfg.tolerances.rho;
    let summary = vec![
        format!("a = {:?}", r.a),
        format!("rho (closed) = {:.12e}", r.closed.rho),
        format!("rho (polar)  = {:.12e}", r.polar.rho),
        format!("relative difference {:.3e} (tol {:.1e})", r.relative_difference, cfg.tolerances.rho),
    ];
    Ok(render(Mode::Rho, cfg, pass, r, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub seed: u64,
    pub a: Vec<f64>,
    pub rho_closed: f64,
    pub rho_polar: f64,
    pub rho_oracle: f64,
    pub closed_vs_oracle: f64,
    pub polar_vs_closed: f64,
    pub closed: RhoBreakdown,
    pub oracle: OracleBreakdown,
    pub displayed: DisplayedTerms,
}

#[derive(Clone, Debug, Serialize)]
pub struct Skipped {
    pub n: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCompareReport {
    pub rows: Vec<OracleRow>,
    pub skipped: Vec<Skipped>,
    pub max_closed_vs_oracle: f64,
    pub max_polar_vs_closed: f64,
}

/// Seed of the `i`-th random field of half-dimension `n`.
pub fn field_seed(base: u64, n: usize, i: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(1000 * n as u64 + i as u64)
}

pub fn oracle_row(field: &ChartField, n: usize, seed: u64, degree: usize) -> Result<OracleRow> {
    let jet = jet_at(field)?;
    let res = jet.residuals().max();
    if res > JET_RTOL * jet.scale() {
        return Err(Error::InconsistentJet { what: "jet identities".into(), residual: res });
    }
    let q = q_coefficients(&jet);
    let closed = rho_closed(&jet)?;
    let polar = rho_polar(&jet)?;
    let ctx = ModelContext::new(&jet.a, degree)?;
    let oracle = rho_oracle_with(&ctx, &jet, &q)?;
    Ok(OracleRow {
        n,
        seed,
        a: jet.a.clone(),
        rho_closed: closed.rho,
        rho_polar: polar.rho,
        rho_oracle: oracle.rho,
        closed_vs_oracle: rel(closed.rho, oracle.rho),
        polar_vs_closed: rel(polar.rho, closed.rho),
        displayed: displayed_terms(&jet, &q),
        closed,
        oracle,
    })
}

pub fn oracle_compare(cfg: &RunConfig) -> OracleCompareReport {
    let (mut rows, mut skipped) = (Vec::new(), Vec::new());
    for &n in &cfg.oracle.ns {
        for i in 0..cfg.oracle.fields_per_n {
            let seed = field_seed(cfg.seed, n, i);
            match oracle_row(&random_field(n, seed), n, seed, cfg.oracle.degree) {
                Ok(r) => rows.push(r),
                Err(e) => skipped.push(Skipped { n, seed, reason: e.to_string() }),
            }
        }
    }
    let worst = |f: fn(&OracleRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    OracleCompareReport {
        max_closed_vs_oracle: worst(|r| r.closed_vs_oracle),
        max_polar_vs_closed: worst(|r| r.polar_vs_closed),
        rows,
        skipped,
    }
}

pub fn cmd_oracle_compare(cfg: &RunConfig) -> Result<Outcome> {
    let r = oracle_compare(cfg);
    let pass = !r.rows.is_empty()
        && r.max_closed_vs_oracle <= cfg.tolerances.oracle
        && r.max_polar_vs_closed <= cfg.tolerances.rho;
    let summary = vec![
        format!("{} fields compared, {} skipped", r.rows.len(), r.skipped.len()),
        format!("max |closed - oracle| / (1 + |rho|) = {:.3e} (tol {:.1e})", r.max_closed_vs_oracle, cfg.tolerances.oracle),
        format!("max |polar - closed| / (1 + |rho|) = {:.3e} (tol {:.1e})", r.max_polar_vs_closed, cfg.tolerances.rho),
    ];
    Ok(render(Mode::OracleCompare, cfg, pass, r, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    pub failed: usize,
}

impl IdentityReport {
    fn new(checks: Vec<IdentityCheck>) -> Self {
        let failed = checks.iter().filter(|c| !c.pass).count();
        IdentityReport { checks, failed }
    }

    fn summary(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{:<4} {:<60} {:.3e}", if c.pass { "ok" } else { "FAIL" }, c.name, c.residual))
            .collect();
        lines.push(format!("{} checks, {} failed", self.checks.len(), self.failed));
        lines
    }
}

fn with_tol(checks: Vec<IdentityCheck>, tol: f64, prefix: &str) -> Vec<IdentityCheck> {
    checks
        .into_iter()
        // built-in bounds tighter than the configured one are kept
        .map(|c| IdentityCheck::new(format!("{prefix}{}", c.name), c.residual, c.tol.min(tol)))
        .collect()
}

/// Fock-space and jet identities for one field.
pub fn identity_checks(ctx: &ModelContext, jet: &GeometryJet, seed: u64, tol: f64, prefix: &str) -> Result<Vec<IdentityCheck>> {
    let q = q_coefficients(jet);
    let mut checks = with_tol(model_identities(ctx, seed)?, tol, prefix);
    checks.extend(with_tol(jet_identities(ctx, jet, &q)?, tol, prefix));
    Ok(checks)
}

pub fn cmd_identities(cfg: &RunConfig) -> Result<Outcome> {
    let field = match cfg.field_spec() {
        Some(spec) => spec.to_field()?,
        None => random_field(2, cfg.seed),
    };
    let jet = jet_at(&field)?;
    let ctx = ModelContext::new(&jet.a, cfg.oracle.degree)?;
    let r = IdentityReport::new(identity_checks(&ctx, &jet, cfg.seed, cfg.tolerances.identity, "")?);
    let summary = r.summary();
    Ok(render(Mode::Identities, cfg, r.failed == 0, r, summary))
}

/// The full self-check; `make_ctx` builds the model context for given `a` and degree.
pub fn selfcheck_with(
    cfg: &RunConfig,
    make_ctx: impl Fn(&[f64], usize) -> Result<ModelContext>,
) -> Result<IdentityReport> {
    let mut checks = Vec::new();
    for &n in &cfg.oracle.ns {
        let jet = jet_at(&random_field(n, field_seed(cfg.seed, n, 0)))?;
        let q = q_coefficients(&jet);
        let ctx = make_ctx(&jet.a, cfg.oracle.degree)?;
        let prefix = format!("n={n}: ");
        checks.extend(identity_checks(&ctx, &jet, cfg.seed, cfg.tolerances.identity, &prefix)?);
        let lo = rho_oracle_with(&ctx, &jet, &q)?.rho;
        let hi = rho_oracle_with(&make_ctx(&jet.a, cfg.oracle.degree_check)?, &jet, &q)?.rho;
        checks.push(IdentityCheck::new(
            format!("{prefix}oracle D={} vs D={}", cfg.oracle.degree, cfg.oracle.degree_check),
            rel(lo, hi),
            cfg.tolerances.truncation,
        ));
        let closed = rho_closed(&jet)?.rho;
        checks.push(IdentityCheck::new(format!("{prefix}closed form vs oracle"), rel(closed, lo), cfg.tolerances.oracle));
    }
    Ok(IdentityReport::new(checks))
}

pub fn cmd_selfcheck(cfg: &RunConfig) -> Result<Outcome> {
    let r = selfcheck_with(cfg, ModelContext::new)?;
    let summary = r.summary();
    Ok(render(Mode::Selfcheck, cfg, r.failed == 0, r, summary))
}

/// Trend acceptance for the torus sweep. The finite-`p` thresholds are an
/// engineering budget; only the `p → ∞` limit is a mathematical claim.
#[derive(Clone, Debug, Serialize)]
pub struct TrendAcceptance {
    pub mean_monotone: bool,
    pub sq_monotone: bool,
    /// Final discrepancy over `|quad_rho_mean|`; below 0.25 passes.
    pub mean_final_ratio: f64,
    pub sq_final_ratio: f64,
    pub note: &'static str,
}

pub const TREND_NOTE: &str = "finite-p thresholds are an engineering budget, not a bound";

pub fn trend_acceptance(run: &TorusRun) -> TrendAcceptance {
    let last = run.reports.last();
    let ratio = |d: f64, q: f64| d / q.abs();
    TrendAcceptance {
        mean_monotone: run.mean_inversions <= 1,
        sq_monotone: run.sq_inversions <= 1,
        mean_final_ratio: last.map_or(f64::NAN, |r| ratio(r.mean_discrepancy(), r.quad_rho_mean)),
        sq_final_ratio: last.map_or(f64::NAN, |r| ratio(r.sq_discrepancy(), r.quad_rho_sq_mean)),
        note: TREND_NOTE,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusReport {
    pub run: TorusRun,
    pub trend: TrendAcceptance,
}

pub fn cmd_torus(cfg: &RunConfig) -> Result<Outcome> {
    let tc = cfg.torus_config().ok_or_else(|| Error::config("torus", "this command needs a torus config"))?;
    let run = density_compare(tc)?;
    let mut csv = Vec::new();
    write_csv(&run.reports, &mut csv)?;
    let trend = trend_acceptance(&run);
    let mut summary: Vec<String> = run
        .reports
        .iter()
        .map(|r| {
            format!(
                "p={:<3} d_p={:<4} mean={:+.4e} mean_sq={:.4e} gap=[{:.4}, {:.4}]",
                r.p, r.d_p, r.mean_lambda, r.mean_lambda_sq, r.gap_lo, r.gap_hi
            )
        })
        .collect();
    summary.push(format!(
        "mu0={:.6} gap-edge slope/(2 mu0)={:.4} discrepancy log-log rates: mean {:.3}, sq {:.3}",
        run.mu0, run.gap_edge_ratio, run.mean_rate, run.sq_rate
    ));
    let mut out = render(Mode::Torus, cfg, true, TorusReport { run, trend }, summary);
    out.csv = Some(String::from_utf8(csv).expect("csv is utf-8"));
    Ok(out)
}

pub fn run(mode: Mode, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(Error::config("mode", format!("config is for `{}`, command is `{}`", m.name(), mode.name())));
        }
    }
    match mode {
        Mode::Rho => cmd_rho(cfg),
        Mode::OracleCompare => cmd_oracle_compare(cfg),
        Mode::Identities => cmd_identities(cfg),
        Mode::Selfcheck => cmd_selfcheck(cfg),
        Mode::Torus => cmd_torus(cfg),
    }
}
