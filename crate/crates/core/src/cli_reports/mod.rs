//! Config ingestion, command orchestration and machine-readable reports.
//!
//! Reports are pretty-printed JSON with a fixed field order and embed the
//! SHA-256 of the resolved config, so identical inputs give identical bytes.

mod commands;
mod config;
mod field_spec;

pub use commands::{
    cmd_identities, cmd_oracle_compare, cmd_rho, cmd_selfcheck, cmd_torus, field_seed, identity_checks, jet_at,
    oracle_compare, oracle_row, rho_report, run, selfcheck_with, trend_acceptance, IdentityReport, OracleCompareReport,
    OracleRow, Outcome, Report, RhoReport, Skipped, TorusReport, TrendAcceptance, JET_RTOL, TREND_NOTE,
};
pub use config::{parse_json, DocRef, Mode, OracleSweep, RunConfig, Tolerances};
pub use field_spec::{FieldSpec, MetricSpec, TermSpec, WaveKind, WaveSpec};

use std::path::Path;

use crate::error::Result;

/// Write `<mode>.json` (and `<mode>.csv` when present) into `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join(format!("{}.json", outcome.mode.name()));
    std::fs::write(&json, &outcome.json)?;
    written.push(json);
    if let Some(csv) = &outcome.csv {
        let path = dir.join(format!("{}.csv", outcome.mode.name()));
        std::fs::write(&path, csv)?;
        written.push(path);
    }
    Ok(written)
}
