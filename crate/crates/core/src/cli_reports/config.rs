use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::field_spec::FieldSpec;
use crate::error::{Error, Result};
use crate::torus_lab::TorusConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Identities,
    Rho,
    OracleCompare,
    Torus,
    Selfcheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Identities => "identities",
            Mode::Rho => "rho",
            Mode::OracleCompare => "oracle-compare",
            Mode::Torus => "torus",
            Mode::Selfcheck => "selfcheck",
        }
    }
}

/// A document given inline or as a path relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DocRef<T> {
    Path(PathBuf),
    Inline(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// `|ρ_polar - ρ_closed| / (1 + |ρ|)`.
    #[serde(default = "tol_rho")]
    pub rho: f64,
    /// `|ρ_closed - ρ_oracle| / (1 + |ρ|)`.
    #[serde(default = "tol_oracle")]
    pub oracle: f64,
    #[serde(default = "tol_identity")]
    pub identity: f64,
    /// Oracle agreement between truncation degrees.
    #[serde(default = "tol_truncation")]
    pub truncation: f64,
}

fn tol_rho() -> f64 {
    1e-7
}
fn tol_oracle() -> f64 {
    1e-6
}
fn tol_identity() -> f64 {
    1e-9
}
fn tol_truncation() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rho: tol_rho(), oracle: tol_oracle(), identity: tol_identity(), truncation: tol_truncation() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSweep {
    #[serde(default = "default_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "default_count")]
    pub fields_per_n: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Second truncation degree for the independence check.
    #[serde(default = "default_degree_hi")]
    pub degree_check: usize,
}

fn default_ns() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_count() -> usize {
    20
}
fn default_degree() -> usize {
    6
}
fn default_degree_hi() -> usize {
    8
}

impl Default for OracleSweep {
    fn default() -> Self {
        OracleSweep {
            ns: default_ns(),
            fields_per_n: default_count(),
            degree: default_degree(),
            degree_check: default_degree_hi(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<DocRef<FieldSpec>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleSweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<DocRef<TorusConfig>>,
}

/// Parse JSON, reporting the offending path on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], origin: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(
            format!("{}:{}", origin.display(), if path.is_empty() { ".".into() } else { path }),
            e.into_inner().to_string(),
        )
    })
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))
}

fn resolve<T: serde::de::DeserializeOwned + Clone>(doc: &DocRef<T>, base: &Path) -> Result<T> {
    match doc {
        DocRef::Inline(t) => Ok(t.clone()),
        DocRef::Path(p) => {
            let full = if p.is_absolute() { p.clone() } else { base.join(p) };
            parse_json(&read(&full)?, &full)
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = parse_json(&read(path)?, path)?;
        cfg.resolved(path.parent().unwrap_or(Path::new(".")))
    }

    /// Inline every referenced document and check the invariants.
    pub fn resolved(mut self, base: &Path) -> Result<Self> {
        if let Some(f) = &self.field {
            self.field = Some(DocRef::Inline(resolve(f, base)?));
        }
        if let Some(t) = &self.torus {
            self.torus = Some(DocRef::Inline(resolve(t, base)?));
        }
        let t = &self.tolerances;
        for (name, v) in [("rho", t.rho), ("oracle", t.oracle), ("identity", t.identity), ("truncation", t.truncation)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("tolerances.{name}"), "must be positive"));
            }
        }
        if self.oracle.ns.iter().any(|&n| n == 0 || n > 3) {
            return Err(Error::config("oracle.ns", "half-dimensions must lie in 1..=3"));
        }
        Ok(self)
    }

    pub fn field_spec(&self) -> Option<&FieldSpec> {
        match &self.field {
            Some(DocRef::Inline(f)) => Some(f),
            _ => None,
        }
    }

    pub fn torus_config(&self) -> Option<&TorusConfig> {
        match &self.torus {
            Some(DocRef::Inline(t)) => Some(t),
            _ => None,
        }
    }

    /// SHA-256 of the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
