use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AxisFactor, ScalarField, Term, Wave};
use crate::tensor_geometry::ChartField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Cos,
    Sin,
    Exp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub axis: usize,
    pub kind: WaveKind,
    pub freq: f64,
}

/// `c · Π x_i^{pow_i} · Π waves`, at most one wave per axis (two `exp` waves merge).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pow: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waves: Vec<WaveSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    /// The literal string `"flat"`.
    Named(String),
    /// `(2n)²` entries, row-major, each a sum of terms.
    Table(Vec<Vec<TermSpec>>),
}

/// JSON form of a [`ChartField`]: `{"n", "g", "A", "x0"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub n: usize,
    pub g: MetricSpec,
    #[serde(rename = "A")]
    pub a: Vec<Vec<TermSpec>>,
    pub x0: Vec<f64>,
}

fn scalar(dim: usize, terms: &[TermSpec], path: &str) -> Result<ScalarField> {
    let mut out = ScalarField::zero(dim);
    for (t, spec) in terms.iter().enumerate() {
        let here = format!("{path}[{t}]");
        if spec.pow.len() > dim {
            return Err(Error::config(format!("{here}.pow"), format!("more than {dim} exponents")));
        }
        let mut factors: Vec<AxisFactor> =
            spec.pow.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| AxisFactor::pow(i, k)).collect();
        for (w, wave) in spec.waves.iter().enumerate() {
            if wave.axis >= dim {
                return Err(Error::config(format!("{here}.waves[{w}].axis"), format!("axis out of range 0..{dim}")));
            }
            let kind = match wave.kind {
                WaveKind::Cos => Wave::Cos(wave.freq),
                WaveKind::Sin => Wave::Sin(wave.freq),
                WaveKind::Exp => Wave::Exp(wave.freq),
            };
            factors.push(AxisFactor::wave(wave.axis, kind));
        }
        let term = Term::new(spec.c, factors)
            .ok_or_else(|| Error::config(format!("{here}.waves"), "two trigonometric waves on one axis"))?;
        out.push(term);
    }
    Ok(out)
}

impl FieldSpec {
    pub fn to_field(&self) -> Result<ChartField> {
        let m = 2 * self.n;
        if self.n == 0 {
            return Err(Error::config("n", "half-dimension must be positive"));
        }
        let g = match &self.g {
            MetricSpec::Named(name) if name == "flat" => ChartField::flat_metric(self.n),
            MetricSpec::Named(name) => {
                return Err(Error::config("g", format!("unknown metric name `{name}`, expected \"flat\"")))
            }
            MetricSpec::Table(rows) => {
                if rows.len() != m * m {
                    return Err(Error::config("g", format!("expected {} entries, found {}", m * m, rows.len())));
                }
                rows.iter().enumerate().map(|(k, t)| scalar(m, t, &format!("g[{k}]"))).collect::<Result<_>>()?
            }
        };
        let a = self.a.iter().enumerate().map(|(k, t)| scalar(m, t, &format!("A[{k}]"))).collect::<Result<_>>()?;
        ChartField::new(self.n, g, a, self.x0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_field_round_trips_through_json() {
        let json = r#"{"n":1,"g":"flat","A":[[],[{"c":2.0,"pow":[1]},{"c":0.5,"waves":[{"axis":0,"kind":"sin","freq":1.0}]}]],"x0":[0.3,0.1]}"#;
        let spec: FieldSpec = serde_json::from_str(json).unwrap();
        let f = spec.to_field().unwrap();
        let ay = &f.a[1];
        assert!((ay.eval(&[0.3, 0.0]) - (0.6 + 0.5 * 0.3f64.sin())).abs() < 1e-15);
        let back: FieldSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn doubled_wave_is_rejected_with_a_path() {
        let json = r#"{"n":1,"g":"flat","A":[[{"c":1.0,"waves":[{"axis":0,"kind":"cos","freq":1.0},{"axis":0,"kind":"sin","freq":2.0}]}],[]],"x0":[0,0]}"#;
        let spec: FieldSpec = serde_json::from_str(json).unwrap();
        match spec.to_field() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "A[0][0].waves"),
            other => panic!("{other:?}"),
        }
    }
}
