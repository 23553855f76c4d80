//! Serialized problem definitions.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::linearization::{self, CoefficientData, Source};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetRef {
    pub name: String,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// Inline samples, or a link to a JSON document holding them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampledRef {
    Inline {
        #[serde(rename = "N_t")]
        nt: usize,
        #[serde(rename = "P")]
        p: Vec<f64>,
        #[serde(rename = "Q")]
        q: Vec<f64>,
        #[serde(rename = "R")]
        r: Vec<f64>,
    },
    File { file: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Preset(PresetRef),
    Sampled(SampledRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    #[serde(rename = "N_t")]
    pub nt: usize,
    #[serde(rename = "N_x")]
    pub nx: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { nt: 4096, nx: 1024 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub sym: f64,
    pub rank: f64,
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sym: 1e-10, rank: 1e-8, ode: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    pub coefficients: Coefficients,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    /// Directory used to resolve linked sample files.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_version() -> u32 {
    SPEC_VERSION
}

fn is_pow2_at_least_64(x: usize) -> bool {
    x >= 64 && x.is_power_of_two()
}

impl ProblemSpec {
    pub fn preset(name: &str, params: Value) -> Self {
        Self {
            version: SPEC_VERSION,
            n: None,
            period: None,
            a: None,
            coefficients: Coefficients::Preset(PresetRef { name: name.to_string(), params }),
            grids: Grids::default(),
            tolerances: Tolerances::default(),
            s0: None,
            base_dir: None,
        }
    }

    pub fn with_grids(mut self, nt: usize, nx: usize) -> Self {
        self.grids = Grids { nt, nx };
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Spec(format!("file not found: {}", path.display()))
            } else {
                Error::Spec(format!("{}: {e}", path.display()))
            }
        })?;
        let mut spec = Self::from_json_str(&text)?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.version != SPEC_VERSION {
            return Err(Error::Spec(format!("unsupported version {}", self.version)));
        }
        if !is_pow2_at_least_64(self.grids.nt) || !is_pow2_at_least_64(self.grids.nx) {
            return Err(Error::Spec(format!(
                "grid sizes must be powers of two >= 64 (N_t = {}, N_x = {})",
                self.grids.nt, self.grids.nx
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [("sym", t.sym), ("rank", t.rank), ("ode", t.ode)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Spec(format!("tolerance `{name}` must be positive")));
            }
        }
        if let Some(s0) = self.s0 {
            if !(s0 > 0.0 && s0.is_finite()) {
                return Err(Error::Spec("s0 override must be positive".into()));
            }
        }
        Ok(())
    }

    fn holonomy(&self, n: usize) -> Result<Option<Mat>> {
        match &self.a {
            None => Ok(None),
            Some(v) if v.len() == n * n => Ok(Some(Mat::from_row_slice(n, n, v))),
            Some(v) => Err(Error::Spec(format!("A must hold {} entries, got {}", n * n, v.len()))),
        }
    }

    /// Resolves the coefficients into validated-ready data.
    pub fn build(&self) -> Result<CoefficientData> {
        self.check()?;
        match &self.coefficients {
            Coefficients::Preset(p) => {
                let data = linearization::preset(&p.name, &p.params, self.grids.nt)?;
                if let Some(n) = self.n {
                    if n != data.n {
                        return Err(Error::Spec(format!("n = {n} conflicts with preset dimension {}", data.n)));
                    }
                }
                if let Some(t) = self.period {
                    if (t - data.period).abs() > 1e-12 * t.abs().max(1.0) {
                        return Err(Error::Spec(format!(
                            "T = {t} conflicts with preset period {}; set T inside the preset params",
                            data.period
                        )));
                    }
                }
                if let Some(a) = self.holonomy(data.n)? {
                    if (&a - &data.a).amax() > 1e-12 {
                        return Err(Error::Spec("A conflicts with the preset holonomy".into()));
                    }
                }
                Ok(data)
            }
            Coefficients::Sampled(s) => {
                let n = self.n.ok_or_else(|| Error::Spec("sampled coefficients need `n`".into()))?;
                let period = self.period.ok_or_else(|| Error::Spec("sampled coefficients need `T`".into()))?;
                let a = self.holonomy(n)?.unwrap_or_else(|| Mat::identity(n, n));
                let (inline, reference) = match s {
                    SampledRef::Inline { .. } => (s.clone(), "inline".to_string()),
                    SampledRef::File { file } => {
                        let path = match &self.base_dir {
                            Some(d) => d.join(file),
                            None => PathBuf::from(file),
                        };
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
                        let linked: SampledRef =
                            serde_json::from_str(&text).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
                        if matches!(linked, SampledRef::File { .. }) {
                            return Err(Error::Spec("linked sample files must hold inline samples".into()));
                        }
                        (linked, path.display().to_string())
                    }
                };
                let SampledRef::Inline { nt, p, q, r } = inline else { unreachable!() };
                let chunk = |name: &str, v: &[f64]| -> Result<Vec<Mat>> {
                    if v.len() != (nt + 1) * n * n {
                        return Err(Error::Spec(format!(
                            "{name} must hold (N_t+1)·n² = {} numbers, got {}",
                            (nt + 1) * n * n,
                            v.len()
                        )));
                    }
                    Ok(v.chunks(n * n).map(|c| Mat::from_row_slice(n, n, c)).collect())
                };
                CoefficientData::from_samples(
                    n,
                    period,
                    a,
                    chunk("P", &p)?,
                    chunk("Q", &q)?,
                    chunk("R", &r)?,
                    Source::Sampled { reference },
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_spec_round_trip() {
        let text = r#"{"version":1,"coefficients":{"preset":{"name":"mathieu","params":{"a":0.2,"q":0.1}}},
                       "grids":{"N_t":256,"N_x":128}}"#;
        let spec = ProblemSpec::from_json_str(text).unwrap();
        let data = spec.build().unwrap();
        assert_eq!(data.n, 1);
        assert_eq!(data.nt, 256);
        assert_eq!(spec.tolerances, Tolerances::default());
    }

    #[test]
    fn rejects_bad_grids() {
        let spec = ProblemSpec::preset("harmonic", serde_json::json!({"omega": 1.0})).with_grids(100, 128);
        assert!(spec.build().is_err());
        let spec = ProblemSpec::preset("harmonic", serde_json::json!({"omega": 1.0})).with_grids(32, 128);
        assert!(spec.build().is_err());
    }

    #[test]
    fn sampled_spec_builds() {
        let nt = 64;
        let p: Vec<f64> = vec![1.0; nt + 1];
        let q = vec![0.0; nt + 1];
        let r = vec![-1.0; nt + 1];
        let v = serde_json::json!({
            "version": 1, "n": 1, "T": std::f64::consts::TAU, "A": [1.0],
            "coefficients": {"sampled": {"N_t": nt, "P": p, "Q": q, "R": r}},
            "grids": {"N_t": 64, "N_x": 64}
        });
        let spec: ProblemSpec = serde_json::from_value(v).unwrap();
        let d = spec.build().unwrap();
        assert_eq!(d.nt, nt);
        assert!((d.r[3][(0, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn conflicting_dimension_is_rejected() {
        let mut spec = ProblemSpec::preset("harmonic", serde_json::json!({"omega": 1.0})).with_grids(64, 64);
        spec.n = Some(2);
        assert!(matches!(spec.build(), Err(Error::Spec(_))));
    }
}
