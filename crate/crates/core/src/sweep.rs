//! Parameter sweeps over a preset: one analysis per grid point, computed in
//! parallel and emitted in grid order.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::criterion::{analyze_data, IndexReport, Verdict};
use crate::error::{Error, Result};
use crate::linearization::preset;
use crate::problem::{Grids, ProblemSpec, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + (self.max - self.min) * i as f64 / last).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: String,
    /// Fixed preset parameters; axis values override them.
    #[serde(default)]
    pub params: Map<String, Value>,
    pub axes: Vec<Axis>,
    #[serde(default = "sweep_grids")]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// CSV file name inside the output directory.
    #[serde(default = "default_csv")]
    pub csv: String,
}

fn sweep_grids() -> Grids {
    Grids { nt: 1024, nx: 256 }
}

fn default_csv() -> String {
    "sweep.csv".into()
}

impl SweepSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn check(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Spec(format!("a sweep needs one or two axes, got {}", self.axes.len())));
        }
        for ax in &self.axes {
            if ax.count < 2 {
                return Err(Error::Spec(format!("axis `{}` needs count >= 2", ax.name)));
            }
            if !(ax.min.is_finite() && ax.max.is_finite()) || ax.max <= ax.min {
                return Err(Error::Spec(format!("axis `{}` has an empty or non-finite range", ax.name)));
            }
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::Spec("axes must name different parameters".into()));
        }
        ProblemSpec::preset(&self.preset, Value::Null).with_grids(self.grids.nt, self.grids.nx).check()
    }

    /// Grid points in row-major order (first axis outermost).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
        for ax in &self.axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    ax.values().into_iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        pts
    }

    fn params_at(&self, point: &[f64]) -> Value {
        let mut m = self.params.clone();
        for (ax, v) in self.axes.iter().zip(point) {
            m.insert(ax.name.clone(), Value::from(*v));
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: Vec<f64>,
    pub outcome: std::result::Result<IndexReport, String>,
}

fn analyze_point(spec: &SweepSpec, point: &[f64]) -> std::result::Result<IndexReport, String> {
    let params = spec.params_at(point);
    let data = preset(&spec.preset, &params, spec.grids.nt).map_err(|e| e.to_string())?;
    let mut problem = ProblemSpec::preset(&spec.preset, params).with_grids(spec.grids.nt, spec.grids.nx);
    problem.tolerances = spec.tolerances;
    analyze_data(&Arc::new(data), &problem).map_err(|e| e.to_string())
}

/// Runs every grid point; `threads` caps the worker count (0 = rayon default).
pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<Vec<SweepRow>> {
    spec.check()?;
    let points = spec.points();
    let work = || -> Vec<SweepRow> {
        points
            .par_iter()
            .map(|p| SweepRow { point: p.clone(), outcome: analyze_point(spec, p) })
            .collect()
    };
    if threads == 0 {
        return Ok(work());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(work))
}

/// Shortest round-trip decimal, in exponent form outside [1e-4, 1e16);
/// non-finite values as `nan`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && !(1e-4..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub const CSV_COLUMNS: [&str; 11] = [
    "trace",
    "max_modulus",
    "geo",
    "spec",
    "dim_ker_a_minus_i",
    "identity_residual",
    "verdict",
    "linearly_stable",
    "floquet_certified",
    "certified",
    "error",
];

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::UnstableByParity => "UnstableByParity",
        Verdict::NoConclusion => "NoConclusion",
    }
}

/// CSV with a header row, LF line endings, rows in grid order.
pub fn to_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let header: Vec<&str> = spec.axes.iter().map(|a| a.name.as_str()).chain(CSV_COLUMNS).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut cells: Vec<String> = row.point.iter().map(|&v| format_float(v)).collect();
        match &row.outcome {
            Ok(r) => {
                let trace = if r.n == 1 {
                    format_float(r.monodromy_trace)
                } else {
                    String::new()
                };
                cells.extend([
                    trace,
                    format_float(r.floquet.max_modulus),
                    r.geo_index.to_string(),
                    r.spec_index.to_string(),
                    r.dim_ker_a_minus_i.to_string(),
                    r.identity_residual.to_string(),
                    verdict_name(r.verdict).to_string(),
                    r.floquet.linearly_stable.to_string(),
                    r.floquet.certified.to_string(),
                    r.certified.to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(String::new(), CSV_COLUMNS.len() - 2));
                cells.push("false".into());
                cells.push(format!("\"{}\"", e.replace('"', "'")));
            }
        }
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}
