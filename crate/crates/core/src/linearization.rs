//! Trivialized second-variation data (P, Q, R, A), presets, validation and
//! the Hamiltonian coefficient matrices B_{c,s}(t).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::interp::Series;
use crate::linalg::{self, Mat};

/// Where a coefficient set came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Preset { name: String, params: Value },
    Sampled { reference: String },
}

/// P, Q, R sampled at t_k = kT/N_t (k = 0..=N_t) plus the frame holonomy A.
#[derive(Debug, Clone)]
pub struct CoefficientData {
    pub n: usize,
    pub period: f64,
    pub nt: usize,
    pub p: Vec<Mat>,
    pub q: Vec<Mat>,
    pub r: Vec<Mat>,
    pub a: Mat,
    pub source: Source,
    /// Smallest singular value of P over the samples.
    pub p_min: f64,
    interp: Arc<Interpolants>,
}

#[derive(Debug)]
struct Interpolants {
    p: Vec<Series>,
    q: Vec<Series>,
    r: Vec<Series>,
}

/// Coefficients resampled on a finer uniform grid t_j = jT/m, j = 0..=m.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub m: usize,
    pub p: Vec<Mat>,
    pub q: Vec<Mat>,
    pub r: Vec<Mat>,
}

fn is_identity(a: &Mat) -> bool {
    (a - Mat::identity(a.nrows(), a.ncols())).amax() <= 1e-12
}

impl CoefficientData {
    /// Ingests sampled coefficients. Rejects singular P with the offending
    /// sample index; all other invariants are checked by [`validate`].
    pub fn from_samples(
        n: usize,
        period: f64,
        a: Mat,
        p: Vec<Mat>,
        q: Vec<Mat>,
        r: Vec<Mat>,
        source: Source,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension(format!("A must be {n}x{n}")));
        }
        let len = p.len();
        if len < 5 || q.len() != len || r.len() != len {
            return Err(Error::Dimension(format!(
                "need equal sample counts >= 5 for P, Q, R (got {}, {}, {})",
                p.len(),
                q.len(),
                r.len()
            )));
        }
        for (name, set) in [("P", &p), ("Q", &q), ("R", &r)] {
            for (k, m) in set.iter().enumerate() {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::Dimension(format!("{name} sample {k} must be {n}x{n}")));
                }
                if !linalg::is_finite(m) {
                    return Err(Error::InvalidParameter(format!("{name} sample {k} is not finite")));
                }
            }
        }
        if !linalg::is_finite(&a) {
            return Err(Error::InvalidParameter("A is not finite".into()));
        }
        let mut p_min = f64::INFINITY;
        for (k, pk) in p.iter().enumerate() {
            let sigma = linalg::smallest_singular_value(pk);
            let scale = pk.amax().max(1.0);
            if sigma <= 1e-12 * scale {
                return Err(Error::SingularP { index: k, sigma });
            }
            p_min = p_min.min(sigma);
        }
        let periodic = is_identity(&a);
        let series = |set: &Vec<Mat>| -> Vec<Series> {
            (0..n * n)
                .map(|e| {
                    let vals: Vec<f64> = set.iter().map(|m| m[(e / n, e % n)]).collect();
                    Series::new(&vals, period, periodic)
                })
                .collect()
        };
        let interp = Arc::new(Interpolants { p: series(&p), q: series(&q), r: series(&r) });
        Ok(Self { n, period, nt: len - 1, p, q, r, a, source, p_min, interp })
    }

    pub fn h(&self) -> f64 {
        self.period / self.nt as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.nt).map(|k| k as f64 * self.h()).collect()
    }

    pub fn is_periodic_frame(&self) -> bool {
        is_identity(&self.a)
    }

    fn eval_set(&self, set: &[Series], t: f64) -> Mat {
        let n = self.n;
        Mat::from_fn(n, n, |i, j| set[i * n + j].eval(t))
    }

    /// Interpolated (P, Q, R) at an arbitrary time in [0, T].
    pub fn eval(&self, t: f64) -> (Mat, Mat, Mat) {
        (
            self.eval_set(&self.interp.p, t),
            self.eval_set(&self.interp.q, t),
            self.eval_set(&self.interp.r, t),
        )
    }

    /// P′(t) from the interpolant.
    pub fn p_derivative(&self, t: f64) -> Mat {
        let n = self.n;
        Mat::from_fn(n, n, |i, j| self.interp.p[i * n + j].eval_with_derivative(t).1)
    }

    /// P′ at the data samples.
    pub fn p_derivative_samples(&self) -> Vec<Mat> {
        let n = self.n;
        let cols: Vec<Vec<f64>> = self.interp.p.iter().map(|s| s.resample_derivative(self.nt)).collect();
        (0..=self.nt).map(|k| Mat::from_fn(n, n, |i, j| cols[i * n + j][k])).collect()
    }

    /// Coefficients on t_j = jT/m, j = 0..=m.
    pub fn resample(&self, m: usize) -> Resampled {
        let n = self.n;
        let build = |set: &[Series]| -> Vec<Mat> {
            let cols: Vec<Vec<f64>> = set.iter().map(|s| s.resample(m)).collect();
            (0..=m).map(|k| Mat::from_fn(n, n, |i, j| cols[i * n + j][k])).collect()
        };
        Resampled { m, p: build(&self.interp.p), q: build(&self.interp.q), r: build(&self.interp.r) }
    }

    /// Smallest eigenvalue of P over the samples (positive iff P > 0).
    pub fn p_lower_bound(&self) -> f64 {
        self.p
            .iter()
            .map(|pk| linalg::symmetric_eigenvalues(pk)[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// One violated identity with its residual norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub identity: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub p_min: f64,
}

/// Checks all coefficient invariants; never aborts.
pub fn validate(data: &CoefficientData, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |name: &str, residual: f64| {
        if !(residual <= tol) {
            violations.push(Violation { identity: name.to_string(), residual });
        }
    };
    let rel = |m: &Mat| m.norm().max(1.0);
    push(
        "P symmetry",
        data.p.iter().map(|m| linalg::asymmetry(m) / rel(m)).fold(0.0, f64::max),
    );
    push(
        "R symmetry",
        data.r.iter().map(|m| linalg::asymmetry(m) / rel(m)).fold(0.0, f64::max),
    );
    push("A orthogonality", linalg::orthogonality_residual(&data.a));
    let a = &data.a;
    let last = data.nt;
    let p0 = &data.p[0];
    push("P compatibility", (p0 - a * &data.p[last] * a.transpose()).norm() / rel(p0));
    push("Q compatibility", (&data.q[0] - a * &data.q[last]).norm() / rel(&data.q[0]));
    push("R compatibility", (&data.r[0] - a * &data.r[last] * a.transpose()).norm() / rel(&data.r[0]));
    if !(data.p_min > 0.0) {
        violations.push(Violation { identity: "P invertibility".into(), residual: data.p_min });
    }
    ValidationReport { passed: violations.is_empty(), violations, p_min: data.p_min }
}

/// B_{c,s}(t) for one coefficient triple:
/// [[P⁻¹, −cP⁻¹Q], [−cQᵀP⁻¹, c²QᵀP⁻¹Q − cR − sP]], symmetrized.
/// Returns the matrix and the pre-symmetrization asymmetry.
pub fn b_block(p: &Mat, q: &Mat, r: &Mat, c: f64, s: f64) -> Result<(Mat, f64)> {
    let n = p.nrows();
    let pi = p.clone().try_inverse().ok_or(Error::SingularP { index: 0, sigma: 0.0 })?;
    let qt = q.transpose();
    let b11 = pi.clone();
    let b12 = -c * &pi * q;
    let b21 = -c * &qt * &pi;
    let b22 = c * c * &qt * &pi * q - c * r - s * p;
    let mut b = Mat::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&b11);
    b.view_mut((0, n), (n, n)).copy_from(&b12);
    b.view_mut((n, 0), (n, n)).copy_from(&b21);
    b.view_mut((n, n), (n, n)).copy_from(&b22);
    let asym = linalg::asymmetry(&b);
    Ok((linalg::symmetrize(&b), asym))
}

/// The family member B_{c,s}; evaluation is lazy and reads the shared data.
#[derive(Debug, Clone)]
pub struct HamiltonianCoefficient {
    pub data: Arc<CoefficientData>,
    pub c: f64,
    pub s: f64,
}

impl HamiltonianCoefficient {
    pub fn n(&self) -> usize {
        self.data.n
    }

    pub fn period(&self) -> f64 {
        self.data.period
    }

    /// B_{c,s}(t) from the interpolated coefficients.
    pub fn at(&self, t: f64) -> Mat {
        let (p, q, r) = self.data.eval(t);
        b_block(&p, &q, &r, self.c, self.s).expect("P invertibility checked at ingestion").0
    }

    /// B_{c,s}(t_k) on the data grid.
    pub fn sampled(&self) -> Vec<Mat> {
        (0..=self.data.nt)
            .map(|k| {
                b_block(&self.data.p[k], &self.data.q[k], &self.data.r[k], self.c, self.s)
                    .expect("P invertibility checked at ingestion")
                    .0
            })
            .collect()
    }

    /// Largest asymmetry over the data grid before symmetrization.
    pub fn asymmetry_residual(&self) -> f64 {
        (0..=self.data.nt)
            .map(|k| {
                b_block(&self.data.p[k], &self.data.q[k], &self.data.r[k], self.c, self.s)
                    .map(|b| b.1)
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }

    /// B at the midpoints (k + ½)T/m, k = 0..m.
    pub fn midpoints(&self, m: usize) -> Vec<Mat> {
        let fine = self.data.resample(2 * m);
        (0..m)
            .map(|k| {
                let j = 2 * k + 1;
                b_block(&fine.p[j], &fine.q[j], &fine.r[j], self.c, self.s)
                    .expect("P invertibility checked at ingestion")
                    .0
            })
            .collect()
    }
}

pub fn assemble_b(data: &Arc<CoefficientData>, c: f64, s: f64) -> Result<HamiltonianCoefficient> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("c must lie in [0, 1], got {c}")));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be non-negative, got {s}")));
    }
    Ok(HamiltonianCoefficient { data: Arc::clone(data), c, s })
}

/// z = (y, u) with y = P u′ + Q u on the data grid.
pub fn legendre_reduce(
    data: &CoefficientData,
    u: &[DVector<f64>],
    du: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let len = data.nt + 1;
    if u.len() != len || du.len() != len {
        return Err(Error::Dimension(format!(
            "paths must have {len} samples, got {} and {}",
            u.len(),
            du.len()
        )));
    }
    let n = data.n;
    u.iter()
        .zip(du)
        .enumerate()
        .map(|(k, (uk, duk))| {
            if uk.len() != n || duk.len() != n {
                return Err(Error::Dimension(format!("sample {k} must have length {n}")));
            }
            let y = &data.p[k] * duk + &data.q[k] * uk;
            Ok(DVector::from_iterator(2 * n, y.iter().chain(uk.iter()).copied()))
        })
        .collect()
}

// ---------------------------------------------------------------- presets

pub const PRESET_NAMES: [&str; 5] =
    ["harmonic", "mathieu", "twisted_harmonic", "constant_indefinite", "custom_sampled"];

/// One-line descriptions for `presets list`.
pub fn preset_descriptions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("harmonic", "P=(1+mass_modulation·cos 2πt/T)I, Q=gyro·J₂ (n=2), R=−diag(ω²), A=I; params omega, T, gyro, mass_modulation"),
        ("mathieu", "n=1, P=1, Q=0, R=−(a−2q cos 2t), A=1; params a, q, T (default π)"),
        ("twisted_harmonic", "harmonic data with holonomy minus_identity | reflection | {rotation: θ}; params omega, T, holonomy, mass_modulation"),
        ("constant_indefinite", "n=2, P=diag(1,−1), Q=0, R=0, A=I; params T"),
        ("custom_sampled", "user samples; params n, T, A, N_t, P, Q, R (row-major, samples concatenated)"),
    ]
}

fn sample<F>(nt: usize, period: f64, f: F) -> (Vec<Mat>, Vec<Mat>, Vec<Mat>)
where
    F: Fn(f64) -> (Mat, Mat, Mat),
{
    let mut p = Vec::with_capacity(nt + 1);
    let mut q = Vec::with_capacity(nt + 1);
    let mut r = Vec::with_capacity(nt + 1);
    for k in 0..=nt {
        let (pk, qk, rk) = f(k as f64 * period / nt as f64);
        p.push(pk);
        q.push(qk);
        r.push(rk);
    }
    (p, q, r)
}

fn get_f64(params: &Value, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be a finite number"))),
        None => default.ok_or_else(|| Error::InvalidParameter(format!("missing parameter `{key}`"))),
    }
}

fn get_omegas(params: &Value, default_len: usize) -> Result<Vec<f64>> {
    match params.get("omega") {
        None => Err(Error::InvalidParameter("missing parameter `omega`".into())),
        Some(Value::Array(xs)) => {
            let v: Option<Vec<f64>> = xs.iter().map(|x| x.as_f64()).collect();
            let v = v.ok_or_else(|| Error::InvalidParameter("`omega` must hold numbers".into()))?;
            if v.is_empty() {
                return Err(Error::InvalidParameter("`omega` must not be empty".into()));
            }
            Ok(v)
        }
        Some(x) => {
            let w = x.as_f64().ok_or_else(|| Error::InvalidParameter("`omega` must be a number".into()))?;
            Ok(vec![w; default_len])
        }
    }
}

fn modulation(params: &Value) -> Result<f64> {
    let mu = get_f64(params, "mass_modulation", Some(0.0))?;
    if mu.abs() >= 1.0 {
        return Err(Error::InvalidParameter("mass_modulation must satisfy |μ| < 1".into()));
    }
    Ok(mu)
}

/// harmonic(ω, T) with optional gyroscopic coupling and mass modulation.
pub fn harmonic(omega: f64, period: f64, nt: usize) -> Result<CoefficientData> {
    preset("harmonic", &serde_json::json!({ "omega": omega, "T": period }), nt)
}

pub fn mathieu(a: f64, q: f64, nt: usize) -> Result<CoefficientData> {
    preset("mathieu", &serde_json::json!({ "a": a, "q": q }), nt)
}

pub fn constant_indefinite(period: f64, nt: usize) -> Result<CoefficientData> {
    preset("constant_indefinite", &serde_json::json!({ "T": period }), nt)
}

/// Builds a named preset sampled on `nt` uniform intervals.
pub fn preset(name: &str, params: &Value, nt: usize) -> Result<CoefficientData> {
    if nt < 8 {
        return Err(Error::InvalidParameter("preset sampling needs N_t >= 8".into()));
    }
    let source = Source::Preset { name: name.to_string(), params: params.clone() };
    match name {
        "harmonic" => {
            let period = get_f64(params, "T", Some(2.0 * PI))?;
            let omegas = get_omegas(params, 1)?;
            let n = omegas.len();
            let gyro = get_f64(params, "gyro", Some(0.0))?;
            if gyro != 0.0 && n != 2 {
                return Err(Error::InvalidParameter("gyro coupling needs n = 2".into()));
            }
            let mu = modulation(params)?;
            let r = -Mat::from_diagonal(&DVector::from_iterator(n, omegas.iter().map(|w| w * w)));
            let mut q = Mat::zeros(n, n);
            if n == 2 {
                q[(0, 1)] = gyro;
                q[(1, 0)] = -gyro;
            }
            let (ps, qs, rs) = sample(nt, period, |t| {
                let m = 1.0 + mu * (2.0 * PI * t / period).cos();
                (Mat::identity(n, n) * m, q.clone(), r.clone())
            });
            CoefficientData::from_samples(n, period, Mat::identity(n, n), ps, qs, rs, source)
        }
        "mathieu" => {
            let a = get_f64(params, "a", None)?;
            let qq = get_f64(params, "q", None)?;
            let period = get_f64(params, "T", Some(PI))?;
            let (ps, qs, rs) = sample(nt, period, |t| {
                (Mat::identity(1, 1), Mat::zeros(1, 1), Mat::from_element(1, 1, -(a - 2.0 * qq * (2.0 * t).cos())))
            });
            CoefficientData::from_samples(1, period, Mat::identity(1, 1), ps, qs, rs, source)
        }
        "twisted_harmonic" => {
            let period = get_f64(params, "T", Some(2.0 * PI))?;
            let mu = modulation(params)?;
            let hol = params.get("holonomy").cloned().unwrap_or(Value::String("minus_identity".into()));
            let wave = move |t: f64| mu * (2.0 * PI * t / period).cos();
            match &hol {
                Value::String(s) if s == "minus_identity" => {
                    let omegas = get_omegas(params, 1)?;
                    let n = omegas.len();
                    let r = -Mat::from_diagonal(&DVector::from_iterator(n, omegas.iter().map(|w| w * w)));
                    let (ps, qs, rs) =
                        sample(nt, period, |t| (Mat::identity(n, n) * (1.0 + wave(t)), Mat::zeros(n, n), r.clone()));
                    CoefficientData::from_samples(n, period, -Mat::identity(n, n), ps, qs, rs, source)
                }
                Value::String(s) if s == "reflection" => {
                    let omegas = get_omegas(params, 2)?;
                    if omegas.len() != 2 {
                        return Err(Error::InvalidParameter("reflection holonomy needs n = 2".into()));
                    }
                    let r = -Mat::from_diagonal(&DVector::from_vec(vec![omegas[0].powi(2), omegas[1].powi(2)]));
                    let a = Mat::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
                    let (ps, qs, rs) = sample(nt, period, |t| {
                        let p = Mat::from_diagonal(&DVector::from_vec(vec![1.0 + wave(t), 1.0 - wave(t)]));
                        (p, Mat::zeros(2, 2), r.clone())
                    });
                    CoefficientData::from_samples(2, period, a, ps, qs, rs, source)
                }
                Value::Object(o) if o.contains_key("rotation") => {
                    let theta = o["rotation"]
                        .as_f64()
                        .ok_or_else(|| Error::InvalidParameter("rotation angle must be a number".into()))?;
                    let omegas = get_omegas(params, 2)?;
                    if omegas.len() != 2 || (omegas[0] - omegas[1]).abs() > 0.0 {
                        return Err(Error::InvalidParameter(
                            "rotation holonomy needs a single isotropic omega".into(),
                        ));
                    }
                    let w2 = omegas[0] * omegas[0];
                    let a = linalg::rotation2(theta);
                    // P(t) = G(t)ᵀ D(t) G(t) with G(t) = Rot(θt/T) makes P(T) = AᵀP(0)A.
                    let (ps, qs, rs) = sample(nt, period, |t| {
                        let g = linalg::rotation2(theta * t / period);
                        let d = Mat::from_diagonal(&DVector::from_vec(vec![1.0 + wave(t), 1.0 - wave(t)]));
                        (g.transpose() * d * g, Mat::zeros(2, 2), -Mat::identity(2, 2) * w2)
                    });
                    CoefficientData::from_samples(2, period, a, ps, qs, rs, source)
                }
                other => Err(Error::InvalidParameter(format!("unknown holonomy {other}"))),
            }
        }
        "constant_indefinite" => {
            let period = get_f64(params, "T", Some(2.0 * PI))?;
            let p = Mat::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
            let (ps, qs, rs) = sample(nt, period, |_| (p.clone(), Mat::zeros(2, 2), Mat::zeros(2, 2)));
            CoefficientData::from_samples(2, period, Mat::identity(2, 2), ps, qs, rs, source)
        }
        "custom_sampled" => custom_sampled(params, source),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

fn flat_matrices(v: &Value, key: &str, n: usize, count: usize) -> Result<Vec<Mat>> {
    let xs = v
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidParameter(format!("missing array `{key}`")))?;
    let flat: Option<Vec<f64>> = xs.iter().map(Value::as_f64).collect();
    let flat = flat.ok_or_else(|| Error::InvalidParameter(format!("`{key}` must hold numbers")))?;
    if flat.len() != n * n * count {
        return Err(Error::Dimension(format!(
            "`{key}` must hold {} numbers ({count} samples of {n}x{n}), got {}",
            n * n * count,
            flat.len()
        )));
    }
    Ok(flat.chunks(n * n).map(|c| Mat::from_row_slice(n, n, c)).collect())
}

fn custom_sampled(params: &Value, source: Source) -> Result<CoefficientData> {
    let n = params
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidParameter("missing integer `n`".into()))? as usize;
    let period = get_f64(params, "T", None)?;
    let nt = params
        .get("N_t")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidParameter("missing integer `N_t`".into()))? as usize;
    let a = match params.get("A") {
        Some(_) => flat_matrices(params, "A", n, 1)?.remove(0),
        None => Mat::identity(n, n),
    };
    let p = flat_matrices(params, "P", n, nt + 1)?;
    let q = flat_matrices(params, "Q", n, nt + 1)?;
    let r = flat_matrices(params, "R", n, nt + 1)?;
    CoefficientData::from_samples(n, period, a, p, q, r, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        let cases = [
            preset("harmonic", &serde_json::json!({"omega": 1.0}), 64).unwrap(),
            preset("harmonic", &serde_json::json!({"omega": [0.7, 1.3], "gyro": 0.4, "mass_modulation": 0.3}), 64)
                .unwrap(),
            preset("mathieu", &serde_json::json!({"a": 1.0, "q": 0.5}), 64).unwrap(),
            preset("twisted_harmonic", &serde_json::json!({"omega": 0.7}), 64).unwrap(),
            preset("twisted_harmonic", &serde_json::json!({"omega": [0.7, 1.1], "holonomy": "reflection"}), 64)
                .unwrap(),
            preset(
                "twisted_harmonic",
                &serde_json::json!({"omega": 0.9, "holonomy": {"rotation": 0.7}, "mass_modulation": 0.4}),
                64,
            )
            .unwrap(),
            constant_indefinite(2.0 * PI, 64).unwrap(),
        ];
        for d in &cases {
            let rep = validate(d, 1e-10);
            assert!(rep.passed, "{:?}: {:?}", d.source, rep.violations);
        }
    }

    #[test]
    fn injected_q_violation_is_reported() {
        let d = harmonic(1.0, 2.0 * PI, 64).unwrap();
        let mut q = d.q.clone();
        q[0][(0, 0)] += 1e-3;
        let bad = CoefficientData::from_samples(1, d.period, d.a.clone(), d.p.clone(), q, d.r.clone(), d.source.clone())
            .unwrap();
        let rep = validate(&bad, 1e-6);
        assert!(!rep.passed);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].identity, "Q compatibility");
        assert!((rep.violations[0].residual - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn reflection_with_constant_mass_passes() {
        let d = preset("twisted_harmonic", &serde_json::json!({"omega": [1.0, 2.0], "holonomy": "reflection"}), 64)
            .unwrap();
        let p = &d.p[0];
        assert!((&d.a * p * d.a.transpose() - p).norm() < 1e-15);
        assert!(validate(&d, 1e-6).passed);
    }

    #[test]
    fn b_examples() {
        let one = Mat::identity(1, 1);
        let z = Mat::zeros(1, 1);
        let (b, _) = b_block(&one, &z, &z, 0.0, 0.0).unwrap();
        assert_eq!(b, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let (b, asym) =
            b_block(&one, &Mat::from_element(1, 1, 2.0), &Mat::from_element(1, 1, 3.0), 1.0, 0.0).unwrap();
        assert_eq!(b, Mat::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 1.0]));
        assert_eq!(asym, 0.0);
        let (b, _) = b_block(&one, &z, &z, 0.0, 2.5).unwrap();
        assert_eq!(b, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.5]));
    }

    #[test]
    fn singular_p_is_rejected_with_index() {
        let n = 8;
        let mut p: Vec<Mat> = (0..=n).map(|_| Mat::identity(1, 1)).collect();
        p[3] = Mat::zeros(1, 1);
        let z: Vec<Mat> = (0..=n).map(|_| Mat::zeros(1, 1)).collect();
        let err =
            CoefficientData::from_samples(1, 1.0, Mat::identity(1, 1), p, z.clone(), z, Source::Sampled {
                reference: "test".into(),
            })
            .unwrap_err();
        assert!(matches!(err, Error::SingularP { index: 3, .. }));
    }

    #[test]
    fn legendre_examples() {
        let d = harmonic(1.0, 2.0 * PI, 64).unwrap();
        let ts = d.times();
        let u: Vec<DVector<f64>> = ts.iter().map(|t| DVector::from_vec(vec![t.cos()])).collect();
        let du: Vec<DVector<f64>> = ts.iter().map(|t| DVector::from_vec(vec![-t.sin()])).collect();
        let z = legendre_reduce(&d, &u, &du).unwrap();
        for (k, zk) in z.iter().enumerate() {
            assert!((zk[0] + ts[k].sin()).abs() < 1e-15);
        }
        // P = 2, Q = 1, u ≡ 1 → y ≡ 1
        let nt = 8;
        let src = Source::Sampled { reference: "test".into() };
        let d2 = CoefficientData::from_samples(
            1,
            1.0,
            Mat::identity(1, 1),
            vec![Mat::from_element(1, 1, 2.0); nt + 1],
            vec![Mat::from_element(1, 1, 1.0); nt + 1],
            vec![Mat::zeros(1, 1); nt + 1],
            src,
        )
        .unwrap();
        let ones = vec![DVector::from_vec(vec![1.0]); nt + 1];
        let zeros = vec![DVector::from_vec(vec![0.0]); nt + 1];
        let z2 = legendre_reduce(&d2, &ones, &zeros).unwrap();
        assert!(z2.iter().all(|z| z[0] == 1.0 && z[1] == 1.0));
        assert!(legendre_reduce(&d2, &ones[..3], &zeros).is_err());
    }
}
