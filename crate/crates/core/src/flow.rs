//! Fundamental solutions of z′ = JB(t)z by the implicit midpoint rule,
//! monodromy, Floquet multipliers and linear-stability classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::linearization::{assemble_b, CoefficientData, HamiltonianCoefficient};
use crate::symplect::{self, standard_j};
use std::sync::Arc;

/// Sampled fundamental solution ψ(t_k), t_k = kT/N_t.
#[derive(Debug, Clone)]
pub struct SymplecticPath {
    pub times: Vec<f64>,
    pub frames: Vec<Mat>,
    /// max_k ‖ψᵀJψ − J‖_F.
    pub residual: f64,
    /// max_k ‖ψᵀJψ − J‖_F / max(1, ‖ψ‖_F²).
    pub relative_residual: f64,
    /// max_k |det ψ − 1|.
    pub det_deviation: f64,
    pub coefficient: HamiltonianCoefficient,
}

/// One Cayley step (I − X/2)⁻¹(I + X/2) with X = h·J·B.
fn cayley(jb: &Mat, h: f64) -> Result<Mat> {
    let k = jb.nrows();
    let half = jb * (0.5 * h);
    let lhs = Mat::identity(k, k) - &half;
    let rhs = Mat::identity(k, k) + &half;
    lhs.lu().solve(&rhs).ok_or_else(|| Error::Integration("midpoint system is singular".into()))
}

fn check_step(b: &Mat, h: f64) -> Result<()> {
    let size = 0.5 * h * b.norm();
    if !(size < 1.0) {
        return Err(Error::Integration(format!(
            "step too large: h/2·‖B‖ = {size:.3} (refine N_t)"
        )));
    }
    Ok(())
}

pub fn fundamental_solution(b: &HamiltonianCoefficient, nt: usize) -> Result<SymplecticPath> {
    if nt < 64 {
        return Err(Error::InvalidParameter(format!("N_t must be >= 64, got {nt}")));
    }
    let n = b.n();
    let k2 = 2 * n;
    let period = b.period();
    let h = period / nt as f64;
    let j = standard_j(n);
    let mids = b.midpoints(nt);
    let mut frames = Vec::with_capacity(nt + 1);
    let mut psi = Mat::identity(k2, k2);
    frames.push(psi.clone());
    for bm in &mids {
        check_step(bm, h)?;
        let step = cayley(&(&j * bm), h)?;
        psi = step * psi;
        if !linalg::is_finite(&psi) {
            return Err(Error::Integration("non-finite frame".into()));
        }
        frames.push(psi.clone());
    }
    let mut residual: f64 = 0.0;
    let mut relative: f64 = 0.0;
    let mut det_dev: f64 = 0.0;
    for f in &frames {
        let r = (f.transpose() * &j * f - &j).norm();
        residual = residual.max(r);
        relative = relative.max(r / f.norm_squared().max(1.0));
        det_dev = det_dev.max((f.determinant() - 1.0).abs());
    }
    let times = (0..=nt).map(|k| k as f64 * h).collect();
    Ok(SymplecticPath {
        times,
        frames,
        residual,
        relative_residual: relative,
        det_deviation: det_dev,
        coefficient: b.clone(),
    })
}

impl SymplecticPath {
    pub fn n(&self) -> usize {
        self.frames[0].nrows() / 2
    }

    pub fn nt(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn period(&self) -> f64 {
        *self.times.last().expect("non-empty path")
    }

    pub fn end(&self) -> &Mat {
        self.frames.last().expect("non-empty path")
    }

    /// ψ(t) off the grid: a partial midpoint step from the preceding sample.
    pub fn at(&self, t: f64) -> Mat {
        let nt = self.nt();
        let h = self.period() / nt as f64;
        let t = t.clamp(0.0, self.period());
        let k = ((t / h).floor() as usize).min(nt - 1);
        let tau = t - self.times[k];
        if tau <= 0.0 {
            return self.frames[k].clone();
        }
        if (self.times[k + 1] - t).abs() <= 1e-15 * self.period() {
            return self.frames[k + 1].clone();
        }
        let bm = self.coefficient.at(self.times[k] + 0.5 * tau);
        let j = standard_j(self.n());
        match cayley(&(j * bm), tau) {
            Ok(step) => step * &self.frames[k],
            Err(_) => self.frames[k].clone(),
        }
    }

    /// B(t) of the integrated family.
    pub fn hamiltonian(&self, t: f64) -> Mat {
        self.coefficient.at(t)
    }
}

pub fn monodromy(path: &SymplecticPath, a: &Mat) -> Result<Mat> {
    let n = path.n();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("A must be {n}x{n}, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(linalg::block_diag2(a) * path.end())
}

/// The linearized Poincaré map in (y, u) coordinates, A_d ψ(T) at c = 1, s = 0.
pub fn poincare_map(data: &Arc<CoefficientData>, nt: usize) -> Result<Mat> {
    let b = assemble_b(data, 1.0, 0.0)?;
    let path = fundamental_solution(&b, nt)?;
    monodromy(&path, &data.a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub re: f64,
    pub im: f64,
    pub algebraic: usize,
    /// Present for unit-circle clusters only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric: Option<usize>,
}

impl Multiplier {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub multipliers: Vec<Multiplier>,
    pub spectrally_stable: bool,
    pub linearly_stable: bool,
    pub semisimple_defect: usize,
    pub max_modulus: f64,
    /// |∏λ − 1|.
    pub product_residual: f64,
    /// Max over λ of the distance from 1/λ̄ to the spectrum.
    pub pairing_residual: f64,
    /// False when a modulus or rank decision sits near its threshold.
    pub certified: bool,
}

pub const CLUSTER_RADIUS: f64 = 1e-6;
pub const UNIT_BAND: f64 = 1e-6;

pub fn floquet(m: &Mat, tol: f64) -> StabilityVerdict {
    let k = m.nrows();
    let mut ev = linalg::complex_eigenvalues(m);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    // single-linkage clustering
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for z in &ev {
        match clusters.iter_mut().find(|c| c.iter().any(|w| (w - z).norm() <= CLUSTER_RADIUS)) {
            Some(c) => c.push(*z),
            None => clusters.push(vec![*z]),
        }
    }
    let scale = linalg::spectral_norm(m).max(1.0);
    let rank_thr = 1e-6 * scale;
    let mut multipliers = Vec::new();
    let mut defect = 0;
    let mut certified = true;
    let mut on_circle_ok = true;
    for c in &clusters {
        let mean = c.iter().sum::<Complex64>() / c.len() as f64;
        let modulus = mean.norm();
        let on_circle = (modulus - 1.0).abs() <= UNIT_BAND.max(tol);
        if !on_circle && (modulus - 1.0).abs() <= 1e-3 {
            certified = false;
        }
        let geometric = if on_circle {
            let shifted = CMat::from_fn(k, k, |i, j| {
                Complex64::new(m[(i, j)], 0.0) - if i == j { mean } else { Complex64::new(0.0, 0.0) }
            });
            let sv = shifted.singular_values();
            let g = sv.iter().filter(|&&s| s <= rank_thr).count();
            // ambiguous rank decisions
            if sv.iter().any(|&s| s > rank_thr * 1e-3 && s < rank_thr * 1e3) && c.len() > 1 {
                certified = false;
            }
            let g = g.min(c.len()).max(1);
            defect = defect.max(c.len() - g);
            if g < c.len() {
                on_circle_ok = false;
            }
            Some(g)
        } else {
            None
        };
        multipliers.push(Multiplier { re: mean.re, im: mean.im, algebraic: c.len(), geometric });
    }
    let max_modulus = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let spectrally_stable = ev.iter().all(|z| z.norm() <= 1.0 + tol.max(UNIT_BAND));
    let linearly_stable = spectrally_stable && on_circle_ok;
    let product: Complex64 = ev.iter().product();
    let pairing = ev
        .iter()
        .map(|z| {
            let target = Complex64::new(1.0, 0.0) / z.conj();
            ev.iter().map(|w| (w - target).norm()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    if symplect::symplectic_residual(m).map(|r| r > 1e-6 * (1.0 + m.norm_squared())).unwrap_or(true) {
        certified = false;
    }
    StabilityVerdict {
        multipliers,
        spectrally_stable,
        linearly_stable,
        semisimple_defect: defect,
        max_modulus,
        product_residual: (product - Complex64::new(1.0, 0.0)).norm(),
        pairing_residual: pairing,
        certified,
    }
}
