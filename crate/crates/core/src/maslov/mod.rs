//! Intersection indices of symplectic-matrix paths: the CLM index of graph
//! paths against Δ and against Gr(A_dᵀ), the ι₁ count against Sp(2n)⁰, and
//! the Sp(2n)± parity lemmas.
//!
//! Every CLM value is computed twice: by the crossing-form sum over detected
//! crossings, and by the winding of the Souriau map with a small rotation of
//! the reference ray. The winding count needs no regularity assumption, so
//! it settles paths with degenerate or persistent intersections.

mod crossing;
mod iota1;
mod winding;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::SymplecticPath;
use crate::linalg::{self, Mat};
use crate::linearization::HamiltonianCoefficient;
use crate::symplect::{classify_det, exp_j, sp_component, standard_j, SpComponent};

pub use crossing::{crossing_form_index, CrossingScan};
pub use iota1::{iota1_curve, iota1_index};
pub use winding::{graph_winding, WindingResult, WINDING_ORIENTATION};

/// Threshold on |det(M − I)| below which a matrix counts as lying in Sp⁰ for
/// the component tests. The sign itself comes from the pivots, so only exact
/// (or underflowing) singularity is treated as Zero.
pub const DET_ZERO_TOL: f64 = 1e-250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub location: f64,
    pub kernel_dim: usize,
    /// (m⁺, m⁻) of the crossing form.
    pub signature: (usize, usize),
    pub regular: bool,
}

impl CrossingRecord {
    pub fn sign(&self) -> i64 {
        self.signature.0 as i64 - self.signature.1 as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    CrossingForm,
    Winding,
    CoOrientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub value: i64,
    pub crossings: Vec<CrossingRecord>,
    pub epsilon_used: Option<f64>,
    pub certified: bool,
    pub method: IndexMethod,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// A continuous path of 2n×2n symplectic matrices on an increasing grid.
pub trait MatrixCurve: Sync {
    fn grid(&self) -> &[f64];
    fn sample(&self, k: usize) -> Mat;
    fn eval(&self, t: f64) -> Mat;

    /// Symmetric B̃ with M′ = J B̃ M; defaults to central differences.
    fn generator(&self, t: f64) -> Mat {
        let g = self.grid();
        let (a, b) = (g[0], g[g.len() - 1]);
        let h = 1e-5 * (b - a);
        let lo = (t - h).max(a);
        let hi = (t + h).min(b);
        let dm = (self.eval(hi) - self.eval(lo)) / (hi - lo);
        let m = self.eval(t);
        let n = m.nrows() / 2;
        let j = standard_j(n);
        let minv = -(&j * m.transpose() * &j);
        linalg::symmetrize(&(-(&j * dm * minv)))
    }
}

/// t ↦ L·ψ(t) for a sampled fundamental solution, with B̃ = L B Lᵀ for
/// orthogonal L commuting with J.
pub struct FlowCurve<'a> {
    path: &'a SymplecticPath,
    coefficient: &'a HamiltonianCoefficient,
    left: Option<Mat>,
}

impl<'a> FlowCurve<'a> {
    pub fn new(path: &'a SymplecticPath, coefficient: &'a HamiltonianCoefficient, left: Option<Mat>) -> Self {
        Self { path, coefficient, left }
    }

    fn apply(&self, m: Mat) -> Mat {
        match &self.left {
            Some(l) => l * m,
            None => m,
        }
    }
}

impl MatrixCurve for FlowCurve<'_> {
    fn grid(&self) -> &[f64] {
        &self.path.times
    }

    fn sample(&self, k: usize) -> Mat {
        self.apply(self.path.frames[k].clone())
    }

    fn eval(&self, t: f64) -> Mat {
        self.apply(self.path.at(t))
    }

    fn generator(&self, t: f64) -> Mat {
        let b = self.coefficient.at(t);
        match &self.left {
            Some(l) => l * b * l.transpose(),
            None => b,
        }
    }
}

/// A curve given by samples and an evaluator for off-grid parameters.
pub struct FnCurve<F: Fn(f64) -> Mat + Sync> {
    grid: Vec<f64>,
    samples: Vec<Mat>,
    f: F,
}

impl<F: Fn(f64) -> Mat + Sync> FnCurve<F> {
    pub fn new(grid: Vec<f64>, f: F) -> Self {
        let samples = grid.iter().map(|&t| f(t)).collect();
        Self { grid, samples, f }
    }

    pub fn with_samples(grid: Vec<f64>, samples: Vec<Mat>, f: F) -> Self {
        assert_eq!(grid.len(), samples.len());
        Self { grid, samples, f }
    }
}

impl<F: Fn(f64) -> Mat + Sync> MatrixCurve for FnCurve<F> {
    fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn sample(&self, k: usize) -> Mat {
        self.samples[k].clone()
    }

    fn eval(&self, t: f64) -> Mat {
        (self.f)(t)
    }
}

/// ι_CLM(Gr(C), Gr(M(t))) by winding, cross-checked by crossing forms.
pub fn graph_index(curve: &dyn MatrixCurve, reference: &Mat) -> Result<IndexResult> {
    let wind = graph_winding(curve, reference)?;
    let scan = crossing_form_index(curve, reference);
    let mut diagnostics = scan.diagnostics.clone();
    let mut certified = wind.stable && !wind.near_degenerate;
    if !wind.stable {
        diagnostics.push("winding count not stable under reference-ray halving".into());
    }
    if wind.near_degenerate {
        diagnostics.push(format!(
            "near-degenerate endpoint: intersection angles {:?} / {:?}",
            wind.start_small_angles(),
            wind.end_small_angles()
        ));
    }
    let method = if scan.regular {
        if scan.value != wind.value {
            certified = false;
            diagnostics.push(format!(
                "crossing-form sum {} disagrees with winding count {}",
                scan.value, wind.value
            ));
        }
        IndexMethod::CrossingForm
    } else {
        diagnostics.push("non-regular crossing resolved by the winding count".into());
        IndexMethod::Winding
    };
    Ok(IndexResult {
        value: wind.value,
        crossings: scan.crossings,
        epsilon_used: Some(wind.eta),
        certified,
        method,
        diagnostics,
    })
}

fn check_holonomy(path: &SymplecticPath, a: &Mat) -> Result<Mat> {
    let n = path.n();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("A must be {n}x{n}")));
    }
    let res = linalg::orthogonality_residual(a);
    if res > 1e-8 {
        return Err(Error::NotOrthogonal { residual: res });
    }
    Ok(linalg::block_diag2(a))
}

/// ι_CLM(Δ, Gr(A_dψ(t)), t ∈ [0, T]).
pub fn clm_index_graph_vs_diagonal(
    path: &SymplecticPath,
    a: &Mat,
    b: &HamiltonianCoefficient,
) -> Result<IndexResult> {
    let ad = check_holonomy(path, a)?;
    let k = ad.nrows();
    let curve = FlowCurve::new(path, b, Some(ad));
    graph_index(&curve, &Mat::identity(k, k))
}

/// ι_CLM(Gr(A_dᵀ), Gr(ψ(t)), t ∈ [0, T]).
pub fn clm_index_vs_twisted_graph(
    path: &SymplecticPath,
    a: &Mat,
    b: &HamiltonianCoefficient,
) -> Result<IndexResult> {
    let ad = check_holonomy(path, a)?;
    let curve = FlowCurve::new(path, b, None);
    graph_index(&curve, &ad.transpose())
}

fn perturbed_component(m: &Mat, eps: f64) -> Result<SpComponent> {
    let n = m.nrows() / 2;
    let c = sp_component(&(exp_j(n, -eps) * m), DET_ZERO_TOL)?;
    Ok(c)
}

/// Both perturbed endpoints e^{−εJ}M lie in the same Sp(2n)± component.
pub fn parity_is_even(start: &Mat, end: &Mat, eps: f64) -> Result<bool> {
    let a = perturbed_component(start, eps)?;
    let b = perturbed_component(end, eps)?;
    if a == SpComponent::Zero || b == SpComponent::Zero {
        return Err(Error::ZeroComponent);
    }
    Ok(a == b)
}

/// sp_component(e^{−δJ}M), required to agree at δ, δ/2 and δ/4.
pub fn stable_component_check(m: &Mat, delta: f64) -> Result<SpComponent> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let c0 = perturbed_component(m, delta)?;
    let c1 = perturbed_component(m, delta / 2.0)?;
    let c2 = perturbed_component(m, delta / 4.0)?;
    if c0 != c1 || c1 != c2 {
        return Err(Error::UnstableClassification);
    }
    Ok(c0)
}

/// Odd geometric index forces linear instability; even says nothing.
pub fn instability_from_parity(geo_index: i64) -> bool {
    geo_index.rem_euclid(2) == 1
}

/// Experimental: component of a path leaving M = ψ(a) with velocity ψ′(a),
/// read from the Morse index of sym(ψ(a)ᵀJψ′(a)) on V = ker(ψ(a) − I).
/// When V = 0 this is the plain component of ψ(a).
pub fn experimental_component_from_derivative(m: &Mat, dm: &Mat) -> Result<SpComponent> {
    let k = m.nrows();
    let scale = linalg::spectral_norm(m).max(1.0);
    let (v, _) = linalg::kernel(&(m - Mat::identity(k, k)), 1e-8 * scale);
    if v.ncols() == 0 {
        return Ok(classify_det(m, DET_ZERO_TOL));
    }
    let j = standard_j(k / 2);
    let s = linalg::symmetrize(&(m.transpose() * &j * dm));
    let restricted = v.transpose() * s * &v;
    let (neg, zero, _) = linalg::inertia(&restricted, 1e-10 * restricted.norm().max(1.0));
    if zero > 0 {
        return Err(Error::DegenerateEndpoint("restricted form is degenerate".into()));
    }
    Ok(if neg % 2 == 0 { SpComponent::Plus } else { SpComponent::Minus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::fundamental_solution;
    use crate::linearization::{assemble_b, harmonic, CoefficientData, Source};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn rotation_path(period: f64, nt: usize) -> (SymplecticPath, HamiltonianCoefficient) {
        // P = 1, R = −1 gives B = I at c = 1, s = 0
        let data = CoefficientData::from_samples(
            1,
            period,
            Mat::identity(1, 1),
            vec![Mat::identity(1, 1); 65],
            vec![Mat::zeros(1, 1); 65],
            vec![-Mat::identity(1, 1); 65],
            Source::Sampled { reference: "test".into() },
        )
        .unwrap();
        let b = assemble_b(&Arc::new(data), 1.0, 0.0).unwrap();
        (fundamental_solution(&b, nt).unwrap(), b)
    }

    #[test]
    fn rotation_on_half_turn_has_index_two() {
        let (path, b) = rotation_path(PI, 1024);
        let r = clm_index_graph_vs_diagonal(&path, &Mat::identity(1, 1), &b).unwrap();
        assert_eq!(r.value, 2, "{r:?}");
        assert!(r.certified);
        assert_eq!(r.method, IndexMethod::CrossingForm);
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].location, 0.0);
        assert_eq!(r.crossings[0].signature, (2, 0));
    }

    #[test]
    fn rotation_over_a_full_turn_counts_start_only() {
        // ψ(2π) = I: end crossing with positive form contributes nothing
        let (path, b) = rotation_path(2.0 * PI, 4096);
        let r = clm_index_graph_vs_diagonal(&path, &Mat::identity(1, 1), &b).unwrap();
        assert_eq!(r.value, 2);
        // a turn and a half: one interior crossing at 2π
        let (path, b) = rotation_path(3.0 * PI, 4096);
        let r = clm_index_graph_vs_diagonal(&path, &Mat::identity(1, 1), &b).unwrap();
        assert_eq!(r.value, 4);
        assert!(r.crossings.iter().any(|c| (c.location - 2.0 * PI).abs() < 1e-3 && c.signature == (2, 0)));
    }

    #[test]
    fn free_particle_resolved_by_winding() {
        let d = Arc::new(harmonic(0.0, 1.0, 64).unwrap());
        let b = assemble_b(&d, 1.0, 0.0).unwrap();
        let path = fundamental_solution(&b, 256).unwrap();
        let r = clm_index_graph_vs_diagonal(&path, &d.a, &b).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.method, IndexMethod::Winding);
        assert!(r.certified);
    }

    #[test]
    fn parity_examples() {
        let i = Mat::identity(2, 2);
        assert!(parity_is_even(&i, &i, 1e-3).unwrap());
        let h = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!(!parity_is_even(&i, &h, 1e-3).unwrap());
        assert!(parity_is_even(&i, &exp_j(1, 0.3), 1e-3).unwrap());
    }

    #[test]
    fn stable_component_examples() {
        assert_eq!(stable_component_check(&Mat::identity(2, 2), 1e-3).unwrap(), SpComponent::Plus);
        assert_eq!(stable_component_check(&exp_j(1, 0.3), 1e-3).unwrap(), SpComponent::Plus);
        let h = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert_eq!(stable_component_check(&h, 1e-3).unwrap(), SpComponent::Minus);
    }

    #[test]
    fn parity_instability_rule() {
        assert!(instability_from_parity(3));
        assert!(!instability_from_parity(0));
        assert!(!instability_from_parity(2));
        assert!(instability_from_parity(-1));
    }

    #[test]
    fn experimental_component_off_the_singular_set() {
        let h = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert_eq!(experimental_component_from_derivative(&h, &Mat::zeros(2, 2)).unwrap(), SpComponent::Minus);
        // leaving I along e^{tJ}: ψᵀJψ′ = J·J = −I on V = R² → index 2 → Plus
        let j = standard_j(1);
        assert_eq!(experimental_component_from_derivative(&Mat::identity(2, 2), &j).unwrap(), SpComponent::Plus);
    }
}
