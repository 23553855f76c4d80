//! Discretized Sturm–Liouville families A_{c,s}, Morse indices, the s₀
//! non-degeneracy bound and the spectral flow in s defining ι_spec.

mod generic;
mod operator;

pub use generic::{morse_of, relative_morse_index, spectral_flow_generic};
pub use operator::{discretize, DiscretizedOperator, Scheme};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::linearization::CoefficientData;
use crate::maslov::CrossingRecord;

/// Kernel tolerance relative to (1 + s₀).
pub const KERNEL_TOL: f64 = 1e-7;
/// Eigenvalues in (τ, NEAR_DEGENERATE·(1 + s₀)] at s = 0 make the count
/// sensitive to discretization error.
pub const NEAR_DEGENERATE: f64 = 1e-3;
const S0_SAMPLES: usize = 8;
const S0_DOUBLINGS: usize = 4;
/// Initial offset of the s-grid from 0, relative to (1 + s₀).
const GRID_OFFSET: f64 = 1e-6;
/// Crossing localization width, relative to (1 + s₀).
const LOCALIZE: f64 = 1e-9;
/// Localized changes closer than this (relative to 1 + s₀) form one crossing.
const MERGE_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseCount {
    pub index: usize,
    /// Eigenvalues with |λ| ≤ tol.
    pub kernel_candidates: usize,
}

/// Eigenvalue counts of `op` relative to the band [−tol, tol].
pub fn morse_count(op: &DiscretizedOperator, tol: f64) -> MorseCount {
    let index = op.count_below(-tol);
    let upto = op.count_below(tol);
    MorseCount { index, kernel_candidates: upto - index }
}

/// Number of eigenvalues below −tol.
pub fn morse_index(op: &DiscretizedOperator, tol: f64) -> usize {
    op.count_below(-tol)
}

/// Eigenvalues below `upper`, each located by Sturm bisection to `tol`.
pub fn eigenvalues_below(op: &DiscretizedOperator, upper: f64, tol: f64) -> Vec<f64> {
    let total = op.count_below(upper);
    if total == 0 {
        return Vec::new();
    }
    let gersh = op.scale() * 4.0 + op.s.abs() * 10.0 + 10.0;
    let mut lower = -gersh;
    while op.count_below(lower) > 0 {
        lower *= 2.0;
    }
    (0..total)
        .map(|k| {
            // k-th eigenvalue: smallest x with count_below(x) > k
            let (mut a, mut b) = (lower, upper);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if op.count_below(m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// s₀ = 2·max[‖RP⁻¹‖+‖QP⁻¹‖+‖P′P⁻¹‖] + ½·max[‖P′P⁻¹‖+‖QP⁻¹‖‖P′P⁻¹‖+‖QᵀP⁻¹‖]² + 1
/// with spectral norms over the coefficient samples.
pub fn s0_bound(data: &CoefficientData) -> f64 {
    let dp = data.p_derivative_samples();
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for k in 0..=data.nt {
        let Some(pinv) = data.p[k].clone().try_inverse() else {
            return f64::INFINITY;
        };
        let rp = linalg::spectral_norm(&(&data.r[k] * &pinv));
        let qp = linalg::spectral_norm(&(&data.q[k] * &pinv));
        let dpp = linalg::spectral_norm(&(&dp[k] * &pinv));
        let qtp = linalg::spectral_norm(&(data.q[k].transpose() * &pinv));
        first = first.max(rp + qp + dpp);
        second = second.max(dpp + qp * dpp + qtp);
    }
    2.0 * first + 0.5 * second * second + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub c: f64,
    pub nx: usize,
    /// Number of uniform s-samples before adaptive refinement.
    pub s_samples: usize,
    /// Overrides the computed s₀ (still verified).
    pub s0: Option<f64>,
    /// Recompute the Morse difference at 2N_x.
    pub grid_check: bool,
}

impl SpectralOptions {
    pub fn new(nx: usize) -> Self {
        Self { c: 1.0, nx, s_samples: 64, s0: None, grid_check: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlowResult {
    pub value: i64,
    /// Crossings in s; `location` is the s-value.
    pub crossings: Vec<CrossingRecord>,
    pub s0: f64,
    /// Morse difference at 2N_x agrees with the value at N_x.
    pub grid_certificate: bool,
    /// #eig(A_{c,0}) < −τ minus #eig(A_{c,s₀}) < 0.
    pub morse_difference: i64,
    /// dim ker A_{c,0} (eigenvalues in [−τ, τ]).
    pub start_kernel: usize,
    /// Signature (m⁺, m⁻) of the s-crossing form on ker A_{c,0}.
    pub start_signature: (usize, usize),
    /// #eig(A_{c,0}) < −τ; the Morse index when c = 1.
    pub start_morse: usize,
    pub nx: usize,
    pub c: f64,
    pub certified: bool,
    pub diagnostics: Vec<String>,
}

fn tau(s0: f64) -> f64 {
    KERNEL_TOL * (1.0 + s0)
}

fn kernel_dim(op: &DiscretizedOperator, tol: f64) -> usize {
    morse_count(op, tol).kernel_candidates
}

fn verify_s0(base: &DiscretizedOperator, start: f64) -> Result<f64> {
    let mut s0 = start;
    for _ in 0..=S0_DOUBLINGS {
        let t = tau(s0);
        let ok = (0..S0_SAMPLES).into_par_iter().all(|i| {
            let s = s0 * (1.0 + i as f64 / (S0_SAMPLES - 1) as f64);
            kernel_dim(&base.at_shift(s), t) == 0
        });
        if ok {
            return Ok(s0);
        }
        s0 *= 2.0;
    }
    Err(Error::S0Verification { doublings: S0_DOUBLINGS })
}

/// Signature of ⟨P u, u⟩ on the numerical kernel of `op` (dimension `k`).
fn crossing_form(op: &DiscretizedOperator, k: usize, seed: u64) -> (usize, usize, bool) {
    let (v, _) = op.eigenvectors_near(0.0, k, seed);
    let cols: Vec<_> = (0..v.ncols()).map(|c| op.apply_mass(&v.column(c).into_owned())).collect();
    let pv = Mat::from_columns(&cols);
    let gamma = linalg::symmetrize(&(v.transpose() * pv));
    let ev = linalg::symmetric_eigenvalues(&gamma);
    let thr = 1e-7 * gamma.norm().max(1e-3);
    let plus = ev.iter().filter(|&&l| l > thr).count();
    let minus = ev.iter().filter(|&&l| l < -thr).count();
    (plus, minus, plus + minus == k)
}

struct Sweep<'a> {
    base: &'a DiscretizedOperator,
    width: f64,
    pmax: f64,
}

impl Sweep<'_> {
    fn count(&self, s: f64) -> usize {
        self.base.at_shift(s).count_below(0.0)
    }

    /// Splits [a, b] until every change of the negative count is localized.
    fn localize(&self, a: f64, na: usize, b: f64, nb: usize, out: &mut Vec<(f64, f64, i64)>) {
        if na == nb {
            return;
        }
        if b - a <= self.width {
            out.push((a, b, na as i64 - nb as i64));
            return;
        }
        let m = 0.5 * (a + b);
        let nm = self.count(m);
        self.localize(a, na, m, nm, out);
        self.localize(m, nm, b, nb, out);
    }
}

/// Spectral flow of s ↦ A_{c,s}, s ∈ [0, s₀], with the convention
/// −m⁻ at s = 0 and Σ sgn at interior crossings (s₀ is kernel-free).
pub fn spectral_flow_cs(data: &CoefficientData, opts: &SpectralOptions) -> Result<SpectralFlowResult> {
    if !(0.0..=1.0).contains(&opts.c) {
        return Err(Error::InvalidParameter(format!("c must lie in [0, 1], got {}", opts.c)));
    }
    if opts.s_samples < 2 {
        return Err(Error::InvalidParameter("s_samples must be >= 2".into()));
    }
    let base = discretize(data, opts.c, 0.0, opts.nx)?;
    let guess = match opts.s0 {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => return Err(Error::InvalidParameter(format!("s0 must be positive, got {s}"))),
        None => s0_bound(data),
    };
    let s0 = verify_s0(&base, guess)?;
    let t = tau(s0);
    let mut diagnostics = Vec::new();
    if s0 > guess {
        diagnostics.push(format!("s0 raised from {guess} to {s0} during verification"));
    }

    let start = morse_count(&base, t);
    let wide = morse_count(&base, NEAR_DEGENERATE * (1.0 + s0));
    let near_degenerate = wide.kernel_candidates > start.kernel_candidates;
    if near_degenerate {
        diagnostics.push(format!(
            "{} eigenvalue(s) of A_(c,0) within {:.1e} of zero but outside the kernel band",
            wide.kernel_candidates - start.kernel_candidates,
            NEAR_DEGENERATE * (1.0 + s0)
        ));
    }
    let (mut start_plus, mut start_minus, mut start_regular) = (0, 0, true);
    let mut crossings = Vec::new();
    if start.kernel_candidates > 0 {
        let (p, m, reg) = crossing_form(&base, start.kernel_candidates, 0x5eed);
        start_plus = p;
        start_minus = m;
        start_regular = reg;
        crossings.push(CrossingRecord {
            location: 0.0,
            kernel_dim: start.kernel_candidates,
            signature: (p, m),
            regular: reg,
        });
        if !reg {
            diagnostics.push("degenerate crossing form at s = 0".into());
        }
    }

    let pmax = (0..data.nt).map(|k| linalg::spectral_norm(&data.p[k])).fold(0.0, f64::max);
    let sweep = Sweep { base: &base, width: LOCALIZE * (1.0 + s0), pmax };
    let delta = GRID_OFFSET * (1.0 + s0);
    let k = opts.s_samples;
    let grid: Vec<f64> = (0..=k).map(|i| delta + (s0 - delta) * i as f64 / k as f64).collect();
    let counts: Vec<usize> = grid.par_iter().map(|&s| sweep.count(s)).collect();
    let n_delta = counts[0] as i64;
    if n_delta - start.index as i64 != start_minus as i64 {
        diagnostics.push(format!(
            "count just after s = 0 ({n_delta}) differs from Morse count plus m⁻ ({} + {start_minus})",
            start.index
        ));
        start_regular = false;
    }
    let segments: Vec<Vec<(f64, f64, i64)>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            sweep.localize(grid[i], counts[i], grid[i + 1], counts[i + 1], &mut out);
            out
        })
        .collect();

    // merge localized count changes that belong to one (numerically split)
    // multiple eigenvalue
    let window = MERGE_WINDOW * (1.0 + s0);
    let mut merged: Vec<(f64, f64, i64)> = Vec::new();
    for (a, b, change) in segments.into_iter().flatten() {
        match merged.last_mut() {
            Some(last) if a - last.1 <= window => {
                last.1 = b;
                last.2 += change;
            }
            _ => merged.push((a, b, change)),
        }
    }

    let mut interior_sum: i64 = 0;
    let mut all_regular = start_regular;
    for (i, (a, b, change)) in merged.into_iter().enumerate() {
        if change == 0 {
            continue;
        }
        let s = 0.5 * (a + b);
        let op = base.at_shift(s);
        let band = t + sweep.pmax * (b - a);
        let kd = kernel_dim(&op, band).max(change.unsigned_abs() as usize);
        let (p, m, reg) = crossing_form(&op, kd, 0x5eed + i as u64 + 1);
        let sgn = p as i64 - m as i64;
        let consistent = sgn == change;
        if !consistent {
            diagnostics.push(format!("crossing at s = {s:.9e}: signature {p}-{m} but count change {change}"));
        }
        all_regular &= reg && consistent;
        interior_sum += change;
        crossings.push(CrossingRecord { location: s, kernel_dim: kd, signature: (p, m), regular: reg && consistent });
    }

    let end_count = *counts.last().unwrap() as i64;
    let morse_difference = start.index as i64 - end_count;
    let value = interior_sum - start_minus as i64;
    if value != morse_difference {
        diagnostics.push(format!("crossing sum {value} differs from Morse difference {morse_difference}"));
    }

    let grid_certificate = if opts.grid_check {
        let fine = discretize(data, opts.c, 0.0, 2 * opts.nx)?;
        let a = fine.count_below(-t) as i64;
        let b = fine.at_shift(s0).count_below(0.0) as i64;
        let ok = a - b == morse_difference;
        if !ok {
            diagnostics.push(format!("Morse difference {} at 2N_x differs", a - b));
        }
        ok
    } else {
        false
    };

    let certified = all_regular && !near_degenerate && value == morse_difference && grid_certificate;
    Ok(SpectralFlowResult {
        value: morse_difference,
        crossings,
        s0,
        grid_certificate,
        morse_difference,
        start_kernel: start.kernel_candidates,
        start_signature: (start_plus, start_minus),
        start_morse: start.index,
        nx: opts.nx,
        c: opts.c,
        certified,
        diagnostics,
    })
}

/// ι_spec = spfl(A_{1,s}, s ∈ [0, s₀]).
pub fn spectral_index(data: &CoefficientData, nx: usize, s_samples: usize) -> Result<SpectralFlowResult> {
    spectral_flow_cs(data, &SpectralOptions { s_samples, ..SpectralOptions::new(nx) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::{constant_indefinite, harmonic, mathieu, preset};
    use std::f64::consts::PI;

    #[test]
    fn s0_bound_examples() {
        assert!((s0_bound(&harmonic(0.0, 1.0, 64).unwrap()) - 1.0).abs() < 1e-12);
        let w = 1.3;
        assert!((s0_bound(&harmonic(w, 2.0 * PI, 64).unwrap()) - (2.0 * w * w + 1.0)).abs() < 1e-10);
        assert!((s0_bound(&mathieu(1.0, 0.5, 256).unwrap()) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn harmonic_morse_counts() {
        let d = harmonic(1.5, 2.0 * PI, 256).unwrap();
        let op = discretize(&d, 1.0, 0.0, 256).unwrap();
        assert_eq!(morse_index(&op, 1e-7), 3);
        let d = harmonic(0.5, 2.0 * PI, 256).unwrap();
        let op = discretize(&d, 1.0, 0.0, 256).unwrap();
        assert_eq!(morse_index(&op, 1e-7), 1);
    }

    #[test]
    fn harmonic_omega_one_low_spectrum() {
        let d = harmonic(1.0, 2.0 * PI, 256).unwrap();
        let op = discretize(&d, 1.0, 0.0, 512).unwrap();
        let ev = eigenvalues_below(&op, 2.5, 1e-12);
        assert_eq!(ev.len(), 3);
        assert!((ev[0] + 1.0).abs() < 1e-9);
        assert!(ev[1].abs() < 1e-4 && ev[2].abs() < 1e-4);
    }

    #[test]
    fn antiperiodic_free_particle_is_positive() {
        let d = preset("twisted_harmonic", &serde_json::json!({"omega": 0.0, "holonomy": "minus_identity"}), 64);
        let d = d.unwrap();
        let op = discretize(&d, 0.0, 0.0, 256).unwrap();
        let ev = eigenvalues_below(&op, 5.0, 1e-12);
        // ((2k+1)π/T)² with T = 2π: 1/4 (×2), 9/4 (×2), 25/4 is above the cut
        assert_eq!(ev.len(), 4);
        assert!((ev[0] - 0.25).abs() < 1e-4 && (ev[2] - 2.25).abs() < 1e-3);
    }

    #[test]
    fn spectral_index_examples() {
        let r = spectral_index(&harmonic(0.0, 2.0 * PI, 64).unwrap(), 256, 32).unwrap();
        assert_eq!((r.value, r.start_kernel, r.start_signature), (0, 1, (1, 0)));
        assert!(r.certified, "{:?}", r.diagnostics);
        let r = spectral_index(&harmonic(1.5, 2.0 * PI, 64).unwrap(), 256, 32).unwrap();
        assert_eq!(r.value, 3);
        assert!(r.certified, "{:?}", r.diagnostics);
        assert_eq!(r.crossings.iter().map(|c| c.sign()).collect::<Vec<_>>(), vec![2, 1]);
        let r = spectral_index(&constant_indefinite(2.0 * PI, 64).unwrap(), 256, 32).unwrap();
        assert_eq!(r.value, -1);
        assert!(r.certified, "{:?}", r.diagnostics);
    }
}
