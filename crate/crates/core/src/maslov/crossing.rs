//! Crossing detection for t ↦ Gr(M(t)) against Gr(C) and the crossing-form
//! sum m⁺(Γ(a)) + Σ sgn Γ(t_*) − m⁻(Γ(b)).

use super::{CrossingRecord, MatrixCurve};
use crate::linalg::{self, det_full_pivot, Mat};

/// Relative singular-value threshold for a kernel at a grid sample.
const GRID_KERNEL_TOL: f64 = 1e-8;
/// Threshold after root refinement.
const ROOT_KERNEL_TOL: f64 = 1e-7;
/// Candidate threshold for an even-multiplicity touch between samples.
const MINIMUM_CANDIDATE: f64 = 1e-2;
const REGULAR_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingScan {
    pub value: i64,
    pub crossings: Vec<CrossingRecord>,
    pub regular: bool,
    pub diagnostics: Vec<String>,
}

struct Probe<'a> {
    curve: &'a dyn MatrixCurve,
    reference: &'a Mat,
}

impl Probe<'_> {
    fn shifted(&self, m: &Mat) -> Mat {
        m - self.reference
    }

    fn rel_sigma(&self, m: &Mat) -> f64 {
        linalg::smallest_singular_value(&self.shifted(m)) / m.norm().max(1.0)
    }

    fn det_sign(&self, m: &Mat) -> i8 {
        det_full_pivot(&self.shifted(m)).sign
    }

    fn bisect(&self, mut a: f64, mut b: f64, sign_a: i8, tol: f64) -> f64 {
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            let mid = 0.5 * (a + b);
            let s = self.det_sign(&self.curve.eval(mid));
            if s == 0 {
                return mid;
            }
            if s == sign_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    fn golden_min(&self, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| self.rel_sigma(&self.curve.eval(t));
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let t = 0.5 * (a + b);
        (t, f(t))
    }

    /// Crossing form on ker(M(t) − C): Γ(x) = ⟨B̃(t) M x, M x⟩.
    fn record(&self, t: f64, tol: f64) -> CrossingRecord {
        let m = self.curve.eval(t);
        let scale = m.norm().max(1.0);
        let (mut v, _) = linalg::kernel(&self.shifted(&m), tol * scale);
        if v.ncols() == 0 {
            let (_, vecs) = linalg::svd_sorted(&self.shifted(&m));
            let k = vecs.ncols();
            v = vecs.columns(k - 1, 1).into_owned();
        }
        let y = &m * &v;
        let b = self.curve.generator(t);
        let gamma = y.transpose() * &b * &y;
        let ev = linalg::symmetric_eigenvalues(&gamma);
        let thr = REGULAR_TOL * b.norm().max(1.0);
        let plus = ev.iter().filter(|&&l| l > thr).count();
        let minus = ev.iter().filter(|&&l| l < -thr).count();
        CrossingRecord {
            location: t,
            kernel_dim: v.ncols(),
            signature: (plus, minus),
            regular: plus + minus == v.ncols(),
        }
    }
}

/// A sampled local minimum is refined when σ_k is small in absolute terms or
/// comparable to the neighbouring variation (so a V-shaped zero between
/// samples is not missed).
pub(crate) fn touch_threshold(sigma: &[f64], k: usize) -> f64 {
    let left = if k > 0 { (sigma[k - 1] - sigma[k]).abs() } else { 0.0 };
    let right = if k + 1 < sigma.len() { (sigma[k + 1] - sigma[k]).abs() } else { 0.0 };
    MINIMUM_CANDIDATE.max(2.0 * left.max(right))
}

/// Scans the sampled curve for crossings with Gr(C) and sums crossing forms.
pub fn crossing_form_index(curve: &dyn MatrixCurve, reference: &Mat) -> CrossingScan {
    let probe = Probe { curve, reference };
    let grid = curve.grid();
    let last = grid.len() - 1;
    let span = grid[last] - grid[0];
    let loc_tol = 1e-10 * span;
    let samples: Vec<Mat> = (0..=last).map(|k| curve.sample(k)).collect();
    let sigma: Vec<f64> = samples.iter().map(|m| probe.rel_sigma(m)).collect();
    let sign: Vec<i8> = samples.iter().map(|m| probe.det_sign(m)).collect();
    let zero: Vec<bool> = sigma.iter().map(|&s| s <= GRID_KERNEL_TOL).collect();

    let mut crossings = Vec::new();
    let mut diagnostics = Vec::new();
    let mut value: i64 = 0;
    let mut regular = true;

    if zero[0] {
        let r = probe.record(grid[0], GRID_KERNEL_TOL);
        value += r.signature.0 as i64;
        regular &= r.regular;
        crossings.push(r);
    }

    let mut k = 1;
    while k < last {
        if zero[k] {
            if zero[k - 1] || zero[k + 1] {
                regular = false;
                diagnostics.push(format!("persistent intersection near {:.6e}", grid[k]));
                crossings.push(CrossingRecord {
                    location: grid[k],
                    kernel_dim: probe.record(grid[k], GRID_KERNEL_TOL).kernel_dim,
                    signature: (0, 0),
                    regular: false,
                });
                // skip the whole run
                while k < last && zero[k] {
                    k += 1;
                }
                continue;
            }
            let r = probe.record(grid[k], GRID_KERNEL_TOL);
            value += r.sign();
            regular &= r.regular;
            crossings.push(r);
        }
        k += 1;
    }

    for k in 0..last {
        if zero[k] || zero[k + 1] {
            continue;
        }
        if sign[k] != sign[k + 1] && sign[k] != 0 && sign[k + 1] != 0 {
            let t = probe.bisect(grid[k], grid[k + 1], sign[k], loc_tol);
            let r = probe.record(t, ROOT_KERNEL_TOL);
            value += r.sign();
            regular &= r.regular;
            crossings.push(r);
            // an even-multiplicity touch sharing the bracket with the root
            for (lo, hi) in [(grid[k], t), (t, grid[k + 1])] {
                let len = hi - lo;
                if len <= 1e3 * loc_tol {
                    continue;
                }
                let (tm, sm) = probe.golden_min(lo, hi, loc_tol);
                let interior = tm - lo > 1e-3 * len && hi - tm > 1e-3 * len;
                if interior && sm <= ROOT_KERNEL_TOL {
                    let r = probe.record(tm, ROOT_KERNEL_TOL);
                    value += r.sign();
                    regular &= r.regular;
                    crossings.push(r);
                }
            }
        }
    }

    // even-multiplicity touches: local minima of σ with no sign change nearby
    let changes = |k: usize| k < last && !zero[k] && !zero[k + 1] && sign[k] != sign[k + 1];
    for k in 0..=last {
        if zero[k] || sigma[k] > touch_threshold(&sigma, k) {
            continue;
        }
        let left_ok = k == 0 || sigma[k] < sigma[k - 1];
        let right_ok = k == last || sigma[k] <= sigma[k + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        if (k > 0 && changes(k - 1)) || changes(k) {
            continue;
        }
        if (k > 0 && zero[k - 1]) || (k < last && zero[k + 1]) {
            continue;
        }
        let a = if k == 0 { grid[0] } else { grid[k - 1] };
        let b = if k == last { grid[last] } else { grid[k + 1] };
        let (t, s) = probe.golden_min(a, b, loc_tol);
        if s > ROOT_KERNEL_TOL {
            continue;
        }
        let near_start = (t - grid[0]).abs() <= 1e3 * loc_tol;
        let near_end = (grid[last] - t).abs() <= 1e3 * loc_tol;
        if near_start || near_end {
            regular = false;
            diagnostics.push(format!("intersection within refinement tolerance of an endpoint at {t:.6e}"));
            continue;
        }
        let r = probe.record(t, ROOT_KERNEL_TOL);
        value += r.sign();
        regular &= r.regular;
        crossings.push(r);
    }

    if zero[last] {
        let r = probe.record(grid[last], GRID_KERNEL_TOL);
        value -= r.signature.1 as i64;
        regular &= r.regular;
        crossings.push(r);
    }
    crossings.sort_by(|a, b| a.location.total_cmp(&b.location));
    for c in &crossings {
        if !c.regular {
            diagnostics.push(format!(
                "non-regular crossing at {:.6e} (kernel {}, signature {:?})",
                c.location, c.kernel_dim, c.signature
            ));
        }
    }
    CrossingScan { value, crossings, regular, diagnostics }
}
