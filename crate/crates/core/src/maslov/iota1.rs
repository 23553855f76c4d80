//! ι₁: signed intersections of t ↦ e^{−εJ}M(t) with Sp(2n)⁰, co-oriented by
//! the flow M ↦ Me^{τJ}.

use super::crossing::touch_threshold;
use super::{CrossingRecord, FlowCurve, IndexMethod, IndexResult, MatrixCurve, DET_ZERO_TOL};
use crate::error::{Error, Result};
use crate::flow::SymplecticPath;
use crate::linalg::{self, det_full_pivot, Mat};
use crate::symplect::{classify_det, exp_j, standard_j, SpComponent};

const EPS0: f64 = 1e-3;
const MAX_HALVINGS: usize = 8;
const KERNEL_TOL: f64 = 1e-7;
const CANDIDATE: f64 = 1e-2;

struct Perturbed<'a> {
    curve: &'a dyn MatrixCurve,
    rot: Mat,
    rot_t: Mat,
    j: Mat,
}

impl Perturbed<'_> {
    fn at(&self, t: f64) -> Mat {
        &self.rot * self.curve.eval(t)
    }

    fn minus_i(m: &Mat) -> Mat {
        m - Mat::identity(m.nrows(), m.ncols())
    }

    fn sign(&self, m: &Mat) -> i8 {
        det_full_pivot(&Self::minus_i(m)).sign
    }

    /// sign(det(N − I))·σ_min(N − I)/max(1, ‖N‖).
    fn signed_sigma(&self, m: &Mat) -> f64 {
        let s = linalg::smallest_singular_value(&Self::minus_i(m)) / m.norm().max(1.0);
        f64::from(self.sign(m)) * s
    }

    fn bisect(&self, mut a: f64, mut b: f64, sign_a: i8, tol: f64) -> f64 {
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            let mid = 0.5 * (a + b);
            let s = self.sign(&self.at(mid));
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

    /// Minimizes `orient·signed_sigma` on [a, b].
    fn golden_min(&self, mut a: f64, mut b: f64, orient: f64, tol: f64) -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| orient * self.signed_sigma(&self.at(t));
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

    /// Transversal crossing: sign of d/dt det(N − I) times the co-orientation
    /// tr(adj(N − I)·N·J).
    fn co_oriented(&self, t: f64, sign_after: i8) -> CrossingRecord {
        let m = self.at(t);
        let adj = linalg::adjugate(&Self::minus_i(&m));
        let dir = (adj * &m * &self.j).trace();
        let s = f64::from(sign_after) * dir.signum();
        CrossingRecord {
            location: t,
            kernel_dim: 1,
            signature: if s > 0.0 { (1, 0) } else { (0, 1) },
            regular: dir != 0.0,
        }
    }

    /// Higher-dimensional intersection: ⟨B̃ e^{εJ}v, e^{εJ}v⟩ on ker(N − I).
    fn crossing_form(&self, t: f64, v: &Mat) -> CrossingRecord {
        let b = self.curve.generator(t);
        let y = &self.rot_t * v;
        let gamma = y.transpose() * &b * &y;
        let ev = linalg::symmetric_eigenvalues(&gamma);
        let thr = 1e-7 * b.norm().max(1.0);
        let plus = ev.iter().filter(|&&l| l > thr).count();
        let minus = ev.iter().filter(|&&l| l < -thr).count();
        CrossingRecord { location: t, kernel_dim: v.ncols(), signature: (plus, minus), regular: plus + minus == v.ncols() }
    }

    fn kernel(&self, t: f64) -> Mat {
        let m = self.at(t);
        linalg::kernel(&Self::minus_i(&m), KERNEL_TOL * m.norm().max(1.0)).0
    }

    fn count(&self) -> Result<(i64, Vec<CrossingRecord>, bool)> {
        let grid = self.curve.grid();
        let last = grid.len() - 1;
        let tol = 1e-10 * (grid[last] - grid[0]);
        let ns: Vec<Mat> = (0..=last).map(|k| &self.rot * self.curve.sample(k)).collect();
        if classify_det(&ns[0], DET_ZERO_TOL) == SpComponent::Zero
            || classify_det(&ns[last], DET_ZERO_TOL) == SpComponent::Zero
        {
            return Err(Error::DegenerateEndpoint("perturbed endpoint in Sp⁰".into()));
        }
        let ss: Vec<f64> = ns.iter().map(|m| self.signed_sigma(m)).collect();
        let sg: Vec<i8> = ns.iter().map(|m| self.sign(m)).collect();
        if ss[0].abs() <= KERNEL_TOL || ss[last].abs() <= KERNEL_TOL {
            return Err(Error::DegenerateEndpoint("perturbed endpoint numerically in Sp⁰".into()));
        }
        let mut value = 0;
        let mut records = Vec::new();
        let mut regular = true;
        let mut handled = vec![false; last + 1];
        let nonzero: Vec<usize> = (0..=last).filter(|&k| sg[k] != 0).collect();
        for w in nonzero.windows(2) {
            let (i, k) = (w[0], w[1]);
            if sg[i] != sg[k] {
                let t = self.bisect(grid[i], grid[k], sg[i], tol);
                let v = self.kernel(t);
                let r = if v.ncols() <= 1 { self.co_oriented(t, sg[k]) } else { self.crossing_form(t, &v) };
                value += r.sign();
                regular &= r.regular;
                records.push(r);
                for h in &mut handled[i..=k] {
                    *h = true;
                }
            }
        }
        for k in 0..=last {
            let mags: Vec<f64> = ss[k.saturating_sub(1)..=(k + 1).min(last)].iter().map(|v| v.abs()).collect();
            let at = if k == 0 { 0 } else { 1 };
            if handled[k] || ss[k].abs() > CANDIDATE.max(touch_threshold(&mags, at)) {
                continue;
            }
            let left_ok = k == 0 || ss[k].abs() < ss[k - 1].abs();
            let right_ok = k == last || ss[k].abs() <= ss[k + 1].abs();
            if !(left_ok && right_ok) {
                continue;
            }
            let a = if k == 0 { grid[0] } else { grid[k - 1] };
            let b = if k == last { grid[last] } else { grid[k + 1] };
            let orient = f64::from(sg[k]);
            let (t, fmin) = self.golden_min(a, b, orient, tol);
            if fmin > KERNEL_TOL {
                continue;
            }
            if fmin < -KERNEL_TOL {
                // two transversal roots inside the bracket
                for (lo, hi) in [(a, t), (t, b)] {
                    let root = self.bisect(lo, hi, self.sign(&self.at(lo)), tol);
                    let after = self.sign(&self.at(hi));
                    let r = self.co_oriented(root, after);
                    value += r.sign();
                    regular &= r.regular;
                    records.push(r);
                }
                continue;
            }
            let v = self.kernel(t);
            let r = if v.ncols() >= 2 {
                self.crossing_form(t, &v)
            } else {
                // first-order touch of the singular set
                CrossingRecord { location: t, kernel_dim: 1, signature: (0, 0), regular: false }
            };
            value += r.sign();
            regular &= r.regular;
            records.push(r);
        }
        records.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok((value, records, regular))
    }
}

/// ι₁ for an arbitrary symplectic curve.
pub fn iota1_curve(curve: &dyn MatrixCurve) -> Result<IndexResult> {
    let n = curve.sample(0).nrows() / 2;
    let j = standard_j(n);
    let run = |eps: f64| {
        Perturbed { curve, rot: exp_j(n, -eps), rot_t: exp_j(n, eps), j: j.clone() }.count()
    };
    let mut eps = EPS0;
    let mut prev = run(eps).ok();
    for _ in 0..MAX_HALVINGS {
        let next = run(eps / 2.0).ok();
        if let (Some(a), Some(b)) = (&prev, &next) {
            if a.0 == b.0 {
                let (value, crossings, regular) = a.clone();
                let mut diagnostics = Vec::new();
                if !regular {
                    diagnostics.push("tangential contact with Sp⁰".into());
                }
                return Ok(IndexResult {
                    value,
                    crossings,
                    epsilon_used: Some(eps),
                    certified: regular,
                    method: IndexMethod::CoOrientation,
                    diagnostics,
                });
            }
        }
        eps /= 2.0;
        prev = next;
    }
    Err(Error::EpsilonAdmissibility { halvings: MAX_HALVINGS })
}

/// ι₁(A_dψ(t), t ∈ [0, T]).
pub fn iota1_index(path: &SymplecticPath, a: &Mat) -> Result<IndexResult> {
    let n = path.n();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("A must be {n}x{n}")));
    }
    let curve = FlowCurve::new(path, &path.coefficient, Some(linalg::block_diag2(a)));
    iota1_curve(&curve)
}
