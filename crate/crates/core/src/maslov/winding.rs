//! Souriau-map winding count for graph paths in (R^{2n} × R^{2n}, −ω × ω).
//!
//! With X an orthonormal frame of the reference Gr(C) and F one of Gr(M),
//! W = XᵀF + i(J̃X)ᵀF is unitary and U = WWᵀ has eigenvalue 1 with
//! multiplicity dim(Gr(M) ∩ Gr(C)). The index is the net number of
//! eigenvalues of U passing the ray e^{iη} in the positive direction, with
//! η > 0 small; this realizes the +m⁺ / −m⁻ endpoint convention.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::MatrixCurve;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::symplect::standard_j;

/// +1 when positive crossing forms turn the eigenvalues of U
/// counterclockwise (fixed by the half-turn rotation example in tests).
pub const WINDING_ORIENTATION: f64 = 1.0;

const MAX_STEP_ARG: f64 = 0.5;
const MAX_DEPTH: usize = 40;
const ETA0: f64 = 1e-3;
const MAX_HALVINGS: usize = 8;
/// Endpoint angles in this band are neither numerically zero nor clearly
/// away from the reference ray.
const NEAR_LO: f64 = 1e-7;
const NEAR_HI: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct WindingResult {
    pub value: i64,
    pub eta: f64,
    pub stable: bool,
    pub near_degenerate: bool,
    /// Unwrapped change of arg det U along the path.
    pub total_arg: f64,
    pub start_angles: Vec<f64>,
    pub end_angles: Vec<f64>,
}

impl WindingResult {
    pub fn start_small_angles(&self) -> Vec<f64> {
        self.start_angles.iter().copied().filter(|a| a.abs() < NEAR_HI).collect()
    }

    pub fn end_small_angles(&self) -> Vec<f64> {
        self.end_angles.iter().copied().filter(|a| a.abs() < NEAR_HI).collect()
    }

    /// Number of endpoint intersection directions (angles numerically zero).
    pub fn end_kernel(&self) -> usize {
        self.end_angles.iter().filter(|a| a.abs() <= NEAR_LO).count()
    }
}

struct Souriau {
    x: Mat,
    jx: Mat,
}

impl Souriau {
    fn new(reference: &Mat) -> Self {
        let k = reference.nrows();
        let n = k / 2;
        let mut g = Mat::zeros(2 * k, k);
        g.view_mut((0, 0), (k, k)).copy_from(&Mat::identity(k, k));
        g.view_mut((k, 0), (k, k)).copy_from(reference);
        let x = linalg::orthonormal_columns(&g);
        let j = standard_j(n);
        let mut jt = Mat::zeros(2 * k, 2 * k);
        jt.view_mut((0, 0), (k, k)).copy_from(&(-&j));
        jt.view_mut((k, k), (k, k)).copy_from(&j);
        let jx = jt * &x;
        Self { x, jx }
    }

    fn w(&self, m: &Mat) -> CMat {
        let k = m.nrows();
        let mut g = Mat::zeros(2 * k, k);
        g.view_mut((0, 0), (k, k)).copy_from(&Mat::identity(k, k));
        g.view_mut((k, 0), (k, k)).copy_from(m);
        let f = linalg::orthonormal_columns(&g);
        let re = self.x.transpose() * &f;
        let im = self.jx.transpose() * &f;
        CMat::from_fn(k, k, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
    }

    fn det_u(&self, m: &Mat) -> Complex64 {
        let d = linalg::complex_det(&self.w(m));
        let d2 = d * d;
        d2 / d2.norm()
    }

    fn angles(&self, m: &Mat) -> Vec<f64> {
        let w = self.w(m);
        let u = &w * w.transpose();
        let mut a: Vec<f64> = linalg::complex_eigenvalues_c(&u).iter().map(|z| z.arg()).collect();
        a.sort_by(f64::total_cmp);
        a
    }
}

fn segment(
    curve: &dyn MatrixCurve,
    s: &Souriau,
    (a, da): (f64, Complex64),
    (b, db): (f64, Complex64),
    depth: usize,
) -> std::result::Result<f64, f64> {
    let r = (db / da).arg();
    if r.abs() <= MAX_STEP_ARG {
        return Ok(r);
    }
    if depth >= MAX_DEPTH {
        return Err(a);
    }
    let mid = 0.5 * (a + b);
    let dm = s.det_u(&curve.eval(mid));
    Ok(segment(curve, s, (a, da), (mid, dm), depth + 1)? + segment(curve, s, (mid, dm), (b, db), depth + 1)?)
}

fn count(total: f64, start: &[f64], end: &[f64], eta: f64) -> f64 {
    let phi = |th: f64| (WINDING_ORIENTATION * th - eta).rem_euclid(2.0 * PI);
    let sa: f64 = start.iter().map(|&t| phi(t)).sum();
    let sb: f64 = end.iter().map(|&t| phi(t)).sum();
    (WINDING_ORIENTATION * total - sb + sa) / (2.0 * PI)
}

/// ι_CLM(Gr(C), Gr(M(t))) over the curve's parameter interval.
pub fn graph_winding(curve: &dyn MatrixCurve, reference: &Mat) -> Result<WindingResult> {
    let s = Souriau::new(reference);
    let grid = curve.grid();
    let first = curve.sample(0);
    let last = curve.sample(grid.len() - 1);
    let mut prev = (grid[0], s.det_u(&first));
    let mut total = 0.0;
    for k in 1..grid.len() {
        let cur = (grid[k], s.det_u(&curve.sample(k)));
        total += segment(curve, &s, prev, cur, 0)
            .map_err(|at| Error::UnresolvedCrossing { location: at })?;
        prev = cur;
    }
    let start_angles = s.angles(&first);
    let end_angles = s.angles(&last);
    let near = |a: &f64| a.abs() > NEAR_LO && a.abs() < NEAR_HI;
    let near_degenerate = start_angles.iter().any(near) || end_angles.iter().any(near);

    let mut eta = ETA0;
    let mut value = count(total, &start_angles, &end_angles, eta);
    let mut stable = false;
    for _ in 0..MAX_HALVINGS {
        let next = count(total, &start_angles, &end_angles, eta / 2.0);
        if (next - value).abs() < 1e-6 {
            stable = true;
            break;
        }
        eta /= 2.0;
        value = next;
    }
    let rounded = value.round();
    if (value - rounded).abs() > 1e-6 {
        stable = false;
    }
    Ok(WindingResult {
        value: rounded as i64,
        eta,
        stable,
        near_degenerate,
        total_arg: total,
        start_angles,
        end_angles,
    })
}
