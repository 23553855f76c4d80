//! Finite-dimensional spectral flow and relative Morse index.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

const ZERO_TOL: f64 = 1e-10;

fn scale(m: &Mat) -> f64 {
    m.norm().max(1.0)
}

/// Number of negative eigenvalues below −tol·max(1, ‖m‖).
pub fn morse_of(m: &Mat) -> usize {
    let thr = ZERO_TOL * scale(m);
    linalg::symmetric_eigenvalues(&linalg::symmetrize(m)).iter().filter(|&&l| l < -thr).count()
}

/// Spectral flow of a path of symmetric matrices sampled on `grid`: net
/// number of eigenvalues crossing zero upward. Eigenvalues are matched in
/// sorted order between consecutive samples, which minimizes the total
/// displacement for real spectra.
pub fn spectral_flow_generic(path: &dyn Fn(f64) -> Mat, grid: &[f64]) -> Result<i64> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points".into()));
    }
    let spectra: Vec<(Vec<f64>, f64)> = grid
        .iter()
        .map(|&t| {
            let m = linalg::symmetrize(&path(t));
            (linalg::symmetric_eigenvalues(&m), ZERO_TOL * scale(&m))
        })
        .collect();
    let dim = spectra[0].0.len();
    if spectra.iter().any(|(e, _)| e.len() != dim) {
        return Err(Error::Dimension("path changes dimension".into()));
    }
    for (idx, which) in [(0, "start"), (spectra.len() - 1, "end")] {
        let (e, thr) = &spectra[idx];
        if e.iter().any(|l| l.abs() <= *thr) {
            return Err(Error::DegenerateEndpoint(format!("{which} of the path has a kernel")));
        }
    }
    let mut flow = 0i64;
    for i in 0..dim {
        let mut last: Option<bool> = None;
        for (e, thr) in &spectra {
            let l = e[i];
            if l.abs() <= *thr {
                continue;
            }
            let neg = l < 0.0;
            if let Some(prev) = last {
                if prev && !neg {
                    flow += 1;
                } else if !prev && neg {
                    flow -= 1;
                }
            }
            last = Some(neg);
        }
    }
    Ok(flow)
}

/// Orthonormal bases of E₋(m) and E₊(m) ⊕ E₀(m).
fn split(m: &Mat) -> (Mat, Mat) {
    let s = linalg::symmetrize(m);
    let thr = ZERO_TOL * scale(&s);
    let eig = nalgebra::SymmetricEigen::new(s);
    let neg: Vec<_> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] < -thr).collect();
    let rest: Vec<_> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] >= -thr).collect();
    let pick = |idx: &[usize]| {
        let n = eig.eigenvectors.nrows();
        Mat::from_fn(n, idx.len(), |r, c| eig.eigenvectors[(r, idx[c])])
    };
    (pick(&neg), pick(&rest))
}

/// dim(X ∩ Y) = dim X + dim Y − rank[X Y] for orthonormal bases.
fn intersection_dim(x: &Mat, y: &Mat) -> usize {
    if x.ncols() == 0 || y.ncols() == 0 {
        return 0;
    }
    let mut xy = Mat::zeros(x.nrows(), x.ncols() + y.ncols());
    xy.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
    xy.view_mut((0, x.ncols()), (y.nrows(), y.ncols())).copy_from(y);
    let (sv, _) = linalg::svd_sorted(&xy);
    let rank = sv.iter().filter(|&&v| v > 1e-8).count();
    x.ncols() + y.ncols() - rank
}

/// ι_rel(T, S) = dim(E₋(S) ∩ E≥(T)) − dim(E₋(T) ∩ E≥(S)).
pub fn relative_morse_index(s: &Mat, t: &Mat) -> Result<i64> {
    if s.shape() != t.shape() || s.nrows() != s.ncols() {
        return Err(Error::Dimension("relative Morse index needs equal square matrices".into()));
    }
    let (s_neg, s_rest) = split(s);
    let (t_neg, t_rest) = split(t);
    Ok(intersection_dim(&s_neg, &t_rest) as i64 - intersection_dim(&t_neg, &s_rest) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, k: usize) -> Vec<f64> {
        (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
    }

    #[test]
    fn generic_flow_examples() {
        let g = grid(-1.0, 1.0, 10);
        let up = |t: f64| Mat::from_element(1, 1, t + 0.05);
        assert_eq!(spectral_flow_generic(&up, &g).unwrap(), 1);
        let cst = |_: f64| Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -1.0]));
        assert_eq!(spectral_flow_generic(&cst, &g).unwrap(), 0);
        let opp = |t: f64| Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![t + 0.05, -t - 0.05]));
        assert_eq!(spectral_flow_generic(&opp, &g).unwrap(), 0);
        // crossing exactly at a sample
        let g = grid(-1.0, 1.0, 2);
        let diag = |t: f64| Mat::from_element(1, 1, t);
        assert_eq!(spectral_flow_generic(&diag, &g).unwrap(), 1);
        let g = grid(0.0, 1.0, 4);
        assert!(matches!(spectral_flow_generic(&diag, &g), Err(Error::DegenerateEndpoint(_))));
    }

    #[test]
    fn relative_index_examples() {
        let s = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0]));
        let t = Mat::identity(2, 2);
        assert_eq!(relative_morse_index(&s, &s).unwrap(), 0);
        assert_eq!(relative_morse_index(&s, &t).unwrap(), 1);
        assert_eq!(relative_morse_index(&t, &s).unwrap(), -1);
    }
}
