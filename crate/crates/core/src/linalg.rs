//! Small dense linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Sign and log-magnitude of a determinant, from LU with full pivoting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetSign {
    /// −1, 0 or +1.
    pub sign: i8,
    /// ln |det|; `-inf` when the matrix is exactly singular.
    pub log_abs: f64,
}

impl DetSign {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }
}

/// Determinant sign via Gaussian elimination with complete pivoting. Only
/// the pivots' signs and the permutation parity enter the sign, so large
/// dimensions never underflow.
pub fn det_full_pivot(m: &Mat) -> DetSign {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut sign: i8 = 1;
    let mut log_abs = 0.0;
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for j in k..n {
            for i in k..n {
                let v = a[(i, j)].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best == 0.0 {
            return DetSign { sign: 0, log_abs: f64::NEG_INFINITY };
        }
        if pi != k {
            a.swap_rows(pi, k);
            sign = -sign;
        }
        if pj != k {
            a.swap_columns(pj, k);
            sign = -sign;
        }
        let piv = a[(k, k)];
        if piv < 0.0 {
            sign = -sign;
        }
        log_abs += piv.abs().ln();
        for i in (k + 1)..n {
            let f = a[(i, k)] / piv;
            if f != 0.0 {
                for j in (k + 1)..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
    }
    DetSign { sign, log_abs }
}

/// Singular values (descending) together with the right singular vectors as
/// columns, in the same order.
pub fn svd_sorted(m: &Mat) -> (Vec<f64>, Mat) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = Mat::zeros(m.ncols(), order.len());
    for (c, &i) in order.iter().enumerate() {
        v.set_column(c, &vt.row(i).transpose());
    }
    // Wide matrices: complete V with an orthonormal basis of the remaining
    // null directions so callers can always slice the tail.
    if order.len() < m.ncols() {
        let full = complete_basis(&v);
        let sv_full: Vec<f64> = sv.iter().copied().chain(std::iter::repeat(0.0)).take(m.ncols()).collect();
        return (sv_full, full);
    }
    (sv, v)
}

fn complete_basis(v: &Mat) -> Mat {
    let n = v.nrows();
    let mut cols: Vec<DVector<f64>> = (0..v.ncols()).map(|j| v.column(j).into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut x = DVector::zeros(n);
        x[e] = 1.0;
        for c in &cols {
            let d = c.dot(&x);
            x -= c * d;
        }
        let nx = x.norm();
        if nx > 1e-8 {
            cols.push(x / nx);
        }
    }
    Mat::from_columns(&cols)
}

/// Numerical kernel of `m`: right singular vectors whose singular value is at
/// most `abs_tol`. Returns the basis (columns) and the smallest singular
/// value outside the kernel (the spectral gap), or `inf` if none.
pub fn kernel(m: &Mat, abs_tol: f64) -> (Mat, f64) {
    let (sv, v) = svd_sorted(m);
    let dim = sv.iter().filter(|&&s| s <= abs_tol).count();
    let k = sv.len();
    let gap = if dim < k { sv[k - dim - 1] } else { f64::INFINITY };
    let basis = v.columns(k - dim, dim).into_owned();
    (basis, gap)
}

pub fn smallest_singular_value(m: &Mat) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Inertia (negative, zero, positive) of the symmetric part of `m`; an
/// eigenvalue counts as zero when its magnitude is at most `tol`.
pub fn inertia(m: &Mat, tol: f64) -> (usize, usize, usize) {
    if m.is_empty() {
        return (0, 0, 0);
    }
    let s = symmetrize(m);
    let ev = SymmetricEigen::new(s).eigenvalues;
    let mut out = (0, 0, 0);
    for &l in ev.iter() {
        if l < -tol {
            out.0 += 1;
        } else if l > tol {
            out.2 += 1;
        } else {
            out.1 += 1;
        }
    }
    out
}

pub fn symmetric_eigenvalues(m: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).norm()
}

/// Adjugate through the SVD, valid for singular matrices:
/// adj(UΣVᵀ) = det(U)det(V)·V·adj(Σ)·Uᵀ.
pub fn adjugate(m: &Mat) -> Mat {
    let n = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    let s = &svd.singular_values;
    let du = det_full_pivot(&u).sign as f64;
    let dv = det_full_pivot(&vt).sign as f64;
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        let mut p = 1.0;
        for j in 0..n {
            if j != i {
                p *= s[j];
            }
        }
        d[(i, i)] = p;
    }
    vt.transpose() * d * u.transpose() * (du * dv)
}

pub fn complex_eigenvalues(m: &Mat) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Eigenvalues of a complex square matrix, from the complex Schur form.
pub fn complex_eigenvalues_c(m: &CMat) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn complex_det(m: &CMat) -> Complex64 {
    m.clone().lu().determinant()
}

/// ‖AᵀA − I‖_F.
pub fn orthogonality_residual(a: &Mat) -> f64 {
    (a.transpose() * a - Mat::identity(a.ncols(), a.ncols())).norm()
}

/// `diag(A, A)`.
pub fn block_diag2(a: &Mat) -> Mat {
    let n = a.nrows();
    let mut d = Mat::zeros(2 * n, 2 * n);
    d.view_mut((0, 0), (n, n)).copy_from(a);
    d.view_mut((n, n), (n, n)).copy_from(a);
    d
}

/// Orthonormal basis for the column space of a full-column-rank matrix.
pub fn orthonormal_columns(m: &Mat) -> Mat {
    let q = m.clone().qr().q();
    q.columns(0, m.ncols()).into_owned()
}

/// Rotation of R² by `theta`.
pub fn rotation2(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}
