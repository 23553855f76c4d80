//! Standard symplectic structure on R^{2n}, the Sp(2n)± stratification and
//! graphs of symplectic matrices as Lagrangian subspaces of the doubled space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Default relative tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// J = [[0, −I], [I, 0]].
pub fn standard_j(n: usize) -> Mat {
    assert!(n >= 1, "standard_j needs n >= 1");
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// ω(z₁, z₂) = ⟨J z₁, z₂⟩.
pub fn omega(z1: &nalgebra::DVector<f64>, z2: &nalgebra::DVector<f64>) -> f64 {
    let n = z1.len() / 2;
    (standard_j(n) * z1).dot(z2)
}

/// ‖MᵀJM − J‖_F.
pub fn symplectic_residual(m: &Mat) -> Result<f64> {
    if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "symplectic test needs even square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let j = standard_j(m.nrows() / 2);
    Ok((m.transpose() * &j * m - j).norm())
}

pub fn is_symplectic(m: &Mat, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(m)? <= tol)
}

/// e^{θJ} = [[cos θ I, −sin θ I], [sin θ I, cos θ I]].
pub fn exp_j(n: usize, theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = c;
        m[(n + i, n + i)] = c;
        m[(i, n + i)] = -s;
        m[(n + i, i)] = s;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpComponent {
    Plus,
    Zero,
    Minus,
}

/// Classification by the sign of det(M − I) with a `tol` band around zero.
pub fn sp_component(m: &Mat, tol: f64) -> Result<SpComponent> {
    let res = symplectic_residual(m)?;
    let scale = 1.0 + m.norm().powi(2);
    if res > 1e-6 * scale {
        return Err(Error::NotSymplectic { residual: res });
    }
    Ok(classify_det(m, tol))
}

/// Same as [`sp_component`] without the symplecticity check.
pub(crate) fn classify_det(m: &Mat, tol: f64) -> SpComponent {
    let k = m.nrows();
    let d = linalg::det_full_pivot(&(m - Mat::identity(k, k)));
    if d.sign == 0 || d.log_abs <= tol.ln() {
        SpComponent::Zero
    } else if d.sign > 0 {
        SpComponent::Plus
    } else {
        SpComponent::Minus
    }
}

/// det(e^{−εJ}A_d − I) > 0 for orthogonal `a`.
pub fn twisted_holonomy_positive(a: &Mat, eps: f64) -> Result<bool> {
    let res = linalg::orthogonality_residual(a);
    if !a.is_square() || res > 1e-8 {
        return Err(Error::NotOrthogonal { residual: res });
    }
    if !(eps > 0.0 && eps < std::f64::consts::FRAC_PI_4) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, π/4), got {eps}")));
    }
    let n = a.nrows();
    let m = exp_j(n, -eps) * linalg::block_diag2(a) - Mat::identity(2 * n, 2 * n);
    Ok(linalg::det_full_pivot(&m).sign > 0)
}

/// Numerical dim ker(M − I): singular values of M − I below `tol·‖M − I‖`,
/// or below `tol` when M − I vanishes.
pub fn graph_intersection_dim(m: &Mat, tol: f64) -> usize {
    let k = m.nrows();
    let d = m - Mat::identity(k, k);
    let sv = d.clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    let thr = if top > 0.0 { tol * top } else { tol };
    sv.iter().filter(|&&s| s <= thr).count()
}

/// Gr(M) ⊂ (R^{2n} × R^{2n}, −ω × ω).
#[derive(Debug, Clone)]
pub struct LagrangianGraphFrame {
    pub generator: Mat,
    pub n: usize,
}

impl LagrangianGraphFrame {
    pub fn new(generator: Mat) -> Result<Self> {
        let res = symplectic_residual(&generator)?;
        let scale = 1.0 + generator.norm().powi(2);
        if res > 1e-8 * scale {
            return Err(Error::NotSymplectic { residual: res });
        }
        let n = generator.nrows() / 2;
        Ok(Self { generator, n })
    }

    /// Orthonormal 4n × 2n basis of the graph.
    pub fn frame(&self) -> Mat {
        let k = 2 * self.n;
        let mut g = Mat::zeros(2 * k, k);
        g.view_mut((0, 0), (k, k)).copy_from(&Mat::identity(k, k));
        g.view_mut((k, 0), (k, k)).copy_from(&self.generator);
        linalg::orthonormal_columns(&g)
    }

    pub fn diagonal_intersection_dim(&self, tol: f64) -> usize {
        graph_intersection_dim(&self.generator, tol)
    }
}

/// exp(J·S) for symmetric S via scaling and squaring of a Taylor series;
/// used to generate random symplectic matrices.
pub fn exp_hamiltonian(s: &Mat) -> Mat {
    let n = s.nrows() / 2;
    let x = standard_j(n) * linalg::symmetrize(s);
    expm(&x)
}

pub fn expm(x: &Mat) -> Mat {
    let k = x.nrows();
    let norm = x.norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let y = x / 2f64.powi(squarings as i32);
    let mut term = Mat::identity(k, k);
    let mut sum = Mat::identity(k, k);
    for i in 1..=20 {
        term = &term * &y / i as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
