//! Finite-difference discretization of the twisted Sturm–Liouville operator
//! −(Pu′ + cQu)′ + cQᵀu′ + cRu + sPu, u(0) = Au(T), u′(0) = Au′(T),
//! stored as a block-cyclic tridiagonal matrix with a bordered block LDLᵀ
//! for inertia counts and linear solves.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::linearization::CoefficientData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FiniteDifference2nd,
}

/// Symmetric operator on R^{n·N_x} (node values u_j = u(jT/N_x)), in the L²
/// representation: ⟨Lu, u⟩·h approximates the index form.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub n: usize,
    pub nx: usize,
    pub c: f64,
    pub s: f64,
    pub period: f64,
    pub scheme: Scheme,
    /// Diagonal blocks D_j, row-major n×n each.
    diag: Vec<f64>,
    /// Super-diagonal blocks E_j = L[j, j+1], j = 0..N−2.
    off: Vec<f64>,
    /// Wrap block L[N−1, 0].
    wrap: Vec<f64>,
    /// dL/ds = blockdiag(P(t_j)).
    mass: Vec<f64>,
    scale: f64,
}

// ------------------------------------------------------------ small dense

#[inline]
fn mm(n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
}

/// out = aᵀ b
#[inline]
fn mtm(n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[k * n + i] * b[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
}

#[inline]
fn mv(n: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            s += a[i * n + k] * x[k];
        }
        out[i] = s;
    }
}

#[inline]
fn mtv(n: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            s += a[k * n + i] * x[k];
        }
        out[i] = s;
    }
}

/// LDLᵀ of a small symmetric block without pivoting. Returns the number of
/// negative pivots and writes the inverse, or `None` for a tiny pivot.
fn ldl_inverse(n: usize, s: &[f64], inv: &mut [f64], tiny: f64) -> Option<usize> {
    let mut l = [0.0f64; 64];
    let mut d = [0.0f64; 8];
    debug_assert!(n <= 8);
    let mut neg = 0;
    for j in 0..n {
        let mut dj = s[j * n + j];
        for k in 0..j {
            dj -= l[j * n + k] * l[j * n + k] * d[k];
        }
        if dj.abs() <= tiny || !dj.is_finite() {
            return None;
        }
        d[j] = dj;
        if dj < 0.0 {
            neg += 1;
        }
        l[j * n + j] = 1.0;
        for i in (j + 1)..n {
            let mut v = s[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k] * d[k];
            }
            l[i * n + j] = v / dj;
        }
    }
    // inverse column by column: L D Lᵀ x = e_c
    let mut x = [0.0f64; 8];
    for c in 0..n {
        for i in 0..n {
            let mut v = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                v -= l[i * n + k] * x[k];
            }
            x[i] = v;
        }
        for i in 0..n {
            x[i] /= d[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= l[k * n + i] * x[k];
            }
            x[i] = v;
        }
        for i in 0..n {
            inv[i * n + c] = x[i];
        }
    }
    Some(neg)
}

/// Stored elimination for repeated solves.
struct Factor {
    sinv: Vec<f64>,
    x: Vec<f64>,
    g: Vec<f64>,
    sbinv: Vec<f64>,
}

impl DiscretizedOperator {
    pub fn new(data: &CoefficientData, c: f64, s: f64, nx: usize) -> Result<Self> {
        if nx < 64 {
            return Err(Error::InvalidParameter(format!("N_x must be >= 64, got {nx}")));
        }
        if data.n > 8 {
            return Err(Error::InvalidParameter("discretization supports n <= 8".into()));
        }
        let n = data.n;
        let nn = n * n;
        let h = data.period / nx as f64;
        let fine = data.resample(2 * nx);
        let a = &data.a;
        let mut diag = vec![0.0; nx * nn];
        let mut off = vec![0.0; (nx - 1) * nn];
        let mut wrap = vec![0.0; nn];
        let mut mass = vec![0.0; nx * nn];
        let add = |buf: &mut [f64], j: usize, m: &Mat| {
            for r in 0..n {
                for q in 0..n {
                    buf[j * nn + r * n + q] += m[(r, q)];
                }
            }
        };
        for j in 0..nx {
            let pm = &fine.p[2 * j + 1];
            let qm = &fine.q[2 * j + 1];
            let qs = linalg::symmetrize(qm);
            let kaa = pm / (h * h) - &qs * (c / h);
            let kbb = pm / (h * h) + &qs * (c / h);
            let kab = -pm / (h * h) + (qm.transpose() - qm) * (c / (2.0 * h));
            add(&mut diag, j, &kaa);
            if j + 1 < nx {
                add(&mut diag, j + 1, &kbb);
                add(&mut off, j, &kab);
            } else {
                add(&mut diag, 0, &(a * &kbb * a.transpose()));
                add(&mut wrap, 0, &(kab * a.transpose()));
            }
            let pj = &fine.p[2 * j];
            let node = &fine.r[2 * j] * c + pj * s;
            add(&mut diag, j, &node);
            add(&mut mass, j, pj);
        }
        // exact symmetry of diagonal blocks
        for j in 0..nx {
            for r in 0..n {
                for q in (r + 1)..n {
                    let v = 0.5 * (diag[j * nn + r * n + q] + diag[j * nn + q * n + r]);
                    diag[j * nn + r * n + q] = v;
                    diag[j * nn + q * n + r] = v;
                    let w = 0.5 * (mass[j * nn + r * n + q] + mass[j * nn + q * n + r]);
                    mass[j * nn + r * n + q] = w;
                    mass[j * nn + q * n + r] = w;
                }
            }
        }
        let scale = diag.iter().chain(off.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        Ok(Self { n, nx, c, s, period: data.period, scheme: Scheme::FiniteDifference2nd, diag, off, wrap, mass, scale })
    }

    pub fn dim(&self) -> usize {
        self.n * self.nx
    }

    /// Largest block entry magnitude (≈ ‖P‖/h²).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same operator at another shift s′ (L + (s′ − s)·mass).
    pub fn at_shift(&self, s: f64) -> Self {
        let mut out = self.clone();
        let ds = s - self.s;
        for (d, m) in out.diag.iter_mut().zip(&self.mass) {
            *d += ds * m;
        }
        out.s = s;
        out
    }

    pub fn to_dense(&self) -> Mat {
        let (n, nx) = (self.n, self.nx);
        let nn = n * n;
        let mut m = Mat::zeros(n * nx, n * nx);
        for j in 0..nx {
            for r in 0..n {
                for q in 0..n {
                    m[(j * n + r, j * n + q)] += self.diag[j * nn + r * n + q];
                    if j + 1 < nx {
                        let e = self.off[j * nn + r * n + q];
                        m[(j * n + r, (j + 1) * n + q)] += e;
                        m[((j + 1) * n + q, j * n + r)] += e;
                    }
                }
            }
        }
        for r in 0..n {
            for q in 0..n {
                let w = self.wrap[r * n + q];
                m[((nx - 1) * n + r, q)] += w;
                m[(q, (nx - 1) * n + r)] += w;
            }
        }
        m
    }

    /// The s-derivative blockdiag(P(t_j)).
    pub fn mass_dense(&self) -> Mat {
        let (n, nx) = (self.n, self.nx);
        let mut m = Mat::zeros(n * nx, n * nx);
        for j in 0..nx {
            for r in 0..n {
                for q in 0..n {
                    m[(j * n + r, j * n + q)] = self.mass[j * n * n + r * n + q];
                }
            }
        }
        m
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let (n, nx) = (self.n, self.nx);
        let nn = n * n;
        let mut y = DVector::zeros(n * nx);
        let mut tmp = vec![0.0; n];
        let xs = x.as_slice();
        for j in 0..nx {
            mv(n, &self.diag[j * nn..(j + 1) * nn], &xs[j * n..(j + 1) * n], &mut tmp);
            for r in 0..n {
                y[j * n + r] += tmp[r];
            }
            if j + 1 < nx {
                let e = &self.off[j * nn..(j + 1) * nn];
                mv(n, e, &xs[(j + 1) * n..(j + 2) * n], &mut tmp);
                for r in 0..n {
                    y[j * n + r] += tmp[r];
                }
                mtv(n, e, &xs[j * n..(j + 1) * n], &mut tmp);
                for r in 0..n {
                    y[(j + 1) * n + r] += tmp[r];
                }
            }
        }
        mv(n, &self.wrap, &xs[0..n], &mut tmp);
        for r in 0..n {
            y[(nx - 1) * n + r] += tmp[r];
        }
        mtv(n, &self.wrap, &xs[(nx - 1) * n..nx * n], &mut tmp);
        for r in 0..n {
            y[r] += tmp[r];
        }
        y
    }

    pub fn apply_mass(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let nn = n * n;
        let mut y = DVector::zeros(self.dim());
        let mut tmp = vec![0.0; n];
        for j in 0..self.nx {
            mv(n, &self.mass[j * nn..(j + 1) * nn], &x.as_slice()[j * n..(j + 1) * n], &mut tmp);
            for r in 0..n {
                y[j * n + r] = tmp[r];
            }
        }
        y
    }

    /// Bordered block elimination of L − σI (node N−1 is the border).
    /// Returns the number of negative pivots, i.e. #eig < σ by Sylvester's
    /// law, or `None` on a tiny pivot.
    fn eliminate(&self, sigma: f64, mut store: Option<&mut Factor>) -> Option<usize> {
        let (n, nx) = (self.n, self.nx);
        let nn = n * n;
        let tiny = 1e-14 * self.scale;
        let shifted = |j: usize, out: &mut [f64]| {
            out.copy_from_slice(&self.diag[j * nn..(j + 1) * nn]);
            for r in 0..n {
                out[r * n + r] -= sigma;
            }
        };
        let mut s = vec![0.0; nn];
        let mut sinv = vec![0.0; nn];
        let mut g = vec![0.0; nn];
        let mut x = vec![0.0; nn];
        let mut t1 = vec![0.0; nn];
        let mut t2 = vec![0.0; nn];
        let mut sb = vec![0.0; nn];
        shifted(nx - 1, &mut sb);
        shifted(0, &mut s);
        for r in 0..n {
            for q in 0..n {
                g[r * n + q] = self.wrap[q * n + r];
            }
        }
        let mut neg = 0;
        for j in 0..nx - 1 {
            if j > 0 {
                let e = &self.off[(j - 1) * nn..j * nn];
                // X = S_{j−1}⁻¹ E_{j−1}
                mm(n, &sinv, e, &mut x);
                shifted(j, &mut s);
                mtm(n, e, &x, &mut t1);
                for (a, b) in s.iter_mut().zip(&t1) {
                    *a -= b;
                }
                // G_j = C_j − Xᵀ G_{j−1}
                mtm(n, &x, &g, &mut t1);
                if j == nx - 2 {
                    g.copy_from_slice(&self.off[(nx - 2) * nn..(nx - 1) * nn]);
                } else {
                    g.iter_mut().for_each(|v| *v = 0.0);
                }
                for (a, b) in g.iter_mut().zip(&t1) {
                    *a -= b;
                }
                if let Some(f) = store.as_deref_mut() {
                    f.x[j * nn..(j + 1) * nn].copy_from_slice(&x);
                }
            }
            neg += ldl_inverse(n, &s, &mut sinv, tiny)?;
            // S_b −= Gᵀ S⁻¹ G
            mm(n, &sinv, &g, &mut t1);
            mtm(n, &g, &t1, &mut t2);
            for (a, b) in sb.iter_mut().zip(&t2) {
                *a -= b;
            }
            if let Some(f) = store.as_deref_mut() {
                f.sinv[j * nn..(j + 1) * nn].copy_from_slice(&sinv);
                f.g[j * nn..(j + 1) * nn].copy_from_slice(&g);
            }
        }
        // symmetrize the border block against round-off
        for r in 0..n {
            for q in (r + 1)..n {
                let v = 0.5 * (sb[r * n + q] + sb[q * n + r]);
                sb[r * n + q] = v;
                sb[q * n + r] = v;
            }
        }
        neg += ldl_inverse(n, &sb, &mut sinv, tiny)?;
        if let Some(f) = store {
            f.sbinv.copy_from_slice(&sinv);
        }
        Some(neg)
    }

    /// Number of eigenvalues strictly below σ.
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut shift = sigma;
        for attempt in 0..16 {
            if let Some(c) = self.eliminate(shift, None) {
                return c;
            }
            shift = sigma + 1e-13 * self.scale * f64::from(1 << attempt) * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        }
        // fall back to a dense decomposition
        linalg::symmetric_eigenvalues(&self.to_dense()).iter().filter(|&&l| l < sigma).count()
    }

    fn factor(&self, sigma: f64) -> (Factor, f64) {
        let nn = self.n * self.n;
        let mut f = Factor {
            sinv: vec![0.0; self.nx * nn],
            x: vec![0.0; self.nx * nn],
            g: vec![0.0; self.nx * nn],
            sbinv: vec![0.0; nn],
        };
        let mut shift = sigma;
        for attempt in 0..32 {
            if self.eliminate(shift, Some(&mut f)).is_some() {
                return (f, shift);
            }
            shift = sigma + 1e-12 * self.scale * f64::from(1 << (attempt / 2));
        }
        (f, shift)
    }

    fn solve_with(&self, f: &Factor, b: &[f64], out: &mut [f64]) {
        let (n, nx) = (self.n, self.nx);
        let nn = n * n;
        let mut y = b.to_vec();
        let mut t = vec![0.0; n];
        for j in 1..nx - 1 {
            let (prev, cur) = y.split_at_mut(j * n);
            mtv(n, &f.x[j * nn..(j + 1) * nn], &prev[(j - 1) * n..j * n], &mut t);
            for r in 0..n {
                cur[r] -= t[r];
            }
        }
        let mut yb = y[(nx - 1) * n..].to_vec();
        let mut u = vec![0.0; n];
        for j in 0..nx - 1 {
            mv(n, &f.sinv[j * nn..(j + 1) * nn], &y[j * n..(j + 1) * n], &mut u);
            mtv(n, &f.g[j * nn..(j + 1) * nn], &u, &mut t);
            for r in 0..n {
                yb[r] -= t[r];
            }
        }
        let mut xb = vec![0.0; n];
        mv(n, &f.sbinv, &yb, &mut xb);
        out[(nx - 1) * n..].copy_from_slice(&xb);
        let mut rhs = vec![0.0; n];
        for j in (0..nx - 1).rev() {
            rhs.copy_from_slice(&y[j * n..(j + 1) * n]);
            mv(n, &f.g[j * nn..(j + 1) * nn], &xb, &mut t);
            for r in 0..n {
                rhs[r] -= t[r];
            }
            if j + 1 < nx - 1 {
                mv(n, &self.off[j * nn..(j + 1) * nn], &out[(j + 1) * n..(j + 2) * n], &mut t);
                for r in 0..n {
                    rhs[r] -= t[r];
                }
            }
            mv(n, &f.sinv[j * nn..(j + 1) * nn], &rhs, &mut t);
            out[j * n..(j + 1) * n].copy_from_slice(&t);
        }
    }

    /// Solves (L − σI)x = b.
    pub fn solve(&self, sigma: f64, b: &DVector<f64>) -> DVector<f64> {
        let (f, _) = self.factor(sigma);
        let mut out = vec![0.0; self.dim()];
        self.solve_with(&f, b.as_slice(), &mut out);
        DVector::from_vec(out)
    }

    /// Orthonormal basis of the k eigenvectors nearest σ by inverse subspace
    /// iteration with Rayleigh–Ritz; returns the basis and Ritz values.
    pub fn eigenvectors_near(&self, sigma: f64, k: usize, seed: u64) -> (Mat, Vec<f64>) {
        let dim = self.dim();
        let k = k.min(dim).max(1);
        let (f, _) = self.factor(sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Mat::from_fn(dim, k, |_, _| rng.gen_range(-1.0..1.0));
        x = linalg::orthonormal_columns(&x);
        let mut buf = vec![0.0; dim];
        for _ in 0..6 {
            let mut y = Mat::zeros(dim, k);
            for c in 0..k {
                let col: Vec<f64> = x.column(c).iter().copied().collect();
                self.solve_with(&f, &col, &mut buf);
                y.set_column(c, &DVector::from_column_slice(&buf));
            }
            if !linalg::is_finite(&y) {
                break;
            }
            x = linalg::orthonormal_columns(&y);
        }
        // Rayleigh–Ritz
        let lx = Mat::from_columns(&(0..k).map(|c| self.apply(&x.column(c).into_owned())).collect::<Vec<_>>());
        let h = linalg::symmetrize(&(x.transpose() * lx));
        let eig = nalgebra::SymmetricEigen::new(h);
        let v = &x * &eig.eigenvectors;
        (v, eig.eigenvalues.iter().copied().collect())
    }
}

pub fn discretize(data: &CoefficientData, c: f64, s: f64, nx: usize) -> Result<DiscretizedOperator> {
    DiscretizedOperator::new(data, c, s, nx)
}
