//! Interpolation of uniformly sampled scalar series on [0, T]: trigonometric
//! for periodic data, piecewise-cubic Hermite otherwise.

use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Debug, Clone)]
pub enum Series {
    Trig(TrigSeries),
    Cubic(CubicSeries),
}

impl Series {
    /// `values` holds f(kT/N) for k = 0..=N.
    pub fn new(values: &[f64], period: f64, periodic: bool) -> Series {
        if periodic {
            Series::Trig(TrigSeries::new(&values[..values.len() - 1], period))
        } else {
            Series::Cubic(CubicSeries::new(values, period))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Series::Trig(s) => s.eval(t).0,
            Series::Cubic(s) => s.eval(t).0,
        }
    }

    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        match self {
            Series::Trig(s) => s.eval(t),
            Series::Cubic(s) => s.eval(t),
        }
    }

    /// Values at t_j = jT/m for j = 0..=m.
    pub fn resample(&self, m: usize) -> Vec<f64> {
        match self {
            Series::Trig(s) => s.resample(m),
            Series::Cubic(s) => (0..=m).map(|j| s.eval(j as f64 * s.period / m as f64).0).collect(),
        }
    }

    /// Derivative at t_j = jT/m for j = 0..=m.
    pub fn resample_derivative(&self, m: usize) -> Vec<f64> {
        match self {
            Series::Trig(s) => (0..=m).map(|j| s.eval(j as f64 * s.period / m as f64).1).collect(),
            Series::Cubic(s) => (0..=m).map(|j| s.eval(j as f64 * s.period / m as f64).1).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrigSeries {
    period: f64,
    /// DFT coefficients divided by N.
    coeffs: Vec<Complex64>,
    samples: Vec<f64>,
}

impl TrigSeries {
    pub fn new(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let coeffs = buf.into_iter().map(|c| c / n as f64).collect();
        Self { period, coeffs, samples: samples.to_vec() }
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Value and derivative of the real trigonometric interpolant.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.len();
        let w = 2.0 * std::f64::consts::PI / self.period;
        let step = Complex64::from_polar(1.0, w * t);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut val = self.coeffs[0].re;
        let mut der = 0.0;
        let half = n / 2;
        let top = if n.is_multiple_of(2) { half } else { half + 1 };
        for k in 1..top {
            rot *= step;
            let z = self.coeffs[k] * rot;
            val += 2.0 * z.re;
            der += -2.0 * (k as f64) * w * z.im;
        }
        if n.is_multiple_of(2) && n > 1 {
            let ang = w * half as f64 * t;
            let c = self.coeffs[half].re;
            val += c * ang.cos();
            der -= c * half as f64 * w * ang.sin();
        }
        (val, der)
    }

    pub fn resample(&self, m: usize) -> Vec<f64> {
        let n = self.len();
        if m.is_multiple_of(n) {
            if m == n {
                let mut v = self.samples.clone();
                v.push(self.samples[0]);
                return v;
            }
            // Zero-padded spectrum; the Nyquist coefficient is split evenly.
            let mut spec = vec![Complex64::new(0.0, 0.0); m];
            let half = n / 2;
            for k in 0..n {
                let c = self.coeffs[k];
                if n.is_multiple_of(2) && k == half {
                    spec[half] += c * 0.5;
                    spec[m - half] += c * 0.5;
                } else if k < n.div_ceil(2) {
                    spec[k] += c;
                } else {
                    spec[m - (n - k)] += c;
                }
            }
            FftPlanner::new().plan_fft_inverse(m).process(&mut spec);
            let mut v: Vec<f64> = spec.iter().map(|c| c.re).collect();
            v.push(v[0]);
            return v;
        }
        if n.is_multiple_of(m) {
            let stride = n / m;
            let mut v: Vec<f64> = (0..m).map(|j| self.samples[j * stride]).collect();
            v.push(v[0]);
            return v;
        }
        (0..=m).map(|j| self.eval(j as f64 * self.period / m as f64).0).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CubicSeries {
    period: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicSeries {
    pub fn new(values: &[f64], period: f64) -> Self {
        let n = values.len() - 1;
        let h = period / n as f64;
        let mut slopes = vec![0.0; n + 1];
        if n == 1 {
            slopes[0] = (values[1] - values[0]) / h;
            slopes[1] = slopes[0];
        } else {
            for k in 1..n {
                slopes[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
            }
            slopes[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
            slopes[n] = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h);
        }
        Self { period, values: values.to_vec(), slopes }
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.values.len() - 1;
        let h = self.period / n as f64;
        let x = (t / h).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let u = x - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let val = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * d1;
        let der = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * d0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * d1)
            / h;
        (val, der)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trig_interpolation_is_exact_for_band_limited_data() {
        let n = 64;
        let t_per = PI;
        let f = |t: f64| 0.3 - 0.8 * (2.0 * t).cos() + 0.1 * (6.0 * t).sin();
        let vals: Vec<f64> = (0..=n).map(|k| f(k as f64 * t_per / n as f64)).collect();
        let s = Series::new(&vals, t_per, true);
        for &t in &[0.1, 0.77, 2.5, 3.0] {
            let (v, d) = s.eval_with_derivative(t);
            assert!((v - f(t)).abs() < 1e-13);
            let df = 1.6 * (2.0 * t).sin() + 0.6 * (6.0 * t).cos();
            assert!((d - df).abs() < 1e-11);
        }
        let up = s.resample(256);
        for (j, v) in up.iter().enumerate() {
            assert!((v - f(j as f64 * t_per / 256.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn cubic_interpolation_converges() {
        let f = |t: f64| (1.3 * t).sin();
        let err = |n: usize| {
            let vals: Vec<f64> = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
            let s = Series::new(&vals, 1.0, false);
            (0..200).map(|i| (s.eval(i as f64 / 199.0) - f(i as f64 / 199.0)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < e1 / 6.0, "{e1} {e2}");
        assert!(e2 < 1e-6);
    }
}
