//! Periodic spectral operations on uniformly sampled data: differentiation,
//! antidifferentiation, differentiation matrices, and trigonometric
//! interpolation off the grid.
//!
//! All routines take samples f_j = f(j·p/N) of a p-periodic function and are
//! spectrally accurate for smooth f.

use rustfft::FftPlanner;
use rustfft::num_complex::Complex;

fn fft(samples: &[f64]) -> Vec<Complex<f64>> {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

fn ifft_real(mut buf: Vec<Complex<f64>>) -> Vec<f64> {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Signed wavenumber of FFT bin q for length n: 0, 1, ..., n/2, -(n/2-1), ..., -1.
fn freq(q: usize, n: usize) -> i64 {
    if q <= n / 2 {
        q as i64
    } else {
        q as i64 - n as i64
    }
}

/// Spectral derivative of given order.
///
/// The Nyquist bin is zeroed for odd orders (its derivative is not
/// representable on the grid).
pub fn derivative(samples: &[f64], p: f64, order: u32) -> Vec<f64> {
    let n = samples.len();
    let mut c = fft(samples);
    let base = 2.0 * std::f64::consts::PI / p;
    for (q, cq) in c.iter_mut().enumerate() {
        let k = freq(q, n) as f64 * base;
        let factor = Complex::new(0.0, k).powu(order);
        *cq *= factor;
        if order % 2 == 1 && n % 2 == 0 && q == n / 2 {
            *cq = Complex::new(0.0, 0.0);
        }
    }
    ifft_real(c)
}

/// Antiderivative F(θ_j) = ∫₀^{θ_j} f, split as mean(f)·θ plus the periodic
/// antiderivative of the zero-mean part, normalized so F(0) = 0.
pub fn antiderivative(samples: &[f64], p: f64) -> Vec<f64> {
    let n = samples.len();
    let mut c = fft(samples);
    let mean = c[0].re / n as f64;
    let base = 2.0 * std::f64::consts::PI / p;
    c[0] = Complex::new(0.0, 0.0);
    for q in 1..n {
        let k = freq(q, n) as f64 * base;
        if n % 2 == 0 && q == n / 2 {
            c[q] = Complex::new(0.0, 0.0);
        } else {
            c[q] /= Complex::new(0.0, k);
        }
    }
    let periodic = ifft_real(c);
    let p0 = periodic[0];
    (0..n)
        .map(|j| mean * (j as f64 * p / n as f64) + periodic[j] - p0)
        .collect()
}

/// Mean value of the samples (the zeroth Fourier coefficient).
pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Dense Fourier differentiation matrix for n uniform points with period p,
/// row-major. For even n this is the standard cotangent form.
pub fn diff_matrix(n: usize, p: f64) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    let scale = 2.0 * std::f64::consts::PI / p;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = i as isize - j as isize;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let ang = std::f64::consts::PI * k as f64 / n as f64;
            let v = if n % 2 == 0 {
                0.5 * sign / ang.tan()
            } else {
                0.5 * sign / ang.sin()
            };
            d[i * n + j] = v * scale;
        }
    }
    d
}

/// Take every `stride`-th sample. The coarse grid must divide the fine one so
/// that coarse nodes are a subset of fine nodes.
pub fn subsample(samples: &[f64], coarse_n: usize) -> Vec<f64> {
    let n = samples.len();
    assert!(
        coarse_n > 0 && n % coarse_n == 0,
        "coarse grid {coarse_n} must divide {n}"
    );
    let stride = n / coarse_n;
    samples.iter().step_by(stride).copied().collect()
}

/// Trigonometric interpolant of uniform samples, evaluable with derivatives at
/// arbitrary points. Used for curvature jets off the grid.
#[derive(Debug, Clone)]
pub struct TrigSeries {
    p: f64,
    /// One-sided coefficients c_q (complex), q = 0..=n/2, with the doubling
    /// for q >= 1 already applied; evaluation is Re Σ c_q e^{i q base θ}.
    coeffs: Vec<Complex<f64>>,
}

impl TrigSeries {
    pub fn fit(samples: &[f64], p: f64) -> Self {
        let n = samples.len();
        let c = fft(samples);
        let half = n / 2;
        let mut coeffs = Vec::with_capacity(half + 1);
        for q in 0..=half {
            let mut cq = c[q] / n as f64;
            if q >= 1 && !(n % 2 == 0 && q == half) {
                cq *= 2.0;
            }
            if n % 2 == 0 && q == half {
                // Real part only; the sine component of the Nyquist mode is
                // invisible on the grid.
                cq = Complex::new(cq.re, 0.0);
            }
            coeffs.push(cq);
        }
        TrigSeries { p, coeffs }
    }

    pub fn period(&self) -> f64 {
        self.p
    }

    /// Evaluate the d-th derivative at θ.
    pub fn eval(&self, theta: f64, d: u32) -> f64 {
        let base = 2.0 * std::f64::consts::PI / self.p;
        let mut acc = 0.0;
        for (q, &cq) in self.coeffs.iter().enumerate() {
            let k = q as f64 * base;
            let rot = Complex::new(0.0, k).powu(d);
            let phase = Complex::new(0.0, k * theta).exp();
            acc += (cq * rot * phase).re;
        }
        acc
    }
}
