//! FFT helpers: DFT coefficients, periodic trigonometric interpolation and
//! a small least-squares line fit used by the convergence diagnostics.

use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::C64;

/// Normalized DFT coefficients `c_k = (1/N) sum_j f_j e^{-2 pi i jk/N}`,
/// stored in FFT order (index `k >= N/2` holds frequency `k - N`).
pub fn dft_coefficients(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    if n == 0 {
        return buf;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`dft_coefficients`].
pub fn dft_synthesize(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    if n == 0 {
        return buf;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Coefficient of frequency `k` (negative allowed) from FFT-ordered data.
pub fn frequency(coeffs: &[C64], k: isize) -> C64 {
    let n = coeffs.len() as isize;
    if k.abs() >= n {
        return C64::new(0.0, 0.0);
    }
    coeffs[k.rem_euclid(n) as usize]
}

/// Trigonometric interpolant of periodic samples on a uniform grid.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    period: f64,
    // frequencies -(N/2-1) ..= N/2-1, then the split Nyquist term
    coeffs: Vec<C64>,
    nyquist: C64,
}

impl TrigInterpolant {
    pub fn new(samples: &[C64], period: f64) -> Self {
        let n = samples.len();
        let c = dft_coefficients(samples);
        let half = (n / 2) as isize;
        let (coeffs, nyquist) = if n % 2 == 0 {
            let v = (-(half - 1)..half).map(|k| frequency(&c, k)).collect();
            (v, c[n / 2])
        } else {
            let v = (-half..=half).map(|k| frequency(&c, k)).collect();
            (v, C64::new(0.0, 0.0))
        };
        TrigInterpolant {
            period,
            coeffs,
            nyquist,
        }
    }

    pub fn eval(&self, s: f64) -> C64 {
        let theta = 2.0 * PI * s / self.period;
        let kmax = (self.coeffs.len() / 2) as i32;
        let step = C64::from_polar(1.0, theta);
        let mut e = C64::from_polar(1.0, -(kmax as f64) * theta);
        let mut acc = C64::new(0.0, 0.0);
        for c in &self.coeffs {
            acc += c * e;
            e *= step;
        }
        if self.nyquist != C64::new(0.0, 0.0) {
            acc += self.nyquist * ((kmax + 1) as f64 * theta).cos();
        }
        acc
    }

    pub fn eval_many(&self, params: &[f64]) -> Vec<C64> {
        params.par_iter().map(|&s| self.eval(s)).collect()
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}
