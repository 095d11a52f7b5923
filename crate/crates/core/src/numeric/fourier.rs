//! Real trigonometric series on the unit period.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `f(τ) = a0 + Σ_k (a_k cos 2πkτ + b_k sin 2πkτ)`, period 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigSeries {
    /// Interpolating series through `values[k]` at `τ_k = k / M`.
    pub fn interpolate(values: &[f64]) -> Self {
        let m = values.len();
        let kmax = m / 2;
        let mut cos = vec![0.0; kmax + 1];
        let mut sin = vec![0.0; kmax + 1];
        for k in 0..=kmax {
            let (mut sc, mut ss) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let th = TAU * ((k * j) % m) as f64 / m as f64;
                sc += v * th.cos();
                ss += v * th.sin();
            }
            let nyquist = m % 2 == 0 && k == kmax;
            let w = if k == 0 || nyquist { 1.0 } else { 2.0 };
            cos[k] = w * sc / m as f64;
            sin[k] = if k == 0 || nyquist {
                0.0
            } else {
                w * ss / m as f64
            };
        }
        TrigSeries { cos, sin }
    }

    /// Value and first two derivatives with respect to τ.
    pub fn eval3(&self, tau: f64) -> (f64, f64, f64) {
        let th = TAU * tau;
        let (s1, c1) = th.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut v = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for k in 0..self.cos.len() {
            let w = TAU * k as f64;
            let (a, b) = (self.cos[k], self.sin[k]);
            v += a * ck + b * sk;
            d1 += w * (b * ck - a * sk);
            d2 -= w * w * (a * ck + b * sk);
            let nc = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = nc;
        }
        (v, d1, d2)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.eval3(tau).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_band_limited_signal() {
        let f = |t: f64| 0.3 + (TAU * t).cos() - 0.25 * (3.0 * TAU * t).sin();
        let vals: Vec<f64> = (0..16).map(|k| f(k as f64 / 16.0)).collect();
        let s = TrigSeries::interpolate(&vals);
        let t = 0.1234;
        let (v, d1, d2) = s.eval3(t);
        assert!((v - f(t)).abs() < 1e-13);
        let df = -TAU * (TAU * t).sin() - 0.75 * TAU * (3.0 * TAU * t).cos();
        assert!((d1 - df).abs() < 1e-11);
        let ddf = -TAU * TAU * (TAU * t).cos() + 0.25 * 9.0 * TAU * TAU * (3.0 * TAU * t).sin();
        assert!((d2 - ddf).abs() < 1e-9);
    }
}
