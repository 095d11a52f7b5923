//! Chebyshev interpolants in one and two variables.
//!
//! Both are built from samples on Chebyshev–Lobatto points and support
//! spectral differentiation; they back tabulated metrics and the separated
//! functions produced by the reconstruction pipelines.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Chebyshev–Lobatto points mapped to `[a, b]`, in increasing order.
pub fn lobatto_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let x = -(PI * k as f64 / n as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect()
}

/// Coefficients from samples at increasing Lobatto points (length n+1).
fn coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![values[0]];
    }
    // values[k] sits at x = -cos(pi k / n) = cos(pi (n-k)/n)
    let mut c = vec![0.0; n + 1];
    for (j, cj) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, vk) in values.iter().enumerate() {
            let m = n - k;
            let w = if m == 0 || m == n { 0.5 } else { 1.0 };
            s += w * vk * (PI * (j * m) as f64 / n as f64).cos();
        }
        *cj = 2.0 * s / n as f64;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    c
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

fn derivative_coefficients(c: &[f64], scale: f64) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d.iter_mut().for_each(|v| *v *= scale);
    if d.is_empty() {
        d.push(0.0);
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cheb1 {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl Cheb1 {
    pub fn from_fn<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let values: Vec<f64> = lobatto_points(a, b, n).into_iter().map(&mut f).collect();
        Self::from_values(a, b, &values)
    }

    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        Cheb1 {
            a,
            b,
            coeffs: coefficients(values),
        }
    }

    #[inline]
    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_unit(x))
    }

    pub fn derivative(&self) -> Cheb1 {
        Cheb1 {
            a: self.a,
            b: self.b,
            coeffs: derivative_coefficients(&self.coeffs, 2.0 / (self.b - self.a)),
        }
    }

    /// Antiderivative vanishing at `x0`.
    pub fn integral(&self, x0: f64) -> Cheb1 {
        let c = &self.coeffs;
        let n = c.len();
        let mut ic = vec![0.0; n + 1];
        let half = 0.5 * (self.b - self.a);
        for k in 1..=n {
            let ckm1 = if k == 1 { 2.0 * c[0] } else { c[k - 1] };
            let ckp1 = if k + 1 < n { c[k + 1] } else { 0.0 };
            ic[k] = half * (ckm1 - ckp1) / (2.0 * k as f64);
        }
        let mut out = Cheb1 {
            a: self.a,
            b: self.b,
            coeffs: ic,
        };
        let shift = out.eval(x0);
        out.coeffs[0] -= shift;
        out
    }
}

/// Tensor-product Chebyshev interpolant; `coeffs[i][j]` multiplies `T_i(x) T_j(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cheb2 {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub coeffs: Vec<Vec<f64>>,
}

impl Cheb2 {
    /// `values[i][j]` sampled at `(lobatto_x[i], lobatto_y[j])`.
    pub fn from_values(x_range: (f64, f64), y_range: (f64, f64), values: &[Vec<f64>]) -> Self {
        let nx = values.len();
        let ny = values[0].len();
        // transform along y for every row, then along x for every column
        let rows: Vec<Vec<f64>> = values.iter().map(|r| coefficients(r)).collect();
        let mut coeffs = vec![vec![0.0; ny]; nx];
        for j in 0..ny {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let cj = coefficients(&col);
            for i in 0..nx {
                coeffs[i][j] = cj[i];
            }
        }
        Cheb2 {
            x_range,
            y_range,
            coeffs,
        }
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(
        x_range: (f64, f64),
        y_range: (f64, f64),
        nx: usize,
        ny: usize,
        mut f: F,
    ) -> Self {
        let xs = lobatto_points(x_range.0, x_range.1, nx);
        let ys = lobatto_points(y_range.0, y_range.1, ny);
        let values: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| f(x, y)).collect())
            .collect();
        Self::from_values(x_range, y_range, &values)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let ux = (2.0 * x - self.x_range.0 - self.x_range.1) / (self.x_range.1 - self.x_range.0);
        let uy = (2.0 * y - self.y_range.0 - self.y_range.1) / (self.y_range.1 - self.y_range.0);
        let col: Vec<f64> = self.coeffs.iter().map(|row| clenshaw(row, uy)).collect();
        clenshaw(&col, ux)
    }

    pub fn dx(&self) -> Cheb2 {
        let nx = self.coeffs.len();
        let ny = self.coeffs[0].len();
        let scale = 2.0 / (self.x_range.1 - self.x_range.0);
        let mut out = vec![vec![0.0; ny]; nx.max(2) - 1];
        for j in 0..ny {
            let col: Vec<f64> = self.coeffs.iter().map(|r| r[j]).collect();
            let d = derivative_coefficients(&col, scale);
            for (i, v) in d.iter().enumerate() {
                out[i][j] = *v;
            }
        }
        Cheb2 {
            x_range: self.x_range,
            y_range: self.y_range,
            coeffs: out,
        }
    }

    pub fn dy(&self) -> Cheb2 {
        let scale = 2.0 / (self.y_range.1 - self.y_range.0);
        Cheb2 {
            x_range: self.x_range,
            y_range: self.y_range,
            coeffs: self
                .coeffs
                .iter()
                .map(|r| derivative_coefficients(r, scale))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_differentiates_exp() {
        let c = Cheb1::from_fn(0.5, 2.0, 24, f64::exp);
        for x in [0.5, 0.77, 1.3, 2.0] {
            assert!((c.eval(x) - x.exp()).abs() < 1e-13);
            assert!((c.derivative().eval(x) - x.exp()).abs() < 1e-11);
        }
        let i = c.integral(0.5);
        assert!((i.eval(1.7) - (1.7f64.exp() - 0.5f64.exp())).abs() < 1e-13);
    }

    #[test]
    fn two_dimensional_partials() {
        let f = |x: f64, y: f64| (x * y).sin() + x * x;
        let c = Cheb2::from_fn((0.0, 1.0), (-1.0, 0.5), 20, 20, f);
        let (x, y) = (0.37, -0.21);
        assert!((c.eval(x, y) - f(x, y)).abs() < 1e-13);
        assert!((c.dx().eval(x, y) - (y * (x * y).cos() + 2.0 * x)).abs() < 1e-11);
        assert!((c.dy().eval(x, y) - x * (x * y).cos()).abs() < 1e-11);
    }
}
