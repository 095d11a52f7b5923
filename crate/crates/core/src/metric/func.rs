//! One-variable function handles used by Liouville specifications.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::cheb::Cheb1;

/// Natural cubic spline through tabulated knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidParameter(
                "spline needs at least three knots and matching lengths".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "spline knots must be strictly increasing".into(),
            ));
        }
        // tridiagonal solve for natural end conditions
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn eval2(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (v, dv)
    }
}

/// A smooth scalar function of one variable with its first derivative.
#[derive(Clone)]
pub enum Func1 {
    Const(f64),
    /// Coefficients in increasing degree.
    Poly(Vec<f64>),
    Spline(CubicSpline),
    /// Interpolant together with its derivative.
    Cheb(Arc<(Cheb1, Cheb1)>),
    Closure(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl fmt::Debug for Func1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Func1::Const(c) => write!(f, "Const({c})"),
            Func1::Poly(c) => write!(f, "Poly({c:?})"),
            Func1::Spline(s) => write!(f, "Spline({} knots)", s.x.len()),
            Func1::Cheb(c) => write!(f, "Cheb({} coeffs)", c.0.coeffs.len()),
            Func1::Closure(_) => write!(f, "Closure"),
        }
    }
}

impl Func1 {
    pub fn closure<F>(f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Func1::Closure(Arc::new(f))
    }

    pub fn cheb(c: Cheb1) -> Self {
        let d = c.derivative();
        Func1::Cheb(Arc::new((c, d)))
    }

    /// Value and derivative at `x`.
    #[inline]
    pub fn eval2(&self, x: f64) -> (f64, f64) {
        match self {
            Func1::Const(c) => (*c, 0.0),
            Func1::Poly(c) => {
                let mut v = 0.0;
                let mut d = 0.0;
                for ck in c.iter().rev() {
                    d = d * x + v;
                    v = v * x + ck;
                }
                (v, d)
            }
            Func1::Spline(s) => s.eval2(x),
            Func1::Cheb(c) => (c.0.eval(x), c.1.eval(x)),
            Func1::Closure(f) => f(x),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval2(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_value_and_derivative() {
        let p = Func1::Poly(vec![1.0, -2.0, 3.0]);
        let (v, d) = p.eval2(2.0);
        assert_eq!(v, 1.0 - 4.0 + 12.0);
        assert_eq!(d, -2.0 + 12.0);
    }

    #[test]
    fn spline_reproduces_knots_and_is_smooth() {
        let x: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval2(*xi).0 - yi).abs() < 1e-14);
        }
        assert!((s.eval2(1.234).0 - 1.234f64.sin()).abs() < 1e-4);
        assert!((s.eval2(1.234).1 - 1.234f64.cos()).abs() < 1e-3);
    }
}
