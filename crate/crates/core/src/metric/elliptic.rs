use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the confocal family `x²/(a+λ) + y²/(b+λ) = 1`, `a > b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoordSpec {
    pub a: f64,
    pub b: f64,
}

impl EllipticCoordSpec {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > b && b > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "elliptic coordinates need a > b > 0, got a={a}, b={b}"
            )));
        }
        Ok(EllipticCoordSpec { a, b })
    }

    /// Half-focal distance `√(a − b)`.
    pub fn focus(&self) -> f64 {
        (self.a - self.b).sqrt()
    }

    /// Elliptic coordinates `(λ, μ)` of a point off the axes.
    pub fn from_cartesian(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let scale = self.a.sqrt();
        if x.abs() <= 1e-12 * scale || y.abs() <= 1e-12 * scale {
            return Err(Error::DegenerateCoordinates(format!(
                "point ({x}, {y}) lies on a coordinate axis"
            )));
        }
        let (a, b) = (self.a, self.b);
        let (x2, y2) = (x * x, y * y);
        let p = a + b - x2 - y2;
        let q = a * b - b * x2 - a * y2;
        let disc = p * p - 4.0 * q;
        assert!(disc > 0.0, "negative discriminant for off-axis point");
        let sq = disc.sqrt();
        // stable pair of roots: the one without cancellation first
        let big = if p >= 0.0 {
            -0.5 * (p + sq)
        } else {
            0.5 * (sq - p)
        };
        let other = q / big;
        let (lambda, mu) = if big > other {
            (big, other)
        } else {
            (other, big)
        };
        Ok((lambda, mu))
    }

    /// Cartesian point in the open first quadrant with coordinates `(λ, μ)`.
    pub fn to_cartesian(&self, lambda: f64, mu: f64) -> Result<(f64, f64)> {
        let (a, b) = (self.a, self.b);
        if !(lambda > -b) || !(mu > -a && mu < -b) {
            return Err(Error::DegenerateCoordinates(format!(
                "(λ, μ) = ({lambda}, {mu}) outside λ > -b, -a < μ < -b"
            )));
        }
        let x2 = (a + lambda) * (a + mu) / (a - b);
        let y2 = (b + lambda) * (b + mu) / (b - a);
        Ok((x2.sqrt(), y2.sqrt()))
    }

    /// Jacobian `∂(x, y)/∂(λ, μ)` at a first-quadrant point.
    pub fn jacobian(&self, lambda: f64, mu: f64) -> Result<[[f64; 2]; 2]> {
        let (x, y) = self.to_cartesian(lambda, mu)?;
        let (a, b) = (self.a, self.b);
        // x² = (a+λ)(a+μ)/(a−b) ⇒ 2x dx = ((a+μ)dλ + (a+λ)dμ)/(a−b)
        Ok([
            [
                (a + mu) / (2.0 * x * (a - b)),
                (a + lambda) / (2.0 * x * (a - b)),
            ],
            [
                (b + mu) / (2.0 * y * (b - a)),
                (b + lambda) / (2.0 * y * (b - a)),
            ],
        ])
    }
}

pub fn elliptic_from_cartesian(spec: &EllipticCoordSpec, x: f64, y: f64) -> Result<(f64, f64)> {
    spec.from_cartesian(x, y)
}

pub fn cartesian_from_elliptic(
    spec: &EllipticCoordSpec,
    lambda: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    spec.to_cartesian(lambda, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_point_roots() {
        let e = EllipticCoordSpec::new(2.0, 1.0).unwrap();
        let (l, m) = e.from_cartesian(1.0, 1.0).unwrap();
        let s5 = 5f64.sqrt();
        assert!((l - (s5 - 1.0) / 2.0).abs() < 1e-14);
        assert!((m + (s5 + 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn point_on_member_ellipse() {
        let e = EllipticCoordSpec::new(2.0, 1.0).unwrap();
        let t: f64 = 0.7;
        let (x, y) = (3f64.sqrt() * t.cos(), 2f64.sqrt() * t.sin());
        let (l, _) = e.from_cartesian(x, y).unwrap();
        assert!((l - 1.0).abs() < 1e-13);
    }

    #[test]
    fn axis_is_degenerate() {
        let e = EllipticCoordSpec::new(2.0, 1.0).unwrap();
        assert!(matches!(
            e.from_cartesian(1.0, 0.0),
            Err(Error::DegenerateCoordinates(_))
        ));
        assert!(EllipticCoordSpec::new(1.0, 2.0).is_err());
    }

    #[test]
    fn jacobian_matches_differences() {
        let e = EllipticCoordSpec::new(2.0, 1.0).unwrap();
        let (l, m) = (0.4, -1.3);
        let j = e.jacobian(l, m).unwrap();
        let h = 1e-6;
        let (xp, yp) = e.to_cartesian(l + h, m).unwrap();
        let (xm, ym) = e.to_cartesian(l - h, m).unwrap();
        assert!(((xp - xm) / (2.0 * h) - j[0][0]).abs() < 1e-8);
        assert!(((yp - ym) / (2.0 * h) - j[1][0]).abs() < 1e-8);
    }
}
