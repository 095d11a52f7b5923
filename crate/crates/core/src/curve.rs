//! Parametrized curves in a chart: closed tables and caustics, or local germs.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::metric::{euclidean_cartesian, ChartSpec, MetricChart, Point};
use crate::numeric::cheb::{lobatto_points, Cheb1};
use crate::numeric::fourier::TrigSeries;
use crate::numeric::quad::gauss_legendre;

/// Coordinate shapes a curve can take in its chart.
#[derive(Debug, Clone)]
pub enum Shape {
    /// `center + r (cos 2πτ, sin 2πτ)`.
    Circle { center: Point, radius: f64 },
    /// `center + (a cos 2πτ, b sin 2πτ)`.
    Ellipse { center: Point, semi: [f64; 2] },
    /// `u = value` (axis 0, parameter v) or `v = value` (axis 1, parameter u).
    CoordinateLine { axis: usize, value: f64 },
    /// `origin + τ dir`.
    Segment { origin: Point, dir: [f64; 2] },
    /// Closed curve given by trigonometric series in τ ∈ [0, 1).
    Series { u: TrigSeries, v: TrigSeries },
    /// Open curve given by Chebyshev interpolants on the parameter range;
    /// build with [`Shape::chebyshev`].
    Chebyshev { u: [Cheb1; 3], v: [Cheb1; 3] },
}

impl Shape {
    pub fn chebyshev(u: Cheb1, v: Cheb1) -> Self {
        let du = u.derivative();
        let dv = v.derivative();
        let (ddu, ddv) = (du.derivative(), dv.derivative());
        Shape::Chebyshev {
            u: [u, du, ddu],
            v: [v, dv, ddv],
        }
    }

    fn closed(&self) -> bool {
        matches!(
            self,
            Shape::Circle { .. } | Shape::Ellipse { .. } | Shape::Series { .. }
        )
    }

    /// Position and first two τ-derivatives.
    fn eval(&self, t: f64) -> [[f64; 2]; 3] {
        match self {
            Shape::Circle { center, radius } => {
                let (s, c) = (TAU * t).sin_cos();
                let r = *radius;
                [
                    [center[0] + r * c, center[1] + r * s],
                    [-TAU * r * s, TAU * r * c],
                    [-TAU * TAU * r * c, -TAU * TAU * r * s],
                ]
            }
            Shape::Ellipse { center, semi } => {
                let (s, c) = (TAU * t).sin_cos();
                let [a, b] = *semi;
                [
                    [center[0] + a * c, center[1] + b * s],
                    [-TAU * a * s, TAU * b * c],
                    [-TAU * TAU * a * c, -TAU * TAU * b * s],
                ]
            }
            Shape::CoordinateLine { axis, value } => {
                if *axis == 0 {
                    [[*value, t], [0.0, 1.0], [0.0, 0.0]]
                } else {
                    [[t, *value], [1.0, 0.0], [0.0, 0.0]]
                }
            }
            Shape::Segment { origin, dir } => [
                [origin[0] + t * dir[0], origin[1] + t * dir[1]],
                *dir,
                [0.0, 0.0],
            ],
            Shape::Series { u, v } => {
                let (a0, a1, a2) = u.eval3(t);
                let (b0, b1, b2) = v.eval3(t);
                [[a0, b0], [a1, b1], [a2, b2]]
            }
            Shape::Chebyshev { u, v } => [
                [u[0].eval(t), v[0].eval(t)],
                [u[1].eval(t), v[1].eval(t)],
                [u[2].eval(t), v[2].eval(t)],
            ],
        }
    }

    /// Exact interior indicator where one is cheap: positive inside (left of
    /// the unreversed direction), zero on the curve.
    fn level(&self, p: Point) -> Option<f64> {
        match self {
            Shape::Circle { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                Some((radius * radius - dx * dx - dy * dy) / (2.0 * radius))
            }
            Shape::Ellipse { center, semi } => {
                let x = (p[0] - center[0]) / semi[0];
                let y = (p[1] - center[1]) / semi[1];
                Some(0.5 * semi[0].min(semi[1]) * (1.0 - x * x - y * y))
            }
            Shape::CoordinateLine { axis, value } => Some(if *axis == 0 {
                value - p[0]
            } else {
                p[1] - value
            }),
            Shape::Segment { origin, dir } => {
                let n = dir[0].hypot(dir[1]);
                Some((dir[0] * (p[1] - origin[1]) - dir[1] * (p[0] - origin[0])) / n)
            }
            _ => None,
        }
    }
}

/// Position with τ-derivatives, after orientation is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub pos: Point,
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

#[derive(Debug, Clone)]
struct ArcTable {
    t0: f64,
    h: f64,
    cum: Vec<f64>,
}

/// A strictly geodesically convex curve in a chart.
///
/// Closed curves are parametrized by τ ∈ [0, 1) and accept any real τ (the
/// arc length is lifted accordingly); germs live on a parameter interval.
/// The orientation is chosen so that κ_g > 0 with respect to the left
/// normal, i.e. the convex interior lies to the left.
#[derive(Debug, Clone)]
pub struct ConvexCurve {
    pub chart: MetricChart,
    shape: Shape,
    closed: bool,
    range: (f64, f64),
    reversed: bool,
    arc: ArcTable,
}

impl ConvexCurve {
    /// Build and validate strict convexity, orienting the curve as needed.
    pub fn new(chart: MetricChart, shape: Shape, range: Option<(f64, f64)>) -> Result<Self> {
        let mut c = Self::unchecked(chart, shape, range)?;
        let probes = c.probe_params(64);
        let mut kappas = Vec::with_capacity(probes.len());
        for &t in &probes {
            kappas.push(c.curvature(t)?);
        }
        let scale = c.length().max(1e-300);
        let positive = kappas.iter().all(|&k| k * scale > 1e-8);
        let negative = kappas.iter().all(|&k| k * scale < -1e-8);
        if negative {
            c.reversed = true;
            c.arc = c.build_arc_table();
        } else if !positive {
            let worst = kappas
                .iter()
                .cloned()
                .fold(f64::INFINITY, |a, k| a.min(k.abs()));
            return Err(Error::NotConvex(format!(
                "geodesic curvature changes sign or vanishes (min |κ_g| = {worst:e})"
            )));
        }
        Ok(c)
    }

    /// Build without the convexity check (curvature probes of arbitrary curves).
    pub fn unchecked(chart: MetricChart, shape: Shape, range: Option<(f64, f64)>) -> Result<Self> {
        let closed = shape.closed();
        let range = match (closed, range) {
            (true, _) => (0.0, 1.0),
            (false, Some(r)) if r.0 < r.1 => r,
            (false, Some(r)) => {
                return Err(Error::InvalidParameter(format!(
                    "parameter range {r:?} is empty"
                )))
            }
            (false, None) => match &shape {
                Shape::Chebyshev { u, .. } => (u[0].a, u[0].b),
                _ => {
                    return Err(Error::InvalidParameter(
                        "open curves need a parameter range".into(),
                    ))
                }
            },
        };
        if let Shape::Circle { radius, .. } = &shape {
            if !(*radius > 0.0) {
                return Err(Error::InvalidParameter(
                    "circle radius must be positive".into(),
                ));
            }
        }
        if let Shape::Ellipse { semi, .. } = &shape {
            if !(semi[0] > 0.0 && semi[1] > 0.0) {
                return Err(Error::InvalidParameter("semi-axes must be positive".into()));
            }
        }
        let mut c = ConvexCurve {
            chart,
            shape,
            closed,
            range,
            reversed: false,
            arc: ArcTable {
                t0: 0.0,
                h: 1.0,
                cum: vec![],
            },
        };
        for t in c.probe_params(64) {
            let p = c.eval(t).pos;
            if !c.chart.domain.contains(p) {
                return Err(Error::OutsideDomain(p[0], p[1]));
            }
            if c.chart.tensor(p).norm(c.eval(t).d1) == 0.0 {
                return Err(Error::ZeroSpeed(t));
            }
        }
        c.arc = c.build_arc_table();
        Ok(c)
    }

    pub fn circle(chart: MetricChart, center: Point, radius: f64) -> Result<Self> {
        Self::new(chart, Shape::Circle { center, radius }, None)
    }

    pub fn ellipse(chart: MetricChart, center: Point, semi: [f64; 2]) -> Result<Self> {
        Self::new(chart, Shape::Ellipse { center, semi }, None)
    }

    /// Euclidean unit-free circle `x² + y² = r²` in the Cartesian chart.
    pub fn euclidean_circle(radius: f64) -> Result<Self> {
        Self::circle(euclidean_cartesian(), [0.0, 0.0], radius)
    }

    /// Member `x²/(a+λ) + y²/(b+λ) = 1` of the confocal family, Cartesian chart.
    pub fn confocal_ellipse(a: f64, b: f64, lambda: f64) -> Result<Self> {
        if !(a > b && b + lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "confocal ellipse needs a > b and b + λ > 0 (a={a}, b={b}, λ={lambda})"
            )));
        }
        Self::ellipse(
            euclidean_cartesian(),
            [0.0, 0.0],
            [(a + lambda).sqrt(), (b + lambda).sqrt()],
        )
    }

    /// Closed curve through points sampled at τ = k/M.
    pub fn from_closed_samples(chart: MetricChart, points: &[Point]) -> Result<Self> {
        if points.len() < 8 {
            return Err(Error::InvalidParameter("need at least 8 samples".into()));
        }
        let u: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let v: Vec<f64> = points.iter().map(|p| p[1]).collect();
        Self::new(
            chart,
            Shape::Series {
                u: TrigSeries::interpolate(&u),
                v: TrigSeries::interpolate(&v),
            },
            None,
        )
    }

    /// Open curve through points sampled at the Lobatto nodes of `range`.
    pub fn from_open_samples(
        chart: MetricChart,
        range: (f64, f64),
        points: &[Point],
    ) -> Result<Self> {
        let u: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let v: Vec<f64> = points.iter().map(|p| p[1]).collect();
        Self::new(
            chart,
            Shape::chebyshev(
                Cheb1::from_values(range.0, range.1, &u),
                Cheb1::from_values(range.0, range.1, &v),
            ),
            Some(range),
        )
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Parameters spread over the curve (interior points for germs).
    pub fn probe_params(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.range;
        if self.closed {
            (0..n).map(|k| k as f64 / n as f64).collect()
        } else {
            (0..n)
                .map(|k| a + (b - a) * (k as f64 + 0.5) / n as f64)
                .collect()
        }
    }

    #[inline]
    fn raw_param(&self, t: f64) -> f64 {
        if !self.reversed {
            t
        } else if self.closed {
            -t
        } else {
            self.range.0 + self.range.1 - t
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> CurvePoint {
        let [p, d1, d2] = self.shape.eval(self.raw_param(t));
        if self.reversed {
            CurvePoint {
                pos: p,
                d1: [-d1[0], -d1[1]],
                d2,
            }
        } else {
            CurvePoint { pos: p, d1, d2 }
        }
    }

    #[inline]
    pub fn point(&self, t: f64) -> Point {
        self.eval(t).pos
    }

    /// Metric speed `|dγ/dτ|_g`.
    #[inline]
    pub fn speed(&self, t: f64) -> f64 {
        let c = self.eval(t);
        self.chart.tensor(c.pos).norm(c.d1)
    }

    /// Metric unit tangent in chart components.
    pub fn unit_tangent(&self, t: f64) -> [f64; 2] {
        let c = self.eval(t);
        let s = self.chart.tensor(c.pos).norm(c.d1);
        [c.d1[0] / s, c.d1[1] / s]
    }

    /// Metric unit normal pointing into the convex side.
    pub fn inward_normal(&self, t: f64) -> [f64; 2] {
        let c = self.eval(t);
        let g = self.chart.tensor(c.pos);
        let s = g.norm(c.d1);
        g.rotate([c.d1[0] / s, c.d1[1] / s])
    }

    /// Signed geodesic curvature with respect to the left normal.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        let c = self.eval(t);
        curvature_of(&self.chart, c.pos, c.d1, c.d2).ok_or(Error::ZeroSpeed(t))
    }

    fn build_arc_table(&self) -> ArcTable {
        let panels = if self.closed { 128 } else { 64 };
        let (a, b) = self.range;
        let h = (b - a) / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        for k in 0..panels {
            let lo = a + h * k as f64;
            let prev = *cum.last().unwrap();
            cum.push(prev + self.gl_speed(lo, lo + h));
        }
        ArcTable { t0: a, h, cum }
    }

    fn gl_speed(&self, a: f64, b: f64) -> f64 {
        let (x, w) = gl16();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * self.speed(mid + half * xi);
        }
        s * half
    }

    /// Total length (closed) or length of the parameter range (germ).
    pub fn length(&self) -> f64 {
        match self.arc.cum.last() {
            Some(l) => *l,
            None => self.gl_speed(self.range.0, self.range.1),
        }
    }

    /// Arc length from the start of the range to τ (lifted for closed curves).
    pub fn arclength(&self, t: f64) -> f64 {
        let table = &self.arc;
        let n = table.cum.len() - 1;
        let total = table.cum[n];
        let (turns, local) = if self.closed {
            let f = t.floor();
            (f, t - f)
        } else {
            (0.0, t)
        };
        let x = (local - table.t0) / table.h;
        let k = (x.floor().max(0.0) as usize).min(n - 1);
        let knot = table.t0 + table.h * k as f64;
        turns * total + table.cum[k] + self.gl_speed(knot, local)
    }

    /// Signed arc length from τ0 to τ1.
    pub fn arc_between(&self, t0: f64, t1: f64) -> f64 {
        if self.closed && (t1 - t0).abs() < 0.25 {
            // short arcs directly, avoiding table cancellation
            return self.gl_speed(t0, t1);
        }
        self.arclength(t1) - self.arclength(t0)
    }

    /// Inverse of [`arclength`](Self::arclength).
    pub fn param_at(&self, s: f64) -> f64 {
        let table = &self.arc;
        let n = table.cum.len() - 1;
        let total = table.cum[n];
        let (turns, local) = if self.closed {
            let f = (s / total).floor();
            (f, s - f * total)
        } else {
            (0.0, s)
        };
        let k = table.cum.partition_point(|&c| c <= local).clamp(1, n) - 1;
        let frac = (local - table.cum[k]) / (table.cum[k + 1] - table.cum[k]);
        let mut t = table.t0 + table.h * (k as f64 + frac);
        for _ in 0..20 {
            let ds = self.arclength(t) - local;
            let dt = ds / self.speed(t);
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        t + turns
    }

    /// Reduce τ to the fundamental period for closed curves.
    pub fn wrap(&self, t: f64) -> f64 {
        if self.closed {
            t.rem_euclid(1.0)
        } else {
            t
        }
    }

    /// Nearest curve parameter to a chart point (chart-Euclidean distance)
    /// and the signed chart distance, positive on the convex side.
    pub fn project(&self, p: Point, hint: Option<f64>) -> (f64, f64) {
        let mut t = match hint {
            Some(h) => h,
            None => {
                let probes = self.probe_params(if self.closed { 256 } else { 129 });
                let mut best = (probes[0], f64::INFINITY);
                for t in probes {
                    let q = self.point(t);
                    let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
                    if d < best.1 {
                        best = (t, d);
                    }
                }
                best.0
            }
        };
        for _ in 0..50 {
            let c = self.eval(t);
            let r = [c.pos[0] - p[0], c.pos[1] - p[1]];
            let f = r[0] * c.d1[0] + r[1] * c.d1[1];
            let df = c.d1[0] * c.d1[0] + c.d1[1] * c.d1[1] + r[0] * c.d2[0] + r[1] * c.d2[1];
            let mut step = if df > 0.0 {
                f / df
            } else {
                f / (c.d1[0].powi(2) + c.d1[1].powi(2))
            };
            let cap = 0.1 * (self.range.1 - self.range.0);
            step = step.clamp(-cap, cap);
            t -= step;
            if !self.closed {
                t = t.clamp(self.range.0, self.range.1);
            }
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        let c = self.eval(t);
        let r = [p[0] - c.pos[0], p[1] - c.pos[1]];
        let cross = c.d1[0] * r[1] - c.d1[1] * r[0];
        let d = r[0].hypot(r[1]);
        (self.wrap(t), if cross >= 0.0 { d } else { -d })
    }

    /// Interior indicator: positive inside, zero on the curve, negative
    /// outside; exact for analytic shapes, projection-based otherwise.
    pub fn inside_level(&self, p: Point, hint: Option<f64>) -> f64 {
        match self.shape.level(p) {
            Some(l) => {
                if self.reversed {
                    -l
                } else {
                    l
                }
            }
            None => self.project(p, hint).1,
        }
    }

    /// Metric distance from a nearby point to the curve.
    pub fn distance_to(&self, p: Point) -> f64 {
        let (t, _) = self.project(p, None);
        let q = self.point(t);
        let g = self.chart.tensor(q);
        g.norm([p[0] - q[0], p[1] - q[1]])
    }
}

/// Signed geodesic curvature of any curve from its position, velocity and
/// acceleration in chart coordinates; `None` at zero speed.
pub fn curvature_of(chart: &MetricChart, pos: Point, d1: [f64; 2], d2: [f64; 2]) -> Option<f64> {
    let g = chart.tensor(pos);
    let speed = g.norm(d1);
    if !(speed > 0.0) {
        return None;
    }
    let gam = crate::metric::Christoffel::from_jet(&chart.jet(pos));
    let q = gam.contract(d1, d1);
    let acc = [d2[0] + q[0], d2[1] + q[1]];
    let n = g.rotate([d1[0] / speed, d1[1] / speed]);
    Some(g.dot(acc, n) / (speed * speed))
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Structured-text curve description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    pub shape: ShapeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    /// `x²/(a+λ) + y²/(b+λ) = 1` in the plane.
    ConfocalEllipse { a: f64, b: f64, lambda: f64 },
    CoordinateLine {
        axis: AxisSpec,
        value: f64,
        range: [f64; 2],
    },
    /// Closed curve through equally spaced samples.
    Samples { points: Vec<[f64; 2]> },
    /// Straight chart segment (never convex in a flat chart).
    Segment { from: [f64; 2], to: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSpec {
    /// `u = value`.
    U,
    /// `v = value`.
    V,
}

impl CurveSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<ConvexCurve> {
        let chart = match &self.chart {
            Some(c) => c.build()?,
            None => euclidean_cartesian(),
        };
        self.build_in(chart)
    }

    pub fn build_in(&self, chart: MetricChart) -> Result<ConvexCurve> {
        match &self.shape {
            ShapeSpec::Circle { center, radius } => ConvexCurve::circle(chart, *center, *radius),
            ShapeSpec::Ellipse { center, semi_axes } => {
                ConvexCurve::ellipse(chart, *center, *semi_axes)
            }
            ShapeSpec::ConfocalEllipse { a, b, lambda } => {
                if !(a > b && b + lambda > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "confocal ellipse needs a > b and b + λ > 0 (a={a}, b={b}, λ={lambda})"
                    )));
                }
                ConvexCurve::ellipse(
                    chart,
                    [0.0, 0.0],
                    [(a + lambda).sqrt(), (b + lambda).sqrt()],
                )
            }
            ShapeSpec::CoordinateLine { axis, value, range } => ConvexCurve::new(
                chart,
                Shape::CoordinateLine {
                    axis: if *axis == AxisSpec::U { 0 } else { 1 },
                    value: *value,
                },
                Some((range[0], range[1])),
            ),
            ShapeSpec::Samples { points } => ConvexCurve::from_closed_samples(chart, points),
            ShapeSpec::Segment { from, to } => ConvexCurve::new(
                chart,
                Shape::Segment {
                    origin: *from,
                    dir: [to[0] - from[0], to[1] - from[1]],
                },
                Some((0.0, 1.0)),
            ),
        }
    }
}

/// Lobatto parameter nodes used by [`ConvexCurve::from_open_samples`].
pub fn open_sample_params(range: (f64, f64), n: usize) -> Vec<f64> {
    lobatto_points(range.0, range.1, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{liouville_chart, Func1, LiouvilleSpec};

    #[test]
    fn circle_curvature_and_length() {
        let c = ConvexCurve::euclidean_circle(2.0).unwrap();
        assert!(!c.is_reversed());
        for t in [0.0, 0.3, 0.77] {
            assert!((c.curvature(t).unwrap() - 0.5).abs() < 1e-13);
        }
        assert!((c.length() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((c.arclength(1.25) - 5.0 * std::f64::consts::PI).abs() < 1e-12);
        let t = c.param_at(3.0);
        assert!((c.arclength(t) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let pts: Vec<Point> = (0..32)
            .map(|k| {
                let th = -TAU * k as f64 / 32.0;
                [2.0 * th.cos(), th.sin()]
            })
            .collect();
        let c = ConvexCurve::from_closed_samples(euclidean_cartesian(), &pts).unwrap();
        assert!(c.is_reversed());
        assert!(c.curvature(0.1).unwrap() > 0.0);
        assert!(c.inside_level([0.0, 0.0], None) > 0.0);
        assert!(c.inside_level([3.0, 0.0], None) < 0.0);
    }

    #[test]
    fn ellipse_length_matches_series() {
        let c =
            ConvexCurve::ellipse(euclidean_cartesian(), [0.0, 0.0], [2f64.sqrt(), 1.0]).unwrap();
        // complete elliptic integral oracle via high-resolution quadrature
        let oracle = crate::numeric::quad::integrate(
            |t| {
                let (s, co) = (TAU * t).sin_cos();
                TAU * (2.0 * s * s + co * co).sqrt()
            },
            0.0,
            1.0,
            400,
        );
        assert!((c.length() - oracle).abs() < 1e-12);
    }

    #[test]
    fn straight_segment_is_rejected_but_measurable() {
        let shape = Shape::Segment {
            origin: [0.0, 0.0],
            dir: [1.0, 2.0],
        };
        assert!(matches!(
            ConvexCurve::new(euclidean_cartesian(), shape.clone(), Some((0.0, 1.0))),
            Err(Error::NotConvex(_))
        ));
        let c = ConvexCurve::unchecked(euclidean_cartesian(), shape, Some((0.0, 1.0))).unwrap();
        assert_eq!(c.curvature(0.5).unwrap(), 0.0);
    }

    #[test]
    fn coordinate_line_in_liouville_chart() {
        let spec = LiouvilleSpec {
            u1: Func1::Poly(vec![0.0, 1.0]),
            v1: Func1::Poly(vec![0.0, 0.0, -1.0]),
            u2: Func1::Const(1.0),
            v2: Func1::Const(1.0),
            u_range: (0.5, 3.0),
            v_range: (0.2, 2.0),
        };
        let chart = liouville_chart(spec).unwrap();
        let c = ConvexCurve::new(
            chart,
            Shape::CoordinateLine {
                axis: 1,
                value: 1.0,
            },
            Some((1.0, 2.0)),
        )
        .unwrap();
        // κ_g of v = const in E du² + G dv² is −E_v / (2 E √G) for +u direction
        let (u, v): (f64, f64) = (1.3, 1.0);
        let e = u + v * v;
        let expected = (2.0 * v) / (2.0 * e * e.sqrt());
        let t = if c.is_reversed() { 1.0 + 2.0 - u } else { u };
        assert!((c.curvature(t).unwrap() - expected).abs() < 1e-12);
        assert!(c.is_reversed());
    }

    #[test]
    fn projection_recovers_foot_point() {
        let c = ConvexCurve::ellipse(euclidean_cartesian(), [0.5, 0.0], [2.0, 1.0]).unwrap();
        let q = c.point(0.2);
        let n = c.inward_normal(0.2);
        let p = [q[0] - 0.01 * n[0], q[1] - 0.01 * n[1]];
        let (t, d) = c.project(p, None);
        assert!((t - 0.2).abs() < 1e-12);
        assert!((d + 0.01).abs() < 1e-12);
        assert!((c.distance_to(p) - 0.01).abs() < 1e-12);
    }
}
