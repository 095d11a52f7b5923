use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use super::elliptic::EllipticCoordSpec;
use super::func::Func1;
use super::spec::ChartSpec;
use crate::error::{Error, Result};
use crate::numeric::cheb::Cheb2;

/// A point in chart coordinates `(u, v)`.
pub type Point = [f64; 2];

/// Symmetric 2×2 metric tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl MetricTensor {
    pub const EUCLIDEAN: MetricTensor = MetricTensor {
        g11: 1.0,
        g12: 0.0,
        g22: 1.0,
    };

    pub fn diagonal(g11: f64, g22: f64) -> Self {
        MetricTensor { g11, g12: 0.0, g22 }
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g11 > 0.0 && self.g22 > 0.0 && self.det() > 0.0
    }

    /// Components of the inverse metric `g^{ij}`.
    #[inline]
    pub fn inverse(&self) -> MetricTensor {
        let d = self.det();
        MetricTensor {
            g11: self.g22 / d,
            g12: -self.g12 / d,
            g22: self.g11 / d,
        }
    }

    #[inline]
    pub fn dot(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.g11 * a[0] * b[0] + self.g12 * (a[0] * b[1] + a[1] * b[0]) + self.g22 * a[1] * b[1]
    }

    #[inline]
    pub fn norm(&self, a: [f64; 2]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }

    /// Metric dual: vector → covector.
    #[inline]
    pub fn lower(&self, a: [f64; 2]) -> [f64; 2] {
        [
            self.g11 * a[0] + self.g12 * a[1],
            self.g12 * a[0] + self.g22 * a[1],
        ]
    }

    /// Covector → vector.
    #[inline]
    pub fn raise(&self, w: [f64; 2]) -> [f64; 2] {
        self.inverse().lower(w)
    }

    /// Rotation by +90° in the metric: the left unit normal of a unit vector.
    #[inline]
    pub fn rotate(&self, t: [f64; 2]) -> [f64; 2] {
        let s = self.det().sqrt();
        [
            -(self.g12 * t[0] + self.g22 * t[1]) / s,
            (self.g11 * t[0] + self.g12 * t[1]) / s,
        ]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.g11,
            (1, 1) => self.g22,
            _ => self.g12,
        }
    }
}

/// Metric together with its first partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: MetricTensor,
    pub du: MetricTensor,
    pub dv: MetricTensor,
}

/// Levi-Civita connection coefficients; `gamma[k][i][j] = Γ^k_{ij}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    pub gamma: [[[f64; 2]; 2]; 2],
}

impl Christoffel {
    pub fn from_jet(jet: &MetricJet) -> Self {
        let ginv = jet.g.inverse();
        let d = [jet.du, jet.dv];
        // first kind: [ij, l] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let mut first = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    first[l][i][j] = 0.5 * (d[i].entry(j, l) + d[j].entry(i, l) - d[l].entry(i, j));
                }
            }
        }
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    gamma[k][i][j] =
                        ginv.entry(k, 0) * first[0][i][j] + ginv.entry(k, 1) * first[1][i][j];
                }
            }
        }
        Christoffel { gamma }
    }

    /// `Γ^k_{ij} a^i b^j`.
    #[inline]
    pub fn contract(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            let g = &self.gamma[k];
            *o = g[0][0] * a[0] * b[0]
                + g[0][1] * a[0] * b[1]
                + g[1][0] * a[1] * b[0]
                + g[1][1] * a[1] * b[1];
        }
        out
    }
}

/// Open coordinate rectangle with a safety margin that solvers may not cross.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    #[serde(default)]
    pub margin: f64,
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64), margin: f64) -> Self {
        Domain { u, v, margin }
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] > self.u.0 && p[0] < self.u.1 && p[1] > self.v.0 && p[1] < self.v.1
    }

    pub fn contains_with_margin(&self, p: Point) -> bool {
        let m = self.margin;
        p[0] >= self.u.0 + m && p[0] <= self.u.1 - m && p[1] >= self.v.0 + m && p[1] <= self.v.1 - m
    }

    pub fn min_span(&self) -> f64 {
        (self.u.1 - self.u.0).min(self.v.1 - self.v.0)
    }

    pub fn max_span(&self) -> f64 {
        (self.u.1 - self.u.0).max(self.v.1 - self.v.0)
    }

    pub fn grid(&self, n: usize) -> impl Iterator<Item = Point> + '_ {
        let m = self.margin.max(1e-9 * self.max_span());
        let (u0, u1) = (self.u.0 + m, self.u.1 - m);
        let (v0, v1) = (self.v.0 + m, self.v.1 - m);
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                [
                    u0 + (u1 - u0) * i as f64 / (n - 1) as f64,
                    v0 + (v1 - v0) * j as f64 / (n - 1) as f64,
                ]
            })
        })
    }
}

/// Liouville metric `(U1(u) − V1(v)) (U2(u) du² + V2(v) dv²)`.
#[derive(Debug, Clone)]
pub struct LiouvilleSpec {
    pub u1: Func1,
    pub v1: Func1,
    pub u2: Func1,
    pub v2: Func1,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
}

impl LiouvilleSpec {
    /// The Euclidean metric written in elliptic coordinates `(λ, μ)`.
    pub fn elliptic(a: f64, b: f64) -> Self {
        LiouvilleSpec {
            u1: Func1::Poly(vec![0.0, 1.0]),
            v1: Func1::Poly(vec![0.0, 1.0]),
            u2: Func1::closure(move |l| {
                let p = (a + l) * (b + l);
                (1.0 / (4.0 * p), -(2.0 * l + a + b) / (4.0 * p * p))
            }),
            v2: Func1::closure(move |m| {
                let q = (a + m) * (b + m);
                (-1.0 / (4.0 * q), (2.0 * m + a + b) / (4.0 * q * q))
            }),
            u_range: (-b, 10.0 * a),
            v_range: (-a, -b),
        }
    }

    fn jet(&self, p: Point) -> MetricJet {
        let (u1, du1) = self.u1.eval2(p[0]);
        let (v1, dv1) = self.v1.eval2(p[1]);
        let (u2, du2) = self.u2.eval2(p[0]);
        let (v2, dv2) = self.v2.eval2(p[1]);
        let w = u1 - v1;
        MetricJet {
            g: MetricTensor::diagonal(w * u2, w * v2),
            du: MetricTensor::diagonal(du1 * u2 + w * du2, du1 * v2),
            dv: MetricTensor::diagonal(-dv1 * u2, -dv1 * v2 + w * dv2),
        }
    }
}

/// Conformal factor given as a polynomial `Σ c · u^i v^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalPoly {
    pub terms: Vec<(u32, u32, f64)>,
}

impl ConformalPoly {
    fn eval3(&self, p: Point) -> (f64, f64, f64) {
        let (mut f, mut fu, mut fv) = (0.0, 0.0, 0.0);
        for &(i, j, c) in &self.terms {
            let ui = p[0].powi(i as i32);
            let vj = p[1].powi(j as i32);
            f += c * ui * vj;
            if i > 0 {
                fu += c * i as f64 * p[0].powi(i as i32 - 1) * vj;
            }
            if j > 0 {
                fv += c * j as f64 * ui * p[1].powi(j as i32 - 1);
            }
        }
        (f, fu, fv)
    }
}

/// Metric coefficients given by tensor Chebyshev interpolants.
#[derive(Debug, Clone)]
pub struct TabulatedMetric {
    pub g11: Cheb2,
    pub g12: Cheb2,
    pub g22: Cheb2,
    d: [Cheb2; 6],
}

impl TabulatedMetric {
    pub fn new(g11: Cheb2, g12: Cheb2, g22: Cheb2) -> Self {
        let d = [g11.dx(), g11.dy(), g12.dx(), g12.dy(), g22.dx(), g22.dy()];
        TabulatedMetric { g11, g12, g22, d }
    }

    fn jet(&self, p: Point) -> MetricJet {
        let (x, y) = (p[0], p[1]);
        MetricJet {
            g: MetricTensor {
                g11: self.g11.eval(x, y),
                g12: self.g12.eval(x, y),
                g22: self.g22.eval(x, y),
            },
            du: MetricTensor {
                g11: self.d[0].eval(x, y),
                g12: self.d[2].eval(x, y),
                g22: self.d[4].eval(x, y),
            },
            dv: MetricTensor {
                g11: self.d[1].eval(x, y),
                g12: self.d[3].eval(x, y),
                g22: self.d[5].eval(x, y),
            },
        }
    }
}

pub type MetricFn = Arc<dyn Fn(Point) -> MetricTensor + Send + Sync>;

#[derive(Clone)]
pub enum ChartKind {
    Cartesian,
    /// `(r, φ)` with `dr² + r² dφ²`.
    Polar,
    Elliptic(EllipticCoordSpec),
    /// Parabolic coordinates `x = a(u² − v²)/2, y = a u v`.
    Parabolic {
        a: f64,
    },
    Liouville(Arc<LiouvilleSpec>),
    Conformal(ConformalPoly),
    Tabulated(Arc<TabulatedMetric>),
    /// Coefficients only; derivatives by Richardson-extrapolated differences.
    Numeric(MetricFn),
}

impl fmt::Debug for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Cartesian => write!(f, "Cartesian"),
            ChartKind::Polar => write!(f, "Polar"),
            ChartKind::Elliptic(e) => write!(f, "Elliptic({e:?})"),
            ChartKind::Parabolic { a } => write!(f, "Parabolic({a})"),
            ChartKind::Liouville(_) => write!(f, "Liouville"),
            ChartKind::Conformal(c) => write!(f, "Conformal({c:?})"),
            ChartKind::Tabulated(_) => write!(f, "Tabulated"),
            ChartKind::Numeric(_) => write!(f, "Numeric"),
        }
    }
}

/// A coordinate chart carrying a Riemannian metric.
///
/// Immutable after construction and cheap to clone.
#[derive(Debug, Clone)]
pub struct MetricChart {
    pub kind: ChartKind,
    pub domain: Domain,
    /// Largest chart-coordinate separation for which two-point geodesic
    /// problems are accepted.
    pub convexity_radius: f64,
    /// Step for finite-difference metric derivatives.
    pub fd_step: f64,
    /// The serializable description this chart was built from, if any.
    pub spec: Option<ChartSpec>,
}

impl MetricChart {
    pub fn new(kind: ChartKind, domain: Domain) -> Self {
        MetricChart {
            kind,
            convexity_radius: 0.2 * domain.min_span(),
            fd_step: 1e-5 * domain.max_span(),
            domain,
            spec: None,
        }
    }

    pub fn with_convexity_radius(mut self, r: f64) -> Self {
        self.convexity_radius = r;
        self
    }

    pub fn with_margin(mut self, m: f64) -> Self {
        self.domain.margin = m;
        self
    }

    pub fn with_spec(mut self, spec: ChartSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    /// Metric coefficients without domain checks.
    #[inline]
    pub fn tensor(&self, p: Point) -> MetricTensor {
        match &self.kind {
            ChartKind::Cartesian => MetricTensor::EUCLIDEAN,
            ChartKind::Polar => MetricTensor::diagonal(1.0, p[0] * p[0]),
            ChartKind::Numeric(f) => f(p),
            _ => self.jet(p).g,
        }
    }

    /// Metric coefficients and their first derivatives, without domain checks.
    pub fn jet(&self, p: Point) -> MetricJet {
        let zero = MetricTensor {
            g11: 0.0,
            g12: 0.0,
            g22: 0.0,
        };
        match &self.kind {
            ChartKind::Cartesian => MetricJet {
                g: MetricTensor::EUCLIDEAN,
                du: zero,
                dv: zero,
            },
            ChartKind::Polar => MetricJet {
                g: MetricTensor::diagonal(1.0, p[0] * p[0]),
                du: MetricTensor::diagonal(0.0, 2.0 * p[0]),
                dv: zero,
            },
            ChartKind::Elliptic(e) => {
                let (a, b) = (e.a, e.b);
                let (l, m) = (p[0], p[1]);
                let pp = (a + l) * (b + l);
                let q = (a + m) * (b + m);
                let w = l - m;
                MetricJet {
                    g: MetricTensor::diagonal(w / (4.0 * pp), -w / (4.0 * q)),
                    du: MetricTensor::diagonal(
                        1.0 / (4.0 * pp) - w * (2.0 * l + a + b) / (4.0 * pp * pp),
                        -1.0 / (4.0 * q),
                    ),
                    dv: MetricTensor::diagonal(
                        -1.0 / (4.0 * pp),
                        1.0 / (4.0 * q) + w * (2.0 * m + a + b) / (4.0 * q * q),
                    ),
                }
            }
            ChartKind::Parabolic { a } => {
                let s = a * a;
                let f = s * (p[0] * p[0] + p[1] * p[1]);
                MetricJet {
                    g: MetricTensor::diagonal(f, f),
                    du: MetricTensor::diagonal(2.0 * s * p[0], 2.0 * s * p[0]),
                    dv: MetricTensor::diagonal(2.0 * s * p[1], 2.0 * s * p[1]),
                }
            }
            ChartKind::Liouville(spec) => spec.jet(p),
            ChartKind::Conformal(c) => {
                let (f, fu, fv) = c.eval3(p);
                MetricJet {
                    g: MetricTensor::diagonal(f, f),
                    du: MetricTensor::diagonal(fu, fu),
                    dv: MetricTensor::diagonal(fv, fv),
                }
            }
            ChartKind::Tabulated(t) => t.jet(p),
            ChartKind::Numeric(f) => {
                let h = self.fd_step;
                let d = |dir: [f64; 2], h: f64| {
                    let plus = f([p[0] + h * dir[0], p[1] + h * dir[1]]);
                    let minus = f([p[0] - h * dir[0], p[1] - h * dir[1]]);
                    [
                        (plus.g11 - minus.g11) / (2.0 * h),
                        (plus.g12 - minus.g12) / (2.0 * h),
                        (plus.g22 - minus.g22) / (2.0 * h),
                    ]
                };
                let rich = |dir: [f64; 2]| {
                    let c = d(dir, h);
                    let f2 = d(dir, 0.5 * h);
                    MetricTensor {
                        g11: (4.0 * f2[0] - c[0]) / 3.0,
                        g12: (4.0 * f2[1] - c[1]) / 3.0,
                        g22: (4.0 * f2[2] - c[2]) / 3.0,
                    }
                };
                MetricJet {
                    g: f(p),
                    du: rich([1.0, 0.0]),
                    dv: rich([0.0, 1.0]),
                }
            }
        }
    }

    /// Checked metric evaluation.
    pub fn eval_metric(&self, p: Point) -> Result<MetricTensor> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain(p[0], p[1]));
        }
        let g = self.tensor(p);
        if !g.is_positive_definite() {
            return Err(Error::NotPositiveDefinite {
                u: p[0],
                v: p[1],
                g11: g.g11,
                g12: g.g12,
                g22: g.g22,
            });
        }
        Ok(g)
    }

    /// Checked Christoffel symbols.
    pub fn christoffel(&self, p: Point) -> Result<Christoffel> {
        let g = self.eval_metric(p)?;
        let scale = g.g11.abs().max(g.g22.abs());
        if g.det() <= 1e-14 * scale * scale {
            return Err(Error::Conditioning(p[0], p[1]));
        }
        Ok(Christoffel::from_jet(&self.jet(p)))
    }

    /// Geodesic acceleration `−Γ^k_{ij} v^i v^j` (unchecked, hot path).
    #[inline]
    pub fn geodesic_accel(&self, p: Point, v: [f64; 2]) -> [f64; 2] {
        match self.kind {
            ChartKind::Cartesian => [0.0, 0.0],
            _ => {
                let c = Christoffel::from_jet(&self.jet(p)).contract(v, v);
                [-c[0], -c[1]]
            }
        }
    }

    /// Verify positive-definiteness on an `n × n` grid.
    pub fn validate(&self, n: usize) -> Result<()> {
        for p in self.domain.grid(n) {
            self.eval_metric(p)?;
        }
        Ok(())
    }
}

/// Plane with the identity metric.
pub fn euclidean_cartesian() -> MetricChart {
    MetricChart::new(
        ChartKind::Cartesian,
        Domain::new((-10.0, 10.0), (-10.0, 10.0), 1e-6),
    )
    .with_convexity_radius(f64::INFINITY)
}

/// Polar coordinates `(r, φ)` on `r ∈ (0.01, 10)`, `φ ∈ (−π, π)`.
pub fn euclidean_polar() -> MetricChart {
    MetricChart::new(
        ChartKind::Polar,
        Domain::new(
            (0.01, 10.0),
            (-std::f64::consts::PI, std::f64::consts::PI),
            1e-6,
        ),
    )
}

/// Elliptic coordinates `(λ, μ)` of the confocal family with parameters `a > b > 0`.
///
/// The chart covers the open first quadrant; geodesics are straight segments
/// there, so two-point problems are unique at any separation.
pub fn confocal_elliptic(a: f64, b: f64) -> Result<MetricChart> {
    let spec = EllipticCoordSpec::new(a, b)?;
    let eps = 1e-3 * (a - b);
    Ok(MetricChart::new(
        ChartKind::Elliptic(spec),
        Domain::new((-b + eps, -b + 10.0 * a), (-a + eps, -b - eps), 1e-9),
    )
    .with_convexity_radius(f64::INFINITY))
}

/// Parabolic coordinates, the confocal-coaxial parabola net.
pub fn confocal_parabolic(a: f64) -> Result<MetricChart> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "parabolic scale {a} must be positive"
        )));
    }
    Ok(MetricChart::new(
        ChartKind::Parabolic { a },
        Domain::new((0.01, 5.0), (0.01, 5.0), 1e-9),
    )
    .with_convexity_radius(f64::INFINITY))
}

/// Chart for a Liouville specification; positivity is checked on a grid.
pub fn liouville_chart(spec: LiouvilleSpec) -> Result<MetricChart> {
    let domain = Domain::new(spec.u_range, spec.v_range, 1e-6);
    let chart = MetricChart::new(ChartKind::Liouville(Arc::new(spec)), domain);
    chart.validate(41)?;
    Ok(chart)
}

pub fn synthetic_liouville(spec: LiouvilleSpec) -> Result<MetricChart> {
    liouville_chart(spec)
}

/// Conformally flat chart `F(u, v) (du² + dv²)`.
pub fn conformal(poly: ConformalPoly, domain: Domain) -> Result<MetricChart> {
    let chart = MetricChart::new(ChartKind::Conformal(poly), domain);
    chart.validate(41)?;
    Ok(chart)
}

/// Metric with coefficients only (derivatives by finite differences).
pub fn numeric_chart(f: MetricFn, domain: Domain) -> Result<MetricChart> {
    let chart = MetricChart::new(ChartKind::Numeric(f), domain);
    chart.validate(21)?;
    Ok(chart)
}

pub fn eval_metric(chart: &MetricChart, p: Point) -> Result<MetricTensor> {
    chart.eval_metric(p)
}

pub fn christoffel(chart: &MetricChart, p: Point) -> Result<Christoffel> {
    chart.christoffel(p)
}
