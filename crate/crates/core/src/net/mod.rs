//! Orthogonal nets: the equal-diagonals (Ivory) property, the covector
//! identities it implies, recovery of the metric from diagonal data, and the
//! classification of planar Liouville nets.

mod classify;

pub use classify::{
    classify_planar_net, ClassifierOptions, ConicQuadric, NetClass, NetClassification, SampledNet,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{connect, shoot_to_event, Connection, GeodesicState};
use crate::metric::{conformal, ConformalPoly, Domain, MetricChart, Point};
use crate::numeric::cheb::Cheb1;

/// Coordinate rectangle `[u1, u2] × [v1, v2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetQuad {
    pub u1: f64,
    pub u2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl NetQuad {
    pub fn new(u1: f64, u2: f64, v1: f64, v2: f64) -> Result<Self> {
        if !(u1 < u2 && v1 < v2) {
            return Err(Error::InvalidParameter(format!(
                "quad bounds must increase: [{u1}, {u2}] x [{v1}, {v2}]"
            )));
        }
        Ok(NetQuad { u1, u2, v1, v2 })
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            [self.u1, self.v1],
            [self.u2, self.v1],
            [self.u2, self.v2],
            [self.u1, self.v2],
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.u1 && p[0] <= self.u2 && p[1] >= self.v1 && p[1] <= self.v2
    }

    fn check(&self, chart: &MetricChart) -> Result<()> {
        for c in self.corners() {
            if !chart.domain.contains(c) {
                return Err(Error::OutsideDomain(c[0], c[1]));
            }
        }
        Ok(())
    }
}

/// The two geodesic diagonals of a quad.
///
/// `plus` runs `(u1, v1) → (u2, v2)` and `minus` runs `(u1, v2) → (u2, v1)`;
/// both carry unit end velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalData {
    pub quad: NetQuad,
    pub plus: Connection,
    pub minus: Connection,
}

impl DiagonalData {
    /// Metric duals of the diagonal velocities at the corners, in the order
    /// of [`NetQuad::corners`]. Each corner has exactly one diagonal
    /// endpoint; the covector is of the velocity pointing along the diagonal.
    pub fn corner_covectors(&self, chart: &MetricChart) -> [[f64; 2]; 4] {
        let low = |s: GeodesicState| chart.tensor(s.pos).lower(s.vel);
        [
            low(self.plus.start),
            low(self.minus.end),
            low(self.plus.end),
            low(self.minus.start),
        ]
    }
}

pub fn diagonals(chart: &MetricChart, quad: NetQuad) -> Result<DiagonalData> {
    quad.check(chart)?;
    let plus = connect(chart, [quad.u1, quad.v1], [quad.u2, quad.v2])?;
    let minus = connect(chart, [quad.u1, quad.v2], [quad.u2, quad.v1])?;
    Ok(DiagonalData { quad, plus, minus })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvoryReport {
    pub l_plus: f64,
    pub l_minus: f64,
    pub defect: f64,
}

/// Lengths of the two geodesic diagonals of a quad and their difference.
pub fn ivory_check(chart: &MetricChart, quad: NetQuad) -> Result<IvoryReport> {
    let d = diagonals(chart, quad)?;
    Ok(IvoryReport {
        l_plus: d.plus.length,
        l_minus: d.minus.length,
        defect: (d.plus.length - d.minus.length).abs(),
    })
}

/// [`ivory_check`] over many quads in parallel; results keep the input order.
pub fn ivory_sweep(chart: &MetricChart, quads: &[NetQuad]) -> Vec<Result<IvoryReport>> {
    quads.par_iter().map(|q| ivory_check(chart, *q)).collect()
}

/// Conformal metric `(1 + 0.1 uv)(du² + dv²)` on `[−2, 2]²`. Its coordinate
/// net is orthogonal but not Liouville, so quads have unequal diagonals.
pub fn non_liouville_control() -> MetricChart {
    conformal(
        ConformalPoly {
            terms: vec![(0, 0, 1.0), (1, 1, 0.1)],
        },
        Domain::new((-2.0, 2.0), (-2.0, 2.0), 1e-6),
    )
    .expect("control metric is positive on its domain")
    // nearly flat: geodesics stay unique well beyond the default radius
    .with_convexity_radius(2.0)
}

/// Cross term of the metric at `p` as seen by the diagonals of the square
/// `[u, u+ε] × [v, v+ε]`: `(L+² − L−²) / (4ε² √(g11 g22))`. Tends to the
/// normalized `g12` as ε → 0, so a chart with equal diagonals everywhere is
/// orthogonal.
pub fn ivory_cross_term(chart: &MetricChart, p: Point, eps: f64) -> Result<f64> {
    let quad = NetQuad::new(p[0], p[0] + eps, p[1], p[1] + eps)?;
    let r = ivory_check(chart, quad)?;
    // evaluate the diagonal metric at the square's centre to cancel the
    // first-order drift of a and c
    let g = chart.tensor([p[0] + 0.5 * eps, p[1] + 0.5 * eps]);
    Ok((r.l_plus * r.l_plus - r.l_minus * r.l_minus) / (4.0 * eps * eps * (g.g11 * g.g22).sqrt()))
}

/// Residuals of the corner covector identities implied by equal diagonals on
/// all nearby quads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstVariation {
    /// `|⟨γ̇+(L), ∂u⟩ − ⟨γ̇−(L), ∂u⟩|` on the side `u = u2`.
    pub u_residual: f64,
    /// `|⟨γ̇+(L), ∂v⟩ + ⟨γ̇−(0), ∂v⟩|` on the side `v = v2`.
    pub v_residual: f64,
    /// Largest diagonal-length defect over the 3×3 stencil of quads with
    /// perturbed far sides.
    pub stencil_defect: f64,
    /// Stencil defect was below the trust threshold, so the residuals test
    /// the identities rather than a failure of their hypothesis.
    pub trusted: bool,
    /// Largest discrepancy between the covector components and difference
    /// quotients of the diagonal lengths when a side is moved.
    pub variation_check: f64,
}

/// Stencil defect above which first-variation residuals are flagged.
pub const STENCIL_TOL: f64 = 1e-6;

pub fn first_variation_check(chart: &MetricChart, quad: NetQuad) -> Result<FirstVariation> {
    let d = diagonals(chart, quad)?;
    let (du, dv) = (quad.u2 - quad.u1, quad.v2 - quad.v1);

    let mut stencil_defect: f64 = 0.0;
    for i in -1..=1 {
        for j in -1..=1 {
            let q = NetQuad::new(
                quad.u1,
                quad.u2 + 0.05 * du * i as f64,
                quad.v1,
                quad.v2 + 0.05 * dv * j as f64,
            )?;
            stencil_defect = stencil_defect.max(ivory_check(chart, q)?.defect);
        }
    }

    let co = d.corner_covectors(chart);
    // corners: 1 = (u2, v1) holds γ−(L), 2 = (u2, v2) holds γ+(L), 3 = (u1, v2) holds γ−(0)
    let u_residual = (co[2][0] - co[1][0]).abs();
    let v_residual = (co[2][1] + co[3][1]).abs();

    // independent check: move the far sides and difference the lengths
    let h = 1e-4 * du.min(dv);
    let len = |a: Point, b: Point| -> Result<f64> { Ok(connect(chart, a, b)?.length) };
    let (u1, u2, v1, v2) = (quad.u1, quad.u2, quad.v1, quad.v2);
    let dplus_u = (len([u1, v1], [u2 + h, v2])? - len([u1, v1], [u2 - h, v2])?) / (2.0 * h);
    let dminus_u = (len([u1, v2], [u2 + h, v1])? - len([u1, v2], [u2 - h, v1])?) / (2.0 * h);
    let dplus_v = (len([u1, v1], [u2, v2 + h])? - len([u1, v1], [u2, v2 - h])?) / (2.0 * h);
    // moving the v = v2 side moves the start of γ−, against its velocity
    let dminus_v = (len([u1, v2 + h], [u2, v1])? - len([u1, v2 - h], [u2, v1])?) / (2.0 * h);
    let variation_check = [
        (dplus_u - co[2][0]).abs(),
        (dminus_u - co[1][0]).abs(),
        (dplus_v - co[2][1]).abs(),
        (dminus_v + co[3][1]).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    Ok(FirstVariation {
        u_residual,
        v_residual,
        stencil_defect,
        trusted: stencil_defect <= STENCIL_TOL,
        variation_check,
    })
}

/// The forms `η± = φ(u) du ± ψ(v) dv` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaForms {
    pub phi: f64,
    pub psi: f64,
    pub plus: [f64; 2],
    pub minus: [f64; 2],
    pub norm_plus: f64,
    pub norm_minus: f64,
}

/// State of `γ+` where its coordinate `k` reaches `value`.
fn diagonal_crossing(
    chart: &MetricChart,
    diag: &DiagonalData,
    k: usize,
    value: f64,
) -> Result<GeodesicState> {
    let (lo, hi) = if k == 0 {
        (diag.quad.u1, diag.quad.u2)
    } else {
        (diag.quad.v1, diag.quad.v2)
    };
    let slack = 1e-12 * (hi - lo);
    if value < lo - slack || value > hi + slack {
        return Err(Error::Geometry(format!(
            "coordinate line {value} misses the diagonal of [{lo}, {hi}]"
        )));
    }
    if value <= lo + slack {
        return Ok(diag.plus.start);
    }
    if value >= hi - slack {
        return Ok(diag.plus.end);
    }
    let len = diag.plus.length;
    shoot_to_event(chart, diag.plus.start, 1.01 * len, 0.125 * len, |p| {
        p[k] - value
    })?
    .map(|(_, s)| s)
    .ok_or_else(|| Error::Geometry("diagonal never crosses the coordinate line".into()))
}

/// `φ(u)`: du-component of the dual of `γ̇+` where `γ+` crosses `u`.
pub fn eta_phi(chart: &MetricChart, diag: &DiagonalData, u: f64) -> Result<f64> {
    let s = diagonal_crossing(chart, diag, 0, u)?;
    Ok(chart.tensor(s.pos).lower(s.vel)[0])
}

/// `ψ(v)`: dv-component of the dual of `γ̇+` where `γ+` crosses `v`.
pub fn eta_psi(chart: &MetricChart, diag: &DiagonalData, v: f64) -> Result<f64> {
    let s = diagonal_crossing(chart, diag, 1, v)?;
    Ok(chart.tensor(s.pos).lower(s.vel)[1])
}

fn assemble(chart: &MetricChart, p: Point, phi: f64, psi: f64) -> EtaForms {
    let ginv = chart.tensor(p).inverse();
    let plus = [phi, psi];
    let minus = [phi, -psi];
    EtaForms {
        phi,
        psi,
        plus,
        minus,
        norm_plus: ginv.norm(plus),
        norm_minus: ginv.norm(minus),
    }
}

/// `η±` at `point`, from the diagonal `γ+` of `diag`'s quad.
pub fn eta_at(chart: &MetricChart, diag: &DiagonalData, point: Point) -> Result<EtaForms> {
    if !diag.quad.contains(point) {
        return Err(Error::Geometry(format!(
            "point ({}, {}) is outside the quad",
            point[0], point[1]
        )));
    }
    let phi = eta_phi(chart, diag, point[0])?;
    let psi = eta_psi(chart, diag, point[1])?;
    Ok(assemble(chart, point, phi, psi))
}

pub fn eta_forms(chart: &MetricChart, quad: NetQuad, point: Point) -> Result<EtaForms> {
    eta_at(chart, &diagonals(chart, quad)?, point)
}

/// `φ` and `ψ` of one diagonal tabulated for evaluating `η±` and their
/// potentials everywhere in the quad.
///
/// The squares `φ²`, `ψ²` are interpolated: `φ` itself behaves like a square
/// root where the diagonal nearly touches a coordinate line, which spoils
/// polynomial interpolation, while `φ²` stays smooth.
#[derive(Debug, Clone)]
pub struct EtaField {
    pub quad: NetQuad,
    pub phi2: Cheb1,
    pub psi2: Cheb1,
    f: Cheb1,
    g: Cheb1,
}

impl EtaField {
    pub fn new(chart: &MetricChart, diag: &DiagonalData, nodes: usize) -> Result<Self> {
        let q = diag.quad;
        let sample = |k: usize, lo: f64, hi: f64| -> Result<Vec<f64>> {
            let pts = crate::numeric::cheb::lobatto_points(lo, hi, nodes);
            let vals = pts
                .iter()
                .map(|&x| {
                    let s = diagonal_crossing(chart, diag, k, x)?;
                    // a diagonal may overshoot a side near a corner; the
                    // square is the same on either crossing
                    Ok(chart.tensor(s.pos).lower(s.vel)[k].abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(vals)
        };
        let phi = sample(0, q.u1, q.u2)?;
        let psi = sample(1, q.v1, q.v2)?;
        let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
        // potentials vanish at the quad's first corner
        let f = Cheb1::from_values(q.u1, q.u2, &phi).integral(q.u1);
        let g = Cheb1::from_values(q.v1, q.v2, &psi).integral(q.v1);
        Ok(EtaField {
            quad: q,
            phi2: Cheb1::from_values(q.u1, q.u2, &sq(&phi)),
            psi2: Cheb1::from_values(q.v1, q.v2, &sq(&psi)),
            f,
            g,
        })
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.phi2.eval(u).max(0.0).sqrt()
    }

    pub fn psi(&self, v: f64) -> f64 {
        self.psi2.eval(v).max(0.0).sqrt()
    }

    /// `η+` for `sign = 1`, `η−` for `sign = −1`.
    pub fn covector(&self, p: Point, sign: f64) -> [f64; 2] {
        [self.phi(p[0]), sign * self.psi(p[1])]
    }

    /// `f(u) ± g(v)` with `df = φ du`, `dg = ψ dv`.
    pub fn potential(&self, p: Point, sign: f64) -> f64 {
        self.f.eval(p[0]) + sign * self.g.eval(p[1])
    }

    pub fn gradient(&self, chart: &MetricChart, p: Point, sign: f64) -> [f64; 2] {
        chart.tensor(p).raise(self.covector(p, sign))
    }

    /// Geodesic curvature at `p` of the integral curve of the gradient of
    /// `f ± g`.
    pub fn integral_curvature(&self, chart: &MetricChart, p: Point, sign: f64) -> Result<f64> {
        let x = self.gradient(chart, p, sign);
        let span = (self.quad.u2 - self.quad.u1).min(self.quad.v2 - self.quad.v1);
        let h = 1e-5 * span;
        let at = |t: f64| self.gradient(chart, [p[0] + t * x[0], p[1] + t * x[1]], sign);
        let (a, b) = (at(h), at(-h));
        let acc = [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)];
        crate::curve::curvature_of(chart, p, x, acc).ok_or(Error::ZeroSpeed(0.0))
    }
}

/// Metric coefficients recovered from the η data of two quads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvorySample {
    pub point: Point,
    pub a: f64,
    pub b: f64,
    pub a_chart: f64,
    pub b_chart: f64,
    /// `|a − (U/(Ũ−U) − V/(Ṽ−V))(Ũ−U)|`, and likewise for `b`, relative.
    pub factorization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvoryLiouville {
    pub samples: Vec<IvorySample>,
    /// Largest relative deviation of the recovered `a`, `b` from the chart.
    pub max_deviation: f64,
    pub max_factorization: f64,
}

/// Relative size of `Ṽ − V` (or `Ũ − U`) below which the two diagonal
/// families are treated as having the same aspect ratio.
pub const ASPECT_TOL: f64 = 1e-6;

/// Solves `U/a + V/b = 1`, `Ũ/a + Ṽ/b = 1` at each point, where `U = φ²`,
/// `V = ψ²` come from the `+` diagonal of `first` and `Ũ`, `Ṽ` from that of
/// `second`. The points must lie in both quads.
pub fn liouville_from_ivory(
    chart: &MetricChart,
    first: &DiagonalData,
    second: &DiagonalData,
    points: &[Point],
) -> Result<IvoryLiouville> {
    let samples = points
        .par_iter()
        .map(|&p| -> Result<IvorySample> {
            let e1 = eta_at(chart, first, p)?;
            let e2 = eta_at(chart, second, p)?;
            let (u, v) = (e1.phi * e1.phi, e1.psi * e1.psi);
            let (ut, vt) = (e2.phi * e2.phi, e2.psi * e2.psi);
            if (vt - v).abs() < ASPECT_TOL * v.max(vt) || (ut - u).abs() < ASPECT_TOL * u.max(ut) {
                return Err(Error::AspectRatiosTooClose(format!(
                    "U = {u:e}, Ũ = {ut:e}, V = {v:e}, Ṽ = {vt:e} at ({}, {})",
                    p[0], p[1]
                )));
            }
            let det = u * vt - v * ut;
            let a = det / (vt - v);
            let b = det / (u - ut);
            let common = u / (ut - u) - v / (vt - v);
            let fa = common * (ut - u);
            let fb = common * (v - vt);
            let g = chart.tensor(p);
            Ok(IvorySample {
                point: p,
                a,
                b,
                a_chart: g.g11,
                b_chart: g.g22,
                factorization: ((a - fa) / a).abs().max(((b - fb) / b).abs()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = samples
        .iter()
        .map(|s| {
            ((s.a - s.a_chart) / s.a_chart)
                .abs()
                .max(((s.b - s.b_chart) / s.b_chart).abs())
        })
        .fold(0.0, f64::max);
    let max_factorization = samples.iter().map(|s| s.factorization).fold(0.0, f64::max);
    Ok(IvoryLiouville {
        samples,
        max_deviation,
        max_factorization,
    })
}
