//! Intersection of the tangent geodesics of a convex curve at two points.

use super::{shoot, GeodesicState};
use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::metric::Point;

#[derive(Debug, Clone, Copy)]
pub struct TangentOptions {
    /// Largest accepted tangent length (trust region).
    pub max_length: f64,
    /// Gap tolerance in chart coordinates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TangentOptions {
    fn default() -> Self {
        TangentOptions {
            max_length: f64::INFINITY,
            tol: 1e-13,
            max_iter: 40,
        }
    }
}

/// The point `C` where the forward tangent geodesic at `A` meets the backward
/// tangent geodesic at `B`, with the two tangent lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency {
    pub c: Point,
    /// `|AC|`.
    pub len_a: f64,
    /// `|BC|`.
    pub len_b: f64,
    /// Unit velocity at `C` of the geodesic coming from `A`.
    pub vel_a: [f64; 2],
    /// Unit velocity at `C` of the geodesic leaving towards `B`.
    pub vel_b: [f64; 2],
    pub gap: f64,
}

pub fn tangent_intersection(curve: &ConvexCurve, ta: f64, tb: f64) -> Result<Tangency> {
    tangent_intersection_with(curve, ta, tb, None, &TangentOptions::default())
}

/// As [`tangent_intersection`], optionally seeded with tangent lengths.
pub fn tangent_intersection_with(
    curve: &ConvexCurve,
    ta: f64,
    tb: f64,
    seed: Option<(f64, f64)>,
    opts: &TangentOptions,
) -> Result<Tangency> {
    let chart = &curve.chart;
    let ca = curve.eval(ta);
    let cb = curve.eval(tb);
    let ua = curve.unit_tangent(ta);
    let ub = curve.unit_tangent(tb);
    if ta == tb {
        return Ok(Tangency {
            c: ca.pos,
            len_a: 0.0,
            len_b: 0.0,
            vel_a: ua,
            vel_b: ua,
            gap: 0.0,
        });
    }
    let start_a = GeodesicState::new(ca.pos, ua);
    let start_b = GeodesicState::new(cb.pos, [-ub[0], -ub[1]]);
    let (mut la, mut lb) =
        seed.unwrap_or_else(|| chart_seed(curve, ta, tb, ca.pos, cb.pos, ua, ub));
    let scale = (cb.pos[0] - ca.pos[0]).hypot(cb.pos[1] - ca.pos[1]);
    let eval = |la: f64, lb: f64| -> Result<(GeodesicState, GeodesicState, [f64; 2])> {
        let ea = shoot(chart, start_a, la)?;
        let eb = shoot(chart, start_b, lb)?;
        Ok((ea, eb, [ea.pos[0] - eb.pos[0], ea.pos[1] - eb.pos[1]]))
    };
    let (mut ea, mut eb, mut f) = eval(la, lb)?;
    let mut fnorm = f[0].hypot(f[1]);
    for _ in 0..opts.max_iter {
        if fnorm <= opts.tol * (1.0 + scale) {
            break;
        }
        // ∂F/∂la = velocity of the A-branch, ∂F/∂lb = −velocity of the B-branch
        let j = [[ea.vel[0], -eb.vel[0]], [ea.vel[1], -eb.vel[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::TooFar("tangent geodesics are parallel".into()));
        }
        let da = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let db = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut step = 1.0;
        loop {
            let (na, nb) = (la - step * da, lb - step * db);
            if na >= 0.0 && nb >= 0.0 && na <= opts.max_length && nb <= opts.max_length {
                if let Ok((a2, b2, f2)) = eval(na, nb) {
                    let n2 = f2[0].hypot(f2[1]);
                    if n2 < fnorm || step < 1e-3 {
                        la = na;
                        lb = nb;
                        ea = a2;
                        eb = b2;
                        f = f2;
                        fnorm = n2;
                        break;
                    }
                }
            }
            step *= 0.5;
            if step < 1e-6 {
                return Err(Error::TooFar(format!(
                    "no crossing of tangent geodesics in the trust region (gap {fnorm:e})"
                )));
            }
        }
    }
    if !(fnorm <= 1e3 * opts.tol * (1.0 + scale)) {
        return Err(Error::TooFar(format!(
            "tangent intersection did not converge (gap {fnorm:e})"
        )));
    }
    Ok(Tangency {
        c: [0.5 * (ea.pos[0] + eb.pos[0]), 0.5 * (ea.pos[1] + eb.pos[1])],
        len_a: la,
        len_b: lb,
        vel_a: ea.vel,
        vel_b: [-eb.vel[0], -eb.vel[1]],
        gap: fnorm,
    })
}

/// Seed from the intersection of the chart-straight tangent lines, or half the
/// arc when those are nearly parallel or cross on the wrong side.
fn chart_seed(
    curve: &ConvexCurve,
    ta: f64,
    tb: f64,
    a: Point,
    b: Point,
    ua: [f64; 2],
    ub: [f64; 2],
) -> (f64, f64) {
    let det = ua[0] * ub[1] - ua[1] * ub[0];
    let d = [b[0] - a[0], b[1] - a[1]];
    let norm = (ua[0].hypot(ua[1])) * (ub[0].hypot(ub[1]));
    if det.abs() > 1e-6 * norm {
        // a + s ua = b − t ub
        let s = (d[0] * ub[1] - d[1] * ub[0]) / det;
        let t = (ua[0] * d[1] - ua[1] * d[0]) / det;
        if s > 0.0 && t > 0.0 {
            return (s, t);
        }
    }
    let half = 0.5 * curve.arc_between(ta, tb).abs();
    (half, half)
}
