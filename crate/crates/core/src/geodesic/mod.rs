//! Geodesics: initial value problems, two-point connections, tangent
//! intersections and curvature of curves.

mod bvp;
mod tangent;

pub use bvp::{connect, connect_with, geodesic_bvp, BvpOptions, Connection};
pub use tangent::{tangent_intersection, tangent_intersection_with, Tangency, TangentOptions};

use std::io::Write;

use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::metric::{ChartKind, MetricChart, Point};
use crate::numeric::ode::{integrate, Flow, OdeOptions};
use crate::numeric::roots::brent_with_values;

/// Position and velocity in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub pos: Point,
    pub vel: [f64; 2],
}

impl GeodesicState {
    pub fn new(pos: Point, vel: [f64; 2]) -> Self {
        GeodesicState { pos, vel }
    }

    fn to_array(self) -> [f64; 4] {
        [self.pos[0], self.pos[1], self.vel[0], self.vel[1]]
    }

    fn from_array(y: &[f64; 4]) -> Self {
        GeodesicState {
            pos: [y[0], y[1]],
            vel: [y[2], y[3]],
        }
    }

    /// Same point with the velocity scaled to unit metric speed.
    pub fn normalized(self, chart: &MetricChart) -> Result<Self> {
        let s = chart.tensor(self.pos).norm(self.vel);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::ZeroSpeed(0.0));
        }
        Ok(GeodesicState {
            pos: self.pos,
            vel: [self.vel[0] / s, self.vel[1] / s],
        })
    }

    pub fn reversed(self) -> Self {
        GeodesicState {
            pos: self.pos,
            vel: [-self.vel[0], -self.vel[1]],
        }
    }
}

/// Unit-speed geodesic samples at the integrator's accepted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub samples: Vec<(f64, GeodesicState)>,
    pub length: f64,
    /// The integration stopped at the chart's safety margin.
    pub exited: bool,
}

impl GeodesicPath {
    pub fn start(&self) -> GeodesicState {
        self.samples[0].1
    }

    pub fn end(&self) -> GeodesicState {
        self.samples[self.samples.len() - 1].1
    }

    /// Rows `arclength,u,v,du,dv`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["arclength", "u", "v", "du", "dv"])?;
        for (s, st) in &self.samples {
            w.write_record(&[
                fmt(*s),
                fmt(st.pos[0]),
                fmt(st.pos[1]),
                fmt(st.vel[0]),
                fmt(st.vel[1]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

/// Integration tolerances used for every geodesic in the crate.
pub fn ode_options() -> OdeOptions {
    OdeOptions::default()
}

#[inline]
fn rhs(chart: &MetricChart) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    move |_, y| {
        let a = chart.geodesic_accel([y[0], y[1]], [y[2], y[3]]);
        [y[2], y[3], a[0], a[1]]
    }
}

fn options_for(chart: &MetricChart, length: f64, h_max: f64) -> OdeOptions {
    let mut o = ode_options();
    o.h_max = h_max;
    if matches!(chart.kind, ChartKind::Cartesian) {
        // straight lines are integrated exactly; take the whole span at once
        o.h_init = Some(length.min(h_max));
    }
    o
}

/// Integrate the unit-speed geodesic through `state` for metric length `length`.
///
/// The direction is normalized first. If the chart's safety margin is hit the
/// returned path is truncated there and flagged.
pub fn geodesic_ivp(
    chart: &MetricChart,
    state: GeodesicState,
    length: f64,
) -> Result<GeodesicPath> {
    if !(length >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative length {length}")));
    }
    chart.eval_metric(state.pos)?;
    let st = state.normalized(chart)?;
    let mut samples = vec![(0.0, st)];
    let mut exited = false;
    let span = chart.domain.min_span();
    let opts = options_for(chart, length, 0.1 * span);
    integrate(rhs(chart), 0.0, st.to_array(), length, &opts, |t, y| {
        if !chart.domain.contains_with_margin([y[0], y[1]]) {
            exited = true;
            return Flow::Stop;
        }
        samples.push((t, GeodesicState::from_array(y)));
        Flow::Continue
    })?;
    let length = samples.last().map(|s| s.0).unwrap_or(0.0);
    Ok(GeodesicPath {
        samples,
        length,
        exited,
    })
}

/// Endpoint of the geodesic with the given (unit) initial state after `length`.
///
/// Leaving the chart margin is an error here.
pub fn shoot(chart: &MetricChart, state: GeodesicState, length: f64) -> Result<GeodesicState> {
    if length == 0.0 {
        return Ok(state);
    }
    if length < 0.0 {
        return shoot(chart, state.reversed(), -length).map(GeodesicState::reversed);
    }
    let mut exit = None;
    let opts = options_for(chart, length, f64::INFINITY);
    let out = integrate(rhs(chart), 0.0, state.to_array(), length, &opts, |t, y| {
        if !chart.domain.contains_with_margin([y[0], y[1]]) {
            exit = Some(t);
            return Flow::Stop;
        }
        Flow::Continue
    })?;
    if let Some(t) = exit {
        return Err(Error::DomainExit(t));
    }
    Ok(GeodesicState::from_array(&out.y))
}

/// First point along the geodesic where `event` changes sign from negative to
/// non-negative, within `max_length`.
///
/// A start point lying exactly on the event surface counts as not yet crossed.
/// Returns the arc length and state there, or `None` if no crossing occurs.
pub fn shoot_to_event<E>(
    chart: &MetricChart,
    state: GeodesicState,
    max_length: f64,
    h_max: f64,
    mut event: E,
) -> Result<Option<(f64, GeodesicState)>>
where
    E: FnMut(Point) -> f64,
{
    // A start on or a rounding error past the surface (a bounce point landing
    // just outside its table) would bracket the whole first step, and that
    // step can span a short chord. Step off first and search from there.
    let mut offset = 0.0;
    let mut start = state;
    let mut e_start = event(state.pos);
    if e_start >= 0.0 {
        let d = (1e-6 * max_length).min(h_max);
        let moved = shoot_unchecked(chart, state, d)?;
        let e = event(moved.pos);
        if e < 0.0 {
            (offset, start, e_start) = (d, moved, e);
        }
    }
    let mut prev_t = 0.0;
    let mut prev_y = start.to_array();
    let mut prev_e = e_start.min(-f64::MIN_POSITIVE);
    let mut bracket = None;
    let mut exit = None;
    let opts = options_for(chart, max_length - offset, h_max);
    integrate(
        rhs(chart),
        0.0,
        prev_y,
        max_length - offset,
        &opts,
        |t, y| {
            let e = event([y[0], y[1]]);
            if prev_e < 0.0 && e >= 0.0 {
                bracket = Some((prev_t, prev_y, t, prev_e, e));
                return Flow::Stop;
            }
            if !chart.domain.contains_with_margin([y[0], y[1]]) {
                exit = Some(t);
                return Flow::Stop;
            }
            prev_t = t;
            prev_y = *y;
            prev_e = e;
            Flow::Continue
        },
    )?;
    let Some((t0, y0, t1, e0, e1)) = bracket else {
        return match exit {
            Some(t) => Err(Error::DomainExit(offset + t)),
            None => Ok(None),
        };
    };
    let base = GeodesicState::from_array(&y0);
    let mut f = |d: f64| -> Result<f64> { Ok(event(shoot_unchecked(chart, base, d)?.pos)) };
    let span = t1 - t0;
    let d = brent_with_values(&mut f, 0.0, e0, span, e1, 1e-15 * (1.0 + t1), 200)?;
    let st = shoot_unchecked(chart, base, d)?;
    Ok(Some((offset + t0 + d, st)))
}

/// Like [`shoot`] but ignores the margin (short re-integrations inside a step
/// already accepted by the caller).
fn shoot_unchecked(
    chart: &MetricChart,
    state: GeodesicState,
    length: f64,
) -> Result<GeodesicState> {
    if length <= 0.0 {
        return Ok(state);
    }
    let opts = options_for(chart, length, f64::INFINITY);
    let out = integrate(rhs(chart), 0.0, state.to_array(), length, &opts, |_, _| {
        Flow::Continue
    })?;
    Ok(GeodesicState::from_array(&out.y))
}

/// Signed geodesic curvature of a curve at parameter τ.
pub fn geodesic_curvature(curve: &ConvexCurve, t: f64) -> Result<f64> {
    curve.curvature(t)
}

/// Metric length of the chart-straight segment from `a` to `b`.
pub fn chord_length(chart: &MetricChart, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    crate::numeric::quad::integrate(
        |s| chart.tensor([a[0] + s * d[0], a[1] + s * d[1]]).norm(d),
        0.0,
        1.0,
        2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{
        confocal_elliptic, euclidean_cartesian, euclidean_polar, EllipticCoordSpec,
    };

    #[test]
    fn straight_line_in_plane() {
        let c = euclidean_cartesian();
        let p = geodesic_ivp(&c, GeodesicState::new([0.0, 0.0], [1.0, 0.0]), 1.0).unwrap();
        let e = p.end();
        assert!((e.pos[0] - 1.0).abs() < 1e-15 && e.pos[1].abs() < 1e-15);
        assert!(!p.exited);
    }

    #[test]
    fn polar_clairaut_and_radial_rays() {
        let c = euclidean_polar();
        let p = geodesic_ivp(&c, GeodesicState::new([1.0, 0.3], [1.0, 0.0]), 2.0).unwrap();
        for (_, s) in &p.samples {
            assert!((s.pos[1] - 0.3).abs() < 1e-12);
        }
        let st = GeodesicState::new([2.0, 0.1], [0.3, 0.4]);
        let p = geodesic_ivp(&c, st, 3.0).unwrap();
        let st0 = p.start();
        let j0 = st0.pos[0] * st0.pos[0] * st0.vel[1];
        for (_, s) in &p.samples {
            assert!((s.pos[0] * s.pos[0] * s.vel[1] - j0).abs() < 1e-9);
            let speed = c.tensor(s.pos).norm(s.vel);
            assert!((speed - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn elliptic_chart_geodesics_are_straight() {
        let spec = EllipticCoordSpec::new(2.0, 1.0).unwrap();
        let c = confocal_elliptic(2.0, 1.0).unwrap();
        let p = geodesic_ivp(&c, GeodesicState::new([0.5, -1.5], [1.0, 0.4]), 0.6).unwrap();
        assert!(!p.exited);
        let pts: Vec<(f64, f64)> = p
            .samples
            .iter()
            .map(|(_, s)| spec.to_cartesian(s.pos[0], s.pos[1]).unwrap())
            .collect();
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        let chord = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        assert!((chord - p.length).abs() < 1e-9);
        for q in &pts {
            let cross = ((b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0)) / chord;
            assert!(cross.abs() < 1e-7);
        }
    }

    #[test]
    fn exit_is_flagged() {
        let c = euclidean_polar();
        let p = geodesic_ivp(&c, GeodesicState::new([9.0, 0.0], [1.0, 0.0]), 5.0).unwrap();
        assert!(p.exited);
        assert!(p.length < 1.0 + 1e-9);
        assert!(matches!(
            shoot(&c, GeodesicState::new([9.0, 0.0], [1.0, 0.0]), 5.0),
            Err(Error::DomainExit(_))
        ));
    }

    #[test]
    fn event_location_hits_unit_circle() {
        let c = euclidean_polar();
        // from r=0.5 heading outward at an angle, stop at r = 1
        let st = GeodesicState::new([0.5, 0.0], [0.6, 1.6])
            .normalized(&c)
            .unwrap();
        let (s, end) = shoot_to_event(&c, st, 5.0, 0.5, |p| p[0] - 1.0)
            .unwrap()
            .unwrap();
        assert!((end.pos[0] - 1.0).abs() < 1e-13);
        // planar oracle
        let (x0, y0): (f64, f64) = (0.5, 0.0);
        let (dx, dy): (f64, f64) = (0.6, 0.5 * 1.6);
        let n = (dx * dx + dy * dy).sqrt();
        let (dx, dy) = (dx / n, dy / n);
        let bq = x0 * dx + y0 * dy;
        let t = -bq + (bq * bq - (x0 * x0 + y0 * y0 - 1.0)).sqrt();
        assert!((s - t).abs() < 1e-11);
    }

    #[test]
    fn csv_export() {
        let c = euclidean_cartesian();
        let p = geodesic_ivp(&c, GeodesicState::new([0.0, 0.0], [0.0, 2.0]), 1.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("arclength,u,v,du,dv\n"));
        assert_eq!(text.lines().count(), p.samples.len() + 1);
    }
}
