//! Caustics of the billiard: tangency residuals and periodic orbits.

use super::{bounce, phase_direction, PhasePoint};
use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::geodesic::{shoot, shoot_to_event, GeodesicState};
use crate::metric::Point;
use crate::numeric::roots::{brent, minimize};

/// Signed metric distance to a convex curve, positive outside it.
fn outside_distance(caustic: &ConvexCurve, p: Point) -> f64 {
    let (t, d) = caustic.project(p, None);
    let q = caustic.point(t);
    let m = caustic.chart.tensor(q).norm([p[0] - q[0], p[1] - q[1]]);
    if d > 0.0 {
        -m
    } else {
        m
    }
}

/// Closest approach of the chord leaving the table at (τ, p) to the caustic.
/// Zero for tangency, negative when the chord cuts into the caustic.
fn chord_gap(table: &ConvexCurve, caustic: &ConvexCurve, tau: f64, p: f64) -> Result<f64> {
    let b = bounce(table, tau, p)?;
    let start = GeodesicState::new(table.point(tau), phase_direction(table, tau, p));
    let chart = &table.chart;
    let f = |l: f64| -> Result<f64> { Ok(outside_distance(caustic, shoot(chart, start, l)?.pos)) };
    let (_, gap) = minimize(f, 0.0, b.chord, 1e-10 * b.chord, 200)?;
    Ok(gap)
}

/// Distance from tangency of the chords arriving at and leaving the table at
/// φ; the larger of the two.
pub fn caustic_residual(
    table: &ConvexCurve,
    caustic: &ConvexCurve,
    phi: PhasePoint,
) -> Result<f64> {
    let tau = table.param_at(phi.s);
    let out = chord_gap(table, caustic, tau, phi.p)?;
    // the incoming chord, traversed backwards, leaves at (s, −p)
    let inc = chord_gap(table, caustic, tau, -phi.p)?;
    Ok(out.abs().max(inc.abs()))
}

/// Phase point on the table whose outgoing chord touches the caustic at
/// parameter τ_c, found by running the caustic's tangent geodesic backwards.
/// Returns the table parameter and phase.
pub fn tangent_launch(
    table: &ConvexCurve,
    caustic: &ConvexCurve,
    tau_c: f64,
) -> Result<(f64, PhasePoint)> {
    let q = caustic.point(tau_c);
    if table.inside_level(q, None) <= 0.0 {
        return Err(Error::Geometry("caustic is not inside the table".into()));
    }
    let t = caustic.unit_tangent(tau_c);
    let reach = table.length();
    let (_, arrival) = shoot_to_event(
        &table.chart,
        GeodesicState::new(q, [-t[0], -t[1]]),
        reach,
        0.125 * reach,
        |x| -table.inside_level(x, None),
    )?
    .ok_or_else(|| Error::Geometry("tangent geodesic never reaches the table".into()))?;
    let (tau, _) = table.project(arrival.pos, None);
    let g = table.chart.tensor(arrival.pos);
    let p = g.dot([-arrival.vel[0], -arrival.vel[1]], table.unit_tangent(tau));
    Ok((tau, PhasePoint::new(table.arclength(tau), p)))
}

/// Lifted advance after `n` bounces, in units of the table length, and the
/// phase-space distance between the start and the `n`-th iterate.
fn run(table: &ConvexCurve, tau: f64, p: f64, n: usize) -> Result<(f64, f64)> {
    let ell = table.length();
    let (mut t, mut q) = (tau, p);
    let mut total = 0.0;
    for _ in 0..n {
        let b = bounce(table, t, q)?;
        total += b.advance;
        t = b.tau;
        q = b.phase.p;
    }
    let turns = total / ell;
    let ds = (turns - turns.round()) * ell;
    Ok((turns, ds.abs().max((q - p).abs())))
}

/// An `n`-periodic orbit tangent to a caustic.
#[derive(Debug, Clone, PartialEq)]
pub struct PonceletOrbit {
    pub start: PhasePoint,
    /// Number of turns around the table in one period.
    pub winding: i64,
    /// Distance in `(s, p)` between the start and the `n`-th iterate.
    pub closure: f64,
    /// Closure of further orbits tangent to the same caustic.
    pub others: PonceletReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PonceletReport {
    pub closures: Vec<f64>,
    pub max: f64,
}

/// Closure defects of `m` orbits tangent to the caustic, launched from evenly
/// spaced caustic parameters offset from the first.
pub fn poncelet_check(
    table: &ConvexCurve,
    caustic: &ConvexCurve,
    n: usize,
    m: usize,
) -> Result<PonceletReport> {
    let (lo, hi) = caustic.range();
    let mut closures = Vec::with_capacity(m);
    for k in 0..m {
        let tc = lo + (hi - lo) * (k as f64 + 0.37) / m as f64;
        let (tau, phi) = tangent_launch(table, caustic, tc)?;
        closures.push(run(table, tau, phi.p, n)?.1);
    }
    let max = closures.iter().cloned().fold(0.0, f64::max);
    Ok(PonceletReport { closures, max })
}

/// Looks for an `n`-periodic orbit tangent to the given caustic. Orbits are
/// launched tangent to the caustic from a scan of its parameter; the best
/// closure is refined, and accepted below `tol`. An accepted orbit is checked
/// against 10 further tangent orbits.
pub fn poncelet_search(
    table: &ConvexCurve,
    caustic: &ConvexCurve,
    n: usize,
    tol: f64,
) -> Result<Option<PonceletOrbit>> {
    if n == 0 {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    let (lo, hi) = caustic.range();
    let scan = 16;
    let defect = |tc: f64| -> Result<f64> {
        let (tau, phi) = tangent_launch(table, caustic, tc)?;
        Ok(run(table, tau, phi.p, n)?.1)
    };
    let mut best = (lo, f64::INFINITY);
    for k in 0..scan {
        let tc = lo + (hi - lo) * k as f64 / scan as f64;
        let d = defect(tc)?;
        if d < best.1 {
            best = (tc, d);
        }
    }
    if best.1 > tol {
        let w = (hi - lo) / scan as f64;
        best = minimize(&defect, best.0 - w, best.0 + w, 1e-12, 100)?;
    }
    if !(best.1 <= tol) {
        return Ok(None);
    }
    let (tau, start) = tangent_launch(table, caustic, best.0)?;
    let (turns, closure) = run(table, tau, start.p, n)?;
    let others = poncelet_check(table, caustic, n, 10)?;
    Ok(Some(PonceletOrbit {
        start,
        winding: turns.round() as i64,
        closure,
        others,
    }))
}

/// Member of a one-parameter caustic family whose tangent orbits close after
/// `n` bounces and `k` turns, by root-finding on the rotation defect.
/// Returns `None` when the defect does not change sign on `range`.
pub fn poncelet_family_search<F>(
    table: &ConvexCurve,
    family: F,
    range: (f64, f64),
    n: usize,
    k: usize,
) -> Result<Option<(f64, ConvexCurve)>>
where
    F: Fn(f64) -> Result<ConvexCurve>,
{
    let defect = |c: f64| -> Result<f64> {
        let caustic = family(c)?;
        let (tau, phi) = tangent_launch(table, &caustic, 0.0)?;
        Ok(run(table, tau, phi.p, n)?.0 - k as f64)
    };
    let (f0, f1) = (defect(range.0)?, defect(range.1)?);
    if f0 * f1 > 0.0 {
        return Ok(None);
    }
    let c = brent(defect, range.0, range.1, 1e-14, 200)?;
    Ok(Some((c, family(c)?)))
}
