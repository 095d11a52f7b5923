//! The billiard ball map inside a geodesically convex table.
//!
//! Phase space uses boundary arc length `s` and `p = cos θ`, θ the metric
//! angle between the outgoing geodesic and the positive tangent. In these
//! coordinates the invariant area form is `dp ∧ ds`.

mod poncelet;

pub use poncelet::{
    caustic_residual, poncelet_check, poncelet_family_search, poncelet_search, tangent_launch,
    PonceletOrbit, PonceletReport,
};

pub use crate::curve::ConvexCurve;

use std::io::Write;

use crate::error::{Error, Result};
use crate::geodesic::{connect_with, fmt, shoot_to_event, BvpOptions, GeodesicState};
use crate::numeric::birkhoff_weights;

/// Grazing shots with `|p|` above this are rejected.
pub const GRAZING_LIMIT: f64 = 1.0 - 1e-6;

/// Boundary coordinates of an oriented chord.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub s: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(s: f64, p: f64) -> Self {
        PhasePoint { s, p }
    }
}

/// One application of the map, with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounce {
    /// Curve parameter of the new base point.
    pub tau: f64,
    pub phase: PhasePoint,
    /// Lifted arc-length advance along the table (in `(0, ℓ)` for closed tables).
    pub advance: f64,
    /// Metric length of the chord.
    pub chord: f64,
    /// State arriving at the new base point (unit speed, pointing out).
    pub arrival: GeodesicState,
}

/// Outgoing unit direction for phase `p` at parameter τ.
pub fn phase_direction(table: &ConvexCurve, tau: f64, p: f64) -> [f64; 2] {
    let t = table.unit_tangent(tau);
    let n = table.inward_normal(tau);
    let q = (1.0 - p * p).max(0.0).sqrt();
    [p * t[0] + q * n[0], p * t[1] + q * n[1]]
}

fn check_phase(p: f64) -> Result<()> {
    if !p.is_finite() || p.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!("p = {p} outside (-1, 1)")));
    }
    if p.abs() > GRAZING_LIMIT {
        return Err(Error::Grazing(p.abs()));
    }
    Ok(())
}

/// The map in curve-parameter form: from (τ, p) to the next bounce.
pub fn bounce(table: &ConvexCurve, tau: f64, p: f64) -> Result<Bounce> {
    check_phase(p)?;
    let chart = &table.chart;
    let x = table.point(tau);
    let w = phase_direction(table, tau, p);
    let reach = table.length();
    let hit = shoot_to_event(chart, GeodesicState::new(x, w), reach, 0.125 * reach, |q| {
        -table.inside_level(q, None)
    })?
    .ok_or_else(|| Error::Geometry("chord never returned to the table".into()))?;
    let (chord, arrival) = hit;
    let (tau2, _) = table.project(arrival.pos, None);
    let t2 = table.unit_tangent(tau2);
    let g = chart.tensor(arrival.pos);
    // the tangential component survives reflection
    let p2 = g.dot(arrival.vel, t2).clamp(-1.0, 1.0);
    let s1 = table.arclength(tau);
    let s2 = table.arclength(tau2);
    let advance = if table.is_closed() {
        (s2 - s1).rem_euclid(table.length())
    } else {
        s2 - s1
    };
    Ok(Bounce {
        tau: tau2,
        phase: PhasePoint { s: s2, p: p2 },
        advance,
        chord,
        arrival,
    })
}

/// The billiard ball map on phase points.
pub fn billiard_map(table: &ConvexCurve, phi: PhasePoint) -> Result<PhasePoint> {
    let tau = table.param_at(phi.s);
    Ok(bounce(table, tau, phi.p)?.phase)
}

/// Orbit of `n` iterates as (τ, phase, advance) triples, starting point included.
pub fn orbit(
    table: &ConvexCurve,
    phi: PhasePoint,
    n: usize,
) -> Result<Vec<(f64, PhasePoint, f64)>> {
    let mut tau = table.wrap(table.param_at(phi.s));
    let mut p = phi.p;
    let mut out = Vec::with_capacity(n + 1);
    out.push((tau, PhasePoint::new(table.arclength(tau), p), 0.0));
    for _ in 0..n {
        let b = bounce(table, tau, p)?;
        tau = b.tau;
        p = b.phase.p;
        out.push((tau, b.phase, b.advance));
    }
    Ok(out)
}

/// Time reversal: the map conjugated by `(s, p) ↦ (s, −p)` is its inverse.
pub fn reverse(phi: PhasePoint) -> PhasePoint {
    PhasePoint::new(phi.s, -phi.p)
}

/// Deviation `|det J| − 1` of the map's Jacobian in `(s, p)`, by fourth-order
/// central differences with step `h`.
pub fn symplectic_check(table: &ConvexCurve, phi: PhasePoint) -> Result<f64> {
    symplectic_check_with(table, phi, 1e-4)
}

pub fn symplectic_check_with(table: &ConvexCurve, phi: PhasePoint, h: f64) -> Result<f64> {
    let ell = table.length();
    let base = billiard_map(table, phi)?;
    let image = |s: f64, p: f64| -> Result<(f64, f64)> {
        let q = billiard_map(table, PhasePoint::new(s, p))?;
        let mut ds = q.s - base.s;
        if table.is_closed() {
            ds -= ell * (ds / ell).round();
        }
        Ok((ds, q.p))
    };
    let hp = h.min(0.25 * (1.0 - phi.p.abs()));
    let diff = |which: usize| -> Result<(f64, f64)> {
        let step = if which == 0 { h } else { hp };
        let at = |k: f64| {
            if which == 0 {
                image(phi.s + k * step, phi.p)
            } else {
                image(phi.s, phi.p + k * step)
            }
        };
        let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        let d = |a: f64, b: f64, c: f64, e: f64| (a - 8.0 * b + 8.0 * c - e) / (12.0 * step);
        Ok((d(m2.0, m1.0, p1.0, p2.0), d(m2.1, m1.1, p1.1, p2.1)))
    };
    let (ss, ps) = diff(0)?;
    let (sp, pp) = diff(1)?;
    Ok((ss * pp - sp * ps).abs() - 1.0)
}

/// Rotation number estimate with an error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationNumber {
    pub rho: f64,
    /// Difference between the estimates from the two halves of the orbit.
    pub error: f64,
}

/// Mean advance per iterate over the table length, by weighted Birkhoff
/// averaging of `n` iterates.
pub fn rotation_number(table: &ConvexCurve, phi: PhasePoint, n: usize) -> Result<RotationNumber> {
    if !table.is_closed() {
        return Err(Error::InvalidParameter(
            "rotation numbers need a closed table".into(),
        ));
    }
    if n < 1000 {
        return Err(Error::InvalidParameter(format!(
            "rotation number needs at least 1000 iterates, got {n}"
        )));
    }
    let orb = orbit(table, phi, n)?;
    let adv: Vec<f64> = orb[1..].iter().map(|o| o.2 / table.length()).collect();
    Ok(weighted_rotation(&adv))
}

pub(crate) fn weighted_rotation(adv: &[f64]) -> RotationNumber {
    let avg = |xs: &[f64]| {
        let w = birkhoff_weights(xs.len());
        xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>()
    };
    let rho = avg(adv);
    let half = adv.len() / 2;
    let error = (avg(&adv[..half]) - avg(&adv[half..])).abs();
    RotationNumber { rho, error }
}

/// Cross-check through the generating function `L(s, s') = |X(s) X(s')|`:
/// `−∂L/∂s = p`, `∂L/∂s' = p'`, and `∂s'/∂p = −1/∂²L/∂s∂s'`.
/// Returns the largest of the three discrepancies.
pub fn generating_function_check(table: &ConvexCurve, phi: PhasePoint) -> Result<f64> {
    let h = 1e-4;
    let image = billiard_map(table, phi)?;
    let opts = BvpOptions {
        enforce_radius: false,
        ..BvpOptions::default()
    };
    let dist = |s: f64, s2: f64| -> Result<f64> {
        let a = table.point(table.param_at(s));
        let b = table.point(table.param_at(s2));
        Ok(connect_with(&table.chart, a, b, &opts)?.length)
    };
    let (s, s2) = (phi.s, image.s);
    let ls = (dist(s + h, s2)? - dist(s - h, s2)?) / (2.0 * h);
    let ls2 = (dist(s, s2 + h)? - dist(s, s2 - h)?) / (2.0 * h);
    let lss2 = (dist(s + h, s2 + h)? - dist(s + h, s2 - h)? - dist(s - h, s2 + h)?
        + dist(s - h, s2 - h)?)
        / (4.0 * h * h);
    let ell = table.length();
    let hp = 1e-5;
    let sp = {
        let up = billiard_map(table, PhasePoint::new(s, phi.p + hp))?.s;
        let dn = billiard_map(table, PhasePoint::new(s, phi.p - hp))?.s;
        let mut d = up - dn;
        if table.is_closed() {
            d -= ell * (d / ell).round();
        }
        d / (2.0 * hp)
    };
    let r1 = (ls + phi.p).abs();
    let r2 = (ls2 - image.p).abs();
    let r3 = (sp + 1.0 / lss2).abs() / sp.abs().max(1.0);
    Ok(r1.max(r2).max(r3))
}

/// Phase portrait rows `(orbit, k, s, p)`; failed orbits are truncated and
/// reported.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub rows: Vec<(usize, usize, f64, f64)>,
    pub failures: Vec<(usize, usize, String)>,
}

impl PhasePortrait {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["orbit", "k", "s", "p"])?;
        for (o, k, s, p) in &self.rows {
            w.write_record(&[o.to_string(), k.to_string(), fmt(*s), fmt(*p)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Orbits from the given initial phase points, `n` iterates each, computed in
/// parallel and collected in input order.
pub fn phase_portrait(table: &ConvexCurve, starts: &[PhasePoint], n: usize) -> PhasePortrait {
    use rayon::prelude::*;
    let results: Vec<(
        Vec<(usize, usize, f64, f64)>,
        Option<(usize, usize, String)>,
    )> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| {
            let mut rows = Vec::with_capacity(n + 1);
            let mut tau = table.wrap(table.param_at(phi.s));
            let mut p = phi.p;
            rows.push((i, 0, table.arclength(tau), p));
            for k in 1..=n {
                match bounce(table, tau, p) {
                    Ok(b) => {
                        tau = b.tau;
                        p = b.phase.p;
                        rows.push((i, k, b.phase.s, p));
                    }
                    Err(e) => return (rows, Some((i, k, e.to_string()))),
                }
            }
            (rows, None)
        })
        .collect();
    let mut out = PhasePortrait {
        rows: vec![],
        failures: vec![],
    };
    for (rows, fail) in results {
        out.rows.extend(rows);
        out.failures.extend(fail);
    }
    out
}
