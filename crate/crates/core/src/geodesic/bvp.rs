//! Two-point geodesic problems by shooting.

use super::{chord_length, geodesic_ivp, shoot, shoot_to_event, GeodesicPath, GeodesicState};
use crate::error::{Error, Result};
use crate::metric::{MetricChart, Point};
use crate::numeric::roots::brent;

#[derive(Debug, Clone, Copy)]
pub struct BvpOptions {
    pub max_newton: usize,
    /// Endpoint tolerance in chart coordinates, relative to the chord.
    pub tol: f64,
    /// Angle step for the finite-difference sensitivity.
    pub angle_step: f64,
    /// Refuse pairs farther apart than the chart's convexity radius.
    pub enforce_radius: bool,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            max_newton: 30,
            tol: 1e-13,
            angle_step: 1e-5,
            enforce_radius: true,
        }
    }
}

/// Solution of a two-point problem: length and unit end states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub length: f64,
    pub start: GeodesicState,
    pub end: GeodesicState,
}

/// Orthonormal frame at a point: `e1 ∥ ∂u`, `e2` its metric rotation.
fn frame(chart: &MetricChart, p: Point) -> ([f64; 2], [f64; 2]) {
    let g = chart.tensor(p);
    let e1 = [1.0 / g.g11.sqrt(), 0.0];
    (e1, g.rotate(e1))
}

fn direction(e: &([f64; 2], [f64; 2]), theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * e.0[0] + s * e.1[0], c * e.0[1] + s * e.1[1]]
}

/// Shortest geodesic from `a` to `b` (within the convexity radius).
pub fn connect(chart: &MetricChart, a: Point, b: Point) -> Result<Connection> {
    connect_with(chart, a, b, &BvpOptions::default())
}

pub fn connect_with(
    chart: &MetricChart,
    a: Point,
    b: Point,
    opts: &BvpOptions,
) -> Result<Connection> {
    chart.eval_metric(a)?;
    chart.eval_metric(b)?;
    let d = [b[0] - a[0], b[1] - a[1]];
    let sep = d[0].hypot(d[1]);
    let fr = frame(chart, a);
    if sep == 0.0 {
        let st = GeodesicState::new(a, fr.0);
        return Ok(Connection {
            length: 0.0,
            start: st,
            end: st,
        });
    }
    if opts.enforce_radius && sep > chart.convexity_radius {
        return Err(Error::BeyondConvexityRadius {
            distance: sep,
            radius: chart.convexity_radius,
        });
    }
    let g = chart.tensor(a);
    let theta0 = g.dot(d, fr.1).atan2(g.dot(d, fr.0));
    let len0 = chord_length(chart, a, b);
    match newton(chart, a, b, &fr, theta0, len0, sep, opts) {
        Ok(c) => Ok(c),
        Err(_) => bisection(chart, a, b, &fr, theta0, len0, sep),
    }
}

#[allow(clippy::too_many_arguments)]
fn newton(
    chart: &MetricChart,
    a: Point,
    b: Point,
    fr: &([f64; 2], [f64; 2]),
    theta0: f64,
    len0: f64,
    sep: f64,
    opts: &BvpOptions,
) -> Result<Connection> {
    let end = |theta: f64, len: f64| shoot(chart, GeodesicState::new(a, direction(fr, theta)), len);
    let resid = |e: &GeodesicState| [e.pos[0] - b[0], e.pos[1] - b[1]];
    let (mut theta, mut len) = (theta0, len0);
    let mut e = end(theta, len)?;
    let mut r = resid(&e);
    let mut rn = r[0].hypot(r[1]);
    let h = opts.angle_step;
    for _ in 0..opts.max_newton {
        if rn <= opts.tol * (1.0 + sep) {
            return Ok(Connection {
                length: len,
                start: GeodesicState::new(a, direction(fr, theta)),
                end: e,
            });
        }
        let ep = end(theta + h, len)?;
        let em = end(theta - h, len)?;
        let jt = [
            (ep.pos[0] - em.pos[0]) / (2.0 * h),
            (ep.pos[1] - em.pos[1]) / (2.0 * h),
        ];
        let jl = e.vel;
        let det = jt[0] * jl[1] - jt[1] * jl[0];
        if det.abs() < 1e-14 * len.max(1e-300) {
            return Err(Error::BvpFailure("singular shooting Jacobian".into()));
        }
        let dt = (r[0] * jl[1] - r[1] * jl[0]) / det;
        let dl = (jt[0] * r[1] - jt[1] * r[0]) / det;
        let mut step = 1.0;
        loop {
            let nt = theta - step * dt;
            let nl = len - step * dl;
            if nl > 0.0 {
                if let Ok(ne) = end(nt, nl) {
                    let nr = resid(&ne);
                    let nn = nr[0].hypot(nr[1]);
                    if nn < rn || step < 1e-3 {
                        theta = nt;
                        len = nl;
                        e = ne;
                        r = nr;
                        rn = nn;
                        break;
                    }
                }
            }
            step *= 0.5;
            if step < 1e-4 {
                return Err(Error::BvpFailure("line search stalled".into()));
            }
        }
    }
    if rn <= 1e3 * opts.tol * (1.0 + sep) {
        return Ok(Connection {
            length: len,
            start: GeodesicState::new(a, direction(fr, theta)),
            end: e,
        });
    }
    Err(Error::BvpFailure(format!(
        "Newton did not converge (residual {rn:e})"
    )))
}

/// Robust fallback: for each launch angle, run until the chart projection onto
/// the chord reaches `b`; the transverse offset there is driven to zero.
fn bisection(
    chart: &MetricChart,
    a: Point,
    b: Point,
    fr: &([f64; 2], [f64; 2]),
    theta0: f64,
    len0: f64,
    sep: f64,
) -> Result<Connection> {
    let d = [(b[0] - a[0]) / sep, (b[1] - a[1]) / sep];
    let arrive = |theta: f64| -> Result<(f64, GeodesicState)> {
        let st = GeodesicState::new(a, direction(fr, theta));
        let hit = shoot_to_event(chart, st, 4.0 * len0, 0.05 * len0, |p| {
            (p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1] - sep
        })?;
        hit.ok_or_else(|| Error::BvpFailure("geodesic never reaches the target".into()))
    };
    let transverse = |theta: f64| -> Result<f64> {
        let (_, e) = arrive(theta)?;
        Ok(d[0] * (e.pos[1] - a[1]) - d[1] * (e.pos[0] - a[0]))
    };
    let width = std::f64::consts::FRAC_PI_3;
    let theta = brent(transverse, theta0 - width, theta0 + width, 1e-15, 200)
        .map_err(|e| Error::BvpFailure(format!("fallback bracket failed: {e}")))?;
    let (len, end) = arrive(theta)?;
    Ok(Connection {
        length: len,
        start: GeodesicState::new(a, direction(fr, theta)),
        end,
    })
}

/// Geodesic path from `a` to `b` with its length `|ab|`.
pub fn geodesic_bvp(chart: &MetricChart, a: Point, b: Point) -> Result<GeodesicPath> {
    let c = connect(chart, a, b)?;
    if c.length == 0.0 {
        return Ok(GeodesicPath {
            samples: vec![(0.0, c.start)],
            length: 0.0,
            exited: false,
        });
    }
    let mut p = geodesic_ivp(chart, c.start, c.length)?;
    if let Some(last) = p.samples.last_mut() {
        if (last.0 - c.length).abs() < 1e-12 * c.length {
            last.1 = c.end;
        }
    }
    p.length = c.length;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{
        confocal_elliptic, euclidean_cartesian, euclidean_polar, EllipticCoordSpec,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn euclidean_three_four_five() {
        let p = geodesic_bvp(&euclidean_cartesian(), [0.0, 0.0], [3.0, 4.0]).unwrap();
        assert!((p.length - 5.0).abs() < 1e-14);
        let z = geodesic_bvp(&euclidean_cartesian(), [1.0, 1.0], [1.0, 1.0]).unwrap();
        assert_eq!(z.length, 0.0);
    }

    #[test]
    fn elliptic_lengths_are_cartesian_distances() {
        let spec = EllipticCoordSpec::new(2.0, 1.0).unwrap();
        let chart = confocal_elliptic(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a: [f64; 2] = [rng.random_range(-0.5..2.0), rng.random_range(-1.9..-1.1)];
            let b = [
                a[0] + rng.random_range(-0.4..0.4f64),
                (a[1] + rng.random_range(-0.3..0.3f64)).clamp(-1.95, -1.05),
            ];
            let b = [b[0].max(-0.9), b[1]];
            let c = connect(&chart, a, b).unwrap();
            let (xa, ya) = spec.to_cartesian(a[0], a[1]).unwrap();
            let (xb, yb) = spec.to_cartesian(b[0], b[1]).unwrap();
            let oracle = (xa - xb).hypot(ya - yb);
            assert!(
                (c.length - oracle).abs() < 1e-7,
                "{a:?} {b:?} {} {oracle}",
                c.length
            );
        }
    }

    #[test]
    fn shooting_reproduces_target() {
        let chart = euclidean_polar();
        let (a, b) = ([1.0, 0.1], [1.5, 0.6]);
        let c = connect(&chart, a, b).unwrap();
        let e = shoot(&chart, c.start, c.length).unwrap();
        assert!((e.pos[0] - b[0]).abs() < 1e-9 && (e.pos[1] - b[1]).abs() < 1e-9);
        // law of cosines oracle
        let oracle = (1.0f64 + 2.25 - 3.0 * 0.5f64.cos()).sqrt();
        assert!((c.length - oracle).abs() < 1e-10);
    }

    #[test]
    fn fallback_agrees_with_newton() {
        let chart = euclidean_polar();
        let (a, b) = ([1.0, 0.1], [1.5, 0.6]);
        let opts = BvpOptions {
            max_newton: 0,
            tol: 0.0,
            ..BvpOptions::default()
        };
        let slow = connect_with(&chart, a, b, &opts).unwrap();
        let fast = connect(&chart, a, b).unwrap();
        assert!((slow.length - fast.length).abs() < 1e-10);
    }

    #[test]
    fn refuses_far_pairs() {
        let chart = euclidean_polar();
        assert!(matches!(
            connect(&chart, [1.0, 0.0], [5.0, 2.0]),
            Err(Error::BeyondConvexityRadius { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn triangle_inequality(
            r in prop::array::uniform3(1.0f64..2.0),
            t in prop::array::uniform3(0.0f64..0.8),
        ) {
            let chart = euclidean_polar();
            let p: Vec<Point> = (0..3).map(|i| [r[i], t[i]]).collect();
            let ab = connect(&chart, p[0], p[1]).unwrap().length;
            let bc = connect(&chart, p[1], p[2]).unwrap().length;
            let ac = connect(&chart, p[0], p[2]).unwrap().length;
            prop_assert!(ac <= ab + bc + 1e-10);
        }

        #[test]
        fn speed_is_conserved(th in 0.0..std::f64::consts::TAU, len in 0.1f64..2.0) {
            let chart = confocal_elliptic(2.0, 1.0).unwrap();
            let st = GeodesicState::new([1.0, -1.5], [th.cos(), th.sin()]);
            let p = geodesic_ivp(&chart, st, len).unwrap();
            for (_, s) in &p.samples {
                let v = chart.tensor(s.pos).norm(s.vel);
                prop_assert!((v - 1.0).abs() < 1e-8 * (1.0 + len));
            }
        }
    }
}
