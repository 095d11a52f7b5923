//! Local string construction around a convex curve.
//!
//! For two points `A`, `B` on a convex curve γ the tangent geodesics meet at
//! `C`; the excess `L(A,B) = |AC| + |BC| − arc(AB)` is how much longer the
//! taut string `A → C → B` is than the arc it wraps. Level sets of `L` over
//! `C` are the string curves Γ_p, and the map `A ↦ B` at fixed excess is the
//! string diffeomorphism.

mod poritsky;
mod reconstruct;

pub use poritsky::{
    commutation_defect, poritsky_check, poritsky_check_with, poritsky_parameter, tune_p_ref,
    ConjugacyMethod, PoritskyParam, ShiftDefect,
};
pub use reconstruct::{
    poritsky_to_liouville, Reconstruction, ReconstructionGrid, ReconstructionReport,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{open_sample_params, ConvexCurve};
use crate::error::{Error, Result};
use crate::geodesic::{connect_with, tangent_intersection, BvpOptions};
use crate::metric::Point;
use crate::numeric::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StringRecord {
    pub a_param: f64,
    pub b_param: f64,
    pub c: Point,
    pub len_ac: f64,
    pub len_bc: f64,
    /// Arc length of γ between `A` and `B`.
    pub arc: f64,
    /// `|AC| + |BC| − arc`.
    pub excess: f64,
}

/// Signed parameter offset from `a` to `b`; for closed curves the
/// representative in `(−½, ½]`.
fn offset(gamma: &ConvexCurve, a: f64, b: f64) -> f64 {
    let d = b - a;
    if gamma.is_closed() {
        d - d.round()
    } else {
        d
    }
}

/// String record for `A = γ(a)`, `B = γ(b)`. The excess is symmetric in `A`
/// and `B`; `C` is built on whichever side makes `B` follow `A`.
pub fn string_excess(gamma: &ConvexCurve, a: f64, b: f64) -> Result<StringRecord> {
    let d = offset(gamma, a, b);
    if d == 0.0 {
        return Ok(StringRecord {
            a_param: a,
            b_param: b,
            c: gamma.point(a),
            len_ac: 0.0,
            len_bc: 0.0,
            arc: 0.0,
            excess: 0.0,
        });
    }
    let (first, second) = if d > 0.0 { (a, a + d) } else { (b, b - d) };
    let t = tangent_intersection(gamma, first, second)?;
    let arc = gamma.arc_between(first, second).abs();
    let (len_ac, len_bc) = if d > 0.0 {
        (t.len_a, t.len_b)
    } else {
        (t.len_b, t.len_a)
    };
    Ok(StringRecord {
        a_param: a,
        b_param: b,
        c: t.c,
        len_ac,
        len_bc,
        arc,
        excess: len_ac + len_bc - arc,
    })
}

/// Largest forward parameter offset tried before declaring the excess out
/// of range.
fn max_offset(gamma: &ConvexCurve, a: f64) -> f64 {
    if gamma.is_closed() {
        0.45
    } else {
        gamma.range().1 - a
    }
}

/// Forward offset `δ > 0` with `L(a, a + δ) = p` (or backward with
/// `L(a − δ, a) = p` when `backward`), starting the search near `guess`.
pub(crate) fn solve_offset(
    gamma: &ConvexCurve,
    p: f64,
    a: f64,
    backward: bool,
    guess: Option<f64>,
) -> Result<f64> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "excess {p} must be non-negative"
        )));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let limit = if backward {
        if gamma.is_closed() {
            0.45
        } else {
            a - gamma.range().0
        }
    } else {
        max_offset(gamma, a)
    };
    let excess = |d: f64| -> Result<f64> {
        let r = if backward {
            string_excess(gamma, a - d, a)?
        } else {
            string_excess(gamma, a, a + d)?
        };
        Ok(r.excess - p)
    };
    let mut reached = 0.0f64;
    // bracket [lo, hi] with f(lo) < 0 < f(hi)
    let (mut lo, mut hi) = match guess {
        Some(g) if g > 0.0 && g < limit => {
            let (l, h) = (g * 0.98, (g * 1.02).min(limit));
            match (excess(l), excess(h)) {
                (Ok(fl), Ok(fh)) if fl < 0.0 && fh > 0.0 => (l, h),
                _ => (0.0, 0.0),
            }
        }
        _ => (0.0, 0.0),
    };
    if hi == 0.0 {
        let mut d = (1e-3 * limit).min(0.5 * limit);
        // a failed evaluation (tangents leaving the chart) halves the step back
        let mut retreats = 0;
        loop {
            let f = match excess(d) {
                Ok(f) => f,
                Err(_) if retreats < 30 && d - lo > 1e-9 * limit => {
                    retreats += 1;
                    d = 0.5 * (lo + d);
                    continue;
                }
                Err(_) => {
                    return Err(Error::ExcessRange {
                        value: p,
                        max: reached,
                    })
                }
            };
            reached = reached.max(f + p);
            if f > 0.0 {
                hi = d;
                break;
            }
            lo = d;
            if d >= limit {
                return Err(Error::ExcessRange {
                    value: p,
                    max: reached,
                });
            }
            d = (2.0 * d).min(limit);
        }
    }
    let d = brent(excess, lo, hi, 1e-16, 200)?;
    Ok(d)
}

/// The point `B` with `L(A, B) = p`, `B` following `A`.
pub fn string_diffeo(gamma: &ConvexCurve, p: f64, a: f64) -> Result<f64> {
    let d = solve_offset(gamma, p, a, false, None)?;
    Ok(gamma.wrap(a + d))
}

/// Inverse of [`string_diffeo`]: the point `A` with `L(A, B) = p`.
pub fn string_diffeo_inverse(gamma: &ConvexCurve, p: f64, b: f64) -> Result<f64> {
    let d = solve_offset(gamma, p, b, true, None)?;
    Ok(gamma.wrap(b - d))
}

/// The string curve Γ_p with its sample records.
#[derive(Debug, Clone)]
pub struct StringCurve {
    pub curve: ConvexCurve,
    pub records: Vec<StringRecord>,
}

impl StringCurve {
    pub fn points(&self) -> Vec<Point> {
        self.records.iter().map(|r| r.c).collect()
    }
}

/// Γ_p sampled at `n` base points `A`. Closed curves use `A = k/n`; germs use
/// Chebyshev–Lobatto points over the base range whose partners stay on γ.
pub fn string_curve(gamma: &ConvexCurve, p: f64, n: usize) -> Result<StringCurve> {
    if p == 0.0 {
        let records = if gamma.is_closed() {
            (0..n).map(|k| k as f64 / n as f64).collect::<Vec<_>>()
        } else {
            open_sample_params(gamma.range(), n)
        }
        .into_iter()
        .map(|t| string_excess(gamma, t, t))
        .collect::<Result<Vec<_>>>()?;
        return Ok(StringCurve {
            curve: gamma.clone(),
            records,
        });
    }
    let (params, range) = if gamma.is_closed() {
        ((0..n).map(|k| k as f64 / n as f64).collect(), None)
    } else {
        let (lo, hi) = gamma.range();
        let last = hi - solve_offset(gamma, p, hi, true, None)?;
        if !(last > lo) {
            return Err(Error::ExcessRange { value: p, max: 0.0 });
        }
        // keep partners strictly inside the germ
        let last = lo + (last - lo) * (1.0 - 1e-9);
        (open_sample_params((lo, last), n), Some((lo, last)))
    };
    let results: Vec<Result<StringRecord>> = params
        .par_iter()
        .map(|&a| {
            let d = solve_offset(gamma, p, a, false, None)?;
            string_excess(gamma, a, a + d)
        })
        .collect();
    let mut records = Vec::with_capacity(n);
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => records.push(r),
            Err(e) => {
                return Err(Error::Geometry(format!(
                    "string curve incomplete: sample {k} of {n} (A = {}) failed: {e}",
                    params[k]
                )))
            }
        }
    }
    let pts: Vec<Point> = records.iter().map(|r| r.c).collect();
    let curve = match range {
        None => ConvexCurve::from_closed_samples(gamma.chart.clone(), &pts)?,
        Some(r) => ConvexCurve::from_open_samples(gamma.chart.clone(), r, &pts)?,
    };
    Ok(StringCurve { curve, records })
}

/// Parameters `(a, b)` of the points of γ whose tangent geodesics pass
/// through the exterior point `c`, `b` following `a`.
pub fn tangent_points(gamma: &ConvexCurve, c: Point) -> Result<(f64, f64)> {
    let probes = gamma.probe_params(if gamma.is_closed() { 256 } else { 257 });
    // seeds from chart-straight tangent lines
    let straight = |t: f64| -> Option<(f64, f64)> {
        let e = gamma.eval(t);
        let r = [c[0] - e.pos[0], c[1] - e.pos[1]];
        Some((
            e.d1[0] * r[1] - e.d1[1] * r[0],
            e.d1[0] * r[0] + e.d1[1] * r[1],
        ))
    };
    // or from the geodesics joining γ to c, when γ is straight in the chart
    let opts = BvpOptions {
        enforce_radius: false,
        ..BvpOptions::default()
    };
    let coarse = gamma.probe_params(if gamma.is_closed() { 64 } else { 65 });
    let geodesic = |t: f64| -> Option<(f64, f64)> {
        let v = connect_with(&gamma.chart, gamma.point(t), c, &opts)
            .ok()?
            .start
            .vel;
        let g = gamma.chart.tensor(gamma.point(t));
        Some((
            g.dot(v, gamma.inward_normal(t)),
            g.dot(v, gamma.unit_tangent(t)),
        ))
    };
    let seeds =
        scan_sides(gamma, &probes, straight).or_else(|| scan_sides(gamma, &coarse, geodesic));
    let Some((mut a, mut b)) = seeds else {
        return Err(Error::Geometry("point is not outside the curve".into()));
    };
    if gamma.is_closed() {
        b = a + offset(gamma, a, b);
        if b <= a {
            return Err(Error::Geometry("tangent points out of order".into()));
        }
    }
    let gap = |a: f64, b: f64| -> Result<[f64; 2]> {
        let t = tangent_intersection(gamma, a, b)?;
        Ok([t.c[0] - c[0], t.c[1] - c[1]])
    };
    let scale = 1.0 + c[0].hypot(c[1]);
    for _ in 0..30 {
        let f = gap(a, b)?;
        if f[0].hypot(f[1]) < 1e-14 * scale {
            break;
        }
        let h = 1e-7;
        let (fa, fb) = (gap(a + h, b)?, gap(a, b + h)?);
        let j = [
            [(fa[0] - f[0]) / h, (fb[0] - f[0]) / h],
            [(fa[1] - f[1]) / h, (fb[1] - f[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 {
            return Err(Error::Geometry("degenerate tangent configuration".into()));
        }
        a -= (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        b -= (j[0][0] * f[1] - j[1][0] * f[0]) / det;
    }
    let f = gap(a, b)?;
    if f[0].hypot(f[1]) > 1e-10 * scale {
        return Err(Error::Geometry(format!(
            "tangent points did not converge (gap {:e})",
            f[0].hypot(f[1])
        )));
    }
    Ok((a, b))
}

/// Sign changes of the normal component of the direction towards the target:
/// the one looking ahead is `A`, the one looking back is `B`.
fn scan_sides<F>(gamma: &ConvexCurve, probes: &[f64], side: F) -> Option<(f64, f64)>
where
    F: Fn(f64) -> Option<(f64, f64)>,
{
    let (mut sa, mut sb) = (None, None);
    let m = probes.len();
    let count = if gamma.is_closed() { m } else { m - 1 };
    let vals: Vec<Option<(f64, f64)>> = probes.iter().map(|&t| side(t)).collect();
    for k in 0..count {
        let (t0, t1) = (probes[k], probes[(k + 1) % m]);
        let t1 = if t1 < t0 { t1 + 1.0 } else { t1 };
        let (Some((f0, g0)), Some((f1, _))) = (vals[k], vals[(k + 1) % m]) else {
            continue;
        };
        if f0 * f1 <= 0.0 && f0 != f1 {
            let t = t0 + (t1 - t0) * f0 / (f0 - f1);
            if g0 > 0.0 {
                sa = Some(t);
            } else {
                sb = Some(t);
            }
        }
    }
    Some((sa?, sb?))
}

/// Outcome of a Graves check between two leaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravesReport {
    /// Excess matched at one point of the outer leaf.
    pub excess: f64,
    /// Largest metric distance from the constructed curve to the outer leaf.
    pub residual: f64,
}

/// Builds the outer leaf `j` from the inner leaf `i` by the string
/// construction and measures how far the result is from leaf `j`.
pub fn graves_check(
    leaves: &[ConvexCurve],
    i: usize,
    j: usize,
    samples: usize,
) -> Result<GravesReport> {
    let (inner, outer) = match (leaves.get(i), leaves.get(j)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParameter("leaf index out of range".into())),
    };
    let (lo, hi) = outer.range();
    let c = outer.point(if outer.is_closed() {
        0.0
    } else {
        0.5 * (lo + hi)
    });
    if inner.inside_level(c, None) >= 0.0 {
        return Err(Error::Geometry(format!("leaf {j} is not outside leaf {i}")));
    }
    let (a, b) = tangent_points(inner, c)?;
    let excess = string_excess(inner, a, b)?.excess;
    let gp = string_curve(inner, excess, samples)?;
    let residual = gp
        .records
        .iter()
        .map(|r| outer.distance_to(r.c))
        .fold(0.0, f64::max);
    Ok(GravesReport { excess, residual })
}

/// String potentials about the reference point `Q = γ(q)`:
/// `φ(C) = |AC| − arc(A→Q)` and `ψ(C) = |BC| − arc(Q→B)`, where `A`, `B`
/// are the points of γ whose tangent geodesics reach `C`. The arcs are
/// signed, so `φ + ψ` is the excess at `C` wherever `Q` sits.
pub fn string_potentials(gamma: &ConvexCurve, c: Point, q: f64) -> Result<(f64, f64)> {
    let (a, b) = tangent_points(gamma, c)?;
    let r = string_excess(gamma, a, b)?;
    // nearest lift of q for closed curves
    let q = a + offset(gamma, a, q);
    let phi = r.len_ac - gamma.arc_between(a, q);
    let psi = r.len_bc - gamma.arc_between(q, a + offset(gamma, a, b));
    Ok((phi, psi))
}

/// How well the string potentials describe Γ_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    /// Largest `|φ + ψ − p|` on Γ_p.
    pub level: f64,
    /// Largest cosine between `∇(φ + ψ)` and the tangent of Γ_p.
    pub tangency: f64,
    /// Largest cosine between `∇(φ + ψ)` and `∇(φ − ψ)`.
    pub orthogonality: f64,
}

impl PotentialReport {
    pub fn worst(&self) -> f64 {
        self.level.max(self.tangency).max(self.orthogonality)
    }
}

/// Checks on `samples` points of Γ_p that it is a level set of `φ + ψ` and
/// that the level sets of `φ − ψ` cross it at right angles. Gradients are
/// central differences with chart step `h`.
pub fn string_potential_check(
    gamma: &ConvexCurve,
    p: f64,
    samples: usize,
    h: f64,
) -> Result<PotentialReport> {
    let sc = string_curve(gamma, p, samples)?;
    // germ ends have stencil points whose tangents leave the germ
    let records = if gamma.is_closed() {
        &sc.records[..]
    } else {
        &sc.records[1..sc.records.len().saturating_sub(1)]
    };
    let rows: Vec<Result<[f64; 3]>> = records
        .par_iter()
        .map(|r| {
            let q = r.a_param;
            let at = |dx: f64, dy: f64| string_potentials(gamma, [r.c[0] + dx, r.c[1] + dy], q);
            let (phi, psi) = at(0.0, 0.0)?;
            let mut df = [0.0; 2];
            let mut dh = [0.0; 2];
            for k in 0..2 {
                let e = if k == 0 { (h, 0.0) } else { (0.0, h) };
                let (p1, s1) = at(e.0, e.1)?;
                let (p0, s0) = at(-e.0, -e.1)?;
                df[k] = (p1 + s1 - p0 - s0) / (2.0 * h);
                dh[k] = (p1 - s1 - p0 + s0) / (2.0 * h);
            }
            // covectors: pair with vectors directly, with each other through g⁻¹
            let gi = gamma.chart.tensor(r.c).inverse();
            let (nf, nh) = (gi.norm(df), gi.norm(dh));
            // tangent of Γ_p by moving A and re-solving its partner
            let d0 = offset(gamma, r.a_param, r.b_param);
            let corner = |a: f64| -> Result<Point> {
                let d = solve_offset(gamma, p, a, false, Some(d0))?;
                Ok(string_excess(gamma, a, a + d)?.c)
            };
            let da = 1e-5;
            let (c1, c0) = (corner(r.a_param + da)?, corner(r.a_param - da)?);
            let tan = [c1[0] - c0[0], c1[1] - c0[1]];
            let nt = gamma.chart.tensor(r.c).norm(tan);
            Ok([
                (phi + psi - p).abs(),
                (df[0] * tan[0] + df[1] * tan[1]).abs() / (nf * nt),
                gi.dot(df, dh).abs() / (nf * nh),
            ])
        })
        .collect();
    let mut worst = [0.0f64; 3];
    for row in rows {
        let row = row?;
        for k in 0..3 {
            worst[k] = worst[k].max(row[k]);
        }
    }
    Ok(PotentialReport {
        level: worst[0],
        tangency: worst[1],
        orthogonality: worst[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{synthetic_liouville, Func1, LiouvilleSpec};
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn unit_circle() -> ConvexCurve {
        ConvexCurve::euclidean_circle(1.0).unwrap()
    }

    #[test]
    fn circle_excess_closed_form() {
        let c = unit_circle();
        for alpha in [0.05f64, 0.3, 0.7] {
            let r = string_excess(&c, 0.1, 0.1 + alpha / PI).unwrap();
            let oracle = 2.0 * alpha.tan() - 2.0 * alpha;
            assert!((r.excess - oracle).abs() < 1e-12, "{} {oracle}", r.excess);
        }
        assert_eq!(string_excess(&c, 0.3, 0.3).unwrap().excess, 0.0);
    }

    #[test]
    fn excess_is_symmetric() {
        let e = ConvexCurve::confocal_ellipse(2.0, 1.0, 0.0).unwrap();
        let f = string_excess(&e, 0.1, 0.2).unwrap();
        let b = string_excess(&e, 0.2, 0.1).unwrap();
        assert!((f.excess - b.excess).abs() < 1e-14);
        assert!((f.c[0] - b.c[0]).abs() < 1e-14 && (f.len_ac - b.len_bc).abs() < 1e-14);
    }

    #[test]
    fn circle_diffeo_closed_form() {
        let c = unit_circle();
        let p = 2.0 - FRAC_PI_2;
        let b = string_diffeo(&c, p, 0.2).unwrap();
        assert!((b - 0.45).abs() < 1e-12);
        let r = string_excess(&c, 0.2, b).unwrap();
        assert!((r.excess - p).abs() < 1e-11);
        let a = string_diffeo_inverse(&c, p, b).unwrap();
        assert!((a - 0.2).abs() < 1e-10);
        // rotation equivariance
        let b2 = string_diffeo(&c, p, 0.7).unwrap();
        assert!((b2 - 0.95).abs() < 1e-12);
        assert!(string_diffeo(&c, 1e-12, 0.2).unwrap() - 0.2 < 1e-3);
    }

    #[test]
    fn excess_out_of_range() {
        assert!(matches!(
            string_diffeo(&unit_circle(), 100.0, 0.0),
            Err(Error::ExcessRange { .. })
        ));
    }

    #[test]
    fn circle_string_curve() {
        let c = unit_circle();
        let g = string_curve(&c, 2.0 - FRAC_PI_2, 32).unwrap();
        for r in &g.records {
            assert!((r.c[0].hypot(r.c[1]) - SQRT_2).abs() < 1e-8);
        }
        let same = string_curve(&c, 0.0, 8).unwrap();
        assert!((same.curve.length() - c.length()).abs() < 1e-14);
    }

    #[test]
    fn graves_on_confocal_ellipses() {
        let leaves: Vec<ConvexCurve> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&l| ConvexCurve::confocal_ellipse(2.0, 1.0, l).unwrap())
            .collect();
        let r = graves_check(&leaves, 0, 2, 24).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        let circles: Vec<ConvexCurve> = [1.0, 1.3]
            .iter()
            .map(|&r| ConvexCurve::euclidean_circle(r).unwrap())
            .collect();
        let r = graves_check(&circles, 0, 1, 24).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
    }

    #[test]
    fn graves_on_liouville_coordinate_lines() {
        let spec = LiouvilleSpec {
            u1: Func1::closure(|u| (u, 1.0)),
            v1: Func1::closure(|v| (-v * v, -2.0 * v)),
            u2: Func1::Const(1.0),
            v2: Func1::Const(1.0),
            u_range: (0.5, 2.5),
            v_range: (0.2, 2.2),
        };
        let chart = synthetic_liouville(spec).unwrap();
        let line = |v: f64| {
            ConvexCurve::new(
                chart.clone(),
                crate::curve::Shape::CoordinateLine { axis: 1, value: v },
                Some((0.7, 2.3)),
            )
            .unwrap()
        };
        let leaves = vec![line(1.0), line(1.1)];
        let coarse = graves_check(&leaves, 0, 1, 9).unwrap();
        let fine = graves_check(&leaves, 0, 1, 17).unwrap();
        assert!(fine.residual < 1e-5, "{coarse:?} {fine:?}");
    }

    #[test]
    fn circle_potentials_sum_to_the_excess() {
        let c = unit_circle();
        for (x, y) in [(1.3, 0.4), (-0.2, -1.7), (0.9, 1.1)] {
            let r: f64 = f64::hypot(x, y);
            let oracle = 2.0 * (r * r - 1.0).sqrt() - 2.0 * (1.0 / r).acos();
            for q in [0.0, 0.3, 0.8] {
                let (phi, psi) = string_potentials(&c, [x, y], q).unwrap();
                assert!((phi + psi - oracle).abs() < 1e-12, "{} {oracle}", phi + psi);
            }
        }
    }

    #[test]
    fn potentials_on_the_ellipse() {
        let e = ConvexCurve::confocal_ellipse(2.0, 1.0, 0.0).unwrap();
        let r = string_potential_check(&e, 0.1, 12, 1e-5).unwrap();
        assert!(r.worst() < 1e-6, "{r:?}");
    }

    #[test]
    fn potentials_on_a_liouville_germ() {
        let spec = LiouvilleSpec {
            u1: Func1::closure(|u| (u, 1.0)),
            v1: Func1::closure(|v| (-v * v, -2.0 * v)),
            u2: Func1::Const(1.0),
            v2: Func1::Const(1.0),
            u_range: (0.5, 2.5),
            v_range: (0.2, 2.2),
        };
        let chart = synthetic_liouville(spec).unwrap();
        let line = ConvexCurve::new(
            chart,
            crate::curve::Shape::CoordinateLine {
                axis: 1,
                value: 1.0,
            },
            Some((0.7, 2.3)),
        )
        .unwrap();
        let r = string_potential_check(&line, 0.002, 9, 1e-5).unwrap();
        assert!(r.worst() < 1e-4, "{r:?}");
    }

    #[test]
    fn potentials_need_no_liouville_structure() {
        use crate::metric::{conformal, ConformalPoly, Domain};
        let chart = conformal(
            ConformalPoly {
                terms: vec![(0, 0, 1.0), (1, 1, 0.4), (2, 1, 0.4)],
            },
            Domain::new((-1.0, 1.0), (-1.0, 1.0), 1e-6),
        )
        .unwrap();
        let c = ConvexCurve::circle(chart, [0.0, 0.0], 0.3).unwrap();
        let r = string_potential_check(&c, 0.02, 10, 1e-5).unwrap();
        assert!(r.worst() < 1e-4, "{r:?}");
    }
}
