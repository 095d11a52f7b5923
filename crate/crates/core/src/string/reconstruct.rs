//! Liouville form of the metric outside a curve with the shift property.
//!
//! An exterior point `C` has two tangency points with shift parameters `s`
//! (behind) and `t` (ahead). In `x = (s+t)/2`, `y = (t−s)/2` the metric is
//! orthogonal with geodesic diagonals, `a dx² + b dy²`. Such a metric
//! separates as `f = √(a+b)/a` depending on `x` alone and `g = √(a+b)/b` on
//! `y` alone, and `du = dx/√f`, `dv = dy/√g` bring it to
//! `(1/f + 1/g)(du² + dv²)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::PoritskyParam;
use crate::curve::{curvature_of, ConvexCurve};
use crate::error::{Error, Result};
use crate::geodesic::tangent_intersection;
use crate::metric::{ChartKind, Domain, MetricChart, Point, TabulatedMetric};
use crate::numeric::cheb::Cheb2;

/// Uniform `(x, y)` grid of the reconstruction, `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionGrid {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Step of the differences that pull the metric back.
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    1e-3
}

impl ReconstructionGrid {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Self {
        ReconstructionGrid {
            x,
            y,
            nx,
            ny,
            step: default_step(),
        }
    }

    fn xs(&self) -> Vec<f64> {
        lin(self.x, self.nx)
    }

    fn ys(&self) -> Vec<f64> {
        lin(self.y, self.ny)
    }
}

fn lin(r: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| r.0 + (r.1 - r.0) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Residuals of the reconstruction stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// `max |g_xy| / √(g_xx g_yy)`.
    pub orthogonality: f64,
    /// Largest `|κ_g|` along the diagonals `x ± y = const`.
    pub diagonal_kappa: f64,
    /// Scaled residual of `a_x = (1 + 2a/b) b_x`, `b_y = (1 + 2b/a) a_y`.
    pub pde9_residual: f64,
    /// Relative variation of `f` along `y` and of `g` along `x`.
    pub separation_residual: f64,
    /// Relative mismatch of `a dx² + b dy²` with `(1/f + 1/g)(du² + dv²)`.
    pub liouville_residual: f64,
    /// Relative residual of `a = c₁(y) b² − b` with `c₁` fitted at one `x`.
    pub ode_residual: f64,
}

impl ReconstructionReport {
    pub const TOLERANCES: [(&'static str, f64); 5] = [
        ("orthogonality", 1e-5),
        ("diagonal_kappa", 1e-5),
        ("pde9_residual", 1e-3),
        ("separation_residual", 1e-3),
        ("liouville_residual", 1e-3),
    ];

    fn values(&self) -> [f64; 5] {
        [
            self.orthogonality,
            self.diagonal_kappa,
            self.pde9_residual,
            self.separation_residual,
            self.liouville_residual,
        ]
    }

    /// Every stage within its tolerance.
    pub fn passes(&self) -> bool {
        self.values()
            .iter()
            .zip(Self::TOLERANCES)
            .all(|(v, (_, tol))| *v < tol)
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// The metric in `(x, y)`, interpolated over the grid rectangle.
    pub chart: MetricChart,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `a[i][j] = g_xx(x_i, y_j)`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// Separated factors, averaged across the other variable.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `u(x)` and `v(y)`, zero at the grid origin.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub report: ReconstructionReport,
}

impl Reconstruction {
    /// `U(u_i) = 1/f_i`.
    pub fn u_fn(&self) -> Vec<f64> {
        self.f.iter().map(|f| 1.0 / f).collect()
    }

    /// `V(v_j) = −1/g_j`.
    pub fn v_fn(&self) -> Vec<f64> {
        self.g.iter().map(|g| -1.0 / g).collect()
    }
}

/// The exterior point with shift coordinates `(x, y)`.
fn point_at(gamma: &ConvexCurve, param: &PoritskyParam, x: f64, y: f64) -> Result<Point> {
    let a = param.lifted_inverse(x - y);
    let b = param.lifted_inverse(x + y);
    Ok(tangent_intersection(gamma, a, b)?.c)
}

/// Metric `(g_xx, g_xy, g_yy)` pulled back to `(x, y)`.
fn pullback(
    gamma: &ConvexCurve,
    param: &PoritskyParam,
    x: f64,
    y: f64,
    h: f64,
) -> Result<[f64; 3]> {
    let c = point_at(gamma, param, x, y)?;
    let d = |dx: f64, dy: f64| -> Result<[f64; 2]> {
        let mut acc = [0.0; 2];
        for (k, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
            let p = point_at(gamma, param, x + k * h * dx, y + k * h * dy)?;
            acc[0] += w * p[0];
            acc[1] += w * p[1];
        }
        Ok([acc[0] / (12.0 * h), acc[1] / (12.0 * h)])
    };
    let (cx, cy) = (d(1.0, 0.0)?, d(0.0, 1.0)?);
    let g = gamma.chart.eval_metric(c)?;
    Ok([g.dot(cx, cx), g.dot(cx, cy), g.dot(cy, cy)])
}

/// Geodesic curvature at `(x, y)` of the diagonal with direction `(1, sign)`.
fn diagonal_kappa(
    gamma: &ConvexCurve,
    param: &PoritskyParam,
    x: f64,
    y: f64,
    sign: f64,
    h: f64,
) -> Result<f64> {
    let mut pts = [[0.0; 2]; 5];
    for (k, p) in pts.iter_mut().enumerate() {
        let s = (k as f64 - 2.0) * h;
        *p = point_at(gamma, param, x + s, y + sign * s)?;
    }
    let d1 = |i: usize| (pts[0][i] - 8.0 * pts[1][i] + 8.0 * pts[3][i] - pts[4][i]) / (12.0 * h);
    let d2 = |i: usize| {
        (-pts[0][i] + 16.0 * pts[1][i] - 30.0 * pts[2][i] + 16.0 * pts[3][i] - pts[4][i])
            / (12.0 * h * h)
    };
    curvature_of(&gamma.chart, pts[2], [d1(0), d1(1)], [d2(0), d2(1)])
        .ok_or_else(|| Error::Geometry("degenerate diagonal".into()))
}

/// Fourth-order first derivative of samples with spacing `h` at index `i`;
/// one-sided near the ends.
fn diff(v: &[f64], i: usize, h: f64) -> f64 {
    let n = v.len();
    if i >= 2 && i + 2 < n {
        (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
    } else if i + 4 < n {
        (-25.0 * v[i] + 48.0 * v[i + 1] - 36.0 * v[i + 2] + 16.0 * v[i + 3] - 3.0 * v[i + 4])
            / (12.0 * h)
    } else {
        (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4])
            / (12.0 * h)
    }
}

fn cumulative_trapezoid(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for k in 1..x.len() {
        out[k] = out[k - 1] + 0.5 * (x[k] - x[k - 1]) * (f[k] + f[k - 1]);
    }
    out
}

/// Pulls the metric outside γ back to shift coordinates, verifies the stages
/// of the Liouville reduction and returns the separated form. Fails naming the
/// first stage whose residual exceeds ten times its tolerance.
pub fn poritsky_to_liouville(
    gamma: &ConvexCurve,
    param: &PoritskyParam,
    grid: &ReconstructionGrid,
) -> Result<Reconstruction> {
    if grid.nx < 5 || grid.ny < 5 {
        return Err(Error::InvalidParameter(
            "reconstruction grid needs at least 5×5 nodes".into(),
        ));
    }
    if !(grid.y.0 > 0.0 && grid.y.1 > grid.y.0 && grid.x.1 > grid.x.0) {
        return Err(Error::InvalidParameter(
            "reconstruction grid needs 0 < y0 < y1 and x0 < x1".into(),
        ));
    }
    let xs = grid.xs();
    let ys = grid.ys();
    let h = grid.step;
    let nodes: Vec<(usize, usize)> = (0..grid.nx)
        .flat_map(|i| (0..grid.ny).map(move |j| (i, j)))
        .collect();
    let vals: Vec<Result<([f64; 3], f64)>> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let m = pullback(gamma, param, xs[i], ys[j], h)?;
            let k1 = diagonal_kappa(gamma, param, xs[i], ys[j], 1.0, h)?;
            let k2 = diagonal_kappa(gamma, param, xs[i], ys[j], -1.0, h)?;
            Ok((m, k1.abs().max(k2.abs())))
        })
        .collect();
    let mut a = vec![vec![0.0; grid.ny]; grid.nx];
    let mut b = a.clone();
    let mut orthogonality = 0.0f64;
    let mut kappa = 0.0f64;
    for (&(i, j), v) in nodes.iter().zip(vals) {
        let (m, k) = v?;
        a[i][j] = m[0];
        b[i][j] = m[2];
        orthogonality = orthogonality.max(m[1].abs() / (m[0] * m[2]).sqrt());
        kappa = kappa.max(k);
    }
    let (dx, dy) = (xs[1] - xs[0], ys[1] - ys[0]);
    // the x- and y-equations of the diagonal-geodesic system
    let (mut r1, mut s1, mut r2, mut s2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..grid.ny {
        let ar: Vec<f64> = (0..grid.nx).map(|i| a[i][j]).collect();
        let br: Vec<f64> = (0..grid.nx).map(|i| b[i][j]).collect();
        for i in 0..grid.nx {
            let (ax, bx) = (diff(&ar, i, dx), diff(&br, i, dx));
            let rhs = (1.0 + 2.0 * ar[i] / br[i]) * bx;
            r1 = r1.max((ax - rhs).abs());
            s1 = s1.max(ax.abs()).max(rhs.abs());
        }
    }
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let (ay, by) = (diff(&a[i], j, dy), diff(&b[i], j, dy));
            let rhs = (1.0 + 2.0 * b[i][j] / a[i][j]) * ay;
            r2 = r2.max((by - rhs).abs());
            s2 = s2.max(by.abs()).max(rhs.abs());
        }
    }
    // a metric of revolution has a ≡ const in x: fall back to the value scale
    let scaled = |r: f64, s: f64, v: f64| r / s.max(1e-3 * v);
    let amax = a.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let bmax = b.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let pde9 = scaled(r1, s1, amax / (grid.x.1 - grid.x.0)).max(scaled(
        r2,
        s2,
        bmax / (grid.y.1 - grid.y.0),
    ));

    let fv: Vec<Vec<f64>> = (0..grid.nx)
        .map(|i| {
            (0..grid.ny)
                .map(|j| (a[i][j] + b[i][j]).sqrt() / a[i][j])
                .collect()
        })
        .collect();
    let gv: Vec<Vec<f64>> = (0..grid.nx)
        .map(|i| {
            (0..grid.ny)
                .map(|j| (a[i][j] + b[i][j]).sqrt() / b[i][j])
                .collect()
        })
        .collect();
    let spread = |it: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = it.collect();
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                (l.min(*x), h.max(*x))
            });
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        ((hi - lo) / mean.abs(), mean)
    };
    let mut separation = 0.0f64;
    let mut f = vec![0.0; grid.nx];
    let mut g = vec![0.0; grid.ny];
    for i in 0..grid.nx {
        let (s, m) = spread(&mut fv[i].iter().cloned());
        separation = separation.max(s);
        f[i] = m;
    }
    for j in 0..grid.ny {
        let (s, m) = spread(&mut (0..grid.nx).map(|i| gv[i][j]));
        separation = separation.max(s);
        g[j] = m;
    }
    let mut liouville = 0.0f64;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let w = 1.0 / f[i] + 1.0 / g[j];
            liouville = liouville
                .max((a[i][j] * f[i] - w).abs() / w)
                .max((b[i][j] * g[j] - w).abs() / w);
        }
    }
    let i0 = grid.nx / 2;
    let mut ode = 0.0f64;
    for j in 0..grid.ny {
        let c1 = (a[i0][j] + b[i0][j]) / (b[i0][j] * b[i0][j]);
        for i in 0..grid.nx {
            ode = ode.max((a[i][j] - (c1 * b[i][j] * b[i][j] - b[i][j])).abs() / a[i][j]);
        }
    }
    let report = ReconstructionReport {
        orthogonality,
        diagonal_kappa: kappa,
        pde9_residual: pde9,
        separation_residual: separation,
        liouville_residual: liouville,
        ode_residual: ode,
    };
    for ((stage, tol), v) in ReconstructionReport::TOLERANCES.iter().zip(report.values()) {
        if !(v <= 10.0 * tol) {
            return Err(Error::ReconstructionFailed {
                stage: stage.to_string(),
                residual: v,
                limit: 10.0 * tol,
            });
        }
    }
    let u = cumulative_trapezoid(&xs, &f.iter().map(|f| 1.0 / f.sqrt()).collect::<Vec<_>>());
    let v = cumulative_trapezoid(&ys, &g.iter().map(|g| 1.0 / g.sqrt()).collect::<Vec<_>>());
    let chart = tabulated_chart(gamma, param, grid)?;
    Ok(Reconstruction {
        chart,
        x: xs,
        y: ys,
        a,
        b,
        f,
        g,
        u,
        v,
        report,
    })
}

/// Chebyshev interpolant of the pulled-back metric over the grid rectangle.
fn tabulated_chart(
    gamma: &ConvexCurve,
    param: &PoritskyParam,
    grid: &ReconstructionGrid,
) -> Result<MetricChart> {
    let n = 20;
    let xs = crate::numeric::cheb::lobatto_points(grid.x.0, grid.x.1, n);
    let ys = crate::numeric::cheb::lobatto_points(grid.y.0, grid.y.1, n);
    let rows: Vec<Result<Vec<[f64; 3]>>> = xs
        .par_iter()
        .map(|&x| {
            ys.iter()
                .map(|&y| pullback(gamma, param, x, y, grid.step))
                .collect()
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let comp = |k: usize| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().map(|m| m[k]).collect())
            .collect()
    };
    let t = TabulatedMetric::new(
        Cheb2::from_values(grid.x, grid.y, &comp(0)),
        Cheb2::from_values(grid.x, grid.y, &comp(1)),
        Cheb2::from_values(grid.x, grid.y, &comp(2)),
    );
    Ok(MetricChart::new(
        ChartKind::Tabulated(Arc::new(t)),
        Domain::new(grid.x, grid.y, 0.0),
    ))
}
