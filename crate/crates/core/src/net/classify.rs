//! Classification of sampled planar orthogonal nets into the four Liouville
//! types: confocal central conics, confocal coaxial parabolas, circles with
//! radial lines, and two families of parallel lines.

use std::collections::BTreeMap;
use std::io::Read;

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fornberg_weights;

/// A conic `pᵀ Q p = 0` with `p = (x, y, 1)`, scaled to unit Frobenius norm
/// with the first non-negligible diagonal entry positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicQuadric {
    pub q: [[f64; 3]; 3],
}

impl ConicQuadric {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let m = 0.5 * (m + m.transpose());
        let n = m.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("zero conic matrix".into()));
        }
        let mut m = m / n;
        let lead = (0..3)
            .map(|i| m[(i, i)])
            .find(|d| d.abs() > 1e-12)
            .unwrap_or(1.0);
        if lead < 0.0 {
            m = -m;
        }
        let mut q = [[0.0; 3]; 3];
        for (i, row) in q.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = m[(i, j)];
            }
        }
        Ok(ConicQuadric { q })
    }

    /// From `a x² + b xy + c y² + d x + e y + f`.
    pub fn from_coeffs(c: [f64; 6]) -> Result<Self> {
        Self::new(Matrix3::new(
            c[0],
            0.5 * c[1],
            0.5 * c[3],
            0.5 * c[1],
            c[2],
            0.5 * c[4],
            0.5 * c[3],
            0.5 * c[4],
            c[5],
        ))
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.q[i][j])
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let v = nalgebra::Vector3::new(p[0], p[1], 1.0);
        (v.transpose() * self.matrix() * v)[0]
    }

    /// First-order distance from `p` to the conic, `|F| / |∇F|`.
    pub fn sampson(&self, p: [f64; 2]) -> f64 {
        let q = &self.q;
        let gx = 2.0 * (q[0][0] * p[0] + q[0][1] * p[1] + q[0][2]);
        let gy = 2.0 * (q[1][0] * p[0] + q[1][1] * p[1] + q[1][2]);
        self.eval(p).abs() / gx.hypot(gy)
    }

    /// The conic in the frame whose coordinates map to the plane by `t`.
    pub fn in_frame(&self, t: &Matrix3<f64>) -> Result<Self> {
        Self::new(t.transpose() * self.matrix() * t)
    }

    /// Algebraic least-squares fit (smallest right singular vector) after
    /// moving the centroid to the origin and scaling the mean radius to √2.
    pub fn fit(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 6 {
            return Err(Error::InvalidParameter(
                "a conic fit needs at least 6 points".into(),
            ));
        }
        let n = normalizer(points);
        let rows: Vec<[f64; 2]> = points.iter().map(|p| apply(&n, *p)).collect();
        let a = DMatrix::from_fn(rows.len(), 6, |i, k| {
            let [x, y] = rows[i];
            [x * x, x * y, y * y, x, y, 1.0][k]
        });
        let c = smallest_singular_vector(a);
        let qn = ConicQuadric::from_coeffs([c[0], c[1], c[2], c[3], c[4], c[5]])?;
        qn.in_frame(&n)
    }
}

/// Isotropic normalization `p ↦ s (p − centroid)` as a homogeneous matrix.
fn normalizer(points: &[[f64; 2]]) -> Matrix3<f64> {
    let m = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / m;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / m;
    let r = points
        .iter()
        .map(|p| (p[0] - cx).hypot(p[1] - cy))
        .sum::<f64>()
        / m;
    let s = std::f64::consts::SQRT_2 / r;
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

fn apply(t: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    [
        t[(0, 0)] * p[0] + t[(0, 1)] * p[1] + t[(0, 2)],
        t[(1, 0)] * p[0] + t[(1, 1)] * p[1] + t[(1, 2)],
    ]
}

fn smallest_singular_vector(a: DMatrix<f64>) -> Vec<f64> {
    let cols = a.ncols();
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let k = (0..svd.singular_values.len())
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .unwrap_or(0);
    (0..cols).map(|j| vt[(k, j)]).collect()
}

/// Images `(x, y)` of a rectangular `(u, v)` grid; `points[i][j]` is the
/// image of `(u[i], v[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledNet {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub points: Vec<Vec<[f64; 2]>>,
}

impl SampledNet {
    pub fn new(u: Vec<f64>, v: Vec<f64>, points: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        if points.len() != u.len() || points.iter().any(|r| r.len() != v.len()) {
            return Err(Error::InvalidParameter(
                "net grid is not rectangular".into(),
            ));
        }
        let net = SampledNet { u, v, points };
        for i in 0..net.u.len() {
            for j in 0..net.v.len() {
                let p = net.points[i][j];
                let distinct = |q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]) > 0.0;
                if (i + 1 < net.u.len() && !distinct(net.points[i + 1][j]))
                    || (j + 1 < net.v.len() && !distinct(net.points[i][j + 1]))
                {
                    return Err(Error::InvalidParameter(format!(
                        "adjacent samples coincide at ({}, {})",
                        net.u[i], net.v[j]
                    )));
                }
            }
        }
        Ok(net)
    }

    pub fn from_fn<F>(u: Vec<f64>, v: Vec<f64>, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, f64) -> [f64; 2],
    {
        let points = u
            .iter()
            .map(|&a| v.iter().map(|&b| f(a, b)).collect())
            .collect();
        Self::new(u, v, points)
    }

    /// Rows `(u, v, x, y)` in any order; the `u` and `v` values must form a
    /// full grid.
    pub fn from_rows(rows: &[[f64; 4]]) -> Result<Self> {
        let uniq = |k: usize| {
            let mut s: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            s.sort_by(f64::total_cmp);
            s.dedup();
            s
        };
        let (u, v) = (uniq(0), uniq(1));
        if u.len() * v.len() != rows.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows do not form a {}x{} grid",
                rows.len(),
                u.len(),
                v.len()
            )));
        }
        let mut points = vec![vec![[f64::NAN; 2]; v.len()]; u.len()];
        for r in rows {
            let i = u.partition_point(|&x| x < r[0]);
            let j = v.partition_point(|&x| x < r[1]);
            points[i][j] = [r[2], r[3]];
        }
        if points.iter().flatten().any(|p| p[0].is_nan()) {
            return Err(Error::InvalidParameter("grid has duplicate rows".into()));
        }
        Self::new(u, v, points)
    }

    /// CSV with header `u,v,x,y`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let (u, v, x, y): (f64, f64, f64, f64) = rec?;
            rows.push([u, v, x, y]);
        }
        Self::from_rows(&rows)
    }

    /// The same net with every image point mapped by `f`.
    pub fn map<F: Fn([f64; 2]) -> [f64; 2]>(&self, f: F) -> Self {
        SampledNet {
            u: self.u.clone(),
            v: self.v.clone(),
            points: self
                .points
                .iter()
                .map(|r| r.iter().map(|p| f(*p)).collect())
                .collect(),
        }
    }

    /// Exchanges the roles of `u` and `v`.
    pub fn transposed(&self) -> Self {
        SampledNet {
            u: self.v.clone(),
            v: self.u.clone(),
            points: (0..self.v.len())
                .map(|j| (0..self.u.len()).map(|i| self.points[i][j]).collect())
                .collect(),
        }
    }

    fn u_curve(&self, i: usize) -> &[[f64; 2]] {
        &self.points[i]
    }

    /// Root-mean-square distance of the samples from their centroid.
    fn scale(&self) -> f64 {
        let all: Vec<[f64; 2]> = self.points.iter().flatten().cloned().collect();
        let m = all.len() as f64;
        let cx = all.iter().map(|p| p[0]).sum::<f64>() / m;
        let cy = all.iter().map(|p| p[1]).sum::<f64>() / m;
        (all.iter()
            .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
            .sum::<f64>()
            / m)
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetClass {
    /// Confocal ellipses and hyperbolas (concentric circles in the limit).
    ConfocalCentral,
    /// Confocal coaxial parabolas.
    ConfocalParabolic,
    /// Concentric circles and their radial lines.
    Polar,
    /// Two orthogonal families of parallel lines.
    OrthogonalLines,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetClassification {
    #[serde(rename = "type")]
    pub class: NetClass,
    /// Fitted parameters; which keys appear depends on the type.
    pub parameters: BTreeMap<String, f64>,
    /// Residual of every stage that ran, relative to the net's size.
    pub residuals: BTreeMap<String, f64>,
    /// The `u` and `v` roles were exchanged before the conic stages (the
    /// `u`-curves were straight and the `v`-curves were not).
    pub transposed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOptions {
    pub tol_line: f64,
    pub tol_conic: f64,
    /// Relative tolerance for the signature of the family's derivative.
    pub tol_signature: f64,
    /// Smallest-to-largest eigenvalue ratio of the quadratic part below which
    /// a conic counts as a parabola.
    pub tol_parabolic: f64,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        ClassifierOptions {
            tol_line: 1e-7,
            tol_conic: 1e-7,
            tol_signature: 1e-4,
            tol_parabolic: 1e-6,
        }
    }
}

struct LineFit {
    point: [f64; 2],
    normal: [f64; 2],
    residual: f64,
}

fn fit_line(points: &[[f64; 2]]) -> LineFit {
    let m = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / m;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / m;
    let mut cov = Matrix2::zeros();
    for p in points {
        let d = Vector2::new(p[0] - cx, p[1] - cy);
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        0
    } else {
        1
    };
    let n = [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]];
    let residual = points
        .iter()
        .map(|p| ((p[0] - cx) * n[0] + (p[1] - cy) * n[1]).abs())
        .fold(0.0, f64::max);
    LineFit {
        point: [cx, cy],
        normal: n,
        residual,
    }
}

/// Least-squares common point of a set of lines and its largest distance to
/// them.
fn concurrency(lines: &[LineFit]) -> Option<([f64; 2], f64)> {
    let mut a = Matrix2::zeros();
    let mut b = Vector2::zeros();
    for l in lines {
        let n = Vector2::new(l.normal[0], l.normal[1]);
        a += n * n.transpose();
        b += n * (n[0] * l.point[0] + n[1] * l.point[1]);
    }
    let c = a.lu().solve(&b)?;
    let d = lines
        .iter()
        .map(|l| (l.normal[0] * (c[0] - l.point[0]) + l.normal[1] * (c[1] - l.point[1])).abs())
        .fold(0.0, f64::max);
    Some(([c[0], c[1]], d))
}

/// Algebraic circle fit `x² + y² + Dx + Ey + F = 0`: centre, radius and the
/// largest radial residual.
fn fit_circle(points: &[[f64; 2]]) -> Option<([f64; 2], f64, f64)> {
    let n = normalizer(points);
    let rows: Vec<[f64; 2]> = points.iter().map(|p| apply(&n, *p)).collect();
    let a = DMatrix::from_fn(rows.len(), 4, |i, k| {
        let [x, y] = rows[i];
        [x * x + y * y, x, y, 1.0][k]
    });
    let c = smallest_singular_vector(a);
    if c[0].abs() < 1e-12 {
        return None;
    }
    let s = n[(0, 0)];
    let (cx, cy) = (-c[1] / (2.0 * c[0]), -c[2] / (2.0 * c[0]));
    let r2 = cx * cx + cy * cy - c[3] / c[0];
    if !(r2 > 0.0) {
        return None;
    }
    // back to the plane: p = (p_n − t) / s
    let centre = [(cx - n[(0, 2)]) / s, (cy - n[(1, 2)]) / s];
    let r = r2.sqrt() / s;
    let resid = points
        .iter()
        .map(|p| ((p[0] - centre[0]).hypot(p[1] - centre[1]) - r).abs())
        .fold(0.0, f64::max);
    Some((centre, r, resid))
}

/// Least-squares affine map sending `from[j]` to `to[j]`; largest residual.
fn affine_residual(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    let a = DMatrix::from_fn(from.len(), 3, |i, k| [from[i][0], from[i][1], 1.0][k]);
    let svd = a.clone().svd(true, true);
    let mut worst: f64 = 0.0;
    for c in 0..2 {
        let b = DMatrix::from_fn(to.len(), 1, |i, _| to[i][c]);
        let Ok(x) = svd.solve(&b, 1e-14) else {
            return f64::INFINITY;
        };
        let r = &a * x - b;
        worst = worst.max(r.amax());
    }
    worst
}

fn angle_mod_pi(d: [f64; 2]) -> f64 {
    d[1].atan2(d[0]).rem_euclid(std::f64::consts::PI)
}

/// Classifies a sampled orthogonal net. Straight families are tested first
/// (parallel lines, or concurrent lines with concentric circles); otherwise
/// the `u`-curves must be conics related by affine maps, and the derivative
/// of their matrices along the family must have the confocal signature.
pub fn classify_planar_net(
    net: &SampledNet,
    opts: &ClassifierOptions,
) -> Result<NetClassification> {
    if net.u.len() < 8 || net.v.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "net grid {}x{} is smaller than 8x8",
            net.u.len(),
            net.v.len()
        )));
    }
    let scale = net.scale();
    let mut residuals = BTreeMap::new();
    let mut parameters = BTreeMap::new();
    let out = |class, parameters, residuals, transposed| {
        Ok(NetClassification {
            class,
            parameters,
            residuals,
            transposed,
        })
    };

    let tn = net.transposed();
    let u_lines: Vec<LineFit> = net.points.iter().map(|c| fit_line(c)).collect();
    let v_lines: Vec<LineFit> = tn.points.iter().map(|c| fit_line(c)).collect();
    let worst = |ls: &[LineFit]| ls.iter().map(|l| l.residual).fold(0.0, f64::max) / scale;
    let (ru, rv) = (worst(&u_lines), worst(&v_lines));
    residuals.insert("line_u".into(), ru);
    residuals.insert("line_v".into(), rv);
    let (u_straight, v_straight) = (ru < opts.tol_line, rv < opts.tol_line);

    if u_straight && v_straight {
        let spread = |ls: &[LineFit]| {
            let a0 = angle_mod_pi(ls[0].normal);
            ls.iter()
                .map(|l| {
                    let d = (angle_mod_pi(l.normal) - a0).rem_euclid(std::f64::consts::PI);
                    d.min(std::f64::consts::PI - d)
                })
                .fold(0.0, f64::max)
        };
        let par = spread(&u_lines).max(spread(&v_lines));
        residuals.insert("parallel".into(), par);
        if par < opts.tol_signature {
            // direction of the u-lines
            let n = u_lines[0].normal;
            parameters.insert("angle".into(), angle_mod_pi([-n[1], n[0]]));
            return out(NetClass::OrthogonalLines, parameters, residuals, false);
        }
        return out(NetClass::Unclassified, parameters, residuals, false);
    }

    if u_straight || v_straight {
        let (lines, curves, transposed) = if u_straight {
            (&u_lines, &tn, false)
        } else {
            (&v_lines, net, true)
        };
        let (centre, conc) = concurrency(lines).unwrap_or(([f64::NAN; 2], f64::INFINITY));
        residuals.insert("concurrency".into(), conc / scale);
        let mut circ: f64 = 0.0;
        let mut offset: f64 = 0.0;
        for c in &curves.points {
            match fit_circle(c) {
                Some((cc, _, r)) => {
                    circ = circ.max(r);
                    offset = offset.max((cc[0] - centre[0]).hypot(cc[1] - centre[1]));
                }
                None => circ = f64::INFINITY,
            }
        }
        residuals.insert("circle".into(), circ / scale);
        residuals.insert("concentricity".into(), offset / scale);
        if conc / scale < opts.tol_line
            && circ / scale < opts.tol_conic
            && offset / scale < opts.tol_signature
        {
            parameters.insert("center_x".into(), centre[0]);
            parameters.insert("center_y".into(), centre[1]);
            return out(NetClass::Polar, parameters, residuals, transposed);
        }
        return out(NetClass::Unclassified, parameters, residuals, transposed);
    }

    // conic family: every u-curve a conic ...
    let mut conics = Vec::with_capacity(net.u.len());
    let mut rc: f64 = 0.0;
    for i in 0..net.u.len() {
        let q = ConicQuadric::fit(net.u_curve(i))?;
        let r = net
            .u_curve(i)
            .iter()
            .map(|p| q.sampson(*p))
            .fold(0.0, f64::max);
        rc = rc.max(r / scale);
        conics.push(q);
    }
    residuals.insert("conic".into(), rc);
    if !(rc < opts.tol_conic) {
        return out(NetClass::Unclassified, parameters, residuals, false);
    }
    // ... and consecutive curves affine images of each other, matched along v
    let ra = (0..net.u.len() - 1)
        .map(|i| affine_residual(net.u_curve(i), net.u_curve(i + 1)))
        .fold(0.0, f64::max)
        / scale;
    residuals.insert("affine".into(), ra);
    if !(ra < opts.tol_conic) {
        return out(NetClass::Unclassified, parameters, residuals, false);
    }

    let i0 = net.u.len() / 2;
    let q0 = conics[i0].matrix();
    let quad = Matrix2::new(q0[(0, 0)], q0[(0, 1)], q0[(1, 0)], q0[(1, 1)]);
    let eig = SymmetricEigen::new(quad);
    let (lmin, lmax) = if eig.eigenvalues[0].abs() <= eig.eigenvalues[1].abs() {
        (0, 1)
    } else {
        (1, 0)
    };
    let ratio = eig.eigenvalues[lmin].abs() / eig.eigenvalues[lmax].abs();
    residuals.insert("parabolic_ratio".into(), ratio);
    let col = |k: usize| [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]];
    let frame = |e1: [f64; 2], e2: [f64; 2], o: [f64; 2]| {
        Matrix3::new(e1[0], e2[0], o[0], e1[1], e2[1], o[1], 0.0, 0.0, 1.0)
    };

    let (class, t, basis, norm_entry) = if ratio < opts.tol_parabolic {
        // axis along the degenerate direction; focus at the origin
        let (ep, mut ea) = (col(lmax), col(lmin));
        let mut q1 = conics[i0].in_frame(&frame(ep, ea, [0.0, 0.0]))?.q;
        if q1[1][2] * q1[0][0] < 0.0 {
            ea = [-ea[0], -ea[1]];
            q1 = conics[i0].in_frame(&frame(ep, ea, [0.0, 0.0]))?.q;
        }
        let (k, d, e, f) = (q1[0][0], q1[0][2], q1[1][2], q1[2][2]);
        let x0 = -d / k;
        let fp = f - d * d / k;
        let a = k / e;
        let yf = -fp / (2.0 * e) - 1.0 / (2.0 * a);
        let o = [x0 * ep[0] + yf * ea[0], x0 * ep[1] + yf * ea[1]];
        parameters.insert("focus_x".into(), o[0]);
        parameters.insert("focus_y".into(), o[1]);
        // direction in which the reference parabola opens
        parameters.insert("axis_angle".into(), (-ea[1]).atan2(-ea[0]));
        parameters.insert("focal_length".into(), 0.5 / a);
        let basis = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 0.0, 1.0 / (a * a)));
        (
            NetClass::ConfocalParabolic,
            frame(ep, ea, o),
            basis,
            (1, 2, 1.0),
        )
    } else {
        let b0 = Vector2::new(q0[(0, 2)], q0[(1, 2)]);
        let Some(c) = quad.lu().solve(&(-b0)) else {
            return out(NetClass::Unclassified, parameters, residuals, false);
        };
        let c = [c[0], c[1]];
        let semi = |q: &ConicQuadric| (-q.q[2][2] / q.q[0][0], -q.q[2][2] / q.q[1][1]);
        let (mut e1, mut e2) = (col(0), col(1));
        let (a0, b0) = semi(&conics[i0].in_frame(&frame(e1, e2, c))?);
        if a0 < b0 {
            std::mem::swap(&mut e1, &mut e2);
        }
        let t = frame(e1, e2, c);
        let (a0, b0) = semi(&conics[i0].in_frame(&t)?);
        parameters.insert("center_x".into(), c[0]);
        parameters.insert("center_y".into(), c[1]);
        parameters.insert("angle".into(), angle_mod_pi(e1));
        parameters.insert("a_ref".into(), a0);
        parameters.insert("b_ref".into(), b0);
        parameters.insert("focal_c2".into(), a0 - b0);
        // family offsets when u is the confocal parameter: A(u) = a + u
        let mut sa = Vec::new();
        let mut sb = Vec::new();
        for (q, u) in conics.iter().zip(&net.u) {
            let (ai, bi) = semi(&q.in_frame(&t)?);
            sa.push(ai - u);
            sb.push(bi - u);
        }
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let spread = |s: &[f64]| {
            let m = mean(s);
            s.iter().map(|x| (x - m).abs()).fold(0.0, f64::max)
        };
        parameters.insert("a".into(), mean(&sa));
        parameters.insert("b".into(), mean(&sb));
        residuals.insert("label_offset_spread".into(), spread(&sa).max(spread(&sb)));
        let qf = conics[i0].in_frame(&t)?.q;
        let basis = Matrix3::from_diagonal(&nalgebra::Vector3::new(
            qf[0][0].powi(2),
            qf[1][1].powi(2),
            0.0,
        ));
        (NetClass::ConfocalCentral, t, basis, (2, 2, -1.0))
    };

    // Derivative of the family at γ_0 in its principal frame. The dual conics
    // are differenced, scaled so one entry is fixed: confocal families are
    // straight lines in the dual, so labels affine in the family parameter
    // give exact differences. Q̇ then follows from d(Q*⁻¹) = −Q Q̇* Q.
    let (ni, nj, nv) = norm_entry;
    let dual = |k: usize| -> Result<Matrix3<f64>> {
        let d = conics[k]
            .in_frame(&t)?
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::Geometry("degenerate conic in the family".into()))?;
        Ok(d * (nv / d[(ni, nj)]))
    };
    let lo = i0.saturating_sub(4);
    let hi = (i0 + 4).min(net.u.len() - 1);
    let w = fornberg_weights(net.u[i0], &net.u[lo..=hi], 1);
    let mut ddot = Matrix3::zeros();
    for (k, wk) in w.iter().enumerate() {
        ddot += *wk * dual(lo + k)?;
    }
    let m0 = dual(i0)?
        .try_inverse()
        .ok_or_else(|| Error::Geometry("degenerate reference conic".into()))?;
    let qdot = -m0 * ddot * m0;
    // Q̇ must lie in span{Q_0, signature}: the Q_0 part is the normalization
    let a = DMatrix::from_fn(9, 2, |r, k| {
        let (i, j) = (r / 3, r % 3);
        if k == 0 {
            m0[(i, j)]
        } else {
            basis[(i, j)]
        }
    });
    let b = DMatrix::from_fn(9, 1, |r, _| qdot[(r / 3, r % 3)]);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Geometry(e.to_string()))?;
    let sig = (&a * &x - &b).norm() / qdot.norm();
    residuals.insert("signature".into(), sig);
    if sig < opts.tol_signature {
        out(class, parameters, residuals, false)
    } else {
        out(NetClass::Unclassified, parameters, residuals, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{cartesian_from_elliptic, EllipticCoordSpec};

    fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn confocal_net(a: f64, b: f64) -> SampledNet {
        let spec = EllipticCoordSpec::new(a, b).unwrap();
        SampledNet::from_fn(lin(0.2, 1.6, 10), lin(-a + 0.05, -b - 0.05, 10), |l, m| {
            let (x, y) = cartesian_from_elliptic(&spec, l, m).unwrap();
            [x, y]
        })
        .unwrap()
    }

    fn parabolic_net(a: f64) -> SampledNet {
        SampledNet::from_fn(lin(0.5, 1.5, 9), lin(0.4, 1.4, 9), |u, v| {
            [0.5 * a * (u * u - v * v), a * u * v]
        })
        .unwrap()
    }

    fn polar_net(c: [f64; 2]) -> SampledNet {
        SampledNet::from_fn(lin(0.5, 2.0, 8), lin(0.1, 2.5, 8), |r, t| {
            [c[0] + r * t.cos(), c[1] + r * t.sin()]
        })
        .unwrap()
    }

    fn rigid(theta: f64, shift: [f64; 2]) -> impl Fn([f64; 2]) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        move |p| {
            [
                c * p[0] - s * p[1] + shift[0],
                s * p[0] + c * p[1] + shift[1],
            ]
        }
    }

    /// Distance between angles modulo π.
    fn dangle(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(std::f64::consts::PI);
        d.min(std::f64::consts::PI - d)
    }

    fn classify(net: &SampledNet) -> NetClassification {
        classify_planar_net(net, &ClassifierOptions::default()).unwrap()
    }

    #[test]
    fn conic_fit_recovers_an_ellipse() {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = 0.3 * k as f64;
                [1.0 + 2.0 * t.cos(), -0.5 + t.sin()]
            })
            .collect();
        let q = ConicQuadric::fit(&pts).unwrap();
        let want =
            ConicQuadric::from_coeffs([0.25, 0.0, 1.0, -0.5, 1.0, 0.25 + 0.25 - 1.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((q.q[i][j] - want.q[i][j]).abs() < 1e-12);
            }
        }
        assert!((q.matrix().norm() - 1.0).abs() < 1e-14 && q.q[0][0] > 0.0);
    }

    #[test]
    fn cartesian_grid_is_type_four() {
        let net = SampledNet::from_fn(lin(0.0, 1.0, 8), lin(-1.0, 2.0, 8), |u, v| [u, v]).unwrap();
        let c = classify(&net);
        assert_eq!(c.class, NetClass::OrthogonalLines);
        assert!(dangle(c.parameters["angle"], std::f64::consts::FRAC_PI_2) < 1e-12);
        let r = classify(&net.map(rigid(0.3, [2.0, 1.0])));
        assert_eq!(r.class, NetClass::OrthogonalLines);
        assert!(dangle(r.parameters["angle"], std::f64::consts::FRAC_PI_2 + 0.3) < 1e-10);
    }

    #[test]
    fn polar_net_is_type_three() {
        let c = classify(&polar_net([0.3, -0.7]));
        assert_eq!(c.class, NetClass::Polar, "{c:?}");
        assert!(c.transposed);
        assert!((c.parameters["center_x"] - 0.3).abs() < 1e-8);
        assert!((c.parameters["center_y"] + 0.7).abs() < 1e-8);
        // radial lines as u-curves
        let t = classify(&polar_net([0.0, 0.0]).transposed());
        assert_eq!(t.class, NetClass::Polar);
        assert!(!t.transposed);
    }

    #[test]
    fn confocal_net_is_type_one() {
        let c = classify(&confocal_net(2.0, 1.0));
        assert_eq!(c.class, NetClass::ConfocalCentral, "{c:?}");
        assert!((c.parameters["a"] - 2.0).abs() < 1e-5 && (c.parameters["b"] - 1.0).abs() < 1e-5);
        assert!(c.parameters["center_x"].abs() < 1e-8 && dangle(c.parameters["angle"], 0.0) < 1e-8);
        // the hyperbola family classifies the same way
        let h = classify(&confocal_net(2.0, 1.0).transposed());
        assert_eq!(h.class, NetClass::ConfocalCentral, "{h:?}");
        assert!((h.parameters["focal_c2"] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn parabolic_net_is_type_two() {
        let c = classify(&parabolic_net(1.5));
        assert_eq!(c.class, NetClass::ConfocalParabolic, "{c:?}");
        assert!(c.parameters["focus_x"].abs() < 1e-8 && c.parameters["focus_y"].abs() < 1e-8);
        // axis of the u-parabolas points along −x
        assert!((c.parameters["axis_angle"].abs() - std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn classification_is_equivariant() {
        let m = rigid(0.7, [-1.0, 3.0]);
        let c = classify(&confocal_net(2.0, 1.0).map(&m));
        assert_eq!(c.class, NetClass::ConfocalCentral);
        assert!((c.parameters["center_x"] + 1.0).abs() < 1e-7);
        assert!((c.parameters["center_y"] - 3.0).abs() < 1e-7);
        assert!(dangle(c.parameters["angle"], 0.7) < 1e-7);
        assert!((c.parameters["a"] - 2.0).abs() < 1e-5);
        let p = classify(&parabolic_net(1.0).map(&m));
        assert_eq!(p.class, NetClass::ConfocalParabolic);
        assert!((p.parameters["focus_x"] + 1.0).abs() < 1e-7);
        assert!((p.parameters["focus_y"] - 3.0).abs() < 1e-7);
        let r = classify(&polar_net([0.0, 0.0]).map(&m));
        assert!((r.parameters["center_x"] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn stable_under_small_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut jitter = |net: SampledNet| {
            let noise: Vec<[f64; 2]> = (0..net.u.len() * net.v.len())
                .map(|_| [rng.random_range(-1e-9..1e-9), rng.random_range(-1e-9..1e-9)])
                .collect();
            let mut k = 0;
            let mut out = net.clone();
            for row in out.points.iter_mut() {
                for p in row.iter_mut() {
                    p[0] += noise[k][0];
                    p[1] += noise[k][1];
                    k += 1;
                }
            }
            out
        };
        let grid = SampledNet::from_fn(lin(0.0, 1.0, 8), lin(0.0, 1.0, 8), |u, v| [u, v]).unwrap();
        assert_eq!(classify(&jitter(grid)).class, NetClass::OrthogonalLines);
        assert_eq!(
            classify(&jitter(polar_net([0.0, 0.0]))).class,
            NetClass::Polar
        );
        let c = classify(&jitter(confocal_net(2.0, 1.0)));
        assert_eq!(c.class, NetClass::ConfocalCentral, "{c:?}");
        assert!((c.parameters["a"] - 2.0).abs() < 1e-5);
        let p = classify(&jitter(parabolic_net(1.5)));
        assert_eq!(p.class, NetClass::ConfocalParabolic, "{p:?}");
    }

    #[test]
    fn generic_orthogonal_net_is_unclassified() {
        // conformal image of a grid under z + 0.1 z³
        let net = SampledNet::from_fn(lin(0.2, 1.0, 9), lin(0.1, 0.9, 9), |x, y| {
            let (x2, y2) = (x * x, y * y);
            [
                x + 0.1 * (x * x2 - 3.0 * x * y2),
                y + 0.1 * (3.0 * x2 * y - y * y2),
            ]
        })
        .unwrap();
        let c = classify(&net);
        assert_eq!(c.class, NetClass::Unclassified);
        assert!(c.residuals["conic"] > 1e-7);
    }

    #[test]
    fn coaxial_but_not_confocal_is_unclassified() {
        // ellipses x²/(2+u) + y²/(1+2u) = 1 sampled at matching angles
        let net = SampledNet::from_fn(lin(0.2, 1.0, 8), lin(0.1, 1.4, 8), |u, t| {
            [(2.0 + u).sqrt() * t.cos(), (1.0 + 2.0 * u).sqrt() * t.sin()]
        })
        .unwrap();
        let c = classify(&net);
        assert_eq!(c.class, NetClass::Unclassified, "{c:?}");
        assert!(c.residuals["signature"] > 1e-4);
    }

    #[test]
    fn csv_rows_round_trip() {
        let net = polar_net([0.0, 0.0]);
        let mut text = String::from("u,v,x,y\n");
        for (i, u) in net.u.iter().enumerate().rev() {
            for (j, v) in net.v.iter().enumerate() {
                let p = net.points[i][j];
                text += &format!("{u:e},{v:e},{:e},{:e}\n", p[0], p[1]);
            }
        }
        assert_eq!(SampledNet::read_csv(text.as_bytes()).unwrap(), net);
        assert!(SampledNet::read_csv("u,v,x,y\n0,0,1,1\n1,1,2,2\n0,1,3,3\n".as_bytes()).is_err());
    }
}
