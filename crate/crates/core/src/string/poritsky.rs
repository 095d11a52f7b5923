//! Conjugating string diffeomorphisms of a closed curve to rigid shifts.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::solve_offset;
use crate::billiard::RotationNumber;
use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::numeric::birkhoff_weights;
use crate::numeric::roots::brent;

/// How `t` is evaluated between orbit points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugacyMethod {
    /// Interpolated normalized rank of the sorted orbit.
    Rank,
    /// Trigonometric series for `τ(t) − t`, with coefficients from weighted
    /// Birkhoff averages along the orbit (`t_k = kρ`). Smooth, so it can be
    /// differentiated.
    Spectral,
}

/// A parameter `t ∈ [0, 1)` on a closed curve in which one string
/// diffeomorphism is the shift by ρ. `t(base) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoritskyParam {
    pub p_ref: f64,
    pub n: usize,
    pub rho: f64,
    /// Discrepancy between the rotation estimates of the two orbit halves.
    pub rho_error: f64,
    pub base: f64,
    /// Orbit parameters sorted into `[0, 1)`.
    knots: Vec<f64>,
    /// Index of the base point among `knots`.
    base_rank: usize,
    /// `τ(t) = base + t + Σ (c_m cos 2πmt + s_m sin 2πmt)`, constant term zero.
    cos: Vec<f64>,
    sin: Vec<f64>,
}

const MODES: usize = 96;

/// Denominator bound and distance used to reject nearly rational rotation.
const RESONANCE_DEN: u32 = 20;
const RESONANCE_GAP: f64 = 1e-4;

fn check_resonance(rho: f64) -> Result<()> {
    for den in 1..=RESONANCE_DEN {
        let num = (rho * den as f64).round();
        let distance = (rho - num / den as f64).abs();
        if distance < RESONANCE_GAP {
            return Err(Error::IllConditionedConjugacy {
                rho,
                num: num as u32,
                den,
                distance,
            });
        }
    }
    Ok(())
}

/// Lifted orbit of the string diffeomorphism `T_p`: parameters and advances.
fn lifted_orbit(gamma: &ConvexCurve, p: f64, base: f64, n: usize) -> Result<Vec<f64>> {
    let mut lift = Vec::with_capacity(n + 1);
    let mut a = base;
    lift.push(a);
    let mut guess = None;
    for _ in 0..n {
        let d = solve_offset(gamma, p, gamma.wrap(a), false, guess)?;
        guess = Some(d);
        a += d;
        lift.push(a);
    }
    Ok(lift)
}

fn rotation_from_lift(lift: &[f64]) -> RotationNumber {
    let adv: Vec<f64> = lift.windows(2).map(|w| w[1] - w[0]).collect();
    crate::billiard::weighted_rotation(&adv)
}

/// Builds the conjugacy from an orbit of `N` iterates of `T_{p_ref}` started at
/// parameter `base`.
pub fn poritsky_parameter(
    gamma: &ConvexCurve,
    p_ref: f64,
    n: usize,
    base: f64,
) -> Result<PoritskyParam> {
    if !gamma.is_closed() {
        return Err(Error::InvalidParameter(
            "the shift parameter needs a closed curve".into(),
        ));
    }
    if n < 1000 {
        return Err(Error::InvalidParameter(format!(
            "orbit of {n} points is too short"
        )));
    }
    let base = gamma.wrap(base);
    let lift = lifted_orbit(gamma, p_ref, base, n - 1)?;
    let rot = rotation_from_lift(&lift);
    check_resonance(rot.rho)?;
    let mut knots: Vec<(f64, usize)> = lift
        .iter()
        .enumerate()
        .map(|(k, &x)| (x.rem_euclid(1.0), k))
        .collect();
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let base_rank = knots.iter().position(|k| k.1 == 0).unwrap();
    // Fourier coefficients of h(t) = τ(t) − t − base from weighted averages
    // over t_k = kρ
    let w = birkhoff_weights(lift.len());
    let mut cos = vec![0.0; MODES + 1];
    let mut sin = vec![0.0; MODES + 1];
    for (k, &x) in lift.iter().enumerate() {
        let t = (k as f64 * rot.rho).rem_euclid(1.0);
        let h = x - base - k as f64 * rot.rho;
        let th = TAU * t;
        let (s1, c1) = th.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        for m in 0..=MODES {
            cos[m] += w[k] * h * ck;
            sin[m] += w[k] * h * sk;
            let nc = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = nc;
        }
    }
    for m in 1..=MODES {
        cos[m] *= 2.0;
        sin[m] *= 2.0;
    }
    // h(0) = 0 fixes the phase
    let h0: f64 = cos.iter().sum();
    cos[0] -= h0;
    Ok(PoritskyParam {
        p_ref,
        n,
        rho: rot.rho,
        rho_error: rot.error,
        base,
        knots: knots.into_iter().map(|k| k.0).collect(),
        base_rank,
        cos,
        sin,
    })
}

impl PoritskyParam {
    pub fn t(&self, tau: f64) -> f64 {
        self.eval(tau, ConjugacyMethod::Rank)
    }

    pub fn eval(&self, tau: f64, method: ConjugacyMethod) -> f64 {
        match method {
            ConjugacyMethod::Rank => self.rank_t(tau),
            ConjugacyMethod::Spectral => self.spectral_t(tau),
        }
    }

    pub fn inverse(&self, t: f64, method: ConjugacyMethod) -> f64 {
        match method {
            ConjugacyMethod::Rank => self.rank_inverse(t),
            ConjugacyMethod::Spectral => self.tau_of(t).0.rem_euclid(1.0),
        }
    }

    /// Lifted curve parameter of shift value `t` (smooth conjugacy).
    pub(crate) fn lifted_inverse(&self, t: f64) -> f64 {
        self.tau_of(t).0
    }

    /// Derivative `dτ/dt` of the smooth inverse.
    pub fn inverse_derivative(&self, t: f64) -> f64 {
        self.tau_of(t).1
    }

    fn rank_t(&self, tau: f64) -> f64 {
        let n = self.knots.len();
        let x = tau.rem_euclid(1.0);
        let i = self.knots.partition_point(|&k| k <= x);
        // x lies between knot i−1 and knot i (cyclically)
        let (lo, hi, idx) = if i == 0 {
            (self.knots[n - 1] - 1.0, self.knots[0], -1.0)
        } else if i == n {
            (self.knots[n - 1], self.knots[0] + 1.0, (n - 1) as f64)
        } else {
            (self.knots[i - 1], self.knots[i], (i - 1) as f64)
        };
        let frac = if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
        ((idx + frac - self.base_rank as f64) / n as f64).rem_euclid(1.0)
    }

    fn rank_inverse(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let pos = (t.rem_euclid(1.0) * n as f64 + self.base_rank as f64).rem_euclid(n as f64);
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        let lo = self.knots[i];
        let hi = if i + 1 < n {
            self.knots[i + 1]
        } else {
            self.knots[0] + 1.0
        };
        (lo + frac * (hi - lo)).rem_euclid(1.0)
    }

    /// Lifted `τ(t)` and `dτ/dt`.
    fn tau_of(&self, t: f64) -> (f64, f64) {
        let th = TAU * t;
        let (s1, c1) = th.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let (mut v, mut d) = (0.0, 0.0);
        for m in 0..self.cos.len() {
            let w = TAU * m as f64;
            v += self.cos[m] * ck + self.sin[m] * sk;
            d += w * (self.sin[m] * ck - self.cos[m] * sk);
            let nc = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = nc;
        }
        (self.base + t + v, 1.0 + d)
    }

    fn spectral_t(&self, tau: f64) -> f64 {
        let target = tau.rem_euclid(1.0);
        let mut t = self.rank_t(target);
        for _ in 0..30 {
            let (x, dx) = self.tau_of(t);
            let mut r = x - target;
            r -= r.round();
            let step = r / dx;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        t.rem_euclid(1.0)
    }

    /// Largest Fourier amplitude among the top quarter of the modes, a
    /// truncation indicator for the smooth conjugacy.
    pub fn spectral_tail(&self) -> f64 {
        let m = self.cos.len();
        (3 * m / 4..m)
            .map(|k| self.cos[k].hypot(self.sin[k]))
            .fold(0.0, f64::max)
    }
}

/// Shift defect of one string diffeomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftDefect {
    pub p: f64,
    /// Mean shift `c_p`.
    pub shift: f64,
    /// `max |t(T_p x) − t(x) − c_p|`.
    pub defect: f64,
}

/// Largest shift defect over the string diffeomorphisms `T_p`, `p ∈ p_list`,
/// measured with the interpolated rank on 200 evenly spaced points.
pub fn poritsky_check(gamma: &ConvexCurve, param: &PoritskyParam, p_list: &[f64]) -> Result<f64> {
    let d = poritsky_check_with(gamma, param, p_list, ConjugacyMethod::Rank, 200)?;
    Ok(d.iter().map(|d| d.defect).fold(0.0, f64::max))
}

pub fn poritsky_check_with(
    gamma: &ConvexCurve,
    param: &PoritskyParam,
    p_list: &[f64],
    method: ConjugacyMethod,
    samples: usize,
) -> Result<Vec<ShiftDefect>> {
    use rayon::prelude::*;
    p_list
        .iter()
        .map(|&p| {
            let diffs: Vec<Result<f64>> = (0..samples)
                .into_par_iter()
                .map(|k| {
                    let x = k as f64 / samples as f64;
                    let d = solve_offset(gamma, p, x, false, None)?;
                    let dt = param.eval(x + d, method) - param.eval(x, method);
                    Ok(dt.rem_euclid(1.0))
                })
                .collect();
            let diffs = diffs.into_iter().collect::<Result<Vec<f64>>>()?;
            // shifts below ½ turn; unwrap around the first
            let first = diffs[0];
            let diffs: Vec<f64> = diffs
                .iter()
                .map(|d| first + (d - first - (d - first).round()))
                .collect();
            let shift = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let defect = diffs.iter().map(|d| (d - shift).abs()).fold(0.0, f64::max);
            Ok(ShiftDefect { p, shift, defect })
        })
        .collect()
}

/// Largest arc-length distance between `T_p(T_q(x))` and `T_q(T_p(x))` over
/// `samples` evenly spaced `x`.
pub fn commutation_defect(gamma: &ConvexCurve, p: f64, q: f64, samples: usize) -> Result<f64> {
    use rayon::prelude::*;
    let ell = gamma.length();
    let d: Vec<Result<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let x = k as f64 / samples as f64;
            let step = |p: f64, a: f64| -> Result<f64> {
                Ok(a + solve_offset(gamma, p, gamma.wrap(a), false, None)?)
            };
            let pq = step(p, step(q, x)?)?;
            let qp = step(q, step(p, x)?)?;
            let mut ds = gamma.arc_between(qp, pq);
            if gamma.is_closed() {
                ds -= ell * (ds / ell).round();
            }
            Ok(ds.abs())
        })
        .collect();
    d.into_iter().try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
}

/// Excess whose string diffeomorphism has rotation number `target`, found
/// by root-finding on orbits of `n` points. The default target
/// `1/(7 + 1/φ)` is a noble number near 0.13, far from low-order
/// resonances and within the preferred advance range.
pub fn tune_p_ref(gamma: &ConvexCurve, target: Option<f64>, n: usize) -> Result<f64> {
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    let target = target.unwrap_or(1.0 / (7.0 + 1.0 / golden));
    let rho = |p: f64| -> Result<f64> {
        Ok(rotation_from_lift(&lifted_orbit(gamma, p, 0.0, n)?).rho - target)
    };
    // bracket: excess grows with rotation
    let mut lo = 1e-6 * gamma.length();
    let mut hi = lo;
    let mut f_hi = rho(hi)?;
    while f_hi < 0.0 {
        lo = hi;
        hi *= 2.0;
        f_hi = rho(hi)?;
    }
    brent(rho, lo, hi, 1e-15, 100)
}
