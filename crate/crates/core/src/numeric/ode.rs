//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    /// First trial step; `None` picks one from the local derivative scale.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            h_init: None,
            max_steps: 200_000,
        }
    }
}

/// What the step observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOutcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// True when the observer stopped the integration before `t_end`.
    pub stopped: bool,
    pub steps: usize,
    pub last_step: f64,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end` (forward only).
///
/// `observer` sees every accepted step `(t, y)` and may stop the run early.
pub fn integrate<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<OdeOutcome<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]) -> Flow,
{
    if !(t_end >= t0) {
        return Err(Error::Integration(format!(
            "end time {t_end} precedes start {t0}"
        )));
    }
    let mut t = t0;
    let mut y = y0;
    if t_end == t0 {
        return Ok(OdeOutcome {
            t,
            y,
            stopped: false,
            steps: 0,
            last_step: 0.0,
        });
    }
    let mut k1 = f(t, &y);
    let sc = |y: &[f64; N], i: usize| opts.abs_tol + opts.rel_tol * y[i].abs();

    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let d1 = (0..N)
                .map(|i| (k1[i] / sc(&y, i)).powi(2))
                .sum::<f64>()
                .sqrt()
                / (N as f64).sqrt();
            if d1 < 1e-15 {
                1e-3
            } else {
                (0.01 / d1).powf(0.2)
            }
        }
    };
    h = h.min(opts.h_max).min(t_end - t);

    let mut steps = 0usize;
    let mut last_step = h;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget {} exhausted at t={t}",
                opts.max_steps
            )));
        }
        let remaining = t_end - t;
        let mut final_step = false;
        if h >= remaining {
            h = remaining;
            final_step = true;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let s = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / s).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            if h < opts.h_min {
                return Err(Error::Integration(format!("non-finite state at t={t}")));
            }
            continue;
        }
        if err <= 1.0 {
            steps += 1;
            last_step = h;
            t = if final_step { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            if observer(t, &y) == Flow::Stop {
                return Ok(OdeOutcome {
                    t,
                    y,
                    stopped: true,
                    steps,
                    last_step,
                });
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.h_min {
                return Err(Error::Integration(format!("step size underflow at t={t}")));
            }
        }
    }
    Ok(OdeOutcome {
        t,
        y,
        stopped: false,
        steps,
        last_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let opts = OdeOptions::default();
        let out = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            &opts,
            |_, _| Flow::Continue,
        )
        .unwrap();
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((out.y[1] + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn fifth_order_convergence_with_fixed_steps() {
        // Loose tolerance and forced step sizes: error should drop ~32x per halving.
        let run = |h: f64| {
            let opts = OdeOptions {
                abs_tol: 1e3,
                rel_tol: 1e3,
                h_max: h,
                h_init: Some(h),
                ..Default::default()
            };
            let out = integrate(
                |t, y: &[f64; 1]| [y[0] * t.cos()],
                0.0,
                [1.0],
                2.0,
                &opts,
                |_, _| Flow::Continue,
            )
            .unwrap();
            (out.y[0] - 2f64.sin().exp()).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 4.5 && order < 6.5, "observed order {order}");
    }

    #[test]
    fn observer_can_stop() {
        let out = integrate(
            |_, _y: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            &OdeOptions {
                h_max: 0.5,
                ..Default::default()
            },
            |_, y| {
                if y[0] > 2.0 {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            },
        )
        .unwrap();
        assert!(out.stopped);
        assert!(out.y[0] > 2.0 && out.y[0] <= 2.5 + 1e-12);
    }
}
