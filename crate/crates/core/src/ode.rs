//! Adaptive Dormand–Prince 5(4) integration with dense output and
//! terminal event location.

use crate::math::{fabs, sqrt};

/// Right-hand side `dy/dt = f(t, y)` of a fixed-size system.
pub trait OdeSystem<const N: usize> {
    type Error;
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N], Self::Error>;
}

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Steps shorter than this abort integration with [`OdeError::StepUnderflow`].
    pub min_step: f64,
    /// Event functions are refined until `|g| <= event_tol`.
    pub event_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 5e-3,
            min_step: 1e-14,
            event_tol: 1e-10,
        }
    }
}

impl Tolerances {
    /// Same settings with both error tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { rtol: self.rtol * factor, atol: self.atol * factor, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum OdeError<E> {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite solution at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    System(E),
}

/// When a terminal event becomes active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventArming {
    /// Active from the start; `g(t0) <= 0` fires at `t0`.
    Immediate,
    /// Active once `g` has been seen positive. Meant for events that start
    /// exactly on the boundary. If `g` is still non-positive after the first
    /// step, the event fires at `t0`.
    AfterPositive,
}

/// Terminal event: fires when `g` falls from positive to non-positive.
pub struct Event<G> {
    pub g: G,
    pub arming: EventArming,
}

/// Uniform output grid `origin + k·dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub origin: f64,
    pub dt: f64,
}

impl SampleGrid {
    fn at(&self, k: i64) -> f64 {
        self.origin + k as f64 * self.dt
    }

    /// Index of the first grid time strictly after `t`.
    fn index_after(&self, t: f64) -> i64 {
        let mut k = libm::floor((t - self.origin) / self.dt) as i64 + 1;
        while self.at(k - 1) > t {
            k -= 1;
        }
        while self.at(k) <= t {
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// True when the run stopped at an event rather than at `t_end`.
    pub event: bool,
    /// Event function value at the returned point.
    pub event_value: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Suggested size for a following step.
    pub next_step: f64,
}

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
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step.
struct Dense<const N: usize> {
    t: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        y
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: &Tolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * fabs(y0[i]).max(fabs(y1[i]));
        let e = err[i] / sc;
        acc += e * e;
    }
    sqrt(acc / N as f64)
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    tol: &Tolerances,
) -> Result<f64, S::Error> {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * fabs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    let (d0, d1) = (sqrt(d0 / N as f64), sqrt(d1 / N as f64));
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(tol.max_step).min(span);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + h0, &y1)?;
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * fabs(y0[i]);
        let v = (f1[i] - f0[i]) / sc;
        d2 += v * v;
    }
    let d2 = sqrt(d2 / N as f64) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / dmax, 0.2)
    };
    Ok((100.0 * h0).min(h1).min(tol.max_step).min(span))
}

/// Integrates from `t0` until `t_end` or until the event fires.
///
/// `observer` is called at every grid time strictly between `t0` and the
/// stopping time, in increasing order. The stopping point itself is returned
/// in the [`Outcome`] and is not passed to the observer.
#[allow(clippy::too_many_arguments)]
pub fn integrate<S, G, O, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    first_step: Option<f64>,
    tol: &Tolerances,
    mut event: Option<Event<G>>,
    grid: Option<SampleGrid>,
    mut observer: O,
) -> Result<Outcome<N>, OdeError<S::Error>>
where
    S: OdeSystem<N>,
    G: FnMut(f64, &[f64; N]) -> Result<f64, S::Error>,
    O: FnMut(f64, &[f64; N]) -> Result<(), S::Error>,
{
    let mut t = t0;
    let mut y = y0;
    let mut accepted = 0;
    let mut rejected = 0;

    let mut g_prev = match event.as_mut() {
        Some(ev) => Some((ev.g)(t, &y).map_err(OdeError::System)?),
        None => None,
    };
    let mut armed = true;
    if let (Some(ev), Some(g0)) = (event.as_ref(), g_prev) {
        match ev.arming {
            EventArming::Immediate if g0 <= 0.0 => {
                return Ok(Outcome {
                    t,
                    y,
                    event: true,
                    event_value: Some(g0),
                    accepted_steps: 0,
                    rejected_steps: 0,
                    next_step: first_step.unwrap_or(tol.max_step),
                });
            }
            EventArming::AfterPositive => armed = g0 > 0.0,
            _ => {}
        }
    }

    if t_end <= t0 {
        return Ok(Outcome {
            t,
            y,
            event: false,
            event_value: g_prev,
            accepted_steps: 0,
            rejected_steps: 0,
            next_step: first_step.unwrap_or(tol.max_step),
        });
    }

    let mut next_sample = grid.map(|g| g.index_after(t0));
    let mut k1 = sys.rhs(t, &y).map_err(OdeError::System)?;
    let mut h = match first_step {
        Some(h) => h.min(tol.max_step),
        None => initial_step(sys, t, &y, &k1, t_end - t0, tol).map_err(OdeError::System)?,
    };

    loop {
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        let h_step = if last { remaining } else { h };
        if h_step < tol.min_step && !last {
            return Err(OdeError::StepUnderflow { t });
        }

        let k2 = sys.rhs(t + C2 * h_step, &axpy(&y, h_step, &[(A21, &k1)])).map_err(OdeError::System)?;
        let k3 = sys
            .rhs(t + C3 * h_step, &axpy(&y, h_step, &[(A31, &k1), (A32, &k2)]))
            .map_err(OdeError::System)?;
        let k4 = sys
            .rhs(t + C4 * h_step, &axpy(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)]))
            .map_err(OdeError::System)?;
        let k5 = sys
            .rhs(
                t + C5 * h_step,
                &axpy(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )
            .map_err(OdeError::System)?;
        let k6 = sys
            .rhs(
                t + h_step,
                &axpy(&y, h_step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )
            .map_err(OdeError::System)?;
        let y_new = axpy(&y, h_step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + h_step };
        let k7 = sys.rhs(t_new, &y_new).map_err(OdeError::System)?;

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h_step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &y_new, tol);
        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            rejected += 1;
            h = 0.25 * h_step;
            if h < tol.min_step {
                return Err(OdeError::NonFinite { t });
            }
            continue;
        }

        if en > 1.0 {
            rejected += 1;
            let factor = (0.9 * libm::pow(en, -0.2)).max(0.2);
            h = h_step * factor;
            if h < tol.min_step {
                return Err(OdeError::StepUnderflow { t });
            }
            continue;
        }

        // Accepted.
        accepted += 1;
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y_new[i] - y[i];
            let bspl = h_step * k1[i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h_step * k7[i] - bspl;
            r[4][i] = h_step * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = Dense { t, h: h_step, r };

        let factor = if en == 0.0 { 5.0 } else { (0.9 * libm::pow(en, -0.2)).clamp(0.2, 5.0) };
        let h_next = (h_step * factor).min(tol.max_step);

        let mut stop: Option<(f64, [f64; N], f64)> = None;
        if let Some(ev) = event.as_mut() {
            let g_new = (ev.g)(t_new, &y_new).map_err(OdeError::System)?;
            let g_old = g_prev.unwrap_or(g_new);
            if armed && g_old > 0.0 && g_new <= 0.0 {
                stop = Some(locate(&dense, t, g_old, t_new, g_new, &y_new, tol.event_tol, &mut ev.g).map_err(OdeError::System)?);
            } else if !armed {
                if g_new > 0.0 {
                    armed = true;
                } else {
                    stop = Some((t0, y0, g_prev.unwrap_or(0.0)));
                }
            }
            g_prev = Some(g_new);
        }

        let t_stop = stop.as_ref().map(|s| s.0).unwrap_or(t_new);
        if let (Some(g), Some(ns)) = (grid, next_sample.as_mut()) {
            while g.at(*ns) < t_stop {
                let ts = g.at(*ns);
                observer(ts, &dense.eval(ts)).map_err(OdeError::System)?;
                *ns += 1;
            }
        }

        if let Some((te, ye, ge)) = stop {
            return Ok(Outcome {
                t: te,
                y: ye,
                event: true,
                event_value: Some(ge),
                accepted_steps: accepted,
                rejected_steps: rejected,
                next_step: h_next,
            });
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        h = h_next;
        if last {
            return Ok(Outcome {
                t,
                y,
                event: false,
                event_value: g_prev,
                accepted_steps: accepted,
                rejected_steps: rejected,
                next_step: h,
            });
        }
    }
}

/// Illinois-modified regula falsi on the dense output.
#[allow(clippy::too_many_arguments)]
fn locate<G, E, const N: usize>(
    dense: &Dense<N>,
    mut ta: f64,
    mut ga: f64,
    mut tb: f64,
    mut gb: f64,
    y_end: &[f64; N],
    event_tol: f64,
    g: &mut G,
) -> Result<(f64, [f64; N], f64), E>
where
    G: FnMut(f64, &[f64; N]) -> Result<f64, E>,
{
    let mut yb = *y_end;
    if fabs(gb) <= event_tol {
        return Ok((tb, yb, gb));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let tc = if ga.is_finite() && gb.is_finite() && ga != gb {
            let tc = tb - gb * (tb - ta) / (gb - ga);
            if tc > ta && tc < tb { tc } else { 0.5 * (ta + tb) }
        } else {
            0.5 * (ta + tb)
        };
        let yc = dense.eval(tc);
        let gc = g(tc, &yc)?;
        if gc <= 0.0 {
            tb = tc;
            gb = gc;
            yb = yc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            ta = tc;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
        if fabs(gc) <= event_tol {
            return Ok((tc, yc, gc));
        }
        if tb - ta <= 4.0 * f64::EPSILON * fabs(tb).max(1e-300) {
            break;
        }
    }
    let gb_true = g(tb, &yb)?;
    Ok((tb, yb, gb_true))
}
