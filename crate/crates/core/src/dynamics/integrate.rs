//! Dormand–Prince 5(4) with step-size control and the order-4 continuous
//! extension, for complex-valued states along a real time path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::C64;

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

// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-10, atol: 1e-12, max_steps: 200_000, h0: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest accepted scaled local error estimate (≤ 1 by construction).
    pub max_error_ratio: f64,
}

/// States sampled at the requested times.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn last(&self) -> Option<&[C64]> {
        self.states.last().map(Vec::as_slice)
    }
}

fn axpy(y: &[C64], h: f64, terms: &[(f64, &[C64])]) -> Vec<C64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += v * (h * c);
        }
    }
    out
}

fn error_ratio(err: &[C64], y0: &[C64], y1: &[C64], opts: &IntegratorOptions) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e.norm() / (opts.atol + opts.rtol * a.norm().max(b.norm())))
        .fold(0.0, f64::max)
}

fn finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrate `dz/dt = f(t, z)` from `(t0, z0)` to `t1`, returning the state
/// at each of `samples` (which must lie in `[t0, t1]` and be monotone in the
/// direction of integration).
pub fn integrate<F>(f: F, t0: f64, z0: &[C64], t1: f64, samples: &[f64], opts: &IntegratorOptions) -> Result<Trajectory>
where
    F: Fn(f64, &[C64]) -> Result<Vec<C64>>,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameters("rtol and atol must be positive".into()));
    }
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    for w in samples.windows(2) {
        if (w[1] - w[0]) * dir < 0.0 {
            return Err(Error::InvalidParameters("sample times must be monotone".into()));
        }
    }
    if samples.iter().any(|&s| (s - t0) * dir < -1e-15 * span.max(1.0) || (s - t1) * dir > 1e-15 * span.max(1.0)) {
        return Err(Error::InvalidParameters("sample times must lie in [t0, t1]".into()));
    }

    let mut stats = IntegratorStats::default();
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), stats };
    let mut next = 0;
    while next < samples.len() && (samples[next] - t0) * dir <= 0.0 {
        traj.times.push(samples[next]);
        traj.states.push(z0.to_vec());
        next += 1;
    }
    if span == 0.0 {
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = z0.to_vec();
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h = opts.h0.unwrap_or_else(|| initial_step(&y, &k1, span, opts)) * dir;
    let h_floor = |t: f64| 1e-14 * t.abs().max(1.0);

    while (t1 - t) * dir > 0.0 {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps { t, max_steps: opts.max_steps });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < h_floor(t) {
            return Err(Error::StepSizeUnderflow { t, h: h.abs() });
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if (t + h - t1) * dir >= 0.0 { t1 } else { t + h };
        let k7 = f(t_new, &y_new)?;
        stats.evaluations += 6;
        if !finite(&y_new) || !finite(&k7) {
            return Err(Error::NonFinite { t: t + h });
        }
        let err: Vec<C64> = axpy(
            &vec![C64::new(0.0, 0.0); y.len()],
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let ratio = error_ratio(&err, &y, &y_new, opts);
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        if ratio <= 1.0 {
            stats.steps += 1;
            stats.max_error_ratio = stats.max_error_ratio.max(ratio);
            // dense output on [t, t_new]
            let hs = t_new - t;
            while next < samples.len() && (samples[next] - t_new) * dir <= 0.0 {
                let theta = (samples[next] - t) / hs;
                traj.times.push(samples[next]);
                traj.states.push(dense(&y, &y_new, &k1, &k3, &k4, &k5, &k6, &k7, hs, theta));
                next += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            h *= factor.min(5.0);
        } else {
            stats.rejected += 1;
            h *= factor.min(1.0);
        }
    }
    while next < samples.len() {
        traj.times.push(samples[next]);
        traj.states.push(y.clone());
        next += 1;
    }
    traj.stats = stats;
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn dense(
    y0: &[C64],
    y1: &[C64],
    k1: &[C64],
    k3: &[C64],
    k4: &[C64],
    k5: &[C64],
    k6: &[C64],
    k7: &[C64],
    h: f64,
    theta: f64,
) -> Vec<C64> {
    let th1 = 1.0 - theta;
    (0..y0.len())
        .map(|i| {
            let ydiff = y1[i] - y0[i];
            let bspl = k1[i] * h - ydiff;
            let r4 = ydiff - k7[i] * h - bspl;
            let r5 = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
            y0[i] + (ydiff + (bspl + (r4 + r5 * th1) * theta) * th1) * theta
        })
        .collect()
}

fn initial_step(y: &[C64], f0: &[C64], span: f64, opts: &IntegratorOptions) -> f64 {
    let scale: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
    let d0 = y.iter().zip(&scale).map(|(v, s)| v.norm() / s).fold(0.0, f64::max);
    let d1 = f0.iter().zip(&scale).map(|(v, s)| v.norm() / s).fold(0.0, f64::max);
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}

/// `n` evenly spaced times from `t0` to `t1` inclusive.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t1],
        _ => (0..n).map(|i| if i + 1 == n { t1 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 }).collect(),
    }
}
