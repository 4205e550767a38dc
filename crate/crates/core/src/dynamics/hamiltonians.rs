//! Closed-form Hamiltonians and their hand-differentiated gradients.
//!
//! Every function returns `(K, ∂K/∂coords, ∂K/∂momenta)` where `K` is the
//! Hamiltonian whose canonical field is the flow in the system's own time.

use crate::params::ParameterSet;
use crate::scalar::{re, C64};

pub(crate) struct Eval {
    pub value: C64,
    pub d_coord: Vec<C64>,
    pub d_mom: Vec<C64>,
}

fn a(p: &ParameterSet, k: i64) -> C64 {
    *p.alpha(k)
}

/// Coupled sixth Painlevé system in `(q_1..q_n, p_1..p_n)`, scaled by
/// `1/(t(t-1))` so the field is canonical.
pub(crate) fn coupled_p6(p: &ParameterSet, t: f64, q: &[C64], mom: &[C64]) -> Eval {
    let n = p.n();
    let t = re(t);
    let eta = *p.eta();
    let odd = p.odd_sum();
    let one = re(1.0);
    let mut h = re(0.0);
    let mut dq = vec![re(0.0); n];
    let mut dp = vec![re(0.0); n];
    for i in 0..n {
        let idx = i as i64 + 1;
        let k0 = odd - a(p, 2 * idx - 1) - eta;
        let k1: C64 = (0..idx).map(|j| a(p, 2 * j)).sum();
        let kt: C64 = (idx..=n as i64).map(|j| a(p, 2 * j)).sum();
        let kap = a(p, 2 * idx - 1) * eta;
        let (x, y) = (q[i], mom[i]);
        let cubic = x * (x - one) * (x - t);
        h += cubic * y * y - k0 * (x - one) * (x - t) * y - k1 * x * (x - t) * y - (kt - one) * x * (x - one) * y
            + kap * x;
        let dcubic = re(3.0) * x * x - re(2.0) * (one + t) * x + t;
        dq[i] += dcubic * y * y - k0 * (re(2.0) * x - one - t) * y - k1 * (re(2.0) * x - t) * y
            - (kt - one) * (re(2.0) * x - one) * y
            + kap;
        dp[i] += re(2.0) * cubic * y - k0 * (x - one) * (x - t) - k1 * x * (x - t) - (kt - one) * x * (x - one);
    }
    for i in 0..n {
        for j in i + 1..n {
            let (ai, aj) = (a(p, 2 * i as i64 + 1), a(p, 2 * j as i64 + 1));
            let (qi, pi, qj, pj) = (q[i], mom[i], q[j], mom[j]);
            let g = (qi * pi + ai) * pj + pi * (qj * pj + aj);
            let w = (qi - one) * (qj - t);
            h += w * g;
            dq[i] += (qj - t) * g + w * pi * pj;
            dq[j] += (qi - one) * g + w * pi * pj;
            dp[i] += w * (qi * pj + qj * pj + aj);
            dp[j] += w * (qi * pi + ai + pi * qj);
        }
    }
    let s = one / (t * (t - one));
    Eval {
        value: h * s,
        d_coord: dq.into_iter().map(|v| v * s).collect(),
        d_mom: dp.into_iter().map(|v| v * s).collect(),
    }
}

/// `c_i = α_{2i+2}^{2n-2i-1}`
fn c(p: &ParameterSet, i: usize) -> C64 {
    let (n, i) = (p.n() as i64, i as i64);
    p.partial_sum(2 * i + 2, 2 * n - 2 * i - 1)
}

/// Symmetric form in `(x_0..x_n, y_0..y_n)`:
/// `H = (1/t)Σ[x_i²y_i²/2 - c_i x_i y_i + u_i L_i] + (1/(1-t)) Σ u_i Y`
/// with `u_i = x_i(x_i y_i + α_{2i+1})`, `L_i = Σ_{j<i} y_j`, `Y = Σ y_j`.
pub(crate) fn symmetric(p: &ParameterSet, t: f64, x: &[C64], y: &[C64]) -> Eval {
    let n = p.n();
    let (inv_t, inv_1mt) = (re(1.0 / t), re(1.0 / (1.0 - t)));
    let big_y: C64 = y.iter().sum();
    let u: Vec<C64> = (0..=n).map(|i| x[i] * (x[i] * y[i] + a(p, 2 * i as i64 + 1))).collect();
    let u_total: C64 = u.iter().sum();
    let mut value_t = re(0.0);
    let mut lower = re(0.0); // L_m
    let mut dx = vec![re(0.0); n + 1];
    let mut dy = vec![re(0.0); n + 1];
    let mut u_above: C64 = u_total; // Σ_{i>m} u_i after subtracting u_m
    for m in 0..=n {
        let (xm, ym, cm) = (x[m], y[m], c(p, m));
        u_above -= u[m];
        value_t += re(0.5) * xm * xm * ym * ym - cm * xm * ym + u[m] * lower;
        let du_dx = re(2.0) * xm * ym + a(p, 2 * m as i64 + 1);
        dx[m] = inv_t * (xm * ym * ym - cm * ym + du_dx * lower) + inv_1mt * du_dx * big_y;
        dy[m] = inv_t * (xm * xm * ym - cm * xm + xm * xm * lower + u_above) + inv_1mt * (xm * xm * big_y + u_total);
        lower += ym;
    }
    Eval { value: inv_t * value_t + inv_1mt * u_total * big_y, d_coord: dx, d_mom: dy }
}

/// Level-`r` degenerate system, `K = H = (tH)/t` with
/// `tH = Σ x_i y_i(x_i y_i - 2c_i)/2 + Σ_{i<r-1} x_{i+1} y_i
///       + Σ_{i≥r-1} (t x_0 + Σ_{j>i} u_j) y_i`.
pub(crate) fn degenerate(p: &ParameterSet, r: usize, t: f64, x: &[C64], y: &[C64]) -> Eval {
    let n = p.n();
    let tt = re(t);
    let u: Vec<C64> = (0..=n).map(|i| x[i] * (x[i] * y[i] + a(p, 2 * i as i64 + 1))).collect();
    let w: C64 = y[r - 1..].iter().sum();
    let mut th = re(0.0);
    let mut dx = vec![re(0.0); n + 1];
    let mut dy = vec![re(0.0); n + 1];
    // Σ_{j>i} u_j, updated as i increases
    let mut u_above: C64 = u.iter().sum();
    // Σ_{i=r-1}^{m-1} y_i
    let mut y_tail = re(0.0);
    for m in 0..=n {
        let (xm, ym, cm) = (x[m], y[m], c(p, m));
        u_above -= u[m];
        th += re(0.5) * xm * ym * (xm * ym - re(2.0) * cm);
        dx[m] += xm * ym * ym - cm * ym;
        dy[m] += xm * xm * ym - cm * xm;
        if m + 2 <= r {
            th += x[m + 1] * ym;
            dy[m] += x[m + 1];
        }
        if m >= 1 && m < r {
            dx[m] += y[m - 1];
        }
        if m + 1 >= r {
            let bracket = tt * x[0] + u_above;
            th += bracket * ym;
            dy[m] += bracket;
        }
        let du_dx = re(2.0) * xm * ym + a(p, 2 * m as i64 + 1);
        dx[m] += du_dx * y_tail;
        dy[m] += xm * xm * y_tail;
        if m + 1 >= r {
            y_tail += ym;
        }
    }
    dx[0] += tt * w;
    let inv_t = re(1.0 / t);
    Eval {
        value: th * inv_t,
        d_coord: dx.into_iter().map(|v| v * inv_t).collect(),
        d_mom: dy.into_iter().map(|v| v * inv_t).collect(),
    }
}

/// The five canonical systems of the degenerate hierarchy for `n ≤ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Canonical {
    P5,
    P3,
    N2R1,
    N2R2,
    N2R3,
}

/// `(tH, ∂(tH)/∂q, ∂(tH)/∂p)` for a canonical system.
pub(crate) fn canonical_th(which: Canonical, p: &ParameterSet, tau: f64, q: &[C64], mom: &[C64]) -> Eval {
    let t = re(tau);
    let eta = *p.eta();
    let one = re(1.0);
    let two = re(2.0);
    let al = |k: i64| a(p, k);
    match which {
        Canonical::P5 => {
            let (x, y) = (q[0], mom[0]);
            let k = eta + al(2) - al(3);
            let value = x * (x - one) * y * (y + t) - x * y * k + (eta - al(3)) * y + t * al(3) * x;
            let dq = (two * x - one) * y * (y + t) - y * k + t * al(3);
            let dp = x * (x - one) * (two * y + t) - x * k + (eta - al(3));
            Eval { value, d_coord: vec![dq], d_mom: vec![dp] }
        }
        Canonical::P3 => {
            let (x, y) = (q[0], mom[0]);
            let value = x * x * y * (y - one) + (eta + al(3)) * x * y + t * y - eta * x;
            let dq = two * x * y * (y - one) + (eta + al(3)) * y - eta;
            let dp = x * x * (two * y - one) + (eta + al(3)) * x + t;
            Eval { value, d_coord: vec![dq], d_mom: vec![dp] }
        }
        Canonical::N2R1 => {
            let (q1, p1, q2, p2) = (q[0], mom[0], q[1], mom[1]);
            let k1 = eta + al(2) - al(3) - al(5);
            let k2 = eta + al(2) + al(4) - al(5);
            let value = q1 * (q1 - one) * p1 * (p1 + t) - k1 * q1 * p1 + (eta - al(3) - al(5)) * p1
                + al(3) * t * q1
                + (q1 - one) * p1 * q2 * p2
                + (q1 - one) * (q1 * p1 + al(3)) * p2
                + q2 * (q2 - one) * p2 * (p2 + t)
                - k2 * q2 * p2
                + (eta - al(5)) * p2
                + al(5) * t * q2;
            let dq1 = (two * q1 - one) * p1 * (p1 + t) - k1 * p1 + al(3) * t + p1 * q2 * p2
                + (q1 * p1 + al(3) + (q1 - one) * p1) * p2;
            let dp1 = q1 * (q1 - one) * (two * p1 + t) - k1 * q1 + (eta - al(3) - al(5))
                + (q1 - one) * q2 * p2
                + (q1 - one) * q1 * p2;
            let dq2 = (q1 - one) * p1 * p2 + (two * q2 - one) * p2 * (p2 + t) - k2 * p2 + al(5) * t;
            let dp2 = (q1 - one) * p1 * q2 + (q1 - one) * (q1 * p1 + al(3)) + q2 * (q2 - one) * (two * p2 + t)
                - k2 * q2
                + (eta - al(5));
            Eval { value, d_coord: vec![dq1, dq2], d_mom: vec![dp1, dp2] }
        }
        Canonical::N2R2 => {
            let (q1, p1, q2, p2) = (q[0], mom[0], q[1], mom[1]);
            let k = eta + al(3) + al(4) + al(5);
            let value = q1 * q1 * p1 * (p1 - one) + (eta + al(3)) * q1 * p1 + t * p1 - al(3) * q1
                + q1 * p1 * q2 * p2
                + p1 * q2 * (q2 * p2 + al(5))
                + q2 * q2 * p2 * (p2 - one)
                + k * q2 * p2
                + t * p2
                - al(5) * q2;
            let dq1 = two * q1 * p1 * (p1 - one) + (eta + al(3)) * p1 - al(3) + p1 * q2 * p2;
            let dp1 = q1 * q1 * (two * p1 - one) + (eta + al(3)) * q1 + t + q1 * q2 * p2 + q2 * (q2 * p2 + al(5));
            let dq2 = q1 * p1 * p2 + p1 * (two * q2 * p2 + al(5)) + two * q2 * p2 * (p2 - one) + k * p2 - al(5);
            let dp2 = q1 * p1 * q2 + p1 * q2 * q2 + q2 * q2 * (two * p2 - one) + k * q2 + t;
            Eval { value, d_coord: vec![dq1, dq2], d_mom: vec![dp1, dp2] }
        }
        Canonical::N2R3 => {
            let (q1, p1, q2, p2) = (q[0], mom[0], q[1], mom[1]);
            let k = eta + al(3) + al(5);
            let value = q1 * q1 * p1 * (p1 - one) + (eta + al(3)) * q1 * p1 - al(3) * q1
                + q1 * p1 * q2 * p2
                + p1 * q2
                + q2 * q2 * p2 * p2
                + k * q2 * p2
                + t * p2
                - q2;
            let dq1 = two * q1 * p1 * (p1 - one) + (eta + al(3)) * p1 - al(3) + p1 * q2 * p2;
            let dp1 = q1 * q1 * (two * p1 - one) + (eta + al(3)) * q1 + q1 * q2 * p2 + q2;
            let dq2 = q1 * p1 * p2 + p1 + two * q2 * p2 * p2 + k * p2 - one;
            let dp2 = q1 * p1 * q2 + two * q2 * q2 * p2 + k * q2 + t;
            Eval { value, d_coord: vec![dq1, dq2], d_mom: vec![dp1, dp2] }
        }
    }
}

/// `K = tH/τ` for a canonical system.
pub(crate) fn canonical(which: Canonical, p: &ParameterSet, tau: f64, q: &[C64], mom: &[C64]) -> Eval {
    let e = canonical_th(which, p, tau, q, mom);
    let s = re(1.0 / tau);
    Eval {
        value: e.value * s,
        d_coord: e.d_coord.into_iter().map(|v| v * s).collect(),
        d_mom: e.d_mom.into_iter().map(|v| v * s).collect(),
    }
}
