//! Coordinate maps between the symmetric variables and the canonical ones,
//! and pushforwards of vector fields along them.

use super::hamiltonians::Canonical;
use super::{HamiltonianSystem, SystemId};
use crate::error::{Error, Result};
use crate::matrix::norm_inf;
use crate::params::ParameterSet;
use crate::scalar::{re, Dual, Ring, C64};

/// `q_i = t x_{i-1}/x_n`, `p_i = x_n y_{i-1}/t`, `i = 1..n`.
pub fn symmetric_to_canonical_map<R: Ring>(t: R, x: &[R], y: &[R]) -> (Vec<R>, Vec<R>) {
    let n = x.len() - 1;
    let xn = x[n].clone();
    let q = (0..n).map(|i| t.clone() * x[i].clone() / xn.clone()).collect();
    let p = (0..n).map(|i| xn.clone() * y[i].clone() / t.clone()).collect();
    (q, p)
}

/// Map a symmetric state to canonical coordinates; also returns
/// `η = -Σ x_j y_j`.
pub fn symmetric_to_canonical(t: f64, x: &[C64], y: &[C64]) -> Result<(Vec<C64>, Vec<C64>, C64)> {
    let n = x.len() - 1;
    if x[n].norm() == 0.0 {
        return Err(Error::ChartBreakdown("x_n = 0".into()));
    }
    if t == 0.0 {
        return Err(Error::SingularTime { t });
    }
    let (q, p) = symmetric_to_canonical_map(re(t), x, y);
    let eta = -x.iter().zip(y).map(|(a, b)| a * b).sum::<C64>();
    Ok((q, p, eta))
}

/// Inverse of [`symmetric_to_canonical`] given the free scale `x_n`:
/// `x_{i-1} = x_n q_i/t`, `y_{i-1} = t p_i/x_n`, `y_n = -(Σ q_j p_j + η)/x_n`.
pub fn canonical_to_symmetric(t: f64, q: &[C64], p: &[C64], eta: C64, xn: C64) -> Result<(Vec<C64>, Vec<C64>)> {
    if xn.norm() == 0.0 {
        return Err(Error::ChartBreakdown("x_n = 0".into()));
    }
    let t = re(t);
    let mut x: Vec<C64> = q.iter().map(|qi| xn * qi / t).collect();
    let mut y: Vec<C64> = p.iter().map(|pi| t * pi / xn).collect();
    x.push(xn);
    y.push(-(q.iter().zip(p).map(|(a, b)| a * b).sum::<C64>() + eta) / xn);
    Ok((x, y))
}

/// The source level and time orientation of a canonical system.
pub(crate) fn canonical_source(which: Canonical) -> (usize, usize, bool) {
    match which {
        Canonical::P5 => (1, 1, true),
        Canonical::P3 => (1, 2, false),
        Canonical::N2R1 => (2, 1, true),
        Canonical::N2R2 => (2, 2, true),
        Canonical::N2R3 => (2, 3, true),
    }
}

/// Coordinate map from the degenerate symmetric variables to a canonical
/// system's `(q, p)`.
pub fn canonical_map<R: Ring>(which: Canonical, p: &ParameterSet, x: &[R], y: &[R]) -> (Vec<R>, Vec<R>) {
    let al = |k: i64| R::from(*p.alpha(k));
    let one = R::from(re(1.0));
    match which {
        Canonical::P5 => (
            vec![x[0].clone() / x[1].clone()],
            vec![-(x[1].clone() * (x[1].clone() * y[1].clone() + al(3))) / x[0].clone()],
        ),
        Canonical::P3 => (vec![x[1].clone() / x[0].clone()], vec![x[0].clone() * y[1].clone()]),
        Canonical::N2R1 => (
            vec![x[0].clone() / x[1].clone(), x[0].clone() / x[2].clone()],
            vec![
                -(x[1].clone() * (x[1].clone() * y[1].clone() + al(3))) / x[0].clone(),
                -(x[2].clone() * (x[2].clone() * y[2].clone() + al(5))) / x[0].clone(),
            ],
        ),
        Canonical::N2R2 | Canonical::N2R3 => (
            vec![-(x[1].clone() / x[0].clone()), -(x[2].clone() / x[0].clone())],
            vec![one - x[0].clone() * y[1].clone(), -(x[0].clone() * y[2].clone())],
        ),
    }
}

fn dual_vec(v: &[C64], d: &[C64]) -> Vec<Dual> {
    v.iter().zip(d).map(|(a, b)| Dual::new(*a, *b)).collect()
}

fn relative(a: &[C64], b: &[C64]) -> f64 {
    let diff: Vec<C64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
    norm_inf(&diff) / norm_inf(b).max(f64::MIN_POSITIVE)
}

/// Relative mismatch between the symmetric field pushed through
/// [`symmetric_to_canonical_map`] and the coupled sixth Painlevé field at the
/// image point (with `η = -Σ x y`).
pub fn coupled_pushforward_error(params: &ParameterSet, t: f64, x: &[C64], y: &[C64]) -> Result<f64> {
    let n = params.n();
    let sym = HamiltonianSystem::new(SystemId::Symmetric, params.clone())?;
    let z: Vec<C64> = x.iter().chain(y).copied().collect();
    let f = sym.field(t, &z)?;
    let xd = dual_vec(x, &f[..=n]);
    let yd = dual_vec(y, &f[n + 1..]);
    let (q, p) = symmetric_to_canonical_map(Dual::new(re(t), re(1.0)), &xd, &yd);
    let pushed: Vec<C64> = q.iter().chain(&p).map(|v| v.d).collect();
    let (q0, p0, eta) = symmetric_to_canonical(t, x, y)?;
    let cp6 = HamiltonianSystem::new(SystemId::CoupledP6, params.with_eta(eta))?;
    let target = cp6.field(t, &q0.iter().chain(&p0).copied().collect::<Vec<_>>())?;
    Ok(relative(&pushed, &target))
}

/// Relative mismatch between the degenerate symmetric field pushed through
/// [`canonical_map`] and the canonical field, in the canonical system's own
/// time (`τ = -t` for the flipped cases).
pub fn canonical_pushforward_error(which: Canonical, params: &ParameterSet, t: f64, x: &[C64], y: &[C64]) -> Result<f64> {
    let (n, r, flip) = canonical_source(which);
    if params.n() != n || params.level() != r {
        return Err(Error::InvalidParameters(format!("{which:?} needs n = {n}, Degenerate({r})")));
    }
    let deg = HamiltonianSystem::new(SystemId::Degenerate, params.clone())?;
    let z: Vec<C64> = x.iter().chain(y).copied().collect();
    let f = deg.field(t, &z)?;
    let sign = if flip { -1.0 } else { 1.0 };
    let xd = dual_vec(x, &f[..=n]);
    let yd = dual_vec(y, &f[n + 1..]);
    let (q, p) = canonical_map(which, params, &xd, &yd);
    let pushed: Vec<C64> = q.iter().chain(&p).map(|v| v.d * sign).collect();
    let q0: Vec<C64> = q.iter().map(|v| v.v).collect();
    let p0: Vec<C64> = p.iter().map(|v| v.v).collect();
    let eta = -x.iter().zip(y).map(|(a, b)| a * b).sum::<C64>();
    let sys = HamiltonianSystem::new(SystemId::CanonicalForm(which), params.with_eta(eta))?;
    let target = sys.field(sign * t, &q0.iter().chain(&p0).copied().collect::<Vec<_>>())?;
    Ok(relative(&pushed, &target))
}

/// Relative mismatch between the level-`r` degenerate field and the
/// level-`r-1` field (symmetric form for `r = 1`) evaluated with the replaced
/// parameters `target.confluence_source(eps)`, read in the variables
/// `t = eps·s`, `x_i → x_i/eps`, `y_i → eps·y_i` for `i ≤ r-2`.
pub fn field_confluence_error(target: &ParameterSet, eps: f64, s: f64, x: &[C64], y: &[C64]) -> Result<f64> {
    let r = target.level();
    if r == 0 {
        return Err(Error::InvalidParameters("confluence target must be degenerate".into()));
    }
    let n = target.n();
    let source = target.confluence_source(eps)?;
    let old_id = if r == 1 { SystemId::Symmetric } else { SystemId::Degenerate };
    let old = HamiltonianSystem::new_unchecked(old_id, source);
    let new = HamiltonianSystem::new(SystemId::Degenerate, target.clone())?;
    let scale: Vec<f64> = (0..=n).map(|i| if i + 2 <= r { eps } else { 1.0 }).collect();
    let mut z_old: Vec<C64> = x.iter().zip(&scale).map(|(v, s)| v / s).collect();
    z_old.extend(y.iter().zip(&scale).map(|(v, s)| v * s));
    let f_old = old.field(eps * s, &z_old)?;
    let mut pulled: Vec<C64> = (0..=n).map(|i| f_old[i] * eps * scale[i]).collect();
    pulled.extend((0..=n).map(|i| f_old[n + 1 + i] * eps / scale[i]));
    let z: Vec<C64> = x.iter().chain(y).copied().collect();
    let f_new = new.field(s, &z)?;
    Ok(relative(&pulled, &f_new))
}

/// `t(1-t) d/dt log x_n` along the symmetric field minus
/// `Σ{(q_i-1)(q_i-t)p_i + α_{2i-1}q_i} + tα_{2n+1} - (t+1)η`, relative.
pub fn log_derivative_defect(params: &ParameterSet, t: f64, x: &[C64], y: &[C64]) -> Result<f64> {
    let n = params.n();
    let sym = HamiltonianSystem::new(SystemId::Symmetric, params.clone())?;
    let z: Vec<C64> = x.iter().chain(y).copied().collect();
    let f = sym.field(t, &z)?;
    let lhs = re(t * (1.0 - t)) * f[n] / x[n];
    Ok(log_derivative_relation(params, t, x, y, lhs))
}

/// Compare a supplied value of `t(1-t) d/dt log x_n` with the canonical
/// expression at the same point; relative error.
pub fn log_derivative_relation(params: &ParameterSet, t: f64, x: &[C64], y: &[C64], lhs: C64) -> f64 {
    let n = params.n();
    let (q, p) = symmetric_to_canonical_map(re(t), x, y);
    let eta = -x.iter().zip(y).map(|(a, b)| a * b).sum::<C64>();
    let tt = re(t);
    let mut rhs = tt * params.alpha(2 * n as i64 + 1) - (tt + re(1.0)) * eta;
    for i in 0..n {
        rhs += (q[i] - re(1.0)) * (q[i] - tt) * p[i] + params.alpha(2 * i as i64 + 1) * q[i];
    }
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE)
}
