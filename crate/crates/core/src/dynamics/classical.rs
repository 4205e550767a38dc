//! Rank one: the Riccati reduction at `p = η = 0` and its linearization by a
//! logarithmic derivative of a Gauss hypergeometric function.

use crate::error::{Error, Result};
use crate::hyperfn::{eval_with_derivatives, HGSpec};
use crate::params::ParameterSet;
use crate::scalar::{re, C64};

fn require_rank_one(p: &ParameterSet) -> Result<()> {
    if p.n() != 1 {
        return Err(Error::InvalidParameters(format!("rank-one system expected, got n = {}", p.n())));
    }
    Ok(())
}

/// `α_1 q² + ((α_3+α_0)t - (α_0+α_1)) q - α_3 t`, which equals `t(t-1) dq/dt`.
pub fn riccati_polynomial(p: &ParameterSet, t: f64, q: C64) -> C64 {
    let a = |k: i64| *p.alpha(k);
    let tt = re(t);
    a(1) * q * q + ((a(3) + a(0)) * tt - (a(0) + a(1))) * q - a(3) * tt
}

/// `|t(t-1) q' - R(q)|`, relative to the largest term.
pub fn riccati_residual(p: &ParameterSet, t: f64, q: C64, dq: C64) -> f64 {
    let lhs = re(t * (t - 1.0)) * dq;
    let rhs = riccati_polynomial(p, t, q);
    let a = |k: i64| *p.alpha(k);
    let scale = lhs
        .norm()
        .max((a(1) * q * q).norm())
        .max(((a(3) + a(0)) * re(t) * q).norm())
        .max(((a(0) + a(1)) * q).norm())
        .max((a(3) * re(t)).norm())
        .max(f64::MIN_POSITIVE);
    (lhs - rhs).norm() / scale
}

/// The Gauss series `F(α_1+α_2+α_3, α_3; α_2+α_3; t)`.
pub fn gauss_spec(p: &ParameterSet) -> Result<HGSpec> {
    require_rank_one(p)?;
    let a = |k: i64| *p.alpha(k);
    Ok(HGSpec::new(vec![a(1) + a(2) + a(3), a(3)], vec![a(2) + a(3)]))
}

/// `q = t(1-t)/α_1 · d/dt log((t-1)^{α_3} x)` and `dq/dt`, for a function
/// `x` given by its value and first two derivatives.
pub fn log_derivative_map(p: &ParameterSet, t: f64, x: [C64; 3]) -> Result<(C64, C64)> {
    require_rank_one(p)?;
    let a1 = *p.alpha(1);
    if a1.norm() == 0.0 {
        return Err(Error::InvalidParameters("alpha_1 = 0".into()));
    }
    if x[0].norm() == 0.0 {
        return Err(Error::ChartBreakdown(format!("x vanishes at t = {t}")));
    }
    let a3 = *p.alpha(3);
    let l = x[1] / x[0];
    let l2 = x[2] / x[0];
    let tt = re(t);
    let q = (-tt * a3 + tt * (re(1.0) - tt) * l) / a1;
    let dq = (-a3 + (re(1.0) - re(2.0) * tt) * l + tt * (re(1.0) - tt) * (l2 - l * l)) / a1;
    Ok((q, dq))
}

/// `q(t)` and `q'(t)` built from the Gauss series.
pub fn gauss_riccati_solution(p: &ParameterSet, t: f64) -> Result<(C64, C64)> {
    let spec = gauss_spec(p)?;
    let (v, _) = eval_with_derivatives(&spec, re(t), 1e-16, 2)?;
    log_derivative_map(p, t, [v[0], v[1], v[2]])
}

/// Residual of the Gauss equation
/// `t(1-t)x'' + (c - (a+b+1)t)x' - ab x = 0` for the series of
/// [`gauss_spec`], using its evaluated derivatives.
pub fn gauss_equation_residual(p: &ParameterSet, t: f64) -> Result<f64> {
    let spec = gauss_spec(p)?;
    let (v, _) = eval_with_derivatives(&spec, re(t), 1e-16, 2)?;
    let (a, b, c) = (spec.upper[0], spec.upper[1], spec.lower[0]);
    let tt = re(t);
    let terms = [tt * (re(1.0) - tt) * v[2], (c - (a + b + re(1.0)) * tt) * v[1], -a * b * v[0]];
    let scale = terms.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    Ok(terms.iter().sum::<C64>().norm() / scale)
}
