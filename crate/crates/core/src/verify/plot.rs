//! Tables behind the plotting commands.

use crate::error::{Error, Result};
use crate::hyperfn::{eval_series, HGSpec};
use crate::linear::{build_fuchsian, closed_form_solution, EVAL_RTOL};
use crate::matrix::norm_inf;
use crate::params::ParameterSet;
use crate::scalar::{re, C64};

/// Rows `[t, re F, im F, terms]` for `t = t0, t0+step, ...` up to `t1`.
pub fn series_sweep(spec: &HGSpec, t0: f64, t1: f64, step: f64) -> Result<Vec<Vec<f64>>> {
    if !(step > 0.0) || !(t1 >= t0) {
        return Err(Error::InvalidParameters(format!("bad sweep range [{t0}, {t1}] step {step}")));
    }
    let count = ((t1 - t0) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| {
            let t = t0 + i as f64 * step;
            let v = eval_series(spec, re(t), EVAL_RTOL)?;
            Ok(vec![t, v.value.re, v.value.im, v.terms_used as f64])
        })
        .collect()
}

/// Residual in the Fuchsian system of the `k`-th closed-form solution
/// truncated after `depth` terms, differentiated term by term.
pub fn truncated_residual(p: &ParameterSet, k: usize, depth: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::BranchDomain { t });
    }
    let sys = build_fuchsian(p)?;
    let sol = closed_form_solution(p, k, depth)?;
    let c = sol.exponent;
    let tc = re(t);
    let mut x = vec![re(0.0); p.n() + 1];
    let mut dx = vec![re(0.0); p.n() + 1];
    for (m, v) in sol.original_coeffs().iter().enumerate() {
        let e = c + re(m as f64);
        let pw = tc.powc(e);
        for i in 0..=p.n() {
            x[i] += v[i] * pw;
            dx[i] += v[i] * e * pw / tc;
        }
    }
    let f = sys.field(tc, &x)?;
    let diff: Vec<C64> = dx.iter().zip(&f).map(|(a, b)| a - b).collect();
    let scale = norm_inf(&x).max(norm_inf(&dx)).max(norm_inf(&f)).max(f64::MIN_POSITIVE);
    Ok(norm_inf(&diff) / scale)
}

/// Rows `[depth, residual]` of [`truncated_residual`] over `depths`.
pub fn residual_sweep(p: &ParameterSet, k: usize, depths: &[usize], t: f64) -> Result<Vec<Vec<f64>>> {
    depths.iter().map(|&d| Ok(vec![d as f64, truncated_residual(p, k, d, t)?])).collect()
}
