//! Fundamental solutions at `t = 0`.
//!
//! All three constructions produce the `k`-th solution in its gauge frame
//! `x^k`, where it is a power series with exponent zero. [`SeriesSolution::eval`]
//! maps back to the original frame, where the solution is
//! `t^{-c_k}(f^{k,k}, …, f^{k,0}, t f^{k,n}, …, t f^{k,k+1})`.

use serde::Serialize;

use super::{gauge_exponent, gauge_pattern, shifted_system, LinearSystem, SystemKind};
use crate::error::{Error, Result};
use crate::hyperfn::{eval_series, operator_residual_on, HGSpec};
use crate::matrix::{norm_inf, Matrix};
use crate::params::{modulo, Kind, ParameterSet};
use crate::scalar::{re, Field, C64};

/// Relative tolerance used when summing the hypergeometric components.
pub const EVAL_RTOL: f64 = 1e-16;

/// Central-difference step for residuals of evaluated solutions.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolutionSource {
    Recurrence,
    ClosedForm,
    TheoremHG,
}

/// `f^{k,l}(t) = prefactor · F(spec; t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HGComponent {
    pub l: usize,
    pub prefactor: C64,
    pub spec: HGSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesSolution {
    pub n: usize,
    pub k: usize,
    /// Leading exponent `-c_k` in the original frame.
    pub exponent: C64,
    /// `coeffs[i]` is the vector coefficient of `t^i` in the gauge frame.
    pub coeffs: Vec<Vec<C64>>,
    pub source: SolutionSource,
    pub kind: SystemKind,
    /// Gauge-frame component `m` is `components[m]`, i.e. `f^{k,n-m}`.
    pub components: Option<Vec<HGComponent>>,
}

impl SeriesSolution {
    /// Gauge-frame value at `t`. Hypergeometric components are summed to
    /// [`EVAL_RTOL`]; otherwise the stored coefficients are summed.
    pub fn eval_gauge(&self, t: C64) -> Result<Vec<C64>> {
        if let Some(components) = &self.components {
            return components
                .iter()
                .map(|c| Ok(c.prefactor * eval_series(&c.spec, t, EVAL_RTOL)?.value))
                .collect();
        }
        let mut acc = vec![re(0.0); self.n + 1];
        for coeff in self.coeffs.iter().rev() {
            for (a, c) in acc.iter_mut().zip(coeff) {
                *a = *a * t + c;
            }
        }
        Ok(acc)
    }

    /// Original-frame value at real `t > 0` (principal branch of `t^{-c_k}`).
    pub fn eval(&self, t: f64) -> Result<Vec<C64>> {
        if !(t > 0.0) {
            return Err(Error::BranchDomain { t });
        }
        let xk = self.eval_gauge(re(t))?;
        let (perm, pow) = gauge_pattern(self.n, self.k);
        let tc = re(t).powc(self.exponent);
        let mut x = vec![re(0.0); self.n + 1];
        for i in 0..=self.n {
            x[perm[i]] = tc * t.powi(-pow[i] as i32) * xk[i];
        }
        Ok(x)
    }

    /// Central-difference derivative of [`SeriesSolution::eval`].
    pub fn derivative(&self, t: f64, h: f64) -> Result<Vec<C64>> {
        let plus = self.eval(t + h)?;
        let minus = self.eval(t - h)?;
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    }

    /// Original-frame coefficient vectors `V_m`, `x = t^{-c_k} Σ V_m t^m`,
    /// for `m` up to the stored depth.
    pub fn original_coeffs(&self) -> Vec<Vec<C64>> {
        let (perm, pow) = gauge_pattern(self.n, self.k);
        let depth = self.coeffs.len();
        (0..depth)
            .map(|m| {
                let mut v = vec![re(0.0); self.n + 1];
                for i in 0..=self.n {
                    let shift = (-pow[i]) as usize;
                    if m >= shift {
                        v[perm[i]] = self.coeffs[m - shift][i];
                    }
                }
                v
            })
            .collect()
    }

    /// Largest relative defect of the Frobenius recursion of `sys` on the
    /// original-frame coefficients.
    pub fn coefficient_residual(&self, sys: &LinearSystem) -> f64 {
        let v = self.original_coeffs();
        let c = -self.exponent;
        let mut worst: f64 = 0.0;
        for m in 1..v.len() {
            let s = re(m as f64) - c;
            let (lhs, rhs) = match sys.kind {
                SystemKind::Fuchsian => {
                    let lhs: Vec<C64> = v[m]
                        .iter()
                        .zip(&v[m - 1])
                        .map(|(a, b)| s * a - (s - re(1.0)) * b)
                        .collect();
                    let a0d: Vec<C64> = v[m].iter().zip(&v[m - 1]).map(|(a, b)| a - b).collect();
                    let mut rhs = sys.a0.mul_vec(&a0d);
                    for (r, q) in rhs.iter_mut().zip(sys.a1.mul_vec(&v[m - 1])) {
                        *r += q;
                    }
                    (lhs, rhs)
                }
                SystemKind::Confluent => {
                    let lhs: Vec<C64> = v[m].iter().map(|a| s * a).collect();
                    let mut rhs = sys.a0.mul_vec(&v[m]);
                    for (r, q) in rhs.iter_mut().zip(sys.a1.mul_vec(&v[m - 1])) {
                        *r += q;
                    }
                    (lhs, rhs)
                }
            };
            let diff: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            let scale = norm_inf(&v[m]).max(norm_inf(&v[m - 1])).max(f64::MIN_POSITIVE);
            worst = worst.max(norm_inf(&diff) / (scale * (1.0 + m as f64)));
        }
        worst
    }
}

/// Residual `|x' - M(t) x|` of an evaluated solution at `t`, with `x'` from
/// central differences of step `h`, relative to the larger of `|x|`, `|x'|`
/// and `|M(t) x|`.
pub fn system_residual(sol: &SeriesSolution, sys: &LinearSystem, t: f64, h: f64) -> Result<f64> {
    let x = sol.eval(t)?;
    let dx = sol.derivative(t, h)?;
    let f = sys.field(re(t), &x)?;
    let diff: Vec<C64> = dx.iter().zip(&f).map(|(a, b)| a - b).collect();
    let scale = norm_inf(&x).max(norm_inf(&dx)).max(norm_inf(&f)).max(f64::MIN_POSITIVE);
    Ok(norm_inf(&diff) / scale)
}

/// The step relations of the series recursion:
/// `r_0 = A_0 x_0` and `r_{i+1} = (A_0-(i+1)I)x_{i+1} - (A_0-A_1-iI)x_i`.
pub fn recurrence_residuals<F: Field>(sys_k: &LinearSystem<F>, coeffs: &[Vec<F>]) -> Vec<Vec<F>> {
    let mut out = Vec::with_capacity(coeffs.len());
    if let Some(first) = coeffs.first() {
        out.push(sys_k.a0.mul_vec(first));
    }
    let drift = sys_k.a0.sub(&sys_k.a1);
    for i in 0..coeffs.len().saturating_sub(1) {
        let lhs = sys_k.a0.shift_diagonal(&F::from_i64(i as i64 + 1)).mul_vec(&coeffs[i + 1]);
        let rhs = drift.shift_diagonal(&F::from_i64(i as i64)).mul_vec(&coeffs[i]);
        out.push(lhs.into_iter().zip(rhs).map(|(a, b)| a - b).collect());
    }
    out
}

/// Solve the series recursion of the gauge-frame system for `depth`
/// coefficient vectors.
///
/// The kernel vector of `A_0^k` is normalized to last entry one, which is the
/// last entry of the closed-form `x_0^k`.
pub fn solve_recurrence<F: Field>(sys_k: &LinearSystem<F>, depth: usize) -> Result<Vec<Vec<F>>> {
    let n = sys_k.n;
    if depth == 0 {
        return Ok(Vec::new());
    }
    if !sys_k.a0.is_upper_triangular(0.0) {
        return Err(Error::InvalidParameters("A_0^k must be upper triangular".into()));
    }
    let tol = 1e-13;
    // Top block U u = -A0[0..n, n]; x_0 = (u, 1).
    let top = Matrix::from_fn(n, n, |i, j| sys_k.a0[(i, j)].clone());
    let rhs: Vec<F> = (0..n).map(|i| -sys_k.a0[(i, n)].clone()).collect();
    let mut x0 = top.solve_upper(&rhs, tol)?;
    x0.push(F::one());
    let mut out = vec![x0];
    let drift = sys_k.a0.sub(&sys_k.a1);
    for i in 0..depth - 1 {
        let step = sys_k.a0.shift_diagonal(&F::from_i64(i as i64 + 1));
        let b = drift.shift_diagonal(&F::from_i64(i as i64)).mul_vec(&out[i]);
        let next = step.solve_upper(&b, tol).map_err(|_| {
            Error::Resonance(format!("A_0^k - {}I is singular", i + 1))
        })?;
        out.push(next);
    }
    Ok(out)
}

fn checked_div<F: Field>(num: F, den: F, what: &str) -> Result<F> {
    if den.is_negligible(0.0) {
        return Err(Error::Resonance(format!("vanishing {what}")));
    }
    Ok(num / den)
}

/// Closed-form gauge-frame coefficients `x_i^k`, `i < depth`.
///
/// Component `m` is
/// `Π_{j=0}^{n-1-m} (α_{2k-2j+1}^{2j})_{i+1}/(α_{2k-2j}^{2j+1})_{i+1}
///  · Π_{j=0}^{m} (α_{2k+2j+3}^{2n-2j})_i/(α_{2k+2j+2}^{2n-2j+1})_i`,
/// accumulated one term ratio at a time.
pub fn closed_form_coeffs<F: Field>(p: &ParameterSet<F>, k: usize, depth: usize) -> Result<Vec<Vec<F>>> {
    let n = p.n() as i64;
    super::check_branch(p.n(), k)?;
    let k = k as i64;
    let mut comps: Vec<Vec<F>> = Vec::with_capacity(p.n() + 1);
    for m in 0..=n {
        let first: Vec<(F, F)> = (0..n - m)
            .map(|j| (p.partial_sum(2 * k - 2 * j + 1, 2 * j), p.partial_sum(2 * k - 2 * j, 2 * j + 1)))
            .collect();
        let second: Vec<(F, F)> = (0..=m)
            .map(|j| {
                (p.partial_sum(2 * k + 2 * j + 3, 2 * n - 2 * j), p.partial_sum(2 * k + 2 * j + 2, 2 * n - 2 * j + 1))
            })
            .collect();
        let mut value = F::one();
        for (a, b) in &first {
            value = checked_div(value * a.clone(), b.clone(), "lower Pochhammer factor")?;
        }
        let mut seq = Vec::with_capacity(depth);
        for i in 0..depth {
            if i > 0 {
                let fi = F::from_i64(i as i64);
                let gi = F::from_i64(i as i64 - 1);
                for (a, b) in &first {
                    value = checked_div(value * (a.clone() + fi.clone()), b.clone() + fi.clone(), "lower Pochhammer factor")?;
                }
                for (a, b) in &second {
                    value = checked_div(value * (a.clone() + gi.clone()), b.clone() + gi.clone(), "lower Pochhammer factor")?;
                }
            }
            seq.push(value.clone());
        }
        comps.push(seq);
    }
    Ok((0..depth).map(|i| comps.iter().map(|c| c[i].clone()).collect()).collect())
}

fn generic_only(p: &ParameterSet) -> Result<()> {
    if p.kind() != Kind::Generic {
        return Err(Error::InvalidParameters("expected generic parameters".into()));
    }
    Ok(())
}

/// `k`-th solution from the series recursion of the gauge-frame system.
pub fn recurrence_solution(p: &ParameterSet, k: usize, depth: usize) -> Result<SeriesSolution> {
    let sys_k = shifted_system(p, k)?;
    let coeffs = solve_recurrence(&sys_k, depth)?;
    Ok(SeriesSolution {
        n: p.n(),
        k,
        exponent: -gauge_exponent(p, k),
        coeffs,
        source: SolutionSource::Recurrence,
        kind: SystemKind::Fuchsian,
        components: None,
    })
}

/// `k`-th solution from the closed-form coefficient products.
pub fn closed_form_solution(p: &ParameterSet, k: usize, depth: usize) -> Result<SeriesSolution> {
    generic_only(p)?;
    Ok(SeriesSolution {
        n: p.n(),
        k,
        exponent: -gauge_exponent(p, k),
        coeffs: closed_form_coeffs(p, k, depth)?,
        source: SolutionSource::ClosedForm,
        kind: SystemKind::Fuchsian,
        components: None,
    })
}

/// `f^{k,l}` of the generic system:
/// prefactor `Π_{i=1}^{l} α_{2k-2i+3}^{2i-2}/α_{2k-2i+2}^{2i-1}`,
/// `a_0 = α_{2k-2n+1}^{2n}`, and `a_i, b_i` shifted by one for `i ≤ l`.
pub fn generic_component(p: &ParameterSet, k: usize, l: usize) -> Result<HGComponent> {
    let (n, k, li) = (p.n() as i64, k as i64, l as i64);
    let mut prefactor = re(1.0);
    for i in 1..=li {
        prefactor = checked_div(
            prefactor * p.partial_sum(2 * k - 2 * i + 3, 2 * i - 2),
            p.partial_sum(2 * k - 2 * i + 2, 2 * i - 1),
            "prefactor denominator",
        )?;
    }
    let mut upper = vec![p.partial_sum(2 * k - 2 * n + 1, 2 * n)];
    let mut lower = Vec::with_capacity(p.n());
    for i in 1..=n {
        let shift = if i <= li { re(1.0) } else { re(0.0) };
        upper.push(shift + p.partial_sum(2 * k - 2 * i + 3, 2 * i - 2));
        lower.push(shift + p.partial_sum(2 * k - 2 * i + 2, 2 * i - 1));
    }
    Ok(HGComponent { l, prefactor, spec: HGSpec::new(upper, lower) })
}

/// `mod[i, n+1]`, the representative in `0..=n`.
pub fn mod_rank(i: i64, n: usize) -> i64 {
    modulo(i, n as i64 + 1)
}

/// Indices `i ∈ r..=n` whose `a_i` is shifted by one in `f_r^{k,l}`.
fn confluent_shifts(n: i64, r: i64, k: i64, l: i64) -> Vec<i64> {
    let upper_block = |hi: i64| (r..=hi).collect::<Vec<_>>();
    let lower_block = |hi: i64| (n + r - k..=hi).collect::<Vec<_>>();
    if k + 1 <= r {
        if l < k + 2 {
            Vec::new()
        } else {
            upper_block(r - k + l - 2)
        }
    } else if l < k - r + 1 {
        lower_block(n + r - k + l - 1)
    } else if l < k + 2 {
        lower_block(n)
    } else {
        let mut v = upper_block(r - k + l - 2);
        v.extend(lower_block(n));
        v
    }
}

/// `f_r^{k,l}` of the level-`r` confluent system.
///
/// The superscript of `a_i = α_{2r-2i-1}^{2k-2r+2i+2}` is reduced modulo
/// `2n+2`; without the reduction the series fails the system for `r < k+1`.
pub fn confluent_component(p: &ParameterSet, k: usize, l: usize) -> Result<HGComponent> {
    let r = match p.kind() {
        Kind::Degenerate(r) => r as i64,
        Kind::Generic => return Err(Error::InvalidParameters("expected Degenerate(r)".into())),
    };
    let (n, k, li) = (p.n() as i64, k as i64, l as i64);
    let mut prefactor = re(1.0);
    for i in 1..=li {
        if mod_rank(k - i + 1, p.n()) >= r {
            prefactor *= p.partial_sum(2 * k - 2 * i + 3, 2 * i - 2);
        }
        prefactor = checked_div(prefactor, p.partial_sum(2 * k - 2 * i + 2, 2 * i - 1), "prefactor denominator")?;
    }
    let shifts = confluent_shifts(n, r, k, li);
    let upper = (r..=n)
        .map(|i| {
            let shift = if shifts.contains(&i) { re(1.0) } else { re(0.0) };
            shift + p.partial_sum(2 * r - 2 * i - 1, modulo(2 * k - 2 * r + 2 * i + 2, 2 * n + 2))
        })
        .collect();
    let lower = (1..=n)
        .map(|i| {
            let shift = if i <= li { re(1.0) } else { re(0.0) };
            shift + p.partial_sum(2 * k - 2 * i + 2, 2 * i - 1)
        })
        .collect();
    Ok(HGComponent { l, prefactor, spec: HGSpec::new(upper, lower) })
}

fn assemble(p: &ParameterSet, k: usize, depth: usize, kind: SystemKind, components: Vec<HGComponent>) -> Result<SeriesSolution> {
    let n = p.n();
    let mut coeffs = vec![vec![re(0.0); n + 1]; depth];
    for (m, comp) in components.iter().enumerate() {
        for (i, c) in comp.spec.coefficients(depth)?.into_iter().enumerate() {
            coeffs[i][m] = comp.prefactor * c;
        }
    }
    Ok(SeriesSolution {
        n,
        k,
        exponent: -gauge_exponent(p, k),
        coeffs,
        source: SolutionSource::TheoremHG,
        kind,
        components: Some(components),
    })
}

/// `k`-th fundamental solution of the Fuchsian system in hypergeometric form;
/// `depth` coefficient vectors are also stored.
pub fn fundamental_solution(p: &ParameterSet, k: usize, depth: usize) -> Result<SeriesSolution> {
    generic_only(p)?;
    super::check_branch(p.n(), k)?;
    let n = p.n();
    let components = (0..=n).map(|m| generic_component(p, k, n - m)).collect::<Result<Vec<_>>>()?;
    assemble(p, k, depth, SystemKind::Fuchsian, components)
}

/// `k`-th fundamental solution of the level-`r` confluent system.
pub fn confluent_fundamental_solution(p: &ParameterSet, k: usize, depth: usize) -> Result<SeriesSolution> {
    super::check_branch(p.n(), k)?;
    let n = p.n();
    let components = (0..=n).map(|m| confluent_component(p, k, n - m)).collect::<Result<Vec<_>>>()?;
    assemble(p, k, depth, SystemKind::Confluent, components)
}

/// All fundamental solutions matching the parameter kind.
pub fn all_fundamental_solutions(p: &ParameterSet, depth: usize) -> Result<Vec<SeriesSolution>> {
    (0..=p.n())
        .map(|k| match p.kind() {
            Kind::Generic => fundamental_solution(p, k, depth),
            Kind::Degenerate(_) => confluent_fundamental_solution(p, k, depth),
        })
        .collect()
}

/// Operator parameters satisfied by original-frame component `i` of every
/// fundamental solution.
///
/// Generic: `a_0 = α_1^{2n}`, `a_j = α_{2n-2j+3}^{2j-2}`,
/// `b_j = α_{2n-2j+2}^{2j-1}`, both shifted by one for `j ≤ n-i`.
/// Confluent level `r`: `a_j = α_{2r-2j-1}^{2n-2r+2j+2}` (superscript reduced
/// modulo `2n+2`) for `j = r..n`, shifted by one when `i ≤ r-1` or
/// `j ≤ n+r-i-1`; `b_j` as in the generic case.
pub fn component_ode_params(p: &ParameterSet, i: usize) -> Result<HGSpec> {
    let n = p.n() as i64;
    if i > p.n() {
        return Err(Error::InvalidParameters(format!("component index {i} outside 0..={n}")));
    }
    let i = i as i64;
    let lower: Vec<C64> = (1..=n)
        .map(|j| {
            let shift = if j <= n - i { re(1.0) } else { re(0.0) };
            shift + p.partial_sum(2 * n - 2 * j + 2, 2 * j - 1)
        })
        .collect();
    let upper = match p.kind() {
        Kind::Generic => {
            let mut upper = vec![p.partial_sum(1, 2 * n)];
            upper.extend((1..=n).map(|j| {
                let shift = if j <= n - i { re(1.0) } else { re(0.0) };
                shift + p.partial_sum(2 * n - 2 * j + 3, 2 * j - 2)
            }));
            upper
        }
        Kind::Degenerate(r) => {
            let r = r as i64;
            (r..=n)
                .map(|j| {
                    let shift = if i <= r - 1 || j <= n + r - i - 1 { re(1.0) } else { re(0.0) };
                    shift + p.partial_sum(2 * r - 2 * j - 1, modulo(2 * n - 2 * r + 2 * j + 2, 2 * n + 2))
                })
                .collect()
        }
    };
    Ok(HGSpec::new(upper, lower))
}

/// Operator residual of original-frame component `i` of solution `k` against
/// [`component_ode_params`] at `t`.
pub fn component_ode_residual(p: &ParameterSet, k: usize, i: usize, t: C64, rtol: f64) -> Result<f64> {
    let n = p.n();
    super::check_branch(n, k)?;
    let l = if i <= k { k - i } else { n + k + 1 - i };
    let comp = match p.kind() {
        Kind::Generic => generic_component(p, k, l)?,
        Kind::Degenerate(_) => confluent_component(p, k, l)?,
    };
    let op = component_ode_params(p, i)?;
    let exponent = -gauge_exponent(p, k) + if i > k { re(1.0) } else { re(0.0) };
    operator_residual_on(&comp.spec, &op.upper, &op.lower, exponent, t, rtol)
}

/// Matrix whose row `k` is solution `k` at `t`, scaled to unit max-norm, so
/// the determinant does not depend on how each solution is normalized.
pub fn scaled_solution_matrix(solutions: &[SeriesSolution], t: f64) -> Result<Matrix<C64>> {
    let rows = solutions.iter().map(|s| s.eval(t)).collect::<Result<Vec<_>>>()?;
    let size = rows.len();
    let mut m = Matrix::from_fn(size, size, |k, i| rows[k][i]);
    for k in 0..size {
        let scale = (0..size).map(|i| m[(k, i)].norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            for i in 0..size {
                m[(k, i)] /= scale;
            }
        }
    }
    Ok(m)
}
