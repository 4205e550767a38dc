//! Generalized and confluent hypergeometric series.
//!
//! ```text
//! F(a; b; t) = Σ_i (a_0)_i ⋯ (a_p)_i / ((1)_i (b_1)_i ⋯ (b_q)_i) · t^i
//! ```
//!
//! and the operator `δ(δ+b_1-1)⋯(δ+b_q-1) - t(δ+a_0)⋯(δ+a_p)`, `δ = t d/dt`,
//! which annihilates it. The `(1)_i` factor can be switched off to reproduce a
//! series written without it; that variant does not solve the operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{distance_to_integer, re, Field, C64};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 100_000;

/// Consecutive small terms required before truncating.
const SMALL_RUN: usize = 3;

/// Rising factorial `(a)_i = a(a+1)⋯(a+i-1)`, `(a)_0 = 1`.
pub fn pochhammer<F: Field>(a: &F, i: usize) -> F {
    (0..i).fold(F::one(), |acc, m| acc * (a.clone() + F::from_i64(m as i64)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HGSpec {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub includes_factorial: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Convergence {
    Entire,
    UnitDisk,
    Nowhere,
}

/// Value of a truncated series and how many terms were summed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: C64,
    pub terms_used: usize,
}

impl HGSpec {
    pub fn new(upper: Vec<C64>, lower: Vec<C64>) -> Self {
        HGSpec { upper, lower, includes_factorial: true }
    }

    /// The series without the `(1)_i` denominator.
    pub fn without_factorial(upper: Vec<C64>, lower: Vec<C64>) -> Self {
        HGSpec { upper, lower, includes_factorial: false }
    }

    pub fn from_reals(upper: &[f64], lower: &[f64]) -> Self {
        Self::new(upper.iter().copied().map(re).collect(), lower.iter().copied().map(re).collect())
    }

    /// `c_i / c_{i-1}` for `i ≥ 1`.
    pub fn term_ratio(&self, i: usize) -> C64 {
        let shift = re(i as f64 - 1.0);
        let num: C64 = self.upper.iter().map(|a| a + shift).product();
        let mut den: C64 = self.lower.iter().map(|b| b + shift).product();
        if self.includes_factorial {
            den *= re(i as f64);
        }
        num / den
    }

    fn check_lower(&self) -> Result<()> {
        for (index, b) in self.lower.iter().enumerate() {
            if b.re < 0.5 && distance_to_integer(*b) < 1e-12 {
                return Err(Error::LowerParameterPole { index: index + 1, value: format!("{b}") });
            }
        }
        Ok(())
    }

    /// Whether some upper parameter is a non-positive integer (polynomial series).
    pub fn terminates(&self) -> bool {
        self.upper.iter().any(|a| a.re < 0.5 && distance_to_integer(*a) < 1e-12)
    }

    fn convergence(&self) -> Convergence {
        let p = self.upper.len() + usize::from(!self.includes_factorial);
        let q = self.lower.len();
        match p.cmp(&(q + 1)) {
            std::cmp::Ordering::Less => Convergence::Entire,
            std::cmp::Ordering::Equal => Convergence::UnitDisk,
            std::cmp::Ordering::Greater => Convergence::Nowhere,
        }
    }

    fn check_domain(&self, t: C64) -> Result<()> {
        self.check_lower()?;
        if self.terminates() || t == C64::new(0.0, 0.0) {
            return Ok(());
        }
        match self.convergence() {
            Convergence::Entire => Ok(()),
            Convergence::UnitDisk if t.norm() < 1.0 => Ok(()),
            _ => Err(Error::Divergent { modulus: t.norm() }),
        }
    }

    /// The first `count` series coefficients `c_0 = 1, c_1, …`.
    pub fn coefficients(&self, count: usize) -> Result<Vec<C64>> {
        self.check_lower()?;
        let mut out = Vec::with_capacity(count);
        let mut c = re(1.0);
        for i in 0..count {
            if i > 0 {
                c *= self.term_ratio(i);
            }
            out.push(c);
        }
        Ok(out)
    }

    /// Whether the spec has the shape `n+1` upper over `n` lower parameters.
    pub fn is_generalized(&self) -> bool {
        self.includes_factorial && self.upper.len() == self.lower.len() + 1
    }
}

/// Neumaier compensated summation over complex values.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: [f64; 2],
    comp: [f64; 2],
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, z: C64) {
        for (k, x) in [z.re, z.im].into_iter().enumerate() {
            let s = self.sum[k];
            let t = s + x;
            if s.abs() >= x.abs() {
                self.comp[k] += (s - t) + x;
            } else {
                self.comp[k] += (x - t) + s;
            }
            self.sum[k] = t;
        }
    }

    pub(crate) fn value(&self) -> C64 {
        C64::new(self.sum[0] + self.comp[0], self.sum[1] + self.comp[1])
    }
}

/// Sum the series at `t`, stopping once three successive terms are each
/// below `rtol·|partial sum|`.
pub fn eval_series(spec: &HGSpec, t: C64, rtol: f64) -> Result<SeriesValue> {
    let (values, terms_used) = eval_with_derivatives(spec, t, rtol, 0)?;
    Ok(SeriesValue { value: values[0], terms_used })
}

/// Series value and its first `order` derivatives in `t`, truncated by the
/// same rule applied to every derivative.
pub fn eval_with_derivatives(
    spec: &HGSpec,
    t: C64,
    rtol: f64,
    order: usize,
) -> Result<(Vec<C64>, usize)> {
    if !(rtol > 0.0) {
        return Err(Error::InvalidParameters(format!("rtol must be positive, got {rtol}")));
    }
    spec.check_domain(t)?;
    if t == C64::new(0.0, 0.0) {
        // d^k/dt^k at 0 is k!·c_k
        let coeffs = spec.coefficients(order + 1)?;
        let mut fact = 1.0;
        let values = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect();
        return Ok((values, 1));
    }

    let mut sums = vec![CompensatedSum::default(); order + 1];
    let mut coeff = re(1.0);
    let mut small_run = 0;
    for i in 0..MAX_TERMS {
        if i > 0 {
            coeff *= spec.term_ratio(i);
        }
        let mut all_small = true;
        for (d, sum) in sums.iter_mut().enumerate() {
            if i < d {
                continue;
            }
            // i(i-1)⋯(i-d+1) c_i t^{i-d}
            let falling: f64 = (0..d).map(|m| (i - m) as f64).product();
            let term = coeff * falling * t.powu((i - d) as u32);
            sum.add(term);
            if term.norm() >= rtol * sum.value().norm() {
                all_small = false;
            }
        }
        if coeff == C64::new(0.0, 0.0) && i > 0 {
            return Ok((sums.iter().map(CompensatedSum::value).collect(), i + 1));
        }
        small_run = if all_small && i >= order { small_run + 1 } else { 0 };
        if small_run >= SMALL_RUN {
            return Ok((sums.iter().map(CompensatedSum::value).collect(), i + 1));
        }
    }
    Err(Error::SeriesCapExceeded { cap: MAX_TERMS })
}

fn lower_poly(lower: &[C64], s: C64) -> C64 {
    s * lower.iter().map(|b| s + b - re(1.0)).product::<C64>()
}

fn upper_poly(upper: &[C64], s: C64) -> C64 {
    upper.iter().map(|a| s + a).product()
}

/// Apply `δΠ(δ+b_j-1) - tΠ(δ+a_j)` to `t^ρ Σ_m c_m t^m` (finitely many `c_m`)
/// at `t`, and return the image magnitude normalized by its largest monomial.
/// The truncation leftover `-c_N Q(N+ρ) t^{N+1+ρ}` is included.
pub fn operator_residual(upper: &[C64], lower: &[C64], exponent: C64, coeffs: &[C64], t: C64) -> f64 {
    let mut total = CompensatedSum::default();
    let mut scale: f64 = 0.0;
    let mut prev_q = re(0.0);
    let mut tp = re(1.0);
    for (m, c) in coeffs.iter().enumerate() {
        let s = exponent + re(m as f64);
        let a_piece = c * lower_poly(lower, s) * tp;
        let b_piece = prev_q * tp;
        scale = scale.max(a_piece.norm()).max(b_piece.norm());
        total.add(a_piece - b_piece);
        prev_q = c * upper_poly(upper, s);
        tp *= t;
    }
    let leftover = prev_q * tp;
    scale = scale.max(leftover.norm());
    total.add(-leftover);
    if scale == 0.0 {
        return 0.0;
    }
    total.value().norm() / scale
}

/// Residual of the defining operator on the series of the same parameters at `t`.
pub fn ode_residual(spec: &HGSpec, t: C64, rtol: f64) -> Result<f64> {
    operator_residual_on(spec, &spec.upper, &spec.lower, re(0.0), t, rtol)
}

/// Residual of the operator with parameters `upper`/`lower` applied to
/// `t^exponent · F(series; t)`.
///
/// Coefficients of `series` are generated until three successive leftover
/// pieces `c_m Q(m+ρ) t^{m+1}` fall below `rtol` times the largest monomial.
pub fn operator_residual_on(
    series: &HGSpec,
    upper: &[C64],
    lower: &[C64],
    exponent: C64,
    t: C64,
    rtol: f64,
) -> Result<f64> {
    series.check_domain(t)?;
    let mut coeffs = Vec::new();
    let mut c = re(1.0);
    let mut scale: f64 = 0.0;
    let mut small_run = 0;
    let mut tp = re(1.0);
    for m in 0..MAX_TERMS {
        if m > 0 {
            c *= series.term_ratio(m);
        }
        coeffs.push(c);
        let s = exponent + re(m as f64);
        scale = scale.max((c * lower_poly(lower, s) * tp).norm());
        let leftover = (c * upper_poly(upper, s) * tp * t).norm();
        scale = scale.max(leftover);
        tp *= t;
        small_run = if leftover <= rtol * scale { small_run + 1 } else { 0 };
        if small_run >= SMALL_RUN || (c == re(0.0) && m > 0) {
            return Ok(operator_residual(upper, lower, exponent, &coeffs, t));
        }
    }
    Err(Error::SeriesCapExceeded { cap: MAX_TERMS })
}

/// Local exponents of the generalized hypergeometric equation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiemannScheme {
    pub at_zero: Vec<C64>,
    pub at_one: Vec<C64>,
    pub at_infinity: Vec<C64>,
}

impl RiemannScheme {
    pub fn exponent_sum(&self) -> C64 {
        self.at_zero.iter().chain(&self.at_one).chain(&self.at_infinity).sum()
    }
}

/// Exponents at `t = 0, 1, ∞` for an `n+1` over `n` spec.
///
/// The non-integer exponent at `t = 1` is `n - Σ(1-b_i) - Σa_i`, which makes
/// the total equal `n(n+1)/2` (Fuchs' relation for three singular points).
pub fn riemann_scheme(spec: &HGSpec) -> Result<RiemannScheme> {
    if !spec.is_generalized() {
        return Err(Error::InvalidParameters(
            "Riemann scheme needs n+1 upper and n lower parameters with the (1)_i factor".into(),
        ));
    }
    let n = spec.lower.len();
    let mut at_zero = vec![re(0.0)];
    at_zero.extend(spec.lower.iter().map(|b| re(1.0) - b));
    let mut at_one: Vec<C64> = (0..n).map(|j| re(j as f64)).collect();
    let sum_one_minus_b: C64 = spec.lower.iter().map(|b| re(1.0) - b).sum();
    let sum_a: C64 = spec.upper.iter().sum();
    at_one.push(re(n as f64) - sum_one_minus_b - sum_a);
    Ok(RiemannScheme { at_zero, at_one, at_infinity: spec.upper.clone() })
}
