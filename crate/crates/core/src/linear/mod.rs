//! Linear systems obtained by specializing the Hamiltonian flows at `y = 0`:
//! the Fuchsian system with singular points `0, 1, ∞`, its dual, and the
//! confluent systems of the degenerate hierarchy.

mod series;

pub use series::*;

use crate::error::{Error, Result};
use crate::matrix::{norm_inf, Matrix};
use crate::params::{Kind, ParameterSet};
use crate::params::RESONANCE_MARGIN;
use crate::scalar::{ratio, re, Field, C64};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of the coefficient of `x` in `dx/dt`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// `dx/dt = (A0/t + A1/(1-t)) x`
    Fuchsian,
    /// `dx/dt = (A0/t + A1) x`
    Confluent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem<F = C64> {
    pub n: usize,
    pub a0: Matrix<F>,
    pub a1: Matrix<F>,
    pub kind: SystemKind,
    pub params: ParameterSet<F>,
}

fn require_generic<F: Field>(p: &ParameterSet<F>) -> Result<()> {
    match p.kind() {
        Kind::Generic => Ok(()),
        Kind::Degenerate(r) => Err(Error::InvalidParameters(format!(
            "expected generic parameters, got Degenerate({r})"
        ))),
    }
}

fn ii(i: usize) -> i64 {
    i as i64
}

/// The Fuchsian system satisfied by `x` on the specialization `y = 0, η = 0`.
pub fn build_fuchsian<F: Field>(p: &ParameterSet<F>) -> Result<LinearSystem<F>> {
    require_generic(p)?;
    let n = p.n();
    let a0 = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j && i < n {
            -p.partial_sum(2 * ii(i) + 2, 2 * ii(n) - 2 * ii(i) - 1)
        } else if i < j {
            p.alpha(2 * ii(j) + 1).clone()
        } else {
            F::zero()
        }
    });
    let a1 = Matrix::from_fn(n + 1, n + 1, |_, j| p.alpha(2 * ii(j) + 1).clone());
    Ok(LinearSystem { n, a0, a1, kind: SystemKind::Fuchsian, params: p.clone() })
}

/// The Fuchsian system satisfied by `y` on the specialization
/// `x_i = 0 (i < n)`, `x_n y_n + η = 0`, `η = α_{2n+1}`.
pub fn build_dual<F: Field>(p: &ParameterSet<F>) -> Result<LinearSystem<F>> {
    require_generic(p)?;
    let n = p.n();
    let last = p.alpha(2 * ii(n) + 1).clone();
    let a0 = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == n {
            last.clone()
        } else if i == j {
            p.partial_sum(2 * ii(i) + 2, 2 * ii(n) - 2 * ii(i) - 1)
        } else if j < i {
            -p.alpha(2 * ii(i) + 1).clone()
        } else {
            F::zero()
        }
    });
    let a1 = Matrix::from_fn(n + 1, n + 1, |i, _| {
        if i == n {
            last.clone()
        } else {
            -p.alpha(2 * ii(i) + 1).clone()
        }
    });
    Ok(LinearSystem { n, a0, a1, kind: SystemKind::Fuchsian, params: p.with_eta(last.clone()) })
}

/// The confluent system of the level-`r` degenerate hierarchy.
pub fn build_confluent<F: Field>(p: &ParameterSet<F>) -> Result<LinearSystem<F>> {
    let n = p.n();
    let r = match p.kind() {
        Kind::Degenerate(r) if (1..=n + 1).contains(&r) => r,
        Kind::Degenerate(r) => {
            return Err(Error::InvalidParameters(format!("r = {r} outside 1..={}", n + 1)))
        }
        Kind::Generic => {
            return Err(Error::InvalidParameters("confluent system needs Degenerate(r)".into()))
        }
    };
    let a0 = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j && i < n {
            -p.partial_sum(2 * ii(i) + 2, 2 * ii(n) - 2 * ii(i) - 1)
        } else if i + 2 <= r && j == i + 1 {
            F::one()
        } else if i + 1 >= r && i < j {
            p.alpha(2 * ii(j) + 1).clone()
        } else {
            F::zero()
        }
    });
    let a1 = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if j == 0 && i + 1 >= r {
            F::one()
        } else {
            F::zero()
        }
    });
    Ok(LinearSystem { n, a0, a1, kind: SystemKind::Confluent, params: p.clone() })
}

/// The matrices `A_0^k, A_1^k` of the system satisfied by `x^k`, written
/// directly as index-shifted sums.
pub fn shifted_system<F: Field>(p: &ParameterSet<F>, k: usize) -> Result<LinearSystem<F>> {
    require_generic(p)?;
    let n = p.n();
    check_branch(n, k)?;
    let k = ii(k);
    let a0 = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j && i < n {
            -p.partial_sum(2 * k + 2 * ii(i) + 4, 2 * ii(n) - 2 * ii(i) - 1)
        } else if i < j {
            p.alpha(2 * ii(j) + 2 * k + 3).clone()
        } else {
            F::zero()
        }
    });
    let a1 = Matrix::from_fn(n + 1, n + 1, |_, j| p.alpha(2 * ii(j) + 2 * k + 3).clone());
    Ok(LinearSystem { n, a0, a1, kind: SystemKind::Fuchsian, params: p.clone() })
}

fn check_branch(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParameters(format!("branch index k = {k} outside 0..={n}")));
    }
    Ok(())
}

/// Exponent `c_k = α_{2k+2}^{2n-2k-1}` of the gauge factor `t^{c_k}`; the
/// `k`-th fundamental solution behaves like `t^{-c_k}`.
pub fn gauge_exponent<F: Field>(p: &ParameterSet<F>, k: usize) -> F {
    let (n, k) = (ii(p.n()), ii(k));
    p.partial_sum(2 * k + 2, 2 * n - 2 * k - 1)
}

/// Permutation and `t`-powers of the gauge matrix: `(P x)_i = x_{π(i)}`,
/// and row `i` carries `t^{e_i}` with `e_i ∈ {-1, 0}`.
pub fn gauge_pattern(n: usize, k: usize) -> (Vec<usize>, Vec<i64>) {
    let perm = (0..=n).map(|i| if i + k < n { i + k + 1 } else { i + k - n }).collect();
    let pow = (0..=n).map(|i| if i + k < n { -1 } else { 0 }).collect();
    (perm, pow)
}

/// Transform the Fuchsian system by `x^k = t^{c_k} D(t) P x`.
///
/// Each entry of the new coefficient is `t^{e_i - e_j}(B0/t + B1/(1-t))_{ij}`;
/// the transform is rejected if any entry fails to stay Fuchsian.
pub fn gauge_transform<F: Field>(sys: &LinearSystem<F>, k: usize) -> Result<LinearSystem<F>> {
    if sys.kind != SystemKind::Fuchsian {
        return Err(Error::InvalidParameters("gauge transform needs a Fuchsian system".into()));
    }
    let n = sys.n;
    check_branch(n, k)?;
    let c = gauge_exponent(&sys.params, k);
    let (perm, pow) = gauge_pattern(n, k);
    let mut scale: f64 = 1.0;
    for i in 0..=n {
        for j in 0..=n {
            scale = scale.max(sys.a0[(i, j)].magnitude()).max(sys.a1[(i, j)].magnitude());
        }
    }
    let tol = 1e-12 * scale;
    let mut a0 = Matrix::zeros(n + 1, n + 1);
    let mut a1 = Matrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            let b0 = sys.a0[(perm[i], perm[j])].clone();
            let b1 = sys.a1[(perm[i], perm[j])].clone();
            match pow[i] - pow[j] {
                0 => {
                    a0[(i, j)] = b0;
                    a1[(i, j)] = b1;
                }
                // t^{-1}(B0/t + B1/(1-t)) = B0/t^2 + B1/t + B1/(1-t)
                -1 => {
                    if !b0.is_negligible(tol) {
                        return Err(Error::NotFuchsian { row: i, col: j });
                    }
                    a0[(i, j)] = b1.clone();
                    a1[(i, j)] = b1;
                }
                // t(B0/t + B1/(1-t)) = B0 - B1 + B1/(1-t)
                _ => {
                    if !(b0.clone() - b1.clone()).is_negligible(tol) {
                        return Err(Error::NotFuchsian { row: i, col: j });
                    }
                    a1[(i, j)] = b1;
                }
            }
        }
        a0[(i, i)] = a0[(i, i)].clone() + c.clone() + F::from_i64(pow[i]);
    }
    Ok(LinearSystem { n, a0, a1, kind: SystemKind::Fuchsian, params: sys.params.clone() })
}

/// Map an original-frame vector to the `k`-th gauge frame at `t > 0`.
pub fn apply_gauge(p: &ParameterSet, k: usize, t: f64, x: &[C64]) -> Vec<C64> {
    let (perm, pow) = gauge_pattern(p.n(), k);
    let c = gauge_exponent(p, k);
    let tc = re(t).powc(c);
    (0..=p.n()).map(|i| tc * t.powi(pow[i] as i32) * x[perm[i]]).collect()
}

/// Inverse of [`apply_gauge`].
pub fn undo_gauge(p: &ParameterSet, k: usize, t: f64, xk: &[C64]) -> Vec<C64> {
    let (perm, pow) = gauge_pattern(p.n(), k);
    let c = gauge_exponent(p, k);
    let tc = re(t).powc(-c);
    let mut x = vec![re(0.0); p.n() + 1];
    for i in 0..=p.n() {
        x[perm[i]] = tc * t.powi(-pow[i] as i32) * xk[i];
    }
    x
}

/// Eigenvalues of the residues at `t = 0, 1, ∞`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Spectra {
    pub at_zero: Vec<C64>,
    pub at_one: Vec<C64>,
    pub at_infinity: Vec<C64>,
}

impl Spectra {
    pub fn exponent_sum(&self) -> C64 {
        self.at_zero.iter().chain(&self.at_one).chain(&self.at_infinity).sum()
    }

    /// Largest entrywise distance to `other`, compared as lists in order.
    pub fn distance(&self, other: &Spectra) -> f64 {
        let pairs = |a: &[C64], b: &[C64]| {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        pairs(&self.at_zero, &other.at_zero)
            .max(pairs(&self.at_one, &other.at_one))
            .max(pairs(&self.at_infinity, &other.at_infinity))
    }
}

impl<F: Field> LinearSystem<F> {
    /// Residue eigenvalues read off the matrix structure.
    ///
    /// At `t = 0` the residue `A0` is triangular. At `t = 1` it is `-A1`, which
    /// has rank one, so its spectrum is `n` zeros and `-tr A1`. At `∞` it is
    /// `A1 - A0`, lower triangular for the systems built here.
    pub fn spectra(&self) -> Result<Spectra> {
        if self.kind != SystemKind::Fuchsian {
            return Err(Error::InvalidParameters("residue spectra need a Fuchsian system".into()));
        }
        let tol = 1e-12;
        if !self.a0.is_upper_triangular(tol) && !self.a0.is_lower_triangular(tol) {
            return Err(Error::InvalidParameters("A0 is not triangular".into()));
        }
        if self.a1.rank(tol) > 1 {
            return Err(Error::InvalidParameters("A1 does not have rank one".into()));
        }
        let inf = self.a1.sub(&self.a0);
        if !inf.is_lower_triangular(tol) && !inf.is_upper_triangular(tol) {
            return Err(Error::InvalidParameters("residue at infinity is not triangular".into()));
        }
        let c = |v: Vec<F>| v.iter().map(Field::to_c64).collect::<Vec<_>>();
        let mut at_one = vec![re(0.0); self.n];
        at_one.push(-self.a1.trace().to_c64());
        Ok(Spectra { at_zero: c(self.a0.diagonal()), at_one, at_infinity: c(inf.diagonal()) })
    }

    pub fn to_c64(&self) -> LinearSystem<C64> {
        LinearSystem {
            n: self.n,
            a0: self.a0.map(Field::to_c64),
            a1: self.a1.map(Field::to_c64),
            kind: self.kind,
            params: self.params.to_c64(),
        }
    }
}

/// The exponents listed for the Fuchsian system, written in terms of the
/// parameters (independent of any matrix).
pub fn listed_exponents(p: &ParameterSet) -> Spectra {
    let n = ii(p.n());
    let mut at_zero: Vec<C64> = (0..n).map(|i| -p.partial_sum(2 * i + 2, 2 * n - 2 * i - 1)).collect();
    at_zero.push(re(0.0));
    let mut at_one = vec![re(0.0); p.n()];
    at_one.push(-p.odd_sum());
    let mut at_infinity: Vec<C64> = (0..n).map(|i| p.partial_sum(2 * i + 1, 2 * n - 2 * i)).collect();
    at_infinity.push(*p.alpha(2 * n + 1));
    Spectra { at_zero, at_one, at_infinity }
}

impl LinearSystem<C64> {
    /// Coefficient matrix of `x` in `dx/dt` at `t`.
    pub fn coefficient(&self, t: C64) -> Result<Matrix<C64>> {
        if t.norm() == 0.0 || (self.kind == SystemKind::Fuchsian && (t - re(1.0)).norm() == 0.0) {
            return Err(Error::SingularTime { t: t.re });
        }
        let second = match self.kind {
            SystemKind::Fuchsian => self.a1.scale(&(re(1.0) / (re(1.0) - t))),
            SystemKind::Confluent => self.a1.clone(),
        };
        Ok(self.a0.scale(&(re(1.0) / t)).add(&second))
    }

    pub fn field(&self, t: C64, x: &[C64]) -> Result<Vec<C64>> {
        Ok(self.coefficient(t)?.mul_vec(x))
    }
}

/// Relative mismatch between the rescaled level-`r-1` system, evaluated with
/// the replaced parameters `confluence_source(eps)`, and the level-`r`
/// confluent system at time `s` and state `x`.
///
/// The old system is read in the variables `t = eps·s`, `x_i → x_i/eps` for
/// `i ≤ r-2`.
pub fn linear_confluence_error(target: &ParameterSet, eps: f64, s: f64, x: &[C64]) -> Result<f64> {
    let r = target.level();
    if r == 0 {
        return Err(Error::InvalidParameters("confluence target must be degenerate".into()));
    }
    let source = target.confluence_source(eps)?;
    let old = if r == 1 { build_fuchsian(&source)? } else { build_confluent(&source)? };
    let new = build_confluent(target)?;
    let d: Vec<f64> = (0..=target.n()).map(|i| if i + 2 <= r { 1.0 / eps } else { 1.0 }).collect();
    let x_old: Vec<C64> = x.iter().zip(&d).map(|(v, s)| v * s).collect();
    let f_old = old.field(re(eps * s), &x_old)?;
    let pulled: Vec<C64> = f_old.iter().zip(&d).map(|(v, s)| v * eps / s).collect();
    let f_new = new.field(re(s), x)?;
    let diff: Vec<C64> = pulled.iter().zip(&f_new).map(|(a, b)| a - b).collect();
    Ok(norm_inf(&diff) / norm_inf(&f_new).max(f64::MIN_POSITIVE))
}

/// Random rational generic set with denominators `den`, for exact checks of
/// the series recursion. Same margin rule as the floating-point sampler.
pub fn sample_rational(n: usize, den: i64, seed: u64) -> Result<ParameterSet<BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut alpha: Vec<BigRational> = (0..2 * n + 1).map(|_| ratio(rng.gen_range(-den..den), den)).collect();
        let rest = alpha.iter().fold(BigRational::zero(), |a, b| a + b);
        alpha.push(BigRational::one() - rest);
        let p = ParameterSet::new(n, alpha, BigRational::zero(), Kind::Generic)?;
        if p.resonance_margin() >= RESONANCE_MARGIN {
            return Ok(p);
        }
    }
    Err(Error::SamplingExhausted { attempts: 10_000 })
}

#[cfg(test)]
mod tests;
