//! Parameter sets `(n; α_0, …, α_{2n+1}; η)` of the hierarchy.
//!
//! Indices of `α` are taken modulo `2n+2` everywhere. The partial sums
//! `α_k^l = α_k + α_{k+1} + … + α_{k+l}` (zero for `l < 0`) are the building
//! blocks of every residue matrix, exponent and hypergeometric parameter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{distance_to_integer, re, Field, C64};

/// Tolerance on the normalization constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Minimum distance from the integers enforced by the samplers.
pub const RESONANCE_MARGIN: f64 = 0.05;

const MAX_SAMPLING_ATTEMPTS: usize = 10_000;

/// Which member of the hierarchy a parameter set belongs to.
///
/// `Degenerate(r)` is the confluent system obtained after `r` confluences
/// (`1 ≤ r ≤ n+1`); it requires `α_{2i} = 0` for `i < r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Generic,
    Degenerate(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet<F = C64> {
    n: usize,
    alpha: Vec<F>,
    eta: F,
    kind: Kind,
}

/// Euclidean remainder, `mod[i, m] ∈ [0, m)`.
pub fn modulo(i: i64, m: i64) -> i64 {
    i.rem_euclid(m)
}

impl<F: Field> ParameterSet<F> {
    /// Build and validate a parameter set.
    pub fn new(n: usize, alpha: Vec<F>, eta: F, kind: Kind) -> Result<Self> {
        let p = ParameterSet { n, alpha, eta, kind };
        p.validate()?;
        Ok(p)
    }

    /// Build without checking the normalization constraint.
    pub(crate) fn new_unchecked(n: usize, alpha: Vec<F>, eta: F, kind: Kind) -> Self {
        ParameterSet { n, alpha, eta, kind }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameters("rank n must be positive".into()));
        }
        if self.alpha.len() != 2 * self.n + 2 {
            return Err(Error::InvalidParameters(format!(
                "expected {} alpha values for n = {}, got {}",
                2 * self.n + 2,
                self.n,
                self.alpha.len()
            )));
        }
        if let Kind::Degenerate(r) = self.kind {
            if r == 0 || r > self.n + 1 {
                return Err(Error::InvalidParameters(format!(
                    "degeneration level r = {r} outside 1..={}",
                    self.n + 1
                )));
            }
            for i in 0..r {
                if !self.alpha[2 * i].is_negligible(CONSTRAINT_TOL) {
                    return Err(Error::InvalidParameters(format!(
                        "Degenerate({r}) needs alpha_{} = 0",
                        2 * i
                    )));
                }
            }
        }
        let defect = self.sum_alpha() - F::one();
        if !defect.is_negligible(CONSTRAINT_TOL) {
            return Err(Error::InvalidParameters(format!(
                "alpha must sum to 1 (defect {:?})",
                defect.to_c64()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn eta(&self) -> &F {
        &self.eta
    }

    pub fn alphas(&self) -> &[F] {
        &self.alpha
    }

    /// Confluence level: 0 for generic sets, `r` for `Degenerate(r)`.
    pub fn level(&self) -> usize {
        match self.kind {
            Kind::Generic => 0,
            Kind::Degenerate(r) => r,
        }
    }

    fn period(&self) -> i64 {
        2 * self.n as i64 + 2
    }

    /// `α_k` with `k` reduced modulo `2n+2`.
    pub fn alpha(&self, k: i64) -> &F {
        &self.alpha[modulo(k, self.period()) as usize]
    }

    /// `α_k^l`; zero for `l < 0`. No reduction is applied to `l`.
    pub fn partial_sum(&self, k: i64, l: i64) -> F {
        if l < 0 {
            return F::zero();
        }
        (k..=k + l).fold(F::zero(), |acc, i| acc + self.alpha(i).clone())
    }

    pub fn sum_alpha(&self) -> F {
        self.alpha.iter().cloned().fold(F::zero(), |a, b| a + b)
    }

    /// `Σ_{i=0}^{n} α_{2i+1}`
    pub fn odd_sum(&self) -> F {
        (0..=self.n as i64).fold(F::zero(), |acc, i| acc + self.alpha(2 * i + 1).clone())
    }

    pub fn with_eta(&self, eta: F) -> Self {
        ParameterSet { eta, ..self.clone() }
    }

    pub fn with_alphas(&self, alpha: Vec<F>) -> Self {
        ParameterSet { alpha, ..self.clone() }
    }

    pub fn to_c64(&self) -> ParameterSet<C64> {
        ParameterSet {
            n: self.n,
            alpha: self.alpha.iter().map(Field::to_c64).collect(),
            eta: self.eta.to_c64(),
            kind: self.kind,
        }
    }

    /// The values whose integrality would make the system resonant at `t = 0`
    /// (`α_{2i}^{2j-1}`), at `t = 1` (`Σ α_{2i+1}`), and at `t = ∞`
    /// (`α_{2i-1}^{2j-1}`), for `i = 1..n`, `j = 1..n-i+1`.
    /// The `t = 1` value is skipped for degenerate sets, where it is no
    /// longer a singular point.
    pub fn resonance_values(&self) -> Vec<F> {
        let n = self.n as i64;
        let mut out = Vec::new();
        for i in 1..=n {
            for j in 1..=(n - i + 1) {
                out.push(self.partial_sum(2 * i, 2 * j - 1));
                out.push(self.partial_sum(2 * i - 1, 2 * j - 1));
            }
        }
        if self.kind == Kind::Generic {
            out.push(self.odd_sum());
        }
        out
    }

    /// Smallest distance from a resonance value to the integers.
    pub fn resonance_margin(&self) -> f64 {
        self.resonance_values()
            .iter()
            .map(|v| distance_to_integer(v.to_c64()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Relabel a `Degenerate(r)` set as level `r-1` (generic for `r = 1`).
    /// Valid because `α_{2r-2} = 0` already holds.
    pub fn lift(&self) -> Result<Self> {
        let kind = match self.kind {
            Kind::Generic => {
                return Err(Error::InvalidParameters("generic sets cannot be lifted".into()))
            }
            Kind::Degenerate(1) => Kind::Generic,
            Kind::Degenerate(r) => Kind::Degenerate(r - 1),
        };
        ParameterSet::new(self.n, self.alpha.clone(), self.eta.clone(), kind)
    }
}

impl ParameterSet<C64> {
    /// The confluence substitution `α_{2r-2} → -1/ε`, `α_{2r-1} → α_{2r-1} + 1/ε`
    /// where `r = level + 1`. The kind is left unchanged.
    pub fn degenerate_replace(&self, eps: f64) -> Result<Self> {
        if eps == 0.0 || !eps.is_finite() {
            return Err(Error::InvalidParameters(format!("eps must be finite and nonzero, got {eps}")));
        }
        let r = self.level() + 1;
        if r > self.n + 1 {
            return Err(Error::InvalidParameters(format!(
                "no further confluence from Degenerate({})",
                self.level()
            )));
        }
        let mut alpha = self.alpha.clone();
        alpha[2 * r - 2] = re(-1.0 / eps);
        alpha[2 * r - 1] += re(1.0 / eps);
        Ok(ParameterSet::new_unchecked(self.n, alpha, self.eta, self.kind))
    }

    /// Pre-limit parameters whose confluence with parameter `eps` tends to `self`.
    pub fn confluence_source(&self, eps: f64) -> Result<Self> {
        self.lift()?.degenerate_replace(eps)
    }

    /// Random real generic set: `Σα = 1`, every resonance value at least
    /// [`RESONANCE_MARGIN`] away from the integers, `η ∈ (-1, 1)`.
    pub fn sample_generic(n: usize, seed: u64) -> Result<Self> {
        Self::sample(n, Kind::Generic, seed)
    }

    /// Random real `Degenerate(r)` set with the same margin guarantee.
    pub fn sample_degenerate(n: usize, r: usize, seed: u64) -> Result<Self> {
        Self::sample(n, Kind::Degenerate(r), seed)
    }

    fn sample(n: usize, kind: Kind, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("rank n must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeros = match kind {
            Kind::Generic => 0,
            Kind::Degenerate(r) if (1..=n + 1).contains(&r) => r,
            Kind::Degenerate(r) => {
                return Err(Error::InvalidParameters(format!("r = {r} outside 1..={}", n + 1)))
            }
        };
        // index whose value closes the sum: last entry, or α_1 once α_0 is pinned
        let closing = if zeros == 0 { 2 * n + 1 } else { 1 };
        for _ in 0..MAX_SAMPLING_ATTEMPTS {
            let mut alpha: Vec<f64> = (0..2 * n + 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for i in 0..zeros {
                alpha[2 * i] = 0.0;
            }
            alpha[closing] = 0.0;
            let rest: f64 = alpha.iter().sum();
            alpha[closing] = 1.0 - rest;
            let eta = rng.gen_range(-1.0..1.0);
            let p = ParameterSet::new(n, alpha.into_iter().map(re).collect(), re(eta), kind)?;
            if p.resonance_margin() >= RESONANCE_MARGIN {
                return Ok(p);
            }
        }
        Err(Error::SamplingExhausted { attempts: MAX_SAMPLING_ATTEMPTS })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_n1() -> ParameterSet {
        ParameterSet::new(1, vec![re(0.1), re(0.2), re(0.3), re(0.4)], re(0.0), Kind::Generic).unwrap()
    }

    #[test]
    fn negative_length_sum_is_zero() {
        assert_eq!(example_n1().partial_sum(5, -3), re(0.0));
    }

    #[test]
    fn full_period_sum_is_one() {
        let p = ParameterSet::sample_generic(3, 11).unwrap();
        for k in 0..4 {
            assert!((p.partial_sum(2 * k + 2, 7) - re(1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn direct_partial_sum() {
        assert!((example_n1().partial_sum(2, 1) - re(0.7)).norm() < 1e-15);
    }

    #[test]
    fn modular_helper() {
        assert_eq!(modulo(5, 3), 2);
        assert_eq!(modulo(-1, 3), 2);
    }

    #[test]
    fn sampled_sets_are_normalized_and_deterministic() {
        let p = ParameterSet::sample_generic(1, 1).unwrap();
        assert!((p.sum_alpha() - re(1.0)).norm() < 1e-12);
        let q = ParameterSet::sample_generic(2, 7).unwrap();
        for i in 1..=2i64 {
            for j in 1..=(2 - i + 1) {
                assert!(distance_to_integer(q.partial_sum(2 * i, 2 * j - 1)) >= RESONANCE_MARGIN);
            }
        }
        assert_eq!(ParameterSet::sample_generic(3, 3).unwrap(), ParameterSet::sample_generic(3, 3).unwrap());
    }

    #[test]
    fn replacement_r1() {
        let p = example_n1().degenerate_replace(0.01).unwrap();
        let want = [-100.0, 100.2, 0.3, 0.4];
        for (a, w) in p.alphas().iter().zip(want) {
            assert!((a - re(w)).norm() < 1e-12);
        }
    }

    #[test]
    fn replacement_r2_and_sum_invariance() {
        let d = ParameterSet::sample_degenerate(2, 1, 4).unwrap();
        let before = d.sum_alpha();
        let e = d.degenerate_replace(1e-3).unwrap();
        assert!((e.alphas()[2] - re(-1000.0)).norm() < 1e-12);
        assert!((e.alphas()[3] - d.alphas()[3] - re(1000.0)).norm() < 1e-9);

        // replacing from a lifted Degenerate(r) target keeps the sum
        let target = ParameterSet::sample_degenerate(2, 2, 4).unwrap();
        let src = target.confluence_source(1e-3).unwrap();
        assert!((src.sum_alpha() - target.sum_alpha()).norm() < 1e-10);
        assert!((before - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_eps_rejected() {
        assert!(example_n1().degenerate_replace(0.0).is_err());
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ParameterSet::new(1, vec![re(0.5); 4], re(0.0), Kind::Generic).is_err());
        assert!(ParameterSet::new(1, vec![re(0.1), re(0.9), re(0.0), re(0.0)], re(0.0), Kind::Degenerate(1)).is_err());
        assert!(ParameterSet::new(1, vec![re(0.0), re(1.0), re(0.0), re(0.0)], re(0.0), Kind::Degenerate(2)).is_ok());
        assert!(ParameterSet::new(1, vec![re(0.0), re(0.5), re(0.5), re(0.0)], re(0.0), Kind::Degenerate(2)).is_err());
        assert!(ParameterSet::new(1, vec![re(0.0), re(1.0), re(0.0), re(0.0)], re(0.0), Kind::Degenerate(3)).is_err());
    }

    proptest! {
        #[test]
        fn additivity_and_periodicity(seed in 0u64..200, k in -12i64..12, l in 0i64..9, m in 0i64..9) {
            let p = ParameterSet::sample_generic(2, seed).unwrap();
            let lhs = p.partial_sum(k, l) + p.partial_sum(k + l + 1, m);
            prop_assert!((lhs - p.partial_sum(k, l + m + 1)).norm() < 1e-12);
            prop_assert!((p.partial_sum(k, l) - p.partial_sum(k + 6, l)).norm() < 1e-12);
        }

        #[test]
        fn samples_pass_resonance_predicates(n in 1usize..5, seed in 0u64..50) {
            let p = ParameterSet::sample_generic(n, seed).unwrap();
            prop_assert!(p.resonance_margin() >= RESONANCE_MARGIN);
            prop_assert!((p.sum_alpha() - re(1.0)).norm() < CONSTRAINT_TOL);
        }
    }
}
