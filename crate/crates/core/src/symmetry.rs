//! The affine Weyl group action of type `A_{2n+1}^{(1)}` on the symmetric
//! form: Cartan data, the Poisson structure, the birational generators and
//! their composition, and checks of the group relations and of the mapping of
//! solutions to solutions.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, linspace, HamiltonianSystem, IntegratorOptions, PhasePoint, Representation, SystemId};
use crate::error::{Error, Result};
use crate::matrix::norm_inf;
use crate::params::{Kind, ParameterSet};
use crate::scalar::{re, Dual, C64};

/// Generalized Cartan matrix of the cyclic diagram with `2n+2` nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartanData {
    pub n: usize,
    pub a: Vec<Vec<i64>>,
}

impl CartanData {
    pub fn new(n: usize) -> Self {
        let m = 2 * n + 2;
        let a = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            2
                        } else if (i + 1) % m == j || (j + 1) % m == i {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        CartanData { n, a }
    }

    pub fn size(&self) -> usize {
        self.a.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.a[i][j]
    }

    /// Order of `r_i r_j`: `2 - a_ij` for `i ≠ j`, 1 for `i = j`.
    pub fn pair_order(&self, i: usize, j: usize) -> usize {
        if i == j {
            1
        } else {
            (2 - self.a[i][j]) as usize
        }
    }
}

/// A coordinate function of the symmetric form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    X(usize),
    Y(usize),
}

/// `{a, b}` for coordinate functions: `{x_i, y_j} = -δ_ij`.
pub fn coordinate_bracket(a: Coordinate, b: Coordinate) -> i64 {
    match (a, b) {
        (Coordinate::X(i), Coordinate::Y(j)) if i == j => -1,
        (Coordinate::Y(i), Coordinate::X(j)) if i == j => 1,
        _ => 0,
    }
}

/// `{f, g}` at `(x, y)` for arbitrary functions of the coordinates, via
/// `{f, g} = Σ_i (∂f/∂y_i ∂g/∂x_i - ∂f/∂x_i ∂g/∂y_i)`. Gradients are exact
/// (forward-mode dual numbers).
pub fn poisson_bracket<F, G>(f: F, g: G, x: &[C64], y: &[C64]) -> C64
where
    F: Fn(&[Dual], &[Dual]) -> Dual,
    G: Fn(&[Dual], &[Dual]) -> Dual,
{
    let m = x.len();
    let grad = |h: &dyn Fn(&[Dual], &[Dual]) -> Dual| -> Vec<C64> {
        (0..2 * m)
            .map(|k| {
                let xd: Vec<Dual> =
                    (0..m).map(|i| Dual::new(x[i], if k == i { re(1.0) } else { re(0.0) })).collect();
                let yd: Vec<Dual> =
                    (0..m).map(|i| Dual::new(y[i], if k == m + i { re(1.0) } else { re(0.0) })).collect();
                h(&xd, &yd).d
            })
            .collect()
    };
    let gf = grad(&f);
    let gg = grad(&g);
    (0..m).map(|i| gf[m + i] * gg[i] - gf[i] * gg[m + i]).sum()
}

fn require_generic(p: &ParameterSet) -> Result<()> {
    if p.kind() != Kind::Generic {
        return Err(Error::InvalidParameters("the Weyl group acts on generic parameter sets".into()));
    }
    Ok(())
}

/// `(r_i(α), r_i(η))`: `α_j → α_j - a_ij α_i`, `η → η + (-1)^i α_i`.
pub fn act_on_parameters(i: usize, p: &ParameterSet) -> Result<ParameterSet> {
    let cartan = CartanData::new(p.n());
    if i >= cartan.size() {
        return Err(Error::InvalidParameters(format!("generator index {i} outside 0..{}", cartan.size())));
    }
    let ai = p.alphas()[i];
    let alpha = p.alphas().iter().enumerate().map(|(j, aj)| aj - ai * cartan.entry(i, j) as f64).collect();
    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
    Ok(p.with_alphas(alpha).with_eta(p.eta() + ai * sign))
}

/// The quantity each generator divides by, at a symmetric state.
pub fn generator_denominator(i: usize, n: usize, t: f64, x: &[C64], y: &[C64]) -> C64 {
    if i == 0 {
        x[n] - re(t) * x[0]
    } else if i == 2 * n + 1 {
        y[n]
    } else if i % 2 == 1 {
        y[(i - 1) / 2]
    } else {
        x[i / 2 - 1] - x[i / 2]
    }
}

fn denominator_name(i: usize, n: usize) -> String {
    if i == 0 {
        format!("x_{n} - t x_0")
    } else if i == 2 * n + 1 {
        format!("y_{n}")
    } else if i % 2 == 1 {
        format!("y_{}", (i - 1) / 2)
    } else {
        format!("x_{} - x_{}", i / 2 - 1, i / 2)
    }
}

/// Apply `r_i` to a symmetric state and its parameters. The state's time is
/// used for the `t`-dependent generators, with the principal branch of
/// `t^α` (so `t > 0` is required there).
pub fn apply_generator(i: usize, point: &PhasePoint, p: &ParameterSet) -> Result<(PhasePoint, ParameterSet)> {
    require_generic(p)?;
    let n = p.n();
    if point.representation != Representation::Symmetric || point.z.len() != 2 * n + 2 {
        return Err(Error::Dimension(format!("expected a symmetric state with {} entries", 2 * n + 2)));
    }
    if i > 2 * n + 1 {
        return Err(Error::InvalidParameters(format!("generator index {i} outside 0..={}", 2 * n + 1)));
    }
    let t = point.t;
    let (x, y) = (point.coords(), point.momenta());
    let a = p.alphas()[i];
    let den = generator_denominator(i, n, t, x, y);
    if den.norm() == 0.0 || !den.re.is_finite() || !den.im.is_finite() {
        return Err(Error::VanishingDenominator { generator: i, what: denominator_name(i, n) });
    }
    let (mut nx, mut ny) = (x.to_vec(), y.to_vec());
    if i == 0 || i == 2 * n + 1 {
        if t <= 0.0 {
            return Err(Error::BranchDomain { t });
        }
    }
    if i == 0 {
        let tp = re(t).powc(a);
        for xj in nx.iter_mut() {
            *xj /= tp;
        }
        for (j, yj) in ny.iter_mut().enumerate() {
            let mut shift = re(0.0);
            if j == n {
                shift -= re(1.0);
            }
            if j == 0 {
                shift += re(t);
            }
            *yj = tp * (*yj + a * shift / den);
        }
    } else if i == 2 * n + 1 {
        let tp = re(t).powc(a);
        nx[n] += a / den;
        for xj in nx.iter_mut() {
            *xj *= tp;
        }
        for yj in ny.iter_mut() {
            *yj /= tp;
        }
    } else if i % 2 == 1 {
        nx[(i - 1) / 2] += a / den;
    } else {
        let m = i / 2;
        ny[m - 1] -= a / den;
        ny[m] += a / den;
    }
    let mut z = nx;
    z.extend(ny);
    Ok((PhasePoint { t, representation: Representation::Symmetric, z }, act_on_parameters(i, p)?))
}

/// A word in the generators, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeylWord {
    pub letters: Vec<usize>,
}

impl WeylWord {
    pub fn new(letters: Vec<usize>) -> Self {
        WeylWord { letters }
    }

    /// `(r_i r_j)^m` written out.
    pub fn pair_power(i: usize, j: usize, m: usize) -> Self {
        WeylWord { letters: [i, j].repeat(m) }
    }
}

impl fmt::Display for WeylWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

impl FromStr for WeylWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(WeylWord::default());
        }
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameters(format!("bad generator index '{tok}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(WeylWord::new)
    }
}

/// Apply a word letter by letter; failures are annotated with the position.
pub fn apply_word(word: &WeylWord, point: &PhasePoint, p: &ParameterSet) -> Result<(PhasePoint, ParameterSet)> {
    let mut state = (point.clone(), p.clone());
    for (pos, &letter) in word.letters.iter().enumerate() {
        state = apply_generator(letter, &state.0, &state.1)
            .map_err(|e| Error::WordStep { position: pos, source: Box::new(e) })?;
    }
    Ok(state)
}

/// Smallest generator denominator met while applying `word`.
pub fn word_margin(word: &WeylWord, point: &PhasePoint, p: &ParameterSet) -> Result<f64> {
    let n = p.n();
    let mut state = (point.clone(), p.clone());
    let mut margin = f64::INFINITY;
    for &letter in &word.letters {
        let d = generator_denominator(letter, n, state.0.t, state.0.coords(), state.0.momenta());
        margin = margin.min(d.norm());
        state = apply_generator(letter, &state.0, &state.1)?;
    }
    Ok(margin)
}

/// Distance of `(after, q)` from `(before, p)`: state difference relative to
/// `max(1, |state|)`, combined with the absolute parameter difference.
pub fn identity_defect(before: &PhasePoint, p: &ParameterSet, after: &PhasePoint, q: &ParameterSet) -> f64 {
    let dz: Vec<C64> = after.z.iter().zip(&before.z).map(|(a, b)| a - b).collect();
    let state = norm_inf(&dz) / norm_inf(&before.z).max(1.0);
    let da: Vec<C64> = q.alphas().iter().zip(p.alphas()).map(|(a, b)| a - b).collect();
    let eta = (q.eta() - p.eta()).norm();
    state.max(norm_inf(&da)).max(eta)
}

/// One relation and its measured defect.
#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub word: WeylWord,
    pub defect: f64,
    pub margin: f64,
}

/// Every `r_i²` and every `(r_i r_j)^{2 - a_ij}`, `i < j`.
pub fn relation_words(n: usize) -> Vec<WeylWord> {
    let c = CartanData::new(n);
    let m = c.size();
    let mut out: Vec<WeylWord> = (0..m).map(|i| WeylWord::new(vec![i, i])).collect();
    for i in 0..m {
        for j in i + 1..m {
            out.push(WeylWord::pair_power(i, j, c.pair_order(i, j)));
        }
    }
    out
}

/// Required distance of every generator denominator from zero at sampled
/// regular points.
pub const REGULAR_MARGIN: f64 = 0.05;

/// A random state in `(-1, 1)` (shifted away from zero) on the constraint
/// manifold `Σ x y + η = 0`, with `t ∈ (0.1, 0.9)`, at which all words in
/// `words` keep every denominator at least [`REGULAR_MARGIN`] from zero.
pub fn sample_regular_point(
    p: &ParameterSet,
    words: &[WeylWord],
    rng: &mut ChaCha8Rng,
) -> Result<(PhasePoint, ParameterSet)> {
    let n = p.n();
    const ATTEMPTS: usize = 10_000;
    'outer: for _ in 0..ATTEMPTS {
        let t = rng.gen_range(0.1..0.9);
        let x: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        let y: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        let point = PhasePoint::symmetric(t, &x, &y);
        let eta = -x.iter().zip(&y).map(|(a, b)| a * b).sum::<C64>();
        let params = p.with_eta(eta);
        for w in words {
            match word_margin(w, &point, &params) {
                Ok(m) if m >= REGULAR_MARGIN => {}
                _ => continue 'outer,
            }
        }
        return Ok((point, params));
    }
    Err(Error::SamplingExhausted { attempts: ATTEMPTS })
}

/// Check every relation at `trials` regular points; returns each word with
/// its worst defect over the trials.
pub fn verify_relations(p: &ParameterSet, trials: usize, seed: u64) -> Result<Vec<RelationCheck>> {
    require_generic(p)?;
    let words = relation_words(p.n());
    let mut checks: Vec<RelationCheck> =
        words.iter().map(|w| RelationCheck { word: w.clone(), defect: 0.0, margin: f64::INFINITY }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let (point, params) = sample_regular_point(p, &words, &mut rng)?;
        for c in checks.iter_mut() {
            let (after, q) = apply_word(&c.word, &point, &params)?;
            c.defect = c.defect.max(identity_defect(&point, &params, &after, &q));
            c.margin = c.margin.min(word_margin(&c.word, &point, &params)?);
        }
    }
    Ok(checks)
}

/// `|Σ r_i(α) - Σ α|`, worst over all generators.
pub fn parameter_sum_drift(p: &ParameterSet) -> Result<f64> {
    let before = p.sum_alpha();
    let mut worst: f64 = 0.0;
    for i in 0..2 * p.n() + 2 {
        worst = worst.max((act_on_parameters(i, p)?.sum_alpha() - before).norm());
    }
    Ok(worst)
}

/// Result of mapping an integrated trajectory through one generator.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionMapping {
    pub generator: usize,
    /// Field of the transformed system against the five-point difference of
    /// the mapped samples, relative to the field magnitude.
    pub residual: f64,
    /// `|Σ x y + η|` after the map, worst over the samples.
    pub constraint_defect: f64,
}

/// Samples used to confirm a trajectory stays [`REGULAR_MARGIN`] away from a
/// generator's pole.
pub const PATH_SAMPLES: usize = 201;

/// Integrate the symmetric system from `start` over `[t0, t1]`, map the
/// samples through `r_i`, and compare the transformed system's field with the
/// numerical derivative of the mapped path at `checks` interior times.
/// Fails with [`Error::VanishingDenominator`] if the path comes within
/// [`REGULAR_MARGIN`] of the generator's pole.
pub fn solution_mapping_residual(
    p: &ParameterSet,
    start: &PhasePoint,
    t1: f64,
    generator: usize,
    checks: usize,
    opts: &IntegratorOptions,
) -> Result<SolutionMapping> {
    require_generic(p)?;
    let sys = HamiltonianSystem::new(SystemId::Symmetric, p.clone())?;
    let t0 = start.t;
    // five-point stencil: truncation O(h^4), roundoff O(eps/h)
    let h = 2e-3 * (t1 - t0).abs().max(1e-3);
    let centers: Vec<f64> =
        (1..=checks).map(|c| t0 + (t1 - t0) * c as f64 / (checks + 1) as f64).collect();
    let samples: Vec<f64> = centers.iter().flat_map(|&c| [c - 2.0 * h, c - h, c, c + h, c + 2.0 * h]).collect();
    let traj = integrate(|t, z| sys.field(t, z), t0, &start.z, t1, &samples, opts)?;
    // the path must stay away from the generator's pole, not just its start
    let path = integrate(|t, z| sys.field(t, z), t0, &start.z, t1, &linspace(t0, t1, PATH_SAMPLES), opts)?;
    let n = p.n();
    for (t, z) in path.times.iter().zip(&path.states) {
        if generator_denominator(generator, n, *t, &z[..=n], &z[n + 1..]).norm() < REGULAR_MARGIN {
            return Err(Error::VanishingDenominator { generator, what: denominator_name(generator, n) });
        }
    }
    let eta = -start.coords().iter().zip(start.momenta()).map(|(a, b)| a * b).sum::<C64>();
    let params = p.with_eta(eta);
    let mut mapped = Vec::with_capacity(samples.len());
    let mut q = params.clone();
    for (t, z) in traj.times.iter().zip(&traj.states) {
        let pt = PhasePoint { t: *t, representation: Representation::Symmetric, z: z.clone() };
        let (m, qq) = apply_generator(generator, &pt, &params)?;
        mapped.push(m);
        q = qq;
    }
    let target = HamiltonianSystem::new(SystemId::Symmetric, q.clone())?;
    let mut residual: f64 = 0.0;
    let mut constraint: f64 = 0.0;
    for c in 0..checks {
        let w = &mapped[5 * c..5 * c + 5];
        let mid = &w[2];
        let fd: Vec<C64> = (0..mid.z.len())
            .map(|j| (w[0].z[j] - w[4].z[j] + 8.0 * (w[3].z[j] - w[1].z[j])) / (12.0 * h))
            .collect();
        let f = target.field(mid.t, &mid.z)?;
        let diff: Vec<C64> = fd.iter().zip(&f).map(|(a, b)| a - b).collect();
        residual = residual.max(norm_inf(&diff) / norm_inf(&f).max(1.0));
        constraint = constraint.max(mid.constraint_defect(*q.eta()));
    }
    Ok(SolutionMapping { generator, residual, constraint_defect: constraint })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, seed: u64) -> ParameterSet {
        ParameterSet::sample_generic(n, seed).unwrap()
    }

    #[test]
    fn cartan_structure() {
        for n in 1..=4 {
            let c = CartanData::new(n);
            let m = 2 * n + 2;
            for i in 0..m {
                assert_eq!(c.entry(i, i), 2);
                assert_eq!(c.a[i].iter().sum::<i64>(), 0);
                assert_eq!(c.entry(i, (i + 1) % m), -1);
                assert_eq!(c.entry((i + 1) % m, i), -1);
            }
            assert_eq!(c.entry(0, m - 1), -1);
            assert_eq!(c.entry(m - 1, 0), -1);
        }
        assert_eq!(CartanData::new(1).entry(0, 2), 0);
    }

    #[test]
    fn brackets() {
        assert_eq!(coordinate_bracket(Coordinate::X(0), Coordinate::Y(0)), -1);
        assert_eq!(coordinate_bracket(Coordinate::X(0), Coordinate::Y(1)), 0);
        assert_eq!(coordinate_bracket(Coordinate::Y(2), Coordinate::X(2)), 1);
        let (x, y) = ([re(0.3), re(-0.8)], [re(0.5), re(0.1)]);
        let t = 0.37;
        let b = poisson_bracket(|x, _| x[1] - Dual::constant(re(t)) * x[0], |_, y| y[0], &x, &y);
        assert!((b - re(t)).norm() < 1e-15);
        let xy = poisson_bracket(|x, _| x[0], |_, y| y[0], &x, &y);
        assert_eq!(xy, re(-1.0));
        let yx = poisson_bracket(|_, y| y[1], |x, _| x[1], &x, &y);
        assert_eq!(yx, re(1.0));
    }

    #[test]
    fn parameter_action() {
        let n = 2;
        let p = params(n, 1);
        let a = p.alphas().to_vec();
        let q = act_on_parameters(0, &p).unwrap();
        assert!((q.alphas()[0] + a[0]).norm() < 1e-15);
        assert!((q.alphas()[1] - (a[1] + a[0])).norm() < 1e-15);
        assert!((q.alphas()[5] - (a[5] + a[0])).norm() < 1e-15);
        assert!((q.alphas()[3] - a[3]).norm() < 1e-15);
        let q2 = act_on_parameters(2, &p).unwrap();
        assert!((q2.eta() - (p.eta() + a[2])).norm() < 1e-15);
        let q3 = act_on_parameters(3, &p).unwrap();
        assert!((q3.eta() - (p.eta() - a[3])).norm() < 1e-15);
        for n in 1..=3 {
            assert!(parameter_sum_drift(&params(n, 3)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn odd_generator_shifts_x() {
        let p = params(1, 2);
        let pt = PhasePoint::symmetric(0.3, &[re(0.4), re(0.9)], &[re(0.5), re(-0.2)]);
        let (m, _) = apply_generator(1, &pt, &p).unwrap();
        assert!((m.z[0] - (re(0.4) + p.alphas()[1] / 0.5)).norm() < 1e-15);
        assert_eq!(&m.z[1..], &pt.z[1..]);
    }

    #[test]
    fn generator_errors() {
        let p = params(1, 2);
        let pt = PhasePoint::symmetric(0.3, &[re(0.4), re(0.4)], &[re(0.0), re(0.3)]);
        match apply_generator(1, &pt, &p) {
            Err(Error::VanishingDenominator { generator: 1, what }) => assert_eq!(what, "y_0"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(apply_generator(2, &pt, &p), Err(Error::VanishingDenominator { generator: 2, .. })));
        let neg = PhasePoint::symmetric(-0.3, &[re(0.4), re(0.1)], &[re(0.2), re(0.3)]);
        assert!(matches!(apply_generator(0, &neg, &p), Err(Error::BranchDomain { .. })));
        let w: WeylWord = "3,1".parse().unwrap();
        match apply_word(&w, &pt, &p) {
            Err(Error::WordStep { position: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(apply_generator(4, &pt, &p).is_err());
    }

    #[test]
    fn word_parsing() {
        let w: WeylWord = "0, 3,1".parse().unwrap();
        assert_eq!(w.letters, vec![0, 3, 1]);
        assert_eq!(w.to_string(), "[0,3,1]");
        assert!("0,x".parse::<WeylWord>().is_err());
        assert_eq!(WeylWord::pair_power(1, 2, 3).letters, vec![1, 2, 1, 2, 1, 2]);
        assert_eq!(relation_words(1).len(), 4 + 6);
    }

    #[test]
    fn relations_hold() {
        for n in 1..=3 {
            let checks = verify_relations(&params(n, 10 + n as u64), 50, n as u64).unwrap();
            for c in checks {
                assert!(c.defect < 1e-12, "n={n} {} defect {:e}", c.word, c.defect);
                assert!(c.margin >= REGULAR_MARGIN);
            }
        }
    }

    #[test]
    fn non_relation_is_detected() {
        // r_0 r_1 is not an involution
        let p = params(1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = WeylWord::new(vec![0, 1, 0, 1]);
        let (pt, q) = sample_regular_point(&p, &[w.clone()], &mut rng).unwrap();
        let (after, q2) = apply_word(&w, &pt, &q).unwrap();
        assert!(identity_defect(&pt, &q, &after, &q2) > 1e-4);
    }

    #[test]
    fn constraint_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let p = params(n, 20 + n as u64);
            let words: Vec<WeylWord> = (0..2 * n + 2).map(|i| WeylWord::new(vec![i])).collect();
            for _ in 0..20 {
                let (pt, q) = sample_regular_point(&p, &words, &mut rng).unwrap();
                for i in 0..2 * n + 2 {
                    let (m, q2) = apply_generator(i, &pt, &q).unwrap();
                    assert!(m.constraint_defect(*q2.eta()) < 1e-10, "n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn mapping_rejects_paths_near_a_pole() {
        let opts = IntegratorOptions::default();
        let p = params(1, 31);
        let start = PhasePoint::symmetric(0.2, &[re(0.7), re(0.9)], &[re(0.01), re(0.3)]);
        let r = solution_mapping_residual(&p, &start, 0.3, 1, 5, &opts);
        assert!(matches!(r, Err(Error::VanishingDenominator { generator: 1, .. })), "{r:?}");
    }

    #[test]
    fn generators_map_solutions_to_solutions() {
        let opts = IntegratorOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        for n in 1..=2 {
            let p = params(n, 30 + n as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let words: Vec<WeylWord> = (0..2 * n + 2).map(|i| WeylWord::new(vec![i])).collect();
            let (start, maps) = (0..50)
                .find_map(|_| {
                    let (pt, _) = sample_regular_point(&p, &words, &mut rng).unwrap();
                    let start = PhasePoint { t: 0.2, ..pt };
                    let maps: Result<Vec<_>> =
                        (0..2 * n + 2).map(|i| solution_mapping_residual(&p, &start, 0.3, i, 5, &opts)).collect();
                    match maps {
                        Ok(m) => Some((start, m)),
                        Err(Error::VanishingDenominator { .. }) => None,
                        Err(e) => panic!("{e}"),
                    }
                })
                .expect("a regular trajectory within 50 samples");
            let (x, y) = (start.coords().to_vec(), start.momenta().to_vec());
            for m in &maps {
                assert!(m.residual < 1e-6, "n={n} r_{}: {:e}", m.generator, m.residual);
                assert!(m.constraint_defect < 1e-8);
            }
            // the untransformed parameters do not fit the mapped path
            let sys = HamiltonianSystem::new(SystemId::Symmetric, p.clone()).unwrap();
            let ts = linspace(0.25 - 1e-5, 0.25 + 1e-5, 3);
            let tr = integrate(|t, z| sys.field(t, z), 0.2, &start.z, 0.25 + 1e-5, &ts, &opts).unwrap();
            let eta = -x.iter().zip(&y).map(|(a, b)| a * b).sum::<C64>();
            let pe = p.with_eta(eta);
            let mapped: Vec<PhasePoint> = tr
                .times
                .iter()
                .zip(&tr.states)
                .map(|(t, z)| apply_generator(1, &PhasePoint { t: *t, representation: Representation::Symmetric, z: z.clone() }, &pe).unwrap().0)
                .collect();
            let fd: Vec<C64> = mapped[2].z.iter().zip(&mapped[0].z).map(|(a, b)| (a - b) / 2e-5).collect();
            let f = sys.field(mapped[1].t, &mapped[1].z).unwrap();
            let diff: Vec<C64> = fd.iter().zip(&f).map(|(a, b)| a - b).collect();
            assert!(norm_inf(&diff) / norm_inf(&f).max(1.0) > 1e-4);
        }
    }
}
