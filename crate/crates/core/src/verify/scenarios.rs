//! The three end-to-end scenarios and the measurement helpers they share
//! with the acceptance criteria.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Check, Tolerances, VerificationReport};
use crate::dynamics::{
    canonical_pushforward_error, check_gradients, field_confluence_error, integrate, Canonical,
    HamiltonianSystem, IntegratorOptions, PhasePoint, SystemId,
};
use crate::error::{Error, Result};
use crate::hyperfn::operator_residual_on;
use crate::linear::{
    all_fundamental_solutions, build_confluent, build_fuchsian, component_ode_params, component_ode_residual,
    confluent_component, generic_component, linear_confluence_error, listed_exponents, scaled_solution_matrix,
    system_residual, FD_STEP,
};
use crate::matrix::norm_inf;
use crate::params::{Kind, ParameterSet};
use crate::scalar::{re, C64};
use crate::symmetry::{parameter_sum_drift, sample_regular_point, solution_mapping_residual, verify_relations, WeylWord};

pub const FUCHSIAN_GRID: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];
pub const CONFLUENT_GRID: [f64; 5] = [0.1, 0.5, 1.0, 1.5, 2.0];
pub const COMPONENT_TIMES: [f64; 3] = [0.1, 0.3, 0.5];

pub const ST_SPECTRA: &str = "residue eigenvalues of the Fuchsian system";
pub const ST_FUNDAMENTAL: &str = "fundamental solutions of the Fuchsian system";
pub const ST_COMPONENTS: &str = "component equations of the Fuchsian solutions";
pub const ST_SPECIALIZATION: &str = "linear specialization of the symmetric form";
pub const ST_CONFLUENCE: &str = "confluence of the degenerate hierarchy";
pub const ST_CONFLUENT_SOLUTIONS: &str = "fundamental solutions of the confluent system";
pub const ST_CONFLUENT_COMPONENTS: &str = "component equations of the confluent solutions";
pub const ST_CONFLUENT_SPECIALIZATION: &str = "linear specialization of the degenerate system";
pub const ST_HAMILTONIAN: &str = "Hamiltonian vector fields";
pub const ST_CANONICAL: &str = "canonical forms of the degenerate systems";
pub const ST_WEYL_RELATIONS: &str = "affine Weyl group relations";
pub const ST_WEYL_PARAMETERS: &str = "Weyl group action on parameters";
pub const ST_WEYL_SOLUTIONS: &str = "Weyl group maps solutions to solutions";

/// Run `body` with parameters sampled from `seed`, resampling up to five
/// times when the sample is resonant or otherwise degenerate.
pub fn with_resample<T>(seed: u64, mut body: impl FnMut(u64) -> Result<T>) -> Result<T> {
    let mut last = None;
    for attempt in 0..5u64 {
        match body(seed.wrapping_add(attempt * 7919)) {
            Ok(v) => return Ok(v),
            Err(e @ (Error::Resonance(_) | Error::SamplingExhausted { .. } | Error::VanishingDenominator { .. })) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::SamplingExhausted { attempts: 5 }))
}

pub(crate) fn integrator(tol: &Tolerances) -> IntegratorOptions {
    IntegratorOptions { rtol: tol.integrator_rtol, atol: tol.integrator_atol, ..Default::default() }
}

/// Residuals of every fundamental solution (generic or confluent according
/// to the parameter kind) over `grid`.
pub fn solution_residuals(p: &ParameterSet, grid: &[f64]) -> Result<Vec<f64>> {
    let sys = match p.kind() {
        Kind::Generic => build_fuchsian(p)?,
        Kind::Degenerate(_) => build_confluent(p)?,
    };
    let sols = all_fundamental_solutions(p, 0)?;
    let mut out = Vec::new();
    for sol in &sols {
        for &t in grid {
            out.push(system_residual(sol, &sys, t, FD_STEP)?);
        }
    }
    Ok(out)
}

/// `|det|` of the row-scaled solution matrix at `t`.
pub fn solution_determinant(p: &ParameterSet, t: f64) -> Result<f64> {
    let sols = all_fundamental_solutions(p, 0)?;
    Ok(scaled_solution_matrix(&sols, t)?.determinant().norm())
}

/// Per-component operator residuals over all `(k, i)` and `times`.
pub fn component_residuals(p: &ParameterSet, times: &[f64]) -> Result<Vec<f64>> {
    let n = p.n();
    let mut out = Vec::new();
    for k in 0..=n {
        for i in 0..=n {
            for &t in times {
                out.push(component_ode_residual(p, k, i, re(t), 1e-15)?);
            }
        }
    }
    Ok(out)
}

/// Component residual when the operator's first upper parameter is moved by
/// `0.1`: a negative control.
pub fn misspecified_component_residual(p: &ParameterSet, t: f64) -> Result<f64> {
    let n = p.n();
    let (k, i) = (n, 0);
    let l = k - i;
    let comp = match p.kind() {
        Kind::Generic => generic_component(p, k, l)?,
        Kind::Degenerate(_) => confluent_component(p, k, l)?,
    };
    let mut op = component_ode_params(p, i)?;
    op.upper[0] += re(0.1);
    let exponent = -crate::linear::gauge_exponent(p, k);
    operator_residual_on(&comp.spec, &op.upper, &op.lower, exponent, re(t), 1e-15)
}

/// Integrate the symmetric system from solution `k` at `t0` with `y = 0` and
/// compare with the series at `t1`; returns `(relative error, max |y|)`.
pub fn round_trip(p: &ParameterSet, k: usize, t0: f64, t1: f64, opts: &IntegratorOptions) -> Result<(f64, f64)> {
    let n = p.n();
    let sol = crate::linear::fundamental_solution(p, k, 0)?;
    let x0 = sol.eval(t0)?;
    let x1 = sol.eval(t1)?;
    let sys = HamiltonianSystem::new(SystemId::Symmetric, p.clone())?;
    let z0: Vec<C64> = x0.iter().copied().chain(vec![re(0.0); n + 1]).collect();
    let tr = integrate(|t, z| sys.field(t, z), t0, &z0, t1, &[t1], opts)?;
    let z1 = tr.last().ok_or(Error::NonFinite { t: t1 })?;
    let diff: Vec<C64> = z1[..=n].iter().zip(&x1).map(|(a, b)| a - b).collect();
    Ok((norm_inf(&diff) / norm_inf(&x1), norm_inf(&z1[n + 1..])))
}

/// Start points tried before [`constraint_drift`] gives up on reaching `t1`.
pub const DRIFT_ATTEMPTS: usize = 10;

/// Worst `|Σxy + η|` along an integrated trajectory started at a random
/// point with small momenta. Starts whose trajectory reaches a movable pole
/// before `t1` are replaced by fresh ones.
pub fn constraint_drift(sys: &HamiltonianSystem, t0: f64, t1: f64, seed: u64, opts: &IntegratorOptions) -> Result<f64> {
    let d = sys.dof();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts = crate::dynamics::linspace(t0, t1, 21);
    let mut last = None;
    for _ in 0..DRIFT_ATTEMPTS {
        let x: Vec<C64> = (0..d).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        let y: Vec<C64> = (0..d).map(|_| re(rng.gen_range(-0.2..0.2))).collect();
        let z0: Vec<C64> = x.iter().chain(&y).copied().collect();
        let eta = -x.iter().zip(&y).map(|(a, b)| a * b).sum::<C64>();
        match integrate(|t, z| sys.field(t, z), t0, &z0, t1, &ts, opts) {
            Ok(tr) => {
                return Ok(tr
                    .states
                    .iter()
                    .map(|z| PhasePoint::symmetric(0.0, &z[..d], &z[d..]).constraint_defect(eta))
                    .fold(0.0, f64::max))
            }
            Err(e @ (Error::StepSizeUnderflow { .. } | Error::TooManySteps { .. } | Error::NonFinite { .. })) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::SamplingExhausted { attempts: DRIFT_ATTEMPTS }))
}

/// Largest field mismatch under `y = 0` between the Hamiltonian flow and the
/// linear system matching the parameter kind, over random points.
pub fn specialization_error(p: &ParameterSet, points: usize, seed: u64) -> Result<f64> {
    let n = p.n();
    let (sys, lin, range) = match p.kind() {
        Kind::Generic => (HamiltonianSystem::new(SystemId::Symmetric, p.clone())?, build_fuchsian(p)?, 0.1..0.9),
        Kind::Degenerate(_) => (HamiltonianSystem::new(SystemId::Degenerate, p.clone())?, build_confluent(p)?, 0.1..2.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let t = rng.gen_range(range.clone());
        let x: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        let z: Vec<C64> = x.iter().copied().chain(vec![re(0.0); n + 1]).collect();
        let f = sys.field(t, &z)?;
        let want = lin.field(re(t), &x)?;
        let diff: Vec<C64> = f[..=n].iter().zip(&want).map(|(a, b)| a - b).collect();
        let scale = norm_inf(&want).max(1.0);
        worst = worst.max(norm_inf(&diff) / scale).max(norm_inf(&f[n + 1..]) / scale);
    }
    Ok(worst)
}

/// Two-point order estimates `log10(e(1e-3)/e(1e-4))` of the field and the
/// linear confluence errors at random points.
pub fn confluence_orders(target: &ParameterSet, points: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = target.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = Vec::new();
    let mut linear = Vec::new();
    for _ in 0..points {
        let s = rng.gen_range(0.2..1.5);
        let x: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        let y: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        let f3 = field_confluence_error(target, 1e-3, s, &x, &y)?;
        let f4 = field_confluence_error(target, 1e-4, s, &x, &y)?;
        field.push((f3 / f4).log10());
        let l3 = linear_confluence_error(target, 1e-3, s, &x)?;
        let l4 = linear_confluence_error(target, 1e-4, s, &x)?;
        linear.push((l3 / l4).log10());
    }
    Ok((field, linear))
}

/// The canonical system attached to `(n, r)`, if any.
pub fn canonical_for(n: usize, r: usize) -> Option<Canonical> {
    match (n, r) {
        (1, 1) => Some(Canonical::P5),
        (1, 2) => Some(Canonical::P3),
        (2, 1) => Some(Canonical::N2R1),
        (2, 2) => Some(Canonical::N2R2),
        (2, 3) => Some(Canonical::N2R3),
        _ => None,
    }
}

pub fn canonical_name(which: Canonical) -> &'static str {
    match which {
        Canonical::P5 => "fifth Painleve system (n=1, r=1)",
        Canonical::P3 => "third Painleve system (n=1, r=2)",
        Canonical::N2R1 => "rank-two system (r=1)",
        Canonical::N2R2 => "rank-two system (r=2)",
        Canonical::N2R3 => "rank-two system (r=3)",
    }
}

/// Pushforward mismatch of a canonical field at random points whose
/// coordinates stay at least 0.5 away from zero.
pub fn pushforward_errors(which: Canonical, p: &ParameterSet, points: usize, seed: u64) -> Result<Vec<f64>> {
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(points);
    for _ in 0..points {
        let t = rng.gen_range(0.1..2.0);
        let x: Vec<C64> = (0..=n)
            .map(|_| {
                let v: f64 = rng.gen_range(-1.0..1.0);
                re(v + 0.5 * v.signum())
            })
            .collect();
        let y: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
        out.push(canonical_pushforward_error(which, p, t, &x, &y)?);
    }
    Ok(out)
}

/// Theorem-level checks of the Fuchsian system and its fundamental solutions,
/// plus the nonlinear round trip through the symmetric form.
pub fn scenario_particular_solution(n: usize, seed: u64, tol: &Tolerances) -> VerificationReport {
    VerificationReport::new("particular", seed, Some(n), None).run(|rep| {
        if !(1..=4).contains(&n) {
            return Err(Error::InvalidParameters(format!("particular scenario needs n in 1..=4, got {n}")));
        }
        let (p, residuals, components) = with_resample(seed, |s| {
            let p = ParameterSet::sample_generic(n, s)?;
            let res = solution_residuals(&p, &FUCHSIAN_GRID)?;
            let comp = component_residuals(&p, &COMPONENT_TIMES)?;
            Ok((p, res, comp))
        })?;
        let sys = build_fuchsian(&p)?;
        let spectra = sys.spectra()?;
        rep.push(super::Measurement::new(
            ST_SPECTRA,
            "distance to listed exponents",
            spectra.distance(&listed_exponents(&p)),
            Check::AtMost(tol.exponents),
        ));
        rep.push(super::Measurement::new(
            ST_SPECTRA,
            "|sum of exponents|",
            spectra.exponent_sum().norm(),
            Check::AtMost(tol.exponents),
        ));
        rep.push_worst(ST_FUNDAMENTAL, "system residual on [0.05, 0.5]", &residuals, Check::AtMost(tol.linear_residual));
        rep.push(super::Measurement::new(
            ST_FUNDAMENTAL,
            "|det| of scaled solution matrix at t=0.1",
            solution_determinant(&p, 0.1)?,
            Check::AtLeast(tol.determinant),
        ));
        rep.push_worst(ST_COMPONENTS, "component operator residual", &components, Check::AtMost(tol.component));
        rep.push(super::Measurement::new(
            ST_COMPONENTS,
            "negative control: operator with a_0 + 0.1",
            misspecified_component_residual(&p, 0.3)?,
            Check::AtLeast(tol.negative_control),
        ));
        let opts = integrator(tol);
        let mut errs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..=n {
            let (e, y) = round_trip(&p, k, 0.1, 0.4, &opts)?;
            errs.push(e);
            ys.push(y);
        }
        rep.push_worst(ST_SPECIALIZATION, "integrated vs series at t=0.4", &errs, Check::AtMost(tol.round_trip));
        rep.push_worst(ST_SPECIALIZATION, "max |y| along the round trip", &ys, Check::AtMost(tol.constraint_drift));
        rep.push(super::Measurement::new(
            ST_SPECIALIZATION,
            "symmetric field at y=0 vs Fuchsian system",
            specialization_error(&p, 20, seed)?,
            Check::AtMost(tol.specialization),
        ));
        Ok(())
    })
}

/// Confluence of fields and systems, confluent solutions, and for `n ≤ 2`
/// the canonical form attached to `(n, r)`.
pub fn scenario_degeneration(n: usize, r: usize, seed: u64, tol: &Tolerances) -> VerificationReport {
    VerificationReport::new("degeneration", seed, Some(n), Some(r)).run(|rep| {
        if !(1..=3).contains(&n) || !(1..=n + 1).contains(&r) {
            return Err(Error::InvalidParameters(format!("degeneration needs n in 1..=3 and r in 1..=n+1, got ({n}, {r})")));
        }
        let (p, residuals, components) = with_resample(seed, |s| {
            let p = ParameterSet::sample_degenerate(n, r, s)?;
            let res = solution_residuals(&p, &CONFLUENT_GRID)?;
            let comp = component_residuals(&p, &[0.3, 0.8, 1.5])?;
            Ok((p, res, comp))
        })?;
        let (field, linear) = confluence_orders(&p, 5, seed)?;
        let order = Check::Within(tol.order_min, tol.order_max);
        rep.push_worst(ST_CONFLUENCE, "field error order between eps=1e-3 and 1e-4", &field, order);
        rep.push_worst(ST_CONFLUENCE, "linear system error order between eps=1e-3 and 1e-4", &linear, order);
        rep.push(super::Measurement::new(
            ST_CONFLUENT_SPECIALIZATION,
            "degenerate field at y=0 vs confluent system",
            specialization_error(&p, 20, seed)?,
            Check::AtMost(tol.specialization),
        ));
        rep.push_worst(ST_CONFLUENT_SOLUTIONS, "system residual on [0.1, 2]", &residuals, Check::AtMost(tol.linear_residual));
        rep.push(super::Measurement::new(
            ST_CONFLUENT_SOLUTIONS,
            "|det| of scaled solution matrix at t=0.1",
            solution_determinant(&p, 0.1)?,
            Check::AtLeast(tol.determinant),
        ));
        rep.push_worst(ST_CONFLUENT_COMPONENTS, "component operator residual", &components, Check::AtMost(tol.component));
        let deg = HamiltonianSystem::new(SystemId::Degenerate, p.clone())?;
        rep.push(super::Measurement::new(
            ST_HAMILTONIAN,
            "degenerate gradient vs finite differences",
            check_gradients(&deg, 100, seed)?,
            Check::AtMost(tol.gradient),
        ));
        rep.push(super::Measurement::new(
            ST_HAMILTONIAN,
            "constraint drift on [0.5, 1]",
            constraint_drift(&deg, 0.5, 1.0, seed, &integrator(tol))?,
            Check::AtMost(tol.constraint_drift),
        ));
        if let Some(which) = canonical_for(n, r) {
            let errs = pushforward_errors(which, &p, 50, seed)?;
            rep.push_worst(
                ST_CANONICAL,
                &format!("{}: pushforward mismatch", canonical_name(which)),
                &errs,
                Check::AtMost(tol.pushforward),
            );
            let sys = HamiltonianSystem::new(SystemId::CanonicalForm(which), p.clone())?;
            rep.push(super::Measurement::new(
                ST_CANONICAL,
                format!("{}: gradient vs finite differences", canonical_name(which)),
                check_gradients(&sys, 100, seed)?,
                Check::AtMost(tol.gradient),
            ));
        }
        Ok(())
    })
}

/// Relations of the Weyl group, its parameter action and the mapping of an
/// integrated trajectory.
pub fn scenario_weyl(n: usize, seed: u64, tol: &Tolerances) -> VerificationReport {
    VerificationReport::new("weyl", seed, Some(n), None).run(|rep| {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameters(format!("weyl scenario needs n in 1..=3, got {n}")));
        }
        let (p, checks) = with_resample(seed, |s| {
            let p = ParameterSet::sample_generic(n, s)?;
            let c = verify_relations(&p, 50, s)?;
            Ok((p, c))
        })?;
        let squares: Vec<f64> = checks.iter().filter(|c| c.word.letters.len() == 2).map(|c| c.defect).collect();
        let pairs: Vec<f64> = checks.iter().filter(|c| c.word.letters.len() > 2).map(|c| c.defect).collect();
        rep.push_worst(ST_WEYL_RELATIONS, "r_i^2 defect", &squares, Check::AtMost(tol.relation));
        rep.push_worst(ST_WEYL_RELATIONS, "(r_i r_j)^(2 - a_ij) defect", &pairs, Check::AtMost(tol.relation));
        rep.push(super::Measurement::new(
            ST_WEYL_PARAMETERS,
            "drift of the parameter sum",
            parameter_sum_drift(&p)?,
            Check::AtMost(tol.parameter_sum),
        ));
        let (mapping, constraint) = weyl_mapping(&p, seed, tol)?;
        rep.push_worst(ST_WEYL_SOLUTIONS, "field residual of mapped trajectory", &mapping, Check::AtMost(tol.weyl_mapping));
        rep.push_worst(ST_WEYL_SOLUTIONS, "constraint defect after mapping", &constraint, Check::AtMost(tol.weyl_constraint));
        Ok(())
    })
}

/// Map an integrated trajectory through every generator. The start point is
/// chosen so that no generator denominator is small there.
pub fn weyl_mapping(p: &ParameterSet, seed: u64, tol: &Tolerances) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<WeylWord> = (0..2 * n + 2).map(|i| WeylWord::new(vec![i])).collect();
    let opts = integrator(tol);
    for _ in 0..20 {
        let (start, _) = sample_regular_point(p, &words, &mut rng)?;
        let start = PhasePoint { t: 0.2, ..start };
        let attempt: Result<Vec<_>> = (0..2 * n + 2)
            .map(|i| solution_mapping_residual(p, &start, 0.3, i, 5, &opts))
            .collect();
        match attempt {
            Ok(maps) => {
                return Ok((
                    maps.iter().map(|m| m.residual).collect(),
                    maps.iter().map(|m| m.constraint_defect).collect(),
                ))
            }
            Err(Error::VanishingDenominator { .. } | Error::StepSizeUnderflow { .. } | Error::TooManySteps { .. }) => {
                continue
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::SamplingExhausted { attempts: 20 })
}
