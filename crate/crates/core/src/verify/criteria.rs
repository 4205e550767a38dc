//! The ten acceptance criteria, each producing one report.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenarios::*;
use super::{Check, Measurement, Tolerances, VerificationReport};
use crate::dynamics::{
    check_gradients, coupled_pushforward_error, gauss_equation_residual, gauss_riccati_solution, riccati_polynomial,
    riccati_residual, Canonical, HamiltonianSystem, SystemId,
};
use crate::error::{Error, Result};
use crate::hyperfn::{ode_residual, HGSpec};
use crate::linear::{
    build_fuchsian, closed_form_coeffs, gauge_transform, listed_exponents, sample_rational, shifted_system,
    solve_recurrence,
};
use crate::params::ParameterSet;
use crate::scalar::{re, C64};

/// Short names of the criteria, in order.
pub const CRITERIA: [&str; 10] = [
    "series and equation consistency",
    "recursion equals closed form",
    "fundamental solutions and component equations",
    "residue eigenvalues and exponent sum",
    "nonlinear to linear round trip",
    "gradient oracle",
    "degeneration",
    "canonical forms",
    "Weyl group action",
    "rank-one classical chain",
];

/// Wall-time budget of each criterion in seconds, where one is stated.
pub fn criterion_budget(k: usize) -> Option<f64> {
    match k {
        1 => Some(5.0),
        2 => Some(20.0),
        _ => None,
    }
}

pub fn run_criterion(k: usize, seed: u64, tol: &Tolerances) -> VerificationReport {
    let name = CRITERIA.get(k.wrapping_sub(1)).copied().unwrap_or("unknown");
    VerificationReport::new(format!("criterion {k}: {name}"), seed, None, None).run(|rep| match k {
        1 => criterion_series(rep, seed, tol),
        2 => criterion_recursion(rep, seed, tol),
        3 => criterion_fundamental(rep, seed, tol),
        4 => criterion_spectra(rep, seed, tol),
        5 => criterion_round_trip(rep, seed, tol),
        6 => criterion_gradients(rep, seed, tol),
        7 => criterion_degeneration(rep, seed, tol),
        8 => criterion_canonical(rep, seed, tol),
        9 => criterion_weyl(rep, seed, tol),
        10 => criterion_classical(rep, seed, tol),
        _ => Err(Error::InvalidParameters(format!("no criterion {k}; expected 1..=10"))),
    })
}

/// Random `n+1` over `n` spec with upper parameters in `(-1.5, 1.5)` and
/// lower ones in `(0.1, 2.5)`.
pub fn random_spec(n: usize, rng: &mut ChaCha8Rng) -> HGSpec {
    let upper: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.5)).collect();
    HGSpec::from_reals(&upper, &lower)
}

fn criterion_series(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=4 {
        let mut values = Vec::new();
        for _ in 0..20 {
            let spec = random_spec(n, &mut rng);
            for m in 1..=9 {
                values.push(ode_residual(&spec, re(m as f64 / 10.0), 1e-14)?);
            }
        }
        rep.push_worst(
            "hypergeometric equation",
            &format!("n={n}: operator residual, 20 specs, t=0.1..0.9"),
            &values,
            Check::AtMost(tol.ode_sweep),
        );
    }
    Ok(())
}

fn criterion_recursion(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    let depth = 21;
    for n in 1..=3 {
        let mut mismatches = 0usize;
        for set in 0..5 {
            let p = sample_rational(n, 97, seed.wrapping_add(17 * set + n as u64))?;
            let sys = build_fuchsian(&p)?;
            for k in 0..=n {
                let rec = solve_recurrence(&gauge_transform(&sys, k)?, depth)?;
                let cf: Vec<Vec<BigRational>> = closed_form_coeffs(&p, k, depth)?;
                mismatches += rec.iter().flatten().zip(cf.iter().flatten()).filter(|(a, b)| a != b).count();
            }
        }
        rep.push(Measurement::new(
            "series recursion",
            format!("n={n}: exact mismatches, 5 rational sets, i<=20"),
            mismatches as f64,
            Check::AtMost(0.0),
        ));
    }
    let mut worst: f64 = 0.0;
    for set in 0..5 {
        let p = ParameterSet::sample_generic(4, seed.wrapping_add(31 * set))?;
        for k in 0..=4 {
            let rec: Vec<Vec<C64>> = solve_recurrence(&shifted_system(&p, k)?, depth)?;
            let cf = closed_form_coeffs(&p, k, depth)?;
            for (a, b) in rec.iter().flatten().zip(cf.iter().flatten()) {
                worst = worst.max((a - b).norm() / b.norm().max(1.0));
            }
        }
    }
    rep.push(Measurement::new(
        "series recursion",
        "n=4: float mismatch, 5 sets, i<=20",
        worst,
        Check::AtMost(tol.recurrence_float),
    ));
    Ok(())
}

fn criterion_fundamental(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    for n in 1..=4 {
        let (p, res, comp) = with_resample(seed.wrapping_add(n as u64), |s| {
            let p = ParameterSet::sample_generic(n, s)?;
            Ok((p.clone(), solution_residuals(&p, &FUCHSIAN_GRID)?, component_residuals(&p, &COMPONENT_TIMES)?))
        })?;
        rep.push_worst(ST_FUNDAMENTAL, &format!("n={n}: system residual on [0.05, 0.5]"), &res, Check::AtMost(tol.linear_residual));
        rep.push(Measurement::new(
            ST_FUNDAMENTAL,
            format!("n={n}: |det| of scaled solution matrix at t=0.1"),
            solution_determinant(&p, 0.1)?,
            Check::AtLeast(tol.determinant),
        ));
        rep.push_worst(ST_COMPONENTS, &format!("n={n}: component operator residual"), &comp, Check::AtMost(tol.component));
    }
    Ok(())
}

fn criterion_spectra(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    let mut distance = Vec::new();
    let mut sums = Vec::new();
    for set in 0..50u64 {
        let n = 1 + (set % 4) as usize;
        let p = ParameterSet::sample_generic(n, seed.wrapping_add(set))?;
        let spectra = build_fuchsian(&p)?.spectra()?;
        distance.push(spectra.distance(&listed_exponents(&p)));
        sums.push(spectra.exponent_sum().norm());
    }
    rep.push_worst(ST_SPECTRA, "distance to listed exponents, 50 sets", &distance, Check::AtMost(tol.exponents));
    rep.push_worst(ST_SPECTRA, "|sum of exponents|, 50 sets", &sums, Check::AtMost(tol.exponents));
    Ok(())
}

fn criterion_round_trip(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    let opts = integrator(tol);
    let mut drift = Vec::new();
    for n in 1..=3 {
        let p = with_resample(seed.wrapping_add(n as u64), |s| {
            let p = ParameterSet::sample_generic(n, s)?;
            solution_residuals(&p, &[0.1])?;
            Ok(p)
        })?;
        let mut errs = Vec::new();
        for k in 0..=n {
            let (e, y) = round_trip(&p, k, 0.1, 0.4, &opts)?;
            errs.push(e);
            drift.push(y);
        }
        rep.push_worst(ST_SPECIALIZATION, &format!("n={n}: integrated vs series at t=0.4"), &errs, Check::AtMost(tol.round_trip));
        let sym = HamiltonianSystem::new(SystemId::Symmetric, p)?;
        drift.push(constraint_drift(&sym, 0.2, 0.5, seed, &opts)?);
        for r in 1..=n + 1 {
            let d = ParameterSet::sample_degenerate(n, r, seed.wrapping_add(r as u64))?;
            let deg = HamiltonianSystem::new(SystemId::Degenerate, d)?;
            drift.push(constraint_drift(&deg, 0.5, 1.0, seed, &opts)?);
        }
    }
    rep.push_worst(ST_HAMILTONIAN, "constraint drift along all trajectories", &drift, Check::AtMost(tol.constraint_drift));
    Ok(())
}

/// Every Hamiltonian system covered by the gradient oracle.
pub fn all_hamiltonian_systems(seed: u64) -> Result<Vec<(String, HamiltonianSystem)>> {
    let mut out = Vec::new();
    for n in 1..=3 {
        let p = ParameterSet::sample_generic(n, seed.wrapping_add(n as u64))?;
        out.push((format!("coupled sixth Painleve, n={n}"), HamiltonianSystem::new(SystemId::CoupledP6, p.clone())?));
        out.push((format!("symmetric form, n={n}"), HamiltonianSystem::new(SystemId::Symmetric, p)?));
        for r in 1..=n + 1 {
            let d = ParameterSet::sample_degenerate(n, r, seed.wrapping_add(10 * n as u64 + r as u64))?;
            out.push((format!("degenerate system, n={n}, r={r}"), HamiltonianSystem::new(SystemId::Degenerate, d)?));
        }
    }
    for which in [Canonical::P5, Canonical::P3, Canonical::N2R1, Canonical::N2R2, Canonical::N2R3] {
        let (n, r) = match which {
            Canonical::P5 => (1, 1),
            Canonical::P3 => (1, 2),
            Canonical::N2R1 => (2, 1),
            Canonical::N2R2 => (2, 2),
            Canonical::N2R3 => (2, 3),
        };
        let d = ParameterSet::sample_degenerate(n, r, seed.wrapping_add(100 + 10 * n as u64 + r as u64))?;
        out.push((canonical_name(which).to_string(), HamiltonianSystem::new(SystemId::CanonicalForm(which), d)?));
    }
    Ok(out)
}

fn criterion_gradients(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    for (i, (name, sys)) in all_hamiltonian_systems(seed)?.into_iter().enumerate() {
        rep.push(Measurement::new(
            ST_HAMILTONIAN,
            format!("{name}: gradient vs finite differences, 100 points"),
            check_gradients(&sys, 100, seed.wrapping_add(i as u64))?,
            Check::AtMost(tol.gradient),
        ));
    }
    Ok(())
}

fn criterion_degeneration(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    for n in 1..=3 {
        for r in 1..=n + 1 {
            let (p, res) = with_resample(seed.wrapping_add(10 * n as u64 + r as u64), |s| {
                let p = ParameterSet::sample_degenerate(n, r, s)?;
                Ok((p.clone(), solution_residuals(&p, &CONFLUENT_GRID)?))
            })?;
            let (field, _) = confluence_orders(&p, 3, seed)?;
            rep.push_worst(
                ST_CONFLUENCE,
                &format!("n={n}, r={r}: field error order"),
                &field,
                Check::Within(tol.order_min, tol.order_max),
            );
            rep.push_worst(
                ST_CONFLUENT_SOLUTIONS,
                &format!("n={n}, r={r}: system residual"),
                &res,
                Check::AtMost(tol.linear_residual),
            );
        }
    }
    Ok(())
}

fn criterion_canonical(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    for (n, r) in [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3)] {
        let which = canonical_for(n, r).expect("table covers n <= 2");
        let p = ParameterSet::sample_degenerate(n, r, seed.wrapping_add(10 * n as u64 + r as u64))?;
        let errs = pushforward_errors(which, &p, 50, seed)?;
        rep.push_worst(
            ST_CANONICAL,
            &format!("{}: pushforward mismatch, 50 points", canonical_name(which)),
            &errs,
            Check::AtMost(tol.pushforward),
        );
    }
    // the coupled sixth Painleve system under the symmetric coordinates
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=3 {
        let p = ParameterSet::sample_generic(n, seed.wrapping_add(n as u64))?;
        let mut errs = Vec::new();
        for _ in 0..50 {
            let t = rng.gen_range(0.1..0.9);
            let mut x: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
            x[n] += re(2.0);
            let y: Vec<C64> = (0..=n).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
            errs.push(coupled_pushforward_error(&p, t, &x, &y)?);
        }
        rep.push_worst(
            ST_CANONICAL,
            &format!("coupled sixth Painleve from the symmetric form, n={n}"),
            &errs,
            Check::AtMost(tol.pushforward),
        );
    }
    Ok(())
}

fn criterion_weyl(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    let mut sums = Vec::new();
    for n in 1..=3 {
        let (p, checks) = with_resample(seed.wrapping_add(n as u64), |s| {
            let p = ParameterSet::sample_generic(n, s)?;
            let c = crate::symmetry::verify_relations(&p, 50, s)?;
            Ok((p, c))
        })?;
        let defects: Vec<f64> = checks.iter().map(|c| c.defect).collect();
        rep.push_worst(ST_WEYL_RELATIONS, &format!("n={n}: worst relation defect, 50 points"), &defects, Check::AtMost(tol.relation));
        sums.push(crate::symmetry::parameter_sum_drift(&p)?);
        let (mapping, _) = weyl_mapping(&p, seed, tol)?;
        rep.push_worst(ST_WEYL_SOLUTIONS, &format!("n={n}: mapped trajectory residual"), &mapping, Check::AtMost(tol.weyl_mapping));
    }
    rep.push_worst(ST_WEYL_PARAMETERS, "drift of the parameter sum", &sums, Check::AtMost(tol.parameter_sum));
    Ok(())
}

fn criterion_classical(rep: &mut VerificationReport, seed: u64, tol: &Tolerances) -> Result<()> {
    let mut riccati = Vec::new();
    let mut gauss = Vec::new();
    let mut reduction = Vec::new();
    // a perturbed function is rejected if it violates the equation somewhere
    // on the grid, so each set contributes its largest residual
    let mut control_q = Vec::new();
    let mut control_p = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for set in 0..5u64 {
        let p = ParameterSet::sample_generic(1, seed.wrapping_add(set))?.with_eta(re(0.0));
        let bumped = p.with_alphas(
            p.alphas().iter().enumerate().map(|(i, a)| if i == 3 { a + re(0.1) } else { *a }).collect(),
        );
        let cp6 = HamiltonianSystem::new(SystemId::CoupledP6, p.clone())?;
        let (mut worst_q, mut worst_p): (f64, f64) = (0.0, 0.0);
        for m in 1..=5 {
            let t = m as f64 / 10.0;
            let (q, dq) = gauss_riccati_solution(&p, t)?;
            riccati.push(riccati_residual(&p, t, q, dq));
            gauss.push(gauss_equation_residual(&p, t)?);
            worst_q = worst_q.max(riccati_residual(&p, t, q + re(0.01), dq));
            worst_p = worst_p.max(riccati_residual(&bumped, t, q, dq));
            // the Hamiltonian field at p = 0 reproduces the Riccati right side
            let qq = re(rng.gen_range(-2.0..2.0));
            let f = cp6.field(t, &[qq, re(0.0)])?;
            let want = riccati_polynomial(&p, t, qq) / re(t * (t - 1.0));
            reduction.push((f[0] - want).norm() / want.norm().max(1.0));
        }
        control_q.push(worst_q);
        control_p.push(worst_p);
    }
    let st_r = "Riccati reduction at rank one";
    let st_g = "Gauss linearization at rank one";
    rep.push_worst(st_r, "coupled field at p=0 vs Riccati right side", &reduction, Check::AtMost(tol.classical));
    rep.push_worst(st_g, "Riccati residual of q from the Gauss series", &riccati, Check::AtMost(tol.classical));
    rep.push_worst(st_g, "Gauss equation residual", &gauss, Check::AtMost(tol.classical));
    rep.push_worst(st_g, "negative control: q + 0.01", &control_q, Check::AtLeast(tol.negative_control));
    rep.push_worst(st_g, "negative control: alpha_3 + 0.1", &control_p, Check::AtLeast(tol.negative_control));
    Ok(())
}
