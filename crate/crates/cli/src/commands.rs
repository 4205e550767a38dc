use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde_json::json;

use painleve_core::dynamics::{check_gradients, integrate as integrate_flow, linspace, Canonical, HamiltonianSystem, IntegratorOptions, SystemId};
use painleve_core::hyperfn::eval_series;
use painleve_core::io::{self, ComplexJson, ParamsJson, StateJson};
use painleve_core::linear::{
    build_confluent, build_dual, build_fuchsian, confluent_fundamental_solution, fundamental_solution, system_residual, FD_STEP,
};
use painleve_core::symmetry::{apply_word, verify_relations, WeylWord};
use painleve_core::verify::{
    all_tasks, criterion_tasks, degeneration_tasks, failure_count, particular_tasks, residual_sweep, run_tasks, series_sweep,
    strip_timing, weyl_tasks, Check, Task, Tolerances, VerificationReport,
};
use painleve_core::{HGSpec, Kind, ParameterSet, C64};

use crate::args::*;
use crate::output::{emit, sink, status, use_color};

/// Adding `+0.0` turns `-0.0` into `0.0` for display.
fn complex_json(z: C64) -> ComplexJson {
    C64::new(z.re + 0.0, z.im + 0.0).into()
}

fn spec_from(a: &SpecArgs) -> HGSpec {
    if a.no_factorial {
        HGSpec::without_factorial(a.upper.clone(), a.lower.clone())
    } else {
        HGSpec::new(a.upper.clone(), a.lower.clone())
    }
}

fn load_params(a: &ParamsArg) -> Result<ParameterSet> {
    let p = io::read_params(&a.params).with_context(|| format!("reading {}", a.params.display()))?;
    match a.r {
        Some(r) => Ok(ParameterSet::new(p.n(), p.alphas().to_vec(), *p.eta(), Kind::Degenerate(r))?),
        None => Ok(p),
    }
}

pub fn hg(c: HgCommand) -> Result<ExitCode> {
    let HgCommand::Eval(a) = c;
    let v = eval_series(&spec_from(&a.spec), a.t, a.rtol)?;
    let out = json!({ "value": [v.value.re, v.value.im], "terms_used": v.terms_used });
    emit(None, &serde_json::to_string_pretty(&out)?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn linear(c: LinearCommand) -> Result<ExitCode> {
    match c {
        LinearCommand::Build(a) => emit(a.out.as_deref(), &io::system_to_json(&build_fuchsian(&load_params(&a.params)?)?)?)?,
        LinearCommand::Dual(a) => emit(a.out.as_deref(), &io::system_to_json(&build_dual(&load_params(&a.params)?)?)?)?,
        LinearCommand::Confluent(a) => {
            emit(a.out.as_deref(), &io::system_to_json(&build_confluent(&load_params(&a.params)?)?)?)?
        }
        LinearCommand::Fundamental(a) => {
            let p = load_params(&a.params)?;
            let (sol, sys) = match p.kind() {
                Kind::Generic => (fundamental_solution(&p, a.k, a.depth)?, build_fuchsian(&p)?),
                Kind::Degenerate(_) => (confluent_fundamental_solution(&p, a.k, a.depth)?, build_confluent(&p)?),
            };
            let coeffs: Vec<Vec<ComplexJson>> =
                sol.original_coeffs().iter().map(|v| v.iter().copied().map(complex_json).collect()).collect();
            let value: Vec<ComplexJson> = sol.eval(a.eval_at)?.into_iter().map(complex_json).collect();
            let out = json!({
                "k": a.k,
                "exponent": complex_json(sol.exponent),
                "coeffs": coeffs,
                "t": a.eval_at,
                "value_at_t": value,
                "residual": system_residual(&sol, &sys, a.eval_at, FD_STEP)?,
            });
            emit(a.out.as_deref(), &serde_json::to_string_pretty(&out)?)?
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// System id and, for the canonical forms, the `(n, r)` they require.
fn system_id(s: SystemArg) -> (SystemId, Option<(usize, usize)>) {
    match s {
        SystemArg::Cp6 => (SystemId::CoupledP6, None),
        SystemArg::Symmetric => (SystemId::Symmetric, None),
        SystemArg::Degenerate => (SystemId::Degenerate, None),
        SystemArg::P5 => (SystemId::CanonicalForm(Canonical::P5), Some((1, 1))),
        SystemArg::P3 => (SystemId::CanonicalForm(Canonical::P3), Some((1, 2))),
        SystemArg::N2r1 => (SystemId::CanonicalForm(Canonical::N2R1), Some((2, 1))),
        SystemArg::N2r2 => (SystemId::CanonicalForm(Canonical::N2R2), Some((2, 2))),
        SystemArg::N2r3 => (SystemId::CanonicalForm(Canonical::N2R3), Some((2, 3))),
    }
}

pub fn integrate(a: &IntegrateArgs) -> Result<ExitCode> {
    let (id, _) = system_id(a.system);
    let sys = HamiltonianSystem::new(id, load_params(&a.params)?)?;
    let start = io::read_state(&a.from).with_context(|| format!("reading {}", a.from.display()))?;
    if start.representation != sys.representation() || start.z.len() != 2 * sys.dof() {
        bail!(
            "state has {} {:?} entries; {:?} needs {} {:?} entries",
            start.z.len(),
            start.representation,
            a.system,
            2 * sys.dof(),
            sys.representation()
        );
    }
    let t0 = a.t0.unwrap_or(start.t);
    if a.samples < 2 {
        bail!("--samples must be at least 2");
    }
    let opts = IntegratorOptions { rtol: a.rtol, atol: a.atol, ..Default::default() };
    let traj = integrate_flow(|t, z| sys.field(t, z), t0, &start.z, a.t1, &linspace(t0, a.t1, a.samples), &opts)?;
    let names = io::variable_names(sys.representation(), sys.dof());
    io::write_trajectory_csv(&traj, &names, sink(a.out.as_deref())?)?;
    eprintln!(
        "{} steps, {} rejected, {} field evaluations",
        traj.stats.steps, traj.stats.rejected, traj.stats.evaluations
    );
    Ok(ExitCode::SUCCESS)
}

pub fn dynamics(c: DynamicsCommand) -> Result<ExitCode> {
    let DynamicsCommand::CheckGradients(a) = c;
    let (id, fixed) = system_id(a.system);
    let p = match &a.params {
        Some(path) => io::read_params(path)?,
        None => match (id, fixed) {
            (_, Some((n, r))) => ParameterSet::sample_degenerate(n, r, a.seed)?,
            (SystemId::Degenerate, _) => ParameterSet::sample_degenerate(a.n, a.r, a.seed)?,
            _ => ParameterSet::sample_generic(a.n, a.seed)?,
        },
    };
    let sys = HamiltonianSystem::new(id, p.clone())?;
    let err = check_gradients(&sys, a.points, a.seed)?;
    let pass = err <= a.tol;
    let out = json!({
        "system": format!("{:?}", a.system).to_lowercase(),
        "params": ParamsJson::from(&p),
        "points": a.points,
        "seed": a.seed,
        "max_relative_error": err,
        "tolerance": a.tol,
        "pass": pass,
    });
    emit(None, &serde_json::to_string_pretty(&out)?)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

pub fn weyl(c: WeylCommand) -> Result<ExitCode> {
    match c {
        WeylCommand::Apply(a) => {
            let word: WeylWord = a.word.parse()?;
            let p = io::read_params(&a.params)?;
            let mut pt = io::read_state(&a.state)?;
            if let Some(t) = a.t {
                pt.t = t;
            }
            let (img, q) = apply_word(&word, &pt, &p)?;
            let out = json!({
                "word": word.to_string(),
                "state": StateJson::from(&img),
                "params": ParamsJson::from(&q),
            });
            emit(None, &serde_json::to_string_pretty(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }
        WeylCommand::VerifyRelations(a) => {
            let p = ParameterSet::sample_generic(a.n, a.seed)?;
            let checks = verify_relations(&p, a.trials, a.seed)?;
            let color = use_color();
            let mut failed = 0;
            let mut w = sink(None)?;
            for c in &checks {
                let ok = c.defect <= a.tol;
                failed += usize::from(!ok);
                writeln!(w, "{} {:<24} defect {:.3e}  margin {:.3}", status(ok, color), c.word.to_string(), c.defect, c.margin)?;
            }
            writeln!(w, "{} of {} relations within {:e}", checks.len() - failed, checks.len(), a.tol)?;
            w.flush()?;
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn check_text(c: &Check) -> String {
    match *c {
        Check::AtMost(b) => format!("<= {b:e}"),
        Check::AtLeast(b) => format!(">= {b:e}"),
        Check::Within(lo, hi) => format!("in [{lo}, {hi}]"),
    }
}

fn print_reports(reports: &[VerificationReport], verbose: bool, w: &mut dyn Write) -> Result<()> {
    let color = use_color();
    for r in reports {
        let mut label = r.scenario.clone();
        if let Some(n) = r.n {
            label.push_str(&format!(" n={n}"));
        }
        if let Some(rr) = r.r {
            label.push_str(&format!(" r={rr}"));
        }
        let time = r.wall_time_s.map(|s| format!(" ({s:.2}s)")).unwrap_or_default();
        writeln!(w, "{} {label}{time}", status(r.pass, color))?;
        if let Some(e) = &r.error {
            writeln!(w, "     error: {e}")?;
        }
        for m in r.measurements.iter().filter(|m| verbose || !m.pass) {
            writeln!(
                w,
                "     {} {}: {} = {:.3e} ({})",
                if m.pass { "ok  " } else { "FAIL" },
                m.statement,
                m.quantity,
                m.value,
                check_text(&m.check)
            )?;
        }
    }
    Ok(())
}

fn run_and_report(tasks: &[Task], run: &RunArgs) -> Result<ExitCode> {
    let tol = Tolerances::default();
    let mut reports = run_tasks(tasks, run.seed, &tol, run.jobs)?;
    if run.no_timing {
        strip_timing(&mut reports);
    }
    let mut w = sink(None)?;
    print_reports(&reports, run.verbose, &mut w)?;
    let failures = failure_count(&reports);
    writeln!(w, "{} of {} reports passed (seed {})", reports.len() - failures, reports.len(), run.seed)?;
    w.flush()?;
    if let Some(path) = &run.json {
        let doc = json!({
            "seed": run.seed,
            "tolerances": tol,
            "failures": failures,
            "reports": reports,
        });
        emit(Some(path), &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(ExitCode::from(failures.min(254) as u8))
}

fn range_or(n: Option<usize>, max: usize, what: &str) -> Result<Vec<usize>> {
    match n {
        Some(n) if (1..=max).contains(&n) => Ok(vec![n]),
        Some(n) => bail!("{what} needs n in 1..={max}, got {n}"),
        None => Ok((1..=max).collect()),
    }
}

pub fn verify(c: VerifyCommand) -> Result<ExitCode> {
    match c {
        VerifyCommand::All(run) => run_and_report(&all_tasks(), &run),
        VerifyCommand::Particular { n, run } => run_and_report(&particular_tasks(&range_or(n, 4, "particular")?), &run),
        VerifyCommand::Degeneration { n, r, run } => {
            let ns = range_or(n, 3, "degeneration")?;
            if let Some(r) = r {
                if ns.iter().any(|&n| r == 0 || r > n + 1) {
                    bail!("r must be in 1..=n+1");
                }
            }
            run_and_report(&degeneration_tasks(&ns, r), &run)
        }
        VerifyCommand::Weyl { n, run } => run_and_report(&weyl_tasks(&range_or(n, 3, "weyl")?), &run),
        VerifyCommand::Criteria { k, run } => {
            let tasks = match k {
                Some(k) if (1..=10).contains(&k) => vec![Task::Criterion(k)],
                Some(k) => bail!("criterion {k} does not exist; expected 1..=10"),
                None => criterion_tasks(),
            };
            run_and_report(&tasks, &run)
        }
    }
}

fn write_table(path: Option<&Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    io::write_table_csv(header, rows, sink(path)?)?;
    Ok(())
}

pub fn plot(c: PlotCommand) -> Result<ExitCode> {
    match c {
        PlotCommand::Series(a) => {
            let rows = series_sweep(&spec_from(&a.spec), a.t0, a.t1, a.step)?;
            write_table(a.out.as_deref(), &["t", "re", "im", "terms"], &rows)?;
        }
        PlotCommand::Trajectory(a) => return integrate(&a),
        PlotCommand::ResidualSweep(a) => {
            let p = io::read_params(&a.params)?;
            let rows = residual_sweep(&p, a.k, &a.depths, a.t)?;
            write_table(a.out.as_deref(), &["depth", "residual"], &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
