//! End-to-end verification: scenario pipelines, the acceptance criteria, and
//! the reports they produce.

mod criteria;
mod plot;
mod scenarios;

pub use criteria::*;
pub use plot::*;
pub use scenarios::*;

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every tolerance used by the scenarios and criteria, in one place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Operator residual of a hypergeometric series on its own equation.
    pub series: f64,
    /// Operator residual on random specs (acceptance sweep).
    pub ode_sweep: f64,
    /// Residual of an evaluated solution in its linear system.
    pub linear_residual: f64,
    /// Per-component operator residual of fundamental solutions.
    pub component: f64,
    /// Lower bound on the row-scaled solution determinant.
    pub determinant: f64,
    /// Spectra against the listed exponents and the exponent-sum relation.
    pub exponents: f64,
    /// Float agreement of recursion and closed-form coefficients.
    pub recurrence_float: f64,
    /// Integrated linear specialization against the series.
    pub round_trip: f64,
    /// Drift of `Σxy + η` along integrated trajectories.
    pub constraint_drift: f64,
    /// Analytic against finite-difference gradients.
    pub gradient: f64,
    /// Agreement of fields under the specialization `y = 0`.
    pub specialization: f64,
    /// Accepted range of the measured confluence order.
    pub order_min: f64,
    pub order_max: f64,
    /// Pushforward agreement of fields under the coordinate maps.
    pub pushforward: f64,
    /// Defect of the Weyl group relations.
    pub relation: f64,
    /// Drift of `Σα` under the generators.
    pub parameter_sum: f64,
    /// Residual of mapped trajectories in the transformed system.
    pub weyl_mapping: f64,
    /// Constraint defect after a single generator.
    pub weyl_constraint: f64,
    /// Riccati and Gauss residuals at rank one.
    pub classical: f64,
    /// Minimum residual that a negative control must produce.
    pub negative_control: f64,
    /// Integrator tolerances for the pipelines.
    pub integrator_rtol: f64,
    pub integrator_atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            series: 1e-10,
            ode_sweep: 1e-8,
            linear_residual: 1e-8,
            component: 1e-9,
            determinant: 1e-6,
            exponents: 1e-13,
            recurrence_float: 1e-12,
            round_trip: 1e-7,
            constraint_drift: 1e-8,
            gradient: 1e-7,
            specialization: 1e-12,
            order_min: 0.8,
            order_max: 1.2,
            pushforward: 1e-8,
            relation: 1e-12,
            parameter_sum: 1e-14,
            weyl_mapping: 1e-6,
            weyl_constraint: 1e-10,
            classical: 1e-8,
            negative_control: 1e-4,
            integrator_rtol: 1e-12,
            integrator_atol: 1e-14,
        }
    }
}

/// How a measured value is judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Pass when `value ≤ bound`.
    AtMost(f64),
    /// Pass when `value ≥ bound` (negative controls, determinants).
    AtLeast(f64),
    /// Pass when `lo ≤ value ≤ hi`.
    Within(f64, f64),
}

impl Check {
    pub fn accepts(&self, v: f64) -> bool {
        match *self {
            Check::AtMost(b) => v <= b,
            Check::AtLeast(b) => v >= b,
            Check::Within(lo, hi) => lo <= v && v <= hi,
        }
    }
}

/// One measured quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// The mathematical statement being checked.
    pub statement: String,
    /// What was measured.
    pub quantity: String,
    pub value: f64,
    pub check: Check,
    pub pass: bool,
}

impl Measurement {
    pub fn new(statement: &str, quantity: impl Into<String>, value: f64, check: Check) -> Self {
        let pass = !value.is_nan() && check.accepts(value);
        Measurement { statement: statement.into(), quantity: quantity.into(), value, check, pass }
    }
}

/// Outcome of one scenario or criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub seed: u64,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub measurements: Vec<Measurement>,
    /// Pipeline failure that stopped the scenario early.
    pub error: Option<String>,
    pub pass: bool,
    /// Seconds; `None` when timing is suppressed for reproducible output.
    pub wall_time_s: Option<f64>,
}

impl VerificationReport {
    pub fn new(scenario: impl Into<String>, seed: u64, n: Option<usize>, r: Option<usize>) -> Self {
        VerificationReport {
            scenario: scenario.into(),
            seed,
            n,
            r,
            measurements: Vec::new(),
            error: None,
            pass: true,
            wall_time_s: None,
        }
    }

    pub fn push(&mut self, m: Measurement) {
        self.pass &= m.pass;
        self.measurements.push(m);
    }

    /// Record the worst of a set of values as a single measurement.
    pub fn push_worst(&mut self, statement: &str, quantity: &str, values: &[f64], check: Check) {
        let worst = match check {
            Check::AtLeast(_) => values.iter().copied().fold(f64::INFINITY, f64::min),
            Check::AtMost(_) => values.iter().copied().fold(0.0, f64::max),
            Check::Within(lo, hi) => {
                let mid = 0.5 * (lo + hi);
                values.iter().copied().fold(mid, |acc, v| if (v - mid).abs() > (acc - mid).abs() { v } else { acc })
            }
        };
        let worst = if values.iter().any(|v| v.is_nan()) { f64::NAN } else { worst };
        self.push(Measurement::new(statement, quantity, worst, check));
    }

    pub fn fail_with(&mut self, e: &Error) {
        self.error = Some(e.to_string());
        self.pass = false;
    }

    /// Run `body`, recording its error (if any) and the elapsed time.
    pub fn run(mut self, body: impl FnOnce(&mut Self) -> Result<()>) -> Self {
        let start = Instant::now();
        if let Err(e) = body(&mut self) {
            self.fail_with(&e);
        }
        self.wall_time_s = Some(start.elapsed().as_secs_f64());
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Measurement> {
        self.measurements.iter().filter(|m| !m.pass)
    }
}

/// Independent seed for scenario `id` derived from the run seed, so results
/// do not depend on scheduling.
pub fn derive_seed(seed: u64, id: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng.next_u64()
}

/// A named unit of verification work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Particular { n: usize },
    Degeneration { n: usize, r: usize },
    Weyl { n: usize },
    Criterion(usize),
}

impl Task {
    /// Stable identifier used for seed derivation.
    fn id(&self) -> u64 {
        match *self {
            Task::Particular { n } => 100 + n as u64,
            Task::Degeneration { n, r } => 200 + 10 * n as u64 + r as u64,
            Task::Weyl { n } => 300 + n as u64,
            Task::Criterion(k) => 400 + k as u64,
        }
    }

    pub fn run(&self, seed: u64, tol: &Tolerances) -> VerificationReport {
        let s = derive_seed(seed, self.id());
        match *self {
            Task::Particular { n } => scenario_particular_solution(n, s, tol),
            Task::Degeneration { n, r } => scenario_degeneration(n, r, s, tol),
            Task::Weyl { n } => scenario_weyl(n, s, tol),
            Task::Criterion(k) => run_criterion(k, s, tol),
        }
    }
}

/// Scenario selection for [`run_tasks`].
pub fn particular_tasks(ns: &[usize]) -> Vec<Task> {
    ns.iter().map(|&n| Task::Particular { n }).collect()
}

pub fn degeneration_tasks(ns: &[usize], r: Option<usize>) -> Vec<Task> {
    ns.iter()
        .flat_map(|&n| {
            let rs: Vec<usize> = match r {
                Some(r) => vec![r],
                None => (1..=n + 1).collect(),
            };
            rs.into_iter().map(move |r| Task::Degeneration { n, r })
        })
        .collect()
}

pub fn weyl_tasks(ns: &[usize]) -> Vec<Task> {
    ns.iter().map(|&n| Task::Weyl { n }).collect()
}

pub fn criterion_tasks() -> Vec<Task> {
    (1..=CRITERIA.len()).map(Task::Criterion).collect()
}

/// Everything: scenarios for `n ≤ 4` (particular), `n ≤ 3` (degeneration,
/// Weyl), then the acceptance criteria.
pub fn all_tasks() -> Vec<Task> {
    let mut t = particular_tasks(&[1, 2, 3, 4]);
    t.extend(degeneration_tasks(&[1, 2, 3], None));
    t.extend(weyl_tasks(&[1, 2, 3]));
    t.extend(criterion_tasks());
    t
}

/// Run tasks on `jobs` threads (0 = all cores). Output order follows `tasks`
/// and every task draws from its own seed, so the reports do not depend on
/// `jobs`.
pub fn run_tasks(tasks: &[Task], seed: u64, tol: &Tolerances, jobs: usize) -> Result<Vec<VerificationReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(|t| t.run(seed, tol)).collect()))
}

/// Number of failed reports.
pub fn failure_count(reports: &[VerificationReport]) -> usize {
    reports.iter().filter(|r| !r.pass).count()
}

/// Drop wall times so two runs with equal seeds compare equal.
pub fn strip_timing(reports: &mut [VerificationReport]) {
    for r in reports {
        r.wall_time_s = None;
    }
}
