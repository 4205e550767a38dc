//! Hamiltonian flows of the hierarchy: the coupled sixth Painlevé system, its
//! symmetric form, the degenerate systems and their canonical forms for small
//! rank, the rank-one Riccati reduction, and an adaptive integrator.

mod classical;
mod hamiltonians;
mod integrate;
mod maps;

pub use classical::*;
pub use hamiltonians::Canonical;
pub use integrate::*;
pub use maps::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::norm_inf;
use crate::params::{Kind, ParameterSet};
use crate::scalar::{re, C64};

/// Which Hamiltonian flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemId {
    /// `(q_i, p_i)`, `i = 1..n`, singular at `t = 0, 1`.
    CoupledP6,
    /// `(x_i, y_i)`, `i = 0..n`, singular at `t = 0, 1`.
    Symmetric,
    /// `(x_i, y_i)` of the level-`r` degenerate system, singular at `t = 0`.
    Degenerate,
    /// Canonical form of a degenerate system, in its own time.
    CanonicalForm(Canonical),
}

/// Whether a state is stored as `(q, p)` or `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Canonical,
    Symmetric,
}

/// A state at time `t`; `z` holds the coordinates followed by the momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub representation: Representation,
    pub z: Vec<C64>,
}

impl PhasePoint {
    pub fn symmetric(t: f64, x: &[C64], y: &[C64]) -> Self {
        PhasePoint { t, representation: Representation::Symmetric, z: x.iter().chain(y).copied().collect() }
    }

    pub fn canonical(t: f64, q: &[C64], p: &[C64]) -> Self {
        PhasePoint { t, representation: Representation::Canonical, z: q.iter().chain(p).copied().collect() }
    }

    pub fn coords(&self) -> &[C64] {
        &self.z[..self.z.len() / 2]
    }

    pub fn momenta(&self) -> &[C64] {
        &self.z[self.z.len() / 2..]
    }

    /// `|Σ x_i y_i + η|` for symmetric states.
    pub fn constraint_defect(&self, eta: C64) -> f64 {
        let s: C64 = self.coords().iter().zip(self.momenta()).map(|(a, b)| a * b).sum();
        (s + eta).norm()
    }
}

/// A Hamiltonian flow with fixed parameters.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    pub id: SystemId,
    pub params: ParameterSet,
}

impl HamiltonianSystem {
    pub fn new(id: SystemId, params: ParameterSet) -> Result<Self> {
        let n = params.n();
        match id {
            SystemId::CoupledP6 | SystemId::Symmetric => {
                if params.kind() != Kind::Generic {
                    return Err(Error::InvalidParameters(format!("{id:?} needs generic parameters")));
                }
            }
            SystemId::Degenerate => {
                if params.level() == 0 {
                    return Err(Error::InvalidParameters("degenerate system needs Degenerate(r)".into()));
                }
            }
            SystemId::CanonicalForm(which) => {
                let (need_n, need_r, _) = maps::canonical_source(which);
                if n != need_n || params.level() != need_r {
                    return Err(Error::InvalidParameters(format!(
                        "{which:?} needs n = {need_n} and Degenerate({need_r})"
                    )));
                }
            }
        }
        Ok(HamiltonianSystem { id, params })
    }

    /// No kind check; used for pre-limit parameter sets.
    pub(crate) fn new_unchecked(id: SystemId, params: ParameterSet) -> Self {
        HamiltonianSystem { id, params }
    }

    /// Number of coordinate (and of momentum) variables.
    pub fn dof(&self) -> usize {
        match self.id {
            SystemId::CoupledP6 | SystemId::CanonicalForm(_) => self.params.n(),
            SystemId::Symmetric | SystemId::Degenerate => self.params.n() + 1,
        }
    }

    pub fn representation(&self) -> Representation {
        match self.id {
            SystemId::CoupledP6 | SystemId::CanonicalForm(_) => Representation::Canonical,
            SystemId::Symmetric | SystemId::Degenerate => Representation::Symmetric,
        }
    }

    pub fn is_singular(&self, t: f64) -> bool {
        match self.id {
            SystemId::CoupledP6 | SystemId::Symmetric => t == 0.0 || t == 1.0,
            SystemId::Degenerate | SystemId::CanonicalForm(_) => t == 0.0,
        }
    }

    fn evaluate(&self, t: f64, z: &[C64]) -> Result<hamiltonians::Eval> {
        if self.is_singular(t) {
            return Err(Error::SingularTime { t });
        }
        let d = self.dof();
        if z.len() != 2 * d {
            return Err(Error::Dimension(format!("state has {} entries, expected {}", z.len(), 2 * d)));
        }
        let (c, m) = z.split_at(d);
        let p = &self.params;
        Ok(match self.id {
            SystemId::CoupledP6 => hamiltonians::coupled_p6(p, t, c, m),
            SystemId::Symmetric => hamiltonians::symmetric(p, t, c, m),
            SystemId::Degenerate => hamiltonians::degenerate(p, p.level(), t, c, m),
            SystemId::CanonicalForm(which) => hamiltonians::canonical(which, p, t, c, m),
        })
    }

    /// The Hamiltonian `K(t, z)` whose canonical field is the flow.
    pub fn value(&self, t: f64, z: &[C64]) -> Result<C64> {
        Ok(self.evaluate(t, z)?.value)
    }

    /// `(∂K/∂coords, ∂K/∂momenta)` from the closed-form derivatives.
    pub fn gradient(&self, t: f64, z: &[C64]) -> Result<Vec<C64>> {
        let e = self.evaluate(t, z)?;
        Ok(e.d_coord.into_iter().chain(e.d_mom).collect())
    }

    /// `(∂K/∂momenta, -∂K/∂coords)`.
    pub fn field(&self, t: f64, z: &[C64]) -> Result<Vec<C64>> {
        let e = self.evaluate(t, z)?;
        Ok(e.d_mom.into_iter().chain(e.d_coord.into_iter().map(|v| -v)).collect())
    }

    /// `tH` of a canonical system at its own time `tau`.
    pub fn canonical_th(&self, tau: f64, z: &[C64]) -> Result<C64> {
        match self.id {
            SystemId::CanonicalForm(which) => {
                let d = self.dof();
                Ok(hamiltonians::canonical_th(which, &self.params, tau, &z[..d], &z[d..]).value)
            }
            _ => Err(Error::InvalidParameters("tH is only exposed for the canonical systems".into())),
        }
    }
}

/// Central finite-difference gradient of `K` with step `h` per coordinate.
pub fn finite_difference_gradient(sys: &HamiltonianSystem, t: f64, z: &[C64], h: f64) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(z.len());
    let mut w = z.to_vec();
    for i in 0..z.len() {
        let base = w[i];
        w[i] = base + re(h);
        let plus = sys.value(t, &w)?;
        w[i] = base - re(h);
        let minus = sys.value(t, &w)?;
        w[i] = base;
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// `|∇K_fd - ∇K| / |∇K|` (infinity norms).
pub fn gradient_error(sys: &HamiltonianSystem, t: f64, z: &[C64]) -> Result<f64> {
    let an = sys.gradient(t, z)?;
    let fd = finite_difference_gradient(sys, t, z, 1e-5)?;
    let diff: Vec<C64> = an.iter().zip(&fd).map(|(a, b)| a - b).collect();
    Ok(norm_inf(&diff) / norm_inf(&an).max(f64::MIN_POSITIVE))
}

/// Random state with entries in `(-1, 1)` and time in `(0.1, 0.9)`.
pub fn random_point(sys: &HamiltonianSystem, rng: &mut ChaCha8Rng) -> (f64, Vec<C64>) {
    let t = rng.gen_range(0.1..0.9);
    let z = (0..2 * sys.dof()).map(|_| re(rng.gen_range(-1.0..1.0))).collect();
    (t, z)
}

/// Worst gradient error over `points` random points.
pub fn check_gradients(sys: &HamiltonianSystem, points: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let (t, z) = random_point(sys, &mut rng);
        worst = worst.max(gradient_error(sys, t, &z)?);
    }
    Ok(worst)
}
