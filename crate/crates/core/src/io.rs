//! File formats: JSON for parameter sets, states and linear systems; CSV for
//! trajectories and plot data.
//!
//! Complex numbers in JSON are written as a bare number when real and as
//! `[re, im]` otherwise; both forms are accepted on input.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{PhasePoint, Representation, Trajectory};
use crate::error::{Error, Result};
use crate::linear::{LinearSystem, SystemKind};
use crate::params::{Kind, ParameterSet};
use crate::scalar::C64;

/// JSON form of a complex number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        if z.im == 0.0 {
            ComplexJson::Real(z.re)
        } else {
            ComplexJson::Pair([z.re, z.im])
        }
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        match z {
            ComplexJson::Real(r) => C64::new(r, 0.0),
            ComplexJson::Pair([r, i]) => C64::new(r, i),
        }
    }
}

fn to_json_vec(v: &[C64]) -> Vec<ComplexJson> {
    v.iter().map(|z| (*z).into()).collect()
}

fn from_json_vec(v: &[ComplexJson]) -> Vec<C64> {
    v.iter().map(|z| (*z).into()).collect()
}

/// `{"n", "alpha", "eta", "kind"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub n: usize,
    pub alpha: Vec<ComplexJson>,
    #[serde(default = "zero")]
    pub eta: ComplexJson,
    #[serde(default = "generic")]
    pub kind: Kind,
}

fn zero() -> ComplexJson {
    ComplexJson::Real(0.0)
}

fn generic() -> Kind {
    Kind::Generic
}

impl From<&ParameterSet> for ParamsJson {
    fn from(p: &ParameterSet) -> Self {
        ParamsJson { n: p.n(), alpha: to_json_vec(p.alphas()), eta: (*p.eta()).into(), kind: p.kind() }
    }
}

impl TryFrom<ParamsJson> for ParameterSet {
    type Error = Error;

    fn try_from(j: ParamsJson) -> Result<Self> {
        ParameterSet::new(j.n, from_json_vec(&j.alpha), j.eta.into(), j.kind)
    }
}

pub fn params_to_json(p: &ParameterSet) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ParamsJson::from(p))?)
}

pub fn params_from_json(s: &str) -> Result<ParameterSet> {
    serde_json::from_str::<ParamsJson>(s)?.try_into()
}

/// `{"t", "x", "y"}` for symmetric states, `{"t", "q", "p"}` for canonical ones.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<ComplexJson>>,
}

impl From<&PhasePoint> for StateJson {
    fn from(pt: &PhasePoint) -> Self {
        let (c, m) = (Some(to_json_vec(pt.coords())), Some(to_json_vec(pt.momenta())));
        match pt.representation {
            Representation::Symmetric => StateJson { t: pt.t, x: c, y: m, ..Default::default() },
            Representation::Canonical => StateJson { t: pt.t, q: c, p: m, ..Default::default() },
        }
    }
}

impl TryFrom<StateJson> for PhasePoint {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self> {
        let pair = |a: Option<Vec<ComplexJson>>, b: Option<Vec<ComplexJson>>| -> Result<Option<(Vec<C64>, Vec<C64>)>> {
            match (a, b) {
                (Some(a), Some(b)) if a.len() == b.len() => Ok(Some((from_json_vec(&a), from_json_vec(&b)))),
                (Some(_), Some(_)) => Err(Error::Dimension("coordinate and momentum lengths differ".into())),
                (None, None) => Ok(None),
                _ => Err(Error::Dimension("state needs both coordinates and momenta".into())),
            }
        };
        match (pair(j.x, j.y)?, pair(j.q, j.p)?) {
            (Some((x, y)), None) => Ok(PhasePoint::symmetric(j.t, &x, &y)),
            (None, Some((q, p))) => Ok(PhasePoint::canonical(j.t, &q, &p)),
            _ => Err(Error::Dimension("state must give exactly one of (x, y) or (q, p)".into())),
        }
    }
}

pub fn state_to_json(pt: &PhasePoint) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateJson::from(pt))?)
}

pub fn state_from_json(s: &str) -> Result<PhasePoint> {
    serde_json::from_str::<StateJson>(s)?.try_into()
}

/// `{"n", "kind", "a0", "a1", "params"}` with matrices as lists of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: usize,
    pub kind: SystemKind,
    pub a0: Vec<Vec<ComplexJson>>,
    pub a1: Vec<Vec<ComplexJson>>,
    pub params: ParamsJson,
}

impl From<&LinearSystem> for SystemJson {
    fn from(s: &LinearSystem) -> Self {
        let rows = |m: &crate::matrix::Matrix<C64>| m.to_rows().iter().map(|r| to_json_vec(r)).collect();
        SystemJson { n: s.n, kind: s.kind, a0: rows(&s.a0), a1: rows(&s.a1), params: (&s.params).into() }
    }
}

pub fn system_to_json(s: &LinearSystem) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SystemJson::from(s))?)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

pub fn read_params(path: &Path) -> Result<ParameterSet> {
    params_from_json(&read_to_string(path)?)
}

pub fn read_state(path: &Path) -> Result<PhasePoint> {
    state_from_json(&read_to_string(path)?)
}

/// Column names `t, re_<v>, im_<v>, …` for the given variable names.
pub fn trajectory_header(names: &[String]) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain(names.iter().flat_map(|v| [format!("re_{v}"), format!("im_{v}")]))
        .collect()
}

/// Variable names of a state with `dof` coordinates.
pub fn variable_names(representation: Representation, dof: usize) -> Vec<String> {
    let (c, m, first) = match representation {
        Representation::Symmetric => ("x", "y", 0),
        Representation::Canonical => ("q", "p", 1),
    };
    (0..dof).map(|i| format!("{c}{}", i + first)).chain((0..dof).map(|i| format!("{m}{}", i + first))).collect()
}

/// Write a trajectory as CSV with a header row.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, names: &[String], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(trajectory_header(names))?;
    for (t, z) in traj.times.iter().zip(&traj.states) {
        if z.len() != names.len() {
            return Err(Error::Dimension(format!("state has {} entries, {} names", z.len(), names.len())));
        }
        let row: Vec<String> =
            std::iter::once(t.to_string()).chain(z.iter().flat_map(|v| [v.re.to_string(), v.im.to_string()])).collect();
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Read back the `(t, state)` rows written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<f64>, Vec<Vec<C64>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("t") || header.len() % 2 == 0 {
        return Err(Error::Dimension("trajectory CSV must start with t followed by re/im pairs".into()));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidParameters(format!("bad number '{s}': {e}"))))
            .collect::<Result<_>>()?;
        times.push(vals[0]);
        states.push(vals[1..].chunks(2).map(|c| C64::new(c[0], c[1])).collect());
    }
    Ok((header, times, states))
}

/// Write rows of real numbers under a header.
pub fn write_table_csv<W: Write>(header: &[&str], rows: &[Vec<f64>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, HamiltonianSystem, IntegratorOptions, SystemId};
    use crate::linear::build_fuchsian;
    use crate::scalar::re;

    #[test]
    fn params_round_trip() {
        let p = ParameterSet::sample_generic(2, 4).unwrap().with_eta(C64::new(0.1, -0.2));
        let back = params_from_json(&params_to_json(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let d = ParameterSet::sample_degenerate(2, 2, 4).unwrap();
        let s = params_to_json(&d).unwrap();
        assert!(s.contains("\"degenerate\": 2"));
        assert_eq!(params_from_json(&s).unwrap(), d);
    }

    #[test]
    fn params_schema() {
        let p = params_from_json(r#"{"n": 1, "alpha": [0.1, [0.2, 0.0], 0.3, 0.4], "eta": 0.5, "kind": "generic"}"#)
            .unwrap();
        assert_eq!(p.alphas()[1], re(0.2));
        assert_eq!(*p.eta(), re(0.5));
        let d = params_from_json(r#"{"n": 1, "alpha": [0, 0.6, 0, 0.4], "kind": {"degenerate": 2}}"#).unwrap();
        assert_eq!(d.level(), 2);
        assert!(params_from_json(r#"{"n": 1, "alpha": [0.1, 0.2, 0.3, 0.5]}"#).is_err());
    }

    #[test]
    fn state_round_trip() {
        let s = PhasePoint::symmetric(0.3, &[re(1.0), C64::new(0.5, 0.25)], &[re(-1.0), re(2.0)]);
        assert_eq!(state_from_json(&state_to_json(&s).unwrap()).unwrap(), s);
        let c = PhasePoint::canonical(0.3, &[re(1.0)], &[re(2.0)]);
        assert_eq!(state_from_json(&state_to_json(&c).unwrap()).unwrap(), c);
        assert!(state_from_json(r#"{"t": 0.1, "x": [1.0]}"#).is_err());
        assert!(state_from_json(r#"{"t": 0.1, "x": [1.0], "y": [1.0], "q": [1.0], "p": [2.0]}"#).is_err());
    }

    #[test]
    fn system_json_has_matrices() {
        let sys = build_fuchsian(&ParameterSet::sample_generic(1, 1).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&system_to_json(&sys).unwrap()).unwrap();
        assert_eq!(v["kind"], "fuchsian");
        assert_eq!(v["a0"].as_array().unwrap().len(), 2);
        assert_eq!(v["a1"][0].as_array().unwrap().len(), 2);
    }

    #[test]
    fn trajectory_csv_round_trip_is_exact() {
        let p = ParameterSet::sample_generic(1, 2).unwrap();
        let sys = HamiltonianSystem::new(SystemId::Symmetric, p).unwrap();
        let z0 = vec![re(0.3), re(0.7), re(0.1), C64::new(-0.2, 0.05)];
        let ts = crate::dynamics::linspace(0.1, 0.4, 13);
        let tr = integrate(|t, z| sys.field(t, z), 0.1, &z0, 0.4, &ts, &IntegratorOptions::default()).unwrap();
        let names = variable_names(Representation::Symmetric, 2);
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &names, &mut buf).unwrap();
        let (header, times, states) = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(header, trajectory_header(&names));
        assert_eq!(header[1], "re_x0");
        assert_eq!(times, tr.times);
        assert_eq!(states, tr.states);
    }

    proptest::proptest! {
        #[test]
        fn params_json_is_exact(a in proptest::collection::vec(-1e3f64..1e3, 3), im in -1.0f64..1.0, eta in -5.0f64..5.0) {
            let mut alpha: Vec<C64> = a.iter().map(|&v| re(v)).collect();
            alpha[0].im = im;
            alpha.push(re(1.0) - alpha.iter().sum::<C64>());
            let p = ParameterSet::new(1, alpha, re(eta), Kind::Generic).unwrap();
            let q = params_from_json(&params_to_json(&p).unwrap()).unwrap();
            proptest::prop_assert_eq!(p, q);
        }
    }
}
