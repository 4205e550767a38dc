//! Coupled Painlevé VI hierarchy: parameter algebra, hypergeometric series,
//! Fuchsian and confluent linear systems with their fundamental solutions at
//! `t = 0`, the Hamiltonian flows and their degenerations, and the affine Weyl
//! group action.

pub mod dynamics;
pub mod error;
pub mod hyperfn;
pub mod io;
pub mod linear;
pub mod matrix;
pub mod params;
pub mod scalar;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use hyperfn::{HGSpec, SeriesValue};
pub use linear::{LinearSystem, SeriesSolution, SystemKind};
pub use matrix::Matrix;
pub use params::{Kind, ParameterSet};
pub use scalar::{Field, C64};
