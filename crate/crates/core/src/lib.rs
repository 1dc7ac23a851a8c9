//! Exterior and Clifford algebra on R^7 and R^8, G2 / Spin(7) splittings of
//! 2-forms, model heat kernels, Chern–Weil residue densities and flat-torus
//! spectral asymmetry.

pub mod clifford;
pub mod error;
pub mod exterior;
pub mod holonomy;
pub mod io;
pub mod linalg;
pub mod model_heat;
pub mod residue;
pub mod scalar;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
