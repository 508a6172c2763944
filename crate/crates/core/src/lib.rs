//! Dynamical abelian quantum double models on the torus: exact operator
//! algebra, symmetry and holonomy checks, and two-particle sector spectra.

pub mod bound_states;
pub mod error;
pub mod exec;
pub mod group;
pub mod lattice;
pub mod linalg;
pub mod many_body;
pub mod sector_spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64;
