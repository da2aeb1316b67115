//! Linearized tachyonic scalar field on a periodic lattice: exact mode
//! evolution, position-space Green functions, wavepacket diagnostics and
//! Gaussian quantum states.

pub mod bessel;
pub mod dd;
pub mod error;
pub mod green;
pub mod lattice;
pub mod quantum;
pub mod scalar;
pub mod wavepacket;

pub use dd::DoubleDouble;
pub use error::{LabError, Result};
pub use lattice::{
    build_lattice, classify_modes, default_critical_tolerance, evolve_modes, from_modes, quadratic_energy,
    to_modes, DispersionTable, FieldState, LatticeSpec, ModeClass, ModeState,
};
pub use scalar::Real;
