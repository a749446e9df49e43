//! Simulation and analysis of hybrid-entangled vector photons.
//!
//! One photon of a pair carries a plain polarization qubit; its partner
//! carries a spatially varying polarization pattern built from two orthogonal
//! transverse modes. This crate synthesizes such states, images them through
//! a triggered photon-counting camera model, reconstructs spatially resolved
//! polarization (Stokes) maps with singularity detection, and evaluates
//! entanglement criteria — witness, steering, and Bell-type — region by
//! region with full counting statistics.
//!
//! The high-level entry point is [`pipeline::run_pipeline`]; the `examples/`
//! directory walks each capability individually.

pub mod error;
pub mod grid;
pub mod modes;
pub mod pgm;
pub mod polarization;
pub mod imaging;
pub mod state;

pub use error::{Error, Result};
pub use grid::{GridSpec, PixelRect, Region, RegionGrid};
pub use modes::{default_waist, make_custom, make_hg, make_lg, mode_overlap, ComplexField};
pub use polarization::{rotate_axis, JonesVector, PauliAxis, PolarizationBasis};
pub use state::{
    build_state, conditional_field, joint_probability, joint_probability_map, local_concurrence,
    local_two_qubit, theoretical_correlation, theoretical_pauli_correlation, Arm,
    HybridBiphotonState, LocalTwoQubitState, VectorPhotonField,
};
