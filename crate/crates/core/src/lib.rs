//! Rotation-induced Berry phase of a spin-1 in a levitated, 3D-rotating
//! diamond, and the DC magnetometer built on it.
//!
//! The pipeline runs bottom-up:
//!
//! * [`model`]: species constants, drive parameters and the scenario.
//! * [`rotoframe`]: effective body-frame fields and the resonance test.
//! * [`spinham`]: the 3×3 Hamiltonian, eigensolver and branch tracking.
//! * [`phases`]: dynamic and geometric phases over one period.
//! * [`adiabatic`]: adiabaticity diagnostics.
//! * [`dynamics`]: exact propagation, Ramsey readout and shot noise.
//! * [`sensing`]: phase slope, sensitivity, sweeps and optimisation.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod phases;
pub mod rotoframe;
pub mod sensing;
pub mod spinham;

pub use error::{Error, Result};
pub use model::{
    derive_q_prime, hz, omega_alpha_eff, preset, validate_scenario, HyperfineConstants, PresetKind, RotationParams,
    ScenarioConfig, ScenarioWarning, SpinSpecies,
};

pub use rotoframe::{critical_ratio, effective_field, resonance_condition, BodyFieldSample, ResonanceVerdict};

pub use phases::{BlochPoint, PhaseLedger};
pub use sensing::SensitivityPoint;
pub use spinham::{EigenFrame, HamiltonianSample, Trajectory};
