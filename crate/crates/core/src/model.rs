//! Physical constants, species presets and the scenario description.
//!
//! Every frequency is stored as an angular frequency (rad/s) and every angle
//! in radians. Ordinary-frequency inputs (Hz) are converted once, on ingest,
//! with [`hz`].

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts an ordinary frequency in Hz to rad/s.
#[inline]
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// ¹⁴N gyromagnetic ratio, Hz/T.
pub const GYRO_14N_HZ_PER_T: f64 = 3.077e6;
/// NV electron gyromagnetic ratio magnitude, Hz/T.
pub const GYRO_ELECTRON_HZ_PER_T: f64 = 28.024e9;
/// ¹⁴N nuclear quadrupole constant, Hz.
pub const QUADRUPOLE_14N_HZ: f64 = -4.945e6;
/// Axial ¹⁴N hyperfine constant, Hz.
pub const A_PARALLEL_14N_HZ: f64 = -2.14e6;
/// Transverse ¹⁴N hyperfine constant, Hz.
pub const A_PERP_14N_HZ: f64 = -2.62e6;
/// NV ground-state zero-field splitting, Hz.
pub const ZERO_FIELD_SPLITTING_HZ: f64 = 2.87e9;

/// Ratio |ω_α/ω_γ| used by the default operating point (θ = β close to π/2).
pub const DEFAULT_DRIVE_RATIO: f64 = 0.05;

/// A spin-1 species: gyromagnetic ratio and the I_z² splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSpecies {
    pub label: String,
    /// rad·s⁻¹·T⁻¹, signed.
    pub gyro_ratio: f64,
    /// rad/s, signed. Holds Q′ for nuclei or D for the electron.
    pub quad_split: f64,
}

impl SpinSpecies {
    pub fn new(label: impl Into<String>, gyro_ratio: f64, quad_split: f64) -> Result<Self> {
        if gyro_ratio == 0.0 || !gyro_ratio.is_finite() {
            return Err(Error::InvalidConfig("gyro_ratio must be finite and nonzero".into()));
        }
        if quad_split == 0.0 || !quad_split.is_finite() {
            return Err(Error::InvalidConfig("quad_split must be finite and nonzero".into()));
        }
        Ok(Self { label: label.into(), gyro_ratio, quad_split })
    }
}

/// Hyperfine and zero-field constants of the NV ground state (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineConstants {
    pub q: f64,
    pub a_parallel: f64,
    pub a_perp: f64,
    pub d: f64,
}

impl HyperfineConstants {
    pub fn nv14n() -> Self {
        Self {
            q: hz(QUADRUPOLE_14N_HZ),
            a_parallel: hz(A_PARALLEL_14N_HZ),
            a_perp: hz(A_PERP_14N_HZ),
            d: hz(ZERO_FIELD_SPLITTING_HZ),
        }
    }
}

/// Effective quadrupole splitting with the electron spin frozen in m_s = 0:
/// Q′ = Q + A⊥²/D.
pub fn derive_q_prime(h: &HyperfineConstants) -> Result<f64> {
    if h.d == 0.0 {
        return Err(Error::ZeroDivisor("zero-field splitting D"));
    }
    Ok(h.q + h.a_perp * h.a_perp / h.d)
}

/// Euler-angle drive: α = ω_α t, β fixed, γ = ω_γ t, plus the NV tilt θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    /// rad/s, signed.
    pub omega_alpha: f64,
    /// rad/s, signed and nonzero.
    pub omega_gamma: f64,
    pub beta: f64,
    pub theta: f64,
}

impl RotationParams {
    /// Period T = 2π/|ω_γ|.
    pub fn period(&self) -> f64 {
        TAU / self.omega_gamma.abs()
    }
}

/// ω′_α = ω_α − γ B: the lab field folded into the precession rate.
#[inline]
pub fn omega_alpha_eff(r: &RotationParams, b_lab: f64, gyro: f64) -> f64 {
    r.omega_alpha - gyro * b_lab
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetKind {
    Nv14n,
    Electron,
}

impl std::str::FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nv14n" | "14n" => Ok(Self::Nv14n),
            "electron" => Ok(Self::Electron),
            other => Err(Error::InvalidConfig(format!("unknown preset {other:?}"))),
        }
    }
}

/// Species and default drive for a preset.
///
/// Both presets use ω_γ = quad_split/2 (χ = 1) and θ = β = arccos(0.05),
/// which puts the drive at its critical ratio with |ω_α| = 0.05 |ω_γ|.
pub fn preset(kind: PresetKind) -> (SpinSpecies, RotationParams) {
    let species = match kind {
        PresetKind::Nv14n => {
            let q_prime = derive_q_prime(&HyperfineConstants::nv14n()).expect("literature D is nonzero");
            SpinSpecies { label: "14N".into(), gyro_ratio: hz(GYRO_14N_HZ_PER_T), quad_split: q_prime }
        }
        PresetKind::Electron => SpinSpecies {
            label: "NV electron".into(),
            gyro_ratio: hz(GYRO_ELECTRON_HZ_PER_T),
            quad_split: hz(ZERO_FIELD_SPLITTING_HZ),
        },
    };
    let angle = DEFAULT_DRIVE_RATIO.acos();
    let omega_gamma = species.quad_split / 2.0;
    // θ = β makes the critical ratio −cos θ.
    let omega_alpha = -angle.cos() * omega_gamma;
    let rotation = RotationParams { omega_alpha, omega_gamma, beta: angle, theta: angle };
    (species, rotation)
}

/// Everything needed to run one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub species: SpinSpecies,
    pub rotation: RotationParams,
    /// Lab-frame static field along z, tesla.
    pub b_lab: f64,
    pub steps_per_period: usize,
    /// T_m, seconds.
    pub measurement_time: f64,
    /// N, number of spins read out together.
    pub spin_count: u64,
    /// rad/s.
    pub gap_floor: f64,
    pub epsilon_threshold: f64,
    pub seed: u64,
}

pub const DEFAULT_STEPS_PER_PERIOD: usize = 20_000;
pub const DEFAULT_MEASUREMENT_TIME: f64 = 10e-3;
pub const DEFAULT_GAP_FLOOR_HZ: f64 = 1.0e3;
pub const DEFAULT_EPSILON_THRESHOLD: f64 = 0.1;

impl ScenarioConfig {
    pub fn new(species: SpinSpecies, rotation: RotationParams) -> Self {
        Self {
            species,
            rotation,
            b_lab: 0.0,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            measurement_time: DEFAULT_MEASUREMENT_TIME,
            spin_count: 1,
            gap_floor: hz(DEFAULT_GAP_FLOOR_HZ),
            epsilon_threshold: DEFAULT_EPSILON_THRESHOLD,
            seed: 0,
        }
    }

    pub fn from_preset(kind: PresetKind) -> Self {
        let (species, rotation) = preset(kind);
        Self::new(species, rotation)
    }

    pub fn period(&self) -> f64 {
        self.rotation.period()
    }

    /// ω′_α in rad/s.
    pub fn omega_alpha_eff(&self) -> f64 {
        omega_alpha_eff(&self.rotation, self.b_lab, self.species.gyro_ratio)
    }

    /// ω′_α/ω_γ.
    pub fn ratio(&self) -> f64 {
        self.omega_alpha_eff() / self.rotation.omega_gamma
    }

    /// χ = |Q′/2ω_γ|.
    pub fn chi(&self) -> f64 {
        (self.species.quad_split / (2.0 * self.rotation.omega_gamma)).abs()
    }

    /// Copy with ω_α chosen so that ω′_α/ω_γ equals `ratio`.
    pub fn with_ratio(&self, ratio: f64) -> Self {
        let mut s = self.clone();
        s.rotation.omega_alpha = ratio * self.rotation.omega_gamma + self.species.gyro_ratio * self.b_lab;
        s
    }

    pub fn with_angles(&self, theta: f64, beta: f64) -> Self {
        let mut s = self.clone();
        s.rotation.theta = theta;
        s.rotation.beta = beta;
        s
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        let mut s = self.clone();
        s.steps_per_period = steps;
        s
    }
}

/// Soft violations of the regime the model assumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioWarning {
    /// |γB| is not small against |ω_α|.
    FieldNotSmall { ratio: f64 },
    /// |ω_α| exceeds |Q′|.
    OmegaAlphaAboveSplitting { ratio: f64 },
    /// |ω_γ| exceeds |Q′|.
    OmegaGammaAboveSplitting { ratio: f64 },
}

impl fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FieldNotSmall { ratio } => {
                write!(f, "|gamma B| / |omega_alpha| = {ratio:.3} is not << 1")
            }
            Self::OmegaAlphaAboveSplitting { ratio } => {
                write!(f, "|omega_alpha| / |Q'| = {ratio:.3} exceeds 1")
            }
            Self::OmegaGammaAboveSplitting { ratio } => {
                write!(f, "|omega_gamma| / |Q'| = {ratio:.3} exceeds 1")
            }
        }
    }
}

/// Checks hard invariants (errors) and the model's validity regime (warnings).
pub fn validate_scenario(s: &ScenarioConfig) -> Result<Vec<ScenarioWarning>> {
    let r = &s.rotation;
    if r.omega_gamma == 0.0 || !r.omega_gamma.is_finite() {
        return Err(Error::InvalidConfig("omega_gamma must be finite and nonzero".into()));
    }
    for (name, v) in [("omega_alpha", r.omega_alpha), ("beta", r.beta), ("theta", r.theta), ("b_lab", s.b_lab)] {
        if !v.is_finite() {
            return Err(Error::InvalidConfig(format!("{name} must be finite")));
        }
    }
    if s.species.gyro_ratio == 0.0 || s.species.quad_split == 0.0 {
        return Err(Error::InvalidConfig("species constants must be nonzero".into()));
    }
    if s.steps_per_period < 100 {
        return Err(Error::InvalidConfig("steps_per_period must be at least 100".into()));
    }
    if !(s.measurement_time > 0.0) {
        return Err(Error::InvalidConfig("measurement_time must be positive".into()));
    }
    if s.spin_count < 1 {
        return Err(Error::InvalidConfig("spin_count must be at least 1".into()));
    }
    if !(s.gap_floor > 0.0) {
        return Err(Error::InvalidConfig("gap_floor must be positive".into()));
    }
    if !(s.epsilon_threshold > 0.0) {
        return Err(Error::InvalidConfig("epsilon_threshold must be positive".into()));
    }

    let mut warnings = Vec::new();
    let zeeman = (s.species.gyro_ratio * s.b_lab).abs();
    if zeeman > 0.0 {
        let ratio = zeeman / r.omega_alpha.abs();
        if ratio >= 0.1 {
            warnings.push(ScenarioWarning::FieldNotSmall { ratio });
        }
    }
    let split = s.species.quad_split.abs();
    let a = r.omega_alpha.abs() / split;
    if a > 1.0 {
        warnings.push(ScenarioWarning::OmegaAlphaAboveSplitting { ratio: a });
    }
    let g = r.omega_gamma.abs() / split;
    if g > 1.0 {
        warnings.push(ScenarioWarning::OmegaGammaAboveSplitting { ratio: g });
    }
    Ok(warnings)
}
