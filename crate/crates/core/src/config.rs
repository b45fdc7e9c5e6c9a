//! Scenario documents as written by people: frequencies in Hz, angles with
//! optional unit suffixes, everything but the species optional.
//!
//! ```json
//! {
//!   "species": "nv14n",
//!   "rotation": {"omega_gamma_hz": 2.5e6, "theta": "87.1deg", "beta": "87.1deg"},
//!   "b_lab_tesla": 1e-3,
//!   "steps_per_period": 20000,
//!   "measurement_time_s": 0.01,
//!   "spin_count": 1,
//!   "seed": 42
//! }
//! ```
//!
//! Missing rotation fields default to ω_γ = Q′/2 (χ = 1), θ = β = acos(0.05)
//! and the critical drive for the chosen angles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    hz, preset, validate_scenario, PresetKind, RotationParams, ScenarioConfig, ScenarioWarning, SpinSpecies,
    DEFAULT_DRIVE_RATIO,
};
use crate::rotoframe::critical_ratio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeciesSpec {
    Preset(String),
    Custom { label: String, gyro_ratio_hz_per_t: f64, quad_split_hz: f64 },
}

/// An angle as a bare number or a string with a `deg`/`rad` suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Number(f64),
    Text(String),
}

impl AngleSpec {
    pub fn radians(&self, degrees_default: bool) -> Result<f64> {
        match self {
            AngleSpec::Number(x) => Ok(if degrees_default { x.to_radians() } else { *x }),
            AngleSpec::Text(s) => parse_angle(s, degrees_default),
        }
    }
}

/// Parses "1.2", "1.2rad", "87deg", "87°". Bare numbers are radians unless
/// `degrees_default` is set.
pub fn parse_angle(text: &str, degrees_default: bool) -> Result<f64> {
    let t = text.trim();
    let (num, deg) = if let Some(v) = t.strip_suffix("deg") {
        (v, true)
    } else if let Some(v) = t.strip_suffix('°') {
        (v, true)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, false)
    } else {
        (t, degrees_default)
    };
    let x: f64 = num.trim().parse().map_err(|_| Error::InvalidConfig(format!("cannot read angle {text:?}")))?;
    if !x.is_finite() {
        return Err(Error::InvalidConfig(format!("angle {text:?} is not finite")));
    }
    Ok(if deg { x.to_radians() } else { x })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub omega_alpha_hz: Option<f64>,
    pub omega_gamma_hz: Option<f64>,
    pub beta: Option<AngleSpec>,
    pub theta: Option<AngleSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub species: Option<SpeciesSpec>,
    pub rotation: Option<RotationSpec>,
    pub b_lab_tesla: Option<f64>,
    pub steps_per_period: Option<usize>,
    pub measurement_time_s: Option<f64>,
    pub spin_count: Option<u64>,
    pub gap_floor_hz: Option<f64>,
    pub epsilon_threshold: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Scenario in internal units plus any soft-range warnings.
    pub fn resolve(&self, degrees_default: bool) -> Result<(ScenarioConfig, Vec<ScenarioWarning>)> {
        let species = match &self.species {
            None => preset(PresetKind::Nv14n).0,
            Some(SpeciesSpec::Preset(name)) => {
                let kind: PresetKind = name.parse()?;
                preset(kind).0
            }
            Some(SpeciesSpec::Custom { label, gyro_ratio_hz_per_t, quad_split_hz }) => {
                SpinSpecies::new(label.clone(), hz(*gyro_ratio_hz_per_t), hz(*quad_split_hz))?
            }
        };
        let rot = self.rotation.clone().unwrap_or_default();
        let default_angle = DEFAULT_DRIVE_RATIO.acos();
        let theta = rot.theta.as_ref().map(|a| a.radians(degrees_default)).transpose()?.unwrap_or(default_angle);
        let beta = rot.beta.as_ref().map(|a| a.radians(degrees_default)).transpose()?.unwrap_or(default_angle);
        let omega_gamma = rot.omega_gamma_hz.map(hz).unwrap_or(species.quad_split / 2.0);
        if omega_gamma == 0.0 || !omega_gamma.is_finite() {
            return Err(Error::InvalidConfig("omega_gamma must be finite and nonzero".into()));
        }

        let mut s = ScenarioConfig::new(species, RotationParams { omega_alpha: 0.0, omega_gamma, beta, theta });
        if let Some(b) = self.b_lab_tesla {
            s.b_lab = b;
        }
        s.rotation.omega_alpha = match rot.omega_alpha_hz {
            Some(f) => hz(f),
            None => {
                let r = critical_ratio(theta, beta).map_err(|_| {
                    Error::InvalidConfig(
                        "no critical drive for these angles (cos(beta - theta) = 0); set rotation.omega_alpha_hz"
                            .into(),
                    )
                })?;
                s.with_ratio(r).rotation.omega_alpha
            }
        };
        if let Some(n) = self.steps_per_period {
            s.steps_per_period = n;
        }
        if let Some(t) = self.measurement_time_s {
            s.measurement_time = t;
        }
        if let Some(n) = self.spin_count {
            s.spin_count = n;
        }
        if let Some(g) = self.gap_floor_hz {
            s.gap_floor = hz(g);
        }
        if let Some(e) = self.epsilon_threshold {
            s.epsilon_threshold = e;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        let warnings = validate_scenario(&s)?;
        Ok((s, warnings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GYRO_14N_HZ_PER_T;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn angles() {
        assert_eq!(parse_angle("1.25", false).unwrap(), 1.25);
        assert_eq!(parse_angle("1.25rad", true).unwrap(), 1.25);
        assert_eq!(parse_angle("90deg", false).unwrap(), FRAC_PI_2);
        assert_eq!(parse_angle(" 90 ° ", false).unwrap(), FRAC_PI_2);
        assert_eq!(parse_angle("90", true).unwrap(), FRAC_PI_2);
        assert!(parse_angle("ninety", false).is_err());
        assert!(parse_angle("inf", false).is_err());
    }

    #[test]
    fn empty_document_is_the_preset() {
        let (s, _) = ConfigDocument::default().resolve(false).unwrap();
        let p = ScenarioConfig::from_preset(PresetKind::Nv14n);
        assert_eq!(s.species, p.species);
        assert_eq!(s.rotation.theta, p.rotation.theta);
        assert!((s.ratio() - p.ratio()).abs() < 1e-15);
    }

    #[test]
    fn hz_are_converted() {
        let doc = ConfigDocument::from_json(
            r#"{"species": {"label": "x", "gyro_ratio_hz_per_t": 3.077e6, "quad_split_hz": -4.9e6},
                "rotation": {"omega_alpha_hz": 1e5, "omega_gamma_hz": 2.5e6, "theta": "30deg", "beta": 0.2},
                "gap_floor_hz": 10.0, "seed": 9}"#,
        )
        .unwrap();
        let (s, _) = doc.resolve(false).unwrap();
        assert_eq!(s.species.gyro_ratio, TAU * GYRO_14N_HZ_PER_T);
        assert_eq!(s.rotation.omega_alpha, TAU * 1e5);
        assert_eq!(s.rotation.omega_gamma, TAU * 2.5e6);
        assert_eq!(s.rotation.theta, 30f64.to_radians());
        assert_eq!(s.rotation.beta, 0.2);
        assert_eq!(s.gap_floor, TAU * 10.0);
        assert_eq!(s.seed, 9);
    }

    #[test]
    fn default_drive_is_critical() {
        let doc =
            ConfigDocument::from_json(r#"{"rotation": {"theta": 1.0, "beta": 1.2}, "b_lab_tesla": 2e-3}"#).unwrap();
        let (s, _) = doc.resolve(false).unwrap();
        assert!((s.ratio() - critical_ratio(1.0, 1.2).unwrap()).abs() < 1e-12);
        let bad = ConfigDocument::from_json(r#"{"rotation": {"theta": 0.0, "beta": "90deg"}}"#).unwrap();
        assert!(bad.resolve(false).is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_presets() {
        assert!(ConfigDocument::from_json(r#"{"spin_cout": 3}"#).is_err());
        let doc = ConfigDocument::from_json(r#"{"species": "muon"}"#).unwrap();
        assert!(doc.resolve(false).is_err());
        let doc = ConfigDocument::from_json(r#"{"species": "electron"}"#).unwrap();
        assert_eq!(doc.resolve(false).unwrap().0.species.label, preset(PresetKind::Electron).0.label);
    }

    #[test]
    fn warns_on_large_field() {
        let doc = ConfigDocument::from_json(
            r#"{"b_lab_tesla": 0.02, "rotation": {"omega_alpha_hz": 123076.0, "theta": 1.0, "beta": 1.2}}"#,
        )
        .unwrap();
        let (_, w) = doc.resolve(false).unwrap();
        assert!(w.iter().any(|w| matches!(w, ScenarioWarning::FieldNotSmall { .. })));
    }
}
