//! Adiabaticity diagnostics.
//!
//! ε_mn(t) = |⟨λ_m|Ḣ|λ_n⟩| / (λ_n − λ_m)² sampled along the tracked
//! trajectory is the authoritative check. A closed form valid at the critical
//! drive is provided alongside; its ζ is a caller-supplied input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sandwich;
use crate::model::ScenarioConfig;
use crate::spinham::{hamiltonian_at_fraction, trajectory, Trajectory, PAIRS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    /// Branch pairs, in the order of `eps_max` and `argmax_time`.
    pub pairs: [(usize, usize); 3],
    pub eps_max: [f64; 3],
    pub argmax_time: [f64; 3],
    /// max over pairs of `eps_max` below the scenario threshold.
    pub feasible: bool,
    pub threshold: f64,
    /// |Q′/2ω_γ|.
    pub chi: f64,
}

impl AdiabaticityReport {
    pub fn overall_max(&self) -> f64 {
        self.eps_max.iter().copied().fold(0.0, f64::max)
    }

    pub fn feasible_at(&self, threshold: f64) -> bool {
        self.overall_max() < threshold
    }
}

/// ε for every grid time, one entry per pair in [`PAIRS`] order.
pub fn epsilon_samples(s: &ScenarioConfig, traj: &Trajectory) -> Result<Vec<[f64; 3]>> {
    traj.frames
        .iter()
        .zip(&traj.fractions)
        .map(|(f, &x)| {
            let hdot = hamiltonian_at_fraction(s, x).hdot;
            let mut out = [0.0; 3];
            for (p, &(m, n)) in PAIRS.iter().enumerate() {
                let gap = f.branch_value(n) - f.branch_value(m);
                if gap.abs() < s.gap_floor || gap == 0.0 {
                    return Err(Error::DegenerateGap { t: f.t, pair: (m, n) });
                }
                let coupling = sandwich(f.branch_vector(m), &hdot, f.branch_vector(n)).norm();
                out[p] = coupling / (gap * gap);
            }
            Ok(out)
        })
        .collect()
}

pub fn report_from_trajectory(s: &ScenarioConfig, traj: &Trajectory) -> Result<AdiabaticityReport> {
    let samples = epsilon_samples(s, traj)?;
    let mut eps_max = [0.0; 3];
    let mut argmax_time = [0.0; 3];
    for (row, f) in samples.iter().zip(&traj.frames) {
        for p in 0..3 {
            if row[p] > eps_max[p] {
                eps_max[p] = row[p];
                argmax_time[p] = f.t;
            }
        }
    }
    let worst = eps_max.iter().copied().fold(0.0, f64::max);
    Ok(AdiabaticityReport {
        pairs: PAIRS,
        eps_max,
        argmax_time,
        feasible: worst < s.epsilon_threshold,
        threshold: s.epsilon_threshold,
        chi: s.chi(),
    })
}

/// Maximal ε per pair over one period.
pub fn epsilon_profile(s: &ScenarioConfig) -> Result<AdiabaticityReport> {
    let traj = trajectory(s)?;
    report_from_trajectory(s, &traj)
}

/// Closed-form ε for the near-degenerate pair at the critical drive.
pub fn epsilon_critical_closed_form(beta: f64, theta: f64, chi: f64, zeta: f64) -> Result<f64> {
    if !(chi.is_finite() && zeta.is_finite()) || chi < 0.0 {
        return Err(Error::InvalidArgument(format!("chi = {chi}, zeta = {zeta}")));
    }
    let c = (beta - theta).cos();
    if c.abs() < 1e-12 {
        return Err(Error::SingularGeometry { cos: c });
    }
    if zeta == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let r = chi.hypot(zeta);
    let d = r - chi;
    if !(d > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let num = beta.sin() * theta.cos() / c;
    Ok((num / (2.0 * r * d.powi(3)).sqrt()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PresetKind;
    use crate::rotoframe::critical_ratio;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn scenario(theta: f64, beta: f64, ratio: f64, steps: usize) -> ScenarioConfig {
        ScenarioConfig::from_preset(PresetKind::Nv14n).with_angles(theta, beta).with_ratio(ratio).with_steps(steps)
    }

    #[test]
    fn static_field_is_perfectly_adiabatic() {
        let r = epsilon_profile(&scenario(0.7, 0.0, -0.5, 400)).unwrap();
        assert_eq!(r.eps_max, [0.0; 3]);
        assert!(r.feasible);
    }

    #[test]
    fn far_detuned_is_adiabatic() {
        let crit = critical_ratio(FRAC_PI_3, FRAC_PI_3).unwrap();
        let r = epsilon_profile(&scenario(FRAC_PI_3, FRAC_PI_3, 0.01 * crit, 4000)).unwrap();
        assert!(r.eps_max[0] < 1e-2, "{:?}", r.eps_max);
        assert!((r.chi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_drive_peaks_beside_the_gap_minimum() {
        // At T/2 the field is purely transverse and Ḣ lies along y alone, so
        // the pair coupling dips there: ε₁₂ has twin peaks mirrored about the
        // gap minimum rather than a single peak on it.
        let steps = 4000;
        for (theta, beta) in [(1.0, 1.2), (0.4, 0.9), (FRAC_PI_3, FRAC_PI_3)] {
            let s = scenario(theta, beta, critical_ratio(theta, beta).unwrap(), steps);
            let traj = trajectory(&s).unwrap();
            let eps = epsilon_samples(&s, &traj).unwrap();
            let gaps = traj.min_gaps();
            let dt = s.period() / steps as f64;
            assert!((gaps[0].1 - 0.5 * s.period()).abs() <= dt * 1.0001);
            for k in 0..=steps {
                let (a, b) = (eps[k][0], eps[steps - k][0]);
                assert!((a - b).abs() <= 1e-6 * a.max(b), "{k}: {a} {b}");
            }
            let r = report_from_trajectory(&s, &traj).unwrap();
            let k = (r.argmax_time[0] / dt).round() as usize;
            let f = &traj.frames[k];
            let gap_at_peak = (f.branch_value(0) - f.branch_value(1)).abs();
            assert!(gap_at_peak < 1.2 * gaps[0].0, "{theta} {beta}: {gap_at_peak} vs {}", gaps[0].0);
        }
    }

    #[test]
    fn degenerate_gap_is_an_error() {
        let mut s = scenario(1.0, 1.2, -0.3, 200);
        s.gap_floor = 1e300;
        assert!(matches!(epsilon_profile(&s), Err(Error::DegenerateGap { .. })));
    }

    #[test]
    fn scale_invariance() {
        let s = scenario(1.0, 1.2, -0.4, 1000);
        let kappa = 3.7;
        let mut k = s.clone();
        k.rotation.omega_alpha *= kappa;
        k.rotation.omega_gamma *= kappa;
        k.species.quad_split *= kappa;
        k.b_lab *= kappa;
        k.gap_floor *= kappa;
        let a = epsilon_samples(&s, &trajectory(&s).unwrap()).unwrap();
        let b = epsilon_samples(&k, &trajectory(&k).unwrap()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            for p in 0..3 {
                assert!((x[p] - y[p]).abs() <= 1e-10 * x[p].abs().max(1e-300), "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn feasibility_monotone_in_threshold() {
        let s = scenario(1.0, 1.2, -0.9, 2000);
        let r = epsilon_profile(&s).unwrap();
        let mut last = false;
        for th in [1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0] {
            let f = r.feasible_at(th);
            assert!(f || !last);
            last = f;
        }
    }

    #[test]
    fn closed_form_cases() {
        assert_eq!(epsilon_critical_closed_form(0.0, 0.3, 1.0, 1.0).unwrap(), 0.0);
        assert!(epsilon_critical_closed_form(0.7, FRAC_PI_2, 1.0, 1.0).unwrap() < 1e-15);
        let v = epsilon_critical_closed_form(FRAC_PI_4, FRAC_PI_4, 1.0, 1.0).unwrap();
        let r2 = 2f64.sqrt();
        let expect = 0.5 / (2.0 * r2 * (r2 - 1.0).powi(3)).sqrt();
        assert!((v - expect).abs() < 1e-14);
        assert_eq!(epsilon_critical_closed_form(0.3, 0.2, 1.0, 0.0), Err(Error::ZeroDenominator));
        assert!(matches!(
            epsilon_critical_closed_form(0.2 + FRAC_PI_2, 0.2, 1.0, 1.0),
            Err(Error::SingularGeometry { .. })
        ));
    }

    #[test]
    fn closed_form_decreases_in_zeta() {
        for chi in [0.2, 1.0, 5.0] {
            let mut prev = f64::INFINITY;
            for k in 0..=200 {
                let zeta = 0.1 + 9.9 * k as f64 / 200.0;
                let v = epsilon_critical_closed_form(1.1, 0.4, chi, zeta).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }
}
