//! Effective magnetic fields in the NV body frame and the resonance test.
//!
//! In the frame co-rotating with the diamond the drive looks like a static
//! field B₀ (set by ω_γ and the NV tilt θ) plus a field B₁ of strength ω_α/γ
//! that precesses around B₀ at ω_γ with cone angle β. The lab field is
//! antiparallel to B₁ at all times, so it enters only through
//! ω′_α = ω_α − γB.
//!
//! Internally everything is expressed as the precession-rate vector
//! g = γB′ (rad/s); [`effective_field`] divides by γ for the public sample.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RotationParams, ScenarioConfig};

/// Body-frame components of B′ = B + B₀ + B₁ (tesla).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyFieldSample {
    pub t: f64,
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceVerdict {
    pub lhs: f64,
    pub resonant: bool,
    /// None when cos(θ−β) vanishes.
    pub critical_ratio: Option<f64>,
}

/// Rotation phase ω_γ t.
#[inline]
pub(crate) fn phase_at(r: &RotationParams, t: f64) -> f64 {
    r.omega_gamma * t
}

/// Rotation phase at fraction `x` of the period. Exact at x = 1/2.
#[inline]
pub(crate) fn phase_at_fraction(r: &RotationParams, x: f64) -> f64 {
    TAU * x * r.omega_gamma.signum()
}

/// γB′ as a function of the rotation phase ψ = ω_γ t.
pub(crate) fn rate_vector(r: &RotationParams, w_eff: f64, psi: f64) -> [f64; 3] {
    let (sb, cb) = r.beta.sin_cos();
    let (st, ct) = r.theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let u = [-(cb * st + sb * ct * cp), sb * sp, cb * ct - sb * st * cp];
    let w = r.omega_gamma;
    [w * st - w_eff * u[0], -w_eff * u[1], -w * ct - w_eff * u[2]]
}

/// Time derivative of γB′ (rad/s²).
pub(crate) fn rate_vector_dot(r: &RotationParams, w_eff: f64, psi: f64) -> [f64; 3] {
    let sb = r.beta.sin();
    let (st, ct) = r.theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let w = r.omega_gamma;
    let udot = [sb * ct * sp * w, sb * cp * w, sb * st * sp * w];
    [-w_eff * udot[0], -w_eff * udot[1], -w_eff * udot[2]]
}

/// True when the body-frame field is static over the period.
pub(crate) fn is_static(s: &ScenarioConfig) -> bool {
    s.omega_alpha_eff() == 0.0 || s.rotation.beta.sin() == 0.0
}

/// B′ in the NV body frame at time `t`.
pub fn effective_field(s: &ScenarioConfig, t: f64) -> BodyFieldSample {
    let g = rate_vector(&s.rotation, s.omega_alpha_eff(), phase_at(&s.rotation, t));
    let gamma = s.species.gyro_ratio;
    BodyFieldSample { t, bx: g[0] / gamma, by: g[1] / gamma, bz: g[2] / gamma }
}

/// Evaluates the resonance inequality
/// [(ω′_α/ω_γ)cos(θ+β) + cos θ]·[(ω′_α/ω_γ)cos(θ−β) + cos θ] ≤ 0.
pub fn resonance_condition(r: &RotationParams, omega_alpha_eff: f64) -> ResonanceVerdict {
    let k = omega_alpha_eff / r.omega_gamma;
    let ct = r.theta.cos();
    let lhs = (k * (r.theta + r.beta).cos() + ct) * (k * (r.theta - r.beta).cos() + ct);
    ResonanceVerdict { lhs, resonant: lhs <= 0.0, critical_ratio: critical_ratio(r.theta, r.beta).ok() }
}

/// Drive ratio ω_α/ω_γ = −cos θ / cos(θ−β) at which the field is purely
/// transverse at t = T/2.
pub fn critical_ratio(theta: f64, beta: f64) -> Result<f64> {
    let c = (theta - beta).cos();
    if c.abs() < 1e-12 {
        return Err(Error::SingularGeometry { cos: c });
    }
    Ok(-theta.cos() / c)
}

const SCAN_POINTS_MIN: usize = 10_000;
const ROOT_REL_TOL: f64 = 1e-12;

/// All t in [0, T) where the body-frame z component of B′ vanishes.
///
/// Sign changes on a dense grid are refined by bisection. Tangential zeros,
/// which have no sign change, are picked up as local minima of |b_z| that
/// refine below the tolerance.
pub fn z_crossing_times(s: &ScenarioConfig) -> Vec<f64> {
    let r = s.rotation;
    let w_eff = s.omega_alpha_eff();
    let n = s.steps_per_period.max(SCAN_POINTS_MIN);
    let period = s.period();
    let bz = |x: f64| rate_vector(&r, w_eff, phase_at_fraction(&r, x))[2];

    let samples: Vec<f64> = (0..=n).map(|k| bz(k as f64 / n as f64)).collect();
    let scale = (0..n)
        .map(|k| {
            let g = rate_vector(&r, w_eff, phase_at_fraction(&r, k as f64 / n as f64));
            (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
        })
        .fold(0.0, f64::max);
    let tol = ROOT_REL_TOL * scale;
    if scale == 0.0 {
        return Vec::new();
    }

    let h = 1.0 / n as f64;
    let mut roots: Vec<f64> = Vec::new();
    for k in 0..n {
        let (x0, x1) = (k as f64 * h, (k + 1) as f64 * h);
        let (f0, f1) = (samples[k], samples[k + 1]);
        if f0.abs() <= tol {
            roots.push(x0);
        } else if f1.abs() > tol && f0.signum() != f1.signum() {
            roots.push(bisect(&bz, x0, x1, f0, tol));
        }
    }
    // Tangential touches: |b_z| has a local minimum without a sign change.
    for k in 1..n {
        let (fm, f0, fp) = (samples[k - 1], samples[k], samples[k + 1]);
        if f0.abs() <= tol || fm.signum() != f0.signum() || fp.signum() != f0.signum() {
            continue;
        }
        if f0.abs() <= fm.abs() && f0.abs() <= fp.abs() {
            let (x, v) = golden_min(|x| bz(x).abs(), (k - 1) as f64 * h, (k + 1) as f64 * h);
            if v <= tol {
                roots.push(x);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 0.5 * h);
    roots.retain(|&x| x < 1.0);
    roots.into_iter().map(|x| x * period).collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64, tol: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() <= tol || (b - a) <= f64::EPSILON * m.abs().max(1.0) {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimisation of a unimodal function on [a, b].
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PresetKind, ScenarioConfig};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    fn scenario(theta: f64, beta: f64, ratio: f64) -> ScenarioConfig {
        ScenarioConfig::from_preset(PresetKind::Nv14n).with_angles(theta, beta).with_ratio(ratio)
    }

    #[test]
    fn beta_zero_collapses_time_dependence() {
        let s = scenario(0.7, 0.0, -0.3);
        let a = effective_field(&s, 0.0);
        let b = effective_field(&s, 0.37 * s.period());
        assert!((a.bx - b.bx).abs() < 1e-15 * a.bx.abs().max(1e-30));
        assert_eq!(a.by, 0.0);
        assert_eq!(b.by, 0.0);
        assert!((a.bz - b.bz).abs() <= 1e-12 * a.bz.abs());
    }

    #[test]
    fn zero_drive_leaves_b0() {
        let s = scenario(0.9, 0.4, 0.0);
        let g = s.species.gyro_ratio;
        let w = s.rotation.omega_gamma;
        let b = effective_field(&s, 0.123 * s.period());
        let mag = (b.bx * b.bx + b.by * b.by + b.bz * b.bz).sqrt();
        assert!((mag - w.abs() / g.abs()).abs() <= 1e-12 * mag);
        // Polar angle of B₀ relative to ẑ is π − θ when ω_γ/γ > 0.
        let sgn = (w / g).signum();
        let polar = (sgn * b.bz / mag).acos();
        assert!((polar - (PI - 0.9)).abs() < 1e-12);
    }

    #[test]
    fn aligned_axes() {
        let s = scenario(0.0, 0.0, -0.4);
        let b = effective_field(&s, 0.2 * s.period());
        let g = s.species.gyro_ratio;
        let expected = -(s.rotation.omega_gamma + s.omega_alpha_eff()) / g;
        assert_eq!(b.bx, 0.0);
        assert_eq!(b.by, 0.0);
        assert!((b.bz - expected).abs() <= 1e-14 * expected.abs());
    }

    #[test]
    fn resonance_examples() {
        let r = RotationParams { omega_alpha: 0.0, omega_gamma: 2.0, beta: FRAC_PI_4, theta: FRAC_PI_2 };
        let v = resonance_condition(&r, 0.6);
        assert!((v.lhs + 0.3f64.powi(2) / 2.0).abs() < 1e-15);
        assert!(v.resonant);

        let r = RotationParams { omega_alpha: 0.0, omega_gamma: 1.0, beta: FRAC_PI_6, theta: FRAC_PI_4 };
        let v = resonance_condition(&r, -0.5);
        let a = -0.5 * (FRAC_PI_4 + FRAC_PI_6).cos() + FRAC_PI_4.cos();
        let b = -0.5 * (FRAC_PI_4 - FRAC_PI_6).cos() + FRAC_PI_4.cos();
        assert!((a - 0.577697).abs() < 1e-6 && (b - 0.224144).abs() < 1e-6);
        assert!((v.lhs - a * b).abs() < 1e-15);
        assert!(!v.resonant);

        let crit = critical_ratio(FRAC_PI_4, FRAC_PI_6).unwrap();
        let v = resonance_condition(&r, crit);
        assert!(v.lhs.abs() < 1e-15);
    }

    #[test]
    fn critical_ratio_examples() {
        assert!(critical_ratio(FRAC_PI_2, FRAC_PI_2).unwrap().abs() < 1e-16);
        let v = critical_ratio(FRAC_PI_3, FRAC_PI_2).unwrap();
        assert!((v + 0.5773503).abs() < 1e-7);
        assert!(matches!(critical_ratio(0.2, 0.2 + FRAC_PI_2), Err(Error::SingularGeometry { .. })));
    }

    #[test]
    fn crossings_at_critical_ratio_include_half_period() {
        let (theta, beta) = (0.8, 0.5);
        let s = scenario(theta, beta, critical_ratio(theta, beta).unwrap());
        let t = z_crossing_times(&s);
        let half = 0.5 * s.period();
        assert!(t.iter().any(|&x| (x - half).abs() <= 1e-9 * s.period()), "{t:?}");
    }

    #[test]
    fn no_crossings_off_resonance() {
        let s = scenario(FRAC_PI_4, FRAC_PI_6, -0.5);
        assert!(!resonance_condition(&s.rotation, s.omega_alpha_eff()).resonant);
        assert!(z_crossing_times(&s).is_empty());
        // Dense-grid oracle: b_z keeps one sign.
        let signs: Vec<bool> =
            (0..20_000).map(|k| effective_field(&s, k as f64 / 20_000.0 * s.period()).bz > 0.0).collect();
        assert!(signs.iter().all(|&x| x == signs[0]));
    }

    #[test]
    fn two_crossings_inside_resonance() {
        let (theta, beta) = (0.6, 0.9);
        let s = scenario(theta, beta, -1.0);
        let v = resonance_condition(&s.rotation, s.omega_alpha_eff());
        assert!(v.lhs < -1e-3);
        let t = z_crossing_times(&s);
        assert_eq!(t.len(), 2, "{t:?}");
        for x in t {
            let b = effective_field(&s, x);
            let m = (b.bx * b.bx + b.by * b.by + b.bz * b.bz).sqrt();
            assert!(b.bz.abs() < 1e-11 * m);
        }
    }

    #[test]
    fn symmetry_about_half_period() {
        let s = scenario(0.7, 1.1, -0.8);
        let half = 0.5 * s.period();
        for k in 1..20 {
            let d = k as f64 * 0.021 * s.period();
            let a = effective_field(&s, half + d);
            let b = effective_field(&s, half - d);
            let m = (a.bx.powi(2) + a.by.powi(2) + a.bz.powi(2)).sqrt();
            assert!((a.by + b.by).abs() <= 1e-12 * m);
            assert!((a.bx - b.bx).abs() <= 1e-12 * m);
            assert!((a.bz - b.bz).abs() <= 1e-12 * m);
        }
    }

    proptest::proptest! {
        #[test]
        fn magnitude_bound_and_periodicity(
            theta in 0.0f64..PI, beta in 0.0f64..PI, ratio in -3.0f64..3.0, x in 0.0f64..1.0
        ) {
            let s = scenario(theta, beta, ratio);
            let g = s.species.gyro_ratio.abs();
            let bound = (s.rotation.omega_gamma.abs() + s.omega_alpha_eff().abs()) / g;
            let t = x * s.period();
            let a = effective_field(&s, t);
            let m = (a.bx.powi(2) + a.by.powi(2) + a.bz.powi(2)).sqrt();
            proptest::prop_assert!(m <= bound * (1.0 + 1e-14));
            let b = effective_field(&s, t + s.period());
            let tol = 1e-12 * bound;
            proptest::prop_assert!((a.bx - b.bx).abs() <= tol);
            proptest::prop_assert!((a.by - b.by).abs() <= tol);
            proptest::prop_assert!((a.bz - b.bz).abs() <= tol);
        }
    }
}
