//! Dynamic and geometric phases accumulated over one rotation period.
//!
//! The geometric phase is computed two ways:
//!
//! * the discrete overlap (Pancharatnam) product −arg Π⟨v_k|v_{k+1}⟩ over the
//!   closed loop of tracked eigenvectors, which needs no parameterisation
//!   and is invariant under any re-phasing of the stored vectors;
//! * the integral ∮ φ̇ (|⟨+1|λ⟩|² − |⟨−1|λ⟩|²) dt, written through the angles
//!   (ϑ₁, ϑ₂, φ) of the eigenstate (|+1⟩ amplitude sin(ϑ₁/2)sin(ϑ₂/2)e^{−iφ},
//!   |0⟩ amplitude cos(ϑ₁/2), |−1⟩ amplitude sin(ϑ₁/2)cos(ϑ₂/2)e^{iφ}) with φ
//!   the azimuth of the body-frame field. In these angles the integrand is
//!   −½ φ̇ (1 − cos ϑ₁) cos ϑ₂.
//!
//! Both agree modulo 2π. Geometric phases are reported on the principal
//! branch (−π, π]; sweeps unwrap them by continuation along the grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, wrap_angle, CVec3};
use crate::model::ScenarioConfig;
use crate::rotoframe::{is_static, phase_at_fraction, rate_vector, rate_vector_dot};
use crate::spinham::{trajectory, Trajectory, ZERO_BRANCH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGap {
    pub pair: (usize, usize),
    /// rad/s.
    pub min_gap: f64,
    pub t: f64,
}

/// Per-branch phases over one closed period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLedger {
    /// −∫₀ᵀ λ_n dt, rad.
    pub phi_dynamic: [f64; 3],
    /// Berry phase, rad, in (−π, π].
    pub phi_geometric: [f64; 3],
    pub min_gaps: [PairGap; 3],
    pub period: f64,
}

impl PhaseLedger {
    pub fn total(&self, branch: usize) -> f64 {
        self.phi_dynamic[branch] + self.phi_geometric[branch]
    }

    /// Δφ_g = φ_g1 − φ_g2 on the principal branch.
    pub fn geometric_shift(&self) -> f64 {
        wrap_angle(self.phi_geometric[0] - self.phi_geometric[1])
    }
}

/// One eigenstate on the |+1⟩/|−1⟩ Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub t: f64,
    /// ϑ₂ ∈ [0, π].
    pub polar: f64,
    /// 2φ wrapped to (−π, π].
    pub azimuth: f64,
    /// |⟨0|λ⟩|².
    pub residual_zero_weight: f64,
}

/// (ϑ₁, ϑ₂) from amplitude magnitudes.
pub fn state_angles(v: &CVec3) -> (f64, f64) {
    let (a, b, c) = (v[0].norm(), v[1].norm(), v[2].norm());
    let theta1 = 2.0 * (a.hypot(c)).atan2(b);
    let theta2 = 2.0 * a.atan2(c);
    (theta1, theta2)
}

/// Fails with [`Error::GapFloorViolation`] when any branch pair comes closer
/// than the scenario's gap floor.
pub fn check_gap_floor(s: &ScenarioConfig, traj: &Trajectory) -> Result<[PairGap; 3]> {
    let gaps = min_gaps(traj);
    if let Some(worst) = gaps.iter().min_by(|a, b| a.min_gap.total_cmp(&b.min_gap)) {
        if worst.min_gap < s.gap_floor {
            return Err(Error::GapFloorViolation {
                gap: worst.min_gap,
                t: worst.t,
                pair: worst.pair,
                floor: s.gap_floor,
            });
        }
    }
    Ok(gaps)
}

fn min_gaps(traj: &Trajectory) -> [PairGap; 3] {
    let raw = traj.min_gaps();
    let pairs = crate::spinham::PAIRS;
    [0, 1, 2].map(|p| PairGap { pair: pairs[p], min_gap: raw[p].0, t: raw[p].1 })
}

/// Overlap-product geometric phase of every branch, principal branch.
pub fn overlap_geometric_phases(traj: &Trajectory) -> [f64; 3] {
    let n = traj.frames.len();
    [0, 1, 2].map(|b| {
        let mut acc = 0.0;
        for k in 0..n {
            let next = if k + 1 < n { &traj.frames[k + 1] } else { &traj.frames[0] };
            let ov = inner(traj.frames[k].branch_vector(b), next.branch_vector(b));
            acc -= ov.arg();
        }
        wrap_angle(acc)
    })
}

/// −∫₀ᵀ λ_n dt by the trapezoid rule on the trajectory grid.
pub fn dynamic_phases(traj: &Trajectory) -> [f64; 3] {
    let mut out = [0.0; 3];
    for w in traj.frames.windows(2) {
        let dt = w[1].t - w[0].t;
        let (a, b) = (w[0].branch_values(), w[1].branch_values());
        for n in 0..3 {
            out[n] -= 0.5 * (a[n] + b[n]) * dt;
        }
    }
    out
}

/// Builds the ledger from an existing trajectory.
pub fn ledger_from_trajectory(s: &ScenarioConfig, traj: &Trajectory) -> Result<PhaseLedger> {
    let min_gaps = check_gap_floor(s, traj)?;
    Ok(PhaseLedger {
        phi_dynamic: dynamic_phases(traj),
        phi_geometric: overlap_geometric_phases(traj),
        min_gaps,
        period: traj.period,
    })
}

/// Dynamic and geometric phases of all three branches over one period.
pub fn adiabatic_phases(s: &ScenarioConfig) -> Result<PhaseLedger> {
    let traj = trajectory(s)?;
    ledger_from_trajectory(s, &traj)
}

/// Field azimuth φ = arg(g_x + i g_y) and its rate at fraction `x`.
fn azimuth_and_rate(s: &ScenarioConfig, x: f64) -> (f64, f64, f64) {
    let psi = phase_at_fraction(&s.rotation, x);
    let w_eff = s.omega_alpha_eff();
    let g = rate_vector(&s.rotation, w_eff, psi);
    let gd = rate_vector_dot(&s.rotation, w_eff, psi);
    let perp2 = g[0] * g[0] + g[1] * g[1];
    let rate = (g[0] * gd[1] - g[1] * gd[0]) / perp2;
    (g[1].atan2(g[0]), rate, perp2)
}

/// Unwrapped field azimuth along the trajectory grid.
fn unwrapped_azimuth(s: &ScenarioConfig, traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(traj.len());
    let mut prev_raw = 0.0;
    for (k, &x) in traj.fractions.iter().enumerate() {
        let (phi, rate, perp2) = azimuth_and_rate(s, x);
        if !(perp2 > 0.0) || !rate.is_finite() {
            return Err(Error::PhaseUnwrapFailure { t: x * traj.period, jump: f64::NAN });
        }
        if k == 0 {
            out.push((phi, rate));
        } else {
            let jump = wrap_angle(phi - prev_raw);
            if jump.abs() >= PI / 2.0 {
                return Err(Error::PhaseUnwrapFailure { t: x * traj.period, jump });
            }
            let last = out[k - 1].0;
            out.push((last + jump, rate));
        }
        prev_raw = phi;
    }
    Ok(out)
}

/// Berry phase of `branch` from the angle-parameterised integrand.
pub fn berry_integrand_from_trajectory(s: &ScenarioConfig, traj: &Trajectory, branch: usize) -> Result<f64> {
    if branch > 2 {
        return Err(Error::InvalidArgument(format!("branch {branch} out of range")));
    }
    if is_static(s) {
        return Ok(0.0);
    }
    let az = unwrapped_azimuth(s, traj)?;
    let integrand: Vec<f64> = traj
        .frames
        .iter()
        .zip(&az)
        .map(|(f, &(_, rate))| {
            let (t1, t2) = state_angles(f.branch_vector(branch));
            -0.5 * rate * (1.0 - t1.cos()) * t2.cos()
        })
        .collect();
    let mut acc = 0.0;
    for k in 1..traj.frames.len() {
        let dt = traj.frames[k].t - traj.frames[k - 1].t;
        acc += 0.5 * (integrand[k] + integrand[k - 1]) * dt;
    }
    Ok(acc)
}

/// Berry phase of `branch` from the angle-parameterised integrand.
pub fn berry_integrand_phase(s: &ScenarioConfig, branch: usize) -> Result<f64> {
    if branch > 2 {
        return Err(Error::InvalidArgument(format!("branch {branch} out of range")));
    }
    if is_static(s) {
        return Ok(0.0);
    }
    let traj = trajectory(s)?;
    berry_integrand_from_trajectory(s, &traj, branch)
}

/// Δφ_g = φ_g1 − φ_g2 (principal branch).
pub fn geometric_phase_shift(s: &ScenarioConfig) -> Result<f64> {
    Ok(adiabatic_phases(s)?.geometric_shift())
}

/// Bloch-sphere trajectory of branch 0 or 1 (the |±1⟩ pair).
pub fn bloch_from_trajectory(s: &ScenarioConfig, traj: &Trajectory, branch: usize) -> Result<Vec<BlochPoint>> {
    if branch >= ZERO_BRANCH {
        return Err(Error::InvalidArgument(format!(
            "Bloch trajectories exist for the |±1⟩ pair only, got branch {branch}"
        )));
    }
    Ok(traj
        .frames
        .iter()
        .zip(&traj.fractions)
        .map(|(f, &x)| {
            let v = f.branch_vector(branch);
            let (_, polar) = state_angles(v);
            let (phi, _, _) = azimuth_and_rate(s, x);
            BlochPoint {
                t: f.t,
                polar,
                azimuth: wrap_angle(2.0 * phi),
                residual_zero_weight: v[1].norm_sqr().clamp(0.0, 1.0),
            }
        })
        .collect())
}

pub fn bloch_trajectory(s: &ScenarioConfig, branch: usize) -> Result<Vec<BlochPoint>> {
    if branch >= ZERO_BRANCH {
        return Err(Error::InvalidArgument(format!(
            "Bloch trajectories exist for the |±1⟩ pair only, got branch {branch}"
        )));
    }
    let traj = trajectory(s)?;
    bloch_from_trajectory(s, &traj, branch)
}

fn cartesian(p: &BlochPoint) -> [f64; 3] {
    let (sp, cp) = p.polar.sin_cos();
    let (sa, ca) = p.azimuth.sin_cos();
    [sp * ca, sp * sa, cp]
}

/// Signed solid angle enclosed by a closed trajectory, measured from the
/// polar = 0 pole; counter-clockwise in azimuth is positive.
pub fn solid_angle(traj: &[BlochPoint]) -> Result<f64> {
    if traj.len() < 2 {
        return Ok(0.0);
    }
    let first = cartesian(&traj[0]);
    let last = cartesian(traj.last().expect("len >= 2"));
    let gap = ((first[0] - last[0]).powi(2) + (first[1] - last[1]).powi(2) + (first[2] - last[2]).powi(2)).sqrt();
    if gap > 1e-6 {
        return Err(Error::OpenTrajectory { gap });
    }
    let pole = [0.0, 0.0, 1.0];
    let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let mut total = 0.0;
    for w in traj.windows(2) {
        let (a, b) = (cartesian(&w[0]), cartesian(&w[1]));
        let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let num = dot(&pole, &cross);
        let den = 1.0 + dot(&pole, &a) + dot(&pole, &b) + dot(&a, &b);
        total += 2.0 * num.atan2(den);
    }
    Ok(total)
}

/// Distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}
