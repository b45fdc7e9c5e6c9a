//! Sensitivity from the Berry-phase slope, parameter sweeps and optimisation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::adiabatic::report_from_trajectory;
use crate::error::{Error, Result};
use crate::linalg::wrap_angle;
use crate::model::{ScenarioConfig, SpinSpecies};
use crate::phases::ledger_from_trajectory;
use crate::rotoframe::critical_ratio;
use crate::spinham::trajectory;

/// Default half-width of the central difference in ω′_α/ω_γ.
pub const DEFAULT_RATIO_STEP: f64 = 1e-3;

/// Rows with |cos(β − θ)| below this are treated as asymptotes.
pub const SINGULAR_CUTOFF: f64 = 1e-3;

/// Largest accepted Richardson residual relative to the slope.
pub const SLOPE_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    /// ∂Δφ_g/∂(ω′_α/ω_γ).
    pub slope: f64,
    /// |extrapolated − finer central difference|.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub theta: f64,
    pub beta: f64,
    /// ω′_α/ω_γ; None for singular rows.
    pub ratio: Option<f64>,
    /// rad/s.
    pub omega_alpha: Option<f64>,
    pub omega_gamma: f64,
    /// rad/(s·T).
    pub gyro_ratio: f64,
    pub slope: Option<f64>,
    pub slope_residual: Option<f64>,
    /// T/√Hz.
    pub eta: Option<f64>,
    pub eps_max: Option<f64>,
    pub feasible: bool,
    pub singular: bool,
    pub error: Option<String>,
}

impl SensitivityPoint {
    fn blank(s: &ScenarioConfig) -> Self {
        Self {
            theta: s.rotation.theta,
            beta: s.rotation.beta,
            ratio: None,
            omega_alpha: None,
            omega_gamma: s.rotation.omega_gamma,
            gyro_ratio: s.species.gyro_ratio,
            slope: None,
            slope_residual: None,
            eta: None,
            eps_max: None,
            feasible: false,
            singular: false,
            error: None,
        }
    }
}

fn shift_at(s: &ScenarioConfig, ratio: f64) -> Result<f64> {
    let r = s.with_ratio(ratio);
    Ok(ledger_from_trajectory(&r, &trajectory(&r)?)?.geometric_shift())
}

/// Central-difference slope of Δφ_g in ω′_α/ω_γ with one Richardson step.
pub fn phase_slope(s: &ScenarioConfig, ratio_step: f64) -> Result<SlopeEstimate> {
    if !(ratio_step > 0.0) || !ratio_step.is_finite() {
        return Err(Error::InvalidArgument(format!("ratio step {ratio_step}")));
    }
    let r0 = s.ratio();
    let h = ratio_step;
    let offsets = [h, -h, 0.5 * h, -0.5 * h];
    let vals = offsets.par_iter().map(|d| shift_at(s, r0 + d)).collect::<Result<Vec<f64>>>()?;
    let coarse = wrap_angle(vals[0] - vals[1]) / (2.0 * h);
    let fine = wrap_angle(vals[2] - vals[3]) / h;
    let slope = (4.0 * fine - coarse) / 3.0;
    let residual = (slope - fine).abs();
    if residual > SLOPE_TOLERANCE * slope.abs() {
        return Err(Error::SlopeUnresolved { slope, residual });
    }
    Ok(SlopeEstimate { slope, residual })
}

/// η = 2π / (|γ| √(N T_m) |slope|), T/√Hz.
pub fn sensitivity(slope: f64, species: &SpinSpecies, measurement_time: f64, spin_count: u64) -> Result<f64> {
    if slope == 0.0 {
        return Err(Error::ZeroSlope);
    }
    if !(measurement_time > 0.0) || spin_count == 0 {
        return Err(Error::InvalidArgument(format!("measurement time {measurement_time} s, spin count {spin_count}")));
    }
    Ok(TAU / (species.gyro_ratio.abs() * (spin_count as f64 * measurement_time).sqrt() * slope.abs()))
}

/// Full evaluation of one scenario at its own drive ratio.
pub fn evaluate_point(s: &ScenarioConfig, ratio_step: f64) -> SensitivityPoint {
    let mut p = SensitivityPoint::blank(s);
    p.ratio = Some(s.ratio());
    p.omega_alpha = Some(s.rotation.omega_alpha);
    let eps = trajectory(s).and_then(|t| report_from_trajectory(s, &t));
    match eps {
        Ok(r) => {
            p.eps_max = Some(r.overall_max());
            p.feasible = r.feasible;
        }
        Err(e) => {
            p.error = Some(e.to_string());
            return p;
        }
    }
    match phase_slope(s, ratio_step) {
        Ok(est) => {
            p.slope = Some(est.slope);
            p.slope_residual = Some(est.residual);
            match sensitivity(est.slope, &s.species, s.measurement_time, s.spin_count) {
                Ok(eta) => p.eta = Some(eta),
                Err(e) => p.error = Some(e.to_string()),
            }
        }
        Err(e) => p.error = Some(e.to_string()),
    }
    p
}

/// Sweep row at (θ, β) driven at the critical ratio.
pub fn critical_point(template: &ScenarioConfig, theta: f64, beta: f64) -> SensitivityPoint {
    let s = template.with_angles(theta, beta);
    if (beta - theta).cos().abs() < SINGULAR_CUTOFF {
        let mut p = SensitivityPoint::blank(&s);
        p.singular = true;
        return p;
    }
    match critical_ratio(theta, beta) {
        Ok(r) => evaluate_point(&s.with_ratio(r), DEFAULT_RATIO_STEP),
        Err(e) => {
            let mut p = SensitivityPoint::blank(&s);
            p.singular = true;
            p.error = Some(e.to_string());
            p
        }
    }
}

/// One row per β, each at its critical drive. Rows never abort the sweep.
pub fn sensitivity_sweep(theta: f64, beta_grid: &[f64], template: &ScenarioConfig) -> Vec<SensitivityPoint> {
    beta_grid.par_iter().map(|&b| critical_point(template, theta, b)).collect()
}

/// One row of the Δφ_g-versus-drive curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub ratio: f64,
    /// Principal value, rad.
    pub delta_phi_g: Option<f64>,
    /// Continued along the grid from the first resolved row, rad.
    pub delta_phi_g_unwrapped: Option<f64>,
    pub eps_max: Option<f64>,
    pub feasible: bool,
    pub error: Option<String>,
}

/// Δφ_g and adiabaticity over a strictly monotone grid of ω′_α/ω_γ.
pub fn phase_vs_ratio(template: &ScenarioConfig, ratios: &[f64]) -> Result<Vec<PhaseRow>> {
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) || ratios.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidArgument("ratio grid must be finite and strictly monotone".into()));
    }
    let mut rows: Vec<PhaseRow> = ratios
        .par_iter()
        .map(|&ratio| {
            let s = template.with_ratio(ratio);
            let mut row = PhaseRow {
                ratio,
                delta_phi_g: None,
                delta_phi_g_unwrapped: None,
                eps_max: None,
                feasible: false,
                error: None,
            };
            let res = trajectory(&s).and_then(|t| {
                let shift = ledger_from_trajectory(&s, &t)?.geometric_shift();
                let rep = report_from_trajectory(&s, &t)?;
                Ok((shift, rep))
            });
            match res {
                Ok((shift, rep)) => {
                    row.delta_phi_g = Some(shift);
                    row.eps_max = Some(rep.overall_max());
                    row.feasible = rep.feasible;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    let mut last: Option<f64> = None;
    for row in rows.iter_mut() {
        if let Some(v) = row.delta_phi_g {
            let u = match last {
                None => v,
                Some(prev) => prev + wrap_angle(v - prev),
            };
            row.delta_phi_g_unwrapped = Some(u);
            last = Some(u);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBounds {
    pub theta: (f64, f64),
    pub beta: (f64, f64),
}

/// Coarse scan resolution used by [`optimize_parameters`].
pub const COARSE_THETA: usize = 5;
pub const COARSE_BETA: usize = 9;
const GOLDEN_ITERATIONS: usize = 24;
const REFINE_CANDIDATES: usize = 2;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn score(p: &SensitivityPoint) -> f64 {
    match (p.feasible, p.eta) {
        (true, Some(eta)) => eta,
        _ => f64::INFINITY,
    }
}

fn better(a: SensitivityPoint, b: SensitivityPoint) -> SensitivityPoint {
    if score(&b) < score(&a) {
        b
    } else {
        a
    }
}

/// Feasible (θ, β) with the smallest η: coarse grid, then golden-section
/// refinement in β around the best rows.
pub fn optimize_parameters(bounds: ParameterBounds, template: &ScenarioConfig) -> Result<SensitivityPoint> {
    let (tl, th) = bounds.theta;
    let (bl, bh) = bounds.beta;
    if !(tl <= th && bl <= bh) || ![tl, th, bl, bh].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument(format!("bounds {bounds:?}")));
    }
    let thetas = linspace(tl, th, COARSE_THETA);
    let betas = linspace(bl, bh, COARSE_BETA);
    let grid: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| betas.iter().map(move |&b| (t, b))).collect();
    let coarse: Vec<SensitivityPoint> = grid.par_iter().map(|&(t, b)| critical_point(template, t, b)).collect();

    let mut ranked: Vec<&SensitivityPoint> = coarse.iter().filter(|p| score(p).is_finite()).collect();
    if ranked.is_empty() {
        return Err(Error::NoFeasiblePoint);
    }
    ranked.sort_by(|a, b| score(a).total_cmp(&score(b)));
    let mut best = ranked[0].clone();

    let cell = if betas.len() > 1 { betas[1] - betas[0] } else { 0.0 };
    let mut seen = Vec::new();
    for p in ranked {
        if seen.len() == REFINE_CANDIDATES {
            break;
        }
        if seen.contains(&p.theta.to_bits()) {
            continue;
        }
        seen.push(p.theta.to_bits());
        if cell == 0.0 {
            continue;
        }
        let lo = (p.beta - cell).max(bl);
        let hi = (p.beta + cell).min(bh);
        best = better(best, golden_refine(template, p.theta, lo, hi));
    }
    Ok(best)
}

fn golden_refine(template: &ScenarioConfig, theta: f64, mut a: f64, mut b: f64) -> SensitivityPoint {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |beta: f64| critical_point(template, theta, beta);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut pc, mut pd) = (eval(c), eval(d));
    let mut best = better(pc.clone(), pd.clone());
    for _ in 0..GOLDEN_ITERATIONS {
        if score(&pc) < score(&pd) {
            b = d;
            d = c;
            pd = pc;
            c = b - inv_phi * (b - a);
            pc = eval(c);
            best = better(best, pc.clone());
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + inv_phi * (b - a);
            pd = eval(d);
            best = better(best, pd.clone());
        }
    }
    best
}

/// Equivalent field error from a relative instability of the drive,
/// δB = rel·|ω_α|/|γ|, in tesla.
pub fn rotation_noise_floor(point: &SensitivityPoint, rel_instability: f64) -> Result<f64> {
    match point.omega_alpha {
        Some(w) if !point.singular => Ok(rel_instability * w.abs() / point.gyro_ratio.abs()),
        _ => Err(Error::SingularGeometry { cos: (point.beta - point.theta).cos() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PresetKind;
    use std::f64::consts::FRAC_PI_2;

    fn base() -> ScenarioConfig {
        ScenarioConfig::from_preset(PresetKind::Nv14n).with_steps(4000)
    }

    #[test]
    fn static_field_has_zero_slope() {
        let s = base().with_angles(0.9, 0.0).with_ratio(-0.4);
        let est = phase_slope(&s, 1e-3).unwrap();
        assert_eq!(est.slope, 0.0);
        assert_eq!(sensitivity(0.0, &s.species, 1e-2, 1), Err(Error::ZeroSlope));
    }

    #[test]
    fn eta_scales_as_inverse_root_n() {
        let sp = base().species;
        let e1 = sensitivity(2.3, &sp, 1e-2, 1).unwrap();
        let e4 = sensitivity(2.3, &sp, 1e-2, 4).unwrap();
        assert_eq!(e1, 2.0 * e4);
        for n in [1u64, 7, 100, 1_000_000, 123_456_789] {
            let e = sensitivity(-2.3, &sp, 1e-2, n).unwrap();
            assert!((e * (n as f64).sqrt() - e1).abs() <= 1e-14 * e1);
        }
        let e6 = sensitivity(2.3, &sp, 1e-2, 1_000_000).unwrap();
        assert!((e6 - e1 / 1000.0).abs() <= 1e-15 * e1);
    }

    #[test]
    fn slope_is_locally_constant() {
        let s = base().with_steps(20_000);
        let a = phase_slope(&s, 1e-3).unwrap().slope;
        let b = phase_slope(&s, 5e-4).unwrap().slope;
        assert!((a - b).abs() < 0.02 * a.abs(), "{a} {b}");
    }

    #[test]
    fn slope_is_larger_at_critical_than_far_away() {
        let (theta, beta) = (1.0, 1.2);
        let crit = critical_ratio(theta, beta).unwrap();
        let s = base().with_angles(theta, beta);
        let at = phase_slope(&s.with_ratio(crit), 1e-3).unwrap().slope.abs();
        let far = phase_slope(&s.with_ratio(0.2 * crit), 1e-3).unwrap().slope.abs();
        assert!(at > far, "{at} {far}");
    }

    #[test]
    fn sweep_flags_singular_rows_and_is_order_free() {
        let theta = 0.3;
        let grid = [0.1, 0.5, theta + FRAC_PI_2, 1.0];
        let rows = sensitivity_sweep(theta, &grid, &base());
        assert!(rows[2].singular && rows[2].eta.is_none());
        assert!(rows.iter().enumerate().all(|(i, r)| i == 2 || !r.singular));
        let rev: Vec<f64> = grid.iter().rev().copied().collect();
        let mut back = sensitivity_sweep(theta, &rev, &base());
        back.reverse();
        assert_eq!(rows, back);
    }

    #[test]
    fn singular_strip_has_no_feasible_point() {
        let theta = 0.2;
        let b = theta + FRAC_PI_2;
        let bounds = ParameterBounds { theta: (theta, theta), beta: (b - 1e-4, b + 1e-4) };
        assert_eq!(optimize_parameters(bounds, &base()), Err(Error::NoFeasiblePoint));
    }

    #[test]
    fn refinement_never_worse_than_coarse_scan() {
        // Close to θ = π/2 at χ = 1 every β is adiabatic (ε ∝ cos θ).
        let bounds = ParameterBounds { theta: (1.555, 1.565), beta: (1.3, 1.8) };
        let s = base().with_steps(2000);
        let best = optimize_parameters(bounds, &s).unwrap();
        let coarse_min = linspace(1.555, 1.565, COARSE_THETA)
            .iter()
            .flat_map(|&t| linspace(1.3, 1.8, COARSE_BETA).into_iter().map(move |b| (t, b)))
            .map(|(t, b)| score(&critical_point(&s, t, b)))
            .fold(f64::INFINITY, f64::min);
        assert!(score(&best) <= coarse_min);
        assert!(best.feasible);
    }

    #[test]
    fn noise_floor_is_linear() {
        let p = evaluate_point(&base(), DEFAULT_RATIO_STEP);
        assert_eq!(rotation_noise_floor(&p, 0.0).unwrap(), 0.0);
        let a = rotation_noise_floor(&p, 1e-12).unwrap();
        let b = rotation_noise_floor(&p, 3e-12).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-15 * b);
        let mut sing = p.clone();
        sing.singular = true;
        assert!(rotation_noise_floor(&sing, 1e-12).is_err());
    }

    #[test]
    fn electron_preset_scales_with_gyromagnetic_ratio() {
        // Both presets share the dimensionless geometry (θ = β, χ = 1), so the
        // slope is the same and η differs only through γ.
        let e = evaluate_point(&ScenarioConfig::from_preset(PresetKind::Electron).with_steps(4000), DEFAULT_RATIO_STEP);
        let n = evaluate_point(&base(), DEFAULT_RATIO_STEP);
        let (ee, en) = (e.eta.unwrap(), n.eta.unwrap());
        let expect = n.gyro_ratio / e.gyro_ratio;
        assert!((ee / en / expect - 1.0).abs() < 1e-6, "{ee} {en}");
        assert!((1e-11..1e-9).contains(&ee));
    }

    #[test]
    fn phase_curve_is_continuous_and_null_at_zero_drive() {
        let (theta, beta) = (0.5, 0.5);
        let crit = critical_ratio(theta, beta).unwrap();
        let s = base().with_angles(theta, beta);
        let grid: Vec<f64> = (0..=20).map(|k| crit * k as f64 / 10.0).collect();
        let rows = phase_vs_ratio(&s, &grid).unwrap();
        assert_eq!(rows[0].delta_phi_g, Some(0.0));
        for w in rows.windows(2) {
            let (a, b) = (w[0].delta_phi_g_unwrapped.unwrap(), w[1].delta_phi_g_unwrapped.unwrap());
            assert!((b - a).abs() <= std::f64::consts::PI);
            assert!(wrap_angle(b - w[1].delta_phi_g.unwrap()).abs() < 1e-12);
        }
        assert!(phase_vs_ratio(&s, &[0.1, 0.3, 0.2]).is_err());
    }

    #[test]
    fn phase_curve_converges_under_grid_doubling() {
        let s = base().with_angles(1.0, 1.2).with_steps(20_000);
        let grid = [-0.3, -0.45, -0.6];
        let a = phase_vs_ratio(&s, &grid).unwrap();
        let b = phase_vs_ratio(&s.with_steps(40_000), &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let d = wrap_angle(x.delta_phi_g.unwrap() - y.delta_phi_g.unwrap()).abs();
            assert!(d < 1e-6, "{} {d}", x.ratio);
        }
    }
}
