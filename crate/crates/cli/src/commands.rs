use anyhow::{bail, Result};
use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use spinrot::adiabatic::{report_from_trajectory, AdiabaticityReport};
use spinrot::config::parse_angle;
use spinrot::dynamics::{ramsey_phase_with_trials, RamseyResult};
use spinrot::phases::bloch_trajectory;
use spinrot::sensing::{critical_point, phase_vs_ratio};
use spinrot::spinham::{trajectory, PAIRS};
use spinrot::{critical_ratio, resonance_condition, ResonanceVerdict, ScenarioConfig};

use crate::grid::{angle_grid, ratio_grid, ratio_value};
use crate::output::{flag, json_bytes, num, opt, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Angle overrides shared by the single-scenario commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct Geometry {
    /// NV tilt θ (suffix deg or rad).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Nutation angle β (suffix deg or rad).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Branch-tracked eigenvalues over one period for each drive ratio.
    Eigencurves {
        #[command(flatten)]
        geometry: Geometry,
        /// ω′_α/ω_γ values: list or start:stop:count; `critical` and `Nc` allowed.
        #[arg(long, default_value = "critical", allow_hyphen_values = true)]
        ratios: String,
    },
    /// Bloch-sphere trajectory of one of the |±1⟩ branches.
    Bloch {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<String>,
        /// 1 or 2.
        #[arg(long, default_value_t = 1)]
        branch: usize,
    },
    /// Geometric phase shift and adiabaticity across drive ratios.
    PhaseVsRatio {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long, default_value = "0.5c:1.5c:41", allow_hyphen_values = true)]
        ratios: String,
    },
    /// Sensitivity at the critical drive over a (θ, β) grid.
    SensitivityMap {
        #[arg(long, allow_hyphen_values = true)]
        thetas: String,
        #[arg(long, allow_hyphen_values = true)]
        betas: String,
    },
    /// Ramsey readout with shot-noise Monte Carlo.
    Ramsey {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<String>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Adiabaticity report, resonance test and range warnings.
    Check {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<String>,
    },
}

impl Command {
    pub fn stem(&self) -> &'static str {
        match self {
            Command::Eigencurves { .. } => "eigencurves",
            Command::Bloch { .. } => "bloch",
            Command::PhaseVsRatio { .. } => "phase-vs-ratio",
            Command::SensitivityMap { .. } => "sensitivity-map",
            Command::Ramsey { .. } => "ramsey",
            Command::Check { .. } => "check",
        }
    }

    fn is_grid(&self) -> bool {
        !matches!(self, Command::Ramsey { .. } | Command::Check { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Partial,
    Failed,
}

impl Status {
    fn from_counts(failed: usize, total: usize) -> Self {
        match failed {
            0 => Status::Complete,
            f if f == total => Status::Failed,
            _ => Status::Partial,
        }
    }
}

pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub status: Status,
}

fn apply_geometry(s: &ScenarioConfig, g: &Geometry, degrees: bool) -> Result<ScenarioConfig> {
    let theta = g.theta.as_deref().map(|t| parse_angle(t, degrees)).transpose()?.unwrap_or(s.rotation.theta);
    let beta = g.beta.as_deref().map(|t| parse_angle(t, degrees)).transpose()?.unwrap_or(s.rotation.beta);
    Ok(s.with_angles(theta, beta))
}

fn critical(s: &ScenarioConfig) -> Option<f64> {
    critical_ratio(s.rotation.theta, s.rotation.beta).ok()
}

fn apply_ratio(s: ScenarioConfig, ratio: Option<&str>) -> Result<ScenarioConfig> {
    Ok(match ratio {
        Some(r) => {
            let v = ratio_value(r.trim(), critical(&s))?;
            s.with_ratio(v)
        }
        None => s,
    })
}

pub fn execute(cmd: &Command, base: &ScenarioConfig, format: Option<Format>, degrees: bool) -> Result<Outcome> {
    let format = match format {
        Some(f) => f,
        None if cmd.is_grid() => Format::Csv,
        None => Format::Json,
    };
    if !cmd.is_grid() && format == Format::Csv {
        bail!("{} writes a JSON report; --format csv is not available", cmd.stem());
    }
    let (table, status) = match cmd {
        Command::Eigencurves { geometry, ratios } => {
            let s = apply_geometry(base, geometry, degrees)?;
            eigencurves(&s, &ratio_grid(ratios, critical(&s))?)?
        }
        Command::Bloch { geometry, ratio, branch } => {
            let s = apply_ratio(apply_geometry(base, geometry, degrees)?, ratio.as_deref())?;
            if !(1..=2).contains(branch) {
                bail!("--branch must be 1 or 2");
            }
            (bloch(&s, branch - 1)?, Status::Complete)
        }
        Command::PhaseVsRatio { geometry, ratios } => {
            let s = apply_geometry(base, geometry, degrees)?;
            phase_table(&s, &ratio_grid(ratios, critical(&s))?)?
        }
        Command::SensitivityMap { thetas, betas } => {
            sensitivity_map(base, &angle_grid(thetas, degrees)?, &angle_grid(betas, degrees)?)?
        }
        Command::Ramsey { geometry, ratio, trials } => {
            let s = apply_ratio(apply_geometry(base, geometry, degrees)?, ratio.as_deref())?;
            return ramsey(&s, *trials);
        }
        Command::Check { geometry, ratio } => {
            let s = apply_ratio(apply_geometry(base, geometry, degrees)?, ratio.as_deref())?;
            return check(&s);
        }
    };
    let (ext, bytes) = match format {
        Format::Csv => ("csv", table.to_csv()?),
        Format::Json => ("json", table.to_json()?),
    };
    Ok(Outcome { files: vec![(format!("{}.{ext}", cmd.stem()), bytes)], status })
}

#[derive(Serialize)]
struct EigenRow {
    t_over_t: Option<f64>,
    ratio: f64,
    lambda: Option<[f64; 3]>,
    error: Option<String>,
}

fn eigencurves(s: &ScenarioConfig, ratios: &[f64]) -> Result<(Table, Status)> {
    let blocks: Vec<_> = ratios.par_iter().map(|&r| (r, trajectory(&s.with_ratio(r)))).collect();
    let mut t = Table::new(vec!["t_over_T", "ratio", "lambda1", "lambda2", "lambda3", "error"]);
    let mut failed = 0;
    for (r, res) in blocks {
        match res {
            Ok(traj) => {
                for (x, f) in traj.fractions.iter().zip(&traj.frames) {
                    let v = f.branch_values();
                    t.push(
                        vec![num(*x), num(r), num(v[0]), num(v[1]), num(v[2]), String::new()],
                        EigenRow { t_over_t: Some(*x), ratio: r, lambda: Some(v), error: None },
                    )?;
                }
            }
            Err(e) => {
                failed += 1;
                let msg = e.to_string();
                t.push(
                    vec![String::new(), num(r), String::new(), String::new(), String::new(), msg.clone()],
                    EigenRow { t_over_t: None, ratio: r, lambda: None, error: Some(msg) },
                )?;
            }
        }
    }
    Ok((t, Status::from_counts(failed, ratios.len())))
}

fn bloch(s: &ScenarioConfig, branch: usize) -> Result<Table> {
    let pts = bloch_trajectory(s, branch)?;
    let period = s.period();
    let mut t = Table::new(vec!["t_over_T", "polar", "azimuth", "zero_weight"]);
    for p in pts {
        let x = p.t / period;
        t.push(vec![num(x), num(p.polar), num(p.azimuth), num(p.residual_zero_weight)], p)?;
    }
    Ok(t)
}

fn phase_table(s: &ScenarioConfig, ratios: &[f64]) -> Result<(Table, Status)> {
    let rows = phase_vs_ratio(s, ratios)?;
    let mut t = Table::new(vec!["ratio", "delta_phi_g", "delta_phi_g_unwrapped", "eps_max", "feasible", "error"]);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    for r in rows {
        t.push(
            vec![
                num(r.ratio),
                opt(r.delta_phi_g),
                opt(r.delta_phi_g_unwrapped),
                opt(r.eps_max),
                flag(r.feasible),
                r.error.clone().unwrap_or_default(),
            ],
            r,
        )?;
    }
    Ok((t, Status::from_counts(failed, ratios.len())))
}

fn sensitivity_map(s: &ScenarioConfig, thetas: &[f64], betas: &[f64]) -> Result<(Table, Status)> {
    let grid: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| betas.iter().map(move |&b| (t, b))).collect();
    let rows: Vec<_> = grid.par_iter().map(|&(t, b)| critical_point(s, t, b)).collect();
    let mut t = Table::new(vec![
        "theta",
        "beta",
        "omega_alpha_over_gamma",
        "omega_alpha",
        "slope",
        "eta",
        "eps_max",
        "feasible",
        "singular",
        "error",
    ]);
    let failed = rows.iter().filter(|r| r.error.is_some() && !r.singular).count();
    for r in rows {
        t.push(
            vec![
                num(r.theta),
                num(r.beta),
                opt(r.ratio),
                opt(r.omega_alpha),
                opt(r.slope),
                opt(r.eta),
                opt(r.eps_max),
                flag(r.feasible),
                flag(r.singular),
                r.error.clone().unwrap_or_default(),
            ],
            &r,
        )?;
    }
    Ok((t, Status::from_counts(failed, grid.len())))
}

#[derive(Serialize)]
struct RamseyReport<'a> {
    #[serde(flatten)]
    result: &'a RamseyResult,
    trials: usize,
    spin_count: u64,
    seed: u64,
    ratio: f64,
}

fn ramsey(s: &ScenarioConfig, trials: usize) -> Result<Outcome> {
    let r = ramsey_phase_with_trials(s, trials)?;
    let report = RamseyReport { result: &r, trials, spin_count: s.spin_count, seed: s.seed, ratio: s.ratio() };
    Ok(Outcome { files: vec![("ramsey.json".into(), json_bytes(&report)?)], status: Status::Complete })
}

#[derive(Serialize)]
struct GapEntry {
    pair: (usize, usize),
    min_gap: f64,
    t: f64,
}

#[derive(Serialize)]
struct CheckReport {
    ratio: f64,
    chi: f64,
    period: f64,
    resonance: ResonanceVerdict,
    adiabaticity: Option<AdiabaticityReport>,
    min_gaps: Option<Vec<GapEntry>>,
    warnings: Vec<String>,
    error: Option<String>,
}

fn check(s: &ScenarioConfig) -> Result<Outcome> {
    let warnings = spinrot::validate_scenario(s)?.iter().map(|w| w.to_string()).collect();
    let mut report = CheckReport {
        ratio: s.ratio(),
        chi: s.chi(),
        period: s.period(),
        resonance: resonance_condition(&s.rotation, s.omega_alpha_eff()),
        adiabaticity: None,
        min_gaps: None,
        warnings,
        error: None,
    };
    match trajectory(s) {
        Ok(traj) => {
            report.min_gaps = Some(
                traj.min_gaps().iter().zip(PAIRS).map(|(&(gap, t), pair)| GapEntry { pair, min_gap: gap, t }).collect(),
            );
            match report_from_trajectory(s, &traj) {
                Ok(r) => report.adiabaticity = Some(r),
                Err(e) => report.error = Some(e.to_string()),
            }
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    let status = if report.error.is_some() { Status::Partial } else { Status::Complete };
    Ok(Outcome { files: vec![("check.json".into(), json_bytes(&report)?)], status })
}
