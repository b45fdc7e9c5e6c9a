//! Exact propagation, Ramsey readout and shot noise.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, wrap_angle, CVec3, Mat3, ZERO};
use crate::model::ScenarioConfig;
use crate::phases::{check_gap_floor, ledger_from_trajectory};
use crate::spinham::{diagonalize, hamiltonian_at, trajectory};

/// Largest ‖H‖Δt accepted per step, rad.
pub const MAX_NORM_DT: f64 = 0.1;

/// Monte Carlo repetitions used by [`ramsey_phase`].
pub const DEFAULT_TRIALS: usize = 1000;

/// Smallest |sin ΔΨ| for which the fringe can be inverted.
pub const FRINGE_CUTOFF: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// Amplitudes on (|+1⟩, |0⟩, |−1⟩).
    pub amps: CVec3,
}

impl StateVector {
    pub fn new(amps: CVec3) -> Result<Self> {
        let n = norm(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("state vector must have finite nonzero norm".into()));
        }
        Ok(Self { amps: amps.map(|z| z / n) })
    }

    /// |m⟩ for m ∈ {+1, 0, −1}.
    pub fn basis(m: i32) -> Result<Self> {
        let mut amps = [ZERO; 3];
        match m {
            1 => amps[0] = C64::new(1.0, 0.0),
            0 => amps[1] = C64::new(1.0, 0.0),
            -1 => amps[2] = C64::new(1.0, 0.0),
            _ => return Err(Error::InvalidArgument(format!("m = {m} is not a spin-1 projection"))),
        }
        Ok(Self { amps })
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }
}

/// exp(−iHΔt)ψ through the spectral decomposition of H.
fn step(h: &Mat3, dt: f64, psi: &CVec3) -> Result<CVec3> {
    let spec = diagonalize(h)?;
    let norm_dt = spec.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) * dt.abs();
    if norm_dt >= MAX_NORM_DT {
        return Err(Error::StepTooCoarse { norm_dt });
    }
    let mut out = [ZERO; 3];
    for (lam, v) in spec.values.iter().zip(&spec.vectors) {
        let c = inner(v, psi) * C64::from_polar(1.0, -lam * dt);
        for i in 0..3 {
            out[i] += v[i] * c;
        }
    }
    Ok(out)
}

/// Evolves ψ from `t0` to `t1` in `substeps` midpoint-exponential steps.
pub fn propagate(s: &ScenarioConfig, psi0: StateVector, t0: f64, t1: f64, substeps: usize) -> Result<StateVector> {
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be positive".into()));
    }
    let dt = (t1 - t0) / substeps as f64;
    let mut psi = psi0.amps;
    for k in 0..substeps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        psi = step(&hamiltonian_at(s, t_mid).h, dt, &psi)?;
    }
    Ok(StateVector { amps: psi })
}

/// Population left in the tracked eigenstate after one period.
pub fn adiabatic_fidelity(s: &ScenarioConfig, branch: usize) -> Result<f64> {
    if branch > 2 {
        return Err(Error::InvalidArgument(format!("branch {branch} out of range")));
    }
    let traj = trajectory(s)?;
    check_gap_floor(s, &traj)?;
    let start = StateVector { amps: *traj.frames[0].branch_vector(branch) };
    let end = propagate(s, start, 0.0, traj.period, s.steps_per_period)?;
    let target = traj.frames.last().expect("nonempty").branch_vector(branch);
    Ok(inner(target, &end.amps).norm_sqr())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyResult {
    /// Whole periods in the measurement time.
    pub n_periods: u64,
    /// Measurement time discarded by rounding down to whole periods, s.
    pub discarded_time: f64,
    /// ΔΨ accumulated in one period, rad.
    pub per_period: f64,
    /// Noise-free ΔΨ over the measurement, rad (not reduced).
    pub delta_psi_true: f64,
    pub p_bright: f64,
    /// Per-trial estimates of ΔΨ reduced to (−π, π]; empty at a fringe extremum.
    pub delta_psi_estimates: Vec<f64>,
    /// None when the operating point sits on a fringe extremum.
    pub estimator_std: Option<f64>,
}

/// Whole periods contained in the measurement time.
pub fn whole_periods(s: &ScenarioConfig) -> Result<u64> {
    let ratio = s.measurement_time / s.period();
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::InvalidConfig(format!("measurement time / period = {ratio}")));
    }
    // Absorb representation error when T_m is meant as an exact multiple.
    let n = (ratio * (1.0 + 4.0 * f64::EPSILON)).floor();
    if n < 1.0 {
        return Err(Error::InvalidConfig("measurement time shorter than one period".into()));
    }
    Ok(n as u64)
}

/// Ramsey readout of the |±1⟩ pair with [`DEFAULT_TRIALS`] shot-noise trials.
pub fn ramsey_phase(s: &ScenarioConfig) -> Result<RamseyResult> {
    ramsey_phase_with_trials(s, DEFAULT_TRIALS)
}

pub fn ramsey_phase_with_trials(s: &ScenarioConfig, trials: usize) -> Result<RamseyResult> {
    let n = whole_periods(s)?;
    let ledger = ledger_from_trajectory(s, &trajectory(s)?)?;
    let per_period = ledger.total(0) - ledger.total(1);
    let delta_psi_true = n as f64 * per_period;
    let reduced = wrap_angle(delta_psi_true);
    let p_bright = 0.5 * (1.0 + reduced.cos());
    let (delta_psi_estimates, estimator_std) = match shot_noise_estimates(reduced, s.spin_count, trials, s.seed) {
        Ok(est) => {
            let sd = sample_std(&est);
            (est, Some(sd))
        }
        Err(Error::FringeExtremum { .. }) => (Vec::new(), None),
        Err(e) => return Err(e),
    };
    Ok(RamseyResult {
        n_periods: n,
        discarded_time: s.measurement_time - n as f64 * s.period(),
        per_period,
        delta_psi_true,
        p_bright,
        delta_psi_estimates,
        estimator_std,
    })
}

/// Per-period ΔΨ from the adiabatic phases and from exact propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCrossCheck {
    pub adiabatic: f64,
    pub propagated: f64,
    /// Smaller of the two branch fidelities.
    pub fidelity: f64,
}

impl PhaseCrossCheck {
    pub fn discrepancy(&self) -> f64 {
        wrap_angle(self.adiabatic - self.propagated).abs()
    }
}

pub fn ramsey_cross_check(s: &ScenarioConfig) -> Result<PhaseCrossCheck> {
    let traj = trajectory(s)?;
    let ledger = ledger_from_trajectory(s, &traj)?;
    let mut phase = [0.0; 2];
    let mut fidelity = 1.0f64;
    for b in 0..2 {
        let v0 = StateVector { amps: *traj.frames[0].branch_vector(b) };
        let end = propagate(s, v0, 0.0, traj.period, s.steps_per_period)?;
        let amp = v0.overlap(&end);
        phase[b] = amp.arg();
        fidelity = fidelity.min(amp.norm_sqr());
    }
    Ok(PhaseCrossCheck {
        adiabatic: wrap_angle(ledger.total(0) - ledger.total(1)),
        propagated: wrap_angle(phase[0] - phase[1]),
        fidelity,
    })
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Per-trial ΔΨ estimates from binomial bright counts.
///
/// Trial `k` draws from its own ChaCha8 stream, so the list does not depend
/// on how trials are scheduled.
pub fn shot_noise_estimates(delta_psi: f64, n_spins: u64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    if n_spins == 0 {
        return Err(Error::InvalidArgument("spin count must be positive".into()));
    }
    let reduced = wrap_angle(delta_psi);
    let sin = reduced.sin();
    if sin.abs() < FRINGE_CUTOFF {
        return Err(Error::FringeExtremum { sin });
    }
    let p = (0.5 * (1.0 + reduced.cos())).clamp(0.0, 1.0);
    let dist = Binomial::new(n_spins, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let branch = sin.signum();
    Ok((0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let bright = dist.sample(&mut rng);
            let p_hat = bright as f64 / n_spins as f64;
            branch * (2.0 * p_hat - 1.0).clamp(-1.0, 1.0).acos()
        })
        .collect())
}

/// Sample standard deviation of the shot-noise-limited ΔΨ estimator.
pub fn shot_noise_mc(delta_psi: f64, n_spins: u64, trials: usize, seed: u64) -> Result<f64> {
    Ok(sample_std(&shot_noise_estimates(delta_psi, n_spins, trials, seed)?))
}
