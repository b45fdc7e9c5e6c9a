//! Spin-1 Hamiltonian in the rotating body frame, its eigensystem and
//! continuity-based branch tracking.
//!
//! The Hamiltonian is H = Q′ I_z² + γB′·I with B′ from [`crate::rotoframe`].
//! Eigenvalues are reported sorted (descending); branch identity is carried
//! separately through [`EigenFrame::branch_of_sorted`], because sorted order
//! swaps where two levels approach each other while the physical states
//! continue smoothly.

mod eigen;
mod operators;
mod tracking;

pub use eigen::{diagonalize, Spectrum};
pub use operators::{spin_dot, SpinOperators};
pub use tracking::{trajectory, Trajectory, PAIRS};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{inner, CVec3, Mat3};
use crate::model::ScenarioConfig;
use crate::rotoframe::{phase_at, phase_at_fraction, rate_vector, rate_vector_dot};

/// Branch indices are 0-based: 0 and 1 are the |±1⟩ pair, 2 is the
/// |0⟩-dominant level.
pub const ZERO_BRANCH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSample {
    pub t: f64,
    /// rad/s.
    pub h: Mat3,
    /// rad/s².
    pub hdot: Mat3,
}

fn assemble(s: &ScenarioConfig, psi: f64) -> (Mat3, Mat3) {
    let w_eff = s.omega_alpha_eff();
    let q = s.species.quad_split;
    let g = rate_vector(&s.rotation, w_eff, psi);
    let gdot = rate_vector_dot(&s.rotation, w_eff, psi);
    let mut h = spin_dot(g);
    h.0[0][0].re += q;
    h.0[2][2].re += q;
    (h, spin_dot(gdot))
}

/// H(t) and its analytic derivative.
pub fn hamiltonian_at(s: &ScenarioConfig, t: f64) -> HamiltonianSample {
    let (h, hdot) = assemble(s, phase_at(&s.rotation, t));
    HamiltonianSample { t, h, hdot }
}

/// H at fraction `x` of the period (phase computed without a detour through t).
pub fn hamiltonian_at_fraction(s: &ScenarioConfig, x: f64) -> HamiltonianSample {
    let (h, hdot) = assemble(s, phase_at_fraction(&s.rotation, x));
    HamiltonianSample { t: x * s.period(), h, hdot }
}

/// Eigensystem at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub t: f64,
    /// λ₁ ≥ λ₂ ≥ λ₃ in rad/s.
    pub values_sorted: [f64; 3],
    /// Unit eigenvectors, in sorted order.
    pub vectors: [CVec3; 3],
    /// Sorted index → persistent branch id.
    pub branch_of_sorted: [usize; 3],
}

impl EigenFrame {
    /// Sorted index carrying branch `b`.
    pub fn sorted_index(&self, b: usize) -> usize {
        self.branch_of_sorted.iter().position(|&x| x == b).expect("branch_of_sorted is a permutation")
    }

    pub fn branch_value(&self, b: usize) -> f64 {
        self.values_sorted[self.sorted_index(b)]
    }

    pub fn branch_vector(&self, b: usize) -> &CVec3 {
        &self.vectors[self.sorted_index(b)]
    }

    pub fn branch_vector_mut(&mut self, b: usize) -> &mut CVec3 {
        let i = self.sorted_index(b);
        &mut self.vectors[i]
    }

    /// Branch values indexed by branch id.
    pub fn branch_values(&self) -> [f64; 3] {
        [0, 1, 2].map(|b| self.branch_value(b))
    }
}

/// Makes the largest-magnitude component real and nonnegative.
fn canonical_gauge(v: &mut CVec3) {
    let k = (0..3).max_by(|&i, &j| v[i].norm_sqr().total_cmp(&v[j].norm_sqr())).unwrap_or(0);
    let m = v[k].norm();
    if m > 0.0 {
        let ph = v[k].conj() / m;
        for z in v.iter_mut() {
            *z *= ph;
        }
        v[k] = C64::new(v[k].re, 0.0);
    }
}

/// Sorted eigensystem with identity branch labels and canonical gauge.
pub fn eigensystem(hs: &HamiltonianSample) -> Result<EigenFrame> {
    let spec = diagonalize(&hs.h)?;
    let mut vectors = spec.vectors;
    vectors.iter_mut().for_each(canonical_gauge);
    Ok(EigenFrame { t: hs.t, values_sorted: spec.values, vectors, branch_of_sorted: [0, 1, 2] })
}

/// Labels a frame at branch birth: the level with the largest |0⟩ weight is
/// branch 2; the remaining two are branches 0 and 1 by descending energy.
pub fn label_initial(mut frame: EigenFrame) -> EigenFrame {
    let zero =
        (0..3).max_by(|&i, &j| frame.vectors[i][1].norm_sqr().total_cmp(&frame.vectors[j][1].norm_sqr())).unwrap_or(2);
    let mut next = 0;
    for i in 0..3 {
        if i == zero {
            frame.branch_of_sorted[i] = ZERO_BRANCH;
        } else {
            frame.branch_of_sorted[i] = next;
            next += 1;
        }
    }
    frame
}

/// Minimum assignment margin accepted by [`track_branches`].
pub const TRACKING_MARGIN: f64 = 0.1;

/// Carries branch labels from `prev` to `next_raw` by maximal overlap and
/// fixes each vector's phase so ⟨prev|next⟩ is real and positive.
pub fn track_branches(prev: &EigenFrame, next_raw: &EigenFrame) -> Result<EigenFrame> {
    let mut overlap = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            overlap[i][j] = inner(&prev.vectors[i], &next_raw.vectors[j]).norm();
        }
    }
    // Greedy assignment on the overlap-magnitude matrix.
    let mut assign = [usize::MAX; 3];
    let mut used_row = [false; 3];
    let mut used_col = [false; 3];
    for _ in 0..3 {
        let mut best = (-1.0, 0, 0);
        for i in (0..3).filter(|&i| !used_row[i]) {
            for j in (0..3).filter(|&j| !used_col[j]) {
                if overlap[i][j] > best.0 {
                    best = (overlap[i][j], i, j);
                }
            }
        }
        let (_, i, j) = best;
        assign[i] = j;
        used_row[i] = true;
        used_col[j] = true;
    }
    let margin = (0..3)
        .map(|i| {
            let chosen = overlap[i][assign[i]];
            let rival = (0..3).filter(|&j| j != assign[i]).map(|j| overlap[i][j]).fold(0.0, f64::max);
            chosen - rival
        })
        .fold(f64::INFINITY, f64::min);
    if margin < TRACKING_MARGIN {
        return Err(Error::AmbiguousTracking { t: next_raw.t, margin });
    }

    let mut out = *next_raw;
    for i in 0..3 {
        let j = assign[i];
        out.branch_of_sorted[j] = prev.branch_of_sorted[i];
        let ov = inner(&prev.vectors[i], &next_raw.vectors[j]);
        let m = ov.norm();
        if m > 0.0 {
            let ph = ov.conj() / m;
            out.vectors[j] = next_raw.vectors[j].map(|z| z * ph);
        }
    }
    Ok(out)
}
