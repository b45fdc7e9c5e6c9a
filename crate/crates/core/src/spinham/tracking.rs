use crate::error::{Error, Result};
use crate::model::ScenarioConfig;

use super::{eigensystem, hamiltonian_at_fraction, label_initial, track_branches, EigenFrame};

/// Maximum number of step halvings between two grid points.
const MAX_REFINE_DEPTH: u32 = 24;

/// Branch-tracked eigenframes over one closed period, t ∈ [0, T].
///
/// The grid is uniform in `steps_per_period` except where tracking needed
/// local refinement; `fractions[k]` is t_k/T.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub period: f64,
    pub fractions: Vec<f64>,
    pub frames: Vec<EigenFrame>,
}

/// Branch pairs in the order used by per-pair reports.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

impl Trajectory {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Smallest |λ_m − λ_n| per branch pair with the time it occurs.
    pub fn min_gaps(&self) -> [(f64, f64); 3] {
        let mut out = [(f64::INFINITY, 0.0); 3];
        for f in &self.frames {
            let v = f.branch_values();
            for (p, &(m, n)) in PAIRS.iter().enumerate() {
                let gap = (v[m] - v[n]).abs();
                if gap < out[p].0 {
                    out[p] = (gap, f.t);
                }
            }
        }
        out
    }
}

fn advance(
    s: &ScenarioConfig,
    prev: &EigenFrame,
    xa: f64,
    xb: f64,
    depth: u32,
    fractions: &mut Vec<f64>,
    frames: &mut Vec<EigenFrame>,
) -> Result<()> {
    let raw = eigensystem(&hamiltonian_at_fraction(s, xb))?;
    match track_branches(prev, &raw) {
        Ok(f) => {
            fractions.push(xb);
            frames.push(f);
            Ok(())
        }
        Err(Error::AmbiguousTracking { .. }) if depth < MAX_REFINE_DEPTH => {
            let mid = 0.5 * (xa + xb);
            advance(s, prev, xa, mid, depth + 1, fractions, frames)?;
            let p = *frames.last().expect("midpoint frame pushed");
            advance(s, &p, mid, xb, depth + 1, fractions, frames)
        }
        Err(e) => Err(e),
    }
}

/// Builds the tracked eigenframe trajectory of one period.
///
/// Tracking failures between grid points trigger local step halving. The
/// frame at t = T must map every branch back onto itself at t = 0.
pub fn trajectory(s: &ScenarioConfig) -> Result<Trajectory> {
    let m = s.steps_per_period;
    let first = label_initial(eigensystem(&hamiltonian_at_fraction(s, 0.0))?);
    let mut fractions = Vec::with_capacity(m + 1);
    let mut frames = Vec::with_capacity(m + 1);
    fractions.push(0.0);
    frames.push(first);
    for k in 0..m {
        let xa = k as f64 / m as f64;
        let xb = (k + 1) as f64 / m as f64;
        let prev = *frames.last().expect("nonempty");
        advance(s, &prev, xa, xb, 0, &mut fractions, &mut frames)?;
    }

    let last = frames.last().expect("nonempty");
    let closed = track_branches(last, &first)?;
    if closed.branch_of_sorted != first.branch_of_sorted {
        return Err(Error::BranchPermutation { t: last.t });
    }
    Ok(Trajectory { period: s.period(), fractions, frames })
}
