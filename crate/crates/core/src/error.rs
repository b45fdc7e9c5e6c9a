use thiserror::Error;

/// Errors raised by the simulation pipeline.
///
/// Variants that describe physics (gap collapse, singular geometry) are
/// distinct from the ones describing numerics (coarse grids) so callers can
/// tell adiabatic breakdown apart from an under-resolved run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero divisor: {0}")]
    ZeroDivisor(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular geometry: |cos(beta - theta)| = {cos:.3e}")]
    SingularGeometry { cos: f64 },

    #[error("matrix is not Hermitian (max |h - h^H| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("ambiguous branch tracking at t = {t:.6e} s (assignment margin {margin:.3})")]
    AmbiguousTracking { t: f64, margin: f64 },

    #[error("branches do not close onto themselves after one period (t = {t:.6e} s)")]
    BranchPermutation { t: f64 },

    #[error(
        "eigenvalue gap {gap:.6e} rad/s between branches {pair:?} at t = {t:.6e} s is below the floor {floor:.6e} rad/s"
    )]
    GapFloorViolation { gap: f64, t: f64, pair: (usize, usize), floor: f64 },

    #[error("degenerate gap between branches {pair:?} at t = {t:.6e} s")]
    DegenerateGap { t: f64, pair: (usize, usize) },

    #[error("field azimuth jumped by {jump:.3} rad at t = {t:.6e} s; grid too coarse")]
    PhaseUnwrapFailure { t: f64, jump: f64 },

    #[error("trajectory endpoints differ by {gap:.3e}")]
    OpenTrajectory { gap: f64 },

    #[error("zeta = 0 makes the closed-form adiabaticity denominator vanish")]
    ZeroDenominator,

    #[error("step too coarse: max ||H|| dt = {norm_dt:.3e} rad (limit 0.1)")]
    StepTooCoarse { norm_dt: f64 },

    #[error("fringe extremum: |sin(delta_psi)| = {sin:.3e} leaves the phase estimator unusable")]
    FringeExtremum { sin: f64 },

    #[error("phase slope is zero")]
    ZeroSlope,

    #[error("phase slope unresolved: Richardson residual {residual:.3e} vs slope {slope:.3e}")]
    SlopeUnresolved { slope: f64, residual: f64 },

    #[error("no feasible point in the requested bounds")]
    NoFeasiblePoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
