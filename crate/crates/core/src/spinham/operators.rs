use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::linalg::{Mat3, ONE, ZERO};

/// Spin-1 operators in the basis (|+1⟩, |0⟩, |−1⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOperators {
    pub iz: Mat3,
    pub ix: Mat3,
    pub iy: Mat3,
    pub iplus: Mat3,
    pub iminus: Mat3,
}

impl SpinOperators {
    pub fn new() -> Self {
        let s = C64::new(2f64.sqrt(), 0.0);
        // I₊|m⟩ = √2 |m+1⟩ for spin 1.
        let iplus = Mat3([[ZERO, s, ZERO], [ZERO, ZERO, s], [ZERO, ZERO, ZERO]]);
        let iminus = iplus.adjoint();
        let ix = (iplus + iminus).scale_re(0.5);
        let iy = (iplus - iminus).scale(C64::new(0.0, -0.5));
        let iz = Mat3::diag([ONE, ZERO, -ONE]);
        Self { iz, ix, iy, iplus, iminus }
    }

    /// g·I for a precession-rate vector g (rad/s).
    pub fn dot(&self, g: [f64; 3]) -> Mat3 {
        spin_dot(g)
    }
}

/// g·I written out directly.
pub fn spin_dot(g: [f64; 3]) -> Mat3 {
    let (gx, gy, gz) = (g[0], g[1], g[2]);
    let off = C64::new(gx, -gy) * FRAC_1_SQRT_2;
    Mat3([[C64::new(gz, 0.0), off, ZERO], [off.conj(), ZERO, off], [ZERO, off.conj(), C64::new(-gz, 0.0)]])
}

impl Default for SpinOperators {
    fn default() -> Self {
        Self::new()
    }
}
