//! Cyclic complex Jacobi diagonalisation of 3×3 Hermitian matrices.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{CVec3, Mat3, ZERO};

const MAX_SWEEPS: usize = 60;
const OFF_TOL: f64 = 1e-14;

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub values: [f64; 3],
    pub vectors: [CVec3; 3],
}

fn off_norm(a: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                s += a.0[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalises a Hermitian 3×3 matrix.
///
/// Each rotation first removes the phase of the pivot element with a
/// diagonal unitary, then applies the standard real Jacobi rotation. Sweeps
/// continue until the off-diagonal Frobenius norm is below 1e−14·‖h‖.
pub fn diagonalize(h: &Mat3) -> Result<Spectrum> {
    let scale = h.frobenius();
    let defect = h.hermiticity_defect();
    if defect > 1e-12 * h.max_abs() {
        return Err(Error::NotHermitian { deviation: defect });
    }
    if scale == 0.0 {
        return Ok(sorted([0.0; 3], Mat3::identity()));
    }

    let mut a = *h;
    // Symmetrise away representational noise on the diagonal.
    for i in 0..3 {
        a.0[i][i] = C64::new(a.0[i][i].re, 0.0);
    }
    let mut v = Mat3::identity();
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= OFF_TOL * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a.0[p][q];
            let mag = apq.norm();
            if mag == 0.0 {
                continue;
            }
            let phase = apq / mag;
            let (app, aqq) = (a.0[p][p].re, a.0[q][q].re);
            let tau = (aqq - app) / (2.0 * mag);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            // U = D·R with D = diag(1 at p, e^{-iφ} at q).
            let mut u = Mat3::identity();
            u.0[p][p] = C64::new(c, 0.0);
            u.0[p][q] = C64::new(s, 0.0);
            u.0[q][p] = -phase.conj() * s;
            u.0[q][q] = phase.conj() * c;
            a = u.adjoint() * a * u;
            a.0[p][q] = ZERO;
            a.0[q][p] = ZERO;
            for i in 0..3 {
                a.0[i][i] = C64::new(a.0[i][i].re, 0.0);
            }
            v = v * u;
        }
    }
    let off = off_norm(&a);
    if off > 1e-12 * scale {
        // Not reached for finite Hermitian input; kept as a hard stop.
        return Err(Error::NotHermitian { deviation: off });
    }
    Ok(sorted([a.0[0][0].re, a.0[1][1].re, a.0[2][2].re], v))
}

fn sorted(values: [f64; 3], v: Mat3) -> Spectrum {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    Spectrum { values: idx.map(|i| values[i]), vectors: idx.map(|i| v.column(i)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, norm, sub, ONE};
    use proptest::prelude::*;

    fn residual(h: &Mat3, s: &Spectrum) -> f64 {
        (0..3)
            .map(|n| {
                let hv = h.mul_vec(&s.vectors[n]);
                let lv = s.vectors[n].map(|z| z * s.values[n]);
                norm(&sub(&hv, &lv))
            })
            .fold(0.0, f64::max)
    }

    fn hermitian(re: [f64; 6], im: [f64; 3]) -> Mat3 {
        let mut m = Mat3::zeros();
        m.0[0][0] = C64::new(re[0], 0.0);
        m.0[1][1] = C64::new(re[1], 0.0);
        m.0[2][2] = C64::new(re[2], 0.0);
        let off = [(0, 1), (0, 2), (1, 2)];
        for (k, (i, j)) in off.into_iter().enumerate() {
            m.0[i][j] = C64::new(re[3 + k], im[k]);
            m.0[j][i] = m.0[i][j].conj();
        }
        m
    }

    #[test]
    fn diagonal_input() {
        let h = Mat3::diag([C64::new(1.0, 0.0), C64::new(3.0, 0.0), C64::new(-2.0, 0.0)]);
        let s = diagonalize(&h).unwrap();
        assert_eq!(s.values, [3.0, 1.0, -2.0]);
        assert_eq!(s.vectors[0], [ZERO, ONE, ZERO]);
        assert_eq!(s.vectors[1], [ONE, ZERO, ZERO]);
        assert_eq!(s.vectors[2], [ZERO, ZERO, ONE]);
    }

    #[test]
    fn transverse_field_symmetry_vector() {
        // b_z = b_y = 0: (1, 0, −1)/√2 is an eigenvector with eigenvalue Q′.
        let q = 2.3;
        let gval = 0.9;
        let ops = super::super::SpinOperators::new();
        let h = Mat3::diag([C64::new(q, 0.0), ZERO, C64::new(q, 0.0)]) + ops.dot([gval * 2f64.sqrt(), 0.0, 0.0]);
        let s = diagonalize(&h).unwrap();
        let target = [C64::new(1.0, 0.0), ZERO, C64::new(-1.0, 0.0)].map(|z| z / 2f64.sqrt());
        let hit = (0..3).find(|&n| (s.values[n] - q).abs() < 1e-13).expect("eigenvalue Q′ present");
        assert!((inner(&target, &s.vectors[hit]).norm() - 1.0).abs() < 1e-13);
        // Remaining pair from [[Q′, √2 g], [√2 g, 0]].
        let c = 2f64.sqrt() * gval;
        let disc = (q * q / 4.0 + c * c).sqrt();
        let mut rest: Vec<f64> = (0..3).filter(|&n| n != hit).map(|n| s.values[n]).collect();
        rest.sort_by(|a, b| b.total_cmp(a));
        assert!((rest[0] - (q / 2.0 + disc)).abs() < 1e-13);
        assert!((rest[1] - (q / 2.0 - disc)).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = Mat3::identity();
        h.0[0][1] = C64::new(1.0, 0.0);
        assert!(matches!(diagonalize(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exact_degeneracy() {
        let h = Mat3::identity().scale_re(4.0);
        let s = diagonalize(&h).unwrap();
        assert_eq!(s.values, [4.0; 3]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn spectrum_invariants(
            re in prop::array::uniform6(-10.0f64..10.0),
            im in prop::array::uniform3(-10.0f64..10.0),
        ) {
            let h = hermitian(re, im);
            let s = diagonalize(&h).unwrap();
            let scale = h.frobenius();
            prop_assert!(residual(&h, &s) <= 1e-11 * scale);
            let tr: f64 = s.values.iter().sum();
            prop_assert!((tr - h.trace().re).abs() <= 1e-11 * scale);
            let fro: f64 = s.values.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((fro - scale).abs() <= 1e-11 * scale);
            for i in 0..3 {
                for j in 0..3 {
                    let d = inner(&s.vectors[i], &s.vectors[j]).norm();
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((d - e).abs() <= 1e-12);
                }
            }
            prop_assert!(s.values[0] >= s.values[1] && s.values[1] >= s.values[2]);
        }
    }
}
