//! 2×2 gate matrices.
//!
//! Rotation convention: `R_j(θ) = exp(−i θ J/2)` for `J ∈ {X, Y, Z}`, so
//! `Ry` is real and `Ry(π)` maps |0⟩ to |1⟩.

use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
    }

    pub fn pauli_x() -> Self {
        Mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
    }

    pub fn rx(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Mat2([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
    }

    pub fn ry(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Mat2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
    }

    pub fn rz(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Mat2([[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]])
    }

    /// General single-qubit rotation, decomposed as
    /// `Rz(phi) Rx(−π/2) Rz(theta) Rx(π/2) Rz(lambda)`.
    pub fn u3(theta: f64, phi: f64, lambda: f64) -> Self {
        use std::f64::consts::FRAC_PI_2;
        Mat2::rz(phi)
            .mul(&Mat2::rx(-FRAC_PI_2))
            .mul(&Mat2::rz(theta))
            .mul(&Mat2::rx(FRAC_PI_2))
            .mul(&Mat2::rz(lambda))
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ])
    }

    pub fn determinant(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// U U† == I within `tol`, element-wise.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.mul(&self.adjoint());
        let id = Mat2::identity();
        for i in 0..2 {
            for j in 0..2 {
                if (p.0[i][j] - id.0[i][j]).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}
