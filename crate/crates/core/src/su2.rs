//! Two-level algebra in the `(g, r)` basis.
//!
//! `Z = |g><g| - |r><r|`, `X = |r><g| + |g><r|`, and `Y = i X Z`, so that the
//! resonant rotation about the equatorial axis `phi` by angle `theta` is
//! `R(phi, theta) = exp(-i theta/2 (cos(phi) X + sin(phi) Y))`.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `R(phi, theta)`, the action of a resonant pulse of area `theta` and laser
/// phase `phi` on a single unblockaded two-level unit.
pub fn rotation(phi: f64, theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let off = Complex64::new(0.0, -s);
    Mat2::new(
        Complex64::new(c, 0.0),
        off * Complex64::from_polar(1.0, -phi),
        off * Complex64::from_polar(1.0, phi),
        Complex64::new(c, 0.0),
    )
}

/// `exp(-i beta Z / 2)`.
pub fn rz(beta: f64) -> Mat2 {
    Mat2::new(
        Complex64::from_polar(1.0, -beta / 2.0),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, beta / 2.0),
    )
}

/// `exp(-i theta/2 * P)` for an involutory Hermitian `P` (a Pauli or any
/// unit-axis combination of them).
pub fn exp_pauli(p: &Mat2, theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    identity() * Complex64::new(c, 0.0) - p * Complex64::new(0.0, s)
}

/// Frobenius distance `||a - b||_F`.
pub fn distance(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).norm()
}

/// Frobenius distance minimised over a global phase:
/// `min_chi ||a - e^{i chi} b||_F`.
pub fn phase_distance(a: &Mat2, b: &Mat2) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    (a - b * phase).norm()
}

/// Wrap an angle into `[0, 2 pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = x.rem_euclid(two_pi);
    if r >= two_pi {
        0.0
    } else {
        r
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_signed(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = wrap_angle(x);
    if r > pi {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

pub(crate) fn to_pairs(m: &Mat2) -> [[f64; 2]; 4] {
    [
        [m[(0, 0)].re, m[(0, 0)].im],
        [m[(0, 1)].re, m[(0, 1)].im],
        [m[(1, 0)].re, m[(1, 0)].im],
        [m[(1, 1)].re, m[(1, 1)].im],
    ]
}

pub(crate) fn from_pairs(p: &[[f64; 2]; 4]) -> Mat2 {
    let c = |i: usize| Complex64::new(p[i][0], p[i][1]);
    Mat2::new(c(0), c(1), c(2), c(3))
}

/// Serde adapter writing a [`Mat2`] as four `[re, im]` pairs in row-major order.
pub mod serde_mat2 {
    use super::{from_pairs, to_pairs, Mat2};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat2, s: S) -> Result<S::Ok, S::Error> {
        to_pairs(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat2, D::Error> {
        let p = <[[f64; 2]; 4]>::deserialize(d)?;
        Ok(from_pairs(&p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn series_exp(h: &Mat2, t: f64) -> Mat2 {
        // exp(-i t h) by plain Taylor series.
        let a = h * Complex64::new(0.0, -t);
        let mut term = identity();
        let mut sum = identity();
        for k in 1..60 {
            term = term * a / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        sum
    }

    #[test]
    fn rotation_matches_series_exponential() {
        for &(phi, theta) in &[(0.0, 0.3), (1.1, 2.0), (-0.7, 5.5), (PI, PI)] {
            let axis = pauli_x() * Complex64::new(phi.cos(), 0.0)
                + pauli_y() * Complex64::new(phi.sin(), 0.0);
            let exact = series_exp(&axis, theta / 2.0);
            assert!(distance(&rotation(phi, theta), &exact) < 1e-13);
        }
    }

    #[test]
    fn half_cycle_is_minus_i_x() {
        let m = rotation(0.0, PI);
        assert!(distance(&m, &(pauli_x() * Complex64::new(0.0, -1.0))) < 1e-15);
        assert!(distance(&rotation(0.3, 2.0 * PI), &(-identity())) < 1e-15);
        assert!(distance(&rotation(0.3, 4.0 * PI), &identity()) < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let xy = pauli_x() * pauli_y();
        assert!(distance(&xy, &(pauli_z() * I)) < 1e-15);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let m = rotation(0.4, 1.3);
        let shifted = m * Complex64::from_polar(1.0, 2.1);
        assert!(phase_distance(&m, &shifted) < 1e-14);
        assert!(distance(&m, &shifted) > 1.0);
    }
}
