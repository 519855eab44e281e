use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logical::LogicalState;
use crate::error::{Error, Result};

/// Largest channel-to-unitary distance accepted as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-6;
pub const MAX_TOMOGRAPHY_QUBITS: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct TomographyResult {
    /// Closest unitary, with its global phase fixed so the largest entry of
    /// the first non-zero column is real and positive.
    pub unitary: DMatrix<Complex64>,
    /// Frobenius distance between the normalised Choi matrices of the
    /// reconstructed channel and of `unitary`.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographySummary {
    pub distance: f64,
    pub unitary: Vec<Vec<[f64; 2]>>,
}

impl TomographyResult {
    pub fn summary(&self) -> TomographySummary {
        TomographySummary {
            distance: self.distance,
            unitary: (0..self.unitary.nrows())
                .map(|i| {
                    (0..self.unitary.ncols())
                        .map(|j| [self.unitary[(i, j)].re, self.unitary[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }
}

fn single_inputs() -> [(Complex64, Complex64); 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        (Complex64::new(1.0, 0.0), Complex64::default()),
        (Complex64::default(), Complex64::new(1.0, 0.0)),
        (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
        (Complex64::new(h, 0.0), Complex64::new(0.0, h)),
    ]
}

/// The `4^n` product inputs `{|0>, |1>, |+>, |+i>}^{⊗n}`.
pub fn tomography_inputs(n: usize) -> Vec<LogicalState> {
    let singles = single_inputs();
    (0..4usize.pow(n as u32))
        .map(|mut code| {
            let mut qs = vec![singles[0]; n];
            for q in (0..n).rev() {
                qs[q] = singles[code % 4];
                code /= 4;
            }
            LogicalState::product(&qs)
        })
        .collect()
}

fn density(s: &LogicalState) -> DMatrix<Complex64> {
    let v = nalgebra::DVector::from_vec(s.amps.clone());
    &v * v.adjoint()
}

fn vec_of(m: &DMatrix<Complex64>) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_iterator(m.len(), m.iter().copied())
}

/// Reconstruct the logical channel of `run` by linear inversion over the
/// product inputs and return the closest unitary.
pub fn process_tomography<F>(n: usize, run: F) -> Result<TomographyResult>
where
    F: Fn(&LogicalState) -> Result<LogicalState> + Sync,
{
    if n == 0 || n > MAX_TOMOGRAPHY_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_TOMOGRAPHY_QUBITS,
        });
    }
    let d = 1usize << n;
    let d2 = d * d;
    let inputs = tomography_inputs(n);
    let outputs: Vec<LogicalState> = inputs.par_iter().map(&run).collect::<Result<_>>()?;

    let mut a_in = DMatrix::<Complex64>::zeros(d2, d2);
    let mut a_out = DMatrix::<Complex64>::zeros(d2, d2);
    for (i, (x, y)) in inputs.iter().zip(&outputs).enumerate() {
        a_in.set_column(i, &vec_of(&density(x)));
        a_out.set_column(i, &vec_of(&density(y)));
    }
    let a_in_inv = a_in
        .try_inverse()
        .expect("tomography inputs span operator space");
    let lambda = a_out * a_in_inv;

    // Choi matrix: block (i, j) is the image of |i><j|.
    let mut choi = DMatrix::<Complex64>::zeros(d2, d2);
    for i in 0..d {
        for j in 0..d {
            let mut e = DMatrix::<Complex64>::zeros(d, d);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let img = &lambda * vec_of(&e);
            for a in 0..d {
                for b in 0..d {
                    // Column-major vec: entry (a, b) sits at b * d + a.
                    choi[(i * d + a, j * d + b)] = img[b * d + a];
                }
            }
        }
    }
    let choi = (&choi + choi.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = choi.clone().symmetric_eigen();
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty spectrum");
    let v = eig.eigenvectors.column(top);
    let mut kraus = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        for a in 0..d {
            kraus[(a, i)] = v[i * d + a];
        }
    }
    let svd = kraus.svd(true, true);
    let mut u = svd.u.expect("left vectors") * svd.v_t.expect("right vectors");
    fix_phase(&mut u);

    let mut choi_u = DMatrix::<Complex64>::zeros(d2, d2);
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    choi_u[(i * d + a, j * d + b)] = u[(a, i)] * u[(b, j)].conj();
                }
            }
        }
    }
    let distance = (choi - choi_u).norm() / d as f64;
    if distance > UNITARITY_TOLERANCE || distance.is_nan() {
        return Err(Error::NonUnitaryChannel { distance });
    }
    Ok(TomographyResult {
        unitary: u,
        distance,
    })
}

fn fix_phase(u: &mut DMatrix<Complex64>) {
    let pivot = u
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()));
    if let Some(p) = pivot {
        if p.norm() > 0.0 {
            let phase = p.conj() / p.norm();
            *u *= phase;
        }
    }
}

/// `min_χ ||a - e^{iχ} b||_F` for square matrices of equal size.
pub fn phase_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    (a - b * phase).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2;

    fn as_dyn(m: &su2::Mat2) -> DMatrix<Complex64> {
        DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
    }

    #[test]
    fn recovers_single_qubit_unitaries() {
        for (phi, theta) in [
            (0.0, 0.0),
            (0.3, 1.0),
            (2.0, std::f64::consts::PI),
            (5.0, 4.0),
        ] {
            let m = su2::rotation(phi, theta) * Complex64::from_polar(1.0, 0.4);
            let r = process_tomography(1, |s| {
                let mut out = s.clone();
                out.apply_single(0, &m);
                Ok(out)
            })
            .unwrap();
            assert!(r.distance < 1e-12);
            assert!(phase_distance(&r.unitary, &as_dyn(&m)) < 1e-12);
        }
    }

    #[test]
    fn recovers_cz() {
        let r = process_tomography(2, |s| {
            let mut out = s.clone();
            out.apply_cz(0, 1);
            Ok(out)
        })
        .unwrap();
        let cz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        assert!(phase_distance(&r.unitary, &cz) < 1e-12);
    }

    #[test]
    fn rejects_non_unitary_maps() {
        // Measure-and-prepare: every input goes to |0>.
        let r = process_tomography(1, |_| Ok(LogicalState::basis(1, 0)));
        assert!(matches!(r, Err(Error::NonUnitaryChannel { .. })));
    }

    #[test]
    fn input_count() {
        assert_eq!(tomography_inputs(1).len(), 4);
        assert_eq!(tomography_inputs(2).len(), 16);
        assert!(process_tomography(3, |s| Ok(s.clone())).is_err());
    }
}
