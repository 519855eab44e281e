use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compiler::{Circuit, Gate, ZFrame};
use crate::error::{Error, Result};
use crate::su2::Mat2;

pub const MAX_REFERENCE_QUBITS: usize = 12;

/// `2^n` amplitudes over `|b_0 … b_{n-1}>` (`0` = g, `1` = r); `b_0` is the
/// most significant bit of the index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl LogicalState {
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::default(); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// The post-initialization state `|1…1>`.
    pub fn ones(n: usize) -> Self {
        Self::basis(n, (1 << n) - 1)
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1 << n, "amplitude count must be 2^n");
        Self { n, amps }
    }

    /// Tensor product of single-qubit states `(a_g, a_r)`, qubit 0 first.
    pub fn product(qubits: &[(Complex64, Complex64)]) -> Self {
        let n = qubits.len();
        let amps = (0..1usize << n)
            .map(|idx| {
                qubits
                    .iter()
                    .enumerate()
                    .map(|(q, &(g, r))| if Self::bit_of(n, idx, q) { r } else { g })
                    .product()
            })
            .collect();
        Self { n, amps }
    }

    #[inline]
    pub fn bit_of(n: usize, index: usize, q: usize) -> bool {
        index >> (n - 1 - q) & 1 == 1
    }

    pub fn bitstring(&self, index: usize) -> String {
        (0..self.n)
            .map(|q| {
                if Self::bit_of(self.n, index, q) {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr().min(1.0)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_single(&mut self, q: usize, m: &Mat2) {
        let stride = 1 << (self.n - 1 - q);
        for idx in 0..self.amps.len() {
            if idx & stride == 0 {
                let (g, r) = (self.amps[idx], self.amps[idx | stride]);
                self.amps[idx] = m[(0, 0)] * g + m[(0, 1)] * r;
                self.amps[idx | stride] = m[(1, 0)] * g + m[(1, 1)] * r;
            }
        }
    }

    /// `1 - 2|gg><gg|` on the pair.
    pub fn apply_cz(&mut self, q1: usize, q2: usize) {
        for idx in 0..self.amps.len() {
            if !Self::bit_of(self.n, idx, q1) && !Self::bit_of(self.n, idx, q2) {
                self.amps[idx] = -self.amps[idx];
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        match *g {
            Gate::Cz { q1, q2 } => self.apply_cz(q1, q2),
            Gate::Rot { q, .. } | Gate::Z { q, .. } => {
                self.apply_single(q, &g.matrix().expect("single-qubit gate"))
            }
        }
    }
}

/// Circuit applied to the post-initialization state `|1…1>`.
pub fn reference_simulate(c: &Circuit) -> Result<LogicalState> {
    c.validate()?;
    if c.n > MAX_REFERENCE_QUBITS {
        return Err(Error::TooManyQubits {
            n: c.n,
            max: MAX_REFERENCE_QUBITS,
        });
    }
    let mut s = LogicalState::ones(c.n);
    for g in &c.gates {
        s.apply_gate(g);
    }
    Ok(s)
}

/// Multiply each basis amplitude by `Π_q e^{iβ_q b_q}`.
pub fn apply_frame(state: &LogicalState, frame: &ZFrame) -> LogicalState {
    let mut out = state.clone();
    for (idx, a) in out.amps.iter_mut().enumerate() {
        let phase: f64 = (0..state.n)
            .filter(|&q| LogicalState::bit_of(state.n, idx, q))
            .map(|q| frame.beta[q])
            .sum();
        *a *= Complex64::from_polar(1.0, phase);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn reference_examples() {
        let empty = Circuit::new(1, vec![]);
        assert_eq!(
            reference_simulate(&empty).unwrap(),
            LogicalState::basis(1, 1)
        );
        let flip = Circuit::new(
            1,
            vec![Gate::Rot {
                q: 0,
                phi: 0.0,
                alpha: PI,
            }],
        );
        assert!((reference_simulate(&flip).unwrap().amps[0].norm() - 1.0).abs() < 1e-15);
        let big = Circuit::new(13, vec![]);
        assert!(matches!(
            reference_simulate(&big),
            Err(Error::TooManyQubits { n: 13, .. })
        ));
    }

    #[test]
    fn cz_marks_only_gg() {
        let h = Complex64::new(0.5, 0.0);
        let mut s = LogicalState::from_amplitudes(2, vec![h; 4]);
        s.apply_cz(0, 1);
        assert_eq!(s.amps, vec![-h, h, h, h]);
    }

    #[test]
    fn indexing_puts_qubit_zero_first() {
        let s = LogicalState::product(&[
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        ]);
        assert_eq!(s.amps[0b10], Complex64::new(1.0, 0.0));
        assert_eq!(s.bitstring(0b10), "10");
        let mut t = LogicalState::basis(2, 0);
        t.apply_single(1, &su2::pauli_x());
        assert_eq!(t.amps[0b01], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn frame_examples() {
        let plus = LogicalState::from_amplitudes(1, vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2]);
        assert_eq!(apply_frame(&plus, &ZFrame::zero(1)), plus);
        let minus = apply_frame(&plus, &ZFrame { beta: vec![PI] });
        assert!((minus.amps[1] + Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let s = LogicalState::from_amplitudes(
            2,
            vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.5, 0.1),
                Complex64::new(0.3, 0.3),
                Complex64::new(0.0, -0.7),
            ],
        );
        let f = apply_frame(
            &s,
            &ZFrame {
                beta: vec![0.4, 2.2],
            },
        );
        for (p, q) in s.probabilities().iter().zip(f.probabilities()) {
            assert!((p - q).abs() < 1e-15);
        }
    }
}
