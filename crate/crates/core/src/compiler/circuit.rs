use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{self, wrap_angle, Mat2};

/// Native logical gates. `Rot(q, φ, α)` is `exp(-iα(cos φ X + sin φ Y)/2)`,
/// `Z(q, β)` is `exp(-iβZ/2)`, `Cz` is `1 - 2|gg><gg|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Gate {
    Rot { q: usize, phi: f64, alpha: f64 },
    Cz { q1: usize, q2: usize },
    Z { q: usize, beta: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rot { q, .. } | Gate::Z { q, .. } => vec![q],
            Gate::Cz { q1, q2 } => vec![q1.min(q2), q1.max(q2)],
        }
    }

    /// Single-qubit matrix, `None` for CZ.
    pub fn matrix(&self) -> Option<Mat2> {
        match *self {
            Gate::Rot { phi, alpha, .. } => Some(su2::rotation(phi, alpha)),
            Gate::Z { beta, .. } => Some(su2::rz(beta)),
            Gate::Cz { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Self {
        Self { id: None, n, gates }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidCircuit(
                "circuit needs at least one qubit".into(),
            ));
        }
        for (i, g) in self.gates.iter().enumerate() {
            let bad = |why: String| Error::InvalidCircuit(format!("gate {i}: {why}"));
            for q in g.qubits() {
                if q >= self.n {
                    return Err(bad(format!("qubit {q} out of range for n = {}", self.n)));
                }
            }
            match *g {
                Gate::Cz { q1, q2 } if q1.abs_diff(q2) != 1 => {
                    return Err(bad(format!("cz({q1}, {q2}) is not nearest-neighbour")));
                }
                Gate::Rot { phi, alpha, .. } if !(phi.is_finite() && alpha.is_finite()) => {
                    return Err(bad("non-finite rotation parameter".into()));
                }
                Gate::Z { beta, .. } if !beta.is_finite() => {
                    return Err(bad("non-finite phase".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// As-soon-as-possible layering; every gate, including `Z`, occupies its
    /// qubits for one layer, so per-qubit order is preserved.
    pub fn layers(&self) -> Vec<Vec<Gate>> {
        self.layer_indices()
            .into_iter()
            .map(|l| l.into_iter().map(|i| self.gates[i].clone()).collect())
            .collect()
    }

    /// [`Circuit::layers`] as gate indices.
    pub fn layer_indices(&self) -> Vec<Vec<usize>> {
        let mut free_at = vec![0usize; self.n];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            let layer = qs.iter().map(|&q| free_at[q]).max().unwrap_or(0);
            for &q in &qs {
                free_at[q] = layer + 1;
            }
            if layers.len() <= layer {
                layers.resize_with(layer + 1, Vec::new);
            }
            layers[layer].push(i);
        }
        layers
    }

    pub fn depth(&self) -> usize {
        self.layers().len()
    }
}

/// `U = e^{-iβZ/2} · U(φ, α)` up to global phase, with `α ∈ [0, π]`.
pub fn euler_decompose(u: &Mat2) -> (f64, f64, f64) {
    let det = u.determinant();
    let su = u / det.sqrt();
    let (a, b) = (su[(0, 0)], su[(0, 1)]);
    let c = a.norm().min(1.0);
    let alpha = 2.0 * c.acos();
    let s = (alpha / 2.0).sin();
    let beta = if c > 1e-12 { -2.0 * a.arg() } else { 0.0 };
    let phi = if s > 1e-12 {
        // b = -i s e^{-i(φ + β/2)}
        let psi = -(b * num_complex::Complex64::new(0.0, 1.0)).arg();
        psi - beta / 2.0
    } else {
        0.0
    };
    (wrap_angle(beta), wrap_angle(phi), alpha)
}

/// Accumulated per-qubit phase: logical = `diag(1, e^{iβ_q})` · physical.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZFrame {
    pub beta: Vec<f64>,
}

impl ZFrame {
    pub fn zero(n: usize) -> Self {
        Self { beta: vec![0.0; n] }
    }

    pub fn add(&mut self, q: usize, delta: f64) {
        self.beta[q] = wrap_angle(self.beta[q] + delta);
    }

    pub fn add_all(&mut self, delta: f64) {
        for q in 0..self.beta.len() {
            self.add(q, delta);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn rebuild(t: (f64, f64, f64)) -> Mat2 {
        su2::rz(t.0) * su2::rotation(t.1, t.2)
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_decompose(&su2::identity()), (0.0, 0.0, 0.0));
        let (b, p, a) = euler_decompose(&su2::rotation(0.0, 1.2));
        assert!(b.abs() < 1e-12 && p.abs() < 1e-12 && (a - 1.2).abs() < 1e-12);
        let h = (su2::pauli_x() + su2::pauli_z()) * num_complex::Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(su2::phase_distance(&rebuild(euler_decompose(&h)), &h) < 1e-12);
        let (_, _, a) = euler_decompose(&su2::rz(0.7));
        assert_eq!(a, 0.0);
    }

    proptest! {
        #[test]
        fn euler_reconstructs(b in -7.0f64..7.0, p in -7.0f64..7.0, a in 0.0f64..6.3, chi in 0.0f64..6.3) {
            let u = su2::rz(b) * su2::rotation(p, a) * num_complex::Complex64::from_polar(1.0, chi);
            prop_assert!(su2::phase_distance(&rebuild(euler_decompose(&u)), &u) < 1e-12);
        }
    }

    #[test]
    fn json_shape_and_validation() {
        let text = r#"{"n":2,"gates":[{"type":"rot","q":0,"phi":1.5707963267948966,"alpha":1.5707963267948966},{"type":"cz","q1":0,"q2":1},{"type":"z","q":1,"beta":0.5}]}"#;
        let c = Circuit::from_json(text).unwrap();
        assert_eq!(c.gates.len(), 3);
        assert_eq!(serde_json::to_string(&c).unwrap(), text);
        assert!(Circuit::from_json(r#"{"n":3,"gates":[{"type":"cz","q1":0,"q2":2}]}"#).is_err());
        assert!(
            Circuit::from_json(r#"{"n":1,"gates":[{"type":"rot","q":1,"phi":0,"alpha":1}]}"#)
                .is_err()
        );
        assert!(Circuit::from_json(r#"{"n":1,"gates":[{"type":"spin","q":0}]}"#).is_err());
    }

    #[test]
    fn layering_is_asap() {
        let c = Circuit::new(
            3,
            vec![
                Gate::Rot {
                    q: 0,
                    phi: 0.0,
                    alpha: PI,
                },
                Gate::Rot {
                    q: 2,
                    phi: 0.0,
                    alpha: PI,
                },
                Gate::Cz { q1: 0, q2: 1 },
                Gate::Z { q: 2, beta: 1.0 },
                Gate::Cz { q1: 1, q2: 2 },
            ],
        );
        let layers = c.layers();
        assert_eq!(layers.len(), 3);
        assert_eq!(layers[0].len(), 2);
        assert_eq!(layers[1].len(), 2);
        assert_eq!(layers[2], vec![Gate::Cz { q1: 1, q2: 2 }]);
    }

    #[test]
    fn frame_wraps() {
        let mut f = ZFrame::zero(2);
        f.add(0, 3.0 * PI);
        f.add_all(PI);
        assert!(f.beta[0].abs() < 1e-12 || (f.beta[0] - 2.0 * PI).abs() < 1e-12);
        assert!((f.beta[1] - PI).abs() < 1e-12);
    }
}
