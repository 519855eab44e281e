use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compiler::{Circuit, Gate};
use crate::error::Result;
use crate::su2::{self, Mat2};

/// Base seed of the random two-qubit circuits; circuit `i` uses `base + i`.
pub const CORPUS_SEED: u64 = 7_000;
pub const RANDOM_CIRCUITS: usize = 20;
pub const RANDOM_DEPTH: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub circuit: Circuit,
}

/// Shipped acceptance corpus.
pub const MANIFEST: &str = include_str!("../../data/corpus.json");

pub fn load_manifest(text: &str) -> Result<Vec<CorpusEntry>> {
    let entries: Vec<CorpusEntry> = serde_json::from_str(text)?;
    for e in &entries {
        e.circuit.validate()?;
    }
    Ok(entries)
}

pub fn shipped_corpus() -> Vec<CorpusEntry> {
    load_manifest(MANIFEST).expect("shipped manifest is valid")
}

/// Key identifying a 2x2 unitary up to global phase.
fn phase_key(m: &Mat2) -> Vec<i64> {
    let pivot = m
        .iter()
        .find(|z| z.norm() > 0.5)
        .copied()
        .unwrap_or_default();
    let phase = pivot.conj() / pivot.norm();
    m.iter()
        .flat_map(|z| {
            let w = z * phase;
            [(w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64]
        })
        .collect()
}

/// The 24 single-qubit Cliffords as shortest words in two quarter turns,
/// breadth first.
pub fn clifford_words() -> Vec<Vec<(f64, f64)>> {
    let generators = [(0.0, FRAC_PI_2), (FRAC_PI_2, FRAC_PI_2)];
    let mut seen = vec![phase_key(&su2::identity())];
    let mut words = vec![Vec::new()];
    let mut queue = VecDeque::from([(su2::identity(), Vec::new())]);
    while let Some((m, word)) = queue.pop_front() {
        for &(phi, alpha) in &generators {
            let next = su2::rotation(phi, alpha) * m;
            let key = phase_key(&next);
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            let mut w: Vec<(f64, f64)> = word.clone();
            w.push((phi, alpha));
            words.push(w.clone());
            queue.push_back((next, w));
        }
    }
    words
}

fn random_circuit(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    for _ in 0..RANDOM_DEPTH {
        if rng.random_bool(0.35) {
            gates.push(Gate::Cz { q1: 0, q2: 1 });
            continue;
        }
        for q in 0..2 {
            match rng.random_range(0..4) {
                0 => gates.push(Gate::Z {
                    q,
                    beta: rng.random_range(-PI..PI),
                }),
                1 => {}
                _ => gates.push(Gate::Rot {
                    q,
                    phi: rng.random_range(0.0..2.0 * PI),
                    alpha: rng.random_range(0.0..2.0 * PI),
                }),
            }
        }
    }
    Circuit::new(2, gates).with_id(format!("random-{seed}"))
}

/// `(|000> + |111>)/sqrt2` from the post-initialization state `|111>`.
pub fn ghz_circuit() -> Circuit {
    let h = |q| {
        [
            Gate::Z { q, beta: PI },
            Gate::Rot {
                q,
                phi: FRAC_PI_2,
                alpha: FRAC_PI_2,
            },
        ]
    };
    let mut gates: Vec<Gate> = (0..3)
        .map(|q| Gate::Rot {
            q,
            phi: 0.0,
            alpha: PI,
        })
        .collect();
    gates.extend(h(0));
    for t in 1..3 {
        gates.extend(h(t));
        gates.push(Gate::Cz { q1: t - 1, q2: t });
        // the native CZ marks |00>; Z on both makes it the usual CZ
        gates.extend([t - 1, t].map(|q| Gate::Z { q, beta: PI }));
        gates.extend(h(t));
    }
    Circuit::new(3, gates).with_id("ghz-3")
}

/// Regenerate the acceptance corpus.
pub fn generate_corpus() -> Vec<CorpusEntry> {
    let mut out: Vec<CorpusEntry> = clifford_words()
        .into_iter()
        .enumerate()
        .map(|(i, word)| CorpusEntry {
            seed: None,
            circuit: Circuit::new(
                1,
                word.into_iter()
                    .map(|(phi, alpha)| Gate::Rot { q: 0, phi, alpha })
                    .collect(),
            )
            .with_id(format!("clifford-{i:02}")),
        })
        .collect();
    out.extend((0..RANDOM_CIRCUITS as u64).map(|i| CorpusEntry {
        seed: Some(CORPUS_SEED + i),
        circuit: random_circuit(CORPUS_SEED + i),
    }));
    out.push(CorpusEntry {
        seed: None,
        circuit: ghz_circuit(),
    });
    out
}
