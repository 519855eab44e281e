use std::collections::HashMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::logical::{apply_frame, LogicalState};
use crate::basis::{Configuration, SparseState, SuperatomEncoding};
use crate::compiler::ZFrame;
use crate::error::{Error, Result};
use crate::lattice::{blockade_graph, Arrangement, Mode};

/// Largest non-matching weight [`decode`] accepts.
pub const DECODE_TOLERANCE: f64 = 1e-8;

/// Unit-mode configuration of the standard configuration at interface `k`:
/// behind the interface sites alternate `r, g, r, …` going back from
/// `k - 2`, the interface carries `bits[wire]`, everything ahead and every
/// coupler is in g.
pub fn sc_configuration(arr: &Arrangement, k: usize, bits: &[bool]) -> Configuration {
    let mut c = Configuration::ground(arr.units().len());
    for u in arr.units() {
        if let Some((wire, site)) = u.role.wire_site() {
            let excited = match site.cmp(&k) {
                std::cmp::Ordering::Less => (k - site).is_multiple_of(2),
                std::cmp::Ordering::Equal => bits[wire],
                std::cmp::Ordering::Greater => false,
            };
            c.set(u.id, excited);
        }
    }
    c
}

fn index_bits(n: usize, idx: usize) -> Vec<bool> {
    (0..n).map(|q| LogicalState::bit_of(n, idx, q)).collect()
}

/// Embed a logical state as a superposition of standard configurations.
pub fn encode(
    arr: &Arrangement,
    k: usize,
    logical: &LogicalState,
    mode: Mode,
) -> Result<SparseState> {
    if logical.n != arr.n_wires() {
        return Err(Error::LayoutMismatch(logical.n));
    }
    let entries = logical
        .amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(idx, &a)| (sc_configuration(arr, k, &index_bits(logical.n, idx)), a));
    let unit = SparseState::from_entries(Mode::Unit, arr.units().len(), entries);
    match mode {
        Mode::Unit => Ok(unit),
        Mode::Physical => SuperatomEncoding::new(&blockade_graph(arr)?).lift(&unit),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub logical: LogicalState,
    pub interface_k: usize,
    pub invalid_weight: f64,
    pub frame_applied: bool,
}

/// Pattern-match every stored configuration against the standard
/// configuration at `k`, without failing on invalid weight. The logical
/// state is renormalised over the matching part.
pub fn decode_lenient(
    state: &SparseState,
    arr: &Arrangement,
    k: usize,
    frame: Option<&ZFrame>,
) -> Result<DecodeReport> {
    let n = arr.n_wires();
    let (unit, leaked) = match state.mode() {
        Mode::Unit => (state.clone(), 0.0),
        Mode::Physical => SuperatomEncoding::new(&blockade_graph(arr)?).project_lossy(state)?,
    };
    let lookup: HashMap<Configuration, usize> = (0..1usize << n)
        .map(|idx| (sc_configuration(arr, k, &index_bits(n, idx)), idx))
        .collect();
    let mut amps = vec![Complex64::default(); 1 << n];
    let mut invalid = leaked;
    for (c, a) in unit.iter() {
        match lookup.get(c) {
            Some(&idx) => amps[idx] += a,
            None => invalid += a.norm_sqr(),
        }
    }
    let mut logical = LogicalState::from_amplitudes(n, amps);
    logical.normalize();
    if let Some(f) = frame {
        logical = apply_frame(&logical, f);
    }
    Ok(DecodeReport {
        logical,
        interface_k: k,
        invalid_weight: invalid,
        frame_applied: frame.is_some(),
    })
}

/// [`decode_lenient`], failing with `DecodeFailure` above [`DECODE_TOLERANCE`].
pub fn decode(
    state: &SparseState,
    arr: &Arrangement,
    k: usize,
    frame: Option<&ZFrame>,
) -> Result<DecodeReport> {
    let report = decode_lenient(state, arr, k, frame)?;
    if report.invalid_weight > DECODE_TOLERANCE || report.logical.norm_sqr() == 0.0 {
        return Err(Error::DecodeFailure {
            invalid_weight: report.invalid_weight,
        });
    }
    Ok(report)
}

/// Computational-basis shots from `|amplitude|^2`, deterministic in `seed`.
pub fn sample(logical: &LogicalState, shots: usize, seed: u64) -> Vec<String> {
    let probs = logical.probabilities();
    let dist = WeightedIndex::new(&probs).expect("state has positive weight");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots)
        .map(|_| logical.bitstring(dist.sample(&mut rng)))
        .collect()
}

/// Decode, then sample.
pub fn sample_state(
    state: &SparseState,
    arr: &Arrangement,
    k: usize,
    frame: Option<&ZFrame>,
    shots: usize,
    seed: u64,
) -> Result<Vec<String>> {
    Ok(sample(&decode(state, arr, k, frame)?.logical, shots, seed))
}

/// Pearson chi-square p-value of shot counts against the state's
/// probabilities. Outcomes with negligible probability must not occur.
pub fn chi_square_p(shots: &[String], logical: &LogicalState) -> f64 {
    let probs = logical.probabilities();
    let mut counts = vec![0usize; probs.len()];
    let index: HashMap<String, usize> = (0..probs.len())
        .map(|i| (logical.bitstring(i), i))
        .collect();
    for s in shots {
        match index.get(s) {
            Some(&i) => counts[i] += 1,
            None => return 0.0,
        }
    }
    let total = shots.len() as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (p, &c) in probs.iter().zip(&counts) {
        if *p < 1e-12 {
            if c > 0 {
                return 0.0;
            }
            continue;
        }
        let expected = p * total;
        stat += (c as f64 - expected).powi(2) / expected;
        bins += 1;
    }
    if bins < 2 {
        return 1.0;
    }
    let dist = ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}
