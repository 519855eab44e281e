//! Global pulses under perfect blockade: a structure-agnostic dense oracle,
//! a factorized engine for independent driven units, and species resets.
//!
//! A pulse `(species, θ, φ)` evolves the register by
//! `exp(-i θ/2 Σ_v c_v (e^{iφ}|r><g|_v + e^{-iφ}|g><r|_v))`, summed over the
//! driven, non-blockaded vertices `v` with enhancement `c_v`. On a lone
//! vertex this is `R(φ, c_v θ)` from [`crate::su2::rotation`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Configuration, SparseState, DEFAULT_BASIS_CAP};
use crate::error::{Error, Result};
use crate::lattice::{BlockadeGraph, Species, VertexGraph};
use crate::su2::{self, wrap_angle, Mat2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalPulse {
    pub species: Species,
    /// Bare single-atom Rabi angle.
    pub area: f64,
    pub phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl GlobalPulse {
    pub fn new(species: Species, area: f64, phase: f64) -> Self {
        Self {
            species,
            area,
            phase: wrap_angle(phase),
            label: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Same area with the phase advanced by π, which undoes this pulse.
    pub fn inverse(&self) -> Self {
        Self {
            species: self.species,
            area: self.area,
            phase: wrap_angle(self.phase + std::f64::consts::PI),
            label: self.label.clone(),
        }
    }

    pub fn shifted(&self, dphi: f64) -> Self {
        Self {
            phase: wrap_angle(self.phase + dphi),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.area.is_finite() || self.area < 0.0 || !self.phase.is_finite() {
            return Err(Error::InvalidCircuit(format!(
                "pulse area {} / phase {} out of range",
                self.area, self.phase
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GlobalPulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(θ={:.6}, φ={:.6})",
            self.species, self.area, self.phase
        )
    }
}

/// Pulses applied in list order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub pulses: Vec<GlobalPulse>,
    /// Intended logical action, free text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<String>,
}

impl PulseSequence {
    pub fn new(pulses: Vec<GlobalPulse>) -> Self {
        Self {
            name: None,
            pulses,
            metadata: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GlobalPulse> {
        self.pulses.iter()
    }

    pub fn push(&mut self, p: GlobalPulse) {
        self.pulses.push(p);
    }

    pub fn extend_from(&mut self, other: &PulseSequence) {
        self.pulses.extend(other.pulses.iter().cloned());
    }

    /// Reversed order with every phase advanced by π.
    pub fn inverse(&self) -> Self {
        Self {
            name: self.name.as_ref().map(|n| format!("{n}^-1")),
            pulses: self.pulses.iter().rev().map(GlobalPulse::inverse).collect(),
            metadata: None,
        }
    }

    pub fn shifted(&self, dphi: f64) -> Self {
        Self {
            name: self.name.clone(),
            pulses: self.pulses.iter().map(|p| p.shifted(dphi)).collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn total_area(&self) -> f64 {
        self.pulses.iter().map(|p| p.area).sum()
    }

    /// The bare list form `[{species, area, phase, label}]`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.pulses)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pulses: Vec<GlobalPulse> = serde_json::from_str(text)?;
        for p in &pulses {
            p.validate()?;
        }
        Ok(Self::new(pulses))
    }
}

impl FromIterator<GlobalPulse> for PulseSequence {
    fn from_iter<T: IntoIterator<Item = GlobalPulse>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

fn graph_for<'g>(state: &SparseState, g: &'g BlockadeGraph) -> Result<&'g VertexGraph> {
    let view = g.view(state.mode());
    if view.len() != state.width() {
        return Err(Error::ModeMismatch);
    }
    Ok(view)
}

fn driven(view: &VertexGraph, species: Species) -> Vec<usize> {
    (0..view.len())
        .filter(|&v| view.species[v] == species)
        .collect()
}

/// Exact evolution over the configurations reachable from the state's
/// support by driven flips. That set is invariant under the generator, so
/// exponentiating there equals exponentiating on the full constrained space.
pub fn apply_pulse_dense(
    state: &SparseState,
    pulse: &GlobalPulse,
    g: &BlockadeGraph,
) -> Result<SparseState> {
    apply_pulse_dense_capped(state, pulse, g, DEFAULT_BASIS_CAP)
}

pub fn apply_pulse_dense_capped(
    state: &SparseState,
    pulse: &GlobalPulse,
    g: &BlockadeGraph,
    cap: usize,
) -> Result<SparseState> {
    pulse.validate()?;
    let view = graph_for(state, g)?;
    if pulse.area == 0.0 || state.is_empty() {
        return Ok(state.clone());
    }
    let drv = driven(view, pulse.species);
    let entries: Vec<(Configuration, Complex64)> =
        state.iter().map(|(c, a)| (c.clone(), *a)).collect();
    let out = evolve_closure(entries, &drv, view, pulse, cap)?;
    Ok(SparseState::from_entries(state.mode(), state.width(), out)
        .with_drop_tolerance(state.drop_tolerance()))
}

/// Exponentiate the generator restricted to the driven vertices `drv` over
/// the flip closure of the given support.
fn evolve_closure(
    entries: Vec<(Configuration, Complex64)>,
    drv: &[usize],
    view: &VertexGraph,
    pulse: &GlobalPulse,
    cap: usize,
) -> Result<Vec<(Configuration, Complex64)>> {
    let (mut basis, mut v): (Vec<Configuration>, Vec<Complex64>) = entries.into_iter().unzip();
    let mut index: HashMap<Configuration, usize> = basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    // Sparse generator entries: (target, source, value).
    let mut gen: Vec<(usize, usize, Complex64)> = Vec::new();
    let up = Complex64::from_polar(1.0, pulse.phase);
    let mut next = 0;
    while next < basis.len() {
        let c = basis[next].clone();
        for &u in drv {
            if c.is_blockaded(view, u) {
                continue;
            }
            let f = c.flipped(u);
            let j = match index.get(&f) {
                Some(&j) => j,
                None => {
                    if basis.len() == cap {
                        return Err(Error::TooLarge { cap });
                    }
                    basis.push(f.clone());
                    v.push(Complex64::default());
                    index.insert(f, basis.len() - 1);
                    basis.len() - 1
                }
            };
            let amp = view.coupling[u] * if c.get(u) { up.conj() } else { up };
            gen.push((j, next, amp));
        }
        next += 1;
    }
    expm_multiply(&mut v, &gen, pulse.area / 2.0);
    Ok(basis.into_iter().zip(v).collect())
}

/// Connected components of the driven-species subgraph.
fn driven_clusters(view: &VertexGraph, species: Species) -> Vec<Vec<usize>> {
    let mut seen = vec![false; view.len()];
    let mut clusters = Vec::new();
    for start in driven(view, species) {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut cluster = vec![start];
        let mut i = 0;
        while i < cluster.len() {
            for &u in view.neighbors(cluster[i]) {
                if !seen[u] && view.species[u] == species {
                    seen[u] = true;
                    cluster.push(u);
                }
            }
            i += 1;
        }
        cluster.sort_unstable();
        clusters.push(cluster);
    }
    clusters
}

/// Exact evolution cluster by cluster. Distinct clusters of the driven
/// species never blockade each other and their other neighbours are frozen,
/// so the pulse factorizes over clusters; within a cluster (a physical-mode
/// superatom, say) the small restricted generator is exponentiated directly.
pub fn apply_pulse_blockwise(
    state: &SparseState,
    pulse: &GlobalPulse,
    g: &BlockadeGraph,
) -> Result<SparseState> {
    pulse.validate()?;
    let view = graph_for(state, g)?;
    if pulse.area == 0.0 {
        return Ok(state.clone());
    }
    let mut amps: Vec<(Configuration, Complex64)> =
        state.iter().map(|(c, a)| (c.clone(), *a)).collect();
    for cluster in driven_clusters(view, pulse.species) {
        let mut groups: BTreeMap<Configuration, Vec<(Configuration, Complex64)>> = BTreeMap::new();
        for (c, a) in amps {
            let mut key = c.clone();
            for &u in &cluster {
                key.set(u, false);
            }
            groups.entry(key).or_default().push((c, a));
        }
        amps = Vec::new();
        for (_, members) in groups {
            amps.extend(evolve_closure(
                members,
                &cluster,
                view,
                pulse,
                DEFAULT_BASIS_CAP,
            )?);
        }
    }
    Ok(SparseState::from_entries(state.mode(), state.width(), amps)
        .with_drop_tolerance(state.drop_tolerance()))
}

/// `v <- exp(-i t G) v` by scaled Taylor steps of norm at most one.
fn expm_multiply(v: &mut [Complex64], entries: &[(usize, usize, Complex64)], t: f64) {
    // Largest column sum bounds the 1-norm of the generator.
    let mut col = vec![0.0f64; v.len()];
    for &(_, j, a) in entries {
        col[j] += a.norm();
    }
    let bound = t * col.iter().cloned().fold(0.0, f64::max);
    let steps = bound.ceil().max(1.0) as usize;
    let h = Complex64::new(0.0, -t / steps as f64);
    let mut term = vec![Complex64::default(); v.len()];
    let mut scratch = vec![Complex64::default(); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(v);
        for k in 1..=60 {
            scratch.iter_mut().for_each(|x| *x = Complex64::default());
            for &(i, j, a) in entries {
                scratch[i] += a * term[j];
            }
            let scale = h / k as f64;
            let mut largest: f64 = 0.0;
            for (t, s) in term.iter_mut().zip(&scratch) {
                *t = s * scale;
                largest = largest.max(t.norm());
            }
            for (x, t) in v.iter_mut().zip(&term) {
                *x += t;
            }
            if largest < 1e-18 {
                break;
            }
        }
    }
}

/// Per-unit 2x2 rotations; valid when no two driven vertices blockade each other.
pub fn apply_pulse_factorized(
    state: &SparseState,
    pulse: &GlobalPulse,
    g: &BlockadeGraph,
) -> Result<SparseState> {
    pulse.validate()?;
    let view = graph_for(state, g)?;
    if let Some((a, b)) = view.driven_adjacency(pulse.species) {
        return Err(Error::DrivenAdjacency(a, b));
    }
    if pulse.area == 0.0 {
        return Ok(state.clone());
    }
    let mut amps: BTreeMap<Configuration, Complex64> =
        state.iter().map(|(c, a)| (c.clone(), *a)).collect();
    for v in driven(view, pulse.species) {
        let r = su2::rotation(pulse.phase, pulse.area * view.coupling[v]);
        amps = apply_two_level(&amps, view, v, &r);
    }
    let mut next = state.clone();
    next.replace_amplitudes(amps);
    Ok(next)
}

/// Apply `w` in the `(g, r)` basis of vertex `v` wherever `v` is not
/// blockaded.
fn apply_two_level(
    amps: &BTreeMap<Configuration, Complex64>,
    view: &VertexGraph,
    v: usize,
    w: &Mat2,
) -> BTreeMap<Configuration, Complex64> {
    let mut out: BTreeMap<Configuration, Complex64> = BTreeMap::new();
    for (c, &a) in amps {
        if c.is_blockaded(view, v) {
            *out.entry(c.clone()).or_default() += a;
            continue;
        }
        let partner = c.flipped(v);
        let excited = c.get(v);
        if excited && amps.contains_key(&partner) {
            continue;
        }
        let (cg, cr) = if excited {
            (partner, c.clone())
        } else {
            (c.clone(), partner)
        };
        let ag = amps.get(&cg).copied().unwrap_or_default();
        let ar = amps.get(&cr).copied().unwrap_or_default();
        *out.entry(cg).or_default() += w[(0, 0)] * ag + w[(0, 1)] * ar;
        *out.entry(cr).or_default() += w[(1, 0)] * ag + w[(1, 1)] * ar;
    }
    out
}

/// Exact evolution under consecutive pulses that all drive one species.
/// The other species stays frozen for the whole run, so the run factorizes
/// over driven clusters and each cluster takes the run in one step. Atoms
/// the run returns to a basis state never branch in the stored state.
pub fn apply_run(
    state: &SparseState,
    pulses: &[GlobalPulse],
    g: &BlockadeGraph,
) -> Result<SparseState> {
    let view = graph_for(state, g)?;
    let Some(first) = pulses.first() else {
        return Ok(state.clone());
    };
    for p in pulses {
        p.validate()?;
        if p.species != first.species {
            return Err(Error::InvalidCircuit(format!(
                "run mixes species {} and {}",
                first.species, p.species
            )));
        }
    }
    let mut amps: BTreeMap<Configuration, Complex64> =
        state.iter().map(|(c, a)| (c.clone(), *a)).collect();
    for cluster in driven_clusters(view, first.species) {
        if let [v] = cluster[..] {
            let w = pulses.iter().fold(su2::identity(), |w, p| {
                su2::rotation(p.phase, p.area * view.coupling[v]) * w
            });
            amps = apply_two_level(&amps, view, v, &w);
            amps.retain(|_, a| a.norm() >= state.drop_tolerance());
            continue;
        }
        let mut groups: BTreeMap<Configuration, Vec<(Configuration, Complex64)>> = BTreeMap::new();
        for (c, a) in std::mem::take(&mut amps) {
            let mut key = c.clone();
            for &u in &cluster {
                key.set(u, false);
            }
            groups.entry(key).or_default().push((c, a));
        }
        for (_, mut members) in groups {
            for p in pulses.iter().filter(|p| p.area != 0.0) {
                members = evolve_closure(members, &cluster, view, p, DEFAULT_BASIS_CAP)?;
            }
            for (c, a) in members {
                if a.norm() >= state.drop_tolerance() {
                    *amps.entry(c).or_default() += a;
                }
            }
        }
    }
    let mut next = state.clone();
    next.replace_amplitudes(amps);
    Ok(next)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    /// Factorized when the driven species is independent, blockwise
    /// otherwise. Sequences are applied as fused single-species runs.
    #[default]
    Auto,
    Dense,
    Factorized,
    Blockwise,
}

pub fn apply_pulse(
    state: &SparseState,
    pulse: &GlobalPulse,
    g: &BlockadeGraph,
    engine: EngineChoice,
) -> Result<SparseState> {
    match engine {
        EngineChoice::Dense => apply_pulse_dense(state, pulse, g),
        EngineChoice::Factorized => apply_pulse_factorized(state, pulse, g),
        EngineChoice::Blockwise => apply_pulse_blockwise(state, pulse, g),
        EngineChoice::Auto => match apply_pulse_factorized(state, pulse, g) {
            Err(Error::DrivenAdjacency(a, b)) => {
                log::debug!("driven vertices {a} and {b} blockade each other; evolving {pulse} cluster by cluster");
                apply_pulse_blockwise(state, pulse, g)
            }
            other => other,
        },
    }
}

pub fn apply_sequence(
    state: &SparseState,
    seq: &PulseSequence,
    g: &BlockadeGraph,
    engine: EngineChoice,
) -> Result<SparseState> {
    if engine == EngineChoice::Auto {
        let mut s = state.clone();
        for run in seq.pulses.chunk_by(|a, b| a.species == b.species) {
            s = apply_run(&s, run, g)?;
        }
        return Ok(s);
    }
    let mut s = state.clone();
    for p in seq.iter() {
        s = apply_pulse(&s, p, g, engine)?;
    }
    Ok(s)
}

/// Project every vertex of `species` to g and renormalise. Returns the
/// removed probability weight.
pub fn reset_species(
    state: &SparseState,
    species: Species,
    g: &BlockadeGraph,
) -> Result<(SparseState, f64)> {
    let view = graph_for(state, g)?;
    let total = state.norm_sqr();
    let targets = driven(view, species);
    let kept: Vec<(Configuration, Complex64)> = state
        .iter()
        .filter(|(c, _)| targets.iter().all(|&v| !c.get(v)))
        .map(|(c, a)| (c.clone(), *a))
        .collect();
    let kept_weight: f64 = kept.iter().map(|(_, a)| a.norm_sqr()).sum();
    let leaked = (total - kept_weight).max(0.0);
    if kept_weight <= 0.0 {
        return Err(Error::AllWeightRemoved);
    }
    let mut next = SparseState::from_entries(state.mode(), state.width(), kept)
        .with_drop_tolerance(state.drop_tolerance());
    if leaked > 0.0 {
        next.scale(Complex64::new((total / kept_weight).sqrt(), 0.0));
    }
    Ok((next, leaked))
}
