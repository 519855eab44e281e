//! Blockade-constrained configuration space and sparse states over it.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::lattice::{BlockadeGraph, Mode, VertexGraph};

/// Basis cap for dense enumeration.
pub const DEFAULT_BASIS_CAP: usize = 200_000;
/// Amplitudes below this magnitude are dropped from sparse states.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-14;

/// Fixed-width excitation bitstring (`1` = Rydberg). Bits are packed
/// most-significant first so the derived ordering is lexicographic in the
/// printed string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    words: SmallVec<[u64; 2]>,
    width: usize,
}

impl Configuration {
    pub fn ground(width: usize) -> Self {
        Self {
            words: SmallVec::from_elem(0, width.div_ceil(64).max(1)),
            width,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn mask(i: usize) -> (usize, u64) {
        (i / 64, 1u64 << (63 - i % 64))
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.width);
        let (w, m) = Self::mask(i);
        self.words[w] & m != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.width);
        let (w, m) = Self::mask(i);
        if value {
            self.words[w] |= m;
        } else {
            self.words[w] &= !m;
        }
    }

    #[inline]
    pub fn flipped(&self, i: usize) -> Self {
        let mut c = self.clone();
        let (w, m) = Self::mask(i);
        c.words[w] ^= m;
        c
    }

    pub fn count_excited(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn excited(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&i| self.get(i))
    }

    pub fn is_ground(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Whether any neighbour of `v` is excited.
    #[inline]
    pub fn is_blockaded(&self, g: &VertexGraph, v: usize) -> bool {
        g.neighbors(v).iter().any(|&u| self.get(u))
    }

    /// The excited set is an independent set of `g`.
    pub fn is_valid(&self, g: &VertexGraph) -> bool {
        self.width == g.len() && self.excited().all(|v| !self.is_blockaded(g, v))
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut c = Self::ground(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            c.set(i, b);
        }
        c
    }

    pub fn parse(text: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = text
            .chars()
            .map(|ch| match ch {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.map(|b| Self::from_bits(&b))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            f.write_char(if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

/// All independent sets of `g`, in lexicographic order.
pub fn enumerate_basis(g: &VertexGraph, cap: usize) -> Result<Vec<Configuration>> {
    let n = g.len();
    let mut out = Vec::new();
    let mut current = Configuration::ground(n);
    // Depth-first, ground branch before excited, so output is sorted.
    fn walk(
        g: &VertexGraph,
        i: usize,
        current: &mut Configuration,
        out: &mut Vec<Configuration>,
        cap: usize,
    ) -> Result<()> {
        if i == g.len() {
            if out.len() == cap {
                return Err(Error::TooLarge { cap });
            }
            out.push(current.clone());
            return Ok(());
        }
        walk(g, i + 1, current, out, cap)?;
        if !g.neighbors(i).iter().any(|&u| u < i && current.get(u)) {
            current.set(i, true);
            walk(g, i + 1, current, out, cap)?;
            current.set(i, false);
        }
        Ok(())
    }
    walk(g, 0, &mut current, &mut out, cap)?;
    Ok(out)
}

/// Normalised amplitudes over valid configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    mode: Mode,
    width: usize,
    amps: BTreeMap<Configuration, Complex64>,
    drop_tolerance: f64,
}

impl SparseState {
    pub fn ground(width: usize, mode: Mode) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(Configuration::ground(width), Complex64::new(1.0, 0.0));
        Self {
            mode,
            width,
            amps,
            drop_tolerance: DEFAULT_DROP_TOLERANCE,
        }
    }

    /// Build from raw entries. Entries are summed per configuration and
    /// small amplitudes dropped; the result is not renormalised.
    pub fn from_entries(
        mode: Mode,
        width: usize,
        entries: impl IntoIterator<Item = (Configuration, Complex64)>,
    ) -> Self {
        let mut amps: BTreeMap<Configuration, Complex64> = BTreeMap::new();
        for (c, a) in entries {
            assert_eq!(c.width(), width, "configuration width mismatch");
            *amps.entry(c).or_default() += a;
        }
        let mut s = Self {
            mode,
            width,
            amps,
            drop_tolerance: DEFAULT_DROP_TOLERANCE,
        };
        s.prune();
        s
    }

    pub fn with_drop_tolerance(mut self, tol: f64) -> Self {
        self.drop_tolerance = tol;
        self.prune();
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn drop_tolerance(&self) -> f64 {
        self.drop_tolerance
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, c: &Configuration) -> Complex64 {
        self.amps.get(c).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Drop entries whose magnitude falls below the tolerance.
    pub fn prune(&mut self) {
        let tol = self.drop_tolerance;
        self.amps.retain(|_, a| a.norm() >= tol);
    }

    pub(crate) fn replace_amplitudes(&mut self, amps: BTreeMap<Configuration, Complex64>) {
        self.amps = amps;
        self.prune();
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in self.amps.values_mut() {
            *a *= factor;
        }
    }

    /// Every stored configuration is an independent set of `g`.
    pub fn is_valid(&self, g: &VertexGraph) -> bool {
        g.mode == self.mode && self.width == g.len() && self.amps.keys().all(|c| c.is_valid(g))
    }

    pub fn same_register(&self, other: &Self) -> bool {
        self.mode == other.mode && self.width == other.width
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_register(other) {
            return Err(Error::ModeMismatch);
        }
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::default();
        for (c, a) in &small.amps {
            if let Some(b) = large.amps.get(c) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        Ok(acc)
    }

    /// Largest amplitude-wise deviation from another state.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        if !self.same_register(other) {
            return Err(Error::ModeMismatch);
        }
        let mut worst: f64 = 0.0;
        for (c, a) in &self.amps {
            worst = worst.max((a - other.amplitude(c)).norm());
        }
        for (c, b) in &other.amps {
            if !self.amps.contains_key(c) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// State dump: one `bitstring,re,im` row per configuration in canonical order.
    pub fn to_csv(&self, header_comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = header_comment {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str("config,re,im\n");
        for (c, a) in &self.amps {
            let _ = writeln!(out, "{c},{:e},{:e}", a.re, a.im);
        }
        out
    }

    pub fn from_csv(mode: Mode, text: &str) -> Result<Self> {
        let bad = |line: usize, why: &str| {
            Error::InvalidCircuit(format!("state dump line {line}: {why}"))
        };
        let mut entries = Vec::new();
        let mut width = None;
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "config,re,im" {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(bad(no + 1, "expected three fields"));
            }
            let c = Configuration::parse(parts[0]).ok_or_else(|| bad(no + 1, "bad bitstring"))?;
            if *width.get_or_insert(c.width()) != c.width() {
                return Err(bad(no + 1, "inconsistent width"));
            }
            let re: f64 = parts[1].parse().map_err(|_| bad(no + 1, "bad real part"))?;
            let im: f64 = parts[2]
                .parse()
                .map_err(|_| bad(no + 1, "bad imaginary part"))?;
            entries.push((c, Complex64::new(re, im)));
        }
        Ok(Self::from_entries(mode, width.unwrap_or(0), entries))
    }
}

/// All-ground state over the given graph's register.
pub fn initial_state(g: &BlockadeGraph, mode: Mode) -> SparseState {
    SparseState::ground(g.view(mode).len(), mode)
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &SparseState, b: &SparseState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Weight outside the symmetric superatom subspace tolerated by [`SuperatomEncoding::project`].
pub const LEAKAGE_TOLERANCE: f64 = 1e-9;

/// Maps unit-mode `{g-bar, r-bar}` onto the physical symmetric states:
/// `g-bar` = all atoms in g, `r-bar` = equal superposition of the single
/// excitations with amplitude `1/sqrt(S)` each.
#[derive(Clone, Debug)]
pub struct SuperatomEncoding {
    unit_atoms: Vec<Vec<usize>>,
    atom_unit: Vec<usize>,
}

impl SuperatomEncoding {
    pub fn new(g: &BlockadeGraph) -> Self {
        Self {
            unit_atoms: (0..g.n_units()).map(|u| g.unit_atoms(u).to_vec()).collect(),
            atom_unit: (0..g.n_atoms()).map(|a| g.atom_unit(a)).collect(),
        }
    }

    pub fn lift(&self, state: &SparseState) -> Result<SparseState> {
        if state.mode() != Mode::Unit || state.width() != self.unit_atoms.len() {
            return Err(Error::ModeMismatch);
        }
        let n_atoms = self.atom_unit.len();
        let mut entries = Vec::new();
        for (c, &amp) in state.iter() {
            // Expand each excited unit over its atoms.
            let mut partial = vec![(Configuration::ground(n_atoms), amp)];
            for u in c.excited() {
                let atoms = &self.unit_atoms[u];
                let w = 1.0 / (atoms.len() as f64).sqrt();
                partial = partial
                    .into_iter()
                    .flat_map(|(pc, pa)| {
                        atoms.iter().map(move |&a| {
                            let mut next = pc.clone();
                            next.set(a, true);
                            (next, pa * w)
                        })
                    })
                    .collect();
            }
            entries.extend(partial);
        }
        Ok(SparseState::from_entries(Mode::Physical, n_atoms, entries)
            .with_drop_tolerance(state.drop_tolerance()))
    }

    /// Overlap with the symmetric subspace, returned as a unit-mode state.
    pub fn project(&self, state: &SparseState) -> Result<SparseState> {
        let (projected, leaked) = self.project_lossy(state)?;
        if leaked > LEAKAGE_TOLERANCE {
            return Err(Error::NonSymmetricLeakage { leaked });
        }
        Ok(projected)
    }

    /// [`Self::project`] that reports the weight outside the symmetric
    /// subspace instead of failing on it.
    pub fn project_lossy(&self, state: &SparseState) -> Result<(SparseState, f64)> {
        if state.mode() != Mode::Physical || state.width() != self.atom_unit.len() {
            return Err(Error::ModeMismatch);
        }
        let n_units = self.unit_atoms.len();
        let mut entries = Vec::new();
        'configs: for (c, &amp) in state.iter() {
            let mut unit_c = Configuration::ground(n_units);
            let mut weight = 1.0;
            for (u, atoms) in self.unit_atoms.iter().enumerate() {
                let excited = atoms.iter().filter(|&&a| c.get(a)).count();
                match excited {
                    0 => {}
                    1 => {
                        unit_c.set(u, true);
                        weight /= (atoms.len() as f64).sqrt();
                    }
                    _ => continue 'configs,
                }
            }
            entries.push((unit_c, amp * weight));
        }
        let projected = SparseState::from_entries(Mode::Unit, n_units, entries)
            .with_drop_tolerance(state.drop_tolerance());
        let leaked = (state.norm_sqr() - projected.norm_sqr()).max(0.0);
        Ok((projected, leaked))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Species;
    use proptest::prelude::*;

    fn path(n: usize) -> BlockadeGraph {
        let units: Vec<(Species, usize)> = (0..n).map(|k| (Species::of_site(k), 1)).collect();
        let edges: Vec<(usize, usize)> = (1..n).map(|k| (k - 1, k)).collect();
        BlockadeGraph::from_units(&units, &edges)
    }

    fn brute_force(g: &VertexGraph) -> Vec<Configuration> {
        let n = g.len();
        let mut out: Vec<Configuration> = (0u64..(1 << n))
            .map(|m| Configuration::from_bits(&(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
            .filter(|c| c.is_valid(g))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_basis(path(1).unit_graph(), 100).unwrap().len(), 2);
        assert_eq!(enumerate_basis(path(4).unit_graph(), 100).unwrap().len(), 8);
        let k4 = BlockadeGraph::from_units(&[(Species::A, 4)], &[]);
        let basis = enumerate_basis(k4.physical_graph(), 100).unwrap();
        assert_eq!(basis.len(), 5);
        assert!(basis.iter().all(|c| c.count_excited() <= 1));
    }

    #[test]
    fn enumeration_matches_brute_force_and_is_sorted() {
        for n in 1..=12 {
            let g = path(n);
            let basis = enumerate_basis(g.unit_graph(), DEFAULT_BASIS_CAP).unwrap();
            assert_eq!(basis, brute_force(g.unit_graph()));
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_basis(path(10).unit_graph(), 50),
            Err(Error::TooLarge { cap: 50 })
        ));
    }

    #[test]
    fn initial_state_is_all_ground() {
        let g = path(5);
        let s = initial_state(&g, Mode::Unit);
        assert_eq!(s.len(), 1);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(s.iter().next().unwrap().0.is_ground());
        assert_eq!(initial_state(&g, Mode::Physical).width(), 5);
    }

    #[test]
    fn fidelity_basics() {
        let g = path(3);
        let a = SparseState::ground(3, Mode::Unit);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let b = SparseState::from_entries(
            Mode::Unit,
            3,
            [(
                Configuration::parse("010").unwrap(),
                Complex64::new(1.0, 0.0),
            )],
        );
        assert!(b.is_valid(g.unit_graph()));
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let mut c = a.clone();
        c.scale(Complex64::from_polar(1.0, 0.7));
        assert!((fidelity(&a, &c).unwrap() - 1.0).abs() < 1e-15);
        let p = SparseState::ground(3, Mode::Physical);
        assert!(matches!(fidelity(&a, &p), Err(Error::ModeMismatch)));
    }

    #[test]
    fn lift_excited_superatom_spreads_over_atoms() {
        let g = BlockadeGraph::from_units(
            &[(Species::B, 1), (Species::A, 4), (Species::B, 1)],
            &[(0, 1), (1, 2)],
        );
        let enc = SuperatomEncoding::new(&g);
        let s = SparseState::from_entries(
            Mode::Unit,
            3,
            [(
                Configuration::parse("010").unwrap(),
                Complex64::new(1.0, 0.0),
            )],
        );
        let lifted = enc.lift(&s).unwrap();
        assert_eq!(lifted.len(), 4);
        for (_, a) in lifted.iter() {
            assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(lifted.is_valid(g.physical_graph()));
        let ground = enc.lift(&SparseState::ground(3, Mode::Unit)).unwrap();
        assert!(ground.iter().next().unwrap().0.is_ground());
    }

    #[test]
    fn project_rejects_asymmetric_states() {
        let g = BlockadeGraph::from_units(&[(Species::A, 4)], &[]);
        let enc = SuperatomEncoding::new(&g);
        let s = SparseState::from_entries(
            Mode::Physical,
            4,
            [
                (
                    Configuration::parse("1000").unwrap(),
                    Complex64::new(0.5f64.sqrt(), 0.0),
                ),
                (
                    Configuration::parse("0100").unwrap(),
                    Complex64::new(-(0.5f64.sqrt()), 0.0),
                ),
            ],
        );
        assert!(matches!(
            enc.project(&s),
            Err(Error::NonSymmetricLeakage { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let s = SparseState::from_entries(
            Mode::Unit,
            4,
            [
                (
                    Configuration::parse("1010").unwrap(),
                    Complex64::new(0.6, -0.0),
                ),
                (
                    Configuration::parse("0001").unwrap(),
                    Complex64::new(0.0, 0.8),
                ),
            ],
        );
        let text = s.to_csv(Some("demo"));
        assert!(text.starts_with("# demo\nconfig,re,im\n0001,"));
        assert_eq!(SparseState::from_csv(Mode::Unit, &text).unwrap(), s);
    }

    fn random_unit_state(g: &BlockadeGraph, weights: &[(f64, f64)]) -> SparseState {
        let basis = enumerate_basis(g.unit_graph(), DEFAULT_BASIS_CAP).unwrap();
        let entries: Vec<_> = basis
            .into_iter()
            .zip(weights.iter().cycle())
            .map(|(c, &(re, im))| (c, Complex64::new(re, im)))
            .collect();
        let mut s = SparseState::from_entries(Mode::Unit, g.n_units(), entries);
        let n = s.norm_sqr().sqrt();
        s.scale(Complex64::new(1.0 / n, 0.0));
        s
    }

    proptest! {
        #[test]
        fn path_counts_follow_fibonacci(len in 1usize..=20) {
            let (mut a, mut b) = (1u64, 1u64);
            for _ in 0..(len + 1) { let t = a + b; a = b; b = t; }
            // a = Fibonacci(len + 2)
            let count = enumerate_basis(path(len).unit_graph(), DEFAULT_BASIS_CAP).unwrap().len() as u64;
            prop_assert_eq!(count, a);
        }

        #[test]
        fn lift_then_project_is_identity(weights in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12)) {
            prop_assume!(weights.iter().any(|&(r, i)| r.abs() + i.abs() > 1e-3));
            let g = BlockadeGraph::from_units(
                &[(Species::A, 4), (Species::B, 1), (Species::A, 1), (Species::B, 3)],
                &[(0, 1), (1, 2), (2, 3)],
            );
            let enc = SuperatomEncoding::new(&g);
            let psi = random_unit_state(&g, &weights);
            let lifted = enc.lift(&psi).unwrap();
            prop_assert!(lifted.is_valid(g.physical_graph()));
            prop_assert!((lifted.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
            let back = enc.project(&lifted).unwrap();
            prop_assert!(back.max_deviation(&psi).unwrap() < 1e-12);
        }
    }
}
