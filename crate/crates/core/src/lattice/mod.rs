//! Static atom arrangements: wires of alternating species, superatom
//! impurities inside wires, coupler superatoms between wires, and the binary
//! blockade relation they induce.
//!
//! Geometry is synthetic. Positions are chosen so that every intended
//! blockade pair sits at most `0.8 R_B` apart (unit centres) and every other
//! pair at least `1.2 R_B`; the simulator only ever consumes the resulting
//! binary graph.

mod graph;
mod io;
mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graph::{BlockadeGraph, Mode, VertexGraph};
pub use io::{ArrangementDoc, UnitDoc};
pub use svg::{render_svg, SvgOptions};

/// Default number of atoms per superatom.
pub const DEFAULT_SUPERATOM_SIZE: usize = 4;
/// First site offered for gate devices (the head sits at 0, interfaces start at 2).
pub const FIRST_DEVICE_SITE: usize = 4;
/// Minimum site separation between two A superatoms of one wire.
pub const MIN_SUPERATOM_SPACING: usize = 4;
/// Plain sites kept after the last device of a wire.
pub const TRAILING_SITES: usize = 2;
pub const MIN_WIRE_LENGTH: usize = 5;

// Geometry in units of the blockade radius.
const SITE_PITCH: f64 = 0.65;
const WIRE_GAP: f64 = 2.2;
const COUPLER_PULL: f64 = 0.4;
const CLUSTER_HALF: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub fn other(self) -> Self {
        match self {
            Species::A => Species::B,
            Species::B => Species::A,
        }
    }

    /// Species of wire site `k`: even sites are A, odd sites are B.
    pub fn of_site(k: usize) -> Self {
        if k.is_multiple_of(2) {
            Species::A
        } else {
            Species::B
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Species::A => "A",
            Species::B => "B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Atom,
    Superatom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Role {
    /// Site `k` of a wire (k = 0 is the head and carries [`Role::Head`]).
    Wire {
        wire: usize,
        site: usize,
    },
    /// B superatom between wires `q` and `q + 1`, attached to site `site` of both.
    Coupler {
        wires: (usize, usize),
        site: usize,
    },
    Head {
        wire: usize,
    },
}

impl Role {
    /// `(wire, site)` for wire-resident units.
    pub fn wire_site(&self) -> Option<(usize, usize)> {
        match *self {
            Role::Wire { wire, site } => Some((wire, site)),
            Role::Head { wire } => Some((wire, 0)),
            Role::Coupler { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unit {
    pub id: usize,
    pub species: Species,
    pub kind: UnitKind,
    /// Number of physical atoms (1 for atoms, `S` for superatoms).
    pub size: usize,
    pub position: [f64; 2],
    pub role: Role,
}

impl Unit {
    pub fn is_superatom(&self) -> bool {
        self.kind == UnitKind::Superatom
    }
}

/// A gate device addressable by parking the interfaces at `site`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Device {
    SingleQubit {
        wire: usize,
        site: usize,
    },
    /// Coupler between `upper` and `upper + 1`.
    Coupler {
        upper: usize,
        site: usize,
    },
}

impl Device {
    pub fn site(&self) -> usize {
        match *self {
            Device::SingleQubit { site, .. } | Device::Coupler { site, .. } => site,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arrangement {
    units: Vec<Unit>,
    blockade_radius: f64,
    superatom_size: usize,
    n_wires: usize,
    /// `sites[wire][k]` is the unit id at site k.
    sites: Vec<Vec<usize>>,
}

impl Arrangement {
    /// Assemble from units in canonical order. Unit ids must equal indices.
    pub fn from_units(
        units: Vec<Unit>,
        blockade_radius: f64,
        superatom_size: usize,
    ) -> Result<Self> {
        for (i, u) in units.iter().enumerate() {
            if u.id != i {
                return Err(Error::InvalidLayout(format!(
                    "unit at index {i} has id {}",
                    u.id
                )));
            }
        }
        let n_wires = units
            .iter()
            .filter_map(|u| u.role.wire_site().map(|(w, _)| w + 1))
            .max()
            .unwrap_or(0);
        let mut by_wire: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n_wires];
        for u in &units {
            if let Some((w, k)) = u.role.wire_site() {
                if by_wire[w].insert(k, u.id).is_some() {
                    return Err(Error::OverlapViolation { wire: w, site: k });
                }
            }
        }
        let mut sites = Vec::with_capacity(n_wires);
        for (w, m) in by_wire.into_iter().enumerate() {
            for (expect, &k) in m.keys().enumerate() {
                if k != expect {
                    return Err(Error::InvalidLayout(format!(
                        "wire {w} is missing site {expect}"
                    )));
                }
            }
            sites.push(m.into_values().collect());
        }
        Ok(Self {
            units,
            blockade_radius,
            superatom_size,
            n_wires,
            sites,
        })
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit(&self, id: usize) -> &Unit {
        &self.units[id]
    }

    pub fn blockade_radius(&self) -> f64 {
        self.blockade_radius
    }

    pub fn superatom_size(&self) -> usize {
        self.superatom_size
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn wire_length(&self, wire: usize) -> usize {
        self.sites[wire].len()
    }

    /// Common wire length, or the shortest one if they differ.
    pub fn min_wire_length(&self) -> usize {
        self.sites.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn site_unit(&self, wire: usize, site: usize) -> Option<usize> {
        self.sites.get(wire).and_then(|s| s.get(site)).copied()
    }

    pub fn wire_units(&self, wire: usize) -> &[usize] {
        &self.sites[wire]
    }

    pub fn couplers(&self) -> impl Iterator<Item = &Unit> {
        self.units
            .iter()
            .filter(|u| matches!(u.role, Role::Coupler { .. }))
    }

    /// Total number of physical atoms.
    pub fn atom_count(&self) -> usize {
        self.units.iter().map(|u| u.size).sum()
    }

    /// Gate devices: mid-wire A superatoms and couplers, sorted by site.
    pub fn devices(&self) -> Vec<Device> {
        let mut out: Vec<Device> = self
            .units
            .iter()
            .filter_map(|u| match u.role {
                Role::Wire { wire, site } if u.is_superatom() => {
                    Some(Device::SingleQubit { wire, site })
                }
                Role::Coupler { wires, site } => Some(Device::Coupler {
                    upper: wires.0,
                    site,
                }),
                _ => None,
            })
            .collect();
        out.sort_by_key(|d| (d.site(), *d));
        out
    }

    pub fn has_heads(&self) -> bool {
        (0..self.n_wires).all(|w| {
            self.site_unit(w, 0)
                .map(|u| {
                    matches!(self.units[u].role, Role::Head { .. }) && self.units[u].is_superatom()
                })
                .unwrap_or(false)
        })
    }

    /// Physical atom positions, grouped per unit in unit order.
    pub fn atom_positions(&self) -> Vec<(usize, [f64; 2])> {
        let mut out = Vec::with_capacity(self.atom_count());
        for u in &self.units {
            for off in cluster_offsets(u.size) {
                let r = self.blockade_radius;
                out.push((
                    u.id,
                    [u.position[0] + r * off[0], u.position[1] + r * off[1]],
                ));
            }
        }
        out
    }
}

/// Offsets (in units of R_B) of a superatom's atoms around its centre: a 2x2
/// square for four atoms, a small ring otherwise.
pub(crate) fn cluster_offsets(size: usize) -> Vec<[f64; 2]> {
    match size {
        0 | 1 => vec![[0.0, 0.0]],
        4 => vec![
            [-CLUSTER_HALF, -CLUSTER_HALF],
            [CLUSTER_HALF, -CLUSTER_HALF],
            [-CLUSTER_HALF, CLUSTER_HALF],
            [CLUSTER_HALF, CLUSTER_HALF],
        ],
        s => {
            let r = CLUSTER_HALF * std::f64::consts::SQRT_2;
            (0..s)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / s as f64;
                    [r * t.cos(), r * t.sin()]
                })
                .collect()
        }
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// ---------------------------------------------------------------------------
// Construction

#[derive(Clone, Debug, Default)]
struct WireSpec {
    length: usize,
    head: bool,
    superatoms: BTreeSet<usize>,
    /// Sites pulled toward the wire below (+1) or above (-1) by a coupler.
    pulls: BTreeMap<usize, f64>,
}

fn check_superatom_sites(wire: usize, sites: &BTreeSet<usize>, head: bool) -> Result<()> {
    for &k in sites {
        if k % 2 == 1 {
            return Err(Error::ParityViolation { wire, site: k });
        }
    }
    let mut all: Vec<usize> = sites.iter().copied().collect();
    if head {
        all.insert(0, 0);
    }
    for pair in all.windows(2) {
        if pair[1] - pair[0] < MIN_SUPERATOM_SPACING {
            return Err(Error::SpacingViolation {
                wire,
                first: pair[0],
                second: pair[1],
            });
        }
    }
    Ok(())
}

fn assemble(
    wires: &[WireSpec],
    couplers: &[(usize, usize)],
    superatom_size: usize,
    blockade_radius: f64,
) -> Result<Arrangement> {
    let r = blockade_radius;
    let mut units = Vec::new();
    for (w, spec) in wires.iter().enumerate() {
        for k in 0..spec.length {
            let superatom = (k == 0 && spec.head) || spec.superatoms.contains(&k);
            let pull = spec.pulls.get(&k).copied().unwrap_or(0.0);
            units.push(Unit {
                id: units.len(),
                species: Species::of_site(k),
                kind: if superatom {
                    UnitKind::Superatom
                } else {
                    UnitKind::Atom
                },
                size: if superatom { superatom_size } else { 1 },
                position: [
                    r * SITE_PITCH * k as f64,
                    r * (WIRE_GAP * w as f64 + COUPLER_PULL * pull),
                ],
                role: if k == 0 && spec.head {
                    Role::Head { wire: w }
                } else {
                    Role::Wire { wire: w, site: k }
                },
            });
        }
    }
    for &(upper, site) in couplers {
        units.push(Unit {
            id: units.len(),
            species: Species::B,
            kind: UnitKind::Superatom,
            size: superatom_size,
            position: [
                r * SITE_PITCH * site as f64,
                r * WIRE_GAP * (upper as f64 + 0.5),
            ],
            role: Role::Coupler {
                wires: (upper, upper + 1),
                site,
            },
        });
    }
    Arrangement::from_units(units, blockade_radius, superatom_size)
}

/// A single wire of `length` sites with A superatoms at the given even sites
/// and, if `head`, an A superatom at k = 0.
pub fn build_wire(length: usize, a_superatom_sites: &[usize], head: bool) -> Result<Arrangement> {
    build_wire_with(length, a_superatom_sites, head, DEFAULT_SUPERATOM_SIZE, 1.0)
}

pub fn build_wire_with(
    length: usize,
    a_superatom_sites: &[usize],
    head: bool,
    superatom_size: usize,
    blockade_radius: f64,
) -> Result<Arrangement> {
    let spec = wire_spec(0, length, a_superatom_sites, head, superatom_size)?;
    assemble(&[spec], &[], superatom_size, blockade_radius)
}

fn wire_spec(
    wire: usize,
    length: usize,
    sites: &[usize],
    head: bool,
    superatom_size: usize,
) -> Result<WireSpec> {
    if length < MIN_WIRE_LENGTH {
        return Err(Error::InvalidLayout(format!(
            "wire length {length} is below the minimum of {MIN_WIRE_LENGTH}"
        )));
    }
    if superatom_size < 2 {
        return Err(Error::InvalidLayout(
            "superatom size must be at least 2".into(),
        ));
    }
    let set: BTreeSet<usize> = sites.iter().copied().collect();
    if set.len() != sites.len() {
        let dup = sites
            .iter()
            .find(|k| sites.iter().filter(|j| j == k).count() > 1)
            .unwrap();
        return Err(Error::OverlapViolation { wire, site: *dup });
    }
    if set.contains(&0) {
        return Err(Error::InvalidLayout(
            "site 0 hosts the head; use `head` instead".into(),
        ));
    }
    if let Some(&k) = set.iter().find(|&&k| k >= length) {
        return Err(Error::InvalidLayout(format!(
            "site {k} is beyond wire length {length}"
        )));
    }
    check_superatom_sites(wire, &set, head)?;
    Ok(WireSpec {
        length,
        head,
        superatoms: set,
        pulls: BTreeMap::new(),
    })
}

/// Device placement produced by the compiler.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacementPlan {
    pub n_wires: usize,
    pub wire_length: usize,
    pub placements: Vec<Placement>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Placement {
    /// Index of the gate in the source circuit.
    pub gate: usize,
    pub device: Device,
}

/// Wires of equal length with heads, A superatoms at single-qubit gate sites
/// and B-superatom couplers at two-qubit gate sites. Returns the arrangement
/// and a map from gate index to the unit id of its impurity.
pub fn build_circuit_arrangement(
    plan: &PlacementPlan,
) -> Result<(Arrangement, BTreeMap<usize, usize>)> {
    build_circuit_arrangement_with(plan, DEFAULT_SUPERATOM_SIZE, 1.0)
}

pub fn build_circuit_arrangement_with(
    plan: &PlacementPlan,
    superatom_size: usize,
    blockade_radius: f64,
) -> Result<(Arrangement, BTreeMap<usize, usize>)> {
    let n = plan.n_wires;
    if n == 0 {
        return Err(Error::InvalidLayout("at least one wire is required".into()));
    }
    let mut sq: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut attached: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut couplers = Vec::new();
    for p in &plan.placements {
        match p.device {
            Device::SingleQubit { wire, site } => {
                if wire >= n {
                    return Err(Error::InvalidLayout(format!("wire {wire} out of range")));
                }
                sq[wire].push(site);
            }
            Device::Coupler { upper, site } => {
                if upper + 1 >= n {
                    return Err(Error::InvalidLayout(format!(
                        "coupler below wire {upper} has no partner"
                    )));
                }
                if site % 2 == 1 {
                    return Err(Error::CouplerParityViolation { site });
                }
                for w in [upper, upper + 1] {
                    if !attached[w].insert(site) {
                        return Err(Error::OverlapViolation { wire: w, site });
                    }
                }
                couplers.push((upper, site));
            }
        }
    }
    let mut specs = Vec::with_capacity(n);
    for w in 0..n {
        let spec = wire_spec(w, plan.wire_length, &sq[w], true, superatom_size)?;
        for &k in &attached[w] {
            if spec.superatoms.contains(&k) {
                return Err(Error::OverlapViolation { wire: w, site: k });
            }
            if k == 0 || k >= plan.wire_length {
                return Err(Error::InvalidLayout(format!(
                    "coupler site {k} outside wire {w}"
                )));
            }
        }
        specs.push(spec);
    }
    for &(upper, site) in &couplers {
        *specs[upper].pulls.entry(site).or_default() += 1.0;
        *specs[upper + 1].pulls.entry(site).or_default() -= 1.0;
    }
    let arr = assemble(&specs, &couplers, superatom_size, blockade_radius)?;

    let mut coupler_ids = BTreeMap::new();
    for u in arr.couplers() {
        if let Role::Coupler { wires, site } = u.role {
            coupler_ids.insert((wires.0, site), u.id);
        }
    }
    let mut map = BTreeMap::new();
    for p in &plan.placements {
        let id = match p.device {
            Device::SingleQubit { wire, site } => {
                arr.site_unit(wire, site).expect("placed site exists")
            }
            Device::Coupler { upper, site } => coupler_ids[&(upper, site)],
        };
        map.insert(p.gate, id);
    }
    Ok((arr, map))
}

/// Site offset of wire `q`'s single-qubit device in the universal layout.
pub fn universal_single_site(q: usize) -> usize {
    FIRST_DEVICE_SITE + MIN_SUPERATOM_SPACING * q
}

/// Site offset of the coupler between `q` and `q + 1` in the universal layout;
/// all couplers sit beyond every single-qubit device.
pub fn universal_coupler_site(n: usize, q: usize) -> usize {
    FIRST_DEVICE_SITE + MIN_SUPERATOM_SPACING * n + 2 + MIN_SUPERATOM_SPACING * q
}

/// Circuit-independent layout: one A superatom per wire and one coupler per
/// neighbouring wire pair, each at its own site offset.
pub fn build_universal_arrangement(n: usize) -> Result<Arrangement> {
    build_universal_arrangement_with(n, DEFAULT_SUPERATOM_SIZE, 1.0)
}

pub fn build_universal_arrangement_with(
    n: usize,
    superatom_size: usize,
    blockade_radius: f64,
) -> Result<Arrangement> {
    if n == 0 {
        return Err(Error::InvalidLayout("at least one wire is required".into()));
    }
    let last = if n == 1 {
        universal_single_site(0)
    } else {
        universal_coupler_site(n, n - 2)
    };
    let mut placements = Vec::new();
    for q in 0..n {
        placements.push(Placement {
            gate: placements.len(),
            device: Device::SingleQubit {
                wire: q,
                site: universal_single_site(q),
            },
        });
    }
    for q in 0..n.saturating_sub(1) {
        placements.push(Placement {
            gate: placements.len(),
            device: Device::Coupler {
                upper: q,
                site: universal_coupler_site(n, q),
            },
        });
    }
    let plan = PlacementPlan {
        n_wires: n,
        wire_length: last + 1 + TRAILING_SITES,
        placements,
    };
    Ok(build_circuit_arrangement_with(&plan, superatom_size, blockade_radius)?.0)
}

/// Reference atom count for the universal processor, `2n^2 + 3(S+1)n - S`.
pub fn universal_atom_formula(n: usize, superatom_size: usize) -> i64 {
    let (n, s) = (n as i64, superatom_size as i64);
    2 * n * n + 3 * (s + 1) * n - s
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Diagnostic {
    WrongSpecies { unit: usize },
    SuperatomSizeMismatch { unit: usize },
    OddSuperatomSite { unit: usize },
    HeadNotSuperatom { unit: usize },
    WireLinkMissing { a: usize, b: usize },
    WireLongRange { a: usize, b: usize },
    SuperatomSpacing { a: usize, b: usize },
    PartialSuperatomOverlap { superatom: usize, other: usize },
    SuperatomNotCompact { unit: usize },
    CouplerAttachment { coupler: usize },
    DrivenAdjacency { a: usize, b: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::WrongSpecies { unit } => {
                write!(f, "unit {unit} has the wrong species for its site")
            }
            Diagnostic::SuperatomSizeMismatch { unit } => {
                write!(f, "superatom {unit} has a non-standard size")
            }
            Diagnostic::OddSuperatomSite { unit } => {
                write!(f, "wire superatom {unit} sits on an odd site")
            }
            Diagnostic::HeadNotSuperatom { unit } => {
                write!(f, "head unit {unit} is not a superatom")
            }
            Diagnostic::WireLinkMissing { a, b } => {
                write!(f, "consecutive sites {a}, {b} are not blockaded")
            }
            Diagnostic::WireLongRange { a, b } => {
                write!(f, "non-adjacent wire sites {a}, {b} are blockaded")
            }
            Diagnostic::SuperatomSpacing { a, b } => {
                write!(f, "A superatoms {a}, {b} are closer than 4 sites")
            }
            Diagnostic::PartialSuperatomOverlap { superatom, other } => {
                write!(
                    f,
                    "superatom {superatom} is partially inside the radius of unit {other}"
                )
            }
            Diagnostic::SuperatomNotCompact { unit } => {
                write!(f, "atoms of superatom {unit} are not mutually blockaded")
            }
            Diagnostic::CouplerAttachment { coupler } => {
                write!(
                    f,
                    "coupler {coupler} does not touch exactly one matching A site per wire"
                )
            }
            Diagnostic::DrivenAdjacency { a, b } => {
                write!(f, "same-species units {a}, {b} are blockaded")
            }
        }
    }
}

struct PhysicalRelation {
    unit_adj: Vec<BTreeSet<usize>>,
    partial: Vec<(usize, usize)>,
    not_compact: Vec<usize>,
}

fn physical_relation(arr: &Arrangement) -> PhysicalRelation {
    let r = arr.blockade_radius;
    let atoms = arr.atom_positions();
    let n = arr.units.len();
    // Count of atom pairs within R_B per unit pair.
    let mut close: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut not_compact = BTreeSet::new();
    for i in 0..atoms.len() {
        for j in (i + 1)..atoms.len() {
            let (ui, pi) = atoms[i];
            let (uj, pj) = atoms[j];
            let within = distance(pi, pj) <= r;
            if ui == uj {
                if !within {
                    not_compact.insert(ui);
                }
            } else if within {
                *close.entry((ui.min(uj), ui.max(uj))).or_default() += 1;
            }
        }
    }
    let mut unit_adj = vec![BTreeSet::new(); n];
    let mut partial = Vec::new();
    for (&(a, b), &count) in &close {
        let full = arr.units[a].size * arr.units[b].size;
        if count == full {
            unit_adj[a].insert(b);
            unit_adj[b].insert(a);
        } else {
            let sup = if arr.units[a].is_superatom() { a } else { b };
            let other = if sup == a { b } else { a };
            partial.push((sup, other));
        }
    }
    PhysicalRelation {
        unit_adj,
        partial,
        not_compact: not_compact.into_iter().collect(),
    }
}

/// Check every arrangement invariant; empty output means the layout is sound.
pub fn validate(arr: &Arrangement) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let rel = physical_relation(arr);

    for u in &arr.units {
        match u.role {
            Role::Wire { site, .. } => {
                if u.species != Species::of_site(site) {
                    out.push(Diagnostic::WrongSpecies { unit: u.id });
                }
                if u.is_superatom() && site % 2 == 1 {
                    out.push(Diagnostic::OddSuperatomSite { unit: u.id });
                }
            }
            Role::Head { .. } => {
                if u.species != Species::A {
                    out.push(Diagnostic::WrongSpecies { unit: u.id });
                }
                if !u.is_superatom() {
                    out.push(Diagnostic::HeadNotSuperatom { unit: u.id });
                }
            }
            Role::Coupler { .. } => {
                if u.species != Species::B || !u.is_superatom() {
                    out.push(Diagnostic::WrongSpecies { unit: u.id });
                }
            }
        }
        let size_ok = match u.kind {
            UnitKind::Atom => u.size == 1,
            UnitKind::Superatom => u.size == arr.superatom_size && u.size >= 2,
        };
        if !size_ok {
            out.push(Diagnostic::SuperatomSizeMismatch { unit: u.id });
        }
    }

    for w in 0..arr.n_wires {
        let ids = &arr.sites[w];
        for (i, &a) in ids.iter().enumerate() {
            for (j, &b) in ids.iter().enumerate().skip(i + 1) {
                let adj = rel.unit_adj[a].contains(&b);
                if j == i + 1 && !adj {
                    out.push(Diagnostic::WireLinkMissing { a, b });
                }
                if j > i + 1 && adj {
                    out.push(Diagnostic::WireLongRange { a, b });
                }
            }
        }
        let sup: Vec<(usize, usize)> = ids
            .iter()
            .enumerate()
            .filter(|&(_, &u)| arr.units[u].is_superatom() && arr.units[u].species == Species::A)
            .map(|(k, &u)| (k, u))
            .collect();
        for pair in sup.windows(2) {
            if pair[1].0 - pair[0].0 < MIN_SUPERATOM_SPACING {
                out.push(Diagnostic::SuperatomSpacing {
                    a: pair[0].1,
                    b: pair[1].1,
                });
            }
        }
    }

    for (sup, other) in &rel.partial {
        out.push(Diagnostic::PartialSuperatomOverlap {
            superatom: *sup,
            other: *other,
        });
    }
    for &u in &rel.not_compact {
        out.push(Diagnostic::SuperatomNotCompact { unit: u });
    }

    for c in arr.couplers() {
        let Role::Coupler { wires, site } = c.role else {
            continue;
        };
        let nbrs = &rel.unit_adj[c.id];
        let expected: BTreeSet<usize> = [wires.0, wires.1]
            .iter()
            .filter_map(|&w| arr.site_unit(w, site))
            .collect();
        let ok =
            site % 2 == 0 && expected.len() == 2 && *nbrs == expected && wires.1 == wires.0 + 1;
        if !ok {
            out.push(Diagnostic::CouplerAttachment { coupler: c.id });
        }
    }

    for (a, nbrs) in rel.unit_adj.iter().enumerate() {
        for &b in nbrs.iter().filter(|&&b| b > a) {
            if arr.units[a].species == arr.units[b].species {
                out.push(Diagnostic::DrivenAdjacency { a, b });
            }
        }
    }
    out
}

/// Binary blockade graph induced by the geometry. A pair of atoms is
/// blockaded iff their separation is at most the blockade radius.
pub fn blockade_graph(arr: &Arrangement) -> Result<BlockadeGraph> {
    let rel = physical_relation(arr);
    if let Some(&(superatom, other)) = rel.partial.first() {
        return Err(Error::PartialSuperatomOverlap { superatom, other });
    }
    if let Some(&unit) = rel.not_compact.first() {
        return Err(Error::InvalidLayout(format!(
            "superatom {unit} is not compact"
        )));
    }
    let units: Vec<(Species, usize)> = arr.units.iter().map(|u| (u.species, u.size)).collect();
    let edges: Vec<(usize, usize)> = rel
        .unit_adj
        .iter()
        .enumerate()
        .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
        .collect();
    Ok(BlockadeGraph::from_units(&units, &edges))
}

#[cfg(test)]
mod tests;
