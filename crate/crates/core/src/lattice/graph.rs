use serde::{Deserialize, Serialize};

use super::Species;

/// Which degrees of freedom a basis or state is written over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Each superatom is one two-level unit with a `sqrt(S)`-enhanced coupling.
    Unit,
    /// Every physical atom is its own vertex; superatoms are `S`-cliques.
    Physical,
}

/// The blockade relation in one mode, together with what the drive needs to
/// know about each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexGraph {
    pub mode: Mode,
    pub species: Vec<Species>,
    /// Rabi enhancement factor of each vertex (`sqrt(S)` for unit-mode
    /// superatoms, 1 otherwise).
    pub coupling: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl VertexGraph {
    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    /// First pair of mutually blockaded vertices of the given species.
    pub fn driven_adjacency(&self, species: Species) -> Option<(usize, usize)> {
        self.edges()
            .find(|&(a, b)| self.species[a] == species && self.species[b] == species)
    }
}

/// Binary blockade relation over units and over individual atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockadeGraph {
    unit: VertexGraph,
    physical: VertexGraph,
    atom_unit: Vec<usize>,
    unit_atoms: Vec<Vec<usize>>,
}

impl BlockadeGraph {
    /// Build from unit descriptions `(species, size)` and unit-level edges.
    /// Superatoms (`size >= 2`) expand to cliques whose atoms inherit all of
    /// the unit's external edges.
    pub fn from_units(units: &[(Species, usize)], edges: &[(usize, usize)]) -> Self {
        let n = units.len();
        let mut unit_nb = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a != b && a < n && b < n, "bad edge ({a}, {b})");
            unit_nb[a].push(b);
            unit_nb[b].push(a);
        }
        for ns in &mut unit_nb {
            ns.sort_unstable();
            ns.dedup();
        }

        let mut atom_unit = Vec::new();
        let mut unit_atoms = Vec::with_capacity(n);
        for (u, &(_, size)) in units.iter().enumerate() {
            let start = atom_unit.len();
            atom_unit.extend(std::iter::repeat_n(u, size.max(1)));
            unit_atoms.push((start..atom_unit.len()).collect::<Vec<_>>());
        }

        let mut phys_nb = vec![Vec::new(); atom_unit.len()];
        for (atom, &u) in atom_unit.iter().enumerate() {
            let ns = &mut phys_nb[atom];
            ns.extend(unit_atoms[u].iter().copied().filter(|&x| x != atom));
            for &w in &unit_nb[u] {
                ns.extend(unit_atoms[w].iter().copied());
            }
            ns.sort_unstable();
        }

        let unit = VertexGraph {
            mode: Mode::Unit,
            species: units.iter().map(|&(s, _)| s).collect(),
            coupling: units
                .iter()
                .map(|&(_, size)| (size.max(1) as f64).sqrt())
                .collect(),
            neighbors: unit_nb,
        };
        let physical = VertexGraph {
            mode: Mode::Physical,
            species: atom_unit.iter().map(|&u| units[u].0).collect(),
            coupling: vec![1.0; atom_unit.len()],
            neighbors: phys_nb,
        };
        Self {
            unit,
            physical,
            atom_unit,
            unit_atoms,
        }
    }

    pub fn view(&self, mode: Mode) -> &VertexGraph {
        match mode {
            Mode::Unit => &self.unit,
            Mode::Physical => &self.physical,
        }
    }

    pub fn unit_graph(&self) -> &VertexGraph {
        &self.unit
    }

    pub fn physical_graph(&self) -> &VertexGraph {
        &self.physical
    }

    pub fn n_units(&self) -> usize {
        self.unit.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.physical.len()
    }

    pub fn atom_unit(&self, atom: usize) -> usize {
        self.atom_unit[atom]
    }

    pub fn unit_atoms(&self, unit: usize) -> &[usize] {
        &self.unit_atoms[unit]
    }

    /// Project the physical relation back onto units: two units are adjacent
    /// iff some pair of their atoms is.
    pub fn quotient_of_physical(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_units()];
        for (a, b) in self.physical.edges() {
            let (ua, ub) = (self.atom_unit[a], self.atom_unit[b]);
            if ua != ub {
                out[ua].push(ub);
                out[ub].push(ua);
            }
        }
        for ns in &mut out {
            ns.sort_unstable();
            ns.dedup();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superatom_expands_to_clique_sharing_external_edges() {
        let g = BlockadeGraph::from_units(&[(Species::A, 4), (Species::B, 1)], &[(0, 1)]);
        let p = g.physical_graph();
        assert_eq!(p.len(), 5);
        // K4 on atoms 0..4 plus atom 4 joined to all of them.
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(p.is_adjacent(a, b), a != b);
            }
            assert!(p.is_adjacent(a, 4));
        }
        assert_eq!(p.edges().count(), 6 + 4);
        assert_eq!(g.unit_graph().coupling, vec![2.0, 1.0]);
    }

    #[test]
    fn quotient_matches_unit_relation() {
        let units = [
            (Species::A, 4),
            (Species::B, 1),
            (Species::A, 1),
            (Species::B, 4),
        ];
        let g = BlockadeGraph::from_units(&units, &[(0, 1), (1, 2), (2, 3)]);
        let q = g.quotient_of_physical();
        for (u, ns) in q.iter().enumerate() {
            assert_eq!(ns, g.unit_graph().neighbors(u));
        }
    }

    #[test]
    fn detects_driven_adjacency() {
        let g = BlockadeGraph::from_units(&[(Species::A, 1), (Species::A, 1)], &[(0, 1)]);
        assert_eq!(g.unit_graph().driven_adjacency(Species::A), Some((0, 1)));
        assert_eq!(g.unit_graph().driven_adjacency(Species::B), None);
    }
}
