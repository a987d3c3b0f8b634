//! Device coupling maps and the heavy-hex placement of a honeycomb star.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Boundary, BoundarySpin, EncodingMethod, Lattice, Port, SiteEncoding};
use crate::error::{Result, VbsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    AllToAll,
    Linear,
    HeavyHex,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 3] = [CouplingKind::AllToAll, CouplingKind::Linear, CouplingKind::HeavyHex];

    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::AllToAll => "all_to_all",
            CouplingKind::Linear => "linear",
            CouplingKind::HeavyHex => "heavy_hex",
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingKind {
    type Err = VbsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_to_all" | "all-to-all" => Ok(CouplingKind::AllToAll),
            "linear" => Ok(CouplingKind::Linear),
            "heavy_hex" | "heavy-hex" | "heavy_hex_patch" => Ok(CouplingKind::HeavyHex),
            other => Err(VbsError::InvalidArgument(format!("unknown coupling `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMap {
    kind: CouplingKind,
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl CouplingMap {
    pub fn from_edges(kind: CouplingKind, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(VbsError::InvalidArgument(format!("bad coupling edge ({a},{b})")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &set {
            adj[a].push(b);
            adj[b].push(a);
        }
        let map = Self {
            kind,
            n,
            edges: set,
            adj,
        };
        if n == 0 || !map.is_connected_set(&(0..n).collect::<Vec<_>>()) {
            return Err(VbsError::DisconnectedCoupling);
        }
        Ok(map)
    }

    pub fn all_to_all(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Self::from_edges(CouplingKind::AllToAll, n, edges)
    }

    pub fn linear(n: usize) -> Result<Self> {
        Self::from_edges(CouplingKind::Linear, n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn are_coupled(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// True when `qubits` induce a connected subgraph.
    pub fn is_connected_set(&self, qubits: &[usize]) -> bool {
        if qubits.len() <= 1 {
            return true;
        }
        let mut seen = vec![false; qubits.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (j, &q) in qubits.iter().enumerate() {
                if !seen[j] && self.are_coupled(qubits[i], q) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Shortest path from `from` to any node satisfying `goal`, never entering
    /// `blocked` nodes (the start itself may be blocked). Ties resolve toward
    /// lower qubit indices.
    pub fn shortest_path(&self, from: usize, goal: impl Fn(usize) -> bool, blocked: &[bool]) -> Option<Vec<usize>> {
        if goal(from) {
            return Some(vec![from]);
        }
        let mut prev = vec![usize::MAX; self.n];
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let mut nbrs = self.adj[u].clone();
            nbrs.sort_unstable();
            for v in nbrs {
                if seen[v] || blocked[v] {
                    continue;
                }
                seen[v] = true;
                prev[v] = u;
                if goal(v) {
                    let mut path = vec![v];
                    let mut cur = v;
                    while cur != from {
                        cur = prev[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(v);
            }
        }
        None
    }
}

/// A honeycomb star placed on a heavy-hex patch: one spin-3/2 island site
/// `A` whose three neighbors `B` sit on degree-3 hub qubits. Two of the
/// island's partner qubits start three qubits away from their hubs, so
/// gathering each hub's data needs three SWAPs per displaced qubit.
#[derive(Clone, Debug)]
pub struct HeavyHexLayout {
    pub coupling: CouplingMap,
    pub lattice: Lattice,
    /// Physical position of every data qubit of the lattice encoding.
    pub data_positions: Vec<usize>,
    /// Physical ancilla position per site for the all-ancilla encoding.
    pub all_ancilla_positions: Vec<usize>,
    /// Physical ancilla position per site for the islands encoding.
    pub island_ancilla_positions: Vec<Option<usize>>,
    /// Qubits displaced by the routing (physical start positions).
    pub displaced: Vec<usize>,
}

impl HeavyHexLayout {
    /// Logical-to-physical placement matching `encoding`.
    pub fn placement(&self, encoding: &SiteEncoding) -> Result<Vec<usize>> {
        encoding.check_against(&self.lattice)?;
        let mut out = self.data_positions.clone();
        let ancillas: Vec<Option<usize>> = match encoding.method {
            EncodingMethod::HadamardAll => self.all_ancilla_positions.iter().copied().map(Some).collect(),
            EncodingMethod::IslandsPlusSublattice => self.island_ancilla_positions.clone(),
            _ => vec![None; self.lattice.n_sites()],
        };
        for (site, anc) in encoding.ancilla.iter().enumerate() {
            if let Some(logical) = anc {
                let phys = ancillas[site].ok_or(VbsError::MissingAncilla(site))?;
                if *logical != out.len() {
                    return Err(VbsError::EncodingMismatch("ancillas must follow data qubits in site order".into()));
                }
                out.push(phys);
            }
        }
        Ok(out)
    }
}

/// Heavy-hex patch of 21 qubits holding the honeycomb star.
///
/// Row 0 runs along columns 1..=15 (physical 0..=14). Bridges: 15 above
/// column 2, 16 above column 14, 17 below column 8. Row 1 holds columns
/// 7, 8, 9 (physical 18, 19, 20), with column 8 joined to bridge 17.
pub fn heavy_hex_star_layout() -> Result<HeavyHexLayout> {
    let col = |c: usize| c - 1;
    let mut edges: Vec<(usize, usize)> = (1..15).map(|c| (col(c), col(c + 1))).collect();
    edges.extend([(15, col(2)), (16, col(14)), (17, col(8)), (17, 19), (18, 19), (19, 20)]);
    let coupling = CouplingMap::from_edges(CouplingKind::HeavyHex, 21, edges)?;

    // Site 0 = island A; 1 = left hub, 2 = right hub, 3 = lower hub.
    let links = vec![(0, 1), (0, 3), (0, 2)];
    let up = BoundarySpin::Up;
    let down = BoundarySpin::Down;
    let ports = vec![
        vec![Port::Link(0), Port::Link(1), Port::Link(2)],
        vec![Port::Dangling(up), Port::Link(0), Port::Dangling(down)],
        vec![Port::Link(2), Port::Dangling(down), Port::Dangling(up)],
        vec![Port::Dangling(up), Port::Link(1), Port::Dangling(down)],
    ];
    let lattice = Lattice::from_ports("heavy-hex-star", links, ports, Boundary::ExplicitGraph)?;
    let data_positions = vec![
        col(7),
        col(8),
        col(9), // island site qubits
        col(1),
        col(6),
        15, // left hub: dangling, partner, dangling
        col(10),
        col(15),
        16, // right hub
        18,
        17,
        20, // lower hub
    ];
    Ok(HeavyHexLayout {
        coupling,
        lattice,
        data_positions,
        all_ancilla_positions: vec![col(5), col(2), col(14), 19],
        island_ancilla_positions: vec![None, Some(col(2)), Some(col(14)), Some(19)],
        displaced: vec![col(6), col(10)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::assign_qubits;

    #[test]
    fn basic_maps() {
        let a = CouplingMap::all_to_all(4).unwrap();
        assert!(a.are_coupled(0, 3));
        let l = CouplingMap::linear(4).unwrap();
        assert!(!l.are_coupled(0, 2));
        assert!(l.is_connected_set(&[1, 2, 3]));
        assert!(!l.is_connected_set(&[0, 2]));
        assert!(matches!(
            CouplingMap::from_edges(CouplingKind::Linear, 4, [(0, 1), (2, 3)]),
            Err(VbsError::DisconnectedCoupling)
        ));
    }

    #[test]
    fn star_layout_is_heavy_hex() {
        let h = heavy_hex_star_layout().unwrap();
        let c = &h.coupling;
        assert!((0..21).all(|q| c.neighbors(q).len() <= 3));
        // No two degree-3 qubits are adjacent.
        for &(a, b) in c.edges() {
            assert!(c.neighbors(a).len() < 3 || c.neighbors(b).len() < 3);
        }
        let e = assign_qubits(&h.lattice, EncodingMethod::HadamardAll).unwrap();
        let p = h.placement(&e).unwrap();
        let mut sorted = p.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), p.len());
        // Every valence bond starts on coupled qubits.
        for &(a, b) in &e.link_qubits {
            assert!(c.are_coupled(p[a], p[b]));
        }
        assert_eq!(h.lattice.uniform_spin().unwrap().twice_s(), 3);
    }
}
