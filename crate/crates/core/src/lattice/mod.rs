//! Lattices of spin sites joined by valence-bond links.
//!
//! Each site owns an ordered list of ports. A port is either one end of a
//! link or a dangling spin-1/2 fixed to up or down (used for the free end
//! spins of open chains). A site with `k` ports carries spin `k/2` and is
//! encoded in `k` qubits.

mod coupling;
mod encoding;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

pub use coupling::{heavy_hex_star_layout, CouplingKind, CouplingMap, HeavyHexLayout};
pub use encoding::{assign_qubits, EncodingMethod, SiteEncoding};

use crate::error::{Result, VbsError};
use crate::spinops::SpinValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpin {
    Up,
    Down,
}

impl BoundarySpin {
    /// Computational-basis value of the qubit (up = 0).
    pub fn bit(self) -> u8 {
        match self {
            BoundarySpin::Up => 0,
            BoundarySpin::Down => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    OpenChain { left: BoundarySpin, right: BoundarySpin },
    Ring,
    ExplicitGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    Link(usize),
    Dangling(BoundarySpin),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    name: String,
    links: Vec<(usize, usize)>,
    ports: Vec<Vec<Port>>,
    boundary: Boundary,
    sublattice: Option<Vec<Sublattice>>,
}

impl Lattice {
    /// Validates and builds a lattice from explicit ports.
    pub fn from_ports(
        name: impl Into<String>,
        links: Vec<(usize, usize)>,
        ports: Vec<Vec<Port>>,
        boundary: Boundary,
    ) -> Result<Self> {
        let n = ports.len();
        if n == 0 {
            return Err(VbsError::InvalidLattice("no sites".into()));
        }
        let mut seen = vec![0usize; links.len()];
        for (l, &(a, b)) in links.iter().enumerate() {
            if a >= n || b >= n {
                return Err(VbsError::InvalidLattice(format!("link {l} references a missing site")));
            }
            if a == b {
                return Err(VbsError::InvalidLattice(format!("link {l} is a self-loop")));
            }
        }
        for (site, ps) in ports.iter().enumerate() {
            if ps.is_empty() {
                return Err(VbsError::InvalidLattice(format!("site {site} has no ports")));
            }
            for p in ps {
                if let Port::Link(l) = *p {
                    let Some(&(a, b)) = links.get(l) else {
                        return Err(VbsError::InvalidLattice(format!("site {site} lists missing link {l}")));
                    };
                    if a != site && b != site {
                        return Err(VbsError::InvalidLattice(format!("site {site} is not an endpoint of link {l}")));
                    }
                    seen[l] += 1;
                }
            }
        }
        if let Some(l) = seen.iter().position(|&c| c != 2) {
            return Err(VbsError::InvalidLattice(format!(
                "link {l} must appear once at each endpoint"
            )));
        }
        let mut lat = Self {
            name: name.into(),
            links,
            ports,
            boundary,
            sublattice: None,
        };
        lat.sublattice = lat.bfs_coloring().ok();
        Ok(lat)
    }

    /// Builds a lattice whose ports list links in order, then dangling spins.
    pub fn from_links(
        name: impl Into<String>,
        n_sites: usize,
        links: Vec<(usize, usize)>,
        dangling: &[(usize, BoundarySpin)],
        boundary: Boundary,
    ) -> Result<Self> {
        let mut ports = vec![Vec::new(); n_sites];
        for (l, &(a, b)) in links.iter().enumerate() {
            if a >= n_sites || b >= n_sites {
                return Err(VbsError::InvalidLattice(format!("link {l} references a missing site")));
            }
            ports[a].push(Port::Link(l));
            if b != a {
                ports[b].push(Port::Link(l));
            }
        }
        for &(site, spin) in dangling {
            if site >= n_sites {
                return Err(VbsError::InvalidLattice(format!("dangling spin on missing site {site}")));
            }
            ports[site].push(Port::Dangling(spin));
        }
        Self::from_ports(name, links, ports, boundary)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_sites(&self) -> usize {
        self.ports.len()
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn ports(&self, site: usize) -> &[Port] {
        &self.ports[site]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of incident links, counting multiplicity.
    pub fn coordination(&self, site: usize) -> usize {
        self.ports[site]
            .iter()
            .filter(|p| matches!(p, Port::Link(_)))
            .count()
    }

    /// Qubits (links plus dangling spins) held by a site.
    pub fn site_qubit_count(&self, site: usize) -> usize {
        self.ports[site].len()
    }

    pub fn site_spin(&self, site: usize) -> SpinValue {
        SpinValue::new(self.site_qubit_count(site) as u32).expect("sites have ports")
    }

    /// The common spin when every site carries the same spin.
    pub fn uniform_spin(&self) -> Option<SpinValue> {
        let s = self.site_spin(0);
        (0..self.n_sites()).all(|i| self.site_spin(i) == s).then_some(s)
    }

    pub fn total_data_qubits(&self) -> usize {
        self.ports.iter().map(Vec::len).sum()
    }

    pub fn sublattice(&self) -> Option<&[Sublattice]> {
        self.sublattice.as_deref()
    }

    pub fn is_bipartite(&self) -> bool {
        self.sublattice.is_some()
    }

    pub fn sites_in(&self, which: Sublattice) -> Vec<usize> {
        match &self.sublattice {
            Some(s) => (0..self.n_sites()).filter(|&i| s[i] == which).collect(),
            None => Vec::new(),
        }
    }

    /// Neighbor site across each link port of `site`.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        self.ports[site]
            .iter()
            .filter_map(|p| match *p {
                Port::Link(l) => {
                    let (a, b) = self.links[l];
                    Some(if a == site { b } else { a })
                }
                Port::Dangling(_) => None,
            })
            .collect()
    }

    /// Sublattice assignment: the stored one (see [`Lattice::with_sublattice`])
    /// or the BFS coloring.
    pub fn two_coloring(&self) -> Result<Vec<Sublattice>> {
        match &self.sublattice {
            Some(s) => Ok(s.clone()),
            None => self.bfs_coloring(),
        }
    }

    /// Replaces the sublattice assignment; neighbors must differ.
    pub fn with_sublattice(mut self, colors: Vec<Sublattice>) -> Result<Self> {
        if colors.len() != self.n_sites() {
            return Err(VbsError::DimensionMismatch {
                expected: self.n_sites(),
                got: colors.len(),
            });
        }
        for &(a, b) in &self.links {
            if colors[a] == colors[b] {
                return Err(VbsError::InvalidLattice(format!("sites {a} and {b} share a sublattice")));
            }
        }
        self.sublattice = Some(colors);
        Ok(self)
    }

    /// BFS 2-coloring; the lowest-index site of each component is `A`.
    fn bfs_coloring(&self) -> Result<Vec<Sublattice>> {
        let n = self.n_sites();
        let mut color: Vec<Option<Sublattice>> = vec![None; n];
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(Sublattice::A);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].unwrap();
                let other = if cu == Sublattice::A { Sublattice::B } else { Sublattice::A };
                for v in self.neighbors(u) {
                    match color[v] {
                        None => {
                            color[v] = Some(other);
                            queue.push_back(v);
                        }
                        Some(cv) if cv == cu => return Err(VbsError::OddCycle { site: v }),
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(color.into_iter().map(Option::unwrap).collect())
    }

    /// Stable textual fingerprint used in circuit metadata.
    pub fn descriptor(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        for &(a, b) in &self.links {
            eat(a as u64);
            eat(b as u64);
        }
        for ps in &self.ports {
            eat(ps.len() as u64 + 1000);
            for p in ps {
                eat(match p {
                    Port::Link(l) => *l as u64,
                    Port::Dangling(s) => 1 << 40 | s.bit() as u64,
                });
            }
        }
        format!("{}#{h:016x}", self.name)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = LatticeDoc {
            sites: self
                .ports
                .iter()
                .map(|p| SiteDoc {
                    ports: Some(p.clone()),
                    dangling: Vec::new(),
                })
                .collect(),
            links: self.links.iter().map(|&(a, b)| [a, b]).collect(),
            boundary: self.boundary,
            name: Some(self.name.clone()),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LatticeDoc = serde_json::from_str(text)?;
        let links: Vec<(usize, usize)> = doc.links.iter().map(|l| (l[0], l[1])).collect();
        let name = doc.name.unwrap_or_else(|| "file".into());
        if doc.sites.iter().all(|s| s.ports.is_some()) {
            let ports = doc.sites.into_iter().map(|s| s.ports.unwrap()).collect();
            return Self::from_ports(name, links, ports, doc.boundary);
        }
        if doc.sites.iter().any(|s| s.ports.is_some()) {
            return Err(VbsError::InvalidLattice("give ports for all sites or for none".into()));
        }
        let dangling: Vec<(usize, BoundarySpin)> = doc
            .sites
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.dangling.iter().map(move |&d| (i, d)))
            .collect();
        Self::from_links(name, doc.sites.len(), links, &dangling, doc.boundary)
    }
}

/// JSON form of a lattice. Each site either lists its ports explicitly or
/// only its dangling spins (ports then follow link order).
#[derive(Serialize, Deserialize)]
struct LatticeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    sites: Vec<SiteDoc>,
    links: Vec<[usize; 2]>,
    boundary: Boundary,
}

#[derive(Serialize, Deserialize)]
struct SiteDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ports: Option<Vec<Port>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dangling: Vec<BoundarySpin>,
}

/// Chain boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainBoundary {
    Open { left: BoundarySpin, right: BoundarySpin },
    Ring,
}

impl ChainBoundary {
    pub const ALIGNED: ChainBoundary = ChainBoundary::Open {
        left: BoundarySpin::Up,
        right: BoundarySpin::Up,
    };
    pub const ANTI_ALIGNED: ChainBoundary = ChainBoundary::Open {
        left: BoundarySpin::Up,
        right: BoundarySpin::Down,
    };
}

/// Spin-1 chain. Site `i` has ports `[left, right]`; link `i` joins sites
/// `i` and `i+1`, and a ring adds link `n-1` joining `n-1` and `0`.
pub fn build_chain(n_sites: usize, boundary: ChainBoundary) -> Result<Lattice> {
    if n_sites < 2 {
        return Err(VbsError::InvalidLattice(format!("chain needs at least 2 sites, got {n_sites}")));
    }
    let n = n_sites;
    match boundary {
        ChainBoundary::Open { left, right } => {
            let links: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            let ports = (0..n)
                .map(|i| {
                    let l = if i == 0 { Port::Dangling(left) } else { Port::Link(i - 1) };
                    let r = if i == n - 1 { Port::Dangling(right) } else { Port::Link(i) };
                    vec![l, r]
                })
                .collect();
            let kind = if left == right { "aligned" } else { "anti" };
            Lattice::from_ports(
                format!("chain:{n}:open:{kind}"),
                links,
                ports,
                Boundary::OpenChain { left, right },
            )
        }
        ChainBoundary::Ring => {
            let links: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            let ports = (0..n)
                .map(|i| vec![Port::Link((i + n - 1) % n), Port::Link(i)])
                .collect();
            Lattice::from_ports(format!("chain:{n}:ring"), links, ports, Boundary::Ring)
        }
    }
}

/// Two spin-3/2 sites joined by three links.
pub fn build_three_link_pair() -> Result<Lattice> {
    let links = vec![(0, 1), (0, 1), (0, 1)];
    let ports = vec![
        vec![Port::Link(0), Port::Link(1), Port::Link(2)],
        vec![Port::Link(0), Port::Link(1), Port::Link(2)],
    ];
    Lattice::from_ports("three-link-pair", links, ports, Boundary::ExplicitGraph)
}

/// Ring of `n_sites` (even) spin-3/2 sites whose links alternate double and
/// single, so that every site has coordination 3. `n_sites = 2` is the
/// three-link pair.
pub fn build_coordination3_ring(n_sites: usize) -> Result<Lattice> {
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(VbsError::InvalidLattice(format!(
            "coordination-3 ring needs an even number of sites >= 2, got {n_sites}"
        )));
    }
    let n = n_sites;
    let mut links = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let mult = if i % 2 == 0 { 2 } else { 1 };
        for _ in 0..mult {
            links.push((i, j));
        }
    }
    Lattice::from_links(format!("c3ring:{n}"), n, links, &[], Boundary::ExplicitGraph)
}

/// Honeycomb patch of `rows x cols` hexagons in brick-wall form. Boundary
/// sites have coordination 2 and carry spin 1.
pub fn build_honeycomb_patch(rows: usize, cols: usize) -> Result<Lattice> {
    if rows == 0 || cols == 0 {
        return Err(VbsError::InvalidLattice("honeycomb dimensions must be positive".into()));
    }
    let height = rows + 1;
    let width = 2 * cols + 2;
    let mut alive = vec![vec![true; width]; height];
    let horizontal = |r: usize, c: usize| c + 1 < width && r < height;
    let vertical = |r: usize, c: usize| r + 1 < height && (c + r).is_multiple_of(2);
    let degree = |alive: &Vec<Vec<bool>>, r: usize, c: usize| {
        let mut d = 0;
        if c > 0 && alive[r][c - 1] {
            d += 1;
        }
        if c + 1 < width && alive[r][c + 1] {
            d += 1;
        }
        if vertical(r, c) && alive[r + 1][c] {
            d += 1;
        }
        if r > 0 && vertical(r - 1, c) && alive[r - 1][c] {
            d += 1;
        }
        d
    };
    loop {
        let mut changed = false;
        for r in 0..height {
            for c in 0..width {
                if alive[r][c] && degree(&alive, r, c) <= 1 {
                    alive[r][c] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut id = BTreeMap::new();
    for r in 0..height {
        for c in 0..width {
            if alive[r][c] {
                let next = id.len();
                id.insert((r, c), next);
            }
        }
    }
    let mut links = Vec::new();
    for r in 0..height {
        for c in 0..width {
            if !alive[r][c] {
                continue;
            }
            if horizontal(r, c) && alive[r][c + 1] {
                links.push((id[&(r, c)], id[&(r, c + 1)]));
            }
            if vertical(r, c) && alive[r + 1][c] {
                links.push((id[&(r, c)], id[&(r + 1, c)]));
            }
        }
    }
    Lattice::from_links(
        format!("honeycomb:{rows}:{cols}"),
        id.len(),
        links,
        &[],
        Boundary::ExplicitGraph,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_four() {
        let l = build_chain(4, ChainBoundary::Ring).unwrap();
        assert_eq!(l.links().len(), 4);
        assert!((0..4).all(|i| l.coordination(i) == 2));
        assert_eq!(
            l.sublattice().unwrap(),
            &[Sublattice::A, Sublattice::B, Sublattice::A, Sublattice::B]
        );
    }

    #[test]
    fn open_three() {
        let l = build_chain(3, ChainBoundary::ALIGNED).unwrap();
        assert_eq!(l.links().len(), 2);
        assert_eq!(l.coordination(0), 1);
        assert_eq!(l.site_qubit_count(0), 2);
        assert_eq!(l.uniform_spin(), Some(SpinValue::ONE));
        assert!(build_chain(1, ChainBoundary::Ring).is_err());
    }

    #[test]
    fn odd_ring_is_not_bipartite() {
        let l = build_chain(3, ChainBoundary::Ring).unwrap();
        assert!(!l.is_bipartite());
        assert!(matches!(l.two_coloring(), Err(VbsError::OddCycle { .. })));
    }

    #[test]
    fn three_link_pair() {
        let l = build_three_link_pair().unwrap();
        assert_eq!(l.n_sites(), 2);
        assert_eq!(l.coordination(0), 3);
        assert_eq!(l.coordination(1), 3);
        assert_eq!(l.sublattice().unwrap(), &[Sublattice::A, Sublattice::B]);
        assert_eq!(l.total_data_qubits(), 6);
    }

    #[test]
    fn coordination3_ring() {
        let l = build_coordination3_ring(4).unwrap();
        assert!((0..4).all(|i| l.coordination(i) == 3));
        assert!(l.is_bipartite());
        assert!(build_coordination3_ring(3).is_err());
    }

    #[test]
    fn honeycomb_counts() {
        let h = build_honeycomb_patch(1, 1).unwrap();
        assert_eq!(h.n_sites(), 6);
        assert_eq!(h.links().len(), 6);
        assert!((0..6).all(|i| h.coordination(i) == 2));
        let h2 = build_honeycomb_patch(1, 2).unwrap();
        assert_eq!(h2.n_sites(), 10);
        assert_eq!(h2.links().len(), 11);
        for (r, c) in [(2, 1), (2, 2), (3, 3)] {
            let p = build_honeycomb_patch(r, c).unwrap();
            assert!(p.is_bipartite());
            assert!((0..p.n_sites()).all(|i| (2..=3).contains(&p.coordination(i))));
        }
    }

    #[test]
    fn link_endpoint_validation() {
        let bad = Lattice::from_ports(
            "bad",
            vec![(0, 1)],
            vec![vec![Port::Link(0)], vec![Port::Dangling(BoundarySpin::Up)]],
            Boundary::ExplicitGraph,
        );
        assert!(bad.is_err());
        assert!(Lattice::from_links("loop", 1, vec![(0, 0)], &[], Boundary::ExplicitGraph).is_err());
    }

    #[test]
    fn json_round_trip() {
        let l = build_chain(4, ChainBoundary::ANTI_ALIGNED).unwrap();
        let back = Lattice::from_json(&l.to_json().unwrap()).unwrap();
        assert_eq!(l, back);
        let doc = r#"{"sites":[{},{}],"links":[[0,1],[0,1]],"boundary":"ring"}"#;
        let r = Lattice::from_json(doc).unwrap();
        assert_eq!(r.coordination(0), 2);
        let open = r#"{"sites":[{"dangling":["up"]},{"dangling":["down"]}],"links":[[0,1]],
            "boundary":{"open_chain":{"left":"up","right":"down"}}}"#;
        let o = Lattice::from_json(open).unwrap();
        assert_eq!(o.site_qubit_count(1), 2);
    }
}
