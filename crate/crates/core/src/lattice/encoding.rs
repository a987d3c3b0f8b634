//! Site-to-qubit assignment.

use serde::{Deserialize, Serialize};

use super::{BoundarySpin, Lattice, Port, Sublattice};
use crate::error::{Result, VbsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMethod {
    /// One ancilla per site.
    HadamardAll,
    /// Ancillas only on sublattice-B sites.
    IslandsPlusSublattice,
    /// Data qubits plus one ancilla for a ring.
    Mps,
    /// Data qubits only.
    DataOnly,
}

/// Data qubits are numbered site by site in port order; ancillas follow.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteEncoding {
    pub method: EncodingMethod,
    pub site_qubits: Vec<Vec<usize>>,
    pub ancilla: Vec<Option<usize>>,
    /// Qubit on each endpoint of every link, in link-endpoint order.
    pub link_qubits: Vec<(usize, usize)>,
    pub dangling: Vec<(usize, BoundarySpin)>,
    pub n_data: usize,
    pub total_qubits: usize,
    /// True when several sites reuse the same ancilla.
    pub shared_ancilla: bool,
}

impl SiteEncoding {
    pub fn data_qubits(&self) -> std::ops::Range<usize> {
        0..self.n_data
    }

    pub fn ancilla_of(&self, site: usize) -> Result<usize> {
        self.ancilla
            .get(site)
            .copied()
            .flatten()
            .ok_or(VbsError::MissingAncilla(site))
    }

    pub fn ancilla_qubits(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.ancilla.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Same encoding with every ancilla mapped to one reusable qubit, so the
    /// register holds the data plus a single ancilla.
    pub fn with_shared_ancilla(&self) -> SiteEncoding {
        let mut e = self.clone();
        if e.ancilla.iter().all(Option::is_none) {
            return e;
        }
        let q = e.n_data;
        for a in e.ancilla.iter_mut().flatten() {
            *a = q;
        }
        e.total_qubits = e.n_data + 1;
        e.shared_ancilla = true;
        e
    }

    /// Checks that the encoding fits `lattice`.
    pub fn check_against(&self, lattice: &Lattice) -> Result<()> {
        if self.site_qubits.len() != lattice.n_sites() || self.link_qubits.len() != lattice.links().len() {
            return Err(VbsError::EncodingMismatch(format!(
                "encoding covers {} sites / {} links, lattice has {} / {}",
                self.site_qubits.len(),
                self.link_qubits.len(),
                lattice.n_sites(),
                lattice.links().len()
            )));
        }
        for s in 0..lattice.n_sites() {
            if self.site_qubits[s].len() != lattice.site_qubit_count(s) {
                return Err(VbsError::EncodingMismatch(format!("site {s} qubit count")));
            }
        }
        Ok(())
    }
}

/// Allocates qubits for `lattice` according to `method`.
pub fn assign_qubits(lattice: &Lattice, method: EncodingMethod) -> Result<SiteEncoding> {
    let n = lattice.n_sites();
    let mut site_qubits = Vec::with_capacity(n);
    let mut link_ends: Vec<Vec<(usize, usize)>> = vec![Vec::new(); lattice.links().len()];
    let mut dangling = Vec::new();
    let mut next = 0usize;
    for site in 0..n {
        let mut qs = Vec::new();
        for p in lattice.ports(site) {
            match *p {
                Port::Link(l) => link_ends[l].push((site, next)),
                Port::Dangling(s) => dangling.push((next, s)),
            }
            qs.push(next);
            next += 1;
        }
        site_qubits.push(qs);
    }
    let link_qubits = lattice
        .links()
        .iter()
        .zip(&link_ends)
        .map(|(&(a, _), ends)| {
            // Port order puts a's end first unless both ends were visited
            // from b first; the lattice guarantees one end per endpoint.
            let (s0, q0) = ends[0];
            let (_, q1) = ends[1];
            if s0 == a {
                (q0, q1)
            } else {
                (q1, q0)
            }
        })
        .collect();
    let n_data = next;
    let mut ancilla = vec![None; n];
    match method {
        EncodingMethod::HadamardAll => {
            for a in ancilla.iter_mut() {
                *a = Some(next);
                next += 1;
            }
        }
        EncodingMethod::IslandsPlusSublattice => {
            let colors = lattice.two_coloring()?;
            for (site, a) in ancilla.iter_mut().enumerate() {
                if colors[site] == Sublattice::B {
                    *a = Some(next);
                    next += 1;
                }
            }
        }
        EncodingMethod::Mps => {
            let is_chain = matches!(lattice.boundary(), super::Boundary::Ring | super::Boundary::OpenChain { .. });
            if !is_chain || lattice.uniform_spin() != Some(crate::spinops::SpinValue::ONE) {
                return Err(VbsError::EncodingMismatch("mps encoding needs a spin-1 chain".into()));
            }
            if lattice.boundary() == super::Boundary::Ring {
                ancilla[0] = Some(next);
                next += 1;
            }
        }
        EncodingMethod::DataOnly => {}
    }
    Ok(SiteEncoding {
        method,
        site_qubits,
        ancilla,
        link_qubits,
        dangling,
        n_data,
        total_qubits: next,
        shared_ancilla: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, build_three_link_pair, ChainBoundary};

    #[test]
    fn hadamard_all_chain() {
        let l = build_chain(4, ChainBoundary::ALIGNED).unwrap();
        let e = assign_qubits(&l, EncodingMethod::HadamardAll).unwrap();
        assert_eq!(e.n_data, 8);
        assert_eq!(e.total_qubits, 12);
        assert_eq!(e.link_qubits, vec![(1, 2), (3, 4), (5, 6)]);
        assert_eq!(e.dangling, vec![(0, BoundarySpin::Up), (7, BoundarySpin::Up)]);
    }

    #[test]
    fn ring_link_qubits() {
        let l = build_chain(3, ChainBoundary::Ring).unwrap();
        let e = assign_qubits(&l, EncodingMethod::DataOnly).unwrap();
        // link 2 joins site 2 (right qubit 5) with site 0 (left qubit 0)
        assert_eq!(e.link_qubits, vec![(1, 2), (3, 4), (5, 0)]);
    }

    #[test]
    fn three_link_pair_encodings() {
        let l = build_three_link_pair().unwrap();
        let e = assign_qubits(&l, EncodingMethod::HadamardAll).unwrap();
        assert_eq!((e.n_data, e.total_qubits), (6, 8));
        let i = assign_qubits(&l, EncodingMethod::IslandsPlusSublattice).unwrap();
        assert_eq!(i.total_qubits, 7);
        assert_eq!(i.ancilla, vec![None, Some(6)]);
    }

    #[test]
    fn islands_chain_four() {
        let l = build_chain(4, ChainBoundary::Ring).unwrap();
        let e = assign_qubits(&l, EncodingMethod::IslandsPlusSublattice).unwrap();
        assert_eq!((e.n_data, e.total_qubits), (8, 10));
        let odd = build_chain(3, ChainBoundary::Ring).unwrap();
        assert!(assign_qubits(&odd, EncodingMethod::IslandsPlusSublattice).is_err());
    }

    #[test]
    fn mps_encoding() {
        let ring = build_chain(4, ChainBoundary::Ring).unwrap();
        assert_eq!(assign_qubits(&ring, EncodingMethod::Mps).unwrap().total_qubits, 9);
        let open = build_chain(4, ChainBoundary::ALIGNED).unwrap();
        assert_eq!(assign_qubits(&open, EncodingMethod::Mps).unwrap().total_qubits, 8);
        assert!(assign_qubits(&build_three_link_pair().unwrap(), EncodingMethod::Mps).is_err());
    }

    #[test]
    fn shared_ancilla() {
        let l = build_chain(4, ChainBoundary::Ring).unwrap();
        let e = assign_qubits(&l, EncodingMethod::HadamardAll).unwrap().with_shared_ancilla();
        assert_eq!(e.total_qubits, 9);
        assert!(e.ancilla.iter().all(|a| *a == Some(8)));
    }
}
