//! SWAP insertion for restricted couplings.
//!
//! Gates are handled segment by segment (segments end at barriers). Inside a
//! segment every multi-qubit gate keeps one connected component in place
//! (the one holding qubits claimed by earlier gates of the segment, else the
//! largest) and pulls the other qubits next to it along shortest paths that
//! avoid claimed qubits. All SWAPs of
//! a segment are emitted first, followed by a barrier and the segment's gates
//! on the updated placement. When no path exists the segment is split.

use super::ir::{cx, Circuit, CostKey, Gate};
use crate::error::{Result, VbsError};
use crate::lattice::{CouplingKind, CouplingMap};

#[derive(Clone, Debug)]
pub struct RoutedCircuit {
    pub circuit: Circuit,
    /// Logical qubit `k` starts on `initial[k]`.
    pub initial: Vec<usize>,
    /// Logical qubit `k` ends on `final_placement[k]`.
    pub final_placement: Vec<usize>,
    pub swaps: Vec<(usize, usize)>,
}

impl RoutedCircuit {
    pub fn swap_cnots(&self) -> usize {
        3 * self.swaps.len()
    }
}

struct Placement {
    phys: Vec<usize>,
    logical_at: Vec<Option<usize>>,
}

impl Placement {
    fn swap(&mut self, a: usize, b: usize) {
        let la = self.logical_at[a];
        let lb = self.logical_at[b];
        self.logical_at[a] = lb;
        self.logical_at[b] = la;
        if let Some(l) = la {
            self.phys[l] = b;
        }
        if let Some(l) = lb {
            self.phys[l] = a;
        }
    }
}

fn components(coupling: &CouplingMap, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; nodes.len()];
    let mut out = Vec::new();
    for s in 0..nodes.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![nodes[s]];
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for j in 0..nodes.len() {
                if !seen[j] && coupling.are_coupled(nodes[i], nodes[j]) {
                    seen[j] = true;
                    comp.push(nodes[j]);
                    stack.push(j);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Tries to make the gate on `logical` qubits connected; returns the SWAPs
/// performed, or `None` when blocked.
fn gather(
    coupling: &CouplingMap,
    place: &mut Placement,
    logical: &[usize],
    locked: &[bool],
) -> Option<Vec<(usize, usize)>> {
    let nodes: Vec<usize> = logical.iter().map(|&l| place.phys[l]).collect();
    if coupling.is_connected_set(&nodes) {
        return Some(Vec::new());
    }
    let comps = components(coupling, &nodes);
    // a component holding claimed qubits cannot move, so it must be the hub
    let claimed = |c: usize| comps[c].iter().any(|&p| locked[p]);
    let hub_idx = (0..comps.len())
        .max_by(|&a, &b| {
            claimed(a)
                .cmp(&claimed(b))
                .then(comps[a].len().cmp(&comps[b].len()))
                .then(b.cmp(&a))
        })
        .expect("non-empty");
    let mut group: Vec<usize> = comps[hub_idx].clone();
    let mut swaps = Vec::new();
    let mut trial_swaps = Vec::new();
    for &l in logical {
        let p = place.phys[l];
        if group.contains(&p) {
            continue;
        }
        if locked[p] {
            for &(a, b) in trial_swaps.iter().rev() {
                place.swap(a, b);
            }
            return None;
        }
        let mut blocked = locked.to_vec();
        for &l2 in logical {
            let p2 = place.phys[l2];
            if p2 != p {
                blocked[p2] = true;
            }
        }
        let goal = |v: usize| !group.contains(&v) && group.iter().any(|&g| coupling.are_coupled(g, v));
        let path = match coupling.shortest_path(p, goal, &blocked) {
            Some(path) => path,
            None => {
                for &(a, b) in trial_swaps.iter().rev() {
                    place.swap(a, b);
                }
                return None;
            }
        };
        for w in path.windows(2) {
            place.swap(w[0], w[1]);
            swaps.push((w[0], w[1]));
            trial_swaps.push((w[0], w[1]));
        }
        group.push(*path.last().expect("path"));
    }
    Some(swaps)
}

fn is_star(coupling: &CouplingMap, nodes: &[usize]) -> bool {
    nodes
        .iter()
        .any(|&c| nodes.iter().filter(|&&o| o != c && coupling.are_coupled(c, o)).count() == nodes.len() - 1)
}

fn resolve_shape_costs(coupling: &CouplingMap, g: &mut Gate) {
    if coupling.kind() != CouplingKind::HeavyHex {
        return;
    }
    if let Gate::Opaque(o) = g {
        if o.costs.contains_key(&CostKey::HeavyHex) {
            return;
        }
        let key = if is_star(coupling, &o.qubits) {
            CostKey::HeavyHexStar
        } else {
            CostKey::HeavyHexPath
        };
        if let Some(c) = o.costs.get(&key).copied() {
            o.costs.insert(CostKey::HeavyHex, c);
        }
    }
}

/// Placement sweeps tried for one retry body.
const RETRY_SWEEPS: usize = 8;

/// Largest body searched exhaustively on a line.
const LINE_SEARCH_MAX: usize = 8;

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Exact placement on a line: picks an order of the body qubits in which
/// every gate is a contiguous run, moves them into a window by adjacent
/// SWAPs and returns those SWAPs.
fn line_arrangement(coupling: &CouplingMap, place: &mut Placement, needs: &[Vec<usize>]) -> Option<Vec<(usize, usize)>> {
    let n = coupling.n_qubits();
    if coupling.kind() != CouplingKind::Linear || (1..n).any(|i| !coupling.are_coupled(i - 1, i)) {
        return None;
    }
    let mut body: Vec<usize> = needs.iter().flatten().copied().collect();
    body.sort_unstable();
    body.dedup();
    let k = body.len();
    if k > LINE_SEARCH_MAX || k > n {
        return None;
    }
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for order in permutations(&body) {
        let at = |q: usize| order.iter().position(|&o| o == q).expect("body qubit");
        let ok = needs.iter().all(|qs| {
            let idx: Vec<usize> = qs.iter().map(|&q| at(q)).collect();
            idx.iter().max().unwrap() - idx.iter().min().unwrap() + 1 == qs.len()
        });
        if !ok {
            continue;
        }
        for w in 0..=n - k {
            let cost: usize = order.iter().enumerate().map(|(i, &q)| place.phys[q].abs_diff(w + i)).sum();
            if best.as_ref().is_none_or(|b| cost < b.0) {
                best = Some((cost, w, order.clone()));
            }
        }
    }
    let (_, w, order) = best?;
    // target slot of whatever sits on each physical qubit
    let mut key = vec![0usize; n];
    let mut next = 0;
    for p in 0..n {
        match place.logical_at[p].and_then(|l| order.iter().position(|&o| o == l)) {
            Some(i) => key[p] = w + i,
            None => {
                if next == w {
                    next += k;
                }
                key[p] = next;
                next += 1;
            }
        }
    }
    let mut swaps = Vec::new();
    let mut moved = true;
    while moved {
        moved = false;
        for i in 1..n {
            if key[i - 1] > key[i] {
                key.swap(i - 1, i);
                place.swap(i - 1, i);
                swaps.push((i - 1, i));
                moved = true;
            }
        }
    }
    Some(swaps)
}

struct Router<'a> {
    coupling: &'a CouplingMap,
    place: Placement,
    out: Circuit,
    swaps: Vec<(usize, usize)>,
}

impl Router<'_> {
    fn flush(&mut self, seg_swaps: &[(usize, usize)], seg: &[Gate]) -> Result<()> {
        if !seg_swaps.is_empty() {
            for &(a, b) in seg_swaps {
                self.out.extend([cx(a, b), cx(b, a), cx(a, b)])?;
            }
            self.out.push(Gate::Barrier)?;
            self.swaps.extend_from_slice(seg_swaps);
        }
        for g in seg {
            let phys = &self.place.phys;
            let mut m = g.remapped(&|q| phys[q]);
            resolve_shape_costs(self.coupling, &mut m);
            if let Gate::RetryUntil { body, .. } = &m {
                for b in body {
                    self.check_local(b)?;
                }
            }
            self.check_local(&m)?;
            self.out.push(m)?;
        }
        Ok(())
    }

    fn check_local(&self, g: &Gate) -> Result<()> {
        match g {
            Gate::Cnot { .. } | Gate::Opaque(_) => {
                let qs = g.qubits();
                if !self.coupling.is_connected_set(&qs) {
                    return Err(VbsError::Routing(format!("gate on {qs:?} left disconnected")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn segment(&mut self, gates: &[Gate]) -> Result<()> {
        let n = self.coupling.n_qubits();
        let mut locked = vec![false; n];
        let mut seg_swaps = Vec::new();
        let mut pending: Vec<Gate> = Vec::new();
        for g in gates {
            let logical: Vec<usize> = match g {
                Gate::Cnot { .. } | Gate::Opaque(_) => g.qubits(),
                Gate::RetryUntil { body, .. } => {
                    // A loop body runs on one placement, so its SWAPs go in
                    // front of the loop.
                    let done = std::mem::take(&mut pending);
                    let s = std::mem::take(&mut seg_swaps);
                    self.flush(&s, &done)?;
                    // Gathering one gate can break an earlier one, so sweep
                    // the body until every gate is local.
                    let needs: Vec<Vec<usize>> = body
                        .iter()
                        .filter(|b| matches!(b, Gate::Cnot { .. } | Gate::Opaque(_)))
                        .map(Gate::qubits)
                        .filter(|qs| qs.len() >= 2)
                        .collect();
                    let free = vec![false; n];
                    let mut body_swaps = Vec::new();
                    let mut settled = false;
                    let is_settled = |place: &Placement| {
                        needs.iter().all(|qs| {
                            let phys: Vec<usize> = qs.iter().map(|&q| place.phys[q]).collect();
                            self.coupling.is_connected_set(&phys)
                        })
                    };
                    'sweeps: for _ in 0..RETRY_SWEEPS {
                        for qs in &needs {
                            match gather(self.coupling, &mut self.place, qs, &free) {
                                Some(sw) => body_swaps.extend(sw),
                                None => break 'sweeps,
                            }
                        }
                        settled = is_settled(&self.place);
                        if settled {
                            break;
                        }
                    }
                    if !settled {
                        if let Some(sw) = line_arrangement(self.coupling, &mut self.place, &needs) {
                            body_swaps.extend(sw);
                            settled = is_settled(&self.place);
                        }
                    }
                    if !settled {
                        return Err(VbsError::Routing("retry body has no common local placement".into()));
                    }
                    self.flush(&body_swaps, std::slice::from_ref(g))?;
                    locked = vec![false; n];
                    continue;
                }
                _ => Vec::new(),
            };
            if logical.len() >= 2 {
                let found = gather(self.coupling, &mut self.place, &logical, &locked);
                let sw = match found {
                    Some(sw) => sw,
                    None => {
                        // placement of pending gates is final; start afresh
                        let done = std::mem::take(&mut pending);
                        let s = std::mem::take(&mut seg_swaps);
                        self.flush(&s, &done)?;
                        locked = vec![false; n];
                        gather(self.coupling, &mut self.place, &logical, &locked)
                            .ok_or_else(|| VbsError::Routing(format!("no path for gate on {logical:?}")))?
                    }
                };
                seg_swaps.extend(sw);
                for &l in &logical {
                    locked[self.place.phys[l]] = true;
                }
            }
            pending.push(g.clone());
        }
        self.flush(&seg_swaps, &pending)
    }
}

/// Routes `circuit` onto `coupling` starting from `initial` (logical to
/// physical; identity when `None`).
pub fn route(circuit: &Circuit, coupling: &CouplingMap, initial: Option<&[usize]>) -> Result<RoutedCircuit> {
    let n_phys = coupling.n_qubits();
    if circuit.n_qubits() > n_phys {
        return Err(VbsError::Routing(format!(
            "{} logical qubits exceed {} physical",
            circuit.n_qubits(),
            n_phys
        )));
    }
    let init: Vec<usize> = match initial {
        Some(p) => p.to_vec(),
        None => (0..circuit.n_qubits()).collect(),
    };
    if init.len() != circuit.n_qubits() {
        return Err(VbsError::DimensionMismatch {
            expected: circuit.n_qubits(),
            got: init.len(),
        });
    }
    let mut logical_at = vec![None; n_phys];
    for (l, &p) in init.iter().enumerate() {
        if p >= n_phys || logical_at[p].is_some() {
            return Err(VbsError::Routing(format!("bad initial placement {init:?}")));
        }
        logical_at[p] = Some(l);
    }
    let mut out = Circuit::new(n_phys);
    out.metadata = circuit.metadata.clone();
    out.metadata.insert("coupling".into(), coupling.kind().name().into());
    let mut r = Router {
        coupling,
        place: Placement {
            phys: init.clone(),
            logical_at,
        },
        out,
        swaps: Vec::new(),
    };
    let mut seg: Vec<Gate> = Vec::new();
    for g in circuit.gates() {
        if matches!(g, Gate::Barrier) {
            r.segment(&seg)?;
            seg.clear();
            r.out.push(Gate::Barrier)?;
        } else {
            seg.push(g.clone());
        }
    }
    r.segment(&seg)?;
    Ok(RoutedCircuit {
        circuit: r.out,
        initial: init,
        final_placement: r.place.phys,
        swaps: r.swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::exec::{simulate, SimMode};
    use crate::circuits::ir::{cx, h};

    #[test]
    fn all_to_all_is_unchanged() {
        let mut c = Circuit::new(3);
        c.extend([h(0), cx(0, 2), cx(2, 1)]).unwrap();
        let r = route(&c, &CouplingMap::all_to_all(3).unwrap(), None).unwrap();
        assert!(r.swaps.is_empty());
        assert_eq!(r.circuit.gates(), c.gates());
    }

    #[test]
    fn linear_needs_swap_and_preserves_state() {
        let mut c = Circuit::new(3);
        c.extend([h(0), cx(0, 2), h(1)]).unwrap();
        let lin = CouplingMap::linear(3).unwrap();
        let r = route(&c, &lin, None).unwrap();
        assert_eq!(r.swaps.len(), 1);
        let a = simulate(&c, SimMode::PostSelect).unwrap().state;
        let b = simulate(&r.circuit, SimMode::PostSelect).unwrap().state;
        let (b, stray) = b.extract(&r.final_placement).unwrap();
        assert!(stray < 1e-15);
        assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn line_arrangement_finds_wrapped_body() {
        // 3 and 0 must each sit next to a different end of the 1-4-2 block
        let needs = vec![vec![1, 4, 2], vec![3, 1], vec![2, 0]];
        let lin = CouplingMap::linear(6).unwrap();
        let mut place = Placement {
            phys: (0..6).collect(),
            logical_at: (0..6).map(Some).collect(),
        };
        let sw = line_arrangement(&lin, &mut place, &needs).unwrap();
        assert!(!sw.is_empty());
        for qs in &needs {
            let phys: Vec<usize> = qs.iter().map(|&q| place.phys[q]).collect();
            assert!(lin.is_connected_set(&phys), "{qs:?} at {phys:?}");
        }
        let all = CouplingMap::all_to_all(6).unwrap();
        assert!(line_arrangement(&all, &mut place, &needs).is_none());
    }
}
