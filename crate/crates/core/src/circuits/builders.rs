//! Circuit builders: valence bonds, Hadamard tests, the probabilistic,
//! island and retry schemes, Fredkin and W-state fragments, and permutation
//! sequences.

use std::f64::consts::PI;

use super::accounting::{cnot_count, cnot_depth};
use super::costs;
use super::exec::circuit_unitary;
use super::ir::{cx, h, ry, x, z, Circuit, CostKey, DeclaredCost, Gate, OpaqueGate};
use super::schmidt::{island_schmidt, symmetrized_product};
use crate::error::{Result, VbsError};
use crate::lattice::{BoundarySpin, EncodingMethod, Lattice, Port, SiteEncoding, Sublattice};
use crate::spinops::{exp_minus_i_pi_symmetrizer, swap_operator, DenseOperator};

/// Singlet `(|01> - |10>)/sqrt2` on `(top, bottom)`.
pub fn valence_bond_subcircuit(top: usize, bottom: usize) -> Result<Vec<Gate>> {
    if top == bottom {
        return Err(VbsError::DuplicateQubit(top));
    }
    Ok(vec![h(top), x(bottom), cx(top, bottom), z(top)])
}

fn dangling_gates(encoding: &SiteEncoding, keep: impl Fn(usize) -> bool) -> Vec<Gate> {
    encoding
        .dangling
        .iter()
        .filter(|(q, s)| *s == BoundarySpin::Down && keep(*q))
        .map(|(q, _)| x(*q))
        .collect()
}

/// One valence bond per link, all in parallel, plus the fixed boundary spins.
pub fn pre_vbs_gates(encoding: &SiteEncoding) -> Result<Vec<Gate>> {
    let mut g = Vec::new();
    for &(a, b) in &encoding.link_qubits {
        g.extend(valence_bond_subcircuit(a, b)?);
    }
    g.extend(dangling_gates(encoding, |_| true));
    Ok(g)
}

pub fn pre_vbs_circuit(lattice: &Lattice, encoding: &SiteEncoding) -> Result<Circuit> {
    encoding.check_against(lattice)?;
    let mut c = Circuit::new(encoding.total_qubits);
    c.extend(pre_vbs_gates(encoding)?)?;
    Ok(c.with_meta("method", "pre_vbs").with_meta("lattice", lattice.descriptor()))
}

/// Controlled-SWAP in basis gates: CX(b,a), 6-CNOT Toffoli(c,a;b), CX(b,a).
pub fn fredkin_fragment(c: usize, a: usize, b: usize) -> Result<Vec<Gate>> {
    if c == a || c == b || a == b {
        return Err(VbsError::DuplicateQubit(if c == a || c == b { c } else { a }));
    }
    let t = |q| Gate::U {
        theta: 0.0,
        phi: 0.0,
        lambda: PI / 4.0,
        qubit: q,
    };
    let tdg = |q| Gate::U {
        theta: 0.0,
        phi: 0.0,
        lambda: -PI / 4.0,
        qubit: q,
    };
    // Toffoli with controls (c, a) and target b
    let (xq, yq, zq) = (c, a, b);
    let mut g = vec![cx(b, a)];
    g.extend([
        h(zq),
        cx(yq, zq),
        tdg(zq),
        cx(xq, zq),
        t(zq),
        cx(yq, zq),
        tdg(zq),
        cx(xq, zq),
        t(yq),
        t(zq),
        h(zq),
        cx(xq, yq),
        t(xq),
        tdg(yq),
        cx(xq, yq),
    ]);
    g.push(cx(b, a));
    Ok(g)
}

/// Controlled-SWAP as an opaque block with the Fredkin expansion.
pub fn cswap_gate(c: usize, a: usize, b: usize) -> Result<Gate> {
    let m = swap_operator(2, 0, 1).controlled().with_label("cswap");
    let mut o = OpaqueGate::new("cswap", vec![c, a, b], m)?.with_expansion(fredkin_fragment(0, 1, 2)?);
    for (k, v) in costs::cswap() {
        o = o.with_cost(k, v);
    }
    Ok(Gate::Opaque(o))
}

/// Outcome the Hadamard-test ancilla must show for a site of `t` qubits.
/// For two qubits the phase gate on the ancilla is dropped, which flips the
/// wanted outcome to 0.
pub fn hadamard_test_success(t: usize) -> u8 {
    if t == 2 {
        0
    } else {
        1
    }
}

/// `H(anc)`, controlled `exp(-i pi Sym)`, `H(anc)` without the measurement.
pub fn hadamard_test_body(ancilla: usize, data: &[usize]) -> Result<Vec<Gate>> {
    let t = data.len();
    let block = match t {
        0 => return Err(VbsError::InvalidArgument("site without qubits".into())),
        1 => return Ok(Vec::new()),
        2 => cswap_gate(ancilla, data[0], data[1])?,
        _ => {
            let label = format!("c_exp_sym{t}");
            let m = exp_minus_i_pi_symmetrizer(t)?.controlled().with_label(label.clone());
            let mut qs = vec![ancilla];
            qs.extend_from_slice(data);
            let mut o = OpaqueGate::new(label, qs, m)?;
            if t == 3 {
                for (k, v) in costs::hadamard_test_s32() {
                    o = o.with_cost(k, v);
                }
            }
            Gate::Opaque(o)
        }
    };
    Ok(vec![h(ancilla), block, h(ancilla)])
}

/// Hadamard test on one site with its measurement marker. Sites of a single
/// qubit need no symmetrization and yield no gates.
pub fn hadamard_test_fragment(site: usize, encoding: &SiteEncoding) -> Result<Vec<Gate>> {
    let data = encoding
        .site_qubits
        .get(site)
        .ok_or_else(|| VbsError::InvalidArgument(format!("site {site} out of range")))?;
    if data.len() == 1 {
        return Ok(Vec::new());
    }
    let anc = encoding.ancilla_of(site)?;
    let mut g = hadamard_test_body(anc, data)?;
    g.push(Gate::Measure {
        qubit: anc,
        postselect: Some(hadamard_test_success(data.len())),
    });
    if encoding.shared_ancilla {
        g.push(Gate::Reset { qubit: anc });
    }
    Ok(g)
}

fn tag(c: Circuit, method: &str, lattice: &Lattice) -> Circuit {
    c.with_meta("method", method).with_meta("lattice", lattice.descriptor())
}

/// Pre-VBS layer followed by a Hadamard test on every site.
pub fn probabilistic_method_circuit(lattice: &Lattice, encoding: &SiteEncoding) -> Result<Circuit> {
    encoding.check_against(lattice)?;
    if encoding.method != EncodingMethod::HadamardAll {
        return Err(VbsError::EncodingMismatch("probabilistic method needs one ancilla per site".into()));
    }
    let mut c = Circuit::new(encoding.total_qubits);
    c.extend(pre_vbs_gates(encoding)?)?;
    c.push(Gate::Barrier)?;
    for site in 0..lattice.n_sites() {
        c.extend(hadamard_test_fragment(site, encoding)?)?;
    }
    Ok(tag(c, "probabilistic", lattice))
}

/// Qubits and singlets of the island around `site`: the site's qubits plus
/// the partner qubit of every link, ordered port by port with the partner
/// first on port 0 and second otherwise.
#[derive(Clone, Debug)]
pub struct Island {
    pub site: usize,
    pub qubits: Vec<usize>,
    /// Local positions of the site's own qubits.
    pub site_positions: Vec<usize>,
    pub singlets: Vec<(usize, usize)>,
    pub fixed: Vec<(usize, u8)>,
    /// All ports are links.
    pub bulk: bool,
}

pub fn island_of(lattice: &Lattice, encoding: &SiteEncoding, site: usize) -> Result<Island> {
    let mut qubits = Vec::new();
    let mut site_positions = Vec::new();
    let mut singlets_global = Vec::new();
    let mut fixed_global = Vec::new();
    let sq = &encoding.site_qubits[site];
    for (k, port) in lattice.ports(site).iter().enumerate() {
        let mine = sq[k];
        match *port {
            Port::Link(l) => {
                let (ta, tb) = encoding.link_qubits[l];
                let partner = if ta == mine { tb } else { ta };
                if k == 0 {
                    qubits.extend([partner, mine]);
                    site_positions.push(qubits.len() - 1);
                } else {
                    qubits.extend([mine, partner]);
                    site_positions.push(qubits.len() - 2);
                }
                singlets_global.push((ta, tb));
            }
            Port::Dangling(s) => {
                qubits.push(mine);
                site_positions.push(qubits.len() - 1);
                fixed_global.push((mine, s.bit()));
            }
        }
    }
    let local = |g: usize| qubits.iter().position(|&q| q == g).expect("island qubit");
    let singlets = singlets_global.iter().map(|&(a, b)| (local(a), local(b))).collect();
    let fixed = fixed_global.iter().map(|&(q, b)| (local(q), b)).collect();
    let bulk = fixed_global.is_empty();
    Ok(Island {
        site,
        qubits: qubits.clone(),
        site_positions,
        singlets,
        fixed,
        bulk,
    })
}

/// Opaque block preparing the island of `island.site` from `|0...0>`.
pub fn island_block(island: &Island) -> Result<Gate> {
    let n = island.qubits.len();
    let target = symmetrized_product(n, &island.site_positions, &island.singlets, &island.fixed)?;
    let t = island.site_positions.len() as u32;
    let bulk_s = if island.bulk { Some(t) } else { None };
    let sc = island_schmidt(&target, bulk_s)?;
    let local = sc.to_circuit()?;
    let m = circuit_unitary(&local)?.with_label("island");
    let mut o = OpaqueGate::new(format!("island{t}"), island.qubits.clone(), m)?.with_expansion(local.gates().to_vec());
    for key in [CostKey::AllToAll, CostKey::Linear, CostKey::HeavyHex] {
        if let (Ok(c), Ok(d)) = (cnot_count(&local, key), cnot_depth(&local, key)) {
            o = o.with_cost(key, DeclaredCost::new(c as u32, d as u32));
        }
    }
    if let Some(ic) = bulk_s.and_then(costs::island) {
        for (k, v) in ic.restricted {
            o = o.with_cost(k, v);
        }
    }
    Ok(Gate::Opaque(o))
}

fn check_islands_encoding(lattice: &Lattice, encoding: &SiteEncoding) -> Result<Vec<Sublattice>> {
    encoding.check_against(lattice)?;
    let colors = lattice.two_coloring()?;
    for (site, c) in colors.iter().enumerate() {
        if *c == Sublattice::B && encoding.site_qubits[site].len() > 1 && encoding.ancilla[site].is_none() {
            return Err(VbsError::MissingAncilla(site));
        }
    }
    Ok(colors)
}

/// Islands prepared deterministically on sublattice A, then Hadamard tests on
/// sublattice B.
pub fn islands_method_circuit(lattice: &Lattice, encoding: &SiteEncoding) -> Result<Circuit> {
    let colors = check_islands_encoding(lattice, encoding)?;
    let mut c = Circuit::new(encoding.total_qubits);
    let mut covered = Vec::new();
    for site in 0..lattice.n_sites() {
        if colors[site] == Sublattice::A {
            let isl = island_of(lattice, encoding, site)?;
            covered.extend(isl.qubits.iter().copied());
            c.push(island_block(&isl)?)?;
        }
    }
    c.extend(dangling_gates(encoding, |q| !covered.contains(&q)))?;
    c.push(Gate::Barrier)?;
    for site in 0..lattice.n_sites() {
        if colors[site] == Sublattice::B {
            c.extend(hadamard_test_fragment(site, encoding)?)?;
        }
    }
    Ok(tag(c, "mitigated_islands", lattice))
}

/// Sublattice-A Hadamard tests repeated until success (resetting and
/// re-preparing the island each time), then Hadamard tests on sublattice B.
/// Every A site needs its own ancilla.
pub fn retry_method_circuit(lattice: &Lattice, encoding: &SiteEncoding) -> Result<Circuit> {
    let colors = check_islands_encoding(lattice, encoding)?;
    let mut c = Circuit::new(encoding.total_qubits);
    let mut covered = Vec::new();
    for site in 0..lattice.n_sites() {
        if colors[site] != Sublattice::A {
            continue;
        }
        let isl = island_of(lattice, encoding, site)?;
        covered.extend(isl.qubits.iter().copied());
        let data = &encoding.site_qubits[site];
        let mut body = Vec::new();
        for &(ls, lb) in &isl.singlets {
            body.extend(valence_bond_subcircuit(isl.qubits[ls], isl.qubits[lb])?);
        }
        for &(lq, b) in &isl.fixed {
            if b == 1 {
                body.push(x(isl.qubits[lq]));
            }
        }
        if data.len() == 1 {
            c.extend(body)?;
            continue;
        }
        let anc = encoding.ancilla_of(site)?;
        body.extend(hadamard_test_body(anc, data)?);
        c.push(Gate::RetryUntil {
            body,
            ancilla: anc,
            success: hadamard_test_success(data.len()),
            reset: isl.qubits.clone(),
        })?;
        if encoding.shared_ancilla || hadamard_test_success(data.len()) == 1 {
            c.push(Gate::Reset { qubit: anc })?;
        }
    }
    c.extend(dangling_gates(encoding, |q| !covered.contains(&q)))?;
    c.push(Gate::Barrier)?;
    for site in 0..lattice.n_sites() {
        if colors[site] == Sublattice::B {
            c.extend(hadamard_test_fragment(site, encoding)?)?;
        }
    }
    Ok(tag(c, "mitigated_retry", lattice))
}

/// `theta_p = arcsin(cos(arctan(sqrt((1-p)/p))))`, i.e. `sin theta = sqrt p`.
pub fn w_block_angle(p: f64) -> f64 {
    (((1.0 - p) / p).sqrt().atan().cos()).asin()
}

/// Block moving amplitude `sqrt(1-p)` of the excitation from `c` to `t`.
pub fn w_block(p: f64, c: usize, t: usize) -> Vec<Gate> {
    let th = w_block_angle(p);
    vec![ry(th, t), cx(c, t), ry(-th, t), cx(t, c)]
}

/// `|W_m>` on qubits `0..m` with `m - 1` blocks.
pub fn w_state_gates(m: usize) -> Result<Vec<Gate>> {
    if m < 1 {
        return Err(VbsError::InvalidArgument("W state needs m >= 1".into()));
    }
    let mut g = vec![x(0)];
    for i in 0..m - 1 {
        g.extend(w_block(1.0 / (m - i) as f64, i, i + 1));
    }
    Ok(g)
}

pub fn w_state_circuit(m: usize) -> Result<Circuit> {
    if m < 2 {
        return Err(VbsError::InvalidArgument("W state needs m >= 2".into()));
    }
    Ok(Circuit::from_gates(m, w_state_gates(m)?)?.with_meta("method", "w_state"))
}

pub const PERMUTATION_CAP: usize = 4;

/// SWAP sequences for all `n!` permutations of `n` qubits, by coset
/// induction: each sequence for `n - 1` is followed by nothing or by one
/// SWAP `(k, n-1)`.
pub fn permutation_circuits(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n == 0 || n > PERMUTATION_CAP {
        return Err(VbsError::CapExceeded {
            what: "permutation qubits",
            requested: n,
            cap: PERMUTATION_CAP,
        });
    }
    let mut seqs: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for m in 2..=n {
        let mut next = Vec::with_capacity(seqs.len() * m);
        for s in &seqs {
            next.push(s.clone());
            for k in 0..m - 1 {
                let mut t = s.clone();
                t.push((k, m - 1));
                next.push(t);
            }
        }
        seqs = next;
    }
    Ok(seqs)
}

/// Matrix of a SWAP sequence on `n` qubits (first SWAP applied first).
pub fn swap_sequence_operator(n: usize, seq: &[(usize, usize)]) -> DenseOperator {
    seq.iter()
        .fold(DenseOperator::identity(1 << n), |acc, &(a, b)| swap_operator(n, a, b).mul(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::exec::{simulate, SimMode};
    use crate::circuits::ir::u_matrix;

    #[test]
    fn valence_bond_amplitudes() {
        let c = Circuit::from_gates(2, valence_bond_subcircuit(0, 1).unwrap()).unwrap();
        let a = simulate(&c, SimMode::PostSelect).unwrap().state.into_amplitudes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = [0.0, r, -r, 0.0];
        for (x, w) in a.iter().zip(want) {
            assert!((x.re - w).abs() < 1e-12 && x.im.abs() < 1e-12);
        }
    }

    #[test]
    fn fredkin_matches_cswap() {
        let c = Circuit::from_gates(3, fredkin_fragment(0, 1, 2).unwrap()).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let want = swap_operator(2, 0, 1).controlled();
        assert!(u.max_abs_diff(&want) < 1e-12);
        assert_eq!(c.count_explicit_cnots(), 8);
    }

    #[test]
    fn w_angle_half() {
        assert!((w_block_angle(0.5) - PI / 4.0).abs() < 1e-15);
        let _ = u_matrix(0.0, 0.0, 0.0);
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutation_circuits(2).unwrap(), vec![vec![], vec![(0, 1)]]);
        let mut c3: Vec<usize> = permutation_circuits(3).unwrap().iter().map(Vec::len).collect();
        c3.sort_unstable();
        assert_eq!(c3, vec![0, 1, 1, 1, 2, 2]);
        assert!(permutation_circuits(5).is_err());
    }
}
