use proptest::prelude::*;
use vbsprep::circuits::exec::{circuit_unitary, simulate, SimMode};
use vbsprep::circuits::ir::{cx, h, ry, x, z, Circuit, Gate};
use vbsprep::circuits::qasm::{emit_qasm, parse_qasm, registry_of, OpaqueRegistry, QasmMode};
use vbsprep::circuits::routing::route;
use vbsprep::lattice::CouplingMap;
use vbsprep::spinops::DenseOperator;

#[derive(Clone, Debug)]
enum Op {
    H(usize),
    X(usize),
    Z(usize),
    Ry(f64, usize),
    Cx(usize, usize),
}

fn arb_ops(n: usize, len: usize) -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        (0..n).prop_map(Op::H),
        (0..n).prop_map(Op::X),
        (0..n).prop_map(Op::Z),
        (-3.2f64..3.2, 0..n).prop_map(|(t, q)| Op::Ry(t, q)),
        (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Op::Cx(a, b)),
        (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Op::Cx(a, b)),
    ];
    proptest::collection::vec(op, 1..len)
}

fn build(n: usize, ops: &[Op]) -> Circuit {
    let mut c = Circuit::new(n);
    for o in ops {
        let g = match *o {
            Op::H(q) => h(q),
            Op::X(q) => x(q),
            Op::Z(q) => z(q),
            Op::Ry(t, q) => ry(t, q),
            Op::Cx(a, b) => cx(a, b),
        };
        c.push(g).unwrap();
    }
    c
}

fn same_unitary(a: &DenseOperator, b: &DenseOperator) -> bool {
    a.max_abs_diff(b) < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qasm_round_trip_keeps_unitary(ops in arb_ops(4, 20)) {
        let c = build(4, &ops);
        let text = emit_qasm(&c, QasmMode::Basis).unwrap();
        let back = parse_qasm(&text, &OpaqueRegistry::new()).unwrap();
        prop_assert!(same_unitary(&circuit_unitary(&c).unwrap(), &circuit_unitary(&back).unwrap()));
    }

    #[test]
    fn inverse_undoes_circuit(ops in arb_ops(3, 16)) {
        let c = build(3, &ops);
        let mut both = c.clone();
        both.extend(c.inverse().unwrap().into_gates()).unwrap();
        prop_assert!(same_unitary(&circuit_unitary(&both).unwrap(), &DenseOperator::identity(8)));
    }

    #[test]
    fn routing_on_a_line_preserves_state(ops in arb_ops(5, 24)) {
        let c = build(5, &ops);
        let lin = CouplingMap::linear(5).unwrap();
        let r = route(&c, &lin, None).unwrap();
        for g in r.circuit.gates() {
            if let Gate::Cnot { control, target } = g {
                prop_assert!(control.abs_diff(*target) == 1);
            }
        }
        let a = simulate(&c, SimMode::PostSelect).unwrap().state;
        let b = simulate(&r.circuit, SimMode::PostSelect).unwrap().state;
        let (b, stray) = b.extract(&r.final_placement).unwrap();
        prop_assert!(stray < 1e-12);
        prop_assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn routing_respects_initial_placement(ops in arb_ops(4, 16), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let c = build(4, &ops);
        let lin = CouplingMap::linear(4).unwrap();
        let r = route(&c, &lin, Some(&perm)).unwrap();
        prop_assert_eq!(&r.initial, &perm);
        let a = simulate(&c, SimMode::PostSelect).unwrap().state;
        let b = simulate(&r.circuit, SimMode::PostSelect).unwrap().state;
        let (b, stray) = b.extract(&r.final_placement).unwrap();
        prop_assert!(stray < 1e-12);
        prop_assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn ghz_on_a_line_needs_no_swaps_in_order() {
    let mut c = Circuit::new(4);
    c.extend([h(0), cx(0, 1), cx(1, 2), cx(2, 3)]).unwrap();
    let r = route(&c, &CouplingMap::linear(4).unwrap(), None).unwrap();
    assert!(r.swaps.is_empty());
    let s = simulate(&r.circuit, SimMode::PostSelect).unwrap().state;
    let p = s.probabilities();
    assert!((p[0] - 0.5).abs() < 1e-12 && (p[15] - 0.5).abs() < 1e-12);
}

#[test]
fn structural_qasm_round_trip_with_opaque_blocks() {
    use vbsprep::analysis::resources::{method_circuit, Method};
    use vbsprep::lattice::build_three_link_pair;
    let lat = build_three_link_pair().unwrap();
    let (c, _) = method_circuit(Method::Probabilistic, &lat).unwrap();
    let text = emit_qasm(&c, QasmMode::Structural).unwrap();
    let back = parse_qasm(&text, &registry_of(&c)).unwrap();
    let a = simulate(&c, SimMode::PostSelect).unwrap();
    let b = simulate(&back, SimMode::PostSelect).unwrap();
    assert!((a.postselect_probability - b.postselect_probability).abs() < 1e-12);
    assert!(a.state.fidelity(&b.state).unwrap() > 1.0 - 1e-10);
}

#[test]
fn parse_rejects_unknown_gate() {
    let text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nfoo q[0];\n";
    assert!(parse_qasm(text, &OpaqueRegistry::new()).is_err());
}

#[test]
fn retry_islands_on_two_site_ring_route_on_a_line() {
    use vbsprep::analysis::resources::{method_circuit, place_and_route, Method};
    use vbsprep::analysis::verify::data_register;
    use vbsprep::lattice::{build_chain, ChainBoundary, CouplingKind};
    // each island wraps around the ring, so its body gates overlap at both ends
    for n in [2, 4] {
        let lat = build_chain(n, ChainBoundary::Ring).unwrap();
        let (c, enc) = method_circuit(Method::MitigatedRetry, &lat).unwrap();
        let base = simulate(&c, SimMode::PostSelect).unwrap();
        let orig = data_register(&base.state, enc.n_data, None).unwrap();
        let routed = place_and_route(&c, &enc, CouplingKind::Linear, None).unwrap();
        let r = simulate(&routed.circuit, SimMode::PostSelect).unwrap();
        let moved = data_register(&r.state, enc.n_data, Some(&routed.final_placement)).unwrap();
        assert!(moved.fidelity(&orig).unwrap() > 1.0 - 1e-12, "ring {n}");
    }
}
