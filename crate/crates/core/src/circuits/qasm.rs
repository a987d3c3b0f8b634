//! OpenQASM 2.0 emission and a parser for our own output.
//!
//! Structural mode keeps opaque blocks as named `opaque` declarations.
//! Basis mode inlines their expansions recursively and fails on blocks
//! without one. Post-selection targets and retry loops have no OpenQASM 2.0
//! form; they travel in comments (`// postselect b`, `// retry_begin ...`,
//! `// retry_end`) that the parser understands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ir::{Circuit, Gate, OpaqueGate};
use crate::error::{Result, VbsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QasmMode {
    Structural,
    Basis,
}

impl std::str::FromStr for QasmMode {
    type Err = VbsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structural" => Ok(QasmMode::Structural),
            "basis" => Ok(QasmMode::Basis),
            o => Err(VbsError::InvalidArgument(format!("unknown qasm mode `{o}`"))),
        }
    }
}

pub const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";";

fn ident(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_lowercase()) {
        s.insert_str(0, "g_");
    }
    s.to_ascii_lowercase()
}

fn flatten(gates: &[Gate], mode: QasmMode, out: &mut Vec<Gate>) -> Result<()> {
    for g in gates {
        match g {
            Gate::Opaque(o) if mode == QasmMode::Basis => {
                let exp = o.expansion.as_ref().ok_or_else(|| VbsError::UnexpandableOpaque(o.label.clone()))?;
                let mapped: Vec<Gate> = exp.iter().map(|e| e.remapped(&|q| o.qubits[q])).collect();
                flatten(&mapped, mode, out)?;
            }
            Gate::RetryUntil {
                body,
                ancilla,
                success,
                reset,
            } => {
                let mut b = Vec::new();
                flatten(body, mode, &mut b)?;
                out.push(Gate::RetryUntil {
                    body: b,
                    ancilla: *ancilla,
                    success: *success,
                    reset: reset.clone(),
                });
            }
            other => out.push(other.clone()),
        }
    }
    Ok(())
}

fn collect_decls<'a>(gates: &'a [Gate], decls: &mut BTreeMap<String, &'a OpaqueGate>) {
    for g in gates {
        match g {
            Gate::Opaque(o) => {
                decls.entry(ident(&o.label)).or_insert(o);
            }
            Gate::RetryUntil { body, .. } => collect_decls(body, decls),
            _ => {}
        }
    }
}

fn emit_gates(gates: &[Gate], s: &mut String) {
    for g in gates {
        match g {
            Gate::Cnot { control, target } => {
                let _ = writeln!(s, "cx q[{control}],q[{target}];");
            }
            Gate::U {
                theta,
                phi,
                lambda,
                qubit,
            } => {
                let _ = writeln!(s, "u3({theta:?},{phi:?},{lambda:?}) q[{qubit}];");
            }
            Gate::Opaque(o) => {
                let args: Vec<String> = o.qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(s, "{} {};", ident(&o.label), args.join(","));
            }
            Gate::Measure { qubit, postselect } => {
                let _ = write!(s, "measure q[{qubit}] -> c[{qubit}];");
                if let Some(b) = postselect {
                    let _ = write!(s, " // postselect {b}");
                }
                s.push('\n');
            }
            Gate::Reset { qubit } => {
                let _ = writeln!(s, "reset q[{qubit}];");
            }
            Gate::Barrier => s.push_str("barrier q;\n"),
            Gate::RetryUntil {
                body,
                ancilla,
                success,
                reset,
            } => {
                let r: Vec<String> = reset.iter().map(|q| q.to_string()).collect();
                let _ = writeln!(s, "// retry_begin ancilla={ancilla} success={success} reset={}", r.join(","));
                emit_gates(body, s);
                let _ = writeln!(s, "measure q[{ancilla}] -> c[{ancilla}];");
                s.push_str("// retry_end\n");
            }
        }
    }
}

pub fn emit_qasm(circuit: &Circuit, mode: QasmMode) -> Result<String> {
    let mut gates = Vec::new();
    flatten(circuit.gates(), mode, &mut gates)?;
    let mut s = String::new();
    s.push_str(HEADER);
    s.push('\n');
    let mut decls = BTreeMap::new();
    collect_decls(&gates, &mut decls);
    for (name, o) in &decls {
        let args: Vec<String> = (0..o.qubits.len()).map(|i| format!("a{i}")).collect();
        let _ = writeln!(s, "opaque {name} {};", args.join(","));
    }
    let n = circuit.n_qubits();
    let _ = writeln!(s, "qreg q[{n}];");
    let _ = writeln!(s, "creg c[{n}];");
    emit_gates(&gates, &mut s);
    Ok(s)
}

/// Opaque templates (matrix and costs) by name, for re-reading structural
/// emissions.
pub type OpaqueRegistry = BTreeMap<String, OpaqueGate>;

pub fn registry_of(circuit: &Circuit) -> OpaqueRegistry {
    let mut reg = OpaqueRegistry::new();
    for o in circuit.opaque_gates() {
        reg.entry(ident(&o.label)).or_insert_with(|| o.clone());
    }
    reg
}

fn perr(line: usize, msg: impl Into<String>) -> VbsError {
    VbsError::QasmParse { line, msg: msg.into() }
}

fn parse_qubit(tok: &str, line: usize) -> Result<usize> {
    let t = tok.trim();
    let inner = t
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| perr(line, format!("expected q[i], got `{t}`")))?;
    inner.parse().map_err(|_| perr(line, format!("bad index `{inner}`")))
}

struct Frame {
    gates: Vec<Gate>,
    retry: Option<(usize, u8, Vec<usize>)>,
}

/// Parses OpenQASM produced by [`emit_qasm`].
pub fn parse_qasm(text: &str, registry: &OpaqueRegistry) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut declared: BTreeMap<String, usize> = BTreeMap::new();
    let mut stack = vec![Frame {
        gates: Vec::new(),
        retry: None,
    }];
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let (code, comment) = match raw.find("//") {
            Some(p) => (raw[..p].trim(), raw[p + 2..].trim()),
            None => (raw.trim(), ""),
        };
        if code.is_empty() {
            if let Some(rest) = comment.strip_prefix("retry_begin") {
                let mut anc = None;
                let mut succ = None;
                let mut reset = Vec::new();
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| perr(ln, "bad retry field"))?;
                    match k {
                        "ancilla" => anc = v.parse().ok(),
                        "success" => succ = v.parse().ok(),
                        "reset" => {
                            for q in v.split(',').filter(|q| !q.is_empty()) {
                                reset.push(q.parse().map_err(|_| perr(ln, "bad reset list"))?);
                            }
                        }
                        _ => return Err(perr(ln, format!("unknown retry field `{k}`"))),
                    }
                }
                let anc = anc.ok_or_else(|| perr(ln, "retry without ancilla"))?;
                let succ = succ.ok_or_else(|| perr(ln, "retry without success"))?;
                stack.push(Frame {
                    gates: Vec::new(),
                    retry: Some((anc, succ, reset)),
                });
            } else if comment == "retry_end" {
                let f = stack.pop().filter(|f| f.retry.is_some()).ok_or_else(|| perr(ln, "unmatched retry_end"))?;
                let (ancilla, success, reset) = f.retry.expect("checked");
                let mut body = f.gates;
                // the loop's own measurement closes the body
                match body.pop() {
                    Some(Gate::Measure { qubit, .. }) if qubit == ancilla => {}
                    _ => return Err(perr(ln, "retry body must end by measuring its ancilla")),
                }
                stack
                    .last_mut()
                    .ok_or_else(|| perr(ln, "retry_end at top level"))?
                    .gates
                    .push(Gate::RetryUntil {
                        body,
                        ancilla,
                        success,
                        reset,
                    });
            }
            continue;
        }
        let stmt = code.strip_suffix(';').ok_or_else(|| perr(ln, "missing `;`"))?.trim();
        let gates = &mut stack.last_mut().expect("frame").gates;
        if stmt == "OPENQASM 2.0" || stmt == "include \"qelib1.inc\"" {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("opaque ") {
            let (name, args) = rest.split_once(' ').ok_or_else(|| perr(ln, "bad opaque declaration"))?;
            declared.insert(name.to_string(), args.split(',').count());
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg ") {
            let k = rest
                .strip_prefix("q[")
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.parse::<usize>().ok())
                .ok_or_else(|| perr(ln, "bad qreg"))?;
            n_qubits = Some(k);
            continue;
        }
        if stmt.starts_with("creg ") {
            continue;
        }
        if stmt == "barrier q" {
            gates.push(Gate::Barrier);
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("reset ") {
            gates.push(Gate::Reset {
                qubit: parse_qubit(rest, ln)?,
            });
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("measure ") {
            let (q, _) = rest.split_once("->").ok_or_else(|| perr(ln, "bad measure"))?;
            let postselect = match comment.strip_prefix("postselect") {
                Some(b) => Some(b.trim().parse::<u8>().map_err(|_| perr(ln, "bad postselect"))?),
                None => None,
            };
            gates.push(Gate::Measure {
                qubit: parse_qubit(q, ln)?,
                postselect,
            });
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("cx ") {
            let (a, b) = rest.split_once(',').ok_or_else(|| perr(ln, "bad cx"))?;
            gates.push(Gate::Cnot {
                control: parse_qubit(a, ln)?,
                target: parse_qubit(b, ln)?,
            });
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("u3(") {
            let (params, q) = rest.split_once(')').ok_or_else(|| perr(ln, "bad u3"))?;
            let p: Vec<f64> = params
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| perr(ln, format!("bad angle `{x}`"))))
                .collect::<Result<_>>()?;
            if p.len() != 3 {
                return Err(perr(ln, "u3 takes three angles"));
            }
            gates.push(Gate::U {
                theta: p[0],
                phi: p[1],
                lambda: p[2],
                qubit: parse_qubit(q, ln)?,
            });
            continue;
        }
        let (name, args) = stmt.split_once(' ').ok_or_else(|| perr(ln, format!("unknown statement `{stmt}`")))?;
        let arity = *declared.get(name).ok_or_else(|| perr(ln, format!("undeclared gate `{name}`")))?;
        let qubits: Vec<usize> = args.split(',').map(|a| parse_qubit(a, ln)).collect::<Result<_>>()?;
        if qubits.len() != arity {
            return Err(perr(ln, format!("`{name}` takes {arity} qubits")));
        }
        let tpl = registry.get(name).ok_or_else(|| perr(ln, format!("no matrix registered for `{name}`")))?;
        let mut o = tpl.clone();
        o.qubits = qubits;
        gates.push(Gate::Opaque(o));
    }
    if stack.len() != 1 {
        return Err(perr(text.lines().count(), "unterminated retry block"));
    }
    let n = n_qubits.ok_or_else(|| perr(0, "missing qreg"))?;
    Circuit::from_gates(n, stack.pop().expect("frame").gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::builders::valence_bond_subcircuit;

    #[test]
    fn valence_bond_is_four_lines() {
        let c = Circuit::from_gates(2, valence_bond_subcircuit(0, 1).unwrap()).unwrap();
        let q = emit_qasm(&c, QasmMode::Basis).unwrap();
        let body: Vec<&str> = q.lines().skip(4).collect();
        assert_eq!(body.len(), 4);
        assert!(q.starts_with(HEADER));
        let back = parse_qasm(&q, &OpaqueRegistry::new()).unwrap();
        assert_eq!(back.gates(), c.gates());
    }

    #[test]
    fn unknown_gate_is_rejected() {
        let text = format!("{HEADER}\nqreg q[2];\nfoo q[0];\n");
        assert!(matches!(parse_qasm(&text, &OpaqueRegistry::new()), Err(VbsError::QasmParse { line: 4, .. })));
    }
}
