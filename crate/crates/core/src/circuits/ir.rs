//! Gate and circuit representation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Result, VbsError};
use crate::lattice::CouplingKind;
use crate::spinops::DenseOperator;

/// Key of a declared cost. Heavy-hex costs may depend on whether a four-qubit
/// block lands on a path or a star; the router resolves those into
/// [`CostKey::HeavyHex`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKey {
    AllToAll,
    Linear,
    HeavyHex,
    HeavyHexPath,
    HeavyHexStar,
}

impl From<CouplingKind> for CostKey {
    fn from(c: CouplingKind) -> Self {
        match c {
            CouplingKind::AllToAll => CostKey::AllToAll,
            CouplingKind::Linear => CostKey::Linear,
            CouplingKind::HeavyHex => CostKey::HeavyHex,
        }
    }
}

/// CNOT cost of an opaque block. Either part may be unknown; a missing depth
/// falls back to the count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredCost {
    pub count: Option<u32>,
    pub depth: Option<u32>,
}

impl DeclaredCost {
    pub const ZERO: DeclaredCost = DeclaredCost {
        count: Some(0),
        depth: Some(0),
    };

    pub fn count(n: u32) -> Self {
        Self {
            count: Some(n),
            depth: None,
        }
    }

    pub fn new(count: u32, depth: u32) -> Self {
        Self {
            count: Some(count),
            depth: Some(depth),
        }
    }

    pub fn depth_only(depth: u32) -> Self {
        Self {
            count: None,
            depth: Some(depth),
        }
    }

    pub fn effective_depth(&self) -> Option<u32> {
        self.depth.or(self.count)
    }
}

/// A multi-qubit block carried as a matrix plus declared costs.
#[derive(Clone, Debug, PartialEq)]
pub struct OpaqueGate {
    pub label: String,
    pub qubits: Vec<usize>,
    pub matrix: DenseOperator,
    pub costs: BTreeMap<CostKey, DeclaredCost>,
    /// Equivalent gate list on local qubits `0..qubits.len()`.
    pub expansion: Option<Vec<Gate>>,
}

impl OpaqueGate {
    pub fn new(label: impl Into<String>, qubits: Vec<usize>, matrix: DenseOperator) -> Result<Self> {
        let label = label.into();
        if matrix.dim() != 1usize << qubits.len() {
            return Err(VbsError::DimensionMismatch {
                expected: 1 << qubits.len(),
                got: matrix.dim(),
            });
        }
        let dev = matrix.unitary_deviation();
        if dev > 1e-10 {
            return Err(VbsError::NonUnitary { label, deviation: dev });
        }
        Ok(Self {
            label,
            qubits,
            matrix,
            costs: BTreeMap::new(),
            expansion: None,
        })
    }

    pub fn with_cost(mut self, key: CostKey, cost: DeclaredCost) -> Self {
        self.costs.insert(key, cost);
        self
    }

    /// Same cost for every coupling.
    pub fn with_uniform_cost(mut self, cost: DeclaredCost) -> Self {
        for k in [CostKey::AllToAll, CostKey::Linear, CostKey::HeavyHex] {
            self.costs.insert(k, cost);
        }
        self
    }

    pub fn with_expansion(mut self, gates: Vec<Gate>) -> Self {
        self.expansion = Some(gates);
        self
    }

    pub fn cost(&self, key: CostKey) -> Result<DeclaredCost> {
        self.costs.get(&key).copied().ok_or_else(|| VbsError::MissingDeclaredCost {
            label: self.label.clone(),
            coupling: format!("{key:?}"),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Cnot {
        control: usize,
        target: usize,
    },
    /// `U(theta, phi, lambda)` as in qelib1's `u3`.
    U {
        theta: f64,
        phi: f64,
        lambda: f64,
        qubit: usize,
    },
    Opaque(OpaqueGate),
    /// Computational-basis measurement; `postselect` is the outcome the run
    /// must produce to count as a success.
    Measure {
        qubit: usize,
        postselect: Option<u8>,
    },
    Reset {
        qubit: usize,
    },
    Barrier,
    /// Runs `body`, measures `ancilla`, and on any outcome other than
    /// `success` resets `reset` to `|0>` and runs the body again.
    RetryUntil {
        body: Vec<Gate>,
        ancilla: usize,
        success: u8,
        reset: Vec<usize>,
    },
}

pub fn h(q: usize) -> Gate {
    Gate::U {
        theta: PI / 2.0,
        phi: 0.0,
        lambda: PI,
        qubit: q,
    }
}

pub fn x(q: usize) -> Gate {
    Gate::U {
        theta: PI,
        phi: 0.0,
        lambda: PI,
        qubit: q,
    }
}

pub fn z(q: usize) -> Gate {
    Gate::U {
        theta: 0.0,
        phi: 0.0,
        lambda: PI,
        qubit: q,
    }
}

pub fn ry(theta: f64, q: usize) -> Gate {
    Gate::U {
        theta,
        phi: 0.0,
        lambda: 0.0,
        qubit: q,
    }
}

pub fn cx(control: usize, target: usize) -> Gate {
    Gate::Cnot { control, target }
}

/// 2x2 matrix of `U(theta, phi, lambda)`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> DenseOperator {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = |a: f64| C64::from_polar(1.0, a);
    let m = [
        [C64::new(c, 0.0), -e(lambda) * s],
        [e(phi) * s, e(phi + lambda) * c],
    ];
    DenseOperator::from_fn(2, "u3", |i, j| m[i][j])
}

/// Euler angles with `m = e^{i alpha} U(theta, phi, lambda)`; returns
/// `(theta, phi, lambda, alpha)`.
pub fn u_angles(m: &DenseOperator) -> Result<(f64, f64, f64, f64)> {
    if m.dim() != 2 || !m.is_unitary(1e-9) {
        return Err(VbsError::NonUnitary {
            label: m.label().to_string(),
            deviation: m.unitary_deviation(),
        });
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let theta = 2.0 * c.norm().atan2(a.norm());
    let (alpha, phi, lambda);
    if a.norm() > 1e-12 && c.norm() > 1e-12 {
        alpha = a.arg();
        phi = c.arg() - alpha;
        lambda = (-b).arg() - alpha;
    } else if a.norm() > 1e-12 {
        // diagonal: only phi + lambda is fixed
        alpha = a.arg();
        phi = 0.0;
        lambda = d.arg() - alpha;
    } else {
        // anti-diagonal: only phi - lambda is fixed
        alpha = 0.0;
        phi = c.arg();
        lambda = (-b).arg();
    }
    Ok((theta, phi, lambda, alpha))
}

impl Gate {
    /// Qubits touched, in operator order.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::U { qubit, .. } | Gate::Measure { qubit, .. } | Gate::Reset { qubit } => vec![*qubit],
            Gate::Opaque(o) => o.qubits.clone(),
            Gate::Barrier => Vec::new(),
            Gate::RetryUntil {
                body, ancilla, reset, ..
            } => {
                let mut v: Vec<usize> = body.iter().flat_map(Gate::qubits).collect();
                v.push(*ancilla);
                v.extend(reset);
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    /// Relabels qubits through `map`.
    pub fn remapped(&self, map: &dyn Fn(usize) -> usize) -> Gate {
        match self {
            Gate::Cnot { control, target } => Gate::Cnot {
                control: map(*control),
                target: map(*target),
            },
            Gate::U {
                theta,
                phi,
                lambda,
                qubit,
            } => Gate::U {
                theta: *theta,
                phi: *phi,
                lambda: *lambda,
                qubit: map(*qubit),
            },
            Gate::Opaque(o) => {
                let mut o = o.clone();
                o.qubits = o.qubits.iter().map(|&q| map(q)).collect();
                Gate::Opaque(o)
            }
            Gate::Measure { qubit, postselect } => Gate::Measure {
                qubit: map(*qubit),
                postselect: *postselect,
            },
            Gate::Reset { qubit } => Gate::Reset { qubit: map(*qubit) },
            Gate::Barrier => Gate::Barrier,
            Gate::RetryUntil {
                body,
                ancilla,
                success,
                reset,
            } => Gate::RetryUntil {
                body: body.iter().map(|g| g.remapped(map)).collect(),
                ancilla: map(*ancilla),
                success: *success,
                reset: reset.iter().map(|&q| map(q)).collect(),
            },
        }
    }

    /// Inverse of a unitary gate.
    pub fn inverse(&self) -> Result<Gate> {
        Ok(match self {
            Gate::Cnot { .. } | Gate::Barrier => self.clone(),
            Gate::U {
                theta,
                phi,
                lambda,
                qubit,
            } => Gate::U {
                theta: -theta,
                phi: -lambda,
                lambda: -phi,
                qubit: *qubit,
            },
            Gate::Opaque(o) => {
                let mut inv = o.clone();
                inv.label = format!("{}_dg", o.label);
                inv.matrix = o.matrix.adjoint().with_label(inv.label.clone());
                inv.expansion = match &o.expansion {
                    Some(body) => Some(inverse_gates(body)?),
                    None => None,
                };
                Gate::Opaque(inv)
            }
            other => {
                return Err(VbsError::InvalidArgument(format!(
                    "gate {:?} has no inverse",
                    std::mem::discriminant(other)
                )))
            }
        })
    }
}

pub fn inverse_gates(gates: &[Gate]) -> Result<Vec<Gate>> {
    gates.iter().rev().map(Gate::inverse).collect()
}

/// Ordered gate program.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    fn check(&self, g: &Gate) -> Result<()> {
        let qs = match g {
            Gate::RetryUntil { body, ancilla, reset, .. } => {
                for b in body {
                    self.check(b)?;
                }
                let mut v = vec![*ancilla];
                v.extend(reset);
                for (i, q) in v.iter().enumerate() {
                    if v[..i].contains(q) {
                        return Err(VbsError::DuplicateQubit(*q));
                    }
                }
                v
            }
            _ => g.qubits(),
        };
        for (i, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(VbsError::InvalidQubit {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
            if qs[..i].contains(&q) {
                return Err(VbsError::DuplicateQubit(q));
            }
        }
        if let Gate::Opaque(o) = g {
            if let Some(exp) = &o.expansion {
                let local = Circuit::new(o.qubits.len());
                for e in exp {
                    local.check(e)?;
                }
            }
        }
        Ok(())
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        self.check(&g)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Appends `other` with its qubit `k` mapped to `qubits[k]`.
    pub fn append_mapped(&mut self, other: &Circuit, qubits: &[usize]) -> Result<()> {
        if qubits.len() != other.n_qubits {
            return Err(VbsError::DimensionMismatch {
                expected: other.n_qubits,
                got: qubits.len(),
            });
        }
        for g in &other.gates {
            self.push(g.remapped(&|q| qubits[q]))?;
        }
        Ok(())
    }

    /// Inverse of a measurement-free circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut c = Circuit::from_gates(self.n_qubits, inverse_gates(&self.gates)?)?;
        c.metadata = self.metadata.clone();
        Ok(c)
    }

    pub fn count_explicit_cnots(&self) -> usize {
        fn count(gs: &[Gate]) -> usize {
            gs.iter()
                .map(|g| match g {
                    Gate::Cnot { .. } => 1,
                    Gate::RetryUntil { body, .. } => count(body),
                    _ => 0,
                })
                .sum()
        }
        count(&self.gates)
    }

    pub fn opaque_gates(&self) -> Vec<&OpaqueGate> {
        fn walk<'a>(gs: &'a [Gate], out: &mut Vec<&'a OpaqueGate>) {
            for g in gs {
                match g {
                    Gate::Opaque(o) => out.push(o),
                    Gate::RetryUntil { body, .. } => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.gates, &mut out);
        out
    }

    /// Measurement markers in program order (top level only).
    pub fn measurements(&self) -> Vec<(usize, Option<u8>)> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Measure { qubit, postselect } => Some((*qubit, *postselect)),
                _ => None,
            })
            .collect()
    }

    /// JSON dump with gates as tagged records.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Serialize for Circuit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Circuit", 3)?;
        st.serialize_field("n_qubits", &self.n_qubits)?;
        st.serialize_field("metadata", &self.metadata)?;
        st.serialize_field("gates", &self.gates)?;
        st.end()
    }
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde_json::json;
        let v = match self {
            Gate::Cnot { control, target } => json!({"gate": "cx", "control": control, "target": target}),
            Gate::U {
                theta,
                phi,
                lambda,
                qubit,
            } => json!({"gate": "u", "theta": theta, "phi": phi, "lambda": lambda, "qubit": qubit}),
            Gate::Opaque(o) => {
                let costs: BTreeMap<String, &DeclaredCost> = o
                    .costs
                    .iter()
                    .map(|(k, v)| (serde_json::to_value(k).unwrap().as_str().unwrap().to_string(), v))
                    .collect();
                let m = o.matrix.matrix();
                let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect();
                json!({"gate": "opaque", "label": o.label, "qubits": o.qubits, "costs": costs,
                       "matrix": rows, "expansion": o.expansion})
            }
            Gate::Measure { qubit, postselect } => json!({"gate": "measure", "qubit": qubit, "postselect": postselect}),
            Gate::Reset { qubit } => json!({"gate": "reset", "qubit": qubit}),
            Gate::Barrier => json!({"gate": "barrier"}),
            Gate::RetryUntil {
                body,
                ancilla,
                success,
                reset,
            } => json!({"gate": "retry_until", "ancilla": ancilla, "success": success, "reset": reset, "body": body}),
        };
        v.serialize(s)
    }
}
