//! Lowers Toffoli and MPMCT gates into Clifford+T form.
//!
//! Registered Toffoli strategies:
//!
//! ```text
//! name            ancillae  T  T-depth
//! TDEPTH1_4ANC        4     7     1     (Selinger-style, all 7 T in one layer)
//! TDEPTH3_0ANC        0     7     3
//! NONE                0     -     -     (pass-through)
//! ```
//!
//! Ancilla wires are bound by name: the k-th expanded Toffoli uses
//! `toff_a<4k>`..`toff_a<4k+3>`, appended to the register unless qubits of
//! those names already exist. Binding by name is deliberate, it lets a
//! fixture pre-declare ancilla wires that later carry its own gates, and it
//! gives every Toffoli a fresh block so wire counts stay predictable.
//!
//! MPMCT lowering first turns negative controls into X conjugation, then
//! rewrites m >= 3 controls into 4(m-2) Toffolis over m-2 ancillae named
//! `mct_a<i>` (Barenco vee network). The network restores its ancillae on
//! every basis input, so one ancilla block is shared by all MPMCTs. m = 2
//! becomes a single Toffoli and m = 1 a CNOT. Expanded gates inherit the
//! source gate's flags, which keeps provenance visible to the optimizers.

use thiserror::Error;

use crate::ir::{Circuit, GateKind, Operation};

pub const NONE: &str = "NONE";
pub const TDEPTH1_4ANC: &str = "TDEPTH1_4ANC";
pub const TDEPTH3_0ANC: &str = "TDEPTH3_0ANC";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranspileError {
    #[error("unknown decomposition strategy {0:?}")]
    UnknownStrategy(String),
    #[error("{0} cannot be decomposed by this pass; lower MPMCT gates first")]
    UnsupportedGate(GateKind),
    #[error("control order {0:?} must permute the controls and keep index 2 as the target")]
    InvalidControlOrder([usize; 3]),
}

/// Descriptor of a registered strategy (`NONE` reports zero cost).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyInfo {
    pub name: &'static str,
    pub ancilla_count: usize,
    pub t_count: usize,
    pub t_depth: usize,
}

pub fn list_strategies() -> Vec<StrategyInfo> {
    vec![
        StrategyInfo {
            name: TDEPTH1_4ANC,
            ancilla_count: 4,
            t_count: 7,
            t_depth: 1,
        },
        StrategyInfo {
            name: TDEPTH3_0ANC,
            ancilla_count: 0,
            t_count: 7,
            t_depth: 3,
        },
        StrategyInfo {
            name: NONE,
            ancilla_count: 0,
            t_count: 0,
            t_depth: 0,
        },
    ]
}

/// Assignment of a Toffoli's operands to the expansion's role slots. Only
/// the two controls may be permuted; the Toffoli is symmetric in them, so
/// any such order yields an equivalent expansion, while moving the target
/// would change the unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlOrder([usize; 3]);

impl Default for ControlOrder {
    fn default() -> Self {
        ControlOrder([0, 1, 2])
    }
}

impl ControlOrder {
    pub fn new(order: [usize; 3]) -> Result<Self, TranspileError> {
        let mut seen = [false; 3];
        for &i in &order {
            if i > 2 || seen[i] {
                return Err(TranspileError::InvalidControlOrder(order));
            }
            seen[i] = true;
        }
        if order[2] != 2 {
            return Err(TranspileError::InvalidControlOrder(order));
        }
        Ok(ControlOrder(order))
    }

    /// The (c2, c1, t) assignment.
    pub fn swapped() -> Self {
        ControlOrder([1, 0, 2])
    }

    pub fn indices(&self) -> [usize; 3] {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    None,
    TDepth1,
    TDepth3,
}

fn lookup(name: &str) -> Result<Strategy, TranspileError> {
    match name {
        NONE => Ok(Strategy::None),
        TDEPTH1_4ANC => Ok(Strategy::TDepth1),
        TDEPTH3_0ANC => Ok(Strategy::TDepth3),
        other => Err(TranspileError::UnknownStrategy(other.to_string())),
    }
}

/// Replace every Toffoli with the strategy's Clifford+T expansion. The
/// input may not contain MPMCT gates with more than two controls; run
/// [`decompose_mpmct`] first. Output is canonically repacked.
pub fn decompose_toffoli(
    circuit: &Circuit,
    strategy: &str,
    order: ControlOrder,
) -> Result<Circuit, TranspileError> {
    let strat = lookup(strategy)?;
    for op in circuit.operations() {
        if let GateKind::Mpmct(m) = op.kind {
            if m > 2 {
                return Err(TranspileError::UnsupportedGate(op.kind));
            }
        }
    }
    if strat == Strategy::None {
        return Ok(circuit.clone());
    }

    let mut out = circuit.cleared();
    let mut block = 0usize;
    for op in circuit.operations() {
        if op.kind != GateKind::Toffoli {
            out.append_earliest_from(op.clone(), 0)
                .expect("source operation is valid");
            continue;
        }
        let [i, j, k] = order.indices();
        let (a, b, t) = (op.qubits[i], op.qubits[j], op.qubits[k]);
        let expansion = match strat {
            Strategy::TDepth1 => {
                let r: [usize; 4] =
                    std::array::from_fn(|x| out.ensure_qubit(&format!("toff_a{}", 4 * block + x)));
                block += 1;
                tdepth1_ops(a, b, t, &r)
            }
            Strategy::TDepth3 => tdepth3_ops(a, b, t),
            Strategy::None => unreachable!("handled above"),
        };
        for mut gate in expansion {
            gate.flags = op.flags.clone();
            out.append_earliest_from(gate, 0)
                .expect("expansion uses registered qubits");
        }
    }
    Ok(out.repacked())
}

/// Lower every MPMCT: X-conjugate negative controls, expand m >= 3 into the
/// Barenco Toffoli network, then (unless `toffoli_strategy` is NONE) expand
/// all Toffolis via [`decompose_toffoli`] with the default control order.
pub fn decompose_mpmct(circuit: &Circuit, toffoli_strategy: &str) -> Result<Circuit, TranspileError> {
    let strat = lookup(toffoli_strategy)?;

    let mut out = circuit.cleared();
    for op in circuit.operations() {
        let m = match op.kind {
            GateKind::Mpmct(m) => m as usize,
            _ => {
                out.append_earliest_from(op.clone(), 0)
                    .expect("source operation is valid");
                continue;
            }
        };
        let negatives: Vec<usize> = op
            .controls()
            .iter()
            .zip(&op.polarities)
            .filter(|&(_, &p)| !p)
            .map(|(&c, _)| c)
            .collect();

        let mut seq: Vec<Operation> = negatives.iter().map(|&c| Operation::x(c)).collect();
        match m {
            0 => seq.push(Operation::x(op.target())),
            1 => seq.push(Operation::cnot(op.controls()[0], op.target())),
            2 => seq.push(Operation::toffoli(
                op.controls()[0],
                op.controls()[1],
                op.target(),
            )),
            _ => {
                let anc: Vec<usize> = (0..m - 2)
                    .map(|i| out.ensure_qubit(&format!("mct_a{i}")))
                    .collect();
                barenco_ops(op.controls(), op.target(), &anc, &mut seq);
            }
        }
        seq.extend(negatives.iter().map(|&c| Operation::x(c)));

        for mut gate in seq {
            gate.flags = op.flags.clone();
            out.append_earliest_from(gate, 0)
                .expect("expansion uses registered qubits");
        }
    }
    let out = out.repacked();
    match strat {
        Strategy::None => Ok(out),
        _ => decompose_toffoli(&out, toffoli_strategy, ControlOrder::default()),
    }
}

/// 7-T, T-depth-1 expansion over roles (a, b, t) and four ancillae.
fn tdepth1_ops(a: usize, b: usize, t: usize, r: &[usize; 4]) -> Vec<Operation> {
    vec![
        Operation::h(t),
        Operation::cnot(a, r[0]),
        Operation::cnot(b, r[2]),
        Operation::cnot(b, r[1]),
        Operation::cnot(t, r[2]),
        Operation::cnot(r[0], r[3]),
        Operation::cnot(a, r[1]),
        Operation::cnot(t, r[3]),
        Operation::cnot(r[2], r[0]),
        Operation::t(a),
        Operation::t(b),
        Operation::t(t),
        Operation::t(r[0]),
        Operation::tdag(r[1]),
        Operation::tdag(r[2]),
        Operation::tdag(r[3]),
        Operation::cnot(r[2], r[0]),
        Operation::cnot(t, r[3]),
        Operation::cnot(a, r[1]),
        Operation::cnot(r[0], r[3]),
        Operation::cnot(t, r[2]),
        Operation::cnot(b, r[1]),
        Operation::cnot(b, r[2]),
        Operation::cnot(a, r[0]),
        Operation::h(t),
    ]
}

/// 7-T, T-depth-3 expansion over controls (a, b) and target c, no ancillae.
fn tdepth3_ops(a: usize, b: usize, c: usize) -> Vec<Operation> {
    vec![
        Operation::h(c),
        Operation::cnot(a, b),
        Operation::t(a),
        Operation::tdag(b),
        Operation::t(c),
        Operation::cnot(c, b),
        Operation::cnot(b, a),
        Operation::t(b),
        Operation::tdag(a),
        Operation::cnot(c, a),
        Operation::cnot(a, b),
        Operation::t(a),
        Operation::tdag(b),
        Operation::cnot(c, b),
        Operation::cnot(a, b),
        Operation::cnot(b, a),
        Operation::cnot(a, b),
        Operation::h(c),
    ]
}

/// Barenco 4(m-2) network: two vee-shaped sweeps over the ancilla chain,
/// the second without the outer target Toffolis. Restores every ancilla on
/// every basis input (the construction tolerates dirty ancillae).
fn barenco_ops(cs: &[usize], t: usize, anc: &[usize], seq: &mut Vec<Operation>) {
    barenco_vee(cs, t, anc, true, seq);
    barenco_vee(cs, t, anc, false, seq);
}

fn barenco_vee(cs: &[usize], t: usize, anc: &[usize], with_outer: bool, seq: &mut Vec<Operation>) {
    let m = cs.len();
    if with_outer {
        seq.push(Operation::toffoli(cs[m - 1], anc[m - 3], t));
    }
    for i in (3..m).rev() {
        seq.push(Operation::toffoli(cs[i - 1], anc[i - 3], anc[i - 2]));
    }
    seq.push(Operation::toffoli(cs[0], cs[1], anc[0]));
    for i in 3..m {
        seq.push(Operation::toffoli(cs[i - 1], anc[i - 3], anc[i - 2]));
    }
    if with_outer {
        seq.push(Operation::toffoli(cs[m - 1], anc[m - 3], t));
    }
}
