//! Exhaustive functional verification: dense statevector simulation,
//! truth tables for the classical reversible subset, and unitary
//! equivalence up to global phase.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index,
//! so qubit `q` of an `n`-qubit register sits at bit position `n - 1 - q`.
//! Toffoli and MPMCT gates are simulated natively as basis permutations,
//! which keeps the verifier independent of the transpiler it checks.
//!
//! Equivalence streams the two unitaries column by column (memory stays
//! O(2^n) regardless of circuit width) in two passes: the first locates the
//! phase reference, the first entry of maximal magnitude in column-major
//! order, the second normalizes both sides by their reference phase and
//! records the largest elementwise deviation.

use num_complex::Complex64;
use thiserror::Error;

use crate::ir::{Circuit, GateKind, Operation};

/// Default cap on simulated qubits. 2^14 statevector columns stay in the
/// hundreds of megabytes of compute, not memory; raise it deliberately.
pub const DEFAULT_SIM_LIMIT: usize = 14;

/// Default elementwise tolerance for equivalence checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Cap for full truth-table extraction (the table itself is 2^n entries).
const TRUTH_TABLE_LIMIT: usize = 24;

/// Cap for single-input classical propagation, bounded by the u64 bit width.
const CLASSICAL_LIMIT: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("circuit has {qubits} qubits, over the simulator limit {limit}")]
    TooManyQubits { qubits: usize, limit: usize },
    #[error("{0} is not a classical reversible gate")]
    NonClassicalGate(GateKind),
    #[error("circuits act on different register sizes ({0} vs {1})")]
    QubitCountMismatch(usize, usize),
}

/// Dense circuit unitary, stored column-major: column `c` is the image of
/// basis state `c`.
#[derive(Debug, Clone)]
pub struct Unitary {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    pub fn qubit_count(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.dim + row]
    }

    /// Largest elementwise deviation of U·U† from the identity.
    pub fn max_unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.entry(i, k) * self.entry(j, k).conj();
                }
                let expect = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }
}

/// Result of an equivalence check. `witness` is the (row, column) basis
/// pair of the worst entry and is present only on failure; `column` is the
/// input basis state, `row` the output component that disagrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub max_deviation: f64,
    pub witness: Option<(usize, usize)>,
}

/// Build the full circuit unitary, column by column.
pub fn unitary_of(circuit: &Circuit, limit: usize) -> Result<Unitary, VerifyError> {
    let n = circuit.qubit_count();
    if n > limit {
        return Err(VerifyError::TooManyQubits { qubits: n, limit });
    }
    let dim = 1usize << n;
    let mut data = vec![ZERO; dim * dim];
    let mut col_buf = vec![ZERO; dim];
    for col in 0..dim {
        apply_to_basis(circuit, col, &mut col_buf);
        data[col * dim..(col + 1) * dim].copy_from_slice(&col_buf);
    }
    Ok(Unitary {
        n_qubits: n,
        dim,
        data,
    })
}

/// Check `a` against `b` up to a global phase, elementwise within `tol`.
pub fn equivalent(
    a: &Circuit,
    b: &Circuit,
    tol: f64,
    limit: usize,
) -> Result<Equivalence, VerifyError> {
    stream_equivalence(a, b, 0, tol, limit)
}

/// Equivalence on the subspace where the listed ancilla qubits are |0⟩.
/// Columns with a nonzero ancilla bit are skipped entirely; any output
/// amplitude that leaks onto a nonzero-ancilla row counts as deviation, so
/// "equivalent" certifies both the block unitary and ancilla restoration.
pub fn equivalent_on_zero_ancillas(
    a: &Circuit,
    b: &Circuit,
    ancillas: &[usize],
    tol: f64,
    limit: usize,
) -> Result<Equivalence, VerifyError> {
    let n = a.qubit_count();
    let mut mask = 0usize;
    for &q in ancillas {
        mask |= 1 << (n - 1 - q);
    }
    stream_equivalence(a, b, mask, tol, limit)
}

fn stream_equivalence(
    a: &Circuit,
    b: &Circuit,
    ancilla_mask: usize,
    tol: f64,
    limit: usize,
) -> Result<Equivalence, VerifyError> {
    let n = a.qubit_count();
    if b.qubit_count() != n {
        return Err(VerifyError::QubitCountMismatch(n, b.qubit_count()));
    }
    if n > limit {
        return Err(VerifyError::TooManyQubits { qubits: n, limit });
    }
    let dim = 1usize << n;
    let mut col_a = vec![ZERO; dim];
    let mut col_b = vec![ZERO; dim];

    // pass 1: phase reference
    let mut best = -1.0f64;
    let mut ref_a = ONE;
    let mut ref_b = ONE;
    for col in (0..dim).filter(|c| c & ancilla_mask == 0) {
        apply_to_basis(a, col, &mut col_a);
        apply_to_basis(b, col, &mut col_b);
        for row in (0..dim).filter(|r| r & ancilla_mask == 0) {
            let mag = col_a[row].norm_sqr();
            if mag > best {
                best = mag;
                ref_a = col_a[row];
                ref_b = col_b[row];
            }
        }
    }
    let phase_a = unit_phase(ref_a);
    let phase_b = unit_phase(ref_b);

    // pass 2: deviation under the fixed phases
    let mut max_dev = 0.0f64;
    let mut witness = (0usize, 0usize);
    for col in (0..dim).filter(|c| c & ancilla_mask == 0) {
        apply_to_basis(a, col, &mut col_a);
        apply_to_basis(b, col, &mut col_b);
        for row in 0..dim {
            let dev = if row & ancilla_mask == 0 {
                (col_a[row] * phase_a.conj() - col_b[row] * phase_b.conj()).norm()
            } else {
                // leakage out of the ancilla-zero subspace, on either side
                col_a[row].norm().max(col_b[row].norm())
            };
            if dev > max_dev {
                max_dev = dev;
                witness = (row, col);
            }
        }
    }
    let equivalent = max_dev <= tol;
    Ok(Equivalence {
        equivalent,
        max_deviation: max_dev,
        witness: if equivalent { None } else { Some(witness) },
    })
}

fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        ONE
    }
}

fn apply_to_basis(circuit: &Circuit, basis: usize, buf: &mut [Complex64]) {
    buf.fill(ZERO);
    buf[basis] = ONE;
    let n = circuit.qubit_count();
    for op in circuit.operations() {
        apply_op(buf, n, op);
    }
}

fn apply_op(state: &mut [Complex64], n: usize, op: &Operation) {
    let dim = state.len();
    let pos = |q: usize| n - 1 - q;
    match op.kind {
        GateKind::X => {
            let m = 1usize << pos(op.qubits[0]);
            for i in 0..dim {
                if i & m == 0 {
                    state.swap(i, i | m);
                }
            }
        }
        GateKind::H => {
            let m = 1usize << pos(op.qubits[0]);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..dim {
                if i & m == 0 {
                    let (lo, hi) = (state[i], state[i | m]);
                    state[i] = (lo + hi) * r;
                    state[i | m] = (lo - hi) * r;
                }
            }
        }
        GateKind::S | GateKind::SDag | GateKind::T | GateKind::TDag => {
            let m = 1usize << pos(op.qubits[0]);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let phase = match op.kind {
                GateKind::S => Complex64::new(0.0, 1.0),
                GateKind::SDag => Complex64::new(0.0, -1.0),
                GateKind::T => Complex64::new(r, r),
                _ => Complex64::new(r, -r),
            };
            for (i, amp) in state.iter_mut().enumerate() {
                if i & m != 0 {
                    *amp *= phase;
                }
            }
        }
        GateKind::Cz => {
            let ma = 1usize << pos(op.qubits[0]);
            let mb = 1usize << pos(op.qubits[1]);
            let both = ma | mb;
            for (i, amp) in state.iter_mut().enumerate() {
                if i & both == both {
                    *amp = -*amp;
                }
            }
        }
        GateKind::Cnot | GateKind::Toffoli | GateKind::Mpmct(_) => {
            let tmask = 1usize << pos(op.target());
            let mut on = 0usize;
            let mut off = 0usize;
            for (&c, &p) in op.controls().iter().zip(&op.polarities) {
                if p {
                    on |= 1 << pos(c);
                } else {
                    off |= 1 << pos(c);
                }
            }
            for i in 0..dim {
                if i & tmask == 0 && i & on == on && i & off == 0 {
                    state.swap(i, i | tmask);
                }
            }
        }
    }
}

/// Permutation realized by a classical reversible circuit. `table[i]` is
/// the output basis index for input `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n_qubits: usize,
    table: Vec<usize>,
}

impl TruthTable {
    pub fn qubit_count(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn apply(&self, input: usize) -> usize {
        self.table[input]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.table
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.table.len()];
        for &v in &self.table {
            if v >= self.table.len() || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }
}

/// Extract the full permutation of a circuit over X/CNOT/Toffoli/MPMCT by
/// classical bit propagation.
pub fn truth_table(circuit: &Circuit) -> Result<TruthTable, VerifyError> {
    let n = circuit.qubit_count();
    if n > TRUTH_TABLE_LIMIT {
        return Err(VerifyError::TooManyQubits {
            qubits: n,
            limit: TRUTH_TABLE_LIMIT,
        });
    }
    require_classical(circuit)?;
    let dim = 1usize << n;
    let mut table = Vec::with_capacity(dim);
    for input in 0..dim {
        table.push(propagate(circuit, input as u64) as usize);
    }
    Ok(TruthTable {
        n_qubits: n,
        table,
    })
}

/// Propagate a single classical basis state, for circuits too wide to
/// tabulate in full (QRAM address sweeps and the like).
pub fn classical_output(circuit: &Circuit, input: u64) -> Result<u64, VerifyError> {
    let n = circuit.qubit_count();
    if n > CLASSICAL_LIMIT {
        return Err(VerifyError::TooManyQubits {
            qubits: n,
            limit: CLASSICAL_LIMIT,
        });
    }
    require_classical(circuit)?;
    Ok(propagate(circuit, input))
}

fn require_classical(circuit: &Circuit) -> Result<(), VerifyError> {
    for op in circuit.operations() {
        match op.kind {
            GateKind::X | GateKind::Cnot | GateKind::Toffoli | GateKind::Mpmct(_) => {}
            other => return Err(VerifyError::NonClassicalGate(other)),
        }
    }
    Ok(())
}

fn propagate(circuit: &Circuit, mut bits: u64) -> u64 {
    let n = circuit.qubit_count();
    let pos = |q: usize| (n - 1 - q) as u32;
    for op in circuit.operations() {
        match op.kind {
            GateKind::X => bits ^= 1 << pos(op.qubits[0]),
            _ => {
                let fire = op
                    .controls()
                    .iter()
                    .zip(&op.polarities)
                    .all(|(&c, &p)| ((bits >> pos(c)) & 1 == 1) == p);
                if fire {
                    bits ^= 1 << pos(op.target());
                }
            }
        }
    }
    bits
}
