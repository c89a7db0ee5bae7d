//! Moment-based circuit representation.
//!
//! A [`Circuit`] is a register of named qubits plus an ordered list of
//! [`Moment`]s; each moment is a set of operations acting on pairwise
//! disjoint qubits and is executed as one time step. Circuits are immutable
//! values: appending consumes the old value and every rewrite pass returns a
//! fresh circuit, which keeps before/after comparisons trivial.
//!
//! Scheduling is deterministic. [`SchedulePolicy::Earliest`] places a new
//! operation into the latest possible existing moment, that is the final
//! moment whenever none of the operation's qubits are already used there,
//! and opens a new moment otherwise. [`SchedulePolicy::NewMoment`] always
//! opens a new moment. Depth metrics are defined on a canonical repack, see
//! [`Circuit::repacked`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Per-gate metadata labels. Flags restrict where rewrite passes may fire
/// and track gate provenance through optimization; the IR treats the labels
/// as opaque integers.
pub type FlagSet = BTreeSet<u32>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("duplicate qubit name {0:?}")]
    DuplicateQubitName(String),
    #[error("register must contain at least one qubit")]
    EmptyRegister,
    #[error("qubit index {0} is not in the register")]
    UnknownQubit(usize),
    #[error("{kind} expects {expected} qubits, got {got}")]
    ArityMismatch {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("operation lists the same qubit more than once")]
    DuplicateQubitInGate,
    #[error("{kind} expects {expected} control polarities, got {got}")]
    PolarityMismatch {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{0} supports positive controls only")]
    NegativeControlUnsupported(GateKind),
    #[error("moment {moment} uses qubit {qubit} twice")]
    OverlappingSupport { moment: usize, qubit: usize },
}

/// The supported gate alphabet. `Mpmct(m)` is a mixed-polarity
/// multi-controlled X with `m` controls; all other kinds have fixed arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    H,
    S,
    SDag,
    T,
    TDag,
    Cnot,
    Cz,
    Toffoli,
    Mpmct(u32),
}

impl GateKind {
    /// Number of control qubits (for `Cz` the first operand is treated as
    /// the nominal control so that polarity bookkeeping stays uniform).
    pub fn control_count(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::S | GateKind::SDag | GateKind::T
            | GateKind::TDag => 0,
            GateKind::Cnot | GateKind::Cz => 1,
            GateKind::Toffoli => 2,
            GateKind::Mpmct(m) => m as usize,
        }
    }

    /// Total operand count, controls plus target.
    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::S | GateKind::SDag | GateKind::T
            | GateKind::TDag => 1,
            GateKind::Cnot | GateKind::Cz => 2,
            GateKind::Toffoli => 3,
            GateKind::Mpmct(m) => m as usize + 1,
        }
    }

    /// True for T and its inverse, the non-Clifford cost drivers.
    pub fn is_t_type(self) -> bool {
        matches!(self, GateKind::T | GateKind::TDag)
    }

    /// The token used by the text format.
    pub fn token(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::SDag => "SDAG",
            GateKind::T => "T",
            GateKind::TDag => "TDAG",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Mpmct(_) => "MPMCT",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One gate application: kind, operands (controls first, target last),
/// per-control polarities (true = trigger on 1) and a set of flag labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub polarities: Vec<bool>,
    pub flags: FlagSet,
}

impl Operation {
    fn plain(kind: GateKind, qubits: Vec<usize>) -> Self {
        let controls = kind.control_count();
        Operation {
            kind,
            qubits,
            polarities: vec![true; controls],
            flags: FlagSet::new(),
        }
    }

    pub fn x(q: usize) -> Self {
        Self::plain(GateKind::X, vec![q])
    }
    pub fn h(q: usize) -> Self {
        Self::plain(GateKind::H, vec![q])
    }
    pub fn s(q: usize) -> Self {
        Self::plain(GateKind::S, vec![q])
    }
    pub fn sdag(q: usize) -> Self {
        Self::plain(GateKind::SDag, vec![q])
    }
    pub fn t(q: usize) -> Self {
        Self::plain(GateKind::T, vec![q])
    }
    pub fn tdag(q: usize) -> Self {
        Self::plain(GateKind::TDag, vec![q])
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::plain(GateKind::Cnot, vec![control, target])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::plain(GateKind::Cz, vec![a, b])
    }
    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self::plain(GateKind::Toffoli, vec![c1, c2, target])
    }

    /// Mixed-polarity multi-controlled X; `controls` pairs a qubit with its
    /// polarity (true = positive control).
    pub fn mpmct(controls: &[(usize, bool)], target: usize) -> Self {
        let mut qubits: Vec<usize> = controls.iter().map(|&(q, _)| q).collect();
        let polarities = controls.iter().map(|&(_, p)| p).collect();
        qubits.push(target);
        Operation {
            kind: GateKind::Mpmct(controls.len() as u32),
            qubits,
            polarities,
            flags: FlagSet::new(),
        }
    }

    /// Builder-style flag attachment, mostly for tests and fixtures.
    pub fn with_flag(mut self, flag: u32) -> Self {
        self.flags.insert(flag);
        self
    }

    /// The target qubit (last operand).
    pub fn target(&self) -> usize {
        *self.qubits.last().expect("operation has at least one qubit")
    }

    /// Control operands, in declaration order.
    pub fn controls(&self) -> &[usize] {
        &self.qubits[..self.kind.control_count()]
    }

    /// Smallest operand index; used for deterministic ordering.
    pub fn min_qubit(&self) -> usize {
        *self.qubits.iter().min().expect("operation has at least one qubit")
    }

    /// Structural validity against a register of `register_len` qubits.
    pub fn validate(&self, register_len: usize) -> Result<(), IrError> {
        let expected = self.kind.arity();
        if self.qubits.len() != expected {
            return Err(IrError::ArityMismatch {
                kind: self.kind,
                expected,
                got: self.qubits.len(),
            });
        }
        let controls = self.kind.control_count();
        if self.polarities.len() != controls {
            return Err(IrError::PolarityMismatch {
                kind: self.kind,
                expected: controls,
                got: self.polarities.len(),
            });
        }
        if !matches!(self.kind, GateKind::Mpmct(_)) && self.polarities.iter().any(|p| !p) {
            return Err(IrError::NegativeControlUnsupported(self.kind));
        }
        for &q in &self.qubits {
            if q >= register_len {
                return Err(IrError::UnknownQubit(q));
            }
        }
        let mut seen = BTreeSet::new();
        for &q in &self.qubits {
            if !seen.insert(q) {
                return Err(IrError::DuplicateQubitInGate);
            }
        }
        Ok(())
    }
}

/// A set of operations with pairwise disjoint qubit supports, executed as
/// one time step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Moment {
    pub operations: Vec<Operation>,
}

impl Moment {
    /// True when none of the moment's operations touches `q`.
    pub fn is_free(&self, q: usize) -> bool {
        self.operations.iter().all(|op| !op.qubits.contains(&q))
    }
}

/// Ordered qubit register with name lookup. Indices equal declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Register {
    fn new<I, S>(names: I) -> Result<Self, IrError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut reg = Register {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            reg.push(name.as_ref())?;
        }
        if reg.names.is_empty() {
            return Err(IrError::EmptyRegister);
        }
        Ok(reg)
    }

    fn push(&mut self, name: &str) -> Result<usize, IrError> {
        if self.index.contains_key(name) {
            return Err(IrError::DuplicateQubitName(name.to_string()));
        }
        let idx = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), idx);
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Where `append` puts a new operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulePolicy {
    /// Latest possible existing moment: the final moment when the operation's
    /// qubits are all free there, otherwise a fresh moment. Never adds more
    /// than one moment.
    #[default]
    Earliest,
    /// Always a fresh moment.
    NewMoment,
}

/// Filter used by [`Circuit::flag_gates`]. All present conditions must hold:
/// the gate kind is in `kinds`, the operation touches at least one qubit in
/// `qubits`, and the operation's (raw, pre-repack) moment index falls in
/// `moments`.
#[derive(Debug, Clone, Default)]
pub struct GatePredicate {
    pub kinds: Option<BTreeSet<GateKind>>,
    pub qubits: Option<BTreeSet<usize>>,
    pub moments: Option<std::ops::Range<usize>>,
}

impl GatePredicate {
    /// Match every operation.
    pub fn any() -> Self {
        GatePredicate::default()
    }

    /// Match operations of one kind.
    pub fn kind(kind: GateKind) -> Self {
        GatePredicate {
            kinds: Some(BTreeSet::from([kind])),
            ..GatePredicate::default()
        }
    }

    pub fn with_kind(mut self, kind: GateKind) -> Self {
        self.kinds.get_or_insert_with(BTreeSet::new).insert(kind);
        self
    }

    pub fn touching<I: IntoIterator<Item = usize>>(mut self, qubits: I) -> Self {
        self.qubits = Some(qubits.into_iter().collect());
        self
    }

    pub fn in_moments(mut self, range: std::ops::Range<usize>) -> Self {
        self.moments = Some(range);
        self
    }

    fn matches(&self, op: &Operation, moment: usize) -> bool {
        if let Some(kinds) = &self.kinds {
            if !kinds.contains(&op.kind) {
                return false;
            }
        }
        if let Some(qubits) = &self.qubits {
            if !op.qubits.iter().any(|q| qubits.contains(q)) {
                return false;
            }
        }
        if let Some(range) = &self.moments {
            if !range.contains(&moment) {
                return false;
            }
        }
        true
    }
}

/// A register plus an ordered list of moments. See the module docs for the
/// scheduling rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    register: Register,
    moments: Vec<Moment>,
    /// Last moment index touching each qubit, -1 when untouched. Derived
    /// data, kept in sync by every mutation path.
    frontier: Vec<i64>,
}

impl Circuit {
    /// Empty circuit over the given register names.
    pub fn build<I, S>(names: I) -> Result<Self, IrError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let register = Register::new(names)?;
        let frontier = vec![-1; register.len()];
        Ok(Circuit {
            register,
            moments: Vec::new(),
            frontier,
        })
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    /// Same register, no moments.
    pub fn cleared(&self) -> Circuit {
        Circuit {
            register: self.register.clone(),
            moments: Vec::new(),
            frontier: vec![-1; self.register.len()],
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.register.len()
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    /// Raw moment count of this value, before canonical repacking. The
    /// reported depth metric uses [`Circuit::repacked`] instead.
    pub fn moment_count(&self) -> usize {
        self.moments.len()
    }

    /// Total operation count.
    pub fn gate_count(&self) -> usize {
        self.moments.iter().map(|m| m.operations.len()).sum()
    }

    /// Grow the register; returns the index of `name`, reusing an existing
    /// qubit of the same name. Used by transpilation to bind ancillae.
    pub fn ensure_qubit(&mut self, name: &str) -> usize {
        if let Some(idx) = self.register.position(name) {
            return idx;
        }
        let idx = self.register.push(name).expect("name checked absent");
        self.frontier.push(-1);
        idx
    }

    /// Append one operation under the given policy. Consumes the circuit;
    /// clone first when the old value is still needed.
    pub fn append(mut self, op: Operation, policy: SchedulePolicy) -> Result<Self, IrError> {
        op.validate(self.register.len())?;
        match policy {
            SchedulePolicy::Earliest => self.place_earliest(op, 0),
            SchedulePolicy::NewMoment => self.place_new(op),
        }
        Ok(self)
    }

    /// Append a sequence of operations under one policy.
    pub fn append_all<I>(mut self, ops: I, policy: SchedulePolicy) -> Result<Self, IrError>
    where
        I: IntoIterator<Item = Operation>,
    {
        for op in ops {
            self = self.append(op, policy)?;
        }
        Ok(self)
    }

    /// Earliest placement with a segment floor: the op may never join a
    /// moment with index below `floor`. The text format's `---` separators
    /// use this to make moment boundaries authoritative.
    pub(crate) fn append_earliest_from(&mut self, op: Operation, floor: usize) -> Result<(), IrError> {
        op.validate(self.register.len())?;
        self.place_earliest(op, floor);
        Ok(())
    }

    fn place_earliest(&mut self, op: Operation, floor: usize) {
        let dep = op.qubits.iter().map(|&q| self.frontier[q]).max().unwrap_or(-1);
        let last = self.moments.len() as i64 - 1;
        if last >= floor as i64 && dep < last {
            let idx = self.moments.len() - 1;
            self.bump_frontier(&op, idx);
            self.moments[idx].operations.push(op);
        } else {
            self.place_new(op);
        }
    }

    fn place_new(&mut self, op: Operation) {
        let idx = self.moments.len();
        self.bump_frontier(&op, idx);
        self.moments.push(Moment {
            operations: vec![op],
        });
    }

    fn bump_frontier(&mut self, op: &Operation, moment: usize) {
        for &q in &op.qubits {
            self.frontier[q] = moment as i64;
        }
    }

    /// Iterate operations in moment order (stored order within a moment).
    pub fn operations(&self) -> impl Iterator<Item = &Operation> {
        self.moments.iter().flat_map(|m| m.operations.iter())
    }

    /// Iterate `(moment index, operation)` pairs.
    pub fn indexed_operations(&self) -> impl Iterator<Item = (usize, &Operation)> {
        self.moments
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.operations.iter().map(move |op| (i, op)))
    }

    /// Return a copy where every operation matched by `predicate` carries
    /// the additional `flag`. Structure is otherwise unchanged.
    pub fn flag_gates(&self, predicate: &GatePredicate, flag: u32) -> Circuit {
        let mut out = self.clone();
        for (i, moment) in out.moments.iter_mut().enumerate() {
            for op in &mut moment.operations {
                if predicate.matches(op, i) {
                    op.flags.insert(flag);
                }
            }
        }
        out
    }

    /// Canonical repack defining the depth metrics.
    ///
    /// Operations are ordered by (as-late-as-possible level, as-soon-as-
    /// possible level, smallest qubit index) and re-appended greedily under
    /// the Earliest rule. Both level functions depend only on the per-wire
    /// gate order, so the result is invariant under any moment rearrangement
    /// that preserves wire order, and repacking is idempotent. The ALAP
    /// primary key stops gates with scheduling slack from drifting ahead of
    /// the layer that needs them, which keeps transpiled phase layers (all
    /// seven T gates of a lowered Toffoli, say) in a single moment.
    pub fn repacked(&self) -> Circuit {
        let n = self.register.len();
        let ops: Vec<&Operation> = self.operations().collect();
        let total = ops.len();

        // ASAP levels, forward over the wire order.
        let mut asap = vec![0usize; total];
        let mut front = vec![-1i64; n];
        for (i, op) in ops.iter().enumerate() {
            let dep = op.qubits.iter().map(|&q| front[q]).max().unwrap_or(-1);
            let level = (dep + 1) as usize;
            asap[i] = level;
            for &q in &op.qubits {
                front[q] = level as i64;
            }
        }
        let depth = asap.iter().map(|&l| l + 1).max().unwrap_or(0);

        // ALAP levels, backward.
        let mut alap = vec![0usize; total];
        let mut need = vec![depth as i64; n];
        for (i, op) in ops.iter().enumerate().rev() {
            let succ = op.qubits.iter().map(|&q| need[q]).min().unwrap_or(depth as i64);
            let level = (succ - 1) as usize;
            alap[i] = level;
            for &q in &op.qubits {
                need[q] = level as i64;
            }
        }

        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by_key(|&i| (alap[i], asap[i], ops[i].min_qubit()));

        let mut out = Circuit {
            register: self.register.clone(),
            moments: Vec::new(),
            frontier: vec![-1; n],
        };
        for i in order {
            out.place_earliest(ops[i].clone(), 0);
        }
        out
    }

    /// Check the structural invariants: every operation references register
    /// qubits and every moment has pairwise disjoint supports.
    pub fn validate(&self) -> Result<(), IrError> {
        for (mi, moment) in self.moments.iter().enumerate() {
            let mut used = BTreeSet::new();
            for op in &moment.operations {
                op.validate(self.register.len())?;
                for &q in &op.qubits {
                    if !used.insert(q) {
                        return Err(IrError::OverlappingSupport {
                            moment: mi,
                            qubit: q,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
