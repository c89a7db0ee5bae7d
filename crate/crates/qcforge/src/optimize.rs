//! Rewrite passes over circuits: pair cancellation for CNOT and H, T;T to S
//! recomposition, commutation of T gates toward the circuit start, and a
//! wrapper that checks user-chosen invariants after every single rewrite.
//!
//! All passes implement [`OptimizerPass`]. A pass exposes one rewrite at a
//! time through [`OptimizerPass::step`]; the provided [`OptimizerPass::run`]
//! drives steps to a fixed point and aggregates a [`RewriteReport`]. The
//! cancellation and recomposition passes also override `run` with a worklist
//! engine that reuses its adjacency links between rewrites. Both paths apply
//! the same rewrites in the same order, so wrapping a pass in
//! [`with_invariants`] changes cost, never results.
//!
//! Rewrite order is part of the contract: pair rewrites fire left to right
//! keyed by the pair's later gate, which also resolves nested pairs innermost
//! first. Cancelled pairs hand the union of their flags to the nearest
//! surviving neighbor on each side (see [`cancel_cnot`]), so optimization
//! damage stays visible to later flagged passes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::analysis::metrics;
use crate::ir::{Circuit, GateKind, Operation};

/// Errors raised by optimizer passes and the invariant wrapper.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OptimizeError {
    /// A pass was restricted to flagged gates but given no flag to match.
    #[error("pass {0} restricted to flagged gates but no flag label given")]
    FlagRequired(String),
    /// A monitored quantity changed under a rewrite. `step` is 1-based.
    #[error("invariant {name} violated at rewrite {step}: {before} -> {after}")]
    InvariantViolated {
        name: String,
        step: usize,
        before: i64,
        after: i64,
    },
}

/// One applied rewrite: the updated circuit plus what the rewrite did.
#[derive(Debug, Clone)]
pub struct RewriteStep {
    pub circuit: Circuit,
    /// Gates deleted by this rewrite, per kind. Recomposition counts both
    /// merged gates here even though it inserts a replacement.
    pub removed: BTreeMap<GateKind, usize>,
    /// Flag labels handed to surviving neighbors, counted per receiving side.
    pub flags_transferred: usize,
}

/// Aggregate outcome of running a pass to its fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteReport {
    pub pass_name: String,
    pub rewrites_applied: usize,
    pub gates_removed: BTreeMap<GateKind, usize>,
    pub flags_transferred: usize,
    /// Step attempts including the final one that found nothing to do, so
    /// this is always `rewrites_applied + 1`.
    pub iterations: usize,
}

impl fmt::Display for RewriteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pass={} rewrites={} removed=",
            self.pass_name, self.rewrites_applied
        )?;
        if self.gates_removed.is_empty() {
            write!(f, "-")?;
        } else {
            for (pos, (kind, count)) in self.gates_removed.iter().enumerate() {
                if pos > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}:{}", kind.token(), count)?;
            }
        }
        write!(
            f,
            " flags_moved={} iterations={}",
            self.flags_transferred, self.iterations
        )
    }
}

/// A named quantity expected to stay constant across every rewrite of a pass.
pub struct InvariantSpec {
    name: String,
    measure: Box<dyn Fn(&Circuit) -> i64 + Send + Sync>,
}

impl fmt::Debug for InvariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvariantSpec")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl InvariantSpec {
    pub fn new(
        name: impl Into<String>,
        measure: impl Fn(&Circuit) -> i64 + Send + Sync + 'static,
    ) -> Self {
        InvariantSpec {
            name: name.into(),
            measure: Box::new(measure),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn measure(&self, circuit: &Circuit) -> i64 {
        (self.measure)(circuit)
    }

    /// Number of T and TDag gates, the canonical cancellation invariant.
    pub fn t_count() -> Self {
        Self::new("t-count", |c| metrics(c).t_count as i64)
    }

    /// Register width; no rewrite pass may add or drop wires.
    pub fn qubit_count() -> Self {
        Self::new("qubit-count", |c| c.qubit_count() as i64)
    }

    /// Resolve a stable CLI token ("t-count", "qubit-count").
    pub fn from_name(token: &str) -> Option<Self> {
        match token {
            "t-count" => Some(Self::t_count()),
            "qubit-count" => Some(Self::qubit_count()),
            _ => None,
        }
    }
}

/// A rewrite pass over circuits.
///
/// `step` applies at most one rewrite and returns the rewritten circuit;
/// `index` is the number of rewrites already applied in the current run,
/// which the invariant wrapper uses for error attribution. Implementations
/// must be deterministic functions of the input circuit so that repeated
/// `step` calls and a batched `run` agree.
pub trait OptimizerPass {
    fn name(&self) -> &str;

    fn step(&self, circuit: &Circuit, index: usize)
        -> Result<Option<RewriteStep>, OptimizeError>;

    /// Apply `step` until it finds nothing, then repack the result.
    /// A run with zero rewrites returns the input circuit unchanged.
    fn run(&self, circuit: &Circuit) -> Result<(Circuit, RewriteReport), OptimizeError> {
        let mut current = circuit.clone();
        let mut rewrites = 0usize;
        let mut gates_removed = BTreeMap::new();
        let mut flags_transferred = 0usize;
        while let Some(step) = self.step(&current, rewrites)? {
            current = step.circuit;
            merge_counts(&mut gates_removed, &step.removed);
            flags_transferred += step.flags_transferred;
            rewrites += 1;
        }
        let circuit = if rewrites == 0 {
            circuit.clone()
        } else {
            current.repacked()
        };
        Ok((
            circuit,
            RewriteReport {
                pass_name: self.name().to_string(),
                rewrites_applied: rewrites,
                gates_removed,
                flags_transferred,
                iterations: rewrites + 1,
            },
        ))
    }
}

impl<P: OptimizerPass + ?Sized> OptimizerPass for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn step(
        &self,
        circuit: &Circuit,
        index: usize,
    ) -> Result<Option<RewriteStep>, OptimizeError> {
        (**self).step(circuit, index)
    }

    fn run(&self, circuit: &Circuit) -> Result<(Circuit, RewriteReport), OptimizeError> {
        (**self).run(circuit)
    }
}

fn merge_counts(into: &mut BTreeMap<GateKind, usize>, from: &BTreeMap<GateKind, usize>) {
    for (&kind, &count) in from {
        *into.entry(kind).or_insert(0) += count;
    }
}

/// Re-append `ops` in order onto an empty copy of `like`'s register. Earliest
/// placement keeps the linear operation order intact, so rebuilding commutes
/// with further linear-order reasoning.
fn rebuild(like: &Circuit, ops: impl IntoIterator<Item = Operation>) -> Circuit {
    let mut out = like.cleared();
    for op in ops {
        out.append_earliest_from(op, 0)
            .expect("ops were valid in the source circuit");
    }
    out
}

#[derive(Clone, Copy)]
enum PairMode {
    /// Delete wire-adjacent identical pairs of this kind.
    Cancel(GateKind),
    /// Merge wire-adjacent T;T into S and TDag;TDag into SDag.
    Recompose,
}

/// Worklist engine over a doubly linked wire netlist.
///
/// `ops` keeps the circuit's linear operation order with tombstones;
/// `prev`/`next` link each gate to its wire neighbors, one slot per operand.
/// `pending` holds candidate pair endpoints (the later gate of a would-be
/// pair) and is popped in ascending order. Every rewrite re-enqueues exactly
/// the gates whose adjacency or flags changed, so the engine finds the same
/// pair a fresh scan of the rebuilt circuit would find.
struct PairEngine {
    ops: Vec<Option<Operation>>,
    prev: Vec<Vec<Option<usize>>>,
    next: Vec<Vec<Option<usize>>>,
    pending: BTreeSet<usize>,
    mode: PairMode,
    required_flag: Option<u32>,
}

fn slot(op: &Operation, q: usize) -> usize {
    op.qubits
        .iter()
        .position(|&x| x == q)
        .expect("linked op acts on the wire")
}

impl PairEngine {
    fn new(circuit: &Circuit, mode: PairMode, required_flag: Option<u32>) -> Self {
        let ops: Vec<Operation> = circuit.operations().cloned().collect();
        let mut prev: Vec<Vec<Option<usize>>> = Vec::with_capacity(ops.len());
        let mut next: Vec<Vec<Option<usize>>> = Vec::with_capacity(ops.len());
        let mut last: Vec<Option<(usize, usize)>> = vec![None; circuit.qubit_count()];
        for (i, op) in ops.iter().enumerate() {
            prev.push(vec![None; op.qubits.len()]);
            next.push(vec![None; op.qubits.len()]);
            for (k, &q) in op.qubits.iter().enumerate() {
                if let Some((pi, pk)) = last[q] {
                    prev[i][k] = Some(pi);
                    next[pi][pk] = Some(i);
                }
                last[q] = Some((i, k));
            }
        }
        PairEngine {
            pending: (0..ops.len()).collect(),
            ops: ops.into_iter().map(Some).collect(),
            prev,
            next,
            mode,
            required_flag,
        }
    }

    /// The pair's earlier gate, if `end` closes a rewritable pair: same gate
    /// on the same wires, adjacent on every wire, flag restriction satisfied.
    fn pair_start(&self, end: usize) -> Option<usize> {
        let late = self.ops[end].as_ref()?;
        match self.mode {
            PairMode::Cancel(kind) if late.kind == kind => {}
            PairMode::Recompose if late.kind.is_t_type() => {}
            _ => return None,
        }
        let mut preds = self.prev[end].iter();
        let start = (*preds.next()?)?;
        if !preds.all(|&p| p == Some(start)) {
            return None;
        }
        let early = self.ops[start].as_ref().expect("linked op is live");
        if early.kind != late.kind
            || early.qubits != late.qubits
            || early.polarities != late.polarities
        {
            return None;
        }
        if let Some(f) = self.required_flag {
            if !early.flags.contains(&f) || !late.flags.contains(&f) {
                return None;
            }
        }
        Some(start)
    }

    /// Apply the next rewrite in order, reporting removed gates and moved
    /// flag labels, or None once no pair remains.
    fn next_rewrite(&mut self) -> Option<(BTreeMap<GateKind, usize>, usize)> {
        while let Some(end) = self.pending.pop_first() {
            if self.ops[end].is_none() {
                continue;
            }
            let Some(start) = self.pair_start(end) else {
                continue;
            };
            return Some(match self.mode {
                PairMode::Cancel(_) => self.cancel(start, end),
                PairMode::Recompose => self.recompose(start, end),
            });
        }
        None
    }

    fn cancel(&mut self, start: usize, end: usize) -> (BTreeMap<GateKind, usize>, usize) {
        let kind = self.ops[start].as_ref().expect("live pair").kind;
        let mut union = self.ops[start].as_ref().expect("live pair").flags.clone();
        union.extend(self.ops[end].as_ref().expect("live pair").flags.iter().copied());
        // Flag receivers: nearest survivor on any pair wire, one per side.
        let earlier = self.prev[start].iter().flatten().copied().max();
        let later = self.next[end].iter().flatten().copied().min();
        let follow: Vec<usize> = self.next[end].iter().flatten().copied().collect();
        self.unlink(end);
        self.unlink(start);
        // Gates just behind the hole gained new predecessors.
        self.pending.extend(follow);
        let mut moved = 0;
        if !union.is_empty() {
            for receiver in [earlier, later].into_iter().flatten() {
                let op = self.ops[receiver].as_mut().expect("receiver is live");
                op.flags.extend(union.iter().copied());
                moved += union.len();
                // New flags can turn the receiver or its successors into a
                // rewritable pair under a flag restriction.
                self.pending.insert(receiver);
                let succ: Vec<usize> =
                    self.next[receiver].iter().flatten().copied().collect();
                self.pending.extend(succ);
            }
        }
        (BTreeMap::from([(kind, 2)]), moved)
    }

    fn recompose(&mut self, start: usize, end: usize) -> (BTreeMap<GateKind, usize>, usize) {
        let late = self.ops[end].as_ref().expect("live pair");
        let kind = late.kind;
        let q = late.qubits[0];
        let mut union = late.flags.clone();
        let follow: Vec<usize> = self.next[end].iter().flatten().copied().collect();
        self.unlink(end);
        let early = self.ops[start].as_mut().expect("live pair");
        union.extend(early.flags.iter().copied());
        let mut merged = if kind == GateKind::T {
            Operation::s(q)
        } else {
            Operation::sdag(q)
        };
        merged.flags = union;
        *early = merged;
        self.pending.extend(follow);
        (BTreeMap::from([(kind, 2)]), 0)
    }

    /// Drop op `i` and stitch its wire neighbors together.
    fn unlink(&mut self, i: usize) {
        let op = self.ops[i].take().expect("op already removed");
        for (k, &q) in op.qubits.iter().enumerate() {
            let p = self.prev[i][k];
            let n = self.next[i][k];
            if let Some(p) = p {
                let ps = slot(self.ops[p].as_ref().expect("live neighbor"), q);
                self.next[p][ps] = n;
            }
            if let Some(n) = n {
                let ns = slot(self.ops[n].as_ref().expect("live neighbor"), q);
                self.prev[n][ns] = p;
            }
        }
    }

    fn survivors(&self) -> impl Iterator<Item = Operation> + '_ {
        self.ops.iter().flatten().cloned()
    }
}

fn step_pair_pass(mode: PairMode, flag: Option<u32>, circuit: &Circuit) -> Option<RewriteStep> {
    let mut engine = PairEngine::new(circuit, mode, flag);
    let (removed, flags_transferred) = engine.next_rewrite()?;
    Some(RewriteStep {
        circuit: rebuild(circuit, engine.survivors()),
        removed,
        flags_transferred,
    })
}

fn run_pair_pass(
    name: &str,
    mode: PairMode,
    flag: Option<u32>,
    circuit: &Circuit,
) -> (Circuit, RewriteReport) {
    let mut engine = PairEngine::new(circuit, mode, flag);
    let mut rewrites = 0usize;
    let mut gates_removed = BTreeMap::new();
    let mut flags_transferred = 0usize;
    while let Some((removed, moved)) = engine.next_rewrite() {
        merge_counts(&mut gates_removed, &removed);
        flags_transferred += moved;
        rewrites += 1;
    }
    let out = if rewrites == 0 {
        circuit.clone()
    } else {
        rebuild(circuit, engine.survivors()).repacked()
    };
    (
        out,
        RewriteReport {
            pass_name: name.to_string(),
            rewrites_applied: rewrites,
            gates_removed,
            flags_transferred,
            iterations: rewrites + 1,
        },
    )
}

/// Cancels wire-adjacent identical pairs of one self-inverse gate kind.
///
/// Adjacency is wire-wise: the pair must be each other's direct neighbor on
/// every wire they act on, regardless of how moments are packed. With a flag
/// restriction, both gates must carry the flag. Either way the union of the
/// pair's flags moves to the nearest surviving gate before and after the
/// pair, marking the neighborhood the cancellation disturbed.
#[derive(Debug)]
pub struct CancelPass {
    kind: GateKind,
    pass_name: &'static str,
    flag: Option<u32>,
}

impl CancelPass {
    /// Pair cancellation for CNOTs with identical control and target.
    pub fn cnot(flagged_only: bool, flag: Option<u32>) -> Result<Self, OptimizeError> {
        Self::new(GateKind::Cnot, "cancel-cnot", flagged_only, flag)
    }

    /// Pair cancellation for same-qubit Hadamards.
    pub fn hadamard(flagged_only: bool, flag: Option<u32>) -> Result<Self, OptimizeError> {
        Self::new(GateKind::H, "cancel-h", flagged_only, flag)
    }

    fn new(
        kind: GateKind,
        pass_name: &'static str,
        flagged_only: bool,
        flag: Option<u32>,
    ) -> Result<Self, OptimizeError> {
        if flagged_only && flag.is_none() {
            return Err(OptimizeError::FlagRequired(pass_name.to_string()));
        }
        Ok(CancelPass {
            kind,
            pass_name,
            // Without the restriction any given flag is irrelevant.
            flag: if flagged_only { flag } else { None },
        })
    }
}

impl OptimizerPass for CancelPass {
    fn name(&self) -> &str {
        self.pass_name
    }

    fn step(
        &self,
        circuit: &Circuit,
        _index: usize,
    ) -> Result<Option<RewriteStep>, OptimizeError> {
        Ok(step_pair_pass(PairMode::Cancel(self.kind), self.flag, circuit))
    }

    fn run(&self, circuit: &Circuit) -> Result<(Circuit, RewriteReport), OptimizeError> {
        Ok(run_pair_pass(
            self.pass_name,
            PairMode::Cancel(self.kind),
            self.flag,
            circuit,
        ))
    }
}

/// Merges wire-adjacent T;T into S and TDag;TDag into SDag. The merged gate
/// keeps the union of the pair's flags; nothing moves to neighbors.
#[derive(Debug)]
pub struct RecomposePass {
    flag: Option<u32>,
}

impl RecomposePass {
    pub fn new(flagged_only: bool, flag: Option<u32>) -> Result<Self, OptimizeError> {
        if flagged_only && flag.is_none() {
            return Err(OptimizeError::FlagRequired("recompose-s".to_string()));
        }
        Ok(RecomposePass {
            flag: if flagged_only { flag } else { None },
        })
    }
}

impl OptimizerPass for RecomposePass {
    fn name(&self) -> &str {
        "recompose-s"
    }

    fn step(
        &self,
        circuit: &Circuit,
        _index: usize,
    ) -> Result<Option<RewriteStep>, OptimizeError> {
        Ok(step_pair_pass(PairMode::Recompose, self.flag, circuit))
    }

    fn run(&self, circuit: &Circuit) -> Result<(Circuit, RewriteReport), OptimizeError> {
        Ok(run_pair_pass(
            "recompose-s",
            PairMode::Recompose,
            self.flag,
            circuit,
        ))
    }
}

/// True when `op`, known to act on qubit `q`, commutes with a T gate on `q`.
///
/// The table is closed: T passes a CNOT control, CZ on either wire, and
/// same-qubit phase gates. Anything else, notably H, X, CNOT targets, and
/// every multi-control gate, is treated as blocking.
fn commutes_with_t(op: &Operation, q: usize) -> bool {
    match op.kind {
        GateKind::Cnot => op.qubits[0] == q,
        GateKind::Cz => true,
        GateKind::S | GateKind::SDag | GateKind::T | GateKind::TDag => true,
        _ => false,
    }
}

/// Moves each T and TDag as far toward the circuit start as the commutation
/// table allows. One step moves one gate all the way to its final position.
/// A gate never hops over another T-type gate, so phase-gate order per wire
/// is stable and the pass terminates.
#[derive(Debug, Default)]
pub struct CommutePass;

impl OptimizerPass for CommutePass {
    fn name(&self) -> &str {
        "commute-t-start"
    }

    fn step(
        &self,
        circuit: &Circuit,
        _index: usize,
    ) -> Result<Option<RewriteStep>, OptimizeError> {
        let ops: Vec<Operation> = circuit.operations().cloned().collect();
        let mut mv = None;
        'scan: for (i, op) in ops.iter().enumerate() {
            if !op.kind.is_t_type() {
                continue;
            }
            let q = op.qubits[0];
            let mut dest = 0;
            let mut passed = 0usize;
            for k in (0..i).rev() {
                let ahead = &ops[k];
                if !ahead.qubits.contains(&q) {
                    continue;
                }
                if ahead.kind.is_t_type() || !commutes_with_t(ahead, q) {
                    dest = k + 1;
                    break;
                }
                passed += 1;
            }
            if passed > 0 {
                mv = Some((i, dest));
                break 'scan;
            }
        }
        let Some((i, dest)) = mv else { return Ok(None) };
        let mut reordered = ops;
        let gate = reordered.remove(i);
        reordered.insert(dest, gate);
        Ok(Some(RewriteStep {
            circuit: rebuild(circuit, reordered),
            removed: BTreeMap::new(),
            flags_transferred: 0,
        }))
    }
}

/// Deletes the first T-type gate per step. Deliberately unsound; exists so
/// invariant monitoring has a realistic defect to catch in tests and demos.
#[derive(Debug, Default)]
pub struct DropTPass;

impl OptimizerPass for DropTPass {
    fn name(&self) -> &str {
        "drop-t"
    }

    fn step(
        &self,
        circuit: &Circuit,
        _index: usize,
    ) -> Result<Option<RewriteStep>, OptimizeError> {
        let mut ops: Vec<Operation> = circuit.operations().cloned().collect();
        let Some(pos) = ops.iter().position(|op| op.kind.is_t_type()) else {
            return Ok(None);
        };
        let gone = ops.remove(pos);
        Ok(Some(RewriteStep {
            circuit: rebuild(circuit, ops),
            removed: BTreeMap::from([(gone.kind, 1)]),
            flags_transferred: 0,
        }))
    }
}

/// A pass wrapped so every rewrite is audited against a set of invariants.
pub struct InvariantChecked<P> {
    inner: P,
    invariants: Vec<InvariantSpec>,
}

/// Wrap `pass` so each invariant is measured around every individual rewrite
/// and any change aborts the run with the 1-based rewrite index and both
/// values. On success the wrapped pass behaves exactly as the inner pass.
///
/// Panics if `invariants` is empty; checking nothing is a configuration bug.
pub fn with_invariants<P: OptimizerPass>(
    pass: P,
    invariants: Vec<InvariantSpec>,
) -> InvariantChecked<P> {
    assert!(!invariants.is_empty(), "invariant list must not be empty");
    InvariantChecked {
        inner: pass,
        invariants,
    }
}

impl<P: OptimizerPass> OptimizerPass for InvariantChecked<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn step(
        &self,
        circuit: &Circuit,
        index: usize,
    ) -> Result<Option<RewriteStep>, OptimizeError> {
        let Some(step) = self.inner.step(circuit, index)? else {
            return Ok(None);
        };
        for spec in &self.invariants {
            let before = spec.measure(circuit);
            let after = spec.measure(&step.circuit);
            if after != before {
                return Err(OptimizeError::InvariantViolated {
                    name: spec.name().to_string(),
                    step: index + 1,
                    before,
                    after,
                });
            }
        }
        Ok(Some(step))
    }
}

/// Cancel wire-adjacent identical CNOT pairs to a fixed point.
///
/// With `flagged_only`, only pairs where both gates carry `flag` cancel.
/// Every cancellation hands the union of the pair's flags to the nearest
/// surviving operation on either side of the hole (skipping a side that has
/// none), so later flagged passes can follow the trail of changes.
pub fn cancel_cnot(
    circuit: &Circuit,
    flagged_only: bool,
    flag: Option<u32>,
) -> Result<(Circuit, RewriteReport), OptimizeError> {
    CancelPass::cnot(flagged_only, flag)?.run(circuit)
}

/// Cancel wire-adjacent same-qubit Hadamard pairs; see [`cancel_cnot`].
pub fn cancel_hadamard(
    circuit: &Circuit,
    flagged_only: bool,
    flag: Option<u32>,
) -> Result<(Circuit, RewriteReport), OptimizeError> {
    CancelPass::hadamard(flagged_only, flag)?.run(circuit)
}

/// Merge wire-adjacent T;T pairs into S (and TDag;TDag into SDag) to a fixed
/// point, following the same flag restriction contract as [`cancel_cnot`].
pub fn recompose_tt_to_s(
    circuit: &Circuit,
    flagged_only: bool,
    flag: Option<u32>,
) -> Result<(Circuit, RewriteReport), OptimizeError> {
    RecomposePass::new(flagged_only, flag)?.run(circuit)
}

/// Commute every T and TDag as far toward the circuit start as possible.
/// The gate multiset is untouched; only placement changes.
pub fn commute_t_to_start(circuit: &Circuit) -> (Circuit, RewriteReport) {
    CommutePass
        .run(circuit)
        .expect("commutation has no failure modes")
}
