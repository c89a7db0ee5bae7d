//! Benchmark circuit synthesis and the timed scaling scenarios.
//!
//! The bucket-brigade QRAM over n address bits uses q = n + 2^{n+1} + 5
//! wires: an address register (n), a one-hot routing register (2^n), a
//! memory-coupling register (2^n), one readout wire, and 4 reserve wires
//! kept for layout stability. Classical memory contents are compiled in as
//! X placements on the coupling register. For every address a with all
//! other registers zero, the circuit leaves memory[a] on the readout wire
//! and restores routing and coupling to zero. Address wires are never
//! targets, so the address survives unchanged.
//!
//! The adder is the classic majority/unmajority ripple carry over registers
//! A, B and one borrowed-carry wire z: it computes B <- A + B mod 2^bits,
//! preserving A and restoring z.
//!
//! [`run_bench`] times three cumulative scenarios per n: synthesis only,
//! synthesis plus Toffoli decomposition, and synthesis plus decomposition
//! plus CNOT/H cancellation. The clock wraps the pipeline only; metrics and
//! CSV writing happen outside it, and everything runs on one thread so the
//! numbers mean something. Records serialize to CSV with the fixed header
//! `scenario,n,qubits,gates,cnot,h,t,t_depth,depth,elapsed_s`.

use std::fmt;
use std::io;
use std::ops::RangeInclusive;
use std::time::Instant;

use thiserror::Error;

use crate::analysis::{metrics, Metrics};
use crate::ir::{Circuit, Operation, SchedulePolicy};
use crate::optimize::{cancel_cnot, cancel_hadamard};
use crate::transpile::{decompose_toffoli, ControlOrder, TranspileError, NONE, TDEPTH1_4ANC};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("address register needs at least 2 bits, got {0}")]
    InvalidAddressSize(u32),
    #[error("memory holds {got} cells but n = {n} addresses {want}")]
    MemoryLengthMismatch { n: u32, want: usize, got: usize },
    #[error("scenario {scenario} is guarded at n <= {limit}, got n = {n}")]
    ResourceGuardExceeded {
        scenario: Scenario,
        limit: u32,
        n: u32,
    },
    #[error(transparent)]
    Transpile(#[from] TranspileError),
}

/// Bucket-brigade synthesis request: address width, classical contents, and
/// the Toffoli strategy to lower with (`NONE` keeps Toffolis).
#[derive(Debug, Clone)]
pub struct QramSpec {
    pub n: u32,
    pub memory: Vec<bool>,
    pub decomposition: String,
}

impl QramSpec {
    pub fn new(n: u32, memory: Vec<bool>) -> Self {
        QramSpec {
            n,
            memory,
            decomposition: NONE.to_string(),
        }
    }

    /// All-zero memory of the right length, handy for sizing checks.
    pub fn zeroed(n: u32) -> Self {
        Self::new(n, vec![false; 1usize << n])
    }

    pub fn with_decomposition(mut self, strategy: impl Into<String>) -> Self {
        self.decomposition = strategy.into();
        self
    }
}

/// Wire count of the bucket-brigade layout before any decomposition.
pub fn bucket_brigade_qubits(n: u32) -> usize {
    n as usize + (1usize << (n + 1)) + 5
}

/// Synthesize the bucket-brigade QRAM for `spec`.
///
/// The routing register works as a one-hot tree: seeding route0, then per
/// address bit fanning the active cell out over a doubling span, selects
/// exactly the cell matching the address. One Toffoli per cell copies the
/// addressed memory bit to the readout wire, and the mirrored fan-in
/// restores routing. Toffoli count is 3 * 2^n - 2.
pub fn synth_bucket_brigade(spec: &QramSpec) -> Result<Circuit, BenchError> {
    if spec.n < 2 {
        return Err(BenchError::InvalidAddressSize(spec.n));
    }
    let n = spec.n as usize;
    let cells = 1usize << n;
    if spec.memory.len() != cells {
        return Err(BenchError::MemoryLengthMismatch {
            n: spec.n,
            want: cells,
            got: spec.memory.len(),
        });
    }

    let mut names: Vec<String> = (0..n).map(|i| format!("addr{i}")).collect();
    names.extend((0..cells).map(|j| format!("route{j}")));
    names.extend((0..cells).map(|j| format!("mem{j}")));
    names.push("out".to_string());
    names.extend((0..4).map(|k| format!("aux{k}")));

    let route = |j: usize| n + j;
    let mem = |j: usize| n + cells + j;
    let out = n + 2 * cells;

    let mut ops = vec![Operation::x(route(0))];
    // Fan out: address qubit 0 is the most significant bit.
    for i in 0..n {
        let bit = n - 1 - i;
        let span = 1usize << i;
        for j in 0..span {
            ops.push(Operation::toffoli(bit, route(j), route(span + j)));
            ops.push(Operation::cnot(route(span + j), route(j)));
        }
    }
    let loads = |ops: &mut Vec<Operation>| {
        for (j, &cell) in spec.memory.iter().enumerate() {
            if cell {
                ops.push(Operation::x(mem(j)));
            }
        }
    };
    loads(&mut ops);
    for j in 0..cells {
        ops.push(Operation::toffoli(route(j), mem(j), out));
    }
    loads(&mut ops);
    // Fan in: the exact reverse of the fan-out.
    for i in (0..n).rev() {
        let bit = n - 1 - i;
        let span = 1usize << i;
        for j in (0..span).rev() {
            ops.push(Operation::cnot(route(span + j), route(j)));
            ops.push(Operation::toffoli(bit, route(j), route(span + j)));
        }
    }
    ops.push(Operation::x(route(0)));

    let circuit = Circuit::build(names)
        .expect("generated wire names are unique")
        .append_all(ops, SchedulePolicy::Earliest)
        .expect("generated gates stay in range");
    if spec.decomposition == NONE {
        return Ok(circuit);
    }
    Ok(decompose_toffoli(
        &circuit,
        &spec.decomposition,
        ControlOrder::default(),
    )?)
}

/// Toffoli+CNOT ripple-carry adder: B <- A + B mod 2^bits, A preserved,
/// carry wire z restored. Wire a0/b0 hold the least significant bits.
pub fn synth_adder(bits: u32) -> Circuit {
    assert!(bits >= 1, "adder needs at least one bit");
    let b = bits as usize;
    let mut names: Vec<String> = (0..b).map(|i| format!("a{i}")).collect();
    names.extend((0..b).map(|i| format!("b{i}")));
    names.push("z".to_string());
    let bq = |i: usize| b + i;
    // The carry rides on z, then on a0..a{b-2}; majority/unmajority pairs
    // restore every one of them.
    let carry = |i: usize| if i == 0 { 2 * b } else { i - 1 };

    let mut ops = Vec::with_capacity(6 * b);
    for i in 0..b {
        ops.push(Operation::cnot(i, bq(i)));
        ops.push(Operation::cnot(i, carry(i)));
        ops.push(Operation::toffoli(carry(i), bq(i), i));
    }
    for i in (0..b).rev() {
        ops.push(Operation::toffoli(carry(i), bq(i), i));
        ops.push(Operation::cnot(i, carry(i)));
        ops.push(Operation::cnot(carry(i), bq(i)));
    }
    Circuit::build(names)
        .expect("generated wire names are unique")
        .append_all(ops, SchedulePolicy::Earliest)
        .expect("generated gates stay in range")
}

/// The timed pipeline variants. Each scenario includes the previous one's
/// work: transpilation lowers Toffolis with TDEPTH1_4ANC, optimization then
/// cancels CNOT and H pairs to a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Synth,
    SynthTranspile,
    SynthOpt,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::Synth,
        Scenario::SynthTranspile,
        Scenario::SynthOpt,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Scenario::Synth => "synth",
            Scenario::SynthTranspile => "synth-transpile",
            Scenario::SynthOpt => "synth-opt",
        }
    }

    pub fn from_token(token: &str) -> Option<Scenario> {
        Self::ALL.into_iter().find(|s| s.token() == token)
    }

    /// Default cap on n; decomposition blows up the wire count, so the
    /// lowering scenarios stop earlier.
    pub fn default_guard(self) -> u32 {
        match self {
            Scenario::Synth => 19,
            Scenario::SynthTranspile | Scenario::SynthOpt => 12,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Resource guard for [`run_bench`]; `force` skips the per-scenario cap.
#[derive(Debug, Clone, Copy, Default)]
pub struct GuardConfig {
    pub force: bool,
}

impl GuardConfig {
    pub fn check(self, scenario: Scenario, n: u32) -> Result<(), BenchError> {
        let limit = scenario.default_guard();
        if !self.force && n > limit {
            return Err(BenchError::ResourceGuardExceeded { scenario, limit, n });
        }
        Ok(())
    }
}

/// One benchmark measurement. `qubits` is the formula wire count of the
/// synthesized QRAM before decomposition; the metrics snapshot describes
/// the final circuit of the scenario pipeline.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub scenario: Scenario,
    pub n: u32,
    pub qubits: usize,
    pub metrics: Metrics,
    pub elapsed_s: f64,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "scenario,n,qubits,gates,cnot,h,t,t_depth,depth,elapsed_s";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6}",
            self.scenario.token(),
            self.n,
            self.qubits,
            self.metrics.gate_count,
            self.metrics.cnot_count,
            self.metrics.h_count,
            self.metrics.t_count,
            self.metrics.t_depth,
            self.metrics.depth,
            self.elapsed_s,
        )
    }
}

/// Run `scenario` once per n in the inclusive range, sequentially on the
/// calling thread. The guard is checked for the whole range up front so a
/// rejected run does no work. Bench memory contents are the fixed pattern
/// 1010... to keep runs deterministic while exercising the load gates.
pub fn run_bench(
    scenario: Scenario,
    n_range: RangeInclusive<u32>,
    guard: GuardConfig,
) -> Result<Vec<BenchRecord>, BenchError> {
    guard.check(scenario, (*n_range.start()).max(*n_range.end()))?;
    let mut records = Vec::new();
    for n in n_range {
        let cells = 1usize << n;
        let memory: Vec<bool> = (0..cells).map(|j| j % 2 == 0).collect();
        let mut spec = QramSpec::new(n, memory);
        if scenario != Scenario::Synth {
            spec = spec.with_decomposition(TDEPTH1_4ANC);
        }

        let clock = Instant::now();
        let mut circuit = synth_bucket_brigade(&spec)?;
        if scenario == Scenario::SynthOpt {
            circuit = cancel_cnot(&circuit, false, None)
                .expect("unflagged cancellation cannot fail")
                .0;
            circuit = cancel_hadamard(&circuit, false, None)
                .expect("unflagged cancellation cannot fail")
                .0;
        }
        let elapsed_s = clock.elapsed().as_secs_f64();

        records.push(BenchRecord {
            scenario,
            n,
            qubits: bucket_brigade_qubits(n),
            metrics: metrics(&circuit),
            elapsed_s,
        });
    }
    Ok(records)
}

/// Write the mandatory header and one row per record.
pub fn write_csv(records: &[BenchRecord], sink: &mut dyn io::Write) -> io::Result<()> {
    writeln!(sink, "{}", BenchRecord::CSV_HEADER)?;
    for record in records {
        writeln!(sink, "{}", record.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::classical_output;

    /// Pack per-wire bits into the simulator's input convention, where
    /// qubit 0 is the most significant bit of the index.
    fn wire_mask(q: usize, wires: &[(usize, bool)]) -> u64 {
        let mut input = 0u64;
        for &(w, set) in wires {
            if set {
                input |= 1u64 << (q - 1 - w);
            }
        }
        input
    }

    fn check_qram(n: u32, memory: &[bool]) {
        let spec = QramSpec::new(n, memory.to_vec());
        let c = synth_bucket_brigade(&spec).unwrap();
        let q = c.qubit_count();
        let nn = n as usize;
        let out_wire = nn + 2 * (1usize << n);
        for a in 0..memory.len() {
            let addr_bits: Vec<(usize, bool)> = (0..nn)
                .map(|i| (i, (a >> (nn - 1 - i)) & 1 == 1))
                .collect();
            let input = wire_mask(q, &addr_bits);
            let output = classical_output(&c, input).unwrap();
            let expected = input | wire_mask(q, &[(out_wire, memory[a])]);
            assert_eq!(
                output, expected,
                "address {a} of memory {memory:?} read back wrong"
            );
        }
    }

    #[test]
    fn wire_formula_holds_up_to_n9() {
        let expected = [15, 24, 41, 74, 139, 268, 525, 1038];
        for (n, &q) in (2..=9).zip(expected.iter()) {
            let c = synth_bucket_brigade(&QramSpec::zeroed(n)).unwrap();
            assert_eq!(c.qubit_count(), q);
            assert_eq!(bucket_brigade_qubits(n), q);
            let m = metrics(&c);
            assert_eq!(m.toffoli_count, 3 * (1usize << n) - 2);
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert_eq!(
            synth_bucket_brigade(&QramSpec::zeroed(1)).unwrap_err(),
            BenchError::InvalidAddressSize(1)
        );
        assert_eq!(
            synth_bucket_brigade(&QramSpec::new(2, vec![true; 3])).unwrap_err(),
            BenchError::MemoryLengthMismatch {
                n: 2,
                want: 4,
                got: 3
            }
        );
        let unknown = QramSpec::zeroed(2).with_decomposition("TDEPTH0");
        assert!(matches!(
            synth_bucket_brigade(&unknown).unwrap_err(),
            BenchError::Transpile(TranspileError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn qram_reads_every_address_n2() {
        check_qram(2, &[true, false, false, true]);
        check_qram(2, &[false, true, true, false]);
    }

    #[test]
    fn qram_reads_every_address_n3() {
        check_qram(3, &[true, false, true, true, false, false, true, false]);
        check_qram(3, &[false, true, false, false, true, true, false, true]);
    }

    #[test]
    fn adder_matches_classical_addition() {
        for bits in 1..=3u32 {
            let c = synth_adder(bits);
            let q = c.qubit_count();
            let b = bits as usize;
            let modulus = 1u64 << bits;
            for a in 0..modulus {
                for bv in 0..modulus {
                    let mut wires: Vec<(usize, bool)> =
                        (0..b).map(|i| (i, (a >> i) & 1 == 1)).collect();
                    wires.extend((0..b).map(|i| (b + i, (bv >> i) & 1 == 1)));
                    let input = wire_mask(q, &wires);
                    let output = classical_output(&c, input).unwrap();

                    let sum = (a + bv) % modulus;
                    let mut expect: Vec<(usize, bool)> =
                        (0..b).map(|i| (i, (a >> i) & 1 == 1)).collect();
                    expect.extend((0..b).map(|i| (b + i, (sum >> i) & 1 == 1)));
                    assert_eq!(
                        output,
                        wire_mask(q, &expect),
                        "{bits}-bit adder failed on A={a} B={bv}"
                    );
                }
            }
        }
    }

    #[test]
    fn optimization_never_increases_cnot_or_h() {
        for n in 2..=3 {
            let spec = QramSpec::zeroed(n).with_decomposition(TDEPTH1_4ANC);
            let lowered = synth_bucket_brigade(&spec).unwrap();
            let before = metrics(&lowered);
            let (c, _) = cancel_cnot(&lowered, false, None).unwrap();
            let (c, _) = cancel_hadamard(&c, false, None).unwrap();
            let after = metrics(&c);
            assert!(after.cnot_count <= before.cnot_count);
            assert!(after.h_count <= before.h_count);
            assert_eq!(after.t_count, before.t_count);
        }
    }

    #[test]
    fn scenarios_compose_synthesis_lowering_and_cancellation() {
        let guard = GuardConfig::default();
        let synth = run_bench(Scenario::Synth, 2..=2, guard).unwrap();
        let lowered = run_bench(Scenario::SynthTranspile, 2..=2, guard).unwrap();
        let opt = run_bench(Scenario::SynthOpt, 2..=2, guard).unwrap();

        assert_eq!(synth[0].metrics.toffoli_count, 10);
        assert_eq!(synth[0].metrics.t_count, 0);
        assert_eq!(lowered[0].metrics.toffoli_count, 0);
        assert_eq!(lowered[0].metrics.t_count, 70);
        assert_eq!(opt[0].metrics.t_count, 70);
        assert!(opt[0].metrics.cnot_count <= lowered[0].metrics.cnot_count);
        // The qubits column reports the formula wire count even after
        // decomposition added ancillae.
        assert_eq!(lowered[0].qubits, 15);
    }

    #[test]
    fn csv_output_matches_the_schema() {
        let records = run_bench(Scenario::Synth, 2..=3, GuardConfig::default()).unwrap();
        let mut sink = Vec::new();
        write_csv(&records, &mut sink).unwrap();
        let text = String::from_utf8(sink).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], BenchRecord::CSV_HEADER);
        for (line, n, q) in [(lines[1], "2", "15"), (lines[2], "3", "24")] {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 10);
            assert_eq!(cols[0], "synth");
            assert_eq!(cols[1], n);
            assert_eq!(cols[2], q);
            let (seconds, fraction) = cols[9].split_once('.').unwrap();
            assert!(seconds.chars().all(|c| c.is_ascii_digit()));
            assert_eq!(fraction.len(), 6);
        }
    }

    #[test]
    fn elapsed_time_grows_coarsely_with_n() {
        let records = run_bench(Scenario::Synth, 6..=9, GuardConfig::default()).unwrap();
        assert!(records.last().unwrap().elapsed_s >= records[0].elapsed_s);
    }

    #[test]
    fn guard_rejects_oversized_runs_unless_forced() {
        let err = run_bench(Scenario::SynthOpt, 2..=13, GuardConfig::default()).unwrap_err();
        assert_eq!(
            err,
            BenchError::ResourceGuardExceeded {
                scenario: Scenario::SynthOpt,
                limit: 12,
                n: 13
            }
        );
        assert!(GuardConfig { force: true }
            .check(Scenario::SynthOpt, 13)
            .is_ok());
        assert!(GuardConfig::default().check(Scenario::Synth, 19).is_ok());
    }

    #[test]
    fn scenario_tokens_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_token(s.token()), Some(s));
        }
        assert_eq!(Scenario::from_token("SYNTH"), None);
    }
}
