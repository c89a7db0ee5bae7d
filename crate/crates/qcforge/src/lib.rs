//! qcforge is a toolkit for quantitative resource analysis of Clifford+T
//! quantum circuits. It covers the full workflow: synthesis of benchmark
//! circuits (bucket-brigade QRAM, ripple-carry adders), transpilation of
//! Toffoli and mixed-polarity multi-controlled gates into Clifford+T,
//! flag-driven peephole optimization with invariant monitoring, resource
//! metrics (depth, T-depth, per-kind gate counts, T distribution), and
//! exhaustive functional verification by dense simulation and truth tables.
//!
//! The pieces compose as a pipeline: every step consumes and produces the
//! same moment-based [`ir::Circuit`] value, so steps can be chained in any
//! order. The `qcforge` command line tool is a thin shell over this crate.
//!
//! # Example
//!
//! ```
//! use qcforge::ir::{Circuit, Operation, SchedulePolicy};
//! use qcforge::transpile::{decompose_toffoli, ControlOrder, TDEPTH1_4ANC};
//! use qcforge::analysis::metrics;
//!
//! let c = Circuit::build(["a0", "a1", "t"]).unwrap()
//!     .append(Operation::toffoli(0, 1, 2), SchedulePolicy::Earliest)
//!     .unwrap();
//! let lowered = decompose_toffoli(&c, TDEPTH1_4ANC, ControlOrder::default()).unwrap();
//! let m = metrics(&lowered);
//! assert_eq!((m.t_count, m.t_depth), (7, 1));
//! ```

pub mod analysis;
pub mod bench;
pub mod format;
pub mod ir;
pub mod optimize;
pub mod transpile;
pub mod verify;

pub use analysis::{diff_metrics, metrics, t_distribution, Metrics, MetricsDiff, TDistribution};
pub use bench::{
    run_bench, synth_adder, synth_bucket_brigade, write_csv, BenchError, BenchRecord,
    GuardConfig, QramSpec, Scenario,
};
pub use format::{parse, serialize, FormatError};
pub use ir::{Circuit, GateKind, GatePredicate, IrError, Moment, Operation, SchedulePolicy};
pub use optimize::{
    cancel_cnot, cancel_hadamard, commute_t_to_start, recompose_tt_to_s, with_invariants,
    CancelPass, CommutePass, DropTPass, InvariantChecked, InvariantSpec, OptimizeError,
    OptimizerPass, RecomposePass, RewriteReport, RewriteStep,
};
pub use transpile::{
    decompose_mpmct, decompose_toffoli, list_strategies, ControlOrder, StrategyInfo,
    TranspileError, NONE, TDEPTH1_4ANC, TDEPTH3_0ANC,
};
pub use verify::{
    classical_output, equivalent, equivalent_on_zero_ancillas, truth_table, unitary_of,
    Equivalence, TruthTable, Unitary, VerifyError, DEFAULT_SIM_LIMIT, DEFAULT_TOL,
};
