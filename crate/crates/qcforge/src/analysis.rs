//! Resource metrics and the per-moment T-gate distribution.
//!
//! All depth-like quantities are computed on the canonical repack
//! ([`Circuit::repacked`]), so they are functions of the wire-wise gate
//! order rather than of how a circuit happened to be constructed. Toffoli
//! and MPMCT gates count toward depth and gate totals but contribute
//! nothing to the T metrics; T-count is a Clifford+T-level quantity that
//! becomes meaningful after transpilation.

use std::fmt;

use crate::ir::{Circuit, GateKind};

/// Flat resource snapshot. `t_depth` counts moments containing at least
/// one T or T†.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Metrics {
    pub qubit_count: usize,
    pub gate_count: usize,
    pub depth: usize,
    pub t_depth: usize,
    pub t_count: usize,
    pub h_count: usize,
    pub cnot_count: usize,
    pub toffoli_count: usize,
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "qubits={} gates={} depth={} t_depth={} t={} h={} cnot={} toffoli={}",
            self.qubit_count,
            self.gate_count,
            self.depth,
            self.t_depth,
            self.t_count,
            self.h_count,
            self.cnot_count,
            self.toffoli_count
        )
    }
}

/// Signed per-field difference of two snapshots (after minus before).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricsDiff {
    pub qubit_count: i64,
    pub gate_count: i64,
    pub depth: i64,
    pub t_depth: i64,
    pub t_count: i64,
    pub h_count: i64,
    pub cnot_count: i64,
    pub toffoli_count: i64,
}

impl fmt::Display for MetricsDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "qubits={:+} gates={:+} depth={:+} t_depth={:+} t={:+} h={:+} cnot={:+} toffoli={:+}",
            self.qubit_count,
            self.gate_count,
            self.depth,
            self.t_depth,
            self.t_count,
            self.h_count,
            self.cnot_count,
            self.toffoli_count
        )
    }
}

/// T/T† count per canonical moment; length equals the canonical depth and
/// the entries sum to the T-count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TDistribution {
    pub per_moment: Vec<usize>,
}

impl TDistribution {
    pub fn total(&self) -> usize {
        self.per_moment.iter().sum()
    }
}

/// Compute the resource snapshot of a circuit.
pub fn metrics(circuit: &Circuit) -> Metrics {
    let packed = circuit.repacked();
    let mut m = Metrics {
        qubit_count: circuit.qubit_count(),
        depth: packed.moment_count(),
        ..Metrics::default()
    };
    for moment in packed.moments() {
        let mut t_here = false;
        for op in &moment.operations {
            m.gate_count += 1;
            match op.kind {
                GateKind::T | GateKind::TDag => {
                    m.t_count += 1;
                    t_here = true;
                }
                GateKind::H => m.h_count += 1,
                GateKind::Cnot => m.cnot_count += 1,
                GateKind::Toffoli => m.toffoli_count += 1,
                _ => {}
            }
        }
        if t_here {
            m.t_depth += 1;
        }
    }
    m
}

/// Per-moment T counts on the canonical repack.
pub fn t_distribution(circuit: &Circuit) -> TDistribution {
    let packed = circuit.repacked();
    let per_moment = packed
        .moments()
        .iter()
        .map(|moment| {
            moment
                .operations
                .iter()
                .filter(|op| op.kind.is_t_type())
                .count()
        })
        .collect();
    TDistribution { per_moment }
}

/// Elementwise `after - before`.
pub fn diff_metrics(before: &Metrics, after: &Metrics) -> MetricsDiff {
    let d = |b: usize, a: usize| a as i64 - b as i64;
    MetricsDiff {
        qubit_count: d(before.qubit_count, after.qubit_count),
        gate_count: d(before.gate_count, after.gate_count),
        depth: d(before.depth, after.depth),
        t_depth: d(before.t_depth, after.t_depth),
        t_count: d(before.t_count, after.t_count),
        h_count: d(before.h_count, after.h_count),
        cnot_count: d(before.cnot_count, after.cnot_count),
        toffoli_count: d(before.toffoli_count, after.toffoli_count),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Operation, SchedulePolicy};

    #[test]
    fn empty_circuit_has_zero_counts() {
        let m = metrics(&Circuit::build(["q0"]).unwrap());
        assert_eq!(m.qubit_count, 1);
        assert_eq!(
            (m.gate_count, m.depth, m.t_depth, m.t_count, m.h_count, m.cnot_count),
            (0, 0, 0, 0, 0, 0)
        );
    }

    #[test]
    fn counts_on_a_mixed_circuit() {
        let c = Circuit::build(["q0", "q1", "q2"])
            .unwrap()
            .append_all(
                [
                    Operation::h(0),
                    Operation::t(0),
                    Operation::t(1),
                    Operation::cnot(0, 1),
                    Operation::toffoli(0, 1, 2),
                ],
                SchedulePolicy::Earliest,
            )
            .unwrap();
        let m = metrics(&c);
        assert_eq!(m.gate_count, 5);
        assert_eq!(m.t_count, 2);
        assert_eq!(m.h_count, 1);
        assert_eq!(m.cnot_count, 1);
        assert_eq!(m.toffoli_count, 1);
        assert_eq!(m.depth, 4);
        // canonical repack pulls the slack T(q1) next to H(q0)
        assert_eq!(m.t_depth, 2);
        assert!(m.t_depth <= m.depth);
    }

    #[test]
    fn metrics_ignore_construction_history() {
        let ops = [
            Operation::h(0),
            Operation::cnot(0, 1),
            Operation::t(1),
            Operation::t(0),
        ];
        let packed = Circuit::build(["q0", "q1"])
            .unwrap()
            .append_all(ops.clone(), SchedulePolicy::Earliest)
            .unwrap();
        let sparse = Circuit::build(["q0", "q1"])
            .unwrap()
            .append_all(ops, SchedulePolicy::NewMoment)
            .unwrap();
        assert_eq!(metrics(&packed), metrics(&sparse));
        assert_eq!(t_distribution(&packed), t_distribution(&sparse));
    }

    #[test]
    fn t_distribution_tracks_layers() {
        let c = Circuit::build(["q0"])
            .unwrap()
            .append_all(
                [Operation::t(0), Operation::h(0), Operation::t(0)],
                SchedulePolicy::Earliest,
            )
            .unwrap();
        let dist = t_distribution(&c);
        assert_eq!(dist.per_moment, vec![1, 0, 1]);
        assert_eq!(dist.total(), metrics(&c).t_count);
    }

    #[test]
    fn t_free_circuit_has_zero_distribution() {
        let c = Circuit::build(["q0", "q1"])
            .unwrap()
            .append_all(
                [Operation::h(0), Operation::cnot(0, 1)],
                SchedulePolicy::Earliest,
            )
            .unwrap();
        let dist = t_distribution(&c);
        assert_eq!(dist.per_moment.len(), metrics(&c).depth);
        assert!(dist.per_moment.iter().all(|&n| n == 0));
    }

    #[test]
    fn diff_is_elementwise_after_minus_before() {
        let a = Metrics {
            cnot_count: 18,
            h_count: 3,
            t_count: 7,
            ..Metrics::default()
        };
        let b = Metrics {
            cnot_count: 14,
            h_count: 1,
            t_count: 7,
            ..Metrics::default()
        };
        let d = diff_metrics(&a, &b);
        assert_eq!(d.cnot_count, -4);
        assert_eq!(d.h_count, -2);
        assert_eq!(d.t_count, 0);
        assert_eq!(diff_metrics(&a, &a), MetricsDiff::default());
    }

    #[test]
    fn display_is_flat_key_value() {
        let c = Circuit::build(["q0", "q1"])
            .unwrap()
            .append_all(
                [Operation::h(0), Operation::t(0)],
                SchedulePolicy::Earliest,
            )
            .unwrap();
        assert_eq!(
            metrics(&c).to_string(),
            "qubits=2 gates=2 depth=2 t_depth=1 t=1 h=1 cnot=0 toffoli=0"
        );
    }
}
