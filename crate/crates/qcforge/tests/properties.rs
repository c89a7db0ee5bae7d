//! Property tests over randomized circuits: structural laws (repacking,
//! serialization) and semantic laws (passes preserve the unitary, checks
//! are reflexive). Unitary-building properties keep the register small and
//! the case count modest; the wide sweeps live in the acceptance suite.

use proptest::prelude::*;

use qcforge::analysis::{metrics, t_distribution};
use qcforge::format::{parse, serialize};
use qcforge::ir::{Circuit, Operation, SchedulePolicy};
use qcforge::optimize::{
    cancel_cnot, cancel_hadamard, commute_t_to_start, recompose_tt_to_s,
};
use qcforge::verify::equivalent;

fn op_strategy(qubits: usize) -> impl Strategy<Value = Operation> {
    (0usize..9, 0..qubits, 1..qubits.max(2), 1..qubits.max(2)).prop_map(
        move |(kind, a, db, dc)| {
            let b = (a + db) % qubits;
            match kind {
                0 => Operation::x(a),
                1 => Operation::h(a),
                2 => Operation::s(a),
                3 => Operation::sdag(a),
                4 => Operation::t(a),
                5 => Operation::tdag(a),
                6 if qubits >= 2 => Operation::cnot(a, b),
                7 if qubits >= 2 => Operation::cz(a, b),
                8 if qubits >= 3 => {
                    let mut c = (b + dc) % qubits;
                    while c == a || c == b {
                        c = (c + 1) % qubits;
                    }
                    Operation::toffoli(a, b, c)
                }
                _ => Operation::t(a),
            }
        },
    )
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (1usize..=6).prop_flat_map(|qubits| {
        prop::collection::vec(op_strategy(qubits), 0..32).prop_map(move |ops| {
            Circuit::build((0..qubits).map(|i| format!("q{i}")))
                .expect("fresh names are valid")
                .append_all(ops, SchedulePolicy::default())
                .expect("generated operands are in range")
        })
    })
}

proptest! {
    #[test]
    fn repack_is_idempotent(circuit in circuit_strategy()) {
        let once = circuit.repacked();
        prop_assert_eq!(once.repacked(), once);
    }

    #[test]
    fn repack_preserves_metrics(circuit in circuit_strategy()) {
        prop_assert_eq!(metrics(&circuit), metrics(&circuit.repacked()));
    }

    // The serializer orders commuting gates within a moment by wire, so one
    // round trip canonicalizes and everything after that is an identity.
    #[test]
    fn serialize_then_parse_reaches_a_fixpoint(circuit in circuit_strategy()) {
        let text = serialize(&circuit);
        let back = parse(&text).expect("serializer output parses");
        prop_assert_eq!(metrics(&back), metrics(&circuit));
        prop_assert_eq!(serialize(&back), text);
        prop_assert_eq!(parse(&serialize(&back)).expect("stable text parses"), back);
    }

    #[test]
    fn t_distribution_totals_the_t_count(circuit in circuit_strategy()) {
        prop_assert_eq!(t_distribution(&circuit).total(), metrics(&circuit).t_count);
    }

    #[test]
    fn cancellation_reaches_a_fixpoint(circuit in circuit_strategy()) {
        for pass in [cancel_cnot, cancel_hadamard, recompose_tt_to_s] {
            let (optimized, _) = pass(&circuit, false, None).expect("unflagged run");
            let (again, report) = pass(&optimized, false, None).expect("unflagged rerun");
            prop_assert_eq!(report.rewrites_applied, 0);
            prop_assert_eq!(again, optimized);
        }
    }

    #[test]
    fn commute_pass_moves_no_mass(circuit in circuit_strategy()) {
        let (moved, _) = commute_t_to_start(&circuit);
        prop_assert_eq!(metrics(&moved).t_count, metrics(&circuit).t_count);
        prop_assert_eq!(metrics(&moved).gate_count, metrics(&circuit).gate_count);
    }
}

proptest! {
    // Unitary comparisons cost 4^qubits per case; fewer cases suffice.
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equivalence_is_reflexive(circuit in circuit_strategy()) {
        let eq = equivalent(&circuit, &circuit, 1e-12, 8).expect("small register");
        prop_assert!(eq.equivalent);
        prop_assert_eq!(eq.max_deviation, 0.0);
    }

    #[test]
    fn repack_preserves_the_unitary(circuit in circuit_strategy()) {
        let eq = equivalent(&circuit, &circuit.repacked(), 1e-12, 8).expect("small register");
        prop_assert!(eq.equivalent, "deviation {:.3e}", eq.max_deviation);
    }

    #[test]
    fn every_pass_preserves_the_unitary(circuit in circuit_strategy()) {
        let mut outputs = vec![
            cancel_cnot(&circuit, false, None).expect("unflagged run").0,
            cancel_hadamard(&circuit, false, None).expect("unflagged run").0,
            recompose_tt_to_s(&circuit, false, None).expect("unflagged run").0,
        ];
        outputs.push(commute_t_to_start(&circuit).0);
        for output in outputs {
            let eq = equivalent(&circuit, &output, 1e-9, 8).expect("small register");
            prop_assert!(eq.equivalent, "deviation {:.3e}", eq.max_deviation);
        }
    }
}
