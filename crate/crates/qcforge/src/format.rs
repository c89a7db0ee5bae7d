//! Line-based text format for circuits, the CLI's interchange representation.
//!
//! ```text
//! # comment, blank lines ignored
//! qubits a0 a1 t          header, must precede all gates
//! TOFFOLI a0 a1 t         one gate per line, controls first, target last
//! ---                     forces a new moment (segment separator)
//! CNOT a0 t !1,3          trailing !labels attach flags
//! MPMCT +a0 -a1 t         MPMCT controls carry a polarity sign, default +
//! ```
//!
//! Gate tokens: `X` `H` `S` `SDAG` `T` `TDAG` `CNOT` `CZ` `TOFFOLI` `MPMCT`.
//! Within a segment gates pack under the Earliest rule; `---` separators are
//! authoritative, so fixtures can pin exact moment structure. Files use the
//! `.qc` extension, newline is LF.

use thiserror::Error;

use crate::ir::{Circuit, GateKind, IrError, Operation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown qubit {name:?}")]
    UnknownQubit { line: usize, name: String },
    #[error("line {line}: unknown gate {token:?}")]
    UnknownGate { line: usize, token: String },
    #[error("line {line}: gate lists the same qubit more than once")]
    DuplicateQubitInGate { line: usize },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Parse a circuit from its text form.
pub fn parse(text: &str) -> Result<Circuit, FormatError> {
    let mut names: Vec<String> = Vec::new();
    let mut circuit: Option<Circuit> = None;
    let mut floor = 0usize;
    let mut last_line = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0] == "qubits" {
            if circuit.is_some() {
                return Err(syntax(line, "qubit declaration after gate lines"));
            }
            if tokens.len() == 1 {
                return Err(syntax(line, "qubits line declares no qubits"));
            }
            names.extend(tokens[1..].iter().map(|s| s.to_string()));
            continue;
        }
        if tokens[0] == "---" {
            if tokens.len() > 1 {
                return Err(syntax(line, "trailing tokens after separator"));
            }
            if let Some(c) = &circuit {
                floor = c.moment_count();
            }
            // a leading separator before any gate is a no-op
            continue;
        }

        if circuit.is_none() {
            if names.is_empty() {
                return Err(syntax(line, "gate line before qubits declaration"));
            }
            circuit = Some(build_register(&names, line)?);
        }
        let c = circuit.as_mut().expect("initialized above");
        let op = parse_gate(&tokens, c, line)?;
        c.append_earliest_from(op, floor)
            .map_err(|e| map_ir_error(e, line))?;
    }

    match circuit {
        Some(c) => Ok(c),
        None if !names.is_empty() => build_register(&names, last_line),
        None => Err(syntax(last_line.max(1), "missing qubits declaration")),
    }
}

fn build_register(names: &[String], line: usize) -> Result<Circuit, FormatError> {
    Circuit::build(names.iter().map(|s| s.as_str())).map_err(|e| match e {
        IrError::DuplicateQubitName(n) => syntax(line, format!("duplicate qubit name {n:?}")),
        other => syntax(line, other.to_string()),
    })
}

fn map_ir_error(e: IrError, line: usize) -> FormatError {
    match e {
        IrError::DuplicateQubitInGate => FormatError::DuplicateQubitInGate { line },
        other => syntax(line, other.to_string()),
    }
}

fn parse_gate(tokens: &[&str], circuit: &Circuit, line: usize) -> Result<Operation, FormatError> {
    // split off a trailing !flag annotation
    let (tokens, flags) = match tokens.last() {
        Some(last) if last.starts_with('!') => {
            let mut flags = Vec::new();
            for part in last[1..].split(',') {
                let label: u32 = part
                    .parse()
                    .map_err(|_| syntax(line, format!("bad flag label {part:?}")))?;
                flags.push(label);
            }
            (&tokens[..tokens.len() - 1], flags)
        }
        _ => (tokens, Vec::new()),
    };
    if tokens.iter().skip(1).any(|t| t.starts_with('!')) {
        return Err(syntax(line, "flag annotation must be the final token"));
    }

    let kind = match tokens[0] {
        "X" => GateKind::X,
        "H" => GateKind::H,
        "S" => GateKind::S,
        "SDAG" => GateKind::SDag,
        "T" => GateKind::T,
        "TDAG" => GateKind::TDag,
        "CNOT" => GateKind::Cnot,
        "CZ" => GateKind::Cz,
        "TOFFOLI" => GateKind::Toffoli,
        "MPMCT" => GateKind::Mpmct(0), // control count fixed below
        other => {
            return Err(FormatError::UnknownGate {
                line,
                token: other.to_string(),
            })
        }
    };

    let lookup = |name: &str| {
        circuit
            .register()
            .position(name)
            .ok_or_else(|| FormatError::UnknownQubit {
                line,
                name: name.to_string(),
            })
    };

    let mut op = if let GateKind::Mpmct(_) = kind {
        if tokens.len() < 3 {
            return Err(syntax(line, "MPMCT needs at least one control and a target"));
        }
        let mut controls = Vec::new();
        for tok in &tokens[1..tokens.len() - 1] {
            let (polarity, name) = match tok.strip_prefix('+') {
                Some(rest) => (true, rest),
                None => match tok.strip_prefix('-') {
                    Some(rest) => (false, rest),
                    None => (true, *tok),
                },
            };
            if name.is_empty() {
                return Err(syntax(line, format!("bad control token {tok:?}")));
            }
            controls.push((lookup(name)?, polarity));
        }
        let target = lookup(tokens[tokens.len() - 1])?;
        Operation::mpmct(&controls, target)
    } else {
        let expected = kind.arity();
        if tokens.len() - 1 != expected {
            return Err(syntax(
                line,
                format!("{} expects {} operand(s), got {}", tokens[0], expected, tokens.len() - 1),
            ));
        }
        let mut qubits = Vec::with_capacity(expected);
        for tok in &tokens[1..] {
            qubits.push(lookup(tok)?);
        }
        match kind {
            GateKind::X => Operation::x(qubits[0]),
            GateKind::H => Operation::h(qubits[0]),
            GateKind::S => Operation::s(qubits[0]),
            GateKind::SDag => Operation::sdag(qubits[0]),
            GateKind::T => Operation::t(qubits[0]),
            GateKind::TDag => Operation::tdag(qubits[0]),
            GateKind::Cnot => Operation::cnot(qubits[0], qubits[1]),
            GateKind::Cz => Operation::cz(qubits[0], qubits[1]),
            GateKind::Toffoli => Operation::toffoli(qubits[0], qubits[1], qubits[2]),
            GateKind::Mpmct(_) => unreachable!(),
        }
    };
    op.flags.extend(flags);
    Ok(op)
}

/// Serialize a circuit: header, then moments in order with `---` between
/// them; gates within a moment sorted by their lowest qubit index. Output
/// is deterministic and `parse(serialize(c))` reproduces `c`'s moments.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("qubits ");
    out.push_str(&circuit.register().names().join(" "));
    out.push('\n');

    for (i, moment) in circuit.moments().iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        let mut ops: Vec<&Operation> = moment.operations.iter().collect();
        ops.sort_by_key(|op| op.min_qubit());
        for op in ops {
            out.push_str(&gate_line(op, circuit));
            out.push('\n');
        }
    }
    out
}

fn gate_line(op: &Operation, circuit: &Circuit) -> String {
    let reg = circuit.register();
    let mut line = op.kind.token().to_string();
    if let GateKind::Mpmct(_) = op.kind {
        for (q, p) in op.controls().iter().zip(&op.polarities) {
            line.push(' ');
            line.push(if *p { '+' } else { '-' });
            line.push_str(reg.name(*q));
        }
        line.push(' ');
        line.push_str(reg.name(op.target()));
    } else {
        for &q in &op.qubits {
            line.push(' ');
            line.push_str(reg.name(q));
        }
    }
    if !op.flags.is_empty() {
        let labels: Vec<String> = op.flags.iter().map(|f| f.to_string()).collect();
        line.push_str(" !");
        line.push_str(&labels.join(","));
    }
    line
}
