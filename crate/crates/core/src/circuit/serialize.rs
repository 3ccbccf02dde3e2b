use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Block, Circuit, Condition, Statement, IR_VERSION};

/// Renders a circuit in the text format accepted by [`super::parse_circuit`].
pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "circuit {};", c.name);
    let _ = writeln!(out, "qubit[{}] {};", c.num_qubits, c.qubit_register);
    for reg in &c.clbit_registers {
        let _ = writeln!(out, "bit[{}] {};", reg.size, reg.name);
    }
    write_body(c, &c.body, 0, &mut out);
    out
}

fn write_body(c: &Circuit, body: &[Statement], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for stmt in body {
        match stmt {
            Statement::Gate(g) => {
                out.push_str(&pad);
                out.push_str(&g.name);
                if !g.params.is_empty() {
                    let params: Vec<String> = g.params.iter().map(|p| p.to_string()).collect();
                    let _ = write!(out, "({})", params.join(", "));
                }
                let qubits: Vec<String> = g
                    .qubits
                    .iter()
                    .map(|q| format!("{}[{}]", c.qubit_register, q.0))
                    .collect();
                let _ = writeln!(out, " {};", qubits.join(", "));
            }
            Statement::Measure(m) => {
                let _ = writeln!(
                    out,
                    "{pad}{} = measure {}[{}];",
                    c.clbit_label(m.clbit),
                    c.qubit_register,
                    m.qubit.0
                );
            }
            Statement::Reset(r) => {
                let _ = writeln!(out, "{pad}reset {}[{}];", c.qubit_register, r.qubit.0);
            }
            Statement::Block(Block::If {
                cond,
                then_body,
                else_body,
                ..
            }) => {
                let _ = writeln!(out, "{pad}if ({}) {{", condition_source(c, cond));
                write_body(c, then_body, depth + 1, out);
                if else_body.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    write_body(c, else_body, depth + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            Statement::Block(Block::While { cond, body, .. }) => {
                let _ = writeln!(out, "{pad}while ({}) {{", condition_source(c, cond));
                write_body(c, body, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
            Statement::Block(Block::For { count, body, .. }) => {
                let _ = writeln!(out, "{pad}for {count} {{");
                write_body(c, body, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

fn condition_source(c: &Circuit, cond: &Condition) -> String {
    match cond {
        Condition::BitEquals { bit, value: true } => c.clbit_label(*bit),
        Condition::BitEquals { bit, value: false } => format!("{} == 0", c.clbit_label(*bit)),
        Condition::RegisterEquals { .. } => c.condition_text(cond).replace("==", " == "),
        // Validation rejects negated block guards, so this is only reached
        // for hand-built circuits that skipped it.
        Condition::Not { .. } => c.condition_text(cond),
    }
}

#[derive(Serialize)]
struct CircuitDocRef<'a> {
    ir_version: u32,
    #[serde(flatten)]
    circuit: &'a Circuit,
}

#[derive(Deserialize)]
struct CircuitDoc {
    ir_version: u32,
    #[serde(flatten)]
    circuit: Circuit,
}

/// Pretty JSON document of the IR tree, tagged with `"ir_version": 1`.
pub fn circuit_to_json(c: &Circuit) -> String {
    serde_json::to_string_pretty(&CircuitDocRef {
        ir_version: IR_VERSION,
        circuit: c,
    })
    .expect("circuit serialization is infallible")
}

pub fn circuit_from_json(text: &str) -> Result<Circuit, String> {
    let doc: CircuitDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if doc.ir_version != IR_VERSION {
        return Err(format!(
            "unsupported ir_version {} (expected {IR_VERSION})",
            doc.ir_version
        ));
    }
    doc.circuit.validate().map_err(|e| e.to_string())?;
    Ok(doc.circuit)
}
