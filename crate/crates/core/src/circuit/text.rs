//! Line-oriented circuit text.
//!
//! ```text
//! qubits 2; clbits 2;
//! name bell;
//! u2 0 3.141592653589793 q0;
//! cx q0 q1;
//! measure q0 -> c0;
//! measure q1 -> c1;
//! ```
//!
//! Statements end with `;` and may share a line. `#` starts a comment that
//! runs to the end of the line. Besides the basis statements (`u1`, `u2`,
//! `u3`, `cx`, `measure`, `barrier`) the convenience gates `h x y z s sdg t
//! tdg rz cz cp swap ccx` are accepted so un-decomposed benchmark circuits
//! can be stored too.

use std::fmt::Write as _;

use super::{normalize_angle, Circuit, CircuitError, Gate};

fn syntax(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Syntax { line, msg: msg.into() }
}

/// Splits source text into `(line, statement)` pairs, comments removed.
fn statements(text: &str) -> Result<Vec<(usize, String)>, CircuitError> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let code = raw.split('#').next().unwrap_or("");
        for ch in code.chars() {
            if ch == ';' {
                let stmt = current.trim().to_string();
                if stmt.is_empty() {
                    return Err(syntax(line_no, "empty statement"));
                }
                out.push((start_line, stmt));
                current.clear();
            } else {
                if current.trim().is_empty() && !ch.is_whitespace() {
                    start_line = line_no;
                }
                current.push(ch);
            }
        }
        current.push(' ');
    }
    if !current.trim().is_empty() {
        return Err(syntax(start_line, format!("missing `;` after `{}`", current.trim())));
    }
    Ok(out)
}

fn parse_index(tok: &str, prefix: char, line: usize) -> Result<usize, CircuitError> {
    tok.strip_prefix(prefix)
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| syntax(line, format!("expected {prefix}<index>, got `{tok}`")))
}

fn parse_angle(tok: &str, line: usize) -> Result<f64, CircuitError> {
    let v: f64 = tok.parse().map_err(|_| syntax(line, format!("bad angle `{tok}`")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("angle `{tok}` is not finite")));
    }
    Ok(normalize_angle(v))
}

fn parse_count(stmt: &str, keyword: &str, line: usize) -> Result<usize, CircuitError> {
    let mut toks = stmt.split_whitespace();
    match (toks.next(), toks.next(), toks.next()) {
        (Some(k), Some(n), None) if k == keyword => {
            n.parse().map_err(|_| syntax(line, format!("bad {keyword} count `{n}`")))
        }
        _ => Err(syntax(line, format!("expected `{keyword} <count>`, got `{stmt}`"))),
    }
}

fn parse_gate(stmt: &str, line: usize) -> Result<Gate, CircuitError> {
    let toks: Vec<&str> = stmt.split_whitespace().collect();
    let op = toks[0];
    let args = &toks[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(syntax(line, format!("`{op}` takes {n} operands, got {}", args.len())))
        }
    };
    let q = |i: usize| parse_index(args[i], 'q', line);
    let a = |i: usize| parse_angle(args[i], line);
    let g = match op {
        "u1" => {
            arity(2)?;
            Gate::U1 { lambda: a(0)?, qubit: q(1)? }
        }
        "u2" => {
            arity(3)?;
            Gate::U2 { phi: a(0)?, lambda: a(1)?, qubit: q(2)? }
        }
        "u3" => {
            arity(4)?;
            Gate::U3 { theta: a(0)?, phi: a(1)?, lambda: a(2)?, qubit: q(3)? }
        }
        "cx" => {
            arity(2)?;
            Gate::Cx { control: q(0)?, target: q(1)? }
        }
        "measure" => {
            if args.len() != 3 || args[1] != "->" {
                return Err(syntax(line, "expected `measure q<i> -> c<k>`"));
            }
            Gate::Measure { qubit: q(0)?, clbit: parse_index(args[2], 'c', line)? }
        }
        "barrier" => {
            arity(0)?;
            Gate::Barrier
        }
        "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" => {
            arity(1)?;
            let k = q(0)?;
            match op {
                "h" => Gate::H(k),
                "x" => Gate::X(k),
                "y" => Gate::Y(k),
                "z" => Gate::Z(k),
                "s" => Gate::S(k),
                "sdg" => Gate::Sdg(k),
                "t" => Gate::T(k),
                _ => Gate::Tdg(k),
            }
        }
        "rz" => {
            arity(2)?;
            Gate::Rz { theta: a(0)?, qubit: q(1)? }
        }
        "cz" => {
            arity(2)?;
            Gate::Cz(q(0)?, q(1)?)
        }
        "cp" => {
            arity(3)?;
            Gate::Cp { lambda: a(0)?, control: q(1)?, target: q(2)? }
        }
        "swap" => {
            arity(2)?;
            Gate::Swap(q(0)?, q(1)?)
        }
        "ccx" => {
            arity(3)?;
            Gate::Ccx { c0: q(0)?, c1: q(1)?, target: q(2)? }
        }
        other => return Err(syntax(line, format!("unknown gate `{other}`"))),
    };
    Ok(g)
}

/// Parses circuit text. Semantic violations (operand out of range, repeated
/// clbit, gate after measurement) are reported as `Syntax` errors carrying
/// the offending line.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let stmts = statements(text)?;
    let mut it = stmts.into_iter();
    let (l1, s1) = it.next().ok_or_else(|| syntax(1, "missing `qubits` header"))?;
    let n_qubits = parse_count(&s1, "qubits", l1)?;
    let (l2, s2) = it.next().ok_or_else(|| syntax(l1, "missing `clbits` header"))?;
    let n_clbits = parse_count(&s2, "clbits", l2)?;
    let mut c = Circuit::new(n_qubits, n_clbits);
    let mut first = true;
    for (line, stmt) in it {
        if let Some(label) = stmt.strip_prefix("name ") {
            if !first {
                return Err(syntax(line, "`name` must directly follow the header"));
            }
            c.set_name(label.trim());
            first = false;
            continue;
        }
        first = false;
        let g = parse_gate(&stmt, line)?;
        c.push(g).map_err(|e| syntax(line, e.to_string()))?;
    }
    Ok(c)
}

fn angle(v: f64) -> String {
    format!("{}", normalize_angle(v))
}

/// Canonical text form; `parse_circuit(&emit_circuit(c)) == c.normalized()`.
pub fn emit_circuit(c: &Circuit) -> String {
    let mut s = format!("qubits {}; clbits {};\n", c.n_qubits(), c.n_clbits());
    if !c.name().is_empty() {
        let _ = writeln!(s, "name {};", c.name());
    }
    for g in c.gates() {
        let stmt = match *g {
            Gate::U1 { lambda, qubit } => format!("u1 {} q{qubit}", angle(lambda)),
            Gate::U2 { phi, lambda, qubit } => format!("u2 {} {} q{qubit}", angle(phi), angle(lambda)),
            Gate::U3 { theta, phi, lambda, qubit } => {
                format!("u3 {} {} {} q{qubit}", angle(theta), angle(phi), angle(lambda))
            }
            Gate::Cx { control, target } => format!("cx q{control} q{target}"),
            Gate::Measure { qubit, clbit } => format!("measure q{qubit} -> c{clbit}"),
            Gate::Barrier => "barrier".to_string(),
            Gate::H(q) => format!("h q{q}"),
            Gate::X(q) => format!("x q{q}"),
            Gate::Y(q) => format!("y q{q}"),
            Gate::Z(q) => format!("z q{q}"),
            Gate::S(q) => format!("s q{q}"),
            Gate::Sdg(q) => format!("sdg q{q}"),
            Gate::T(q) => format!("t q{q}"),
            Gate::Tdg(q) => format!("tdg q{q}"),
            Gate::Rz { theta, qubit } => format!("rz {} q{qubit}", angle(theta)),
            Gate::Cz(a, b) => format!("cz q{a} q{b}"),
            Gate::Cp { lambda, control, target } => {
                format!("cp {} q{control} q{target}", angle(lambda))
            }
            Gate::Swap(a, b) => format!("swap q{a} q{b}"),
            Gate::Ccx { c0, c1, target } => format!("ccx q{c0} q{c1} q{target}"),
        };
        s.push_str(&stmt);
        s.push_str(";\n");
    }
    s
}
