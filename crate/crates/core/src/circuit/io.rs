//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 3
//! H 0
//! CP 1 0 pi/2
//! RZ 2 0.25
//! ```
//!
//! Angles accept plain decimals or `[-][k*]pi[/d]`.

use std::f64::consts::PI;
use std::fmt::Write;

use super::{Gate, GateKind, LogicalCircuit};
use crate::error::{Error, Result};

pub fn parse_angle(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let (coef, rest) = match body.split_once("*") {
        Some((k, rest)) => (k.parse::<f64>().ok()?, rest),
        None => (1.0, body),
    };
    let rest = rest.strip_prefix("pi")?;
    let div = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')?.parse::<f64>().ok()?
    };
    Some(neg * coef * PI / div)
}

pub fn parse_circuit(text: &str) -> Result<LogicalCircuit> {
    let mut num_qubits: Option<usize> = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split_whitespace().collect();
        let qubit = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad qubit `{s}`")));
        let angle = |s: &str| parse_angle(s).ok_or_else(|| err(format!("bad angle `{s}`")));
        let id = gates.len();
        match (f[0].to_ascii_uppercase().as_str(), f.len()) {
            ("QUBITS", 2) if num_qubits.is_none() => {
                num_qubits = Some(qubit(f[1])?);
                continue;
            }
            _ if num_qubits.is_none() => return Err(err("missing `qubits N` header".into())),
            ("CP", 4) => gates.push(Gate::cphase(id, qubit(f[1])?, qubit(f[2])?, angle(f[3])?)),
            ("H", 2) => gates.push(Gate::h(id, qubit(f[1])?)),
            ("RZ", 3) => gates.push(Gate::rz(id, qubit(f[1])?, angle(f[2])?).annotated()),
            _ => return Err(err(format!("unrecognized line `{line}`"))),
        }
    }
    let n = num_qubits.ok_or(Error::Parse {
        line: 0,
        msg: "empty circuit file".into(),
    })?;
    LogicalCircuit::new(n, gates)
}

pub fn write_circuit(circuit: &LogicalCircuit) -> Result<String> {
    let mut out = format!("qubits {}\n", circuit.num_qubits);
    for g in &circuit.gates {
        match g.kind {
            GateKind::Cphase => {
                writeln!(out, "CP {} {} {:?}", g.qubits[0], g.qubits[1], g.angle_or_zero())
            }
            GateKind::H => writeln!(out, "H {}", g.qubits[0]),
            GateKind::Rz => writeln!(out, "RZ {} {:?}", g.qubits[0], g.angle_or_zero()),
            other => {
                return Err(Error::InvalidCircuit(format!(
                    "gate kind {other:?} has no text representation"
                )))
            }
        }
        .expect("writing to a String");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gen_qft;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5"), Some(0.5));
        assert!((parse_angle("pi/4").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("-3*pi/4").unwrap() + 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - PI).abs() < 1e-15);
        assert_eq!(parse_angle("tau"), None);
    }

    #[test]
    fn round_trip_qft() {
        let c = gen_qft(5).unwrap();
        let back = parse_circuit(&write_circuit(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_circuit("qubits 2\nCP 0 1\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_circuit("H 0\n").is_err());
        assert!(parse_circuit("qubits 2\nCP 0 0 1.0\n").is_err());
    }
}
