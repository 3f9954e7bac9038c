//! Circuit serialization.
//!
//! Native format, one item per line:
//!
//! ```text
//! qreg address[3]
//! qreg select[8]
//! cx address[0], select[1]
//! ccx select[1], select[2], select[3]
//! ---
//! pair 4 17
//! ```
//!
//! `---` is a stage barrier, `pair i j` marks gate `j` as the uncompute of
//! gate `i`, and `#` starts a comment. Operands are listed controls first.
//!
//! The QASM 2.0 emitter uses `qelib1.inc` gates where they exist, declares an
//! opaque `ckxK` gate for every K-control NOT it needs, spells multi-target
//! CNOTs out as `cx` lines, and writes barriers across all registers. Pair
//! marks travel in `// pair i j` comments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Circuit, CircuitError, Gate, GateKind, PairMarks, Qubit, QubitLayout};

/// A circuit together with its compute/uncompute pair marks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedCircuit {
    pub circuit: Circuit,
    pub pairs: PairMarks,
}

pub fn export_text(c: &Circuit, pairs: &PairMarks) -> String {
    let layout = c.layout();
    let mut out = String::new();
    for r in layout.registers() {
        writeln!(out, "qreg {}[{}]", r.name(), r.len()).unwrap();
    }
    let mut marks = c.stage_marks().iter().peekable();
    for (i, g) in c.gates().iter().enumerate() {
        if marks.next_if_eq(&&i).is_some() {
            out.push_str("---\n");
        }
        out.push_str(g.kind().mnemonic());
        for (k, q) in g.qubits().enumerate() {
            out.push_str(if k == 0 { " " } else { ", " });
            write!(out, "{}", layout.label(q)).unwrap();
        }
        out.push('\n');
    }
    for &(a, b) in pairs.pairs() {
        writeln!(out, "pair {a} {b}").unwrap();
    }
    out
}

pub fn export_qasm(c: &Circuit, pairs: &PairMarks) -> String {
    let layout = c.layout();
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let arities: BTreeSet<usize> = c
        .gates()
        .iter()
        .filter(|g| g.kind() == GateKind::Ckx)
        .map(|g| g.controls().len())
        .collect();
    for k in arities {
        let args: Vec<String> = (0..k)
            .map(|i| format!("c{i}"))
            .chain(["t".into()])
            .collect();
        writeln!(out, "opaque ckx{k} {};", args.join(",")).unwrap();
    }
    for r in layout.registers().iter().filter(|r| !r.is_empty()) {
        writeln!(out, "qreg {}[{}];", r.name(), r.len()).unwrap();
    }
    let all_regs: Vec<&str> = layout
        .registers()
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.name())
        .collect();
    let label = |q: Qubit| layout.label(q).to_string();
    let mut marks = c.stage_marks().iter().peekable();
    // gate index in the emitted text, which differs once fan-outs are split
    let mut emitted = Vec::with_capacity(c.len());
    let mut next = 0;
    for (i, g) in c.gates().iter().enumerate() {
        if marks.next_if_eq(&&i).is_some() {
            writeln!(out, "barrier {};", all_regs.join(",")).unwrap();
        }
        emitted.push(next);
        next += if g.kind() == GateKind::MultiTargetCnot {
            g.targets().len()
        } else {
            1
        };
        let ops: Vec<String> = g.qubits().map(label).collect();
        match g.kind() {
            GateKind::MultiTargetCnot => {
                for t in &ops[1..] {
                    writeln!(out, "cx {},{};", ops[0], t).unwrap();
                }
            }
            GateKind::Ckx => {
                writeln!(out, "ckx{} {};", g.controls().len(), ops.join(",")).unwrap();
            }
            k => writeln!(out, "{} {};", k.mnemonic(), ops.join(",")).unwrap(),
        }
    }
    for &(a, b) in pairs.pairs() {
        writeln!(out, "// pair {} {}", emitted[a], emitted[b]).unwrap();
    }
    out
}

/// Parses either format, recognised by an `OPENQASM` header.
pub fn parse_circuit(src: &str) -> Result<MarkedCircuit, CircuitError> {
    let first = src
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"));
    match first {
        Some(l) if l.starts_with("OPENQASM") => parse_qasm(src),
        _ => parse_text(src),
    }
}

fn perr(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse {
        line,
        message: message.into(),
    }
}

/// `name[idx]` with optional surrounding whitespace.
fn parse_ref(s: &str, line: usize) -> Result<(&str, usize), CircuitError> {
    let s = s.trim();
    let open = s
        .find('[')
        .ok_or_else(|| perr(line, format!("expected name[index], got {s:?}")))?;
    let inner = s[open + 1..]
        .strip_suffix(']')
        .ok_or_else(|| perr(line, format!("missing ']' in {s:?}")))?;
    let idx = inner
        .trim()
        .parse()
        .map_err(|_| perr(line, format!("bad index in {s:?}")))?;
    Ok((s[..open].trim(), idx))
}

/// Accumulates gates before the layout is final so registers may be
/// declared anywhere before their first use.
struct Builder {
    layout: QubitLayout,
    gates: Vec<(usize, GateKind, Vec<Qubit>)>,
    barriers: Vec<usize>,
    pairs: PairMarks,
}

impl Builder {
    fn new() -> Self {
        Self {
            layout: QubitLayout::new(),
            gates: Vec::new(),
            barriers: Vec::new(),
            pairs: PairMarks::new(),
        }
    }

    fn qreg(&mut self, spec: &str, line: usize) -> Result<(), CircuitError> {
        let (name, len) = parse_ref(spec, line)?;
        self.layout
            .add(name, len)
            .map_err(|e| perr(line, e.to_string()))?;
        Ok(())
    }

    fn operands(&self, args: &str, line: usize) -> Result<Vec<Qubit>, CircuitError> {
        args.split(',')
            .map(|a| {
                let (name, idx) = parse_ref(a, line)?;
                self.layout
                    .qubit(name, idx)
                    .map_err(|e| perr(line, e.to_string()))
            })
            .collect()
    }

    fn gate(&mut self, kind: GateKind, qs: Vec<Qubit>, line: usize) {
        self.gates.push((line, kind, qs));
    }

    fn pair(&mut self, rest: &str, line: usize) -> Result<(), CircuitError> {
        let nums: Vec<usize> = rest
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| perr(line, format!("bad pair index {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        match nums[..] {
            [a, b] => {
                self.pairs.push(a, b);
                Ok(())
            }
            _ => Err(perr(line, "pair takes two gate indices")),
        }
    }

    fn finish(self) -> Result<MarkedCircuit, CircuitError> {
        let mut circuit = Circuit::new(self.layout);
        let mut barriers = self.barriers.into_iter().peekable();
        for (i, (line, kind, mut qs)) in self.gates.into_iter().enumerate() {
            while barriers.next_if(|&b| b <= i).is_some() {
                circuit.barrier();
            }
            let gate = match kind {
                GateKind::X => Gate::new(kind, vec![], qs),
                GateKind::MultiTargetCnot => {
                    let targets = qs.split_off(1.min(qs.len()));
                    Gate::new(kind, qs, targets)
                }
                _ => {
                    let target = qs.pop().into_iter().collect();
                    Gate::new(kind, qs, target)
                }
            };
            circuit
                .push(gate.map_err(|e| perr(line, e.to_string()))?)
                .map_err(|e| perr(line, e.to_string()))?;
        }
        self.pairs.validate(&circuit)?;
        Ok(MarkedCircuit {
            circuit,
            pairs: self.pairs,
        })
    }
}

pub fn parse_text(src: &str) -> Result<MarkedCircuit, CircuitError> {
    let mut b = Builder::new();
    for (no, raw) in src.lines().enumerate() {
        let line = no + 1;
        let text = raw.split('#').next().unwrap().trim();
        if text.is_empty() {
            continue;
        }
        if text == "---" {
            b.barriers.push(b.gates.len());
            continue;
        }
        let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        match head {
            "qreg" => b.qreg(rest, line)?,
            "pair" => b.pair(rest, line)?,
            m => {
                let kind = GateKind::from_mnemonic(m)
                    .ok_or_else(|| perr(line, format!("unknown gate {m:?}")))?;
                let qs = b.operands(rest, line)?;
                b.gate(kind, qs, line);
            }
        }
    }
    b.finish()
}

pub fn parse_qasm(src: &str) -> Result<MarkedCircuit, CircuitError> {
    let mut b = Builder::new();
    let mut header = false;
    for (no, raw) in src.lines().enumerate() {
        let line = no + 1;
        let (code, comment) = match raw.find("//") {
            Some(p) => (&raw[..p], Some(raw[p + 2..].trim())),
            None => (raw, None),
        };
        if let Some(rest) = comment.and_then(|c| c.strip_prefix("pair ")) {
            b.pair(rest, line)?;
        }
        for stmt in code.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (head, rest) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
            match head {
                "OPENQASM" => header = true,
                "include" | "opaque" | "creg" => {}
                "qreg" => b.qreg(rest, line)?,
                "barrier" => b.barriers.push(b.gates.len()),
                "x" | "cx" | "ccx" | "cz" => {
                    let kind = GateKind::from_mnemonic(head).unwrap();
                    let qs = b.operands(rest, line)?;
                    b.gate(kind, qs, line);
                }
                h if h.starts_with("ckx") && h[3..].parse::<usize>().is_ok() => {
                    let qs = b.operands(rest, line)?;
                    if qs.len() != h[3..].parse::<usize>().unwrap() + 1 {
                        return Err(perr(line, format!("{h} expects {} operands", &h[3..])));
                    }
                    b.gate(GateKind::Ckx, qs, line);
                }
                other => return Err(perr(line, format!("unsupported statement {other:?}"))),
            }
        }
    }
    if !header {
        return Err(perr(1, "missing OPENQASM header"));
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Circuit, PairMarks) {
        let layout = QubitLayout::new()
            .with("address", 3)
            .with("select", 8)
            .with("work", 0)
            .with("out", 1);
        let q = |r: &str, i| layout.qubit(r, i).unwrap();
        let mut c = Circuit::new(layout.clone());
        c.push(Gate::cnot(q("address", 0), q("select", 1))).unwrap();
        c.push(Gate::fanout(
            q("address", 1),
            vec![q("select", 2), q("select", 3)],
        ))
        .unwrap();
        c.push(Gate::toffoli(
            q("select", 1),
            q("select", 2),
            q("select", 3),
        ))
        .unwrap();
        c.barrier();
        c.push(Gate::mcx(
            vec![q("address", 0), q("address", 1), q("address", 2)],
            q("out", 0),
        ))
        .unwrap();
        c.push(Gate::cz(q("select", 0), q("out", 0))).unwrap();
        c.push(Gate::x(q("select", 0))).unwrap();
        c.push(Gate::toffoli(
            q("select", 1),
            q("select", 2),
            q("select", 3),
        ))
        .unwrap();
        let mut p = PairMarks::new();
        p.push(2, 6);
        (c, p)
    }

    #[test]
    fn single_cnot_line() {
        let layout = QubitLayout::new().with("address", 3).with("select", 8);
        let c = Circuit::new(layout.clone())
            .append(Gate::cnot(
                layout.qubit("address", 0).unwrap(),
                layout.qubit("select", 1).unwrap(),
            ))
            .unwrap();
        let text = export_text(&c, &PairMarks::new());
        assert!(text.lines().any(|l| l == "cx address[0], select[1]"));
    }

    #[test]
    fn text_round_trip() {
        let (c, p) = sample();
        let text = export_text(&c, &p);
        assert!(text.contains("ckx address[0], address[1], address[2], out[0]"));
        assert!(text.contains("mtcx address[1], select[2], select[3]"));
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back.circuit, c);
        assert_eq!(back.pairs, p);
    }

    #[test]
    fn qasm_round_trip_up_to_fanout_lowering() {
        let (c, p) = sample();
        let qasm = export_qasm(&c, &p);
        assert!(qasm.starts_with("OPENQASM 2.0;"));
        assert!(qasm.contains("opaque ckx3 c0,c1,c2,t;"));
        assert!(qasm.contains("barrier address,select,out;"));
        let back = parse_circuit(&qasm).unwrap();
        // the fan-out comes back as two CNOTs, shifting later indices by one
        assert_eq!(back.circuit.len(), c.len() + 1);
        assert_eq!(back.circuit.stage_marks(), &[4]);
        assert_eq!(back.circuit.gates()[1].kind(), GateKind::Cnot);
        assert_eq!(back.pairs, p.shifted(1));
    }

    #[test]
    fn qasm_without_fanout_round_trips_exactly() {
        let layout = QubitLayout::new().with("a", 4);
        let q = |i| layout.qubit("a", i).unwrap();
        let mut c = Circuit::new(layout.clone());
        c.push(Gate::toffoli(q(0), q(1), q(2))).unwrap();
        c.barrier();
        c.push(Gate::toffoli(q(0), q(1), q(2))).unwrap();
        let mut p = PairMarks::new();
        p.push(0, 1);
        let back = parse_qasm(&export_qasm(&c, &p)).unwrap();
        assert_eq!(
            back,
            MarkedCircuit {
                circuit: c,
                pairs: p
            }
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_text("qreg a[2]\ncx a[0], a[5]\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = parse_text("qreg a[2]\nfoo a[0]\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = parse_text("qreg a[3]\nccx a[0], a[1]\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        assert!(parse_text("qreg a[3]\nx a[0]\npair 0 0\n").is_err());
    }

    #[test]
    fn comments_and_leading_barriers_are_ignored() {
        let src = "# header\nqreg a[2]\n---\nx a[0] # flip\n---\n---\ncx a[0], a[1]\n---\n";
        let m = parse_text(src).unwrap();
        assert_eq!(m.circuit.len(), 2);
        assert_eq!(m.circuit.stage_marks(), &[1]);
    }
}
