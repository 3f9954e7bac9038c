//! Reversible-gate IR: gates, named registers, stage barriers and
//! compute/uncompute pair marks.
//!
//! Every gate kind in the IR is its own inverse, so inverting a circuit is just
//! reversing its gate list (and mirroring its stage barriers).

mod layout;
pub mod metrics;
pub mod text;

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use layout::{QubitLabel, QubitLayout, Register};
pub use metrics::{
    asap_toffoli_depth, measure, measure_sections, toffoli_depth, DecompPolicy, ResourceReport,
    ToffoliDecomp,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit {qubit} is outside the layout ({num_qubits} qubits)")]
    QubitOutOfRange { qubit: u32, num_qubits: usize },
    #[error("qubit {0} appears more than once in one gate")]
    Overlap(u32),
    #[error("{kind} does not accept {controls} control(s) and {targets} target(s)")]
    Arity {
        kind: GateKind,
        controls: usize,
        targets: usize,
    },
    #[error("register {0:?} already exists")]
    DuplicateRegister(String),
    #[error("{0:?} is not a valid register name")]
    BadRegisterName(String),
    #[error("unknown register {0:?}")]
    UnknownRegister(String),
    #[error("{register}[{index}] is out of range (length {len})")]
    IndexOutOfRange {
        register: String,
        index: usize,
        len: usize,
    },
    #[error("circuits have different layouts")]
    LayoutMismatch,
    #[error("malformed pair mark ({compute}, {uncompute}): {reason}")]
    BadPair {
        compute: usize,
        uncompute: usize,
        reason: &'static str,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Index of a qubit in a [`QubitLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Qubit(pub u32);

impl Qubit {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    X,
    Cnot,
    MultiTargetCnot,
    Toffoli,
    /// NOT controlled on three or more qubits.
    Ckx,
    Cz,
}

impl GateKind {
    /// Toffoli and CKX; everything else in the IR is Clifford.
    pub fn is_non_clifford(self) -> bool {
        matches!(self, GateKind::Toffoli | GateKind::Ckx)
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Cnot => "cx",
            GateKind::MultiTargetCnot => "mtcx",
            GateKind::Toffoli => "ccx",
            GateKind::Ckx => "ckx",
            GateKind::Cz => "cz",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "x" => GateKind::X,
            "cx" => GateKind::Cnot,
            "mtcx" => GateKind::MultiTargetCnot,
            "ccx" => GateKind::Toffoli,
            "ckx" => GateKind::Ckx,
            "cz" => GateKind::Cz,
            _ => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// A single gate. CZ is symmetric; it is stored with its first qubit as the
/// control and its second as the target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    controls: Vec<Qubit>,
    targets: Vec<Qubit>,
}

impl Gate {
    pub fn new(
        kind: GateKind,
        controls: Vec<Qubit>,
        targets: Vec<Qubit>,
    ) -> Result<Self, CircuitError> {
        let g = Gate {
            kind,
            controls,
            targets,
        };
        g.check_shape()?;
        Ok(g)
    }

    pub fn x(target: Qubit) -> Self {
        Gate {
            kind: GateKind::X,
            controls: vec![],
            targets: vec![target],
        }
    }

    pub fn cnot(control: Qubit, target: Qubit) -> Self {
        Gate {
            kind: GateKind::Cnot,
            controls: vec![control],
            targets: vec![target],
        }
    }

    /// A CNOT fan-out; degenerates to a plain CNOT for a single target.
    pub fn fanout(control: Qubit, targets: Vec<Qubit>) -> Self {
        let kind = if targets.len() == 1 {
            GateKind::Cnot
        } else {
            GateKind::MultiTargetCnot
        };
        Gate {
            kind,
            controls: vec![control],
            targets,
        }
    }

    pub fn toffoli(a: Qubit, b: Qubit, target: Qubit) -> Self {
        Gate {
            kind: GateKind::Toffoli,
            controls: vec![a, b],
            targets: vec![target],
        }
    }

    /// Multi-controlled NOT; picks CNOT or Toffoli for one or two controls.
    pub fn mcx(controls: Vec<Qubit>, target: Qubit) -> Self {
        let kind = match controls.len() {
            0 => GateKind::X,
            1 => GateKind::Cnot,
            2 => GateKind::Toffoli,
            _ => GateKind::Ckx,
        };
        Gate {
            kind,
            controls,
            targets: vec![target],
        }
    }

    pub fn cz(a: Qubit, b: Qubit) -> Self {
        Gate {
            kind: GateKind::Cz,
            controls: vec![a],
            targets: vec![b],
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn controls(&self) -> &[Qubit] {
        &self.controls
    }

    pub fn targets(&self) -> &[Qubit] {
        &self.targets
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    pub fn is_non_clifford(&self) -> bool {
        self.kind.is_non_clifford()
    }

    fn check_shape(&self) -> Result<(), CircuitError> {
        let (c, t) = (self.controls.len(), self.targets.len());
        let ok = match self.kind {
            GateKind::X => c == 0 && t == 1,
            GateKind::Cnot => c == 1 && t == 1,
            GateKind::MultiTargetCnot => c == 1 && t >= 2,
            GateKind::Toffoli => c == 2 && t == 1,
            GateKind::Ckx => c >= 3 && t == 1,
            GateKind::Cz => c == 1 && t == 1,
        };
        if !ok {
            return Err(CircuitError::Arity {
                kind: self.kind,
                controls: c,
                targets: t,
            });
        }
        let mut seen: Vec<u32> = self.qubits().map(|q| q.0).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(CircuitError::Overlap(w[0]));
        }
        Ok(())
    }

    fn check(&self, num_qubits: usize) -> Result<(), CircuitError> {
        self.check_shape()?;
        if let Some(q) = self.qubits().find(|q| q.index() >= num_qubits) {
            return Err(CircuitError::QubitOutOfRange {
                qubit: q.0,
                num_qubits,
            });
        }
        Ok(())
    }

    /// Same action on basis states: equal kind, targets, and control set.
    pub fn same_action(&self, other: &Gate) -> bool {
        if self.kind != other.kind || self.targets != other.targets {
            return false;
        }
        let mut a = self.controls.clone();
        let mut b = other.controls.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// An ordered gate list over a fixed register layout, with optional stage
/// barriers. A barrier at position `p` separates gate `p - 1` from gate `p`;
/// each run of gates between barriers is one Toffoli-depth stage.
#[derive(Debug, Clone, Serialize)]
pub struct Circuit {
    layout: QubitLayout,
    gates: Vec<Gate>,
    marks: Vec<usize>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout
            && self.gates == other.gates
            && self.stage_marks() == other.stage_marks()
    }
}

impl Eq for Circuit {}

impl Circuit {
    pub fn new(layout: QubitLayout) -> Self {
        Self {
            layout,
            gates: Vec::new(),
            marks: Vec::new(),
        }
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    /// Validates and appends `gate`, returning its index.
    pub fn push(&mut self, gate: Gate) -> Result<usize, CircuitError> {
        gate.check(self.num_qubits())?;
        self.gates.push(gate);
        Ok(self.gates.len() - 1)
    }

    /// Value-style append.
    pub fn append(mut self, gate: Gate) -> Result<Self, CircuitError> {
        self.push(gate)?;
        Ok(self)
    }

    /// Closes the current stage. Barriers at the start, at the end, or right
    /// after another barrier carry no information and are dropped.
    pub fn barrier(&mut self) {
        let p = self.gates.len();
        if p > 0 && self.marks.last() != Some(&p) {
            self.marks.push(p);
        }
    }

    /// Interior barrier positions, strictly increasing, each in `1..len()`.
    pub fn stage_marks(&self) -> &[usize] {
        match self.marks.last() {
            Some(&p) if p == self.gates.len() => &self.marks[..self.marks.len() - 1],
            _ => &self.marks,
        }
    }

    pub fn has_stage_marks(&self) -> bool {
        !self.stage_marks().is_empty()
    }

    /// Gate index ranges of the stages delimited by barriers.
    pub fn stages(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for &p in self.stage_marks() {
            out.push(start..p);
            start = p;
        }
        out.push(start..self.gates.len());
        out
    }

    pub fn inverse(&self) -> Circuit {
        let len = self.gates.len();
        let mut marks: Vec<usize> = self.stage_marks().iter().rev().map(|&p| len - p).collect();
        marks.retain(|&p| p > 0 && p < len);
        Circuit {
            layout: self.layout.clone(),
            gates: self.gates.iter().rev().cloned().collect(),
            marks,
        }
    }

    /// `self` followed by `other`. A stage boundary is kept between the two
    /// whenever either side carries barriers.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit, CircuitError> {
        if self.layout != other.layout {
            return Err(CircuitError::LayoutMismatch);
        }
        let mut out = self.clone();
        out.marks = self.stage_marks().to_vec();
        if self.has_stage_marks() || other.has_stage_marks() {
            out.barrier();
        }
        let base = out.gates.len();
        out.gates.extend(other.gates.iter().cloned());
        out.marks
            .extend(other.stage_marks().iter().map(|p| p + base));
        Ok(out)
    }

    /// Appends every gate of `other` (same layout), keeping its barriers.
    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        *self = self.concat(other)?;
        Ok(())
    }
}

/// Compute/uncompute pairs: `(i, j)` says gate `j` undoes gate `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairMarks {
    pairs: Vec<(usize, usize)>,
}

impl PairMarks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, compute: usize, uncompute: usize) {
        self.pairs.push((compute, uncompute));
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn shifted(&self, offset: usize) -> PairMarks {
        PairMarks {
            pairs: self
                .pairs
                .iter()
                .map(|&(a, b)| (a + offset, b + offset))
                .collect(),
        }
    }

    pub fn merge(&mut self, other: &PairMarks) {
        self.pairs.extend_from_slice(&other.pairs);
    }

    /// Checks that every pair names two identical non-Clifford gates in order
    /// and that no gate belongs to more than one pair.
    pub fn validate(&self, circuit: &Circuit) -> Result<(), CircuitError> {
        let mut used = vec![false; circuit.len()];
        for &(c, u) in &self.pairs {
            let bad = |reason| CircuitError::BadPair {
                compute: c,
                uncompute: u,
                reason,
            };
            if c >= circuit.len() || u >= circuit.len() {
                return Err(bad("index out of range"));
            }
            if c >= u {
                return Err(bad("uncompute must come after compute"));
            }
            let (gc, gu) = (&circuit.gates[c], &circuit.gates[u]);
            if !gc.is_non_clifford() {
                return Err(bad("not a Toffoli or CKX"));
            }
            if !gc.same_action(gu) {
                return Err(bad("gates differ"));
            }
            if used[c] || used[u] {
                return Err(bad("gate already paired"));
            }
            used[c] = true;
            used[u] = true;
        }
        Ok(())
    }

    /// Per-gate flag: true for the uncompute member of some pair.
    pub(crate) fn uncompute_flags(&self, len: usize) -> Vec<bool> {
        let mut flags = vec![false; len];
        for &(_, u) in &self.pairs {
            if u < len {
                flags[u] = true;
            }
        }
        flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> QubitLayout {
        QubitLayout::new()
            .with("address", 3)
            .with("select", 8)
            .with("out", 1)
    }

    #[test]
    fn append_grows_and_validates() {
        let l = layout();
        let out0 = l.qubit("out", 0).unwrap();
        let c = Circuit::new(l.clone()).append(Gate::x(out0)).unwrap();
        assert_eq!(c.len(), 1);
        let a = l.qubit("address", 0).unwrap();
        let err = Circuit::new(l.clone())
            .append(Gate::toffoli(a, out0, a))
            .unwrap_err();
        assert_eq!(err, CircuitError::Overlap(a.0));
        let err = Circuit::new(l).append(Gate::x(Qubit(99))).unwrap_err();
        assert!(matches!(
            err,
            CircuitError::QubitOutOfRange { qubit: 99, .. }
        ));
    }

    #[test]
    fn arity_rules() {
        let q = |i| Qubit(i);
        assert!(Gate::new(GateKind::Toffoli, vec![q(0)], vec![q(1)]).is_err());
        assert!(Gate::new(GateKind::Ckx, vec![q(0), q(1)], vec![q(2)]).is_err());
        assert!(Gate::new(GateKind::Ckx, vec![q(0), q(1), q(2)], vec![q(3)]).is_ok());
        assert!(Gate::new(GateKind::MultiTargetCnot, vec![q(0)], vec![q(1)]).is_err());
        assert!(Gate::new(GateKind::Cz, vec![q(0)], vec![q(1), q(2)]).is_err());
        assert_eq!(Gate::fanout(q(0), vec![q(1)]).kind(), GateKind::Cnot);
        assert_eq!(
            Gate::mcx(vec![q(0), q(1), q(2)], q(3)).kind(),
            GateKind::Ckx
        );
    }

    #[test]
    fn inverse_reverses_and_mirrors_barriers() {
        let l = layout();
        let q = |i| Qubit(i);
        let mut c = Circuit::new(l);
        c.push(Gate::cnot(q(0), q(3))).unwrap();
        c.push(Gate::toffoli(q(0), q(1), q(4))).unwrap();
        c.barrier();
        c.push(Gate::x(q(5))).unwrap();
        c.barrier();
        let inv = c.inverse();
        assert_eq!(inv.gates()[0], Gate::x(q(5)));
        assert_eq!(inv.stage_marks(), &[1]);
        assert_eq!(inv.inverse(), c);
        assert_eq!(inv.len(), c.len());
        assert!(Circuit::new(layout()).inverse().is_empty());
    }

    #[test]
    fn concat_keeps_stage_boundary() {
        let q = |i| Qubit(i);
        let mut a = Circuit::new(layout());
        a.push(Gate::toffoli(q(0), q(1), q(3))).unwrap();
        let mut b = Circuit::new(layout());
        b.push(Gate::toffoli(q(0), q(2), q(4))).unwrap();
        b.push(Gate::x(q(5))).unwrap();
        b.barrier();
        b.push(Gate::x(q(6))).unwrap();
        let ab = a.concat(&b).unwrap();
        assert_eq!(ab.stage_marks(), &[1, 3]);
        assert_eq!(ab.stages().len(), 3);
        let other = Circuit::new(QubitLayout::new().with("q", 2));
        assert_eq!(a.concat(&other), Err(CircuitError::LayoutMismatch));
    }

    #[test]
    fn pair_validation() {
        let q = |i| Qubit(i);
        let mut c = Circuit::new(layout());
        c.push(Gate::toffoli(q(0), q(1), q(3))).unwrap();
        c.push(Gate::x(q(5))).unwrap();
        c.push(Gate::toffoli(q(1), q(0), q(3))).unwrap();
        let mut p = PairMarks::new();
        p.push(0, 2);
        assert!(p.validate(&c).is_ok());
        let mut bad = PairMarks::new();
        bad.push(2, 0);
        assert!(bad.validate(&c).is_err());
        let mut bad = PairMarks::new();
        bad.push(0, 1);
        assert!(bad.validate(&c).is_err());
        let mut bad = PairMarks::new();
        bad.push(0, 7);
        assert!(bad.validate(&c).is_err());
    }
}
