//! Exact simulation of permutation circuits with a ±1 phase.
//!
//! Every gate in the IR maps basis states to basis states (CZ only flips the
//! sign), so a run is a single bit vector plus one sign. Correctness on basis
//! states implies correctness on superpositions by linearity.

mod grover;
mod verify;

use std::ops::Range;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate, GateKind, Qubit, QubitLayout, Register};

pub use grover::{grover, grover_with_oracle, oracle_phase, oracle_signs, AddressStateVector};
pub use verify::{
    verify_function, verify_lookup, verify_phase, verify_read, verify_write, Counterexample,
    VerdictReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("circuit has no {0:?} register")]
    MissingRegister(String),
    #[error("{what}: expected {expected}, got {actual}")]
    Size {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("ancillae not restored for address {0}")]
    Dirty(u64),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// One computational basis state of a layout, with a sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisState {
    words: Vec<u64>,
    num_qubits: usize,
    negative: bool,
}

impl BasisState {
    pub fn zeros(num_qubits: usize) -> Self {
        Self {
            words: vec![0; num_qubits.div_ceil(64)],
            num_qubits,
            negative: false,
        }
    }

    pub fn for_layout(layout: &QubitLayout) -> Self {
        Self::zeros(layout.num_qubits())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn get(&self, q: Qubit) -> bool {
        let i = q.index();
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn flip(&mut self, q: Qubit) {
        let i = q.index();
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn set(&mut self, q: Qubit, v: bool) {
        if self.get(q) != v {
            self.flip(q);
        }
    }

    /// +1 or -1.
    pub fn phase(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn apply(&mut self, g: &Gate) {
        let on = g.controls().iter().all(|&c| self.get(c));
        if !on {
            return;
        }
        match g.kind() {
            GateKind::Cz => {
                if self.get(g.targets()[0]) {
                    self.negative = !self.negative;
                }
            }
            _ => g.targets().iter().for_each(|&t| self.flip(t)),
        }
    }

    /// Writes `value` into `reg` with `reg[0]` as the most significant bit.
    pub fn load_msb_first(&mut self, reg: &Register, value: u64) {
        let len = reg.len();
        for (i, q) in reg.qubits().enumerate() {
            self.set(q, value >> (len - 1 - i) & 1 == 1);
        }
    }

    /// Reads `reg` with `reg[0]` as the most significant bit.
    pub fn read_msb_first(&self, reg: &Register) -> u64 {
        reg.qubits()
            .fold(0, |acc, q| acc << 1 | u64::from(self.get(q)))
    }

    /// Writes `value` into `len` qubits of `reg` from offset `start`, least
    /// significant bit first. Used for memory words and the output bus.
    pub fn load_word(&mut self, reg: &Register, start: usize, len: usize, value: u64) {
        for t in 0..len {
            self.set(reg.qubit(start + t), value >> t & 1 == 1);
        }
    }

    pub fn read_word(&self, reg: &Register, start: usize, len: usize) -> u64 {
        (0..len).fold(0, |acc, t| {
            acc | u64::from(self.get(reg.qubit(start + t))) << t
        })
    }
}

pub fn run(c: &Circuit, s0: &BasisState) -> BasisState {
    let mut s = s0.clone();
    run_in_place(c, &mut s, 0..c.len());
    s
}

/// Applies `c.gates()[range]` to `s`; prefixes give mid-circuit snapshots.
pub fn run_in_place(c: &Circuit, s: &mut BasisState, range: Range<usize>) {
    for g in &c.gates()[range] {
        s.apply(g);
    }
}

/// State after the first `k` gates.
pub fn run_until(c: &Circuit, s0: &BasisState, k: usize) -> BasisState {
    let mut s = s0.clone();
    run_in_place(c, &mut s, 0..k);
    s
}

pub(crate) fn require<'a>(layout: &'a QubitLayout, name: &str) -> Result<&'a Register, SimError> {
    layout
        .register(name)
        .ok_or_else(|| SimError::MissingRegister(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> QubitLayout {
        QubitLayout::new().with("q", 3)
    }

    #[test]
    fn toffoli_multiplies() {
        let l = layout();
        let q = |i| l.qubit("q", i).unwrap();
        let c = Circuit::new(l.clone())
            .append(Gate::toffoli(q(0), q(1), q(2)))
            .unwrap();
        let mut s = BasisState::for_layout(&l);
        s.set(q(0), true);
        s.set(q(1), true);
        let out = run(&c, &s);
        assert!(out.get(q(2)));
        s.set(q(1), false);
        assert!(!run(&c, &s).get(q(2)));
    }

    #[test]
    fn cz_flips_sign_only_on_11() {
        let l = layout();
        let q = |i| l.qubit("q", i).unwrap();
        let c = Circuit::new(l.clone())
            .append(Gate::cz(q(0), q(1)))
            .unwrap();
        let mut s = BasisState::for_layout(&l);
        s.set(q(0), true);
        assert_eq!(run(&c, &s).phase(), 1);
        s.set(q(1), true);
        let out = run(&c, &s);
        assert_eq!(out.phase(), -1);
        assert!(out.get(q(0)) && out.get(q(1)));
    }

    #[test]
    fn registers_load_and_read() {
        let l = QubitLayout::new().with("a", 3).with("m", 70);
        let mut s = BasisState::for_layout(&l);
        let a = l.get("a").unwrap();
        s.load_msb_first(a, 0b110);
        assert!(s.get(a.qubit(0)) && s.get(a.qubit(1)) && !s.get(a.qubit(2)));
        assert_eq!(s.read_msb_first(a), 6);
        let m = l.get("m").unwrap();
        s.load_word(m, 62, 5, 0b10111);
        assert_eq!(s.read_word(m, 62, 5), 0b10111);
        assert!(s.get(m.qubit(62)) && !s.get(m.qubit(65)));
    }
}
