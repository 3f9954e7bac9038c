//! Exhaustive functional checks over every address. Registers are found by
//! name, so parsed circuits are checked exactly like synthesized ones.

use rayon::prelude::*;
use serde::Serialize;

use super::{require, run_in_place, BasisState, SimError};
use crate::circuit::{Circuit, Register};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub address: u64,
    pub expected: u64,
    pub actual: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub pass: bool,
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
}

impl VerdictReport {
    fn from_sweep(num: u64, first_failure: Option<Counterexample>) -> Self {
        match first_failure {
            None => Self {
                pass: true,
                checked: num,
                counterexample: None,
            },
            Some(cx) => Self {
                pass: false,
                checked: cx.address + 1,
                counterexample: Some(cx),
            },
        }
    }
}

fn fail(
    address: u64,
    expected: u64,
    actual: u64,
    reason: impl Into<String>,
) -> Option<Counterexample> {
    Some(Counterexample {
        address,
        expected,
        actual,
        reason: reason.into(),
    })
}

/// Registers the checks read or write; every other qubit is an ancilla that
/// must come back as 0.
struct Frame<'a> {
    circuit: &'a Circuit,
    address: &'a Register,
    memory: Option<&'a Register>,
    out: &'a Register,
    word_bits: usize,
    ancilla_mask: BasisState,
}

impl<'a> Frame<'a> {
    fn new(circuit: &'a Circuit, input: &str, with_memory: bool) -> Result<Self, SimError> {
        let layout = circuit.layout();
        let address = require(layout, input)?;
        let out = require(layout, "out")?;
        let memory = if with_memory {
            Some(require(layout, "memory")?)
        } else {
            None
        };
        if address.len() > 20 {
            return Err(SimError::Invalid(format!(
                "{} address bits is too many to sweep",
                address.len()
            )));
        }
        let mut ancilla_mask = BasisState::for_layout(layout);
        for r in layout.registers() {
            if r.name() != input && r.name() != "out" && !(with_memory && r.name() == "memory") {
                r.qubits().for_each(|q| ancilla_mask.flip(q));
            }
        }
        Ok(Self {
            circuit,
            address,
            memory,
            out,
            word_bits: out.len(),
            ancilla_mask,
        })
    }

    fn num_addresses(&self) -> u64 {
        1 << self.address.len()
    }

    fn check_words(&self, words: &[u64]) -> Result<(), SimError> {
        let expected = self.num_addresses() as usize;
        if words.len() != expected {
            return Err(SimError::Size {
                what: "number of words",
                expected,
                actual: words.len(),
            });
        }
        if let Some(m) = self.memory {
            if m.len() != expected * self.word_bits {
                return Err(SimError::Size {
                    what: "memory register",
                    expected: expected * self.word_bits,
                    actual: m.len(),
                });
            }
        }
        if self.word_bits < 64 {
            if let Some(w) = words.iter().find(|&&w| w >> self.word_bits != 0) {
                return Err(SimError::Invalid(format!(
                    "word {w:#x} wider than {} bits",
                    self.word_bits
                )));
            }
        }
        Ok(())
    }

    fn start(&self, addr: u64, memory: &[u64], bus: u64) -> BasisState {
        let mut s = BasisState::for_layout(self.circuit.layout());
        s.load_msb_first(self.address, addr);
        if let Some(m) = self.memory {
            for (j, &w) in memory.iter().enumerate() {
                s.load_word(m, j * self.word_bits, self.word_bits, w);
            }
        }
        s.load_word(self.out, 0, self.word_bits, bus);
        s
    }

    fn finish(&self, s0: BasisState) -> BasisState {
        let mut s = s0;
        run_in_place(self.circuit, &mut s, 0..self.circuit.len());
        s
    }

    /// Address unchanged and ancillae clean.
    fn common(&self, addr: u64, s: &BasisState) -> Option<Counterexample> {
        let got = s.read_msb_first(self.address);
        if got != addr {
            return fail(addr, addr, got, "input register modified");
        }
        let dirty = s
            .words
            .iter()
            .zip(&self.ancilla_mask.words)
            .position(|(a, m)| a & m != 0);
        if let Some(w) = dirty {
            let bits = s.words[w] & self.ancilla_mask.words[w];
            let q = crate::circuit::Qubit((w * 64) as u32 + bits.trailing_zeros());
            let label = self.circuit.layout().label(q).to_string();
            return fail(addr, 0, 1, format!("ancilla {label} not restored"));
        }
        None
    }

    /// Memory equals `expected` word for word.
    fn memory_diff(&self, addr: u64, s: &BasisState, expected: &[u64]) -> Option<Counterexample> {
        let m = self.memory?;
        expected.iter().enumerate().find_map(|(j, &w)| {
            let got = s.read_word(m, j * self.word_bits, self.word_bits);
            (got != w).then(|| Counterexample {
                address: addr,
                expected: w,
                actual: got,
                reason: format!("memory word {j} wrong"),
            })
        })
    }

    fn sweep<F>(&self, check: F) -> VerdictReport
    where
        F: Fn(u64) -> Option<Counterexample> + Sync + Send,
    {
        let n = self.num_addresses();
        VerdictReport::from_sweep(n, (0..n).into_par_iter().find_map_first(check))
    }
}

/// Every address `i` must produce `memory[i]` on `out`, leaving address,
/// memory and all ancillae untouched and the phase at +1.
pub fn verify_read(c: &Circuit, memory: &[u64]) -> Result<VerdictReport, SimError> {
    let f = Frame::new(c, "address", true)?;
    f.check_words(memory)?;
    Ok(f.sweep(|addr| {
        let s = f.finish(f.start(addr, memory, 0));
        if let Some(cx) = f.common(addr, &s) {
            return Some(cx);
        }
        let got = s.read_word(f.out, 0, f.word_bits);
        if got != memory[addr as usize] {
            return fail(addr, memory[addr as usize], got, "wrong word on output bus");
        }
        if s.phase() != 1 {
            return fail(addr, 1, 0, "phase flipped");
        }
        f.memory_diff(addr, &s, memory)
    }))
}

/// Every address `i` must XOR `bus` into word `i` only, leaving the bus,
/// address and ancillae untouched.
pub fn verify_write(c: &Circuit, memory: &[u64], bus: u64) -> Result<VerdictReport, SimError> {
    let f = Frame::new(c, "address", true)?;
    f.check_words(memory)?;
    f.check_words(&vec![bus; memory.len()])?;
    Ok(f.sweep(|addr| {
        let s = f.finish(f.start(addr, memory, bus));
        if let Some(cx) = f.common(addr, &s) {
            return Some(cx);
        }
        let got = s.read_word(f.out, 0, f.word_bits);
        if got != bus {
            return fail(addr, bus, got, "bus modified");
        }
        if s.phase() != 1 {
            return fail(addr, 1, 0, "phase flipped");
        }
        let mut expected = memory.to_vec();
        expected[addr as usize] ^= bus;
        f.memory_diff(addr, &s, &expected)
    }))
}

/// Every address `i` must pick up phase `(-1)^memory[i]` and change no bit.
pub fn verify_phase(c: &Circuit, memory: &[u64]) -> Result<VerdictReport, SimError> {
    let f = Frame::new(c, "address", true)?;
    f.check_words(memory)?;
    Ok(f.sweep(|addr| {
        let s = f.finish(f.start(addr, memory, 0));
        if let Some(cx) = f
            .common(addr, &s)
            .or_else(|| f.memory_diff(addr, &s, memory))
        {
            return Some(cx);
        }
        let want: i8 = if memory[addr as usize] & 1 == 1 {
            -1
        } else {
            1
        };
        if s.read_word(f.out, 0, f.word_bits) != 0 {
            return fail(
                addr,
                0,
                s.read_word(f.out, 0, f.word_bits),
                "output bus modified",
            );
        }
        (s.phase() != want).then(|| Counterexample {
            address: addr,
            expected: u64::from(want < 0),
            actual: u64::from(s.phase() < 0),
            reason: "wrong phase".into(),
        })
    }))
}

/// Every address `i` must produce `table[i]` on `out` with all other qubits
/// returned to 0. The table lives in the circuit, not in a memory register.
pub fn verify_lookup(c: &Circuit, table: &[u64]) -> Result<VerdictReport, SimError> {
    verify_function(c, "address", table)
}

/// Like [`verify_lookup`] with the input register named `input`; it is read
/// with `input[0]` as the most significant bit.
pub fn verify_function(c: &Circuit, input: &str, table: &[u64]) -> Result<VerdictReport, SimError> {
    let f = Frame::new(c, input, false)?;
    f.check_words(table)?;
    Ok(f.sweep(|addr| {
        let s = f.finish(f.start(addr, &[], 0));
        if let Some(cx) = f.common(addr, &s) {
            return Some(cx);
        }
        let got = s.read_word(f.out, 0, f.word_bits);
        if got != table[addr as usize] {
            return fail(addr, table[addr as usize], got, "wrong word on output bus");
        }
        (s.phase() != 1).then(|| Counterexample {
            address: addr,
            expected: 1,
            actual: 0,
            reason: "phase flipped".into(),
        })
    }))
}
