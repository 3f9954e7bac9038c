//! Grover search driven by the phase-mode QRAM oracle.
//!
//! The oracle circuit is run once per address on a basis state to read off
//! its sign; ancilla restoration is checked on every run, which is what makes
//! it legitimate to then act on address amplitudes alone. Diffusion is the
//! inversion about the mean.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{require, run, BasisState, SimError};
use crate::circuit::Circuit;
use crate::qram::{synth_qram, QramConfig, QramMode, Variant};

/// Amplitudes over the address register only.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressStateVector {
    amps: Vec<Complex64>,
}

impl AddressStateVector {
    pub fn uniform(n: usize) -> Self {
        let len = 1usize << n;
        Self {
            amps: vec![Complex64::new(1.0 / (len as f64).sqrt(), 0.0); len],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn apply_signs(&mut self, signs: &[i8]) {
        assert_eq!(signs.len(), self.amps.len());
        for (a, &s) in self.amps.iter_mut().zip(signs) {
            if s < 0 {
                *a = -*a;
            }
        }
    }

    /// `2|s><s| - I`: reflect every amplitude about the mean.
    pub fn diffuse(&mut self) {
        let mean = self.amps.iter().sum::<Complex64>() / self.amps.len() as f64;
        for a in &mut self.amps {
            *a = 2.0 * mean - *a;
        }
    }
}

/// Sign the phase circuit gives `address`, with `memory` loaded. Fails if any
/// qubit other than the phase is left changed.
pub fn oracle_phase(c: &Circuit, memory: &[u64], address: u64) -> Result<i8, SimError> {
    let layout = c.layout();
    let addr = require(layout, "address")?;
    let mem = require(layout, "memory")?;
    if mem.len() != memory.len() {
        return Err(SimError::Size {
            what: "memory register",
            expected: memory.len(),
            actual: mem.len(),
        });
    }
    let mut s0 = BasisState::for_layout(layout);
    s0.load_msb_first(addr, address);
    for (j, &w) in memory.iter().enumerate() {
        s0.set(mem.qubit(j), w & 1 == 1);
    }
    let s = run(c, &s0);
    if s.words != s0.words {
        return Err(SimError::Dirty(address));
    }
    Ok(s.phase())
}

pub fn oracle_signs(c: &Circuit, memory: &[u64]) -> Result<Vec<i8>, SimError> {
    let n = require(c.layout(), "address")?.len();
    (0..1u64 << n)
        .into_par_iter()
        .map(|a| oracle_phase(c, memory, a))
        .collect()
}

/// Probability of each address after `iterations` rounds of
/// sign flip and diffusion, starting from the uniform state.
pub fn grover_with_oracle(signs: &[i8], iterations: usize) -> Vec<f64> {
    let n = signs.len().trailing_zeros() as usize;
    assert_eq!(signs.len(), 1 << n, "sign table must cover 2^n addresses");
    let mut psi = AddressStateVector::uniform(n);
    for _ in 0..iterations {
        psi.apply_signs(signs);
        psi.diffuse();
    }
    psi.probabilities()
}

/// Runs Grover search for `marked` among `2^n` addresses with the oracle
/// realized as a phase-mode QRAM holding the marked set.
pub fn grover(n: usize, marked: &[u64], iterations: usize) -> Result<Vec<f64>, SimError> {
    if marked.is_empty() {
        return Err(SimError::Invalid("marked set is empty".into()));
    }
    let cfg = QramConfig::new(n, 1, QramMode::Phase, Variant::Parallel);
    let q = synth_qram(&cfg).map_err(|e| SimError::Invalid(e.to_string()))?;
    let mut memory = vec![0u64; 1 << n];
    for &m in marked {
        let slot = memory
            .get_mut(m as usize)
            .ok_or_else(|| SimError::Invalid(format!("marked address {m} out of range")))?;
        *slot = 1;
    }
    let signs = oracle_signs(&q.circuit, &memory)?;
    Ok(grover_with_oracle(&signs, iterations))
}
