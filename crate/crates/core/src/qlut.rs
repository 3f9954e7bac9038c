//! Read-only look-up table from two cascaded polynomial-encoded QRAMs.
//!
//! The address splits as `N' = N2' + N2 * N1'`. The high `n1` bits select a
//! block of `N2` consecutive words, which is XOR-ed into a staging register
//! by multi-target CNOTs compiled from the table. The low `n2` bits then
//! select one staged word, copied out through parity ancillae at
//! Toffoli-depth 1. Everything except the output is uncomputed.

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{
    measure, Circuit, CircuitError, Gate, PairMarks, Qubit, QubitLayout, ResourceReport,
    ToffoliDecomp,
};
use crate::qram::{build_schedule, EncoderQubits, MAX_ADDRESS_BITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QlutError {
    #[error("address split {n1}+{n2} needs both parts >= 1 and a total <= {MAX_ADDRESS_BITS}")]
    Split { n1: usize, n2: usize },
    #[error("word size must be between 1 and 64")]
    WordBits,
    #[error("table has {actual} words, expected {expected}")]
    TableSize { expected: usize, actual: usize },
    #[error("table word {index} ({value:#x}) is wider than {word_bits} bits")]
    WordTooWide {
        index: usize,
        value: u64,
        word_bits: usize,
    },
    #[error("address {address} is out of range for {bits} bits")]
    Address { address: u64, bits: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// `(N1', N2')` with `address = N2' + 2^n2 * N1'`.
pub fn split_address(address: u64, n1: usize, n2: usize) -> Result<(u64, u64), QlutError> {
    if address >> (n1 + n2) != 0 {
        return Err(QlutError::Address {
            address,
            bits: n1 + n2,
        });
    }
    Ok((address >> n2, address & ((1 << n2) - 1)))
}

/// `n1 = ceil(n/2)`, `n2 = floor(n/2)`.
pub fn default_split(n: usize) -> (usize, usize) {
    (n.div_ceil(2), n / 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QlutConfig {
    pub n1: usize,
    pub n2: usize,
    pub word_bits: usize,
    pub table: Vec<u64>,
}

impl QlutConfig {
    pub fn new(n1: usize, n2: usize, word_bits: usize, table: Vec<u64>) -> Self {
        Self {
            n1,
            n2,
            word_bits,
            table,
        }
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn validate(&self) -> Result<(), QlutError> {
        let (n1, n2) = (self.n1, self.n2);
        if n1 == 0 || n2 == 0 || n1 + n2 > MAX_ADDRESS_BITS {
            return Err(QlutError::Split { n1, n2 });
        }
        if !(1..=64).contains(&self.word_bits) {
            return Err(QlutError::WordBits);
        }
        let expected = 1 << self.n();
        if self.table.len() != expected {
            return Err(QlutError::TableSize {
                expected,
                actual: self.table.len(),
            });
        }
        if self.word_bits < 64 {
            if let Some((index, &value)) = self
                .table
                .iter()
                .enumerate()
                .find(|(_, &w)| w >> self.word_bits != 0)
            {
                return Err(QlutError::WordTooWide {
                    index,
                    value,
                    word_bits: self.word_bits,
                });
            }
        }
        Ok(())
    }
}

/// Closed-form costs of the table with pairs counted once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QlutResources {
    pub toffoli_count: u64,
    pub toffoli_depth: u64,
    pub ancillae: u64,
}

fn ceil_log2(x: usize) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(usize::BITS - (x - 1).leading_zeros())
    }
}

/// `N1 + (l+1) N2 - n - 2` Toffolis, depth `max(ceil log2 n1, ceil log2 n2) + 1`,
/// `2 (N1 + (l+1) N2)` ancillae.
pub fn qlut_resources(n1: usize, n2: usize, word_bits: usize) -> QlutResources {
    let (big1, big2, l) = (1u64 << n1, 1u64 << n2, word_bits as u64);
    QlutResources {
        toffoli_count: big1 + (l + 1) * big2 - (n1 + n2) as u64 - 2,
        toffoli_depth: ceil_log2(n1).max(ceil_log2(n2)) + 1,
        ancillae: 2 * (big1 + (l + 1) * big2),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QlutCircuit {
    pub config: QlutConfig,
    pub circuit: Circuit,
    pub pairs: PairMarks,
}

/// Measured counterparts of [`QlutResources`] plus the full report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QlutReport {
    pub measured: QlutResources,
    pub report: ResourceReport,
}

impl QlutCircuit {
    /// Qubits other than the address and output registers.
    pub fn ancillae(&self) -> usize {
        let l = self.circuit.layout();
        l.num_qubits()
            - l.get("address").map_or(0, |r| r.len())
            - l.get("out").map_or(0, |r| r.len())
    }

    pub fn report(&self, decomp: &ToffoliDecomp) -> Result<QlutReport, CircuitError> {
        let report = measure(&self.circuit, decomp, &self.pairs)?;
        Ok(QlutReport {
            measured: QlutResources {
                toffoli_count: report.toffoli_net,
                toffoli_depth: report.toffoli_depth_compute,
                ancillae: self.ancillae() as u64,
            },
            report,
        })
    }
}

fn qubits(layout: &QubitLayout, name: &str) -> Vec<Qubit> {
    layout
        .get(name)
        .map(|r| r.qubits().collect())
        .unwrap_or_default()
}

pub fn synth_qlut(cfg: &QlutConfig) -> Result<QlutCircuit, QlutError> {
    cfg.validate()?;
    let (n1, n2, l) = (cfg.n1, cfg.n2, cfg.word_bits);
    let (big1, big2) = (1usize << n1, 1usize << n2);
    let (sched1, sched2) = (build_schedule(n1), build_schedule(n2));
    let work1 = big1.max(sched1.work_demand());
    let work2 = big2.max(sched2.work_demand()).max((l - 1) * big2);
    let layout = QubitLayout::new()
        .with("address", n1 + n2)
        .with("select1", big1)
        .with("work1", work1)
        .with("select2", big2)
        .with("work2", work2)
        .with("staging", l * big2)
        .with("parity", l * big2)
        .with("out", l);
    let address = qubits(&layout, "address");
    let high = EncoderQubits {
        address: address[..n1].to_vec(),
        select: qubits(&layout, "select1"),
        work: qubits(&layout, "work1"),
    };
    let low = EncoderQubits {
        address: address[n1..].to_vec(),
        select: qubits(&layout, "select2"),
        work: qubits(&layout, "work2"),
    };
    let staging = qubits(&layout, "staging");
    let parity = qubits(&layout, "parity");
    let out = qubits(&layout, "out");

    // both encoders share stages
    let mut enc = Circuit::new(layout.clone());
    for g in high.copy_in().into_iter().chain(low.copy_in()) {
        enc.push(g)?;
    }
    let (mut s1, mut s2) = (
        high.parallel_stages(&sched1).into_iter(),
        low.parallel_stages(&sched2).into_iter(),
    );
    for _ in 0..sched1.stages.len().max(sched2.stages.len()) {
        for g in s1
            .next()
            .into_iter()
            .flatten()
            .chain(s2.next().into_iter().flatten())
        {
            enc.push(g)?;
        }
        enc.barrier();
    }
    for g in high.xor_network().into_iter().chain(low.xor_network()) {
        enc.push(g)?;
    }

    let mut stage_in = Circuit::new(layout.clone());
    for j in 0..big1 {
        let targets: Vec<Qubit> = (0..big2)
            .flat_map(|k| (0..l).map(move |t| (k, t)))
            .filter(|&(k, t)| cfg.table[j * big2 + k] >> t & 1 == 1)
            .map(|(k, t)| staging[k * l + t])
            .collect();
        if !targets.is_empty() {
            stage_in.push(Gate::fanout(high.select[j], targets))?;
        }
    }

    let mut read = Circuit::new(layout.clone());
    let mut read_pairs = PairMarks::new();
    let ctrl = |k: usize, t: usize| {
        if t == 0 {
            low.select[k]
        } else {
            low.work[k * (l - 1) + t - 1]
        }
    };
    let fan: Vec<Gate> = if l > 1 {
        (0..big2)
            .map(|k| Gate::fanout(low.select[k], (1..l).map(|t| ctrl(k, t)).collect()))
            .collect()
    } else {
        Vec::new()
    };
    let cells = || (0..big2).flat_map(|k| (0..l).map(move |t| (k, t)));
    for g in &fan {
        read.push(g.clone())?;
    }
    let first = read.len();
    for (k, t) in cells() {
        read.push(Gate::toffoli(
            ctrl(k, t),
            staging[k * l + t],
            parity[k * l + t],
        ))?;
    }
    read.barrier();
    for (k, t) in cells() {
        read.push(Gate::cnot(parity[k * l + t], out[t]))?;
    }
    for (i, (k, t)) in cells().enumerate() {
        let u = read.push(Gate::toffoli(
            ctrl(k, t),
            staging[k * l + t],
            parity[k * l + t],
        ))?;
        read_pairs.push(first + i, u);
    }
    for g in fan {
        read.push(g)?;
    }

    let body = enc.concat(&stage_in)?.concat(&read)?;
    let circuit = body.concat(&stage_in)?.concat(&enc.inverse())?;
    let total = circuit.len();
    let mut pairs = read_pairs.shifted(enc.len() + stage_in.len());
    for (i, g) in enc.gates().iter().enumerate() {
        if g.is_non_clifford() {
            pairs.push(i, total - 1 - i);
        }
    }
    Ok(QlutCircuit {
        config: cfg.clone(),
        circuit,
        pairs,
    })
}
