//! QRAM built on polynomial-encoded select ancillae.
//!
//! Register conventions: `address[0]` holds `b_1`, the most significant address
//! bit. `select[j]` ends up holding the encoding polynomial of address `j`.
//! Word `j` occupies `memory[j*l .. (j+1)*l]` with bit `t` of the word in
//! `memory[j*l + t]`, read into `out[t]`.

mod schedule;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::metrics::LevelTracker;
use crate::circuit::{
    measure_sections, Circuit, CircuitError, Gate, PairMarks, Qubit, QubitLayout, ResourceReport,
    ToffoliDecomp,
};
use crate::polyenc::{low_mask, mask_to_index, subsets_of};

pub use schedule::{build_schedule, split_factors, MonomialSchedule, Product, Stage};

pub const MAX_ADDRESS_BITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QramError {
    #[error("address width {0} is outside 2..={MAX_ADDRESS_BITS}")]
    AddressBits(usize),
    #[error("word size must be at least 1")]
    WordBits,
    #[error("phase mode works on 1-bit words, got {0}")]
    PhaseWordBits(usize),
    #[error("parallel read-out applies to read and write modes only")]
    PhaseReadout,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QramMode {
    Read,
    Write,
    /// Phase tag `(-1)^memory[j]` on address `j`, for Grover oracles.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sequential,
    Parallel,
}

macro_rules! lowercase_enum {
    ($ty:ty { $($v:ident => $s:literal),* }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$ty>::$v => $s),* })
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($s => Ok(<$ty>::$v),)*
                    _ => Err(format!("unknown {} {s:?}", stringify!($ty))),
                }
            }
        }
    };
}

lowercase_enum!(QramMode { Read => "read", Write => "write", Phase => "phase" });
lowercase_enum!(Variant { Sequential => "sequential", Parallel => "parallel" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QramConfig {
    pub n: usize,
    pub word_bits: usize,
    pub mode: QramMode,
    pub variant: Variant,
    /// Copy each word into its own parity ancilla so the read/write stage has
    /// Toffoli-depth 1.
    pub parallel_readout: bool,
}

impl QramConfig {
    pub fn new(n: usize, word_bits: usize, mode: QramMode, variant: Variant) -> Self {
        Self {
            n,
            word_bits,
            mode,
            variant,
            parallel_readout: false,
        }
    }

    pub fn with_parallel_readout(mut self, on: bool) -> Self {
        self.parallel_readout = on;
        self
    }

    pub fn num_locations(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<(), QramError> {
        if !(2..=MAX_ADDRESS_BITS).contains(&self.n) {
            return Err(QramError::AddressBits(self.n));
        }
        if self.word_bits == 0 {
            return Err(QramError::WordBits);
        }
        if self.mode == QramMode::Phase {
            if self.word_bits != 1 {
                return Err(QramError::PhaseWordBits(self.word_bits));
            }
            if self.parallel_readout {
                return Err(QramError::PhaseReadout);
            }
        }
        Ok(())
    }

    /// Select copies the depth-1 read/write stage needs beyond the select
    /// ancillae themselves.
    fn readout_copies(&self) -> usize {
        if self.parallel_readout {
            (self.word_bits - 1) * self.num_locations()
        } else {
            0
        }
    }
}

/// Qubits an encoder works on. `address[0]` is the most significant bit and
/// `select[j]` is the ancilla for address `j`.
#[derive(Debug, Clone)]
pub(crate) struct EncoderQubits {
    pub address: Vec<Qubit>,
    pub select: Vec<Qubit>,
    pub work: Vec<Qubit>,
}

impl EncoderQubits {
    fn n(&self) -> usize {
        self.address.len()
    }

    fn select_of(&self, mask: u32) -> Qubit {
        self.select[mask_to_index(mask, self.n()) as usize]
    }

    /// Qubits already holding monomial `m`: the address qubit (for a single
    /// variable) and its select ancilla.
    fn homes(&self, m: u32) -> Vec<Qubit> {
        if m.count_ones() == 1 {
            vec![self.address[m.trailing_zeros() as usize], self.select_of(m)]
        } else {
            vec![self.select_of(m)]
        }
    }

    /// Step 1 prologue: copy each variable into its select ancilla.
    pub fn copy_in(&self) -> Vec<Gate> {
        (0..self.n())
            .map(|i| Gate::cnot(self.address[i], self.select_of(1 << i)))
            .collect()
    }

    /// Step 2: fold every monomial into the ancillae of its strict subsets,
    /// heaviest first, then add the constant term.
    pub fn xor_network(&self) -> Vec<Gate> {
        let n = self.n();
        let mut masks: Vec<u32> = (1..=low_mask(n)).collect();
        masks.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
        let mut gates = Vec::new();
        for m in masks {
            let mut subs: Vec<u32> = subsets_of(m).filter(|&s| s != m).collect();
            subs.sort_unstable();
            gates.extend(
                subs.into_iter()
                    .map(|s| Gate::cnot(self.select_of(m), self.select_of(s))),
            );
        }
        gates.push(Gate::x(self.select_of(0)));
        gates
    }

    /// Parallel Step 1 body: per stage, fan out the extra operand copies,
    /// apply the stage's Toffolis on pairwise disjoint qubits, then unmake
    /// the copies.
    pub fn parallel_stages(&self, schedule: &MonomialSchedule) -> Vec<Vec<Gate>> {
        assert!(
            schedule.work_demand() <= self.work.len(),
            "work pool too small"
        );
        schedule
            .stages
            .iter()
            .map(|stage| {
                let mut pools: std::collections::BTreeMap<u32, Vec<Qubit>> = Default::default();
                let mut fan = Vec::new();
                let mut next = 0;
                for (&m, &count) in &stage.copies {
                    let copies = self.work[next..next + count].to_vec();
                    next += count;
                    let homes = self.homes(m);
                    fan.push(Gate::fanout(homes[0], copies.clone()));
                    pools.insert(m, homes.into_iter().chain(copies).rev().collect());
                }
                let mut take = |m: u32| {
                    let pool = pools
                        .entry(m)
                        .or_insert_with(|| self.homes(m).into_iter().rev().collect());
                    pool.pop().expect("operand copies exhausted")
                };
                let toffolis: Vec<Gate> = stage
                    .products
                    .iter()
                    .map(|p| {
                        let a = take(p.left);
                        let b = take(p.right);
                        Gate::toffoli(a, b, self.select_of(p.product))
                    })
                    .collect();
                let mut gates = fan.clone();
                gates.extend(toffolis);
                gates.extend(fan);
                gates
            })
            .collect()
    }

    /// Sequential Step 1 body: one Toffoli per monomial, lightest first. A
    /// variable operand is read from whichever of its two homes is free
    /// earlier, which lets independent products overlap.
    pub fn sequential_products(&self, prologue: &[Gate], num_qubits: usize) -> Vec<Gate> {
        let n = self.n();
        let mut tracker = LevelTracker::new(num_qubits);
        prologue.iter().for_each(|g| {
            tracker.apply(g);
        });
        let mut masks: Vec<u32> = (0..=low_mask(n)).filter(|m| m.count_ones() >= 2).collect();
        masks.sort_by_key(|&m| (m.count_ones(), m));
        let mut gates = Vec::with_capacity(masks.len());
        for m in masks {
            let (left, right) = split_factors(m);
            let pick = |f: u32, tracker: &LevelTracker| {
                self.homes(f)
                    .into_iter()
                    .min_by_key(|&q| tracker.level(q))
                    .unwrap()
            };
            let a = pick(left, &tracker);
            let b = pick(right, &tracker);
            let g = Gate::toffoli(a, b, self.select_of(m));
            tracker.apply(&g);
            gates.push(g);
        }
        gates
    }
}

/// Gate index ranges of the three parts of a synthesized QRAM.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sections {
    pub encode: Range<usize>,
    pub io: Range<usize>,
    pub decode: Range<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QramCircuit {
    pub config: QramConfig,
    pub circuit: Circuit,
    pub pairs: PairMarks,
    pub sections: Sections,
    pub schedule: Option<MonomialSchedule>,
}

/// Resources split into the select-ancilla part (encode and decode) and the
/// read/write part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QramReport {
    pub core: ResourceReport,
    pub io: ResourceReport,
    pub total: ResourceReport,
    /// Address, select and work qubits; excludes memory, parity and output.
    pub core_qubits: u64,
    /// Toffoli-depth of the encode section alone.
    pub encode_toffoli_depth: u64,
}

impl QramCircuit {
    pub fn core_qubits(&self) -> usize {
        let l = self.circuit.layout();
        ["address", "select", "work"]
            .iter()
            .filter_map(|r| l.register(r))
            .map(|r| r.len())
            .sum()
    }

    pub fn report(&self, decomp: &ToffoliDecomp) -> Result<QramReport, CircuitError> {
        let s = &self.sections;
        let m = |r: &[Range<usize>]| measure_sections(&self.circuit, decomp, &self.pairs, r);
        Ok(QramReport {
            core: m(&[s.encode.clone(), s.decode.clone()])?,
            io: m(std::slice::from_ref(&s.io))?,
            total: m(std::slice::from_ref(&(0..self.circuit.len())))?,
            core_qubits: self.core_qubits() as u64,
            encode_toffoli_depth: m(std::slice::from_ref(&s.encode))?.toffoli_depth,
        })
    }
}

fn qram_layout(cfg: &QramConfig, work: usize) -> QubitLayout {
    let big_n = cfg.num_locations();
    let words = big_n * cfg.word_bits;
    let mut l = QubitLayout::new()
        .with("address", cfg.n)
        .with("select", big_n);
    if work > 0 {
        l = l.with("work", work);
    }
    l = l.with("memory", words);
    if cfg.parallel_readout {
        l = l.with("parity", words);
    }
    l.with("out", cfg.word_bits)
}

fn register(layout: &QubitLayout, name: &str) -> Vec<Qubit> {
    layout
        .register(name)
        .map(|r| r.qubits().collect())
        .unwrap_or_default()
}

fn encoder_qubits(layout: &QubitLayout) -> EncoderQubits {
    EncoderQubits {
        address: register(layout, "address"),
        select: register(layout, "select"),
        work: register(layout, "work"),
    }
}

/// Splits `gates` into ASAP layers on qubit conflicts, one barrier-delimited
/// stage per layer.
pub(crate) fn push_layered(c: &mut Circuit, gates: Vec<Gate>) -> Result<(), CircuitError> {
    let mut last = vec![0usize; c.num_qubits()];
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for g in gates {
        let lv = g.qubits().map(|q| last[q.index()]).max().unwrap_or(0);
        g.qubits().for_each(|q| last[q.index()] = lv + 1);
        if layers.len() <= lv {
            layers.resize_with(lv + 1, Vec::new);
        }
        layers[lv].push(g);
    }
    for layer in layers {
        for g in layer {
            c.push(g)?;
        }
        c.barrier();
    }
    Ok(())
}

/// Step 3 on a layout that already has select ancillae holding the encoding
/// polynomials. Returns the gates and their internal pair marks.
pub fn synth_io_stage(
    cfg: &QramConfig,
    layout: &QubitLayout,
) -> Result<(Circuit, PairMarks), QramError> {
    cfg.validate()?;
    let l = cfg.word_bits;
    let select = register(layout, "select");
    let memory = register(layout, "memory");
    let out = register(layout, "out");
    let mut c = Circuit::new(layout.clone());
    let mut pairs = PairMarks::new();
    let staged = cfg.variant == Variant::Parallel;

    if cfg.mode == QramMode::Phase {
        for j in 0..cfg.num_locations() {
            c.push(Gate::cz(select[j], memory[j]))?;
        }
        return Ok((c, pairs));
    }

    if !cfg.parallel_readout {
        let gates: Vec<Gate> = (0..cfg.num_locations())
            .flat_map(|j| (0..l).map(move |t| (j, t)))
            .map(|(j, t)| match cfg.mode {
                QramMode::Read => Gate::toffoli(select[j], memory[j * l + t], out[t]),
                _ => Gate::toffoli(select[j], out[t], memory[j * l + t]),
            })
            .collect();
        if staged {
            push_layered(&mut c, gates)?;
        } else {
            for g in gates {
                c.push(g)?;
            }
        }
        return Ok((c, pairs));
    }

    let parity = register(layout, "parity");
    let work = register(layout, "work");
    // control for word bit t of location j: the select ancilla or one of its copies
    let ctrl = |j: usize, t: usize| {
        if t == 0 {
            select[j]
        } else {
            work[j * (l - 1) + t - 1]
        }
    };
    let fan: Vec<Gate> = if l > 1 {
        (0..cfg.num_locations())
            .map(|j| Gate::fanout(select[j], (1..l).map(|t| ctrl(j, t)).collect()))
            .collect()
    } else {
        Vec::new()
    };
    let cells = || (0..cfg.num_locations()).flat_map(|j| (0..l).map(move |t| (j, t)));
    for g in &fan {
        c.push(g.clone())?;
    }
    match cfg.mode {
        QramMode::Read => {
            let first = c.len();
            for (j, t) in cells() {
                c.push(Gate::toffoli(
                    ctrl(j, t),
                    memory[j * l + t],
                    parity[j * l + t],
                ))?;
            }
            let count = c.len() - first;
            if staged {
                c.barrier();
            }
            for (j, t) in cells() {
                c.push(Gate::cnot(parity[j * l + t], out[t]))?;
            }
            for (k, (j, t)) in cells().enumerate() {
                let u = c.push(Gate::toffoli(
                    ctrl(j, t),
                    memory[j * l + t],
                    parity[j * l + t],
                ))?;
                pairs.push(first + k, u);
            }
            debug_assert_eq!(count, pairs.len());
        }
        QramMode::Write => {
            let spread: Vec<Gate> = (0..l)
                .map(|t| {
                    Gate::fanout(
                        out[t],
                        (0..cfg.num_locations())
                            .map(|j| parity[j * l + t])
                            .collect(),
                    )
                })
                .collect();
            for g in &spread {
                c.push(g.clone())?;
            }
            for (j, t) in cells() {
                c.push(Gate::toffoli(
                    ctrl(j, t),
                    parity[j * l + t],
                    memory[j * l + t],
                ))?;
            }
            if staged {
                c.barrier();
            }
            for g in spread {
                c.push(g)?;
            }
        }
        QramMode::Phase => unreachable!(),
    }
    for g in fan {
        c.push(g)?;
    }
    Ok((c, pairs))
}

fn synth(cfg: &QramConfig) -> Result<QramCircuit, QramError> {
    cfg.validate()?;
    let schedule = (cfg.variant == Variant::Parallel).then(|| build_schedule(cfg.n));
    let demand = schedule.as_ref().map_or(0, MonomialSchedule::work_demand);
    let layout = qram_layout(cfg, demand.max(cfg.readout_copies()));
    let q = encoder_qubits(&layout);

    let mut enc = Circuit::new(layout.clone());
    let prologue = q.copy_in();
    for g in &prologue {
        enc.push(g.clone())?;
    }
    match &schedule {
        Some(s) => {
            for stage in q.parallel_stages(s) {
                for g in stage {
                    enc.push(g)?;
                }
                enc.barrier();
            }
        }
        None => {
            for g in q.sequential_products(&prologue, layout.num_qubits()) {
                enc.push(g)?;
            }
        }
    }
    for g in q.xor_network() {
        enc.push(g)?;
    }

    let (io, io_pairs) = synth_io_stage(cfg, &layout)?;
    let circuit = enc.concat(&io)?.concat(&enc.inverse())?;
    let total = circuit.len();
    let mut pairs = io_pairs.shifted(enc.len());
    for (i, g) in enc.gates().iter().enumerate() {
        if g.is_non_clifford() {
            pairs.push(i, total - 1 - i);
        }
    }
    let sections = Sections {
        encode: 0..enc.len(),
        io: enc.len()..enc.len() + io.len(),
        decode: enc.len() + io.len()..total,
    };
    Ok(QramCircuit {
        config: *cfg,
        circuit,
        pairs,
        sections,
        schedule,
    })
}

/// Builds the circuit for `cfg`, sequential or parallel per `cfg.variant`.
pub fn synth_qram(cfg: &QramConfig) -> Result<QramCircuit, QramError> {
    synth(cfg)
}

pub fn synth_sequential(cfg: &QramConfig) -> Result<QramCircuit, QramError> {
    synth(&QramConfig {
        variant: Variant::Sequential,
        ..*cfg
    })
}

pub fn synth_parallel(cfg: &QramConfig) -> Result<QramCircuit, QramError> {
    synth(&QramConfig {
        variant: Variant::Parallel,
        ..*cfg
    })
}

/// Closed-form costs of the bucket-brigade QRAM used as the comparison
/// baseline: `N - 2` Toffoli pairs, `2N + n` qubits, Toffoli-depth `n`.
pub fn bucket_brigade_reference(n: u32) -> ResourceReport {
    let big_n = 1u64 << n;
    let pairs = big_n.saturating_sub(2);
    ResourceReport {
        toffoli_count: 2 * pairs,
        toffoli_pair_count: pairs,
        toffoli_net: pairs,
        toffoli_depth: u64::from(n),
        toffoli_depth_compute: u64::from(n),
        qubit_count: 2 * big_n + u64::from(n),
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{asap_toffoli_depth, toffoli_depth, GateKind};

    fn read(n: usize, variant: Variant) -> QramConfig {
        QramConfig::new(n, 1, QramMode::Read, variant)
    }

    #[test]
    fn n3_sequential_counts() {
        let q = synth_sequential(&read(3, Variant::Sequential)).unwrap();
        let r = q.report(&ToffoliDecomp::AND_GADGET).unwrap();
        assert_eq!(r.core.toffoli_pair_count, 4);
        assert_eq!(r.core.cnot_count_expanded, 2 * 22);
        assert_eq!(q.core_qubits(), 11);
        assert_eq!(r.core.t_count, 16);
        assert_eq!(
            q.report(&ToffoliDecomp::UNIT_DEPTH).unwrap().core.t_count,
            56
        );
        assert_eq!(r.io.toffoli_count, 8);
        // two overlapping product layers, as in the hand-drawn n = 3 circuit
        assert_eq!(r.encode_toffoli_depth, 2);
    }

    #[test]
    fn n4_parallel_depth_and_qubits() {
        let q = synth_parallel(&read(4, Variant::Parallel)).unwrap();
        let r = q.report(&ToffoliDecomp::AND_GADGET).unwrap();
        assert_eq!(r.encode_toffoli_depth, 2);
        assert!(q.core_qubits() <= 36);
        assert!(asap_toffoli_depth(&q.circuit) <= toffoli_depth(&q.circuit));
    }

    #[test]
    fn parallel_readout_has_unit_io_depth() {
        let cfg = read(3, Variant::Parallel).with_parallel_readout(true);
        let q = synth_qram(&cfg).unwrap();
        let r = q.report(&ToffoliDecomp::AND_GADGET).unwrap();
        assert_eq!(r.io.toffoli_depth_compute, 1);
        assert_eq!(r.io.toffoli_net, 8);
        for l in [2, 3] {
            let cfg = QramConfig {
                word_bits: l,
                ..cfg
            };
            let r = synth_qram(&cfg)
                .unwrap()
                .report(&ToffoliDecomp::AND_GADGET)
                .unwrap();
            assert_eq!(r.io.toffoli_depth_compute, 1, "l={l}");
        }
    }

    #[test]
    fn write_targets_memory() {
        let cfg = QramConfig::new(2, 2, QramMode::Write, Variant::Sequential);
        let q = synth_qram(&cfg).unwrap();
        let mem = q.circuit.layout().get("memory").unwrap().clone();
        let io = &q.circuit.gates()[q.sections.io.clone()];
        let tof: Vec<&Gate> = io
            .iter()
            .filter(|g| g.kind() == GateKind::Toffoli)
            .collect();
        assert_eq!(tof.len(), 8);
        assert!(tof.iter().all(|g| mem.contains(g.targets()[0])));
    }

    #[test]
    fn phase_mode_uses_cz_only() {
        let cfg = QramConfig::new(3, 1, QramMode::Phase, Variant::Parallel);
        let q = synth_qram(&cfg).unwrap();
        let r = q.report(&ToffoliDecomp::AND_GADGET).unwrap();
        assert_eq!((r.io.cz_count, r.io.toffoli_count), (8, 0));
        let bad = QramConfig {
            word_bits: 2,
            ..cfg
        };
        assert_eq!(synth_qram(&bad).unwrap_err(), QramError::PhaseWordBits(2));
    }

    #[test]
    fn address_cap() {
        assert_eq!(
            synth_qram(&read(13, Variant::Sequential)).unwrap_err(),
            QramError::AddressBits(13)
        );
        assert_eq!(
            synth_qram(&read(1, Variant::Sequential)).unwrap_err(),
            QramError::AddressBits(1)
        );
    }

    #[test]
    fn pairs_mirror_encode() {
        let q = synth_qram(&read(5, Variant::Parallel)).unwrap();
        q.pairs.validate(&q.circuit).unwrap();
        assert_eq!(q.pairs.len(), (1 << 5) - 5 - 1);
    }

    #[test]
    fn bucket_brigade_formulas() {
        let r = bucket_brigade_reference(3);
        assert_eq!(
            (r.toffoli_pair_count, r.qubit_count, r.toffoli_depth),
            (6, 19, 3)
        );
        assert_eq!(
            bucket_brigade_reference(36).toffoli_pair_count,
            (1u64 << 36) - 2
        );
        assert_eq!(bucket_brigade_reference(10).toffoli_depth, 10);
    }

    #[test]
    fn names_round_trip() {
        assert_eq!("parallel".parse::<Variant>().unwrap(), Variant::Parallel);
        assert_eq!(QramMode::Write.to_string(), "write");
        assert!("fast".parse::<Variant>().is_err());
    }
}
