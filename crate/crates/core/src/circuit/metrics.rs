//! Logical resource metering.
//!
//! Toffoli-depth is read from stage barriers when a circuit has them and from
//! ASAP layering otherwise. In both cases two non-Clifford gates may share a
//! stage only if they touch disjoint qubits. T costs are never stored on gates;
//! they come from a [`ToffoliDecomp`] policy at measurement time.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitError, Gate, GateKind, PairMarks};

/// How a Toffoli is lowered to Clifford+T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompPolicy {
    /// Logical-AND gadget: 4 T, T-depth 2, measurement-based uncompute with no T.
    AndGadget,
    /// 7 T in a single T layer, using 4 extra ancillae.
    UnitDepth,
}

impl fmt::Display for DecompPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecompPolicy::AndGadget => "and-gadget",
            DecompPolicy::UnitDepth => "unit-depth",
        })
    }
}

impl FromStr for DecompPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "and-gadget" => Ok(DecompPolicy::AndGadget),
            "unit-depth" => Ok(DecompPolicy::UnitDepth),
            other => Err(format!("unknown decomposition {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToffoliDecomp {
    pub policy: DecompPolicy,
    pub t_cost: u64,
    pub t_depth_cost: u64,
    pub extra_ancillae: u64,
    /// The uncompute member of a marked pair costs no T gates.
    pub uncompute_free: bool,
}

impl ToffoliDecomp {
    pub const AND_GADGET: ToffoliDecomp = ToffoliDecomp {
        policy: DecompPolicy::AndGadget,
        t_cost: 4,
        t_depth_cost: 2,
        extra_ancillae: 0,
        uncompute_free: true,
    };

    pub const UNIT_DEPTH: ToffoliDecomp = ToffoliDecomp {
        policy: DecompPolicy::UnitDepth,
        t_cost: 7,
        t_depth_cost: 1,
        extra_ancillae: 4,
        uncompute_free: false,
    };

    pub fn from_policy(policy: DecompPolicy) -> Self {
        match policy {
            DecompPolicy::AndGadget => Self::AND_GADGET,
            DecompPolicy::UnitDepth => Self::UNIT_DEPTH,
        }
    }

    /// Toffoli-equivalents of a gate: 1 for a Toffoli, `k - 1` for a k-control
    /// CKX (ladder decomposition), 0 for Cliffords.
    fn toffoli_equivalents(gate: &Gate) -> u64 {
        match gate.kind() {
            GateKind::Toffoli => 1,
            GateKind::Ckx => gate.controls().len() as u64 - 1,
            _ => 0,
        }
    }

    pub fn gate_t_count(&self, gate: &Gate, is_uncompute: bool) -> u64 {
        if is_uncompute && self.uncompute_free {
            return 0;
        }
        Self::toffoli_equivalents(gate) * self.t_cost
    }

    pub fn gate_t_depth(&self, gate: &Gate, is_uncompute: bool) -> u64 {
        if is_uncompute && self.uncompute_free {
            return 0;
        }
        Self::toffoli_equivalents(gate) * self.t_depth_cost
    }
}

impl Default for ToffoliDecomp {
    fn default() -> Self {
        Self::AND_GADGET
    }
}

/// Logical counts of (part of) a circuit under one decomposition policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceReport {
    pub toffoli_count: u64,
    pub toffoli_pair_count: u64,
    /// Toffolis with each compute/uncompute pair counted once.
    pub toffoli_net: u64,
    pub toffoli_depth: u64,
    /// Stages holding at least one Toffoli that is not an uncompute member.
    pub toffoli_depth_compute: u64,
    pub ckx_count: u64,
    /// Multi-target CNOTs count as one.
    pub cnot_count_logical: u64,
    pub cnot_count_expanded: u64,
    pub x_count: u64,
    pub cz_count: u64,
    pub t_count: u64,
    pub t_depth: u64,
    pub qubit_count: u64,
    /// Ancillae the decomposition itself needs, sized for the widest stage.
    pub decomp_extra_ancillae: u64,
}

/// Tracks, per qubit, the last non-Clifford layer it depends on. Clifford gates
/// do not open layers but tie the layers of the qubits they touch together.
#[derive(Debug, Clone)]
pub(crate) struct LevelTracker {
    level: Vec<u32>,
}

impl LevelTracker {
    pub(crate) fn new(num_qubits: usize) -> Self {
        Self {
            level: vec![0; num_qubits],
        }
    }

    pub(crate) fn level(&self, q: super::Qubit) -> u32 {
        self.level[q.index()]
    }

    /// Applies `gate`; returns its 1-based layer if it is non-Clifford.
    pub(crate) fn apply(&mut self, gate: &Gate) -> Option<u32> {
        let base = gate
            .qubits()
            .map(|q| self.level[q.index()])
            .max()
            .unwrap_or(0);
        let lv = if gate.is_non_clifford() {
            base + 1
        } else {
            base
        };
        for q in gate.qubits() {
            self.level[q.index()] = lv;
        }
        gate.is_non_clifford().then_some(lv)
    }
}

/// Stage id for every gate: the barrier segment when marks exist, otherwise
/// the ASAP layer (Clifford gates get the layer they were pulled to).
fn gate_stages(c: &Circuit) -> Vec<usize> {
    if c.has_stage_marks() {
        let mut out = vec![0; c.len()];
        for (s, r) in c.stages().into_iter().enumerate() {
            out[r].iter_mut().for_each(|x| *x = s);
        }
        out
    } else {
        asap_stages(c)
    }
}

fn asap_stages(c: &Circuit) -> Vec<usize> {
    let mut tracker = LevelTracker::new(c.num_qubits());
    c.gates()
        .iter()
        .map(|g| {
            tracker.apply(g);
            g.qubits().map(|q| tracker.level(q)).max().unwrap_or(0) as usize
        })
        .collect()
}

/// Toffoli-depth ignoring any barriers: the optimal layering for the given gate order.
pub fn asap_toffoli_depth(c: &Circuit) -> u64 {
    let mut tracker = LevelTracker::new(c.num_qubits());
    c.gates()
        .iter()
        .filter_map(|g| tracker.apply(g))
        .max()
        .unwrap_or(0) as u64
}

/// Number of stages containing a Toffoli or CKX.
pub fn toffoli_depth(c: &Circuit) -> u64 {
    let stages = gate_stages(c);
    let mut seen: Vec<usize> = c
        .gates()
        .iter()
        .zip(&stages)
        .filter(|(g, _)| g.is_non_clifford())
        .map(|(_, &s)| s)
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len() as u64
}

pub fn measure(
    c: &Circuit,
    decomp: &ToffoliDecomp,
    pairs: &PairMarks,
) -> Result<ResourceReport, CircuitError> {
    measure_sections(c, decomp, pairs, std::slice::from_ref(&(0..c.len())))
}

#[derive(Default)]
struct StageStats {
    non_clifford: u64,
    compute: bool,
    t_depth: u64,
}

/// Like [`measure`], restricted to the gates inside `sections`. Stages are
/// still determined over the whole circuit.
pub fn measure_sections(
    c: &Circuit,
    decomp: &ToffoliDecomp,
    pairs: &PairMarks,
    sections: &[Range<usize>],
) -> Result<ResourceReport, CircuitError> {
    pairs.validate(c)?;
    let uncompute = pairs.uncompute_flags(c.len());
    let stages = gate_stages(c);
    let mut included = vec![false; c.len()];
    for r in sections {
        included[r.start.min(c.len())..r.end.min(c.len())]
            .iter_mut()
            .for_each(|x| *x = true);
    }

    let mut rep = ResourceReport {
        qubit_count: c.num_qubits() as u64,
        ..Default::default()
    };
    let mut per_stage: BTreeMap<usize, StageStats> = BTreeMap::new();
    for (i, g) in c.gates().iter().enumerate().filter(|(i, _)| included[*i]) {
        match g.kind() {
            GateKind::X => rep.x_count += 1,
            GateKind::Cnot => {
                rep.cnot_count_logical += 1;
                rep.cnot_count_expanded += 1;
            }
            GateKind::MultiTargetCnot => {
                rep.cnot_count_logical += 1;
                rep.cnot_count_expanded += g.targets().len() as u64;
            }
            GateKind::Cz => rep.cz_count += 1,
            GateKind::Toffoli => rep.toffoli_count += 1,
            GateKind::Ckx => rep.ckx_count += 1,
        }
        if g.is_non_clifford() {
            if uncompute[i] {
                rep.toffoli_pair_count += 1;
            }
            rep.t_count += decomp.gate_t_count(g, uncompute[i]);
            let st = per_stage.entry(stages[i]).or_default();
            st.non_clifford += 1;
            st.compute |= !uncompute[i];
            st.t_depth = st.t_depth.max(decomp.gate_t_depth(g, uncompute[i]));
        }
    }
    rep.toffoli_net = rep.toffoli_count + rep.ckx_count - rep.toffoli_pair_count;
    rep.toffoli_depth = per_stage.len() as u64;
    rep.toffoli_depth_compute = per_stage.values().filter(|s| s.compute).count() as u64;
    rep.t_depth = per_stage.values().map(|s| s.t_depth).sum();
    let widest = per_stage
        .values()
        .map(|s| s.non_clifford)
        .max()
        .unwrap_or(0);
    rep.decomp_extra_ancillae = decomp.extra_ancillae * widest;
    Ok(rep)
}

impl ResourceReport {
    /// Field-wise sum of the count fields (depths and qubits excluded).
    pub fn add_counts(&self, other: &ResourceReport) -> ResourceReport {
        ResourceReport {
            toffoli_count: self.toffoli_count + other.toffoli_count,
            toffoli_pair_count: self.toffoli_pair_count + other.toffoli_pair_count,
            toffoli_net: self.toffoli_net + other.toffoli_net,
            ckx_count: self.ckx_count + other.ckx_count,
            cnot_count_logical: self.cnot_count_logical + other.cnot_count_logical,
            cnot_count_expanded: self.cnot_count_expanded + other.cnot_count_expanded,
            x_count: self.x_count + other.x_count,
            cz_count: self.cz_count + other.cz_count,
            t_count: self.t_count + other.t_count,
            ..*self
        }
    }
}
