//! Logical-to-physical cost pipeline for a surface-code implementation:
//! T budgets, 15-to-1 distillation planning, factory footprints and the
//! Clifford code distance.

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{ResourceReport, ToffoliDecomp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("T-depth must be at least 1")]
    ZeroDepth,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("target error {p_out:e} is not reachable within {max} rounds from p_in = {p_in:e}")]
    Unreachable { p_out: f64, p_in: f64, max: u32 },
    #[error("{given} distances given for a {rounds}-round plan")]
    Distances { given: usize, rounds: u32 },
    #[error("no code distance up to {0} meets the error budget")]
    DistanceCap(u32),
    #[error("address size {0} is out of range (2..=60)")]
    AddressBits(u32),
}

pub const MAX_ROUNDS: u32 = 6;
const MAX_DISTANCE: u32 = 999;
/// Output states of one 15-to-1 round take 16 logical qubits; each extra
/// round multiplies the inputs by 15.
const TOP_LOGICAL: u64 = 16;
const INPUTS_PER_OUTPUT: u64 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfaceParams {
    pub p_in: f64,
    pub p_g: f64,
    pub t_cycle: f64,
    pub threshold_const: f64,
    pub qubit_factor: f64,
    pub cycles_per_d: f64,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        Self {
            p_in: 1e-4,
            p_g: 1e-5,
            t_cycle: 200e-9,
            threshold_const: 0.0125,
            qubit_factor: 3.125,
            cycles_per_d: 10.0,
        }
    }
}

impl SurfaceParams {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let fields = [
            ("p_in", self.p_in),
            ("p_g", self.p_g),
            ("t_cycle", self.t_cycle),
            ("threshold_const", self.threshold_const),
            ("qubit_factor", self.qubit_factor),
            ("cycles_per_d", self.cycles_per_d),
        ];
        match fields
            .iter()
            .find(|(_, v)| v.is_nan() || *v <= 0.0 || !v.is_finite())
        {
            Some((name, _)) => Err(EstimateError::NonPositive(name)),
            None => Ok(()),
        }
    }
}

/// How per-round code distances are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DistanceRule {
    /// `[10, 5]` for the default parameters with two rounds, otherwise
    /// [`DistanceRule::Reconstructed`].
    #[default]
    PaperProfile,
    /// Smallest `d` with `192 d (p_g / threshold)^((d+1)/2)` below the round
    /// budget; budgets run `p_out`, then `(b / 35)^(1/3)` downward.
    Reconstructed,
    /// Top-first distances supplied by the caller.
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistillationPlan {
    pub rounds: u32,
    /// Top round first.
    pub distances: Vec<u32>,
    /// Logical qubits per round, top first: 16, 240, ...
    pub logical_qubits: Vec<u64>,
}

/// Error after `rounds` rounds of `e -> 35 e^3`, as a natural log.
fn ln_error_after(p_in: f64, rounds: u32) -> f64 {
    let pow = 3f64.powi(rounds as i32);
    (pow - 1.0) / 2.0 * 35f64.ln() + pow * p_in.ln()
}

/// Smallest round count whose output error is below `p_out` (at least 1).
pub fn distillation_rounds(p_in: f64, p_out: f64) -> Result<u32, EstimateError> {
    (1..=MAX_ROUNDS)
        .find(|&r| ln_error_after(p_in, r) < p_out.ln())
        .or_else(|| (p_out >= p_in).then_some(1))
        .ok_or(EstimateError::Unreachable {
            p_out,
            p_in,
            max: MAX_ROUNDS,
        })
}

fn smallest_distance(holds: impl FnMut(&u32) -> bool) -> Result<u32, EstimateError> {
    (1..=MAX_DISTANCE)
        .find(holds)
        .ok_or(EstimateError::DistanceCap(MAX_DISTANCE))
}

fn reconstructed_distances(
    params: &SurfaceParams,
    p_out: f64,
    rounds: u32,
) -> Result<Vec<u32>, EstimateError> {
    let ratio = params.p_g / params.threshold_const;
    let mut budget = p_out;
    let mut out = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let d = smallest_distance(|&d| {
            192.0 * f64::from(d) * ratio.powf(f64::from(d + 1) / 2.0) < budget
        })?;
        out.push(d);
        budget = (budget / 35.0).cbrt();
    }
    Ok(out)
}

pub fn plan_distillation(
    params: &SurfaceParams,
    p_out: f64,
    rule: &DistanceRule,
) -> Result<DistillationPlan, EstimateError> {
    params.validate()?;
    if p_out.is_nan() || p_out <= 0.0 {
        return Err(EstimateError::NonPositive("p_out"));
    }
    let rounds = distillation_rounds(params.p_in, p_out)?;
    let distances = match rule {
        DistanceRule::PaperProfile if rounds == 2 && *params == SurfaceParams::default() => {
            vec![10, 5]
        }
        DistanceRule::PaperProfile | DistanceRule::Reconstructed => {
            reconstructed_distances(params, p_out, rounds)?
        }
        DistanceRule::Explicit(d) => {
            if d.len() != rounds as usize {
                return Err(EstimateError::Distances {
                    given: d.len(),
                    rounds,
                });
            }
            if d.contains(&0) {
                return Err(EstimateError::NonPositive("distance"));
            }
            d.clone()
        }
    };
    let logical_qubits = (0..rounds)
        .map(|i| TOP_LOGICAL * INPUTS_PER_OUTPUT.pow(i))
        .collect();
    Ok(DistillationPlan {
        rounds,
        distances,
        logical_qubits,
    })
}

/// T-count and T-depth read off a measured report.
pub fn logical_costs(r: &ResourceReport) -> (u64, u64) {
    (r.t_count, r.t_depth)
}

/// Closed-form T budget of the parallel QRAM with depth-1 read-out:
/// `N - n - 1` encoding pairs and `l N` read-out pairs. Under AND gadgets
/// with `l = 1` this is `4(2N - n - 1)` T and T-depth `2(ceil log2 n + 1)`.
pub fn qram_logical_costs(
    n: u32,
    word_bits: u64,
    d: &ToffoliDecomp,
) -> Result<(f64, u64), EstimateError> {
    if !(2..=60).contains(&n) {
        return Err(EstimateError::AddressBits(n));
    }
    let big_n = 2f64.powi(n as i32);
    let per_pair = (d.t_cost * if d.uncompute_free { 1 } else { 2 }) as f64;
    let pairs = (big_n - f64::from(n) - 1.0) + word_bits as f64 * big_n;
    let stages = u64::from(ceil_log2(n));
    let compute_depth = (stages + 1) * d.t_depth_cost;
    let t_depth = if d.uncompute_free {
        compute_depth
    } else {
        2 * compute_depth - d.t_depth_cost
    };
    Ok((pairs * per_pair, t_depth))
}

fn ceil_log2(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}

/// `1 / t_count`.
pub fn required_pout(t_count: f64) -> f64 {
    1.0 / t_count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundFootprint {
    pub distance: u32,
    pub logical_qubits: u64,
    pub physical_per_logical: f64,
    /// Unrounded; display with [`f64::round`].
    pub footprint: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceReport {
    pub t_count: f64,
    pub t_depth: u64,
    pub p_out: f64,
    pub plan: DistillationPlan,
    pub rounds: Vec<RoundFootprint>,
    pub sigma: f64,
    pub pipeline_factor: u64,
    pub magic_states_per_layer: f64,
    pub distillation_qubits: f64,
    pub clifford_count: f64,
    pub clifford_distance: u32,
    pub logical_qubits: f64,
    pub clifford_qubits: f64,
    pub total_qubits: f64,
    pub wall_time: f64,
}

impl Serialize for SurfaceReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("t_count", &self.t_count)?;
        m.serialize_entry("t_depth", &self.t_depth)?;
        m.serialize_entry("p_out", &self.p_out)?;
        m.serialize_entry("rounds", &self.plan.rounds)?;
        m.serialize_entry("distances", &self.plan.distances)?;
        for (i, r) in self.rounds.iter().enumerate() {
            let k = i + 1;
            m.serialize_entry(&format!("logical_qubits_round_{k}"), &r.logical_qubits)?;
            m.serialize_entry(
                &format!("physical_per_logical_round_{k}"),
                &r.physical_per_logical,
            )?;
            m.serialize_entry(&format!("footprint_round_{k}"), &r.footprint.round())?;
            m.serialize_entry(&format!("sigma_{k}"), &r.sigma)?;
        }
        m.serialize_entry("sigma", &self.sigma)?;
        m.serialize_entry("pipeline_factor", &self.pipeline_factor)?;
        m.serialize_entry("magic_states_per_layer", &self.magic_states_per_layer)?;
        m.serialize_entry("distillation_qubits", &self.distillation_qubits)?;
        m.serialize_entry("clifford_count", &self.clifford_count)?;
        m.serialize_entry("clifford_distance", &self.clifford_distance)?;
        m.serialize_entry("logical_qubits", &self.logical_qubits)?;
        m.serialize_entry("clifford_qubits", &self.clifford_qubits)?;
        m.serialize_entry("total_qubits", &self.total_qubits)?;
        m.serialize_entry("wall_time", &self.wall_time)?;
        m.end()
    }
}

/// Smallest `d` with `(p_in / threshold)^((d+1)/2) < 1 / clifford_count`.
pub fn clifford_distance(
    params: &SurfaceParams,
    clifford_count: f64,
) -> Result<u32, EstimateError> {
    let ratio = params.p_in / params.threshold_const;
    let budget = 1.0 / clifford_count;
    smallest_distance(|&d| ratio.powf(f64::from(d + 1) / 2.0) < budget)
}

pub fn surface_estimate(
    params: &SurfaceParams,
    plan: &DistillationPlan,
    t_count: f64,
    t_depth: u64,
    clifford_count: f64,
    logical_qubits: f64,
) -> Result<SurfaceReport, EstimateError> {
    params.validate()?;
    if t_depth == 0 {
        return Err(EstimateError::ZeroDepth);
    }
    for (name, v) in [
        ("t_count", t_count),
        ("clifford_count", clifford_count),
        ("logical_qubits", logical_qubits),
    ] {
        if v.is_nan() || v <= 0.0 {
            return Err(EstimateError::NonPositive(name));
        }
    }
    if plan.distances.len() != plan.rounds as usize
        || plan.logical_qubits.len() != plan.rounds as usize
    {
        return Err(EstimateError::Distances {
            given: plan.distances.len(),
            rounds: plan.rounds,
        });
    }
    let rounds: Vec<RoundFootprint> = plan
        .distances
        .iter()
        .zip(&plan.logical_qubits)
        .map(|(&d, &lq)| {
            let per = params.qubit_factor * f64::from(d * d);
            RoundFootprint {
                distance: d,
                logical_qubits: lq,
                physical_per_logical: per,
                footprint: lq as f64 * per,
                sigma: params.cycles_per_d * f64::from(d),
            }
        })
        .collect();
    let sigma: f64 = rounds.iter().map(|r| r.sigma).sum();
    let bottom = rounds.last().map_or(0.0, |r| r.footprint);
    let weighted: f64 = rounds.iter().map(|r| r.sigma * r.footprint).sum();
    let pipeline_factor = ((sigma * bottom / weighted).round() as u64).max(1);
    let magic_states_per_layer = (t_count / t_depth as f64).ceil();
    let distillation_qubits = magic_states_per_layer / pipeline_factor as f64 * bottom;
    let cd = clifford_distance(params, clifford_count)?;
    let clifford_qubits = logical_qubits * params.qubit_factor * f64::from(cd * cd);
    Ok(SurfaceReport {
        t_count,
        t_depth,
        p_out: required_pout(t_count),
        plan: plan.clone(),
        rounds,
        sigma,
        pipeline_factor,
        magic_states_per_layer,
        distillation_qubits,
        clifford_count,
        clifford_distance: cd,
        logical_qubits,
        clifford_qubits,
        total_qubits: distillation_qubits + clifford_qubits,
        wall_time: t_depth as f64 * sigma * params.t_cycle,
    })
}

/// Full walkthrough for an `n`-bit parallel QRAM with one-bit words:
/// AND-gadget T budget, `7N` logical Cliffords and `2N` logical qubits.
pub fn estimate_qram(
    n: u32,
    params: &SurfaceParams,
    rule: &DistanceRule,
) -> Result<SurfaceReport, EstimateError> {
    let (t_count, t_depth) = qram_logical_costs(n, 1, &ToffoliDecomp::AND_GADGET)?;
    let big_n = 2f64.powi(n as i32);
    let plan = plan_distillation(params, required_pout(t_count), rule)?;
    surface_estimate(params, &plan, t_count, t_depth, 7.0 * big_n, 2.0 * big_n)
}

/// `log2(logical_qubits * t_depth)`.
pub fn rough_cost(logical_qubits: f64, t_depth: f64) -> f64 {
    (logical_qubits * t_depth).log2()
}

/// Polynomial-encoded over bucket-brigade cost ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratios {
    pub t_depth: f64,
    pub t_count: f64,
    pub qubits: f64,
}

/// `log2 n / n`, `(N - n - 1) / N` and `2N / 2N`.
pub fn compare_ratios(n: u32) -> Ratios {
    let nf = f64::from(n);
    let big_n = 2f64.powi(n as i32);
    let (ours_qubits, baseline_qubits) = (2.0 * big_n, 2.0 * big_n);
    Ratios {
        t_depth: nf.log2() / nf,
        t_count: (big_n - nf - 1.0) / big_n,
        qubits: ours_qubits / baseline_qubits,
    }
}
