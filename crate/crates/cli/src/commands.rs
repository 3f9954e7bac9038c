use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use polyqram::circuit::text::{export_qasm, export_text, parse_circuit};
use polyqram::circuit::{measure, Circuit, PairMarks, ToffoliDecomp};
use polyqram::estimate::{
    compare_ratios, plan_distillation, qram_logical_costs, required_pout, rough_cost,
    surface_estimate, DistanceRule, SurfaceParams,
};
use polyqram::qlut::{default_split, qlut_resources, synth_qlut, QlutConfig};
use polyqram::qram::{
    bucket_brigade_reference, synth_qram, QramConfig, QramMode, MAX_ADDRESS_BITS,
};
use polyqram::sim::{
    grover, verify_lookup, verify_phase, verify_read, verify_write, VerdictReport,
};
use polyqram::toffopt::{optimize, verify_equiv};
use polyqram::wordfile::{parse_bitstrings, parse_words};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::output::{emit, render, Inputs};
use crate::{
    CircuitFormat, CircuitOut, Cli, Command, DistanceRuleArg, EstimateArgs, GroverArgs,
    OptimizeArgs, Outcome, ReportKind, SplitArgs, SynthQlutArgs, SynthQramArgs, SynthTarget,
    VerifyCheck, VerifyEquivArgs, VerifyLookupArgs, VerifyQramArgs, VerifyWriteArgs, WordSource,
};

/// Bucket-brigade QRAM totals at 36 address bits, same surface-code parameters.
const BASELINE_N: u32 = 36;
const BASELINE_TOTAL_QUBITS: f64 = 1.5e15;
const BASELINE_WALL_TIME: f64 = 2.13e-3;

struct Run {
    inputs: Inputs,
    report: Value,
    outcome: Outcome,
}

impl Run {
    fn new() -> Self {
        Run {
            inputs: Inputs::default(),
            report: Value::Null,
            outcome: Outcome::Pass,
        }
    }

    fn finish(mut self, report: impl Serialize, outcome: Outcome) -> Result<Self> {
        self.report = serde_json::to_value(report)?;
        self.outcome = outcome;
        Ok(self)
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let r = Run::new();
    let (name, config, r) = match &cli.command {
        Command::Synth(SynthTarget::Qram(a)) => ("synth qram", json!(a), synth_qram_cmd(r, a)?),
        Command::Synth(SynthTarget::Qlut(a)) => ("synth qlut", json!(a), synth_qlut_cmd(r, a)?),
        Command::Verify(VerifyCheck::Read(a)) => (
            "verify read",
            json!(a),
            verify_qram_cmd(r, a, QramMode::Read, None)?,
        ),
        Command::Verify(VerifyCheck::Write(a)) => {
            ("verify write", json!(a), verify_write_cmd(r, a)?)
        }
        Command::Verify(VerifyCheck::Phase(a)) => (
            "verify phase",
            json!(a),
            verify_qram_cmd(r, a, QramMode::Phase, None)?,
        ),
        Command::Verify(VerifyCheck::Lookup(a)) => {
            ("verify lookup", json!(a), verify_lookup_cmd(r, a)?)
        }
        Command::Verify(VerifyCheck::Equiv(a)) => {
            ("verify equiv", json!(a), verify_equiv_cmd(r, a)?)
        }
        Command::Estimate(a) => ("estimate", json!(a), estimate_cmd(r, a)?),
        Command::Optimize(a) => ("optimize", json!(a), optimize_cmd(r, a)?),
        Command::Grover(a) => ("grover", json!(a), grover_cmd(r, a)?),
    };
    let manifest = r.inputs.into_manifest(name, &config)?;
    let text = render(&manifest, &r.report, cli.format)?;
    emit(&text, cli.out.as_ref())?;
    Ok(r.outcome)
}

fn outcome(v: &VerdictReport) -> Outcome {
    if v.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

#[derive(Serialize)]
struct CircuitSummary {
    path: String,
    format: CircuitFormat,
    sha256: String,
    qubits: usize,
    gates: usize,
}

fn write_circuit(
    out: &CircuitOut,
    c: &Circuit,
    pairs: &PairMarks,
) -> Result<Option<CircuitSummary>> {
    let Some(path) = &out.circuit_path else {
        return Ok(None);
    };
    let text = match out.circuit_format {
        CircuitFormat::Text => export_text(c, pairs),
        CircuitFormat::Qasm => export_qasm(c, pairs),
    };
    std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(Some(CircuitSummary {
        path: path.display().to_string(),
        format: out.circuit_format,
        sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
        qubits: c.num_qubits(),
        gates: c.len(),
    }))
}

fn read_circuit(inputs: &mut Inputs, path: &Path) -> Result<(Circuit, PairMarks)> {
    let src = inputs.read(path)?;
    let m = parse_circuit(&src).with_context(|| format!("cannot parse {}", path.display()))?;
    Ok((m.circuit, m.pairs))
}

/// Words from a file, or `count` seeded random words of `bits` bits.
fn load_words(
    inputs: &mut Inputs,
    src: &WordSource,
    count: usize,
    bits: usize,
) -> Result<Vec<u64>> {
    match &src.table {
        Some(path) => {
            let text = inputs.read(path)?;
            let words = parse_words(&text, bits, src.word_format)
                .with_context(|| path.display().to_string())?;
            ensure!(
                words.len() == count,
                "{} holds {} words, expected {count}",
                path.display(),
                words.len()
            );
            Ok(words)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(src.seed);
            Ok((0..count).map(|_| random_word(&mut rng, bits)).collect())
        }
    }
}

fn random_word(rng: &mut ChaCha8Rng, bits: usize) -> u64 {
    let w: u64 = rng.gen();
    if bits >= 64 {
        w
    } else {
        w & ((1 << bits) - 1)
    }
}

fn register_len(c: &Circuit, name: &str) -> Result<usize> {
    Ok(c.layout().get(name)?.len())
}

fn synth_qram_cmd(r: Run, a: &SynthQramArgs) -> Result<Run> {
    let cfg = QramConfig::new(a.n, a.word_bits, a.mode, a.variant)
        .with_parallel_readout(a.parallel_readout);
    let q = synth_qram(&cfg)?;
    let decomp = ToffoliDecomp::from_policy(a.decomp);
    let res = q.report(&decomp)?;
    let circuit = write_circuit(&a.circuit, &q.circuit, &q.pairs)?;
    let report = json!({
        "config": cfg,
        "decomp": decomp,
        "toffoli_pairs": res.core.toffoli_pair_count,
        "toffoli_depth": res.total.toffoli_depth,
        "encode_toffoli_depth": res.encode_toffoli_depth,
        "core_qubits": res.core_qubits,
        "t_count": res.total.t_count,
        "t_depth": res.total.t_depth,
        "resources": res,
        "circuit": circuit,
    });
    r.finish(report, Outcome::Pass)
}

fn resolve_split(s: &SplitArgs) -> Result<(usize, usize)> {
    let (n1, n2): (usize, usize) = match (s.n, s.n1, s.n2) {
        (_, Some(n1), Some(n2)) => {
            if let Some(n) = s.n {
                ensure!(n == n1 + n2, "-n {n} disagrees with --n1 {n1} --n2 {n2}");
            }
            (n1, n2)
        }
        (Some(n), None, None) => default_split(n),
        (Some(n), Some(n1), None) if n1 < n => (n1, n - n1),
        (Some(n), None, Some(n2)) if n2 < n => (n - n2, n2),
        _ => bail!("give -n, or both --n1 and --n2"),
    };
    ensure!(
        n1 > 0 && n2 > 0 && n1 + n2 <= MAX_ADDRESS_BITS,
        "split {n1}+{n2} needs both halves nonempty and at most {MAX_ADDRESS_BITS} bits in all"
    );
    Ok((n1, n2))
}

fn synth_qlut_cmd(mut r: Run, a: &SynthQlutArgs) -> Result<Run> {
    let (n1, n2) = resolve_split(&a.split)?;
    let l = a.split.word_bits;
    let table = load_words(&mut r.inputs, &a.words, 1 << (n1 + n2), l)?;
    let q = synth_qlut(&QlutConfig::new(n1, n2, l, table))?;
    let decomp = ToffoliDecomp::from_policy(a.decomp);
    let res = q.report(&decomp)?;
    let formula = qlut_resources(n1, n2, l);
    let circuit = write_circuit(&a.circuit, &q.circuit, &q.pairs)?;
    let report = json!({
        "n1": n1,
        "n2": n2,
        "word_bits": l,
        "decomp": decomp,
        "toffoli_count": res.measured.toffoli_count,
        "toffoli_depth": res.measured.toffoli_depth,
        "ancillae": res.measured.ancillae,
        "formula": formula,
        "matches_formula": res.measured == formula,
        "resources": res.report,
        "circuit": circuit,
    });
    r.finish(report, Outcome::Pass)
}

/// The circuit under test: parsed from a file, or synthesized from the flags.
fn qram_under_test(inputs: &mut Inputs, a: &VerifyQramArgs, mode: QramMode) -> Result<Circuit> {
    if let Some(path) = &a.circuit {
        return Ok(read_circuit(inputs, path)?.0);
    }
    let n = a.n.context("-n is required without --circuit")?;
    let cfg =
        QramConfig::new(n, a.word_bits, mode, a.variant).with_parallel_readout(a.parallel_readout);
    Ok(synth_qram(&cfg)?.circuit)
}

fn verify_qram_cmd(
    mut r: Run,
    a: &VerifyQramArgs,
    mode: QramMode,
    bus: Option<u64>,
) -> Result<Run> {
    let c = qram_under_test(&mut r.inputs, a, mode)?;
    let n = register_len(&c, "address")?;
    let words = register_len(&c, "memory")?;
    ensure!(n <= 20, "{n} address bits is too many to sweep");
    let bits = words >> n;
    ensure!(
        bits > 0 && bits << n == words,
        "memory register of {words} qubits does not hold 2^{n} words"
    );
    let memory = load_words(&mut r.inputs, &a.words, 1 << n, bits)?;
    let (verdict, bus) = match mode {
        QramMode::Read => (verify_read(&c, &memory)?, None),
        QramMode::Phase => (verify_phase(&c, &memory)?, None),
        QramMode::Write => {
            let bus = match bus {
                Some(b) => {
                    ensure!(
                        bits >= 64 || b >> bits == 0,
                        "bus word {b} does not fit in {bits} bits"
                    );
                    b
                }
                None => random_word(&mut ChaCha8Rng::seed_from_u64(a.words.seed ^ 0x5eed), bits),
            };
            (verify_write(&c, &memory, bus)?, Some(bus))
        }
    };
    let o = outcome(&verdict);
    let report = json!({ "mode": mode, "n": n, "word_bits": bits, "bus": bus, "verdict": verdict });
    r.finish(report, o)
}

fn verify_write_cmd(r: Run, a: &VerifyWriteArgs) -> Result<Run> {
    verify_qram_cmd(r, &a.common, QramMode::Write, a.bus)
}

fn verify_lookup_cmd(mut r: Run, a: &VerifyLookupArgs) -> Result<Run> {
    let (c, n, l) = match &a.circuit {
        Some(path) => {
            let (c, _) = read_circuit(&mut r.inputs, path)?;
            let (n, l) = (register_len(&c, "address")?, register_len(&c, "out")?);
            (c, n, l)
        }
        None => {
            let (n1, n2) = resolve_split(&a.split)?;
            let l = a.split.word_bits;
            let table = load_words(&mut r.inputs, &a.words, 1 << (n1 + n2), l)?;
            (
                synth_qlut(&QlutConfig::new(n1, n2, l, table))?.circuit,
                n1 + n2,
                l,
            )
        }
    };
    ensure!(n <= 20, "{n} address bits is too many to sweep");
    // A synthesized circuit already consumed the table; reading it again is
    // deterministic and yields the same words.
    let table = load_words(&mut r.inputs, &a.words, 1 << n, l)?;
    let verdict = verify_lookup(&c, &table)?;
    let o = outcome(&verdict);
    r.finish(json!({ "n": n, "word_bits": l, "verdict": verdict }), o)
}

fn read_spec(
    inputs: &mut Inputs,
    path: &Path,
    n: Option<usize>,
) -> Result<(Vec<polyqram::polyenc::BitString>, usize)> {
    let src = inputs.read(path)?;
    parse_bitstrings(&src, n).with_context(|| path.display().to_string())
}

fn verify_equiv_cmd(mut r: Run, a: &VerifyEquivArgs) -> Result<Run> {
    let (set, n) = read_spec(&mut r.inputs, &a.spec, a.n)?;
    let c = match &a.circuit {
        Some(path) => read_circuit(&mut r.inputs, path)?.0,
        None => optimize(&set, n)?.circuit.circuit,
    };
    let verdict = verify_equiv(&c, &set, n)?;
    let o = outcome(&verdict);
    r.finish(
        json!({ "n": n, "strings": set.len(), "verdict": verdict }),
        o,
    )
}

fn estimate_cmd(mut r: Run, a: &EstimateArgs) -> Result<Run> {
    if a.tdepth == Some(0) {
        bail!("--tdepth must be at least 1");
    }
    let params: SurfaceParams = match &a.params {
        Some(path) => {
            let src = r.inputs.read(path)?;
            serde_json::from_str(&src)
                .with_context(|| format!("cannot parse {}", path.display()))?
        }
        None => SurfaceParams::default(),
    };
    params.validate()?;
    let decomp = ToffoliDecomp::from_policy(a.decomp);
    let big_n = a.n.map(|n| 2f64.powi(n as i32));

    let (t_count, t_depth) = match (a.tcount, a.tdepth) {
        (Some(tc), Some(td)) => (tc, td),
        (None, None) => {
            let n = a.n.context("give -n, or --tcount with --tdepth")?;
            qram_logical_costs(n, a.word_bits, &decomp)?
        }
        _ => bail!("--tcount and --tdepth go together"),
    };
    let clifford_count = match (a.clifford_count, big_n) {
        (Some(c), _) => c,
        (None, Some(b)) => 7.0 * b,
        (None, None) => bail!("--clifford-count is required without -n"),
    };
    let logical_qubits = match (a.logical_qubits, big_n) {
        (Some(q), _) => q,
        (None, Some(b)) => 2.0 * b,
        (None, None) => bail!("--logical-qubits is required without -n"),
    };
    let rule = match (&a.distances, a.distance_rule) {
        (Some(d), _) => DistanceRule::Explicit(d.clone()),
        (None, DistanceRuleArg::Paper) => DistanceRule::PaperProfile,
        (None, DistanceRuleArg::Reconstructed) => DistanceRule::Reconstructed,
    };

    let mut report = serde_json::Map::new();
    if matches!(a.report, ReportKind::Surface | ReportKind::All) {
        let plan = plan_distillation(&params, required_pout(t_count), &rule)?;
        let s = surface_estimate(
            &params,
            &plan,
            t_count,
            t_depth,
            clifford_count,
            logical_qubits,
        )?;
        if a.n == Some(BASELINE_N) {
            report.insert(
                "comparison".into(),
                json!({
                    "baseline": "bucket brigade",
                    "baseline_total_qubits": BASELINE_TOTAL_QUBITS,
                    "baseline_wall_time": BASELINE_WALL_TIME,
                    "qubit_ratio": s.total_qubits / BASELINE_TOTAL_QUBITS,
                    "wall_time_ratio": s.wall_time / BASELINE_WALL_TIME,
                }),
            );
        }
        report.insert("surface".into(), serde_json::to_value(&s)?);
    }
    if matches!(a.report, ReportKind::Rough | ReportKind::All) {
        let mut rough = json!({
            "logical_qubits": logical_qubits,
            "t_depth": t_depth,
            "rough_cost": rough_cost(logical_qubits, t_depth as f64),
        });
        if let Some(n) = a.n {
            ensure!(n < 64, "-n {n} is too large for the baseline comparison");
            let bb = bucket_brigade_reference(n);
            let bb_depth = bb.toffoli_depth * decomp.t_depth_cost;
            rough["baseline"] = json!({
                "logical_qubits": bb.qubit_count,
                "t_depth": bb_depth,
                "rough_cost": rough_cost(bb.qubit_count as f64, bb_depth as f64),
            });
            rough["ratios"] = serde_json::to_value(compare_ratios(n))?;
        }
        report.insert("rough".into(), rough);
    }
    r.finish(Value::Object(report), Outcome::Pass)
}

fn optimize_cmd(mut r: Run, a: &OptimizeArgs) -> Result<Run> {
    let (set, n) = read_spec(&mut r.inputs, &a.spec, a.n)?;
    let res = optimize(&set, n)?;
    let circuit = write_circuit(&a.circuit, &res.circuit.circuit, &res.circuit.pairs)?;
    let measured = measure(
        &res.circuit.circuit,
        &ToffoliDecomp::AND_GADGET,
        &res.circuit.pairs,
    )?;
    let o = outcome(&res.verdict);
    let report = json!({
        "n": n,
        "strings": set.len(),
        "polynomial": res.polynomial,
        "factored": res.factored,
        "toffoli_count": res.toffoli_count,
        "baseline_toffoli_count": res.baseline_toffoli_count,
        "qubits": measured.qubit_count,
        "gates": res.circuit.circuit.len(),
        "verdict": res.verdict,
        "circuit": circuit,
    });
    r.finish(report, o)
}

fn grover_cmd(r: Run, a: &GroverArgs) -> Result<Run> {
    let mut marked = a.marked.clone();
    marked.sort_unstable();
    marked.dedup();
    ensure!((2..=12).contains(&a.n), "-n {} is outside 2..=12", a.n);
    let big_n = (1u64 << a.n) as f64;
    let k = marked.len() as f64;
    let iterations = a
        .iterations
        .unwrap_or_else(|| (std::f64::consts::FRAC_PI_4 * (big_n / k).sqrt()).floor() as usize);
    let p = grover(a.n, &marked, iterations)?;
    let p_marked: f64 = marked.iter().map(|&m| p[m as usize]).sum();
    let theta = (k / big_n).sqrt().asin();
    let expected = ((2 * iterations + 1) as f64 * theta).sin().powi(2);
    let per_address: serde_json::Map<String, Value> = marked
        .iter()
        .map(|&m| (m.to_string(), json!(p[m as usize])))
        .collect();
    let report = json!({
        "n": a.n,
        "marked": marked,
        "iterations": iterations,
        "p_marked": p_marked,
        "p_expected": expected,
        "p_per_marked": per_address,
    });
    r.finish(report, Outcome::Pass)
}
