//! Toffoli-count optimization for a group of multi-controlled NOTs that all
//! hit one target: the accepted bit strings become one XOR-summed encoding
//! polynomial, which is factored into products of linear polynomials. Each
//! binary product costs one Toffoli.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{
    measure, Circuit, CircuitError, Gate, PairMarks, Qubit, QubitLayout, ToffoliDecomp,
};
use crate::polyenc::{xor_sum, BitString, Gf2Polynomial, Monomial, PolyError};
use crate::sim::{verify_function, SimError, VerdictReport};

/// Largest input width accepted by [`spec_to_poly`].
pub const MAX_SPEC_BITS: usize = 20;
/// Up to this many variables the factoring search is exhaustive.
pub const EXHAUSTIVE_BITS: usize = 6;

pub fn spec_to_poly(set: &[BitString], n: usize) -> Result<Gf2Polynomial, PolyError> {
    if n > MAX_SPEC_BITS {
        return Err(PolyError::ExpansionTooLarge(n));
    }
    xor_sum(n, set)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorTree {
    /// Degree at most 1.
    Linear(Gf2Polynomial),
    Sum(Vec<FactorTree>),
    /// At least two factors.
    Product(Vec<FactorTree>),
}

impl FactorTree {
    /// Binary product applications, i.e. Toffolis.
    pub fn product_count(&self) -> u64 {
        match self {
            FactorTree::Linear(_) => 0,
            FactorTree::Sum(c) => c.iter().map(FactorTree::product_count).sum(),
            FactorTree::Product(c) => {
                c.len() as u64 - 1 + c.iter().map(FactorTree::product_count).sum::<u64>()
            }
        }
    }

    pub fn eval(&self, assignment: u32) -> bool {
        match self {
            FactorTree::Linear(p) => p.eval(assignment),
            FactorTree::Sum(c) => c.iter().fold(false, |acc, t| acc ^ t.eval(assignment)),
            FactorTree::Product(c) => c.iter().all(|t| t.eval(assignment)),
        }
    }

    pub fn to_polynomial(&self, n: usize) -> Gf2Polynomial {
        match self {
            FactorTree::Linear(p) => {
                Gf2Polynomial::from_monomials(n, p.monomials().iter().copied())
            }
            FactorTree::Sum(c) => c.iter().fold(Gf2Polynomial::zero(n), |acc, t| {
                acc.xor(&t.to_polynomial(n))
            }),
            FactorTree::Product(c) => c
                .iter()
                .fold(Gf2Polynomial::one(n), |acc, t| acc.mul(&t.to_polynomial(n))),
        }
    }

    fn single_var(&self) -> Option<usize> {
        match self {
            FactorTree::Linear(p) if p.len() == 1 && p.monomials()[0].weight() == 1 => {
                p.monomials()[0].indices().next()
            }
            _ => None,
        }
    }

    fn sum(parts: Vec<FactorTree>) -> FactorTree {
        let mut flat = Vec::new();
        for t in parts {
            match t {
                FactorTree::Sum(c) => flat.extend(c),
                FactorTree::Linear(p) if p.is_zero() => {}
                t => flat.push(t),
            }
        }
        match flat.len() {
            0 => FactorTree::Linear(Gf2Polynomial::zero(0)),
            1 => flat.pop().unwrap(),
            _ => FactorTree::Sum(flat),
        }
    }

    fn product(var: usize, n: usize, rest: FactorTree) -> FactorTree {
        let mut factors = vec![FactorTree::Linear(Gf2Polynomial::var(n, var))];
        match rest {
            FactorTree::Product(c) => factors.extend(c),
            t => factors.push(t),
        }
        FactorTree::Product(factors)
    }
}

impl fmt::Display for FactorTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorTree::Linear(p) => write!(f, "{p}"),
            FactorTree::Sum(c) => {
                for (i, t) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            FactorTree::Product(c) => {
                for t in c {
                    match t {
                        FactorTree::Linear(p) if p.len() == 1 => write!(f, "{t}")?,
                        _ => write!(f, "({t})")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Plan {
    cost: u64,
    tree: FactorTree,
}

/// `(linear part, nonlinear part)`.
fn split_linear(p: &Gf2Polynomial) -> (Gf2Polynomial, Gf2Polynomial) {
    let n = p.num_vars();
    let (lin, nl): (Vec<Monomial>, Vec<Monomial>) =
        p.monomials().iter().partition(|m| m.weight() <= 1);
    (
        Gf2Polynomial::from_monomials(n, lin),
        Gf2Polynomial::from_monomials(n, nl),
    )
}

/// `p = x_var * quotient + rest`, with a lone `x_var` folded into the
/// quotient as its constant term.
fn divide(p: &Gf2Polynomial, var: usize) -> (Gf2Polynomial, Gf2Polynomial) {
    let n = p.num_vars();
    let (lin, nl) = split_linear(p);
    let (mut q, r) = nl.divide_by_var(var);
    let mut rest = r.xor(&lin);
    let x = Gf2Polynomial::var(n, var);
    if lin.contains(Monomial::var(var)) {
        q = q.xor(&Gf2Polynomial::one(n));
        rest = rest.xor(&x);
    }
    (q, rest)
}

fn vars_of(m: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |b| m >> b & 1 == 1).map(|b| b + 1)
}

fn combine(var: usize, n: usize, q: Plan, rest: Plan) -> Plan {
    Plan {
        cost: 1 + q.cost + rest.cost,
        tree: FactorTree::sum(vec![rest.tree, FactorTree::product(var, n, q.tree)]),
    }
}

fn exhaustive(p: &Gf2Polynomial, memo: &mut HashMap<Gf2Polynomial, Plan>) -> Plan {
    if p.is_linear() {
        return Plan {
            cost: 0,
            tree: FactorTree::Linear(p.clone()),
        };
    }
    if let Some(hit) = memo.get(p) {
        return hit.clone();
    }
    let nl_support = split_linear(p).1.support();
    let mut best: Option<Plan> = None;
    for var in vars_of(nl_support) {
        let (q, rest) = divide(p, var);
        let cand = combine(
            var,
            p.num_vars(),
            exhaustive(&q, memo),
            exhaustive(&rest, memo),
        );
        if best.as_ref().is_none_or(|b| cand.cost < b.cost) {
            best = Some(cand);
        }
    }
    let best = best.expect("nonlinear polynomial has a variable");
    memo.insert(p.clone(), best.clone());
    best
}

/// Top level of the exhaustive search, one branch per first divisor.
fn exhaustive_parallel(p: &Gf2Polynomial) -> Plan {
    if p.is_linear() {
        return Plan {
            cost: 0,
            tree: FactorTree::Linear(p.clone()),
        };
    }
    let vars: Vec<usize> = vars_of(split_linear(p).1.support()).collect();
    vars.par_iter()
        .map(|&var| {
            let mut memo = HashMap::new();
            let (q, rest) = divide(p, var);
            combine(
                var,
                p.num_vars(),
                exhaustive(&q, &mut memo),
                exhaustive(&rest, &mut memo),
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("nonlinear polynomial has a variable")
}

/// Divides by the variable in the most nonlinear monomials.
fn greedy(p: &Gf2Polynomial) -> Plan {
    if p.is_linear() {
        return Plan {
            cost: 0,
            tree: FactorTree::Linear(p.clone()),
        };
    }
    let (_, nl) = split_linear(p);
    let var = vars_of(nl.support())
        .max_by_key(|&v| {
            (
                nl.monomials()
                    .iter()
                    .filter(|m| Monomial::var(v).divides(**m))
                    .count(),
                std::cmp::Reverse(v),
            )
        })
        .expect("nonlinear polynomial has a variable");
    let (q, rest) = divide(p, var);
    combine(var, p.num_vars(), greedy(&q), greedy(&rest))
}

/// Every nonlinear monomial as its own product of variables.
fn monomial_sum(p: &Gf2Polynomial) -> Plan {
    let n = p.num_vars();
    let (lin, nl) = split_linear(p);
    let mut parts = vec![FactorTree::Linear(lin)];
    let mut cost = 0;
    for m in nl.monomials() {
        cost += u64::from(m.weight()) - 1;
        parts.push(FactorTree::Product(
            vars_of(m.mask())
                .map(|v| FactorTree::Linear(Gf2Polynomial::var(n, v)))
                .collect(),
        ));
    }
    Plan {
        cost,
        tree: FactorTree::sum(parts),
    }
}

/// Factors `p` into sums of products of linear polynomials, never using more
/// products than the plain sum of monomials.
pub fn factor_linear(p: &Gf2Polynomial) -> FactorTree {
    let searched = if p.num_vars() <= EXHAUSTIVE_BITS {
        exhaustive_parallel(p)
    } else {
        greedy(p)
    };
    let plain = monomial_sum(p);
    let best = if plain.cost < searched.cost {
        plain
    } else {
        searched
    };
    match best.tree {
        FactorTree::Linear(q) if q.num_vars() != p.num_vars() => FactorTree::Linear(
            Gf2Polynomial::from_monomials(p.num_vars(), q.monomials().iter().copied()),
        ),
        t => t,
    }
}

/// One product of encoding factors per string: `n - 1` products each.
fn string_products(set: &[BitString], n: usize) -> Plan {
    let parts = set
        .iter()
        .map(|b| {
            let factors: Vec<FactorTree> = (1..=n)
                .map(|i| {
                    let x = Gf2Polynomial::var(n, i);
                    FactorTree::Linear(if b.bit(i) {
                        x
                    } else {
                        x.xor(&Gf2Polynomial::one(n))
                    })
                })
                .collect();
            if factors.len() == 1 {
                factors.into_iter().next().unwrap()
            } else {
                FactorTree::Product(factors)
            }
        })
        .collect();
    Plan {
        cost: set.len() as u64 * n.saturating_sub(1) as u64,
        tree: FactorTree::sum(parts),
    }
}

/// [`factor_linear`] on the XOR sum of `set`, falling back to one product
/// per string when that is cheaper, so the result never exceeds
/// [`ckx_baseline`].
pub fn factor_spec(set: &[BitString], n: usize) -> Result<FactorTree, PolyError> {
    let tree = factor_linear(&spec_to_poly(set, n)?);
    let per_string = string_products(set, n);
    Ok(if per_string.cost < tree.product_count() {
        per_string.tree
    } else {
        tree
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wire {
    Input(usize),
    Work(usize),
    Out,
}

#[derive(Debug, Clone)]
struct WireGate {
    controls: Vec<Wire>,
    target: Wire,
}

#[derive(Default)]
struct Emitter {
    gates: Vec<WireGate>,
    pairs: Vec<(usize, usize)>,
    paired: HashSet<usize>,
    work: usize,
}

impl Emitter {
    fn push(&mut self, controls: Vec<Wire>, target: Wire) {
        self.gates.push(WireGate { controls, target });
    }

    fn fresh(&mut self) -> Wire {
        self.work += 1;
        Wire::Work(self.work - 1)
    }

    fn pair(&mut self, a: usize, b: usize) {
        self.pairs.push((a, b));
        self.paired.insert(a);
        self.paired.insert(b);
    }

    /// Appends the gates of `range` in reverse. Toffolis left unpaired
    /// inside the range are paired with their mirror images.
    fn mirror(&mut self, range: std::ops::Range<usize>) {
        let start = self.gates.len();
        let at = |i: usize| start + (range.end - 1 - i);
        for i in range.clone().rev() {
            let g = self.gates[i].clone();
            self.gates.push(g);
        }
        let inner: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .copied()
            .filter(|&(a, b)| range.contains(&a) && range.contains(&b))
            .collect();
        for (a, b) in inner {
            self.pair(at(b), at(a));
        }
        for i in range.clone() {
            if self.gates[i].controls.len() == 2 && !self.paired.contains(&i) {
                self.pair(i, at(i));
            }
        }
    }

    /// XORs the value of `t` into `target`. Work qubits used inside a
    /// product are cleaned by one mirror at the outermost product only, so
    /// nested factors are never recomputed.
    fn emit(&mut self, t: &FactorTree, target: Wire, clean: bool) {
        match t {
            FactorTree::Linear(p) => {
                for m in p.monomials() {
                    match m.indices().next() {
                        None => self.push(vec![], target),
                        Some(v) => self.push(vec![Wire::Input(v - 1)], target),
                    }
                }
            }
            FactorTree::Sum(c) => c.iter().for_each(|s| self.emit(s, target, clean)),
            FactorTree::Product(c) => {
                let start = self.gates.len();
                let operands: Vec<Wire> = c
                    .iter()
                    .map(|f| match f.single_var() {
                        Some(v) => Wire::Input(v - 1),
                        None => {
                            let w = self.fresh();
                            self.emit(f, w, false);
                            w
                        }
                    })
                    .collect();
                let mut acc = operands[0];
                for &op in &operands[1..operands.len() - 1] {
                    let w = self.fresh();
                    self.push(vec![acc, op], w);
                    acc = w;
                }
                let end = self.gates.len();
                self.push(vec![acc, operands[operands.len() - 1]], target);
                if clean {
                    self.mirror(start..end);
                }
            }
        }
    }
}

/// Optimized circuit with its compute/uncompute pairs.
#[derive(Debug, Clone, Serialize)]
pub struct OptCircuit {
    pub circuit: Circuit,
    pub pairs: PairMarks,
}

/// Builds `out ^= tree(input)` over registers `input[n]`, `work` and `out[1]`.
/// Every work qubit is returned to 0.
pub fn tree_to_circuit(t: &FactorTree, n: usize) -> Result<OptCircuit, CircuitError> {
    let mut e = Emitter::default();
    e.emit(t, Wire::Out, true);
    let mut layout = QubitLayout::new().with("input", n);
    if e.work > 0 {
        layout = layout.with("work", e.work);
    }
    layout = layout.with("out", 1);
    let input = layout.register("input").cloned();
    let work = layout.register("work").cloned();
    let out = layout.qubit("out", 0)?;
    let wire = |w: Wire| -> Result<Qubit, CircuitError> {
        match w {
            Wire::Input(i) => input
                .as_ref()
                .filter(|r| i < r.len())
                .map(|r| r.qubit(i))
                .ok_or(CircuitError::IndexOutOfRange {
                    register: "input".into(),
                    index: i,
                    len: n,
                }),
            Wire::Work(i) => Ok(work.as_ref().expect("work register allocated").qubit(i)),
            Wire::Out => Ok(out),
        }
    };
    let mut c = Circuit::new(layout.clone());
    for g in &e.gates {
        let controls = g
            .controls
            .iter()
            .map(|&w| wire(w))
            .collect::<Result<Vec<_>, _>>()?;
        c.push(Gate::mcx(controls, wire(g.target)?))?;
    }
    let mut pairs = PairMarks::new();
    for (a, b) in e.pairs {
        pairs.push(a, b);
    }
    Ok(OptCircuit { circuit: c, pairs })
}

/// One `C^n X` per accepted string, with X gates on the 0-controls.
pub fn ckx_cascade(set: &[BitString], n: usize) -> Result<Circuit, CircuitError> {
    let layout = QubitLayout::new().with("input", n).with("out", 1);
    let input: Vec<Qubit> = layout
        .get("input")
        .map(|r| r.qubits().collect())
        .unwrap_or_default();
    let out = layout.qubit("out", 0)?;
    let mut c = Circuit::new(layout);
    for b in set {
        let zeros: Vec<Qubit> = (0..n)
            .filter(|&i| !b.bit(i + 1))
            .map(|i| input[i])
            .collect();
        zeros
            .iter()
            .try_for_each(|&q| c.push(Gate::x(q)).map(drop))?;
        c.push(Gate::mcx(input.clone(), out))?;
        zeros
            .iter()
            .try_for_each(|&q| c.push(Gate::x(q)).map(drop))?;
    }
    Ok(c)
}

/// Toffolis of the `C^n X` cascade, `n - 1` per string.
pub fn ckx_baseline(set: &[BitString], n: usize) -> u64 {
    set.len() as u64 * n.saturating_sub(1) as u64
}

/// Checks `out = [input in set]` on all `2^n` inputs with the input and
/// work qubits restored. `input[0]` holds `b_1`.
pub fn verify_equiv(c: &Circuit, set: &[BitString], n: usize) -> Result<VerdictReport, SimError> {
    let mut table = vec![0u64; 1 << n];
    for b in set {
        if b.len() != n {
            return Err(SimError::Size {
                what: "bit string length",
                expected: n,
                actual: b.len(),
            });
        }
        table[b.index() as usize] = 1;
    }
    verify_function(c, "input", &table)
}

#[derive(Debug, thiserror::Error)]
pub enum OptError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    pub polynomial: String,
    pub factored: String,
    pub toffoli_count: u64,
    pub baseline_toffoli_count: u64,
    pub verdict: VerdictReport,
    #[serde(skip)]
    pub tree: FactorTree,
    #[serde(skip)]
    pub circuit: OptCircuit,
}

/// Full pipeline: strings, polynomial, factoring, circuit, truth-table check.
pub fn optimize(set: &[BitString], n: usize) -> Result<OptimizeResult, OptError> {
    let p = spec_to_poly(set, n)?;
    let tree = factor_spec(set, n)?;
    let circuit = tree_to_circuit(&tree, n)?;
    let report = measure(&circuit.circuit, &ToffoliDecomp::AND_GADGET, &circuit.pairs)?;
    let verdict = verify_equiv(&circuit.circuit, set, n)?;
    Ok(OptimizeResult {
        polynomial: p.to_string(),
        factored: tree.to_string(),
        toffoli_count: report.toffoli_net,
        baseline_toffoli_count: ckx_baseline(set, n),
        verdict,
        tree,
        circuit,
    })
}
