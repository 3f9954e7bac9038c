//! GF(2) polynomial encoding of bit strings.
//!
//! A bit `b_i` is mapped to the linear factor `1 + x_i` when it is 0 and to `x_i`
//! when it is 1; a whole string is mapped to the product of its factors. Evaluated
//! mod 2 on another string `b'`, that product is 1 exactly when `b' = b`, which is
//! what lets one ancilla per address act as a selector.
//!
//! Indexing convention used throughout the crate: bit `b_1` is the leftmost
//! character of a string, and variable `x_i` lives at bit `i - 1` of a mask.
//! When a string is read as an integer address, `b_1` is the most significant bit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported variable count for a [`BitString`].
pub const MAX_BITS: usize = 30;

/// Largest variable count for which the expanded (monomial) form is built.
pub const MAX_EXPAND_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("bit string length {0} is outside 1..={MAX_BITS}")]
    BadLength(usize),
    #[error("invalid bit character {0:?}")]
    BadBit(char),
    #[error("mask {mask:#b} does not fit in {n} bits")]
    MaskOutOfRange { mask: u32, n: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("expansion over {0} variables exceeds the guard of {MAX_EXPAND_BITS}")]
    ExpansionTooLarge(usize),
    #[error("malformed polynomial: {0}")]
    Parse(String),
}

/// An `n`-bit string `b_1 .. b_n`, stored as a mask with `b_i` at bit `i - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    n: u8,
    mask: u32,
}

impl BitString {
    pub fn new(n: usize, mask: u32) -> Result<Self, PolyError> {
        if n == 0 || n > MAX_BITS {
            return Err(PolyError::BadLength(n));
        }
        if u64::from(mask) >> n != 0 {
            return Err(PolyError::MaskOutOfRange { mask, n });
        }
        Ok(Self { n: n as u8, mask })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, PolyError> {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &b)| if b { m | (1 << i) } else { m });
        Self::new(bits.len(), mask)
    }

    /// The string whose binary value (with `b_1` most significant) is `index`.
    pub fn from_index(index: u64, n: usize) -> Result<Self, PolyError> {
        if n == 0 || n > MAX_BITS {
            return Err(PolyError::BadLength(n));
        }
        if index >> n != 0 {
            return Err(PolyError::MaskOutOfRange {
                mask: index as u32,
                n,
            });
        }
        Ok(Self {
            n: n as u8,
            mask: index_to_mask(index as u32, n),
        })
    }

    /// Binary value with `b_1` as the most significant bit.
    pub fn index(&self) -> u64 {
        u64::from(mask_to_index(self.mask, self.len()))
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// Bit `b_i`, 1-based.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len(), "bit index {i} out of range");
        self.mask >> (i - 1) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len()).map(|i| self.bit(i))
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Every string of length `n`, in increasing address order.
    pub fn all(n: usize) -> impl Iterator<Item = BitString> {
        assert!((1..=MAX_BITS).contains(&n));
        (0..1u64 << n).map(move |i| BitString::from_index(i, n).unwrap())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(PolyError::BadBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(&bits)
    }
}

/// Converts an address (b_1 most significant) to a variable mask (b_1 at bit 0).
pub fn index_to_mask(index: u32, n: usize) -> u32 {
    if n == 0 {
        return 0;
    }
    index.reverse_bits() >> (32 - n)
}

/// Inverse of [`index_to_mask`].
pub fn mask_to_index(mask: u32, n: usize) -> u32 {
    index_to_mask(mask, n)
}

/// A product of distinct variables, identified by the set of their indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(pub u32);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    /// The single variable `x_i` (1-based).
    pub fn var(i: usize) -> Self {
        assert!((1..=32).contains(&i), "variable index {i} out of range");
        Monomial(1 << (i - 1))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_constant(self) -> bool {
        self.0 == 0
    }

    /// 1-based indices of the variables, ascending.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let m = self.0;
        (0..32).filter(move |b| m >> b & 1 == 1).map(|b| b + 1)
    }

    pub fn divides(self, other: Monomial) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn eval(self, assignment: u32) -> bool {
        assignment & self.0 == self.0
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return f.write_str("1");
        }
        for i in self.indices() {
            write!(f, "x{i}")?;
        }
        Ok(())
    }
}

/// The factor a single bit is mapped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearFactor {
    /// `x_i`, for a 1 bit.
    Var(usize),
    /// `1 + x_i`, for a 0 bit.
    OnePlusVar(usize),
}

impl LinearFactor {
    pub fn index(self) -> usize {
        match self {
            LinearFactor::Var(i) | LinearFactor::OnePlusVar(i) => i,
        }
    }

    /// Integer value at `x_i = v`, before reduction mod 2 (can be 2).
    pub fn value_at(self, v: bool) -> u32 {
        match self {
            LinearFactor::Var(_) => u32::from(v),
            LinearFactor::OnePlusVar(_) => 1 + u32::from(v),
        }
    }
}

impl fmt::Display for LinearFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearFactor::Var(i) => write!(f, "x{i}"),
            LinearFactor::OnePlusVar(i) => write!(f, "(1+x{i})"),
        }
    }
}

/// Encodes bit `b` sitting at 1-based position `index`.
pub fn encode_bit(b: bool, index: usize) -> LinearFactor {
    assert!(
        (1..=MAX_BITS).contains(&index),
        "bit index {index} out of range"
    );
    if b {
        LinearFactor::Var(index)
    } else {
        LinearFactor::OnePlusVar(index)
    }
}

/// Unexpanded encoding polynomial: one linear factor per bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingProduct {
    factors: Vec<LinearFactor>,
}

impl EncodingProduct {
    pub fn factors(&self) -> &[LinearFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product form evaluated at `point`, reduced mod 2.
    pub fn eval(&self, point: &BitString) -> Result<bool, PolyError> {
        if point.len() != self.len() {
            return Err(PolyError::LengthMismatch {
                left: self.len(),
                right: point.len(),
            });
        }
        // Every factor is 0, 1 or 2; the product is odd only when all factors are 1.
        Ok(self
            .factors
            .iter()
            .all(|f| f.value_at(point.bit(f.index())) % 2 == 1))
    }
}

impl fmt::Display for EncodingProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, factor) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str("·")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

pub fn encode_string(b: &BitString) -> EncodingProduct {
    EncodingProduct {
        factors: (1..=b.len()).map(|i| encode_bit(b.bit(i), i)).collect(),
    }
}

/// A polynomial over GF(2) in `n` Boolean variables, kept as a sorted set of
/// monomials (every coefficient is 1). The empty set is the zero polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Polynomial {
    n: usize,
    monomials: Vec<Monomial>,
}

impl Gf2Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            monomials: Vec::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self {
            n,
            monomials: vec![Monomial::ONE],
        }
    }

    pub fn var(n: usize, i: usize) -> Self {
        Self {
            n,
            monomials: vec![Monomial::var(i)],
        }
    }

    /// Builds a polynomial by XOR-accumulating `monomials`; repeated terms cancel in pairs.
    pub fn from_monomials(n: usize, monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut masks: Vec<Monomial> = monomials.into_iter().collect();
        canonicalize(&mut masks);
        debug_assert!(masks.iter().all(|m| n >= 32 || m.0 >> n == 0));
        Self {
            n,
            monomials: masks,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn contains(&self, m: Monomial) -> bool {
        self.monomials.binary_search(&m).is_ok()
    }

    pub fn degree(&self) -> Option<u32> {
        self.monomials.iter().map(|m| m.weight()).max()
    }

    /// Weight of every monomial is at most 1.
    pub fn is_linear(&self) -> bool {
        self.monomials.iter().all(|m| m.weight() <= 1)
    }

    pub fn constant_term(&self) -> bool {
        self.contains(Monomial::ONE)
    }

    /// Union mask of all variables that occur.
    pub fn support(&self) -> u32 {
        self.monomials.iter().fold(0, |acc, m| acc | m.0)
    }

    /// Evaluates the expanded form; bit `i - 1` of `assignment` is the value of `x_i`.
    pub fn eval(&self, assignment: u32) -> bool {
        self.monomials
            .iter()
            .fold(false, |acc, m| acc ^ m.eval(assignment))
    }

    pub fn eval_at(&self, point: &BitString) -> bool {
        self.eval(point.mask())
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (
            self.monomials.iter().peekable(),
            other.monomials.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) if x == y => {
                    a.next();
                    b.next();
                }
                (Some(x), Some(y)) if x < y => out.push(*a.next().unwrap()),
                (Some(_), Some(_)) => out.push(*b.next().unwrap()),
                (Some(_), None) => out.push(*a.next().unwrap()),
                (None, Some(_)) => out.push(*b.next().unwrap()),
                (None, None) => break,
            }
        }
        Self {
            n: self.n.max(other.n),
            monomials: out,
        }
    }

    /// Product over GF(2) with Boolean variables (`x_i * x_i = x_i`).
    pub fn mul(&self, other: &Self) -> Self {
        let prod = self
            .monomials
            .iter()
            .flat_map(|a| other.monomials.iter().map(move |b| Monomial(a.0 | b.0)));
        Self::from_monomials(self.n.max(other.n), prod)
    }

    /// Splits `self = x_i * quotient + remainder`, where neither part contains `x_i`.
    /// The lone monomial `x_i` (if present) stays in the remainder.
    pub fn divide_by_var(&self, i: usize) -> (Self, Self) {
        let v = Monomial::var(i);
        let (mut q, mut r) = (Vec::new(), Vec::new());
        for &m in &self.monomials {
            if v.divides(m) && m != v {
                q.push(Monomial(m.0 & !v.0));
            } else {
                r.push(m);
            }
        }
        (
            Self::from_monomials(self.n, q),
            Self::from_monomials(self.n, r),
        )
    }

    /// Parses `"+"`-joined monomials such as `1+x1+x2x3` (also `x_1`-style
    /// subscripts); empty terms are ignored. `0` is the zero polynomial.
    pub fn parse(s: &str, n: usize) -> Result<Self, PolyError> {
        let mut monos = Vec::new();
        for term in s.split('+').map(str::trim).filter(|t| !t.is_empty()) {
            if term == "0" {
                continue;
            }
            let m = parse_monomial(term)?;
            if n < 32 && m.0 >> n != 0 {
                return Err(PolyError::Parse(format!(
                    "{s:?} uses variables beyond x{n}"
                )));
            }
            monos.push(m);
        }
        Ok(Self::from_monomials(n, monos))
    }
}

fn parse_monomial(term: &str) -> Result<Monomial, PolyError> {
    if term == "1" {
        return Ok(Monomial::ONE);
    }
    let mut mask = 0u32;
    let mut rest = term;
    while !rest.is_empty() {
        rest = rest
            .strip_prefix('x')
            .ok_or_else(|| PolyError::Parse(format!("bad term {term:?}")))?;
        rest = rest.strip_prefix('_').unwrap_or(rest);
        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        let i: usize = rest[..digits]
            .parse()
            .map_err(|_| PolyError::Parse(format!("bad term {term:?}")))?;
        if i == 0 || i > 32 {
            return Err(PolyError::Parse(format!("variable index {i} in {term:?}")));
        }
        mask |= 1 << (i - 1);
        rest = &rest[digits..];
    }
    Ok(Monomial(mask))
}

fn canonicalize(masks: &mut Vec<Monomial>) {
    masks.sort_unstable();
    let mut out = Vec::with_capacity(masks.len());
    let mut i = 0;
    while i < masks.len() {
        let mut j = i;
        while j < masks.len() && masks[j] == masks[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(masks[i]);
        }
        i = j;
    }
    *masks = out;
}

impl fmt::Display for Gf2Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, m) in self.monomials.iter().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for Gf2Polynomial {
    type Err = PolyError;

    /// Infers the variable count from the highest index that occurs.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = Self::parse(s, 32)?;
        let n = 32 - p.support().leading_zeros() as usize;
        Ok(Self {
            n,
            monomials: p.monomials,
        })
    }
}

/// Multiplies the factors out. Factors act on distinct variables, so no terms
/// can collide and each step just doubles (or shifts) the monomial set.
pub fn expand(p: &EncodingProduct) -> Result<Gf2Polynomial, PolyError> {
    let n = p.len();
    if n > MAX_EXPAND_BITS {
        return Err(PolyError::ExpansionTooLarge(n));
    }
    let mut terms = vec![Monomial::ONE];
    for factor in p.factors() {
        let bit = 1u32 << (factor.index() - 1);
        match factor {
            LinearFactor::Var(_) => terms.iter_mut().for_each(|m| m.0 |= bit),
            LinearFactor::OnePlusVar(_) => {
                let shifted: Vec<_> = terms.iter().map(|m| Monomial(m.0 | bit)).collect();
                terms.extend(shifted);
            }
        }
    }
    terms.sort_unstable();
    Ok(Gf2Polynomial {
        n,
        monomials: terms,
    })
}

/// Product-form evaluation of `p_b` at `b'`: 1 iff the strings are equal.
pub fn evaluate_mod2(b: &BitString, at: &BitString) -> Result<bool, PolyError> {
    encode_string(b).eval(at)
}

/// The unique lowest-weight summand of `p_b`: the product of the variables whose bit is 1.
pub fn min_weight_monomial(b: &BitString) -> Monomial {
    Monomial(b.mask())
}

/// Labels whose encoding polynomials XOR to `p_b`: the 1-bit index set `I_1`
/// itself (as a bare monomial) followed by every strict superset `I' ⊃ I_1`
/// (each standing for its full polynomial `p_{m_I'}`), ascending by mask.
pub fn xor_decompose(b: &BitString) -> Vec<Monomial> {
    let base = b.mask();
    let free = !base & low_mask(b.len());
    let mut out = vec![Monomial(base)];
    let mut supersets: Vec<Monomial> = subsets_of(free)
        .filter(|&s| s != 0)
        .map(|s| Monomial(base | s))
        .collect();
    supersets.sort_unstable();
    out.extend(supersets);
    out
}

/// XOR of the expanded encoding polynomials of every member of `set`.
pub fn xor_sum<'a>(
    n: usize,
    set: impl IntoIterator<Item = &'a BitString>,
) -> Result<Gf2Polynomial, PolyError> {
    if n > MAX_EXPAND_BITS {
        return Err(PolyError::ExpansionTooLarge(n));
    }
    let mut acc = Gf2Polynomial::zero(n);
    for b in set {
        if b.len() != n {
            return Err(PolyError::LengthMismatch {
                left: n,
                right: b.len(),
            });
        }
        acc = acc.xor(&expand(&encode_string(b))?);
    }
    Ok(acc)
}

pub(crate) fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// All submasks of `mask`, including 0 and `mask`.
pub(crate) fn subsets_of(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & mask)
        };
        Some(cur)
    })
}
