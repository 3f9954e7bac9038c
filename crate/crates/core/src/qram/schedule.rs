//! Stage plan for computing every monomial of weight >= 2 with products of
//! two earlier monomials.
//!
//! Stage `s` (1-based) produces the monomials whose weight lies in
//! `(2^(s-1), 2^s]`, so any split into two factors of weight at most
//! `2^(s-1)` uses monomials that already exist. Within a stage every operand
//! qubit may be used once; a factor wanted more often than it has homes gets
//! work copies. Splits are picked greedily to keep that copy count low.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::polyenc::{low_mask, mask_to_index, subsets_of};

/// One Toffoli: `product = left * right`, stored in `select[target]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Product {
    pub product: u32,
    pub left: u32,
    pub right: u32,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub products: Vec<Product>,
    /// Extra copies needed so no qubit is used twice in the stage, keyed by
    /// operand monomial.
    pub copies: BTreeMap<u32, usize>,
}

impl Stage {
    pub fn work_demand(&self) -> usize {
        self.copies.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonomialSchedule {
    pub n: usize,
    pub stages: Vec<Stage>,
}

impl MonomialSchedule {
    /// Largest per-stage work demand; the size of the shared work pool.
    pub fn work_demand(&self) -> usize {
        self.stages
            .iter()
            .map(Stage::work_demand)
            .max()
            .unwrap_or(0)
    }

    pub fn num_products(&self) -> usize {
        self.stages.iter().map(|s| s.products.len()).sum()
    }
}

/// Splits a monomial into its lowest `ceil(k/2)` variables and the rest.
pub fn split_factors(mask: u32) -> (u32, u32) {
    let k = mask.count_ones();
    let mut left = 0;
    let mut rest = mask;
    for _ in 0..k.div_ceil(2) {
        let low = rest & rest.wrapping_neg();
        left |= low;
        rest &= !low;
    }
    (left, rest)
}

/// Number of qubits already holding monomial `m` before any work copies:
/// a variable lives on its address qubit and its select ancilla.
pub(crate) fn homes(m: u32) -> usize {
    if m.count_ones() == 1 {
        2
    } else {
        1
    }
}

/// Split of `m` into two factors of weight at most `cap` that adds the fewest
/// work copies given current `uses`; ties prefer balanced splits, then the
/// [`split_factors`] split, then the smaller left mask.
fn best_split(m: u32, cap: u32, uses: &BTreeMap<u32, usize>) -> (u32, u32) {
    let extra = |f: u32| usize::from(uses.get(&f).copied().unwrap_or(0) >= homes(f));
    let default = split_factors(m);
    let low = m & m.wrapping_neg();
    subsets_of(m)
        .filter(|&a| a & low != 0 && a != m)
        .filter(|&a| a.count_ones() <= cap && (m ^ a).count_ones() <= cap)
        .map(|a| {
            let (l, r) = if a == default.1 {
                (m ^ a, a)
            } else {
                (a, m ^ a)
            };
            let imbalance = l.count_ones().abs_diff(r.count_ones());
            (
                (extra(l) + extra(r), imbalance, (l, r) != default, l),
                (l, r),
            )
        })
        .min()
        .map(|(_, split)| split)
        .expect("weight >= 2 has a split")
}

pub(crate) fn stage_count(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

pub fn build_schedule(n: usize) -> MonomialSchedule {
    assert!((1..=crate::polyenc::MAX_BITS).contains(&n));
    let stages = (1..=stage_count(n))
        .map(|s| {
            let (lo, hi) = (1u32 << (s - 1), 1u32 << s);
            let mut masks: Vec<u32> = (0..=low_mask(n))
                .filter(|m| (lo + 1..=hi).contains(&m.count_ones()))
                .collect();
            // heaviest first: they have the fewest admissible splits
            masks.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
            let mut uses: BTreeMap<u32, usize> = BTreeMap::new();
            let mut products: Vec<Product> = masks
                .into_iter()
                .map(|m| {
                    let (left, right) = best_split(m, lo, &uses);
                    *uses.entry(left).or_default() += 1;
                    *uses.entry(right).or_default() += 1;
                    Product {
                        product: m,
                        left,
                        right,
                        target: mask_to_index(m, n) as usize,
                    }
                })
                .collect();
            products.sort_by_key(|p| (p.product.count_ones(), p.product));
            let copies = uses
                .into_iter()
                .filter(|&(m, u)| u > homes(m))
                .map(|(m, u)| (m, u - homes(m)))
                .collect();
            Stage { products, copies }
        })
        .collect();
    MonomialSchedule { n, stages }
}
