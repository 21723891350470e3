//! The lattice `L_n` of set partitions of `{1, ..., n}`.
//!
//! `a <= b` holds when every block of `b` sits inside a block of `a`, so the
//! one-block partition ([`SetPartition::bottom`]) is the minimum and the
//! partition into singletons ([`SetPartition::top`]) is the maximum. Blocks
//! are stored as bitmasks (bit `i - 1` for element `i`) sorted by their
//! minimum element, which makes the representation canonical.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`] unless a caller passes
/// its own limit.
pub const DEFAULT_MAX_N: usize = 9;

/// Hard limit imposed by the bitmask representation.
pub const MAX_GROUND_SET: usize = 64;

/// A set partition of `{1, ..., n}` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<u64>,
}

/// Elements of a subset mask, ascending.
pub fn subset_elements(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize + 1);
        m &= m - 1;
    }
    out
}

/// Mask of a list of 1-based elements.
pub fn subset_mask(elements: &[usize]) -> u64 {
    elements.iter().fold(0u64, |acc, &e| acc | (1u64 << (e - 1)))
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Lexicographic comparison of the ascending element lists of two masks.
pub(crate) fn cmp_subsets(a: u64, b: u64) -> Ordering {
    let (mut x, mut y) = (a, b);
    loop {
        match (x == 0, y == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ex, ey) = (x.trailing_zeros(), y.trailing_zeros());
        if ex != ey {
            return ex.cmp(&ey);
        }
        x &= x - 1;
        y &= y - 1;
    }
}

fn format_subset(mask: u64, commas: bool) -> String {
    let parts: Vec<String> = subset_elements(mask).iter().map(|e| e.to_string()).collect();
    if commas {
        parts.join(",")
    } else {
        parts.concat()
    }
}

impl SetPartition {
    /// Builds a partition from explicit blocks of 1-based elements.
    pub fn new(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(blocks.len());
        for b in blocks {
            if let Some(&e) = b.iter().find(|&&e| e == 0 || e > n) {
                return Err(domain(format!("element {e} is not in 1..={n}")));
            }
            let m = subset_mask(b);
            if m.count_ones() as usize != b.len() {
                return Err(domain("repeated element inside a block"));
            }
            masks.push(m);
        }
        Self::from_masks(n, masks)
    }

    /// Builds a partition from block masks in any order.
    pub fn from_masks(n: usize, mut masks: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_GROUND_SET {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                min: 1,
                max: MAX_GROUND_SET,
            });
        }
        let full = full_mask(n);
        let mut seen = 0u64;
        for &m in &masks {
            if m == 0 {
                return Err(domain("empty block"));
            }
            if m & !full != 0 {
                return Err(domain(format!("block exceeds ground set 1..={n}")));
            }
            if m & seen != 0 {
                return Err(domain("blocks are not disjoint"));
            }
            seen |= m;
        }
        if seen != full {
            return Err(domain(format!("blocks do not cover 1..={n}")));
        }
        masks.sort_unstable_by_key(|m| m.trailing_zeros());
        Ok(SetPartition { n, blocks: masks })
    }

    /// The one-block partition, written ⊥.
    pub fn bottom(n: usize) -> Self {
        assert!((1..=MAX_GROUND_SET).contains(&n));
        SetPartition {
            n,
            blocks: vec![full_mask(n)],
        }
    }

    /// The partition into singletons, written ⊤.
    pub fn top(n: usize) -> Self {
        assert!((1..=MAX_GROUND_SET).contains(&n));
        SetPartition {
            n,
            blocks: (0..n).map(|i| 1u64 << i).collect(),
        }
    }

    /// The partition whose only non-singleton block is `subset` (the index of
    /// the diagonal `Δ_S`).
    pub fn with_single_block(n: usize, subset: u64) -> Result<Self> {
        let full = full_mask(n);
        if subset == 0 || subset & !full != 0 {
            return Err(domain("subset is empty or leaves the ground set"));
        }
        let mut masks = vec![subset];
        masks.extend((0..n).map(|i| 1u64 << i).filter(|b| b & subset == 0));
        Self::from_masks(n, masks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Block masks in canonical order.
    pub fn block_masks(&self) -> &[u64] {
        &self.blocks
    }

    /// Blocks as element lists in canonical order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|&m| subset_elements(m)).collect()
    }

    /// Mask of the block containing element `i` (1-based).
    pub fn block_of(&self, i: usize) -> u64 {
        let bit = 1u64 << (i - 1);
        *self
            .blocks
            .iter()
            .find(|&&m| m & bit != 0)
            .expect("element outside the ground set")
    }

    /// `i ~ j` in the induced equivalence relation.
    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of(i) & (1u64 << (j - 1)) != 0
    }

    pub fn is_bottom(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_top(&self) -> bool {
        self.blocks.len() == self.n
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(domain(format!(
                "partitions of different ground sets ({} vs {})",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// `self <= other`: every block of `other` lies in a block of `self`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_same_n(other)?;
        Ok(self.le_unchecked(other))
    }

    pub(crate) fn le_unchecked(&self, other: &Self) -> bool {
        if self.blocks.len() > other.blocks.len() {
            return false;
        }
        other.blocks.iter().all(|&m| {
            let low = m & m.wrapping_neg();
            self.blocks
                .iter()
                .find(|&&b| b & low != 0)
                .is_some_and(|&b| m & !b == 0)
        })
    }

    /// `self <= other` and `self != other`.
    pub(crate) fn lt_unchecked(&self, other: &Self) -> bool {
        self.blocks.len() < other.blocks.len() && self.le_unchecked(other)
    }

    pub(crate) fn comparable_unchecked(&self, other: &Self) -> bool {
        self.le_unchecked(other) || other.le_unchecked(self)
    }

    /// Finest common coarsening: the transitive closure of the union of both
    /// equivalence relations, i.e. the meet under `<=`.
    pub fn common_coarsening(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        Ok(self.meet_unchecked(other))
    }

    pub(crate) fn meet_unchecked(&self, other: &Self) -> Self {
        let mut acc = self.blocks.clone();
        for &m in &other.blocks {
            let (hit, mut rest): (Vec<u64>, Vec<u64>) = acc.into_iter().partition(|b| b & m != 0);
            rest.push(hit.into_iter().fold(0, |x, y| x | y));
            acc = rest;
        }
        acc.sort_unstable_by_key(|m| m.trailing_zeros());
        SetPartition {
            n: self.n,
            blocks: acc,
        }
    }

    /// `n - #blocks`; the rank of the corresponding flat of `M(K_n)`.
    pub fn rank(&self) -> usize {
        self.n - self.blocks.len()
    }

    pub fn non_singleton_blocks(&self) -> Vec<u64> {
        self.blocks
            .iter()
            .copied()
            .filter(|m| m.count_ones() >= 2)
            .collect()
    }

    /// Membership in `Ex_n`: at least two non-singleton blocks.
    pub fn in_ex(&self) -> bool {
        self.blocks.iter().filter(|m| m.count_ones() >= 2).count() >= 2
    }

    /// For a diagonal-type partition (one non-singleton block), that block.
    pub fn single_non_singleton_block(&self) -> Option<u64> {
        let mut it = self.blocks.iter().filter(|m| m.count_ones() >= 2);
        match (it.next(), it.next()) {
            (Some(&b), None) => Some(b),
            _ => None,
        }
    }
}

impl Ord for SetPartition {
    /// Enumeration order: by number of blocks, then lexicographically on
    /// the canonical block lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.blocks.len().cmp(&other.blocks.len()))
            .then_with(|| {
                for (a, b) in self.blocks.iter().zip(&other.blocks) {
                    match cmp_subsets(*a, *b) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for SetPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let commas = self.n >= 10;
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|&m| format_subset(m, commas))
            .collect();
        f.write_str(&parts.join("|"))
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetPartition({self})")
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Parses `"124|58|36|7|9"` or, for ground sets of ten or more,
    /// `"1,2,10|3|4,5,6,7,8,9"`. The ground-set size is the number of
    /// elements listed.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty partition literal".into()));
        }
        let commas = s.contains(',');
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let part = part.trim();
            if part.is_empty() {
                return Err(Error::Parse(format!("empty block in {s:?}")));
            }
            let block: Vec<usize> = if commas {
                part.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad element {t:?} in {s:?}")))
                    })
                    .collect::<Result<_>>()?
            } else {
                part.chars()
                    .map(|c| match c.to_digit(10) {
                        Some(d) if d > 0 => Ok(d as usize),
                        _ => Err(Error::Parse(format!("bad element {c:?} in {s:?}"))),
                    })
                    .collect::<Result<_>>()?
            };
            blocks.push(block);
        }
        let n = blocks.iter().map(Vec::len).sum();
        SetPartition::new(n, &blocks).map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
}

/// All of `L_n` in enumeration order, for `1 <= n <= DEFAULT_MAX_N`.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    enumerate_partitions_with_limit(n, DEFAULT_MAX_N)
}

/// All of `L_n` in enumeration order, for `1 <= n <= max_n`.
pub fn enumerate_partitions_with_limit(n: usize, max_n: usize) -> Result<Vec<SetPartition>> {
    let max = max_n.min(MAX_GROUND_SET);
    if n == 0 || n > max {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 1,
            max,
        });
    }
    let mut out = Vec::new();
    let mut blocks: Vec<u64> = Vec::with_capacity(n);
    grow(n, 0, &mut blocks, &mut out);
    out.sort();
    Ok(out)
}

fn grow(n: usize, next: usize, blocks: &mut Vec<u64>, out: &mut Vec<SetPartition>) {
    if next == n {
        let mut b = blocks.clone();
        b.sort_unstable_by_key(|m| m.trailing_zeros());
        out.push(SetPartition { n, blocks: b });
        return;
    }
    let bit = 1u64 << next;
    for i in 0..blocks.len() {
        blocks[i] |= bit;
        grow(n, next + 1, blocks, out);
        blocks[i] &= !bit;
    }
    blocks.push(bit);
    grow(n, next + 1, blocks, out);
    blocks.pop();
}

/// `L_n` without ⊥ and ⊤: the labels of boundary divisors of `B_n`.
pub fn proper_partitions(n: usize) -> Result<Vec<SetPartition>> {
    Ok(enumerate_partitions_with_limit(n, MAX_GROUND_SET)?
        .into_iter()
        .filter(|p| !p.is_bottom() && !p.is_top())
        .collect())
}
