//! Boundary strata of `B_n` and `A_n` as strict chains of partitions, their
//! dual rooted level trees, and the bookkeeping attached to them.
//!
//! A stratum is stored as a chain `σ_1 < σ_2 < ... < σ_L`, coarsest first;
//! its codimension is `L`. Level `-ℓ` of the dual tree belongs to `σ_ℓ`.
//! A non-singleton block gets a vertex at the deepest consecutive level on
//! which it stays a block, so edges may skip levels.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::partitions::{enumerate_partitions_with_limit, full_mask, subset_elements, SetPartition, MAX_GROUND_SET};

/// Which moduli space a stratum lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// Multiscale differentials `B_n`; the extra mark `p_{n+1}` has order -2.
    B,
    /// Multiscale lines `A_n`; the extra mark is `p_∞`.
    A,
}

impl Space {
    /// Whether `σ` labels a boundary divisor of this space.
    pub fn allows(self, sigma: &SetPartition) -> bool {
        match self {
            Space::B => !sigma.is_bottom() && !sigma.is_top(),
            Space::A => !sigma.is_bottom(),
        }
    }

    /// Minimum number of special points on every tree vertex.
    pub fn min_special_points(self) -> usize {
        match self {
            Space::B => 3,
            Space::A => 2,
        }
    }

    fn distinguished_mark(self, n: usize) -> String {
        match self {
            Space::B => format!("p{}", n + 1),
            Space::A => "p∞".to_string(),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::B => "B",
            Space::A => "A",
        })
    }
}

/// A boundary stratum: a strictly increasing chain of divisor labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainStratum {
    space: Space,
    n: usize,
    chain: Vec<SetPartition>,
}

impl ChainStratum {
    pub fn new(space: Space, n: usize, chain: Vec<SetPartition>) -> Result<Self> {
        if n < 2 || n > MAX_GROUND_SET {
            return Err(domain(format!("strata need 2 <= n <= {MAX_GROUND_SET}, got {n}")));
        }
        for s in &chain {
            if s.n() != n {
                return Err(domain(format!("{s} is not a partition of 1..={n}")));
            }
            if !space.allows(s) {
                return Err(domain(format!("{s} does not label a boundary divisor of {space}_{n}")));
            }
        }
        for w in chain.windows(2) {
            if !w[0].lt_unchecked(&w[1]) {
                return Err(domain(format!("chain is not strictly increasing at {} < {}", w[0], w[1])));
            }
        }
        Ok(ChainStratum { space, n, chain })
    }

    /// The open stratum.
    pub fn open(space: Space, n: usize) -> Result<Self> {
        Self::new(space, n, Vec::new())
    }

    /// Parses `"123|45<12|3|45"`; the empty string is the open stratum.
    pub fn parse(space: Space, n: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        let chain = if text.is_empty() {
            Vec::new()
        } else {
            text.split('<')
                .map(|t| t.trim().parse::<SetPartition>())
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(space, n, chain)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chain(&self) -> &[SetPartition] {
        &self.chain
    }

    pub fn codim(&self) -> usize {
        self.chain.len()
    }

    /// Closure order: `self` lies in the closure of `other` when its chain
    /// contains the chain of `other`.
    pub fn is_face_of(&self, other: &ChainStratum) -> bool {
        self.space == other.space
            && self.n == other.n
            && other.chain.iter().all(|s| self.chain.contains(s))
    }
}

impl fmt::Display for ChainStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.chain.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join("<"))
    }
}

/// All strata of `space` for ground set `n`, graded by codimension, each
/// grade in lexicographic order of the chains.
pub fn strata_enumerate(space: Space, n: usize) -> Result<Vec<ChainStratum>> {
    if n < 2 {
        return Err(domain(format!("strata need n >= 2, got {n}")));
    }
    let labels: Vec<SetPartition> = enumerate_partitions_with_limit(n, MAX_GROUND_SET)?
        .into_iter()
        .filter(|s| space.allows(s))
        .collect();
    let mut chains: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for c in &frontier {
            for (j, s) in labels.iter().enumerate() {
                if c.last().is_none_or(|&i| labels[i].lt_unchecked(s)) {
                    let mut longer = c.clone();
                    longer.push(j);
                    next.push(longer);
                }
            }
        }
        next.sort();
        chains.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(chains
        .into_iter()
        .map(|c| ChainStratum {
            space,
            n,
            chain: c.into_iter().map(|i| labels[i].clone()).collect(),
        })
        .collect())
}

/// One vertex of a rooted level tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    /// The marks in the subtree below this vertex, as a mask.
    pub label: u64,
    /// Depth `ℓ`; the vertex sits at level `-ℓ`. The root has depth 0.
    pub depth: usize,
    pub parent: Option<usize>,
}

/// A stable rooted level tree. Vertex 0 is the root and carries the
/// distinguished mark.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedLevelTree {
    space: Space,
    n: usize,
    depth: usize,
    vertices: Vec<TreeVertex>,
    /// `marks[i - 1]` is the vertex carrying `p_i`.
    marks: Vec<usize>,
}

impl RootedLevelTree {
    /// Assembles and validates a tree. Vertex 0 must be the root.
    pub fn new(space: Space, n: usize, vertices: Vec<TreeVertex>, marks: Vec<usize>) -> Result<Self> {
        let depth = vertices.iter().map(|v| v.depth).max().unwrap_or(0);
        let t = RootedLevelTree {
            space,
            n,
            depth,
            vertices,
            marks,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of levels below the root.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }

    pub fn mark_vertex(&self, i: usize) -> usize {
        self.marks[i - 1]
    }

    fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&c| self.vertices[c].parent == Some(v))
    }

    fn marks_on(&self, v: usize) -> u64 {
        self.marks
            .iter()
            .enumerate()
            .filter(|(_, &w)| w == v)
            .fold(0, |acc, (i, _)| acc | (1u64 << i))
    }

    /// Marks, child edges, parent edge (or the distinguished mark on the root).
    pub fn special_points(&self, v: usize) -> usize {
        self.marks_on(v).count_ones() as usize + self.children(v).count() + 1
    }

    /// Structural checks plus the stability condition of the tree's space.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Internal(format!("invalid level tree: {msg}")));
        let n = self.n;
        if self.vertices.is_empty() || self.vertices[0].parent.is_some() || self.vertices[0].depth != 0 {
            return bad("vertex 0 must be the root at depth 0".into());
        }
        if self.vertices[0].label != full_mask(n) {
            return bad("root label must be the full ground set".into());
        }
        if self.marks.len() != n || self.marks.iter().any(|&v| v >= self.vertices.len()) {
            return bad("every mark needs exactly one vertex".into());
        }
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            let Some(p) = v.parent.filter(|&p| p < self.vertices.len()) else {
                return bad(format!("vertex {i} has no valid parent"));
            };
            let pv = &self.vertices[p];
            if pv.depth >= v.depth {
                return bad(format!("vertex {i} is not below its parent"));
            }
            if v.label & !pv.label != 0 || v.label == 0 {
                return bad(format!("vertex {i} label is not inside its parent's"));
            }
        }
        for d in 1..=self.depth {
            if !self.vertices.iter().any(|v| v.depth == d) {
                return bad(format!("level -{d} is empty"));
            }
        }
        for v in 0..self.vertices.len() {
            let children: Vec<usize> = self.children(v).collect();
            let marks = self.marks_on(v);
            let mut seen = marks;
            for &c in &children {
                if seen & self.vertices[c].label != 0 {
                    return bad(format!("labels below vertex {v} overlap"));
                }
                seen |= self.vertices[c].label;
            }
            if seen != self.vertices[v].label {
                return bad(format!("vertex {v} label differs from the marks below it"));
            }
            if self.special_points(v) < self.space.min_special_points() {
                return bad(format!(
                    "vertex {v} has {} special points, needs {}",
                    self.special_points(v),
                    self.space.min_special_points()
                ));
            }
        }
        if self.space == Space::A {
            let bottom_singletons = self
                .vertices
                .iter()
                .filter(|v| v.depth == self.depth && self.depth > 0)
                .all(|v| v.label.count_ones() == 1);
            let top_in_chain = self.depth > 0 && bottom_singletons;
            if top_in_chain && self.marks.iter().any(|&v| self.vertices[v].depth != self.depth) {
                return bad("marks must lie on bottom-level vertices".into());
            }
        }
        Ok(())
    }

    /// Level tree of the given shape rendered as DOT.
    ///
    /// Layout: one `rank=same` subgraph per level, root first; vertices are
    /// named `v<index>` and labelled by their block; marks are plaintext
    /// leaves named `m<i>`; a dashed edge style marks edges that skip levels.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph level_tree {{");
        let _ = writeln!(out, "  rankdir=TB;");
        for d in 0..=self.depth {
            let _ = write!(out, "  {{ rank=same;");
            for (i, v) in self.vertices.iter().enumerate() {
                if v.depth == d {
                    let _ = write!(out, " v{i};");
                }
            }
            let _ = writeln!(out, " }}");
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let block: String = subset_elements(v.label).iter().map(|e| format!("{e} ")).collect();
            let name = if i == 0 { "root".to_string() } else { format!("{{{}}}", block.trim_end()) };
            let _ = writeln!(out, "  v{i} [label=\"{name}\\nlevel -{}\"];", v.depth);
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if let Some(p) = v.parent {
                let skip = v.depth - self.vertices[p].depth;
                if skip > 1 {
                    let _ = writeln!(out, "  v{p} -> v{i} [style=dashed, minlen={skip}];");
                } else {
                    let _ = writeln!(out, "  v{p} -> v{i};");
                }
            }
        }
        let _ = writeln!(
            out,
            "  m0 [shape=plaintext, label=\"{}\"];",
            self.space.distinguished_mark(self.n)
        );
        let _ = writeln!(out, "  v0 -> m0 [arrowhead=none];");
        for (i, &v) in self.marks.iter().enumerate() {
            let _ = writeln!(out, "  m{} [shape=plaintext, label=\"p{}\"];", i + 1, i + 1);
            let _ = writeln!(out, "  v{v} -> m{} [arrowhead=none];", i + 1);
        }
        out.push_str("}\n");
        out
    }
}

/// Dual level tree of a stratum.
pub fn tree_from_chain(s: &ChainStratum) -> Result<RootedLevelTree> {
    let n = s.n;
    let depth = s.codim();
    let chain = &s.chain;
    let ends_in_top = chain.last().is_some_and(SetPartition::is_top);
    let mut vertices = vec![TreeVertex {
        label: full_mask(n),
        depth: 0,
        parent: None,
    }];
    // vertex index for (depth, block) pairs that carry vertices
    let mut index: BTreeMap<(usize, u64), usize> = BTreeMap::new();
    for l in 1..=depth {
        let sigma = &chain[l - 1];
        for &b in sigma.block_masks() {
            let carries = if l == depth {
                b.count_ones() >= 2 || ends_in_top
            } else {
                b.count_ones() >= 2 && !chain[l].block_masks().contains(&b)
            };
            if !carries {
                continue;
            }
            // parent: deepest shallower vertex whose block contains b
            let parent = (1..l)
                .rev()
                .find_map(|k| index.get(&(k, chain[k - 1].block_of(b.trailing_zeros() as usize + 1))))
                .copied()
                .unwrap_or(0);
            index.insert((l, b), vertices.len());
            vertices.push(TreeVertex {
                label: b,
                depth: l,
                parent: Some(parent),
            });
        }
    }
    let marks = (1..=n)
        .map(|i| {
            let bit = 1u64 << (i - 1);
            vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| v.label & bit != 0)
                .max_by_key(|(_, v)| v.depth)
                .map(|(k, _)| k)
                .unwrap_or(0)
        })
        .collect();
    RootedLevelTree::new(s.space, n, vertices, marks)
}

/// Chain of a level tree: `σ_ℓ` has as blocks the labels of vertices whose
/// edge to the parent crosses level `-ℓ`.
pub fn chain_from_tree(t: &RootedLevelTree) -> Result<ChainStratum> {
    t.validate()?;
    let mut chain = Vec::with_capacity(t.depth);
    for l in 1..=t.depth {
        let mut blocks: Vec<u64> = t
            .vertices
            .iter()
            .filter(|v| v.parent.is_some_and(|p| t.vertices[p].depth < l) && l <= v.depth)
            .map(|v| v.label)
            .collect();
        let covered = blocks.iter().fold(0, |a, b| a | b);
        blocks.extend((0..t.n).map(|i| 1u64 << i).filter(|b| b & covered == 0));
        chain.push(SetPartition::from_masks(t.n, blocks)?);
    }
    ChainStratum::new(t.space, t.n, chain)
}

/// Two-level tree of a divisor label.
pub fn partition_to_tree(sigma: &SetPartition, n: usize, space: Space) -> Result<RootedLevelTree> {
    if sigma.n() != n {
        return Err(domain(format!("{sigma} is not a partition of 1..={n}")));
    }
    if !space.allows(sigma) {
        return Err(domain(format!("{sigma} does not label a boundary divisor of {space}_{n}")));
    }
    tree_from_chain(&ChainStratum::new(space, n, vec![sigma.clone()])?)
}

/// `i ~ j` iff `p_i` and `p_j` lie on the same non-root component.
pub fn sigma_of_two_level(t: &RootedLevelTree) -> Result<SetPartition> {
    if t.depth != 1 {
        return Err(domain(format!("expected a two-level tree, got {} levels", t.depth + 1)));
    }
    let mut groups: BTreeMap<usize, u64> = BTreeMap::new();
    for (i, &v) in t.marks.iter().enumerate() {
        let key = if v == 0 { usize::MAX - i } else { v };
        *groups.entry(key).or_default() |= 1u64 << i;
    }
    SetPartition::from_masks(t.n, groups.into_values().collect())
}

/// Intersection of two boundary divisors: the codimension-two stratum when
/// their labels are comparable, otherwise `None`.
pub fn divisor_intersection(a: &SetPartition, b: &SetPartition, space: Space) -> Result<Option<ChainStratum>> {
    if a == b {
        return Err(domain("divisor_intersection needs two distinct divisors"));
    }
    if a.n() != b.n() {
        return Err(domain("labels on different ground sets"));
    }
    let n = a.n();
    for s in [a, b] {
        if !space.allows(s) {
            return Err(domain(format!("{s} does not label a boundary divisor of {space}_{n}")));
        }
    }
    let chain = if a.lt_unchecked(b) {
        vec![a.clone(), b.clone()]
    } else if b.lt_unchecked(a) {
        vec![b.clone(), a.clone()]
    } else {
        return Ok(None);
    };
    ChainStratum::new(space, n, chain).map(Some)
}

/// Order on exceptional divisors: `σ_1 < σ_2` exactly when `σ_2` strictly
/// refines `σ_1`.
pub fn exceptional_lt(a: &SetPartition, b: &SetPartition) -> Result<bool> {
    for s in [a, b] {
        if !s.in_ex() {
            return Err(domain(format!("{s} is not in Ex_{}", s.n())));
        }
    }
    Ok(a.n() == b.n() && a.lt_unchecked(b))
}

/// Whether `order` lists `Ex_n` (or a subset of it) compatibly with
/// [`exceptional_lt`], i.e. is a valid blowdown order.
pub fn is_valid_blowdown_order(order: &[SetPartition]) -> Result<bool> {
    for (i, later) in order.iter().enumerate() {
        for earlier in &order[..i] {
            if exceptional_lt(later, earlier)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One component of a Chow-quotient fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberComponent {
    /// The component through the generic orbit closure.
    Generic,
    /// The component created by passing from level `-(level-1)` to `-level`.
    LevelPassage { level: usize, partition: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberChain {
    pub components: Vec<FiberComponent>,
}

impl FiberChain {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// The chain of `codim + 1` rational curves over a point of a `B`-stratum.
pub fn chow_fiber_model(s: &ChainStratum) -> Result<FiberChain> {
    if s.space != Space::B {
        return Err(domain("fiber chains are modelled for B-strata only"));
    }
    let tree = tree_from_chain(s)?;
    let mut components = vec![FiberComponent::Generic];
    for level in 1..=tree.depth {
        components.push(FiberComponent::LevelPassage {
            level,
            partition: s.chain[level - 1].to_string(),
        });
    }
    Ok(FiberChain { components })
}

/// Weight data of the `C^*`-action near `B_n ⊂ A_n` and of the linearized
/// action on `P^{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CStarReport {
    pub n: usize,
    /// Chart coordinates `t, z_13, ..., z_1n` with their weights.
    pub chart_weights: Vec<(String, i32)>,
    /// Basis of `H^0(P^{n-1}, O(1))` with their weights.
    pub linearization: Vec<(String, i32)>,
    pub semistable_locus: String,
    pub stable_locus: String,
    pub invariant_ring: String,
}

pub fn cstar_report(n: usize) -> Result<CStarReport> {
    if n < 3 {
        return Err(domain(format!("the weight table needs n >= 3, got {n}")));
    }
    let mut chart_weights = vec![("t".to_string(), -1)];
    chart_weights.extend((3..=n).map(|j| (format!("z1{j}"), 0)));
    let sum: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut linearization = vec![(sum.join("+"), -1)];
    linearization.extend((2..=n).map(|j| (format!("x1-x{j}"), 0)));
    let ones = vec!["1"; n].join(":");
    let diffs: Vec<String> = (2..=n).map(|j| format!("x1-x{j}")).collect();
    Ok(CStarReport {
        n,
        chart_weights,
        linearization,
        semistable_locus: format!("P^{} \\ {{[{ones}]}}", n - 1),
        stable_locus: "empty".into(),
        invariant_ring: format!("C[{}]", diffs.join(",")),
    })
}

/// Boundary fixed points of the `C^*`-action on `A_3`: the three
/// codimension-two strata `ij|k < ⊤`, one for each collision `p_i = p_j`.
pub fn cstar_boundary_fixed_points(n: usize) -> Result<Vec<ChainStratum>> {
    if n != 3 {
        return Err(Error::Capability {
            subject: format!("A_{n}"),
            reason: "fixed loci are only recorded for n = 3".into(),
        });
    }
    Ok(strata_enumerate(Space::A, 3)?
        .into_iter()
        .filter(|s| s.codim() == 2)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    /// Chains by brute force over all subsets of the label set.
    fn brute_chains(space: Space, n: usize) -> usize {
        let labels: Vec<SetPartition> = enumerate_partitions_with_limit(n, 9)
            .unwrap()
            .into_iter()
            .filter(|s| space.allows(s))
            .collect();
        let mut count = 0;
        // chains have length at most n - 1, so enumerate small subsets only
        fn rec(labels: &[SetPartition], start: usize, picked: &mut Vec<usize>, count: &mut usize) {
            let ok = picked.iter().all(|&i| {
                picked
                    .iter()
                    .all(|&j| i == j || labels[i].le_unchecked(&labels[j]) || labels[j].le_unchecked(&labels[i]))
            });
            if !ok {
                return;
            }
            *count += 1;
            for k in start..labels.len() {
                picked.push(k);
                rec(labels, k + 1, picked, count);
                picked.pop();
            }
        }
        rec(&labels, 0, &mut Vec::new(), &mut count);
        count
    }

    #[test]
    fn strata_counts() {
        let b3 = strata_enumerate(Space::B, 3).unwrap();
        assert_eq!(b3.len(), 4);
        let a3 = strata_enumerate(Space::A, 3).unwrap();
        let by_codim = |v: &[ChainStratum], c| v.iter().filter(|s| s.codim() == c).count();
        assert_eq!((a3.len(), by_codim(&a3, 0), by_codim(&a3, 1), by_codim(&a3, 2)), (8, 1, 4, 3));
        let b4 = strata_enumerate(Space::B, 4).unwrap();
        assert_eq!((b4.len(), by_codim(&b4, 1), by_codim(&b4, 2)), (32, 13, 18));
        for n in 2..=5 {
            assert_eq!(strata_enumerate(Space::B, n).unwrap().len(), brute_chains(Space::B, n));
            assert_eq!(strata_enumerate(Space::A, n).unwrap().len(), brute_chains(Space::A, n));
        }
    }

    #[test]
    fn chain_validation() {
        assert!(ChainStratum::parse(Space::B, 5, "123|45<12|3|45").is_ok());
        assert!(ChainStratum::parse(Space::B, 5, "12|3|45<123|45").is_err());
        assert!(ChainStratum::parse(Space::B, 3, "1|2|3").is_err());
        assert!(ChainStratum::parse(Space::A, 3, "12|3<1|2|3").is_ok());
        assert!(ChainStratum::parse(Space::A, 3, "123").is_err());
        assert_eq!(ChainStratum::parse(Space::B, 4, "").unwrap().codim(), 0);
        let s = ChainStratum::parse(Space::B, 5, "123|45<12|3|45").unwrap();
        assert_eq!(s.to_string(), "123|45<12|3|45");
    }

    #[test]
    fn comb_curve_partition() {
        // root: p7, p9, p10 and three teeth
        let n = 9;
        let full = full_mask(n);
        let teeth = [0b0_0000_1011u64, 0b0_1001_0000, 0b0_0010_0100];
        let mut vertices = vec![TreeVertex {
            label: full,
            depth: 0,
            parent: None,
        }];
        vertices.extend(teeth.iter().map(|&label| TreeVertex {
            label,
            depth: 1,
            parent: Some(0),
        }));
        let marks = (1..=n)
            .map(|i| teeth.iter().position(|t| t & (1 << (i - 1)) != 0).map_or(0, |k| k + 1))
            .collect();
        let tree = RootedLevelTree::new(Space::B, n, vertices, marks).unwrap();
        assert_eq!(sigma_of_two_level(&tree).unwrap(), p("124|58|36|7|9"));
    }

    #[test]
    fn two_level_bijection() {
        for n in 3..=5 {
            for s in strata_enumerate(Space::B, n).unwrap().iter().filter(|s| s.codim() == 1) {
                let sigma = &s.chain()[0];
                let t = partition_to_tree(sigma, n, Space::B).unwrap();
                assert_eq!(&sigma_of_two_level(&t).unwrap(), sigma);
            }
        }
        assert!(partition_to_tree(&SetPartition::top(4), 4, Space::B).is_err());
        assert!(partition_to_tree(&SetPartition::bottom(4), 4, Space::A).is_err());
        let deep = tree_from_chain(&ChainStratum::parse(Space::B, 4, "12|34<12|3|4").unwrap()).unwrap();
        assert!(sigma_of_two_level(&deep).is_err());
    }

    /// Two-level stable B-trees built directly: every map from marks to
    /// {root, component 1..n}, deduplicated up to relabelling components.
    fn brute_two_level_trees(n: usize) -> Vec<RootedLevelTree> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        let total = (n + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut comps = vec![0u64; n + 1];
            for i in 0..n {
                comps[c % (n + 1)] |= 1 << i;
                c /= n + 1;
            }
            let mut teeth: Vec<u64> = comps[1..].iter().copied().filter(|&m| m != 0).collect();
            teeth.sort_unstable();
            if teeth.is_empty() || !seen.insert(teeth.clone()) {
                continue;
            }
            let mut vertices = vec![TreeVertex {
                label: full_mask(n),
                depth: 0,
                parent: None,
            }];
            vertices.extend(teeth.iter().map(|&label| TreeVertex {
                label,
                depth: 1,
                parent: Some(0),
            }));
            let marks = (1..=n)
                .map(|i| teeth.iter().position(|t| t & (1 << (i - 1)) != 0).map_or(0, |k| k + 1))
                .collect();
            if let Ok(t) = RootedLevelTree::new(Space::B, n, vertices, marks) {
                out.push(t);
            }
        }
        out
    }

    #[test]
    fn two_level_tree_count() {
        assert_eq!(brute_two_level_trees(4).len(), 13);
        for n in 3..=5 {
            let trees = brute_two_level_trees(n);
            let mut sigmas: Vec<SetPartition> = trees.iter().map(|t| sigma_of_two_level(t).unwrap()).collect();
            sigmas.sort();
            sigmas.dedup();
            assert_eq!(sigmas.len(), trees.len());
        }
    }

    #[test]
    fn tree_from_chain_example() {
        let s = ChainStratum::parse(Space::B, 5, "123|45<12|3|45").unwrap();
        let t = tree_from_chain(&s).unwrap();
        let v = t.vertices();
        assert_eq!(v.len(), 4);
        let find = |label: u64| v.iter().position(|x| x.label == label).unwrap();
        let (v123, v12, v45) = (find(0b00111), find(0b00011), find(0b11000));
        assert_eq!((v[v123].depth, v[v123].parent), (1, Some(0)));
        assert_eq!((v[v12].depth, v[v12].parent), (2, Some(v123)));
        assert_eq!((v[v45].depth, v[v45].parent), (2, Some(0)));
        assert_eq!(t.mark_vertex(3), v123);
        assert_eq!(t.mark_vertex(1), v12);
        assert_eq!(t.mark_vertex(5), v45);
        assert!((0..v.len()).all(|i| t.special_points(i) >= 3));
        assert_eq!(chain_from_tree(&t).unwrap(), s);
    }

    #[test]
    fn a_model_top_divisor_tree() {
        for n in 2..=5 {
            let s = ChainStratum::new(Space::A, n, vec![SetPartition::top(n)]).unwrap();
            let t = tree_from_chain(&s).unwrap();
            assert_eq!(t.vertices().len(), n + 1);
            assert_eq!(t.special_points(0), n + 1);
            for i in 1..=n {
                let v = t.mark_vertex(i);
                assert_eq!(t.vertices()[v].depth, 1);
                assert_eq!(t.vertices()[v].label, 1 << (i - 1));
                assert_eq!(t.special_points(v), 2);
            }
            assert_eq!(chain_from_tree(&t).unwrap(), s);
        }
    }

    #[test]
    fn open_stratum_tree() {
        let t = tree_from_chain(&ChainStratum::open(Space::B, 4).unwrap()).unwrap();
        assert_eq!(t.vertices().len(), 1);
        assert!((1..=4).all(|i| t.mark_vertex(i) == 0));
    }

    #[test]
    fn chain_tree_round_trip_exhaustive() {
        for space in [Space::B, Space::A] {
            for n in 2..=5 {
                for s in strata_enumerate(space, n).unwrap() {
                    let t = tree_from_chain(&s).unwrap();
                    assert_eq!(t.depth(), s.codim());
                    assert_eq!(chain_from_tree(&t).unwrap(), s, "{space} {s}");
                    assert_eq!(tree_from_chain(&chain_from_tree(&t).unwrap()).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn unstable_trees_rejected() {
        let root = TreeVertex {
            label: 0b111,
            depth: 0,
            parent: None,
        };
        let leaf = |i: u32| TreeVertex {
            label: 1 << i,
            depth: 1,
            parent: Some(0),
        };
        // a component with a single mark
        let one = vec![root.clone(), leaf(0)];
        assert!(RootedLevelTree::new(Space::B, 3, one.clone(), vec![1, 0, 0]).is_err());
        // allowed in the A-model only when every mark sits on the bottom level
        assert!(RootedLevelTree::new(Space::A, 3, one, vec![1, 0, 0]).is_err());
        let bottom = vec![root, leaf(0), leaf(1), leaf(2)];
        assert!(RootedLevelTree::new(Space::A, 3, bottom.clone(), vec![1, 2, 3]).is_ok());
        assert!(RootedLevelTree::new(Space::B, 3, bottom, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn divisor_intersections() {
        let s = divisor_intersection(&p("12|34"), &p("12|3|4"), Space::B).unwrap().unwrap();
        assert_eq!(s.to_string(), "12|34<12|3|4");
        let s = divisor_intersection(&p("12|3|4"), &p("12|34"), Space::B).unwrap().unwrap();
        assert_eq!(s.codim(), 2);
        assert_eq!(divisor_intersection(&p("12|3|4"), &p("13|2|4"), Space::B).unwrap(), None);
        assert!(divisor_intersection(&p("12|3|4"), &p("12|3|4"), Space::B).is_err());
        assert!(divisor_intersection(&p("12|3|4"), &SetPartition::top(4), Space::B).is_err());
        for sigma in enumerate_partitions_with_limit(4, 9).unwrap() {
            if Space::A.allows(&sigma) && !sigma.is_top() {
                assert!(divisor_intersection(&sigma, &SetPartition::top(4), Space::A).unwrap().is_some());
            }
        }
    }

    #[test]
    fn exceptional_order() {
        assert!(exceptional_lt(&p("12|345"), &p("12|34|5")).unwrap());
        assert!(!exceptional_lt(&p("12|34|5"), &p("12|345")).unwrap());
        assert!(!exceptional_lt(&p("12|34"), &p("13|24")).unwrap());
        assert!(!exceptional_lt(&p("13|24"), &p("12|34")).unwrap());
        assert!(exceptional_lt(&p("12|3|4"), &p("12|34")).is_err());
    }

    #[test]
    fn fiber_chains() {
        assert_eq!(chow_fiber_model(&ChainStratum::open(Space::B, 4).unwrap()).unwrap().len(), 1);
        for s in strata_enumerate(Space::B, 4).unwrap() {
            assert_eq!(chow_fiber_model(&s).unwrap().len(), s.codim() + 1);
        }
        assert!(chow_fiber_model(&ChainStratum::open(Space::A, 4).unwrap()).is_err());
    }

    #[test]
    fn cstar_weights() {
        let r = cstar_report(5).unwrap();
        let w: Vec<(&str, i32)> = r.chart_weights.iter().map(|(s, w)| (s.as_str(), *w)).collect();
        assert_eq!(w, [("t", -1), ("z13", 0), ("z14", 0), ("z15", 0)]);
        assert_eq!(r.linearization[0], ("x1+x2+x3+x4+x5".to_string(), -1));
        assert!(r.linearization[1..].iter().all(|(_, w)| *w == 0));
        assert_eq!(r.semistable_locus, "P^4 \\ {[1:1:1:1:1]}");
        assert!(cstar_report(2).is_err());
        let q = cstar_boundary_fixed_points(3).unwrap();
        let names: Vec<String> = q.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["1|23<1|2|3", "12|3<1|2|3", "13|2<1|2|3"]);
    }

    #[test]
    fn dot_is_stable() {
        let s = ChainStratum::parse(Space::B, 5, "123|45<12|3|45").unwrap();
        let dot = tree_from_chain(&s).unwrap().to_dot();
        assert_eq!(dot, tree_from_chain(&s).unwrap().to_dot());
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert!(dot.starts_with("digraph level_tree {"));
    }
}
