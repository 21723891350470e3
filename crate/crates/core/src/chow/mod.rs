//! Chow rings presented by boundary divisors.
//!
//! Three presentations are supported:
//!
//! * [`RingModel::Wonderful`]: generators `x_σ` for `σ ∈ L_n ∖ {⊥, ⊤}`,
//!   linear relations `Σ_{i ∼_σ j} x_σ − Σ_{k ∼_σ l} x_σ`, and
//!   `x_σ x_τ = 0` for incomparable `σ, τ`. This is `CH*(B_n)`.
//! * [`RingModel::Keel`]: generators `x_S` for `2 <= |S| <= n-1`, the
//!   same linear pattern over subsets, and `x_S x_T = 0` for crossing
//!   `S, T`. This is `CH*(M_{0,n+1})`.
//! * [`RingModel::Augmented`]: generators `y_e` for the edges of `K_n` and
//!   `x_σ` for `σ ≠ ⊥`, with `y_e = Σ_{e ⊄ σ} x_σ`, `x_σ x_τ = 0` for
//!   incomparable pairs and `y_e x_σ = 0` when `e ⊄ σ`. This is `CH*(A_n)`.
//!
//! Here `e ⊄ σ` means the endpoints of `e` lie in different blocks of `σ`.
//! All relations are quadratic monomials on pairs, so a monomial survives
//! the monomial relations iff its support is pairwise compatible. Graded
//! pieces are computed by exact sparse elimination over the integers.

mod hilbert;
pub mod linalg;
mod poly;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangements::BettiTable;
use crate::error::{domain, Error, Result};
use crate::partitions::{enumerate_partitions, subset_elements, SetPartition};

pub use hilbert::{fy_hilbert_series, fy_hilbert_series_unchecked};
use linalg::{Echelon, SparseRow};
pub use poly::{Monomial, PolyElement};

/// Largest `n` for which presentations are built.
pub const MAX_RING_N: usize = 8;

pub const BETTI_SCHEMA: &str = "multiscale.betti/1";
pub const PAIRING_SCHEMA: &str = "multiscale.pairing/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RingModel {
    #[serde(rename = "B")]
    Wonderful,
    #[serde(rename = "M0")]
    Keel,
    #[serde(rename = "A")]
    Augmented,
}

impl RingModel {
    pub const ALL: [RingModel; 3] = [RingModel::Wonderful, RingModel::Keel, RingModel::Augmented];

    pub fn code(self) -> &'static str {
        match self {
            RingModel::Wonderful => "B",
            RingModel::Keel => "M0",
            RingModel::Augmented => "A",
        }
    }

    pub fn top_degree(self, n: usize) -> usize {
        match self {
            RingModel::Wonderful | RingModel::Keel => n.saturating_sub(2),
            RingModel::Augmented => n - 1,
        }
    }
}

impl fmt::Display for RingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for RingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b" | "wonderful" => Ok(RingModel::Wonderful),
            "m0" | "keel" => Ok(RingModel::Keel),
            "a" | "augmented" => Ok(RingModel::Augmented),
            _ => Err(Error::Parse(format!("unknown ring model {s:?} (expected B, M0 or A)"))),
        }
    }
}

/// A generator of a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    /// `x_σ` for a partition.
    Flat(SetPartition),
    /// `x_S` for a subset given as a bit mask.
    Subset(u64),
    /// `y_{ij}` with `i < j`.
    Edge(usize, usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Flat(p) => write!(f, "x[{p}]"),
            Generator::Subset(mask) => {
                let parts: Vec<String> = subset_elements(*mask).iter().map(|i| i.to_string()).collect();
                write!(f, "x[{}]", parts.join(","))
            }
            Generator::Edge(i, j) => write!(f, "y[{i},{j}]"),
        }
    }
}

/// Sparse integer linear form over the generators.
pub type LinearForm = Vec<(usize, i64)>;

/// Generators, relations and top degree of a graded ring.
#[derive(Debug, Clone)]
pub struct RingPresentation {
    pub n: usize,
    pub model: RingModel,
    pub generators: Vec<Generator>,
    pub top_degree: usize,
    pub linear_relations: Vec<LinearForm>,
    /// Pairs `(g, h)` with `g < h` whose product is declared zero.
    pub monomial_relations: Vec<(usize, usize)>,
    compatible: Vec<Vec<bool>>,
    labels: HashMap<String, usize>,
}

fn edges(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

fn edge_in(mask: u64, (i, j): (usize, usize)) -> bool {
    mask >> (i - 1) & 1 == 1 && mask >> (j - 1) & 1 == 1
}

/// `Σ_{g ∋ e} x_g − Σ_{g ∋ e'} x_g` for every unordered pair of edges.
fn edge_differences(n: usize, contains: impl Fn(usize, (usize, usize)) -> bool, count: usize) -> Vec<LinearForm> {
    let es = edges(n);
    let mut out = Vec::new();
    for (a, &e) in es.iter().enumerate() {
        for &f in &es[a + 1..] {
            let form: LinearForm = (0..count)
                .filter_map(|g| match (contains(g, e), contains(g, f)) {
                    (true, false) => Some((g, 1)),
                    (false, true) => Some((g, -1)),
                    _ => None,
                })
                .collect();
            out.push(form);
        }
    }
    out
}

/// Builds the presentation of the given model.
pub fn presentation(n: usize, model: RingModel) -> Result<RingPresentation> {
    if !(2..=MAX_RING_N).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: MAX_RING_N,
        });
    }
    let partitions = enumerate_partitions(n)?;
    let mut generators = Vec::new();
    let linear_relations;
    let compat: Box<dyn Fn(&Generator, &Generator) -> bool>;
    match model {
        RingModel::Wonderful => {
            generators.extend(partitions.into_iter().filter(|p| !p.is_bottom() && !p.is_top()).map(Generator::Flat));
            let flats = flats_of(&generators);
            linear_relations = edge_differences(n, |g, (i, j)| flats[g].same_block(i, j), generators.len());
            compat = Box::new(|a, b| match (a, b) {
                (Generator::Flat(p), Generator::Flat(q)) => p.comparable_unchecked(q),
                _ => unreachable!(),
            });
        }
        RingModel::Keel => {
            let mut subsets: Vec<u64> = (1u64..(1 << n) - 1).filter(|m| m.count_ones() >= 2).collect();
            subsets.sort_by(|a, b| {
                (a.count_ones(), subset_elements(*a)).cmp(&(b.count_ones(), subset_elements(*b)))
            });
            generators.extend(subsets.iter().map(|&m| Generator::Subset(m)));
            linear_relations = edge_differences(n, |g, e| edge_in(subsets[g], e), generators.len());
            compat = Box::new(|a, b| match (a, b) {
                (Generator::Subset(s), Generator::Subset(t)) => s & t == 0 || s & t == *s || s & t == *t,
                _ => unreachable!(),
            });
        }
        RingModel::Augmented => {
            let es = edges(n);
            generators.extend(es.iter().map(|&(i, j)| Generator::Edge(i, j)));
            let flat_gens: Vec<SetPartition> = partitions.into_iter().filter(|p| !p.is_bottom()).collect();
            let offset = generators.len();
            linear_relations = es
                .iter()
                .enumerate()
                .map(|(a, &(i, j))| {
                    let mut form = vec![(a, 1)];
                    form.extend(
                        flat_gens.iter().enumerate().filter(|(_, p)| !p.same_block(i, j)).map(|(b, _)| (offset + b, -1)),
                    );
                    form
                })
                .collect();
            generators.extend(flat_gens.into_iter().map(Generator::Flat));
            compat = Box::new(|a, b| match (a, b) {
                (Generator::Flat(p), Generator::Flat(q)) => p.comparable_unchecked(q),
                (Generator::Edge(i, j), Generator::Flat(p)) | (Generator::Flat(p), Generator::Edge(i, j)) => {
                    p.same_block(*i, *j)
                }
                (Generator::Edge(..), Generator::Edge(..)) => true,
                _ => unreachable!(),
            });
        }
    }
    let g = generators.len();
    let mut compatible = vec![vec![true; g]; g];
    let mut monomial_relations = Vec::new();
    for a in 0..g {
        for b in a + 1..g {
            if !compat(&generators[a], &generators[b]) {
                compatible[a][b] = false;
                compatible[b][a] = false;
                monomial_relations.push((a, b));
            }
        }
    }
    let labels = generators.iter().enumerate().map(|(i, gen)| (gen.to_string(), i)).collect();
    Ok(RingPresentation {
        n,
        model,
        generators,
        top_degree: model.top_degree(n),
        linear_relations,
        monomial_relations,
        compatible,
        labels,
    })
}

fn flats_of(generators: &[Generator]) -> Vec<SetPartition> {
    generators
        .iter()
        .map(|g| match g {
            Generator::Flat(p) => p.clone(),
            _ => unreachable!(),
        })
        .collect()
}

impl RingPresentation {
    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Whether the product of two generators survives the monomial relations.
    pub fn compatible(&self, a: usize, b: usize) -> bool {
        self.compatible[a][b]
    }

    /// Whether a sorted monomial has pairwise compatible support.
    pub fn survives(&self, monomial: &[usize]) -> bool {
        monomial
            .iter()
            .enumerate()
            .all(|(i, &a)| monomial[i + 1..].iter().all(|&b| self.compatible[a][b]))
    }

    /// Index of the generator with the given label, e.g. `x[12|3|4]`.
    pub fn generator_index(&self, label: &str) -> Option<usize> {
        self.labels.get(label).copied()
    }

    /// Index of the generator `x_σ`.
    pub fn flat_index(&self, sigma: &SetPartition) -> Option<usize> {
        self.generator_index(&Generator::Flat(sigma.clone()).to_string())
    }

    /// Surviving monomials of degree `k` in degree-lexicographic order.
    pub fn monomials(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        self.extend_monomials(k, 0, &mut current, &mut out);
        out
    }

    fn extend_monomials(&self, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for g in start..self.generators.len() {
            if current.iter().all(|&h| self.compatible[h][g]) {
                current.push(g);
                self.extend_monomials(k, g, current, out);
                current.pop();
            }
        }
    }

    /// The linear form as a ring element.
    pub fn linear_element(&self, form: &LinearForm) -> PolyElement {
        let mut e = PolyElement::zero();
        for &(g, c) in form {
            e.add_term(Monomial::new(vec![g]), BigInt::from(c));
        }
        e
    }

    pub fn parse_element(&self, text: &str) -> Result<PolyElement> {
        poly::parse(self, text)
    }

    pub fn format_element(&self, e: &PolyElement) -> String {
        poly::format(self, e)
    }
}

/// Exact data for one graded piece.
#[derive(Debug)]
struct Degree {
    monomials: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, u32>,
    echelon: Echelon<BigInt>,
    standard: Vec<u32>,
}

/// A presentation together with lazily computed graded pieces.
#[derive(Debug)]
pub struct ChowRing {
    presentation: RingPresentation,
    independent_relations: Vec<LinearForm>,
    degrees: Vec<OnceLock<Degree>>,
}

impl ChowRing {
    pub fn new(presentation: RingPresentation) -> Self {
        let mut echelon = Echelon::<BigInt>::default();
        let independent_relations = presentation
            .linear_relations
            .iter()
            .filter(|form| {
                let row: SparseRow<BigInt> = sorted_row(form.iter().map(|&(g, c)| (g as u32, BigInt::from(c))));
                echelon.insert(row).unwrap_or(false)
            })
            .cloned()
            .collect();
        let slots = presentation.top_degree + 2;
        ChowRing {
            presentation,
            independent_relations,
            degrees: (0..slots).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn build(n: usize, model: RingModel) -> Result<Self> {
        Ok(ChowRing::new(presentation(n, model)?))
    }

    pub fn presentation(&self) -> &RingPresentation {
        &self.presentation
    }

    pub fn top_degree(&self) -> usize {
        self.presentation.top_degree
    }

    /// Rank of the span of the linear relations.
    pub fn linear_relation_rank(&self) -> usize {
        self.independent_relations.len()
    }

    fn degree(&self, k: usize) -> &Degree {
        self.degrees[k].get_or_init(|| self.compute_degree(k))
    }

    fn compute_degree(&self, k: usize) -> Degree {
        let p = &self.presentation;
        // Reverse degree-lexicographic columns: each row's pivot is its
        // largest monomial, which favours finer partitions and makes every
        // pivot a unit, so standard monomials form an integral basis.
        let mut monomials = p.monomials(k);
        monomials.reverse();
        let index: HashMap<Vec<usize>, u32> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i as u32)).collect();
        let rows = || {
            let lower = if k == 0 { Vec::new() } else { p.monomials(k - 1) };
            let index = &index;
            lower.into_iter().flat_map(move |m| {
                self.independent_relations.iter().map(move |form| {
                    let mut row: SparseRow<i64> = Vec::with_capacity(form.len());
                    for &(g, c) in form {
                        if m.iter().all(|&h| p.compatible[h][g]) {
                            let mut prod = m.clone();
                            let at = prod.partition_point(|&h| h <= g);
                            prod.insert(at, g);
                            row.push((index[&prod], c));
                        }
                    }
                    row.sort_unstable_by_key(|e| e.0);
                    row
                })
            })
        };
        let mut small = Echelon::<i64>::default();
        let overflowed = rows().any(|r| small.insert(r).is_err());
        let echelon = if overflowed {
            let mut big = Echelon::<BigInt>::default();
            for r in rows() {
                let _ = big.insert(r.into_iter().map(|(c, v)| (c, BigInt::from(v))).collect());
            }
            big
        } else {
            small.into_big()
        };
        let standard = (0..monomials.len() as u32).filter(|c| !echelon.has_pivot(*c)).collect();
        Degree {
            monomials,
            index,
            echelon,
            standard,
        }
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.top_degree() {
            return Err(domain(format!("degree {k} exceeds the top degree {}", self.top_degree())));
        }
        Ok(())
    }

    /// Dimension of the degree-`k` piece.
    pub fn graded_dimension(&self, k: usize) -> Result<usize> {
        self.check_degree(k)?;
        Ok(self.degree(k).standard.len())
    }

    /// Whether every pivot of the degree-`k` elimination is `±1`.
    pub fn has_unit_pivots(&self, k: usize) -> Result<bool> {
        self.check_degree(k)?;
        Ok(self.degree(k).echelon.unit_pivots())
    }

    /// Number of surviving monomials of degree `k` before linear reduction.
    pub fn monomial_count(&self, k: usize) -> Result<usize> {
        self.check_degree(k)?;
        Ok(self.degree(k).monomials.len())
    }

    /// Graded dimensions in degrees `0..=d`, computed in parallel.
    pub fn betti_table(&self) -> BettiTable {
        let d = self.top_degree();
        // Largest pieces first so the long jobs start early.
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by_key(|&k| std::cmp::Reverse(k.min(d - k)));
        order.par_iter().for_each(|&k| {
            self.degree(k);
        });
        BettiTable {
            ranks: (0..=d).map(|k| self.degree(k).standard.len() as u64).collect(),
        }
    }

    /// Standard monomials of degree `k`: those not on a pivot column, in
    /// degree-lexicographic order.
    pub fn standard_monomials(&self, k: usize) -> Result<Vec<Monomial>> {
        self.check_degree(k)?;
        let deg = self.degree(k);
        Ok(deg.standard.iter().rev().map(|&c| Monomial::new(deg.monomials[c as usize].clone())).collect())
    }

    /// Product of two elements, dropping monomials killed by the monomial
    /// relations.
    pub fn multiply(&self, a: &PolyElement, b: &PolyElement) -> PolyElement {
        let mut out = PolyElement::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let prod = ma.times(mb);
                if self.presentation.survives(prod.generators()) {
                    out.add_term(prod, ca * cb);
                }
            }
        }
        out
    }

    /// Canonical representative of `a` modulo the relations. The result is
    /// supported on standard monomials.
    pub fn normal_form(&self, a: &PolyElement) -> Result<PolyElement> {
        let mut by_degree: BTreeMap<usize, Vec<(&Monomial, &BigInt)>> = BTreeMap::new();
        for (m, c) in a.terms() {
            if self.presentation.survives(m.generators()) {
                by_degree.entry(m.degree()).or_default().push((m, c));
            }
        }
        let mut out = PolyElement::zero();
        for (k, terms) in by_degree {
            let owned;
            let deg = if k > self.top_degree() {
                owned = self.compute_degree(k);
                &owned
            } else {
                self.degree(k)
            };
            let v: BTreeMap<u32, BigRational> = terms
                .iter()
                .map(|(m, c)| (deg.index[m.generators()], BigRational::from_integer((*c).clone())))
                .collect();
            for (col, value) in deg.echelon.reduce(&v) {
                if !value.is_integer() {
                    return Err(Error::Capability {
                        subject: self.presentation.format_element(a),
                        reason: "normal form has non-integral coefficients".into(),
                    });
                }
                out.add_term(Monomial::new(deg.monomials[col as usize].clone()), value.to_integer());
            }
        }
        Ok(out)
    }

    /// Matrix of `CH^k × CH^{d-k} → CH^d ≅ Z` in the standard monomial bases,
    /// with `CH^d` identified with `Z` through its unique standard monomial.
    pub fn pairing_matrix(&self, k: usize) -> Result<PairingMatrix> {
        self.check_degree(k)?;
        let d = self.top_degree();
        let top = self.degree(d);
        if top.standard.len() != 1 {
            return Err(Error::Internal(format!(
                "top degree piece has rank {} instead of 1",
                top.standard.len()
            )));
        }
        let point = top.standard[0];
        let rows = self.standard_monomials(k)?;
        let cols = self.standard_monomials(d - k)?;
        let entries = rows
            .par_iter()
            .map(|r| {
                cols.iter()
                    .map(|c| {
                        let prod = r.times(c);
                        if !self.presentation.survives(prod.generators()) {
                            return Ok(BigInt::zero());
                        }
                        let v = BTreeMap::from([(top.index[prod.generators()], BigRational::one())]);
                        let value = top.echelon.reduce(&v).remove(&point).unwrap_or_else(BigRational::zero);
                        if value.is_integer() {
                            Ok(value.to_integer())
                        } else {
                            Err(Error::Capability {
                                subject: format!("pairing in degree {k}"),
                                reason: "top degree normalization is non-integral".into(),
                            })
                        }
                    })
                    .collect::<Result<Vec<BigInt>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PairingMatrix {
            n: self.presentation.n,
            model: self.presentation.model,
            k,
            rows: rows.iter().map(|m| self.presentation.format_monomial(m)).collect(),
            cols: cols.iter().map(|m| self.presentation.format_monomial(m)).collect(),
            entries,
        })
    }

    /// Poincaré duality: palindromic ranks and a nondegenerate pairing in
    /// every degree.
    pub fn duality_check(&self) -> Result<DualityReport> {
        let betti = self.betti_table();
        let d = self.top_degree();
        let degrees = (0..=d)
            .map(|k| {
                let m = self.pairing_matrix(k)?;
                Ok(PairingRank {
                    k,
                    rows: m.rows.len(),
                    cols: m.cols.len(),
                    rank: m.rank(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let holds = betti.is_palindromic()
            && degrees.iter().all(|r| r.rows == r.cols && r.rank == r.rows);
        Ok(DualityReport { betti, degrees, holds })
    }
}

impl RingPresentation {
    fn format_monomial(&self, m: &Monomial) -> String {
        let mut e = PolyElement::zero();
        e.add_term(m.clone(), BigInt::one());
        self.format_element(&e)
    }
}

fn sorted_row(entries: impl Iterator<Item = (u32, BigInt)>) -> SparseRow<BigInt> {
    let mut row: SparseRow<BigInt> = entries.filter(|e| !e.1.is_zero()).collect();
    row.sort_by_key(|e| e.0);
    row
}

/// Integer matrix of the degree-`k` pairing with row and column labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingMatrix {
    pub n: usize,
    pub model: RingModel,
    pub k: usize,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<BigInt>>,
}

impl PairingMatrix {
    pub fn rank(&self) -> usize {
        linalg::dense_rank(&self.entries)
    }

    pub fn to_record(&self) -> PairingRecord {
        PairingRecord {
            schema: PAIRING_SCHEMA.to_string(),
            model: self.model,
            n: self.n,
            k: self.k,
            rank: self.rank(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self.entries.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        }
    }

    /// CSV with a header row of column labels and one labelled line per row.
    pub fn to_csv(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        let mut out = String::from("\"\"");
        for c in &self.cols {
            out.push(',');
            out.push_str(&quote(c));
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.entries) {
            out.push_str(&quote(label));
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Serialized pairing matrix. Entries are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingRecord {
    pub schema: String,
    pub model: RingModel,
    pub n: usize,
    pub k: usize,
    pub rank: usize,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<String>>,
}

/// Serialized Betti table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiRecord {
    pub schema: String,
    pub model: String,
    pub n: usize,
    pub ranks: Vec<u64>,
}

impl BettiRecord {
    pub fn new(model: impl Into<String>, n: usize, table: &BettiTable) -> Self {
        BettiRecord {
            schema: BETTI_SCHEMA.to_string(),
            model: model.into(),
            n,
            ranks: table.ranks.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,rank\n");
        for (k, r) in self.ranks.iter().enumerate() {
            out.push_str(&format!("{k},{r}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingRank {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    pub betti: BettiTable,
    pub degrees: Vec<PairingRank>,
    pub holds: bool,
}
