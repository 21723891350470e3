//! Polydiagonal subspace arrangements in `P^{n-1}` and in the hyperplane
//! `H = {x_1 + ... + x_n = 0}`.
//!
//! Every subspace is symbolic: `Δ_σ` is indexed by a partition `σ`, and its
//! slice `Δ^h_σ = Δ_σ ∩ H` by the same partition plus a flag. All
//! intersections, containments and dimensions reduce to lattice operations
//! on `L_n`, so nothing here touches coordinates.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::partitions::{enumerate_partitions_with_limit, subset_elements, subset_mask, SetPartition, MAX_GROUND_SET};

/// Which space a subspace is written in: `Δ_σ ⊆ P^{n-1}` or `Δ^h_σ ⊆ H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ambient {
    #[serde(rename = "P")]
    ProjectiveSpace,
    #[serde(rename = "H")]
    HyperplaneH,
}

impl Ambient {
    /// Projective dimension of the ambient space for ground set size `n`.
    pub fn dim(self, n: usize) -> usize {
        match self {
            Ambient::ProjectiveSpace => n - 1,
            Ambient::HyperplaneH => n - 2,
        }
    }
}

/// How a subspace was specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Polydiagonal(SetPartition),
    /// `Δ_S`, given by the subset mask `S`.
    Diagonal(u64),
}

/// A polydiagonal or diagonal, possibly sliced by `H`.
///
/// Equality and hashing look only at the underlying locus, so `Δ^h_{12}`
/// given as a diagonal equals `Δ^h_{12|3|4}` given as a polydiagonal.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: Ambient,
    shape: Shape,
    partition: SetPartition,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.partition == other.partition
    }
}

impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.partition.hash(state);
    }
}

impl Subspace {
    pub fn polydiagonal(partition: SetPartition, ambient: Ambient) -> Result<Self> {
        if ambient == Ambient::HyperplaneH && partition.is_bottom() {
            return Err(domain("Δ^h_⊥ is empty: [1:...:1] does not lie on H"));
        }
        Ok(Subspace {
            ambient,
            shape: Shape::Polydiagonal(partition.clone()),
            partition,
        })
    }

    pub fn diagonal(n: usize, subset: &[usize], ambient: Ambient) -> Result<Self> {
        if n < 2 || n > MAX_GROUND_SET {
            return Err(domain(format!("ground set size {n} unsupported")));
        }
        if subset.iter().any(|&e| e == 0 || e > n) {
            return Err(domain(format!("subset {subset:?} leaves 1..={n}")));
        }
        let mask = subset_mask(subset);
        let size = mask.count_ones() as usize;
        if size < 2 {
            return Err(domain("a diagonal needs at least two indices"));
        }
        if ambient == Ambient::HyperplaneH && size > n - 1 {
            return Err(domain("Δ^h_S requires |S| <= n - 1"));
        }
        Ok(Subspace {
            ambient,
            shape: Shape::Diagonal(mask),
            partition: SetPartition::with_single_block(n, mask)?,
        })
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The indexing partition; a diagonal `Δ_S` is the polydiagonal of the
    /// partition whose only non-singleton block is `S`.
    pub fn partition(&self) -> &SetPartition {
        &self.partition
    }

    pub fn in_hyperplane(&self) -> bool {
        self.ambient == Ambient::HyperplaneH
    }

    /// Projective dimension: `#blocks - 1` in `P^{n-1}`, `#blocks - 2` in `H`.
    pub fn dim(&self) -> usize {
        self.partition.block_count() - 1 - usize::from(self.in_hyperplane())
    }

    /// Codimension inside a model whose ambient space is `ambient`.
    pub fn codim_in(&self, ambient: Ambient) -> usize {
        ambient.dim(self.n()) - self.dim()
    }

    /// Whether `other ⊆ self` as loci in `P^{n-1}`.
    pub fn contains(&self, other: &Subspace) -> bool {
        self.n() == other.n()
            && (other.in_hyperplane() || !self.in_hyperplane())
            && other.partition.le_unchecked(&self.partition)
    }

    /// Intersection as a locus; `None` when it is empty.
    ///
    /// Mixing `Δ_σ` and `Δ^h_τ` is allowed since both live in `P^{n-1}`; the
    /// result then lies in `H`.
    pub fn intersect(&self, other: &Subspace) -> Result<Option<Subspace>> {
        if self.n() != other.n() {
            return Err(domain(format!(
                "subspaces of different ambient spaces (n = {} vs {})",
                self.n(),
                other.n()
            )));
        }
        Ok(self.meet(other))
    }

    fn meet(&self, other: &Subspace) -> Option<Subspace> {
        let partition = self.partition.meet_unchecked(&other.partition);
        let ambient = self.ambient.max(other.ambient);
        if ambient == Ambient::HyperplaneH && partition.is_bottom() {
            return None;
        }
        Some(Subspace {
            ambient,
            shape: Shape::Polydiagonal(partition.clone()),
            partition,
        })
    }

    /// Whether this is one of the diagonals `Δ^h_S` of `Diag∞`.
    pub fn is_hyperplane_diagonal(&self) -> bool {
        self.in_hyperplane()
            && self
                .partition
                .single_non_singleton_block()
                .is_some_and(|b| (b.count_ones() as usize) < self.n())
    }

    fn sort_key(&self) -> (usize, Ambient, SetPartition) {
        (self.dim(), self.ambient, self.partition.clone())
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = if self.in_hyperplane() { "^h" } else { "" };
        match &self.shape {
            Shape::Polydiagonal(p) => write!(f, "Δ{h}[{p}]"),
            Shape::Diagonal(m) => {
                let elems: Vec<String> = subset_elements(*m).iter().map(|e| e.to_string()).collect();
                write!(f, "Δ{h}{{{}}}", elems.join(","))
            }
        }
    }
}

/// The arrangements of the wonderful-model table, plus custom families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CatalogKind {
    /// `{Δ^h_S : 2 <= |S| <= n-1}` in `H`.
    DiagInf,
    /// `{Δ^h_σ : σ ≠ ⊥}` in `P^{n-1}`.
    PolyInf,
    /// `{Δ^h_σ : σ ≠ ⊥, ⊤}` in `H`; the building set of `Y_n`.
    PolyInfNoTop,
    /// `{Δ_σ : σ ≠ ⊤}` in `P^{n-1}`.
    PolyOnly,
    /// `Poly ∪ Poly∞` in `P^{n-1}`.
    PolyUnionPolyInf,
    /// `{Δ_⊥}` in `P^{n-1}`.
    BottomPoint,
    Custom,
}

impl CatalogKind {
    pub fn ambient(self) -> Option<Ambient> {
        match self {
            CatalogKind::DiagInf | CatalogKind::PolyInfNoTop => Some(Ambient::HyperplaneH),
            CatalogKind::PolyInf
            | CatalogKind::PolyOnly
            | CatalogKind::PolyUnionPolyInf
            | CatalogKind::BottomPoint => Some(Ambient::ProjectiveSpace),
            CatalogKind::Custom => None,
        }
    }
}

/// The wonderful models built from the catalogs above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WonderfulModel {
    /// `M_{0,n+1}` from `Diag∞`.
    M0,
    /// `Y_n ≅ B_n` from `Poly∞ ∖ {Δ^h_⊤}`.
    Y,
    /// `Bl_{Δ_⊥} P^{n-1}`.
    BlowupBottom,
    /// `A_n` from `Poly∞`.
    A,
    /// The `P^1`-bundle `P` from `Poly`.
    P,
    /// The resolution `R` from `Poly ∪ Poly∞`.
    R,
}

impl WonderfulModel {
    pub fn catalog_kind(self) -> CatalogKind {
        match self {
            WonderfulModel::M0 => CatalogKind::DiagInf,
            WonderfulModel::Y => CatalogKind::PolyInfNoTop,
            WonderfulModel::BlowupBottom => CatalogKind::BottomPoint,
            WonderfulModel::A => CatalogKind::PolyInf,
            WonderfulModel::P => CatalogKind::PolyOnly,
            WonderfulModel::R => CatalogKind::PolyUnionPolyInf,
        }
    }
}

/// A finite family of subspaces inside a fixed ambient space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildingSetCatalog {
    n: usize,
    kind: CatalogKind,
    ambient: Ambient,
    members: Vec<Subspace>,
}

/// Largest `n` the catalog constructors accept.
pub const MAX_CATALOG_N: usize = 9;

/// Generates one of the named catalogs.
pub fn catalog(n: usize, kind: CatalogKind) -> Result<BuildingSetCatalog> {
    if n < 2 {
        return Err(domain(format!("catalogs need n >= 2, got {n}")));
    }
    let all = enumerate_partitions_with_limit(n, MAX_CATALOG_N)?;
    let hyper = |p: &SetPartition| Subspace::polydiagonal(p.clone(), Ambient::HyperplaneH);
    let proj = |p: &SetPartition| Subspace::polydiagonal(p.clone(), Ambient::ProjectiveSpace);
    let members: Vec<Subspace> = match kind {
        CatalogKind::DiagInf => all
            .iter()
            .filter(|p| p.single_non_singleton_block().is_some() && !p.is_bottom())
            .map(hyper)
            .collect::<Result<_>>()?,
        CatalogKind::PolyInf => all.iter().filter(|p| !p.is_bottom()).map(hyper).collect::<Result<_>>()?,
        CatalogKind::PolyInfNoTop => all
            .iter()
            .filter(|p| !p.is_bottom() && !p.is_top())
            .map(hyper)
            .collect::<Result<_>>()?,
        CatalogKind::PolyOnly => all.iter().filter(|p| !p.is_top()).map(proj).collect::<Result<_>>()?,
        CatalogKind::PolyUnionPolyInf => {
            let mut v: Vec<Subspace> = all.iter().filter(|p| !p.is_top()).map(proj).collect::<Result<_>>()?;
            for p in all.iter().filter(|p| !p.is_bottom()) {
                v.push(hyper(p)?);
            }
            v
        }
        CatalogKind::BottomPoint => vec![proj(&SetPartition::bottom(n))?],
        CatalogKind::Custom => return Err(domain("use custom_catalog for custom families")),
    };
    Ok(BuildingSetCatalog {
        n,
        kind,
        ambient: kind.ambient().expect("named catalogs have an ambient"),
        members,
    })
}

/// A user-supplied family of subspaces inside `ambient`.
pub fn custom_catalog(n: usize, ambient: Ambient, members: Vec<Subspace>) -> Result<BuildingSetCatalog> {
    if n < 2 {
        return Err(domain(format!("catalogs need n >= 2, got {n}")));
    }
    let mut seen = HashSet::new();
    for m in &members {
        if m.n() != n {
            return Err(domain(format!("{m} is not a subspace for n = {n}")));
        }
        if ambient == Ambient::HyperplaneH && !m.in_hyperplane() {
            return Err(domain(format!("{m} does not lie in H")));
        }
        if !seen.insert(m.clone()) {
            return Err(domain(format!("duplicate member {m}")));
        }
    }
    Ok(BuildingSetCatalog {
        n,
        kind: CatalogKind::Custom,
        ambient,
        members,
    })
}

/// The `G`-factors of a subspace with respect to a catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GFactors {
    pub factors: Vec<Subspace>,
    /// The factors intersect in the subspace with additive codimensions.
    pub transversal: bool,
}

impl BuildingSetCatalog {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> CatalogKind {
        self.kind
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn members(&self) -> &[Subspace] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// All nonempty intersections of members, in increasing dimension.
    pub fn induced_arrangement(&self) -> Vec<Subspace> {
        let mut closure = Closure::default();
        for m in &self.members {
            closure.add(m);
        }
        let mut out = closure.items;
        out.sort_by_key(Subspace::sort_key);
        out
    }

    /// Minimal members containing `s`, with a transversality verdict.
    pub fn g_factors(&self, s: &Subspace) -> Result<GFactors> {
        if s.n() != self.n {
            return Err(domain(format!("{s} is not a subspace for n = {}", self.n)));
        }
        if !self.induced_arrangement().contains(s) {
            return Err(domain(format!("{s} is not in the arrangement induced by the catalog")));
        }
        Ok(factors_within(&self.members, s, self.ambient))
    }

    /// Every element of the induced arrangement is the transversal
    /// intersection of its minimal containing members.
    pub fn is_building_set(&self) -> bool {
        is_building_family(&self.members, &self.induced_arrangement(), self.ambient)
    }

    fn diag_then_ex_order(&self) -> Vec<usize> {
        let mut diag: Vec<usize> = (0..self.len())
            .filter(|&i| self.members[i].is_hyperplane_diagonal())
            .collect();
        let mut rest: Vec<usize> = (0..self.len())
            .filter(|&i| !self.members[i].is_hyperplane_diagonal())
            .collect();
        diag.sort_by_key(|&i| self.members[i].sort_key());
        rest.sort_by_key(|&i| self.members[i].sort_key());
        diag.extend(rest);
        diag
    }
}

fn factors_within(members: &[Subspace], s: &Subspace, ambient: Ambient) -> GFactors {
    let containing: Vec<&Subspace> = members.iter().filter(|m| m.contains(s)).collect();
    let factors: Vec<Subspace> = containing
        .iter()
        .filter(|m| !containing.iter().any(|o| o != *m && m.contains(o)))
        .map(|m| (*m).clone())
        .collect();
    let transversal = !factors.is_empty() && {
        let meet = factors[1..]
            .iter()
            .try_fold(factors[0].clone(), |acc, f| acc.meet(f));
        let codims: usize = factors.iter().map(|f| f.codim_in(ambient)).sum();
        meet.as_ref() == Some(s) && codims == s.codim_in(ambient)
    };
    GFactors { factors, transversal }
}

fn is_building_family(members: &[Subspace], arrangement: &[Subspace], ambient: Ambient) -> bool {
    arrangement
        .iter()
        .all(|s| factors_within(members, s, ambient).transversal)
}

/// Intersection closure maintained incrementally: adding `m` to a closed
/// family only requires `m` and its intersections with existing elements.
#[derive(Default)]
struct Closure {
    items: Vec<Subspace>,
    seen: HashSet<Subspace>,
}

impl Closure {
    fn add(&mut self, m: &Subspace) {
        let mut fresh: Vec<Subspace> = self.items.iter().filter_map(|c| c.meet(m)).collect();
        fresh.push(m.clone());
        for f in fresh {
            if self.seen.insert(f.clone()) {
                self.items.push(f);
            }
        }
    }
}

/// Ordering rules for blowup centers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowupPolicy {
    /// By dimension, ties broken by ambient then partition order.
    IncreasingDim,
    /// Members of `Diag∞` by increasing dimension, then everything else by
    /// increasing dimension.
    DiagThenEx,
    /// An explicit permutation of member indices.
    Custom(Vec<usize>),
}

/// Ordered blowup centers with per-prefix validity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupPlan {
    catalog: BuildingSetCatalog,
    order: Vec<usize>,
    /// `prefix_valid[i]`: the first `i + 1` centers form a building set of
    /// the arrangement they induce.
    prefix_valid: Vec<bool>,
}

/// Description of the prefix criterion carried into reports.
pub const PREFIX_CRITERION: &str =
    "every initial segment is a building set of the arrangement it induces (interpretation of the ordering condition)";

/// Orders the catalog and records which prefixes are building sets.
pub fn blowup_plan(cat: &BuildingSetCatalog, policy: BlowupPolicy) -> Result<BlowupPlan> {
    if !cat.is_building_set() {
        return Err(domain("catalog is not a building set"));
    }
    let order = match policy {
        BlowupPolicy::IncreasingDim => {
            let mut idx: Vec<usize> = (0..cat.len()).collect();
            idx.sort_by_key(|&i| cat.members[i].sort_key());
            idx
        }
        BlowupPolicy::DiagThenEx => cat.diag_then_ex_order(),
        BlowupPolicy::Custom(order) => {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..cat.len()).collect::<Vec<_>>() {
                return Err(domain("custom order is not a permutation of the members"));
            }
            order
        }
    };
    let mut closure = Closure::default();
    let mut prefix = Vec::with_capacity(order.len());
    let mut prefix_valid = Vec::with_capacity(order.len());
    for &i in &order {
        let m = &cat.members[i];
        closure.add(m);
        prefix.push(m.clone());
        prefix_valid.push(is_building_family(&prefix, &closure.items, cat.ambient));
    }
    Ok(BlowupPlan {
        catalog: cat.clone(),
        order,
        prefix_valid,
    })
}

impl BlowupPlan {
    pub fn catalog(&self) -> &BuildingSetCatalog {
        &self.catalog
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn prefix_valid(&self) -> &[bool] {
        &self.prefix_valid
    }

    pub fn all_prefixes_valid(&self) -> bool {
        self.prefix_valid.iter().all(|&v| v)
    }

    /// Centers in blowup order.
    pub fn centers(&self) -> impl Iterator<Item = &Subspace> {
        self.order.iter().map(|&i| &self.catalog.members[i])
    }
}

/// Graded ranks `b_0, b_2, b_4, ...` stored by complex degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiTable {
    pub ranks: Vec<u64>,
}

impl BettiTable {
    pub fn is_palindromic(&self) -> bool {
        self.ranks.iter().eq(self.ranks.iter().rev())
    }

    pub fn total(&self) -> u64 {
        self.ranks.iter().sum()
    }
}

impl fmt::Display for BettiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranks.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Betti numbers of the iterated blowup described by `plan`.
///
/// Starts from `P^m` and applies `H*(Bl_Z X) = H*(X) ⊕ ⊕_{j=1}^{c-1} H*(Z)[-j]`
/// for each center `Z` of codimension `c`. Centers must be points or
/// rational curves at blowup time; a center lying inside an earlier center
/// of codimension at least two is refused, since its dominant transform is
/// then larger than the subspace itself.
pub fn betti_blowup_oracle(plan: &BlowupPlan) -> Result<BettiTable> {
    let cat = &plan.catalog;
    let m = cat.ambient.dim(cat.n);
    let mut ranks = vec![1u64; m + 1];
    let mut done: Vec<&Subspace> = Vec::new();
    for center in plan.centers() {
        let codim = center.codim_in(cat.ambient);
        let refuse = |reason: &str| Error::Capability {
            subject: center.to_string(),
            reason: reason.to_string(),
        };
        if codim == 0 {
            return Err(refuse("center is the whole ambient space"));
        }
        if codim >= 2 {
            if let Some(big) = done
                .iter()
                .find(|e| e.codim_in(cat.ambient) >= 2 && *e != &center && e.contains(center))
            {
                return Err(refuse(&format!(
                    "lies inside the earlier center {big}, so its transform is not a point or curve"
                )));
            }
            match center.dim() {
                0 => {
                    for r in &mut ranks[1..codim] {
                        *r += 1;
                    }
                }
                1 => {
                    for j in 1..codim {
                        ranks[j] += 1;
                        ranks[j + 1] += 1;
                    }
                }
                d => return Err(refuse(&format!("center of dimension {d} is not a point or curve"))),
            }
        }
        done.push(center);
    }
    Ok(BettiTable { ranks })
}

/// JSON form of a subspace. Polydiagonals carry `partition`, diagonals
/// carry `subset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub ambient: Ambient,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subset: Option<Vec<usize>>,
}

impl From<&Subspace> for SubspaceRecord {
    fn from(s: &Subspace) -> Self {
        match &s.shape {
            Shape::Polydiagonal(p) => SubspaceRecord {
                ambient: s.ambient,
                partition: Some(p.to_string()),
                subset: None,
            },
            Shape::Diagonal(m) => SubspaceRecord {
                ambient: s.ambient,
                partition: None,
                subset: Some(subset_elements(*m)),
            },
        }
    }
}

impl SubspaceRecord {
    pub fn to_subspace(&self, n: usize) -> Result<Subspace> {
        match (&self.partition, &self.subset) {
            (Some(p), None) => {
                let p: SetPartition = p.parse()?;
                if p.n() != n {
                    return Err(domain(format!("partition {p} is not on 1..={n}")));
                }
                Subspace::polydiagonal(p, self.ambient)
            }
            (None, Some(s)) => Subspace::diagonal(n, s, self.ambient),
            _ => Err(Error::Parse("subspace needs exactly one of partition / subset".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub schema: String,
    pub n: usize,
    pub kind: CatalogKind,
    pub ambient: Ambient,
    pub members: Vec<SubspaceRecord>,
}

pub const CATALOG_SCHEMA: &str = "multiscale.catalog/1";
pub const PLAN_SCHEMA: &str = "multiscale.plan/1";

impl BuildingSetCatalog {
    pub fn to_record(&self) -> CatalogRecord {
        CatalogRecord {
            schema: CATALOG_SCHEMA.into(),
            n: self.n,
            kind: self.kind,
            ambient: self.ambient,
            members: self.members.iter().map(SubspaceRecord::from).collect(),
        }
    }

    pub fn from_record(rec: &CatalogRecord) -> Result<Self> {
        if rec.schema != CATALOG_SCHEMA {
            return Err(Error::Parse(format!("unexpected schema {:?}", rec.schema)));
        }
        let members = rec
            .members
            .iter()
            .map(|m| m.to_subspace(rec.n))
            .collect::<Result<Vec<_>>>()?;
        let mut cat = custom_catalog(rec.n, rec.ambient, members)?;
        if rec.kind != CatalogKind::Custom {
            let named = catalog(rec.n, rec.kind)?;
            if named.members != cat.members {
                return Err(domain(format!("members do not match the {:?} catalog", rec.kind)));
            }
            cat.kind = rec.kind;
        }
        Ok(cat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub center: SubspaceRecord,
    pub dim: usize,
    pub prefix_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub schema: String,
    pub n: usize,
    pub kind: CatalogKind,
    pub ambient: Ambient,
    pub prefix_criterion: String,
    pub steps: Vec<PlanStep>,
}

impl BlowupPlan {
    pub fn to_record(&self) -> PlanRecord {
        PlanRecord {
            schema: PLAN_SCHEMA.into(),
            n: self.catalog.n,
            kind: self.catalog.kind,
            ambient: self.catalog.ambient,
            prefix_criterion: PREFIX_CRITERION.into(),
            steps: self
                .centers()
                .zip(&self.prefix_valid)
                .map(|(c, &v)| PlanStep {
                    center: c.into(),
                    dim: c.dim(),
                    prefix_valid: v,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Subspace {
        Subspace::polydiagonal(s.parse().unwrap(), Ambient::HyperplaneH).unwrap()
    }

    fn dh(n: usize, s: &[usize]) -> Subspace {
        Subspace::diagonal(n, s, Ambient::HyperplaneH).unwrap()
    }

    #[test]
    fn catalog_sizes() {
        let diag4 = catalog(4, CatalogKind::DiagInf).unwrap();
        assert_eq!(diag4.len(), 10);
        let by_size = |k| {
            diag4
                .members()
                .iter()
                .filter(|m| m.partition().single_non_singleton_block().unwrap().count_ones() == k)
                .count()
        };
        assert_eq!((by_size(2), by_size(3)), (6, 4));
        let poly3 = catalog(3, CatalogKind::PolyInf).unwrap();
        let labels: Vec<String> = poly3.members().iter().map(|m| m.partition().to_string()).collect();
        assert_eq!(labels, ["1|23", "12|3", "13|2", "1|2|3"]);
        assert!(catalog(2, CatalogKind::DiagInf).unwrap().is_empty());
        assert!(catalog(1, CatalogKind::DiagInf).is_err());
        for n in 2..=6usize {
            let bell = enumerate_partitions_with_limit(n, 9).unwrap().len();
            assert_eq!(catalog(n, CatalogKind::DiagInf).unwrap().len(), (1 << n) - n - 2);
            assert_eq!(catalog(n, CatalogKind::PolyInf).unwrap().len(), bell - 1);
            assert_eq!(catalog(n, CatalogKind::PolyOnly).unwrap().len(), bell - 1);
        }
    }

    #[test]
    fn subspace_invariants() {
        assert!(Subspace::polydiagonal(SetPartition::bottom(4), Ambient::HyperplaneH).is_err());
        assert!(Subspace::diagonal(4, &[1], Ambient::ProjectiveSpace).is_err());
        assert!(Subspace::diagonal(4, &[1, 2, 3, 4], Ambient::HyperplaneH).is_err());
        assert!(Subspace::diagonal(4, &[1, 2, 3, 4], Ambient::ProjectiveSpace).is_ok());
        assert_eq!(dh(4, &[1, 2]), h("12|3|4"));
    }

    #[test]
    fn dimensions() {
        let pt = Subspace::polydiagonal(SetPartition::bottom(5), Ambient::ProjectiveSpace).unwrap();
        assert_eq!(pt.dim(), 0);
        assert_eq!(h("1|2|3|4|5").dim(), 3);
        assert_eq!(h("12|34|5").dim(), 1);
        assert_eq!(dh(5, &[1, 2]).dim(), 2);
    }

    #[test]
    fn intersections() {
        assert_eq!(dh(4, &[1, 2]).intersect(&dh(4, &[1, 3])).unwrap(), Some(dh(4, &[1, 2, 3])));
        assert_eq!(dh(4, &[1, 2]).intersect(&dh(4, &[3, 4])).unwrap(), Some(h("12|34")));
        assert_eq!(dh(3, &[1, 2]).intersect(&dh(3, &[1, 3])).unwrap(), None);
        assert!(dh(3, &[1, 2]).intersect(&dh(4, &[1, 2])).is_err());
    }

    #[test]
    fn intersection_is_commutative_and_associative() {
        for n in 2..=4 {
            let members = catalog(n, CatalogKind::PolyInf).unwrap().members().to_vec();
            for a in &members {
                for b in &members {
                    assert_eq!(a.meet(b), b.meet(a));
                    for c in &members {
                        let left = a.meet(b).and_then(|ab| ab.meet(c));
                        let right = b.meet(c).and_then(|bc| a.meet(&bc));
                        assert_eq!(left, right);
                    }
                }
            }
        }
    }

    #[test]
    fn g_factor_examples() {
        let diag5 = catalog(5, CatalogKind::DiagInf).unwrap();
        let g = diag5.g_factors(&h("12|34|5")).unwrap();
        assert_eq!(g.factors.len(), 2);
        assert!(g.factors.contains(&dh(5, &[1, 2])) && g.factors.contains(&dh(5, &[3, 4])));
        assert!(g.transversal);
        let g = diag5.g_factors(&dh(5, &[1, 2])).unwrap();
        assert_eq!(g.factors, vec![dh(5, &[1, 2])]);
        let poly = catalog(4, CatalogKind::PolyInf).unwrap();
        for s in poly.members() {
            assert_eq!(poly.g_factors(s).unwrap().factors, vec![s.clone()]);
        }
        // ⊤ slice is all of H, not an intersection of diagonals
        assert!(diag5.g_factors(&h("1|2|3|4|5")).is_err());
    }

    #[test]
    fn building_sets() {
        for n in 2..=5 {
            for kind in [
                CatalogKind::DiagInf,
                CatalogKind::PolyInf,
                CatalogKind::PolyInfNoTop,
                CatalogKind::PolyOnly,
                CatalogKind::PolyUnionPolyInf,
                CatalogKind::BottomPoint,
            ] {
                assert!(catalog(n, kind).unwrap().is_building_set(), "{kind:?} n={n}");
            }
        }
        let bad = custom_catalog(5, Ambient::HyperplaneH, vec![dh(5, &[1, 2, 3]), dh(5, &[1, 2, 4])]).unwrap();
        assert!(!bad.is_building_set());
        assert!(custom_catalog(4, Ambient::HyperplaneH, vec![dh(4, &[1, 2]), h("12|3|4")]).is_err());
    }

    #[test]
    fn plans() {
        let y4 = catalog(4, CatalogKind::PolyInfNoTop).unwrap();
        let plan = blowup_plan(&y4, BlowupPolicy::DiagThenEx).unwrap();
        assert!(plan.all_prefixes_valid());
        let first: Vec<bool> = plan.centers().map(Subspace::is_hyperplane_diagonal).collect();
        assert_eq!(first.iter().filter(|&&d| d).count(), 10);
        assert!(first[..10].iter().all(|&d| d));

        let a4 = catalog(4, CatalogKind::PolyInf).unwrap();
        assert!(blowup_plan(&a4, BlowupPolicy::IncreasingDim).unwrap().all_prefixes_valid());

        let diag4 = catalog(4, CatalogKind::DiagInf).unwrap();
        let mut dec: Vec<usize> = (0..diag4.len()).collect();
        dec.sort_by_key(|&i| std::cmp::Reverse(diag4.members()[i].dim()));
        let plan = blowup_plan(&diag4, BlowupPolicy::Custom(dec)).unwrap();
        assert!(!plan.all_prefixes_valid());
        assert!(blowup_plan(&diag4, BlowupPolicy::Custom(vec![0, 1])).is_err());

        let bad = custom_catalog(5, Ambient::HyperplaneH, vec![dh(5, &[1, 2, 3]), dh(5, &[1, 2, 4])]).unwrap();
        assert!(blowup_plan(&bad, BlowupPolicy::IncreasingDim).is_err());
    }

    fn oracle(n: usize, kind: CatalogKind, policy: BlowupPolicy) -> Result<Vec<u64>> {
        let plan = blowup_plan(&catalog(n, kind).unwrap(), policy).unwrap();
        betti_blowup_oracle(&plan).map(|b| b.ranks)
    }

    #[test]
    fn oracle_examples() {
        use BlowupPolicy::*;
        assert_eq!(oracle(4, CatalogKind::PolyInfNoTop, IncreasingDim).unwrap(), [1, 8, 1]);
        assert_eq!(oracle(4, CatalogKind::PolyInfNoTop, DiagThenEx).unwrap(), [1, 8, 1]);
        assert_eq!(oracle(3, CatalogKind::PolyInf, IncreasingDim).unwrap(), [1, 4, 1]);
        assert_eq!(oracle(4, CatalogKind::DiagInf, IncreasingDim).unwrap(), [1, 5, 1]);
        assert_eq!(oracle(5, CatalogKind::DiagInf, IncreasingDim).unwrap(), [1, 16, 16, 1]);
        assert_eq!(oracle(5, CatalogKind::PolyInfNoTop, IncreasingDim).unwrap(), [1, 41, 41, 1]);
        assert_eq!(oracle(3, CatalogKind::PolyInfNoTop, IncreasingDim).unwrap(), [1, 1]);
    }

    #[test]
    fn oracle_refusals() {
        // surfaces of codimension two in P^4
        let err = oracle(5, CatalogKind::PolyInf, BlowupPolicy::IncreasingDim).unwrap_err();
        assert!(matches!(err, Error::Capability { .. }));
        // Ex points blown up after the diagonal lines containing them
        let err = oracle(5, CatalogKind::PolyInfNoTop, BlowupPolicy::DiagThenEx).unwrap_err();
        assert!(matches!(err, Error::Capability { .. }), "{err}");
    }

    #[test]
    fn catalog_json_round_trip() {
        let cat = catalog(4, CatalogKind::DiagInf).unwrap();
        let json = serde_json::to_string(&cat.to_record()).unwrap();
        assert!(json.contains(r#"{"ambient":"H","partition":"123|4"}"#), "{json}");
        let back: CatalogRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(BuildingSetCatalog::from_record(&back).unwrap(), cat);

        let rec: SubspaceRecord = serde_json::from_str(r#"{"ambient":"H","subset":[1,2]}"#).unwrap();
        assert_eq!(rec.to_subspace(4).unwrap(), dh(4, &[1, 2]));
        assert_eq!(serde_json::to_string(&SubspaceRecord::from(&dh(4, &[1, 2]))).unwrap(), r#"{"ambient":"H","subset":[1,2]}"#);
    }
}
