//! Named verification suites run by `multiscale verify`.

use std::fmt::Write as _;

use clap::ValueEnum;
use multiscale_core::arrangements::{
    betti_blowup_oracle, blowup_plan, catalog, BlowupPolicy, CatalogKind, Subspace, Ambient,
};
use multiscale_core::chow::{ChowRing, PolyElement, RingModel};
use multiscale_core::partitions::{enumerate_partitions, proper_partitions, subset_elements};
use multiscale_core::strata::{
    chain_from_tree, chow_fiber_model, cstar_boundary_fixed_points, cstar_report, divisor_intersection,
    exceptional_lt, is_valid_blowdown_order, partition_to_tree, sigma_of_two_level, strata_enumerate,
    tree_from_chain, Space,
};
use multiscale_core::{Error, Result, SetPartition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SigmaBijection,
    BuildingSets,
    IdealConsistency,
    Duality,
    OracleMatch,
    FiberChains,
    CstarWeights,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::SigmaBijection,
        Suite::BuildingSets,
        Suite::IdealConsistency,
        Suite::Duality,
        Suite::OracleMatch,
        Suite::FiberChains,
        Suite::CstarWeights,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SigmaBijection => "sigma-bijection",
            Suite::BuildingSets => "building-sets",
            Suite::IdealConsistency => "ideal-consistency",
            Suite::Duality => "duality",
            Suite::OracleMatch => "oracle-match",
            Suite::FiberChains => "fiber-chains",
            Suite::CstarWeights => "cstar-weights",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub n: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn finish(self, suite: Suite, n: usize) -> SuiteReport {
        SuiteReport {
            suite: suite.name(),
            n,
            passed: self.0.iter().all(|c| c.passed),
            checks: self.0,
        }
    }
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run(suite: Suite, n: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    if suite == Suite::All {
        return Suite::EACH.iter().map(|&s| run_one(s, n, seed)).collect();
    }
    Ok(vec![run_one(suite, n, seed)?])
}

fn run_one(suite: Suite, n: usize, seed: u64) -> Result<SuiteReport> {
    let mut c = Checks::default();
    match suite {
        Suite::SigmaBijection => sigma_bijection(&mut c, n, seed)?,
        Suite::BuildingSets => building_sets(&mut c, n)?,
        Suite::IdealConsistency => ideal_consistency(&mut c, n, seed)?,
        Suite::Duality => duality(&mut c, n)?,
        Suite::OracleMatch => oracle_match(&mut c, n)?,
        Suite::FiberChains => fiber_chains(&mut c, n)?,
        Suite::CstarWeights => cstar_weights(&mut c, n)?,
        Suite::All => unreachable!(),
    }
    Ok(c.finish(suite, n))
}

fn ex(n: usize) -> Result<Vec<SetPartition>> {
    Ok(proper_partitions(n)?.into_iter().filter(SetPartition::in_ex).collect())
}

fn sigma_bijection(c: &mut Checks, n: usize, seed: u64) -> Result<()> {
    let labels = proper_partitions(n)?;
    let bell = enumerate_partitions(n)?.len();
    let mut round_trips = 0;
    let mut trees = Vec::new();
    for sigma in &labels {
        let t = partition_to_tree(sigma, n, Space::B)?;
        if sigma_of_two_level(&t)? == *sigma {
            round_trips += 1;
        }
        trees.push(t.to_dot());
    }
    trees.sort();
    trees.dedup();
    c.add(
        "two-level B-trees",
        round_trips == labels.len() && trees.len() == labels.len() && labels.len() + 2 == bell,
        format!("{} distinct trees, {round_trips} round trips, Bell({n}) - 2 = {}", trees.len(), bell - 2),
    );
    for space in [Space::B, Space::A] {
        let strata = strata_enumerate(space, n)?;
        let mut ok = 0;
        for s in &strata {
            let t = tree_from_chain(s)?;
            if t.validate().is_ok() && chain_from_tree(&t)? == *s {
                ok += 1;
            }
        }
        c.add(
            format!("{space}-strata chain/tree round trip"),
            ok == strata.len(),
            format!("{ok} of {} strata", strata.len()),
        );
    }
    let ex = ex(n)?;
    let mut agree = 0;
    for a in &ex {
        for b in &ex {
            if exceptional_lt(a, b)? == (a.leq(b)? && a != b) {
                agree += 1;
            }
        }
    }
    c.add(
        "exceptional order agrees with refinement",
        agree == ex.len() * ex.len(),
        format!("{agree} of {} ordered pairs in Ex_{n}", ex.len() * ex.len()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid = 0;
    let trials = 20;
    for _ in 0..trials {
        if is_valid_blowdown_order(&random_linear_extension(&ex, &mut rng))? {
            valid += 1;
        }
    }
    c.add(
        "random linear extensions of Ex are blowdown orders",
        valid == trials,
        format!("{valid} of {trials} (seed {seed}, |Ex_{n}| = {})", ex.len()),
    );
    Ok(())
}

/// A random topological sort of `items` under the refinement order.
fn random_linear_extension(items: &[SetPartition], rng: &mut ChaCha8Rng) -> Vec<SetPartition> {
    let mut remaining: Vec<SetPartition> = items.to_vec();
    let mut out = Vec::with_capacity(items.len());
    while !remaining.is_empty() {
        let minimal: Vec<usize> = (0..remaining.len())
            .filter(|&i| !remaining.iter().any(|o| o != &remaining[i] && o.leq(&remaining[i]).unwrap_or(false)))
            .collect();
        let pick = *minimal.choose(rng).expect("a finite poset has minimal elements");
        out.push(remaining.remove(pick));
    }
    out
}

fn building_sets(c: &mut Checks, n: usize) -> Result<()> {
    use CatalogKind::*;
    for kind in [DiagInf, PolyInf, PolyInfNoTop, PolyOnly, PolyUnionPolyInf, BottomPoint] {
        let cat = catalog(n, kind)?;
        c.add(
            format!("{kind:?} is a building set"),
            cat.is_building_set(),
            format!("{} members in {:?}", cat.len(), cat.ambient()),
        );
        let plan = blowup_plan(&cat, BlowupPolicy::IncreasingDim)?;
        c.add(
            format!("{kind:?} increasing-dimension plan"),
            plan.all_prefixes_valid(),
            "every prefix is a building set",
        );
    }
    let diag = catalog(n, DiagInf)?;
    let mut good = 0;
    let labels = proper_partitions(n)?;
    for sigma in &labels {
        let s = Subspace::polydiagonal(sigma.clone(), Ambient::HyperplaneH)?;
        let g = diag.g_factors(&s)?;
        let mut expected: Vec<Vec<usize>> = sigma.non_singleton_blocks().into_iter().map(subset_elements).collect();
        let mut got: Vec<Vec<usize>> = g
            .factors
            .iter()
            .map(|f| f.partition().single_non_singleton_block().map(subset_elements).unwrap_or_default())
            .collect();
        expected.sort();
        got.sort();
        if g.transversal && expected == got {
            good += 1;
        }
    }
    c.add(
        "G-factors in Diag_inf are the non-singleton block diagonals",
        good == labels.len(),
        format!("{good} of {} polydiagonals", labels.len()),
    );
    Ok(())
}

fn ideal_consistency(c: &mut Checks, n: usize, seed: u64) -> Result<()> {
    let ring = ChowRing::build(n, RingModel::Wonderful)?;
    let p = ring.presentation();
    let labels = proper_partitions(n)?;
    let mut agree = 0;
    let mut pairs = 0;
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            pairs += 1;
            let empty = divisor_intersection(a, b, Space::B)?.is_none();
            let incomparable = !a.leq(b)? && !b.leq(a)?;
            let (ga, gb) = (p.flat_index(a).unwrap(), p.flat_index(b).unwrap());
            let in_j = !p.compatible(ga, gb);
            if empty == incomparable && incomparable == in_j {
                agree += 1;
            }
        }
    }
    c.add(
        "intersection empty iff incomparable iff product in J",
        agree == pairs,
        format!("{agree} of {pairs} pairs"),
    );
    let mut zero = 0;
    for form in &p.linear_relations {
        if ring.normal_form(&p.linear_element(form))?.is_zero() {
            zero += 1;
        }
    }
    c.add(
        "linear relations reduce to zero",
        zero == p.linear_relations.len(),
        format!("{zero} of {}", p.linear_relations.len()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ring.top_degree();
    let samples = 25;
    let mut ok = 0;
    for _ in 0..samples {
        let ka = rng.gen_range(0..=d);
        let kb = rng.gen_range(0..=d - ka);
        let a = random_element(&ring, ka, &mut rng);
        let b = random_element(&ring, kb, &mut rng);
        let ab = ring.normal_form(&ring.multiply(&a, &b))?;
        let reduced = ring.normal_form(&ring.multiply(&ring.normal_form(&a)?, &b))?;
        if ab == reduced && ring.multiply(&a, &b) == ring.multiply(&b, &a) {
            ok += 1;
        }
    }
    c.add(
        "products respect reduction",
        ok == samples,
        format!("{ok} of {samples} random pairs (seed {seed})"),
    );
    Ok(())
}

fn random_element(ring: &ChowRing, k: usize, rng: &mut ChaCha8Rng) -> PolyElement {
    let monomials = ring.presentation().monomials(k);
    let mut e = PolyElement::zero();
    for _ in 0..3 {
        let m = monomials[rng.gen_range(0..monomials.len())].clone();
        e.add_term(multiscale_core::chow::Monomial::new(m), rng.gen_range(-3i64..=3).into());
    }
    e
}

/// Largest `n` for which the augmented duality check runs.
pub const AUGMENTED_DUALITY_MAX_N: usize = 5;

fn duality(c: &mut Checks, n: usize) -> Result<()> {
    for model in RingModel::ALL {
        if model == RingModel::Augmented && n > AUGMENTED_DUALITY_MAX_N {
            c.add(format!("{model} duality"), true, format!("skipped above n = {AUGMENTED_DUALITY_MAX_N}"));
            continue;
        }
        let ring = ChowRing::build(n, model)?;
        let report = ring.duality_check()?;
        let ranks: Vec<String> = report.degrees.iter().map(|r| format!("{}/{}", r.rank, r.rows)).collect();
        let ends = report.betti.ranks.first() == Some(&1) && report.betti.ranks.last() == Some(&1);
        c.add(
            format!("{model} duality"),
            report.holds && ends,
            format!("betti {}, pairing ranks {}", report.betti, ranks.join(" ")),
        );
    }
    Ok(())
}

fn oracle_match(c: &mut Checks, n: usize) -> Result<()> {
    let cases = [
        (RingModel::Wonderful, CatalogKind::PolyInfNoTop),
        (RingModel::Keel, CatalogKind::DiagInf),
        (RingModel::Augmented, CatalogKind::PolyInf),
    ];
    for (model, kind) in cases {
        let plan = blowup_plan(&catalog(n, kind)?, BlowupPolicy::IncreasingDim)?;
        match betti_blowup_oracle(&plan) {
            Ok(oracle) => {
                let ring = ChowRing::build(n, model)?.betti_table();
                c.add(
                    format!("{model} presentation matches {kind:?} oracle"),
                    ring == oracle,
                    format!("presentation {ring}, oracle {oracle}"),
                );
            }
            Err(Error::Capability { subject, reason }) => {
                c.add(
                    format!("{model} presentation matches {kind:?} oracle"),
                    true,
                    format!("skipped: oracle refuses {subject} ({reason})"),
                );
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn fiber_chains(c: &mut Checks, n: usize) -> Result<()> {
    let strata = strata_enumerate(Space::B, n)?;
    let mut ok = 0;
    for s in &strata {
        if chow_fiber_model(s)?.len() == s.codim() + 1 {
            ok += 1;
        }
    }
    c.add(
        "fiber chain length is codim + 1",
        ok == strata.len(),
        format!("{ok} of {} B-strata", strata.len()),
    );
    Ok(())
}

fn cstar_weights(c: &mut Checks, n: usize) -> Result<()> {
    if n < 3 {
        c.add("chart weights", true, format!("skipped: no weight table for n = {n}"));
        return Ok(());
    }
    let r = cstar_report(n)?;
    let t_ok = r.chart_weights.first() == Some(&("t".to_string(), -1));
    let z_ok = r.chart_weights[1..].iter().all(|(name, w)| name.starts_with("z1") && *w == 0)
        && r.chart_weights.len() == n - 1;
    let mut text = String::new();
    for (name, w) in &r.chart_weights {
        let _ = write!(text, "{name}:{w} ");
    }
    c.add("chart weights", t_ok && z_ok, text.trim_end().to_string());
    let sum: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let lin_ok = r.linearization.first() == Some(&(sum.join("+"), -1));
    c.add(
        "linearization row",
        lin_ok,
        format!("{} -> {}", r.linearization[0].0, r.linearization[0].1),
    );
    if n == 3 {
        let strata = strata_enumerate(Space::A, 3)?;
        let divisors = strata.iter().filter(|s| s.codim() == 1).count();
        let fixed = cstar_boundary_fixed_points(3)?;
        let names: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
        c.add(
            "A-strata",
            strata.len() == 8 && divisors == 4,
            format!("{} A-strata, {divisors} boundary divisors", strata.len()),
        );
        c.add(
            "fixed-point count",
            fixed.len() == 3,
            format!("fixed-point count {}: {}", fixed.len(), names.join(", ")),
        );
    }
    Ok(())
}

/// Plain text rendering, one line per check.
pub fn render_text(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "suite {} (n = {}): {}", r.suite, r.n, verdict(r.passed));
        for c in &r.checks {
            let _ = writeln!(out, "  {} {}: {}", verdict(c.passed), c.name, c.detail);
        }
    }
    let all = reports.iter().all(|r| r.passed);
    let _ = writeln!(out, "overall: {}", verdict(all));
    out
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
