//! Acceptance criteria, one PASS/FAIL line each.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use multiscale_core::arrangements::{
    betti_blowup_oracle, blowup_plan, catalog, Ambient, BlowupPolicy, CatalogKind, Subspace,
};
use multiscale_core::chow::{fy_hilbert_series, ChowRing, PolyElement, RingModel};
use multiscale_core::partitions::{enumerate_partitions, proper_partitions, subset_elements};
use multiscale_core::strata::{
    chow_fiber_model, cstar_boundary_fixed_points, cstar_report, divisor_intersection, exceptional_lt,
    is_valid_blowdown_order, partition_to_tree, sigma_of_two_level, strata_enumerate, Space,
};
use multiscale_core::SetPartition;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bell(n: usize) -> usize {
    enumerate_partitions(n).unwrap().len()
}

fn oracle(n: usize, kind: CatalogKind) -> Vec<u64> {
    let plan = blowup_plan(&catalog(n, kind).unwrap(), BlowupPolicy::IncreasingDim).unwrap();
    betti_blowup_oracle(&plan).unwrap().ranks
}

fn ranks(n: usize, model: RingModel) -> Vec<u64> {
    ChowRing::build(n, model).unwrap().betti_table().ranks
}

fn lt(a: &SetPartition, b: &SetPartition) -> bool {
    a != b && a.leq(b).unwrap()
}

fn criterion_1() -> Outcome {
    let expected: [(usize, &[u64]); 3] = [(3, &[1, 1]), (4, &[1, 8, 1]), (5, &[1, 41, 41, 1])];
    let start = Instant::now();
    for (n, want) in expected {
        let got = ranks(n, RingModel::Wonderful);
        ensure(got == want, || format!("n = {n}: presentation gives {got:?}, expected {want:?}"))?;
        let o = oracle(n, CatalogKind::PolyInfNoTop);
        ensure(o == want, || format!("n = {n}: oracle gives {o:?}"))?;
    }
    let small = start.elapsed();
    ensure(small < Duration::from_secs(10), || format!("n <= 5 took {small:?}"))?;
    let start = Instant::now();
    let six = ranks(6, RingModel::Wonderful);
    let big = start.elapsed();
    ensure(big < Duration::from_secs(300), || format!("n = 6 took {big:?}"))?;
    ensure(six.iter().eq(six.iter().rev()), || format!("n = 6 table {six:?} is not palindromic"))?;
    let ch1 = (bell(6) - 2 - 14) as u64;
    ensure(ch1 == 187 && six[1] == ch1, || format!("n = 6 CH^1 = {}, expected {ch1}", six[1]))?;
    Ok(format!("n<=5 exact with oracle in {small:.2?}; n=6 table {six:?} in {big:.2?}"))
}

fn criterion_2() -> Outcome {
    let o = oracle(3, CatalogKind::PolyInf);
    let r = ranks(3, RingModel::Augmented);
    ensure(o == [1, 4, 1] && r == [1, 4, 1], || format!("oracle {o:?}, augmented {r:?}"))?;
    let strata = strata_enumerate(Space::A, 3).unwrap();
    let divisors = strata.iter().filter(|s| s.codim() == 1).count();
    ensure(strata.len() == 8 && divisors == 4, || format!("{} strata, {divisors} divisors", strata.len()))?;
    let points = cstar_boundary_fixed_points(3).unwrap();
    let mut names: Vec<String> = points.iter().map(|s| s.to_string()).collect();
    names.sort();
    let mut want: Vec<String> = [(1, 2, 3), (1, 3, 2), (2, 3, 1)]
        .iter()
        .map(|&(i, j, k)| {
            let sigma = SetPartition::new(3, &[vec![i, j], vec![k]]).unwrap();
            format!("{sigma}<1|2|3")
        })
        .collect();
    want.sort();
    ensure(names == want, || format!("codim-2 points {names:?}, expected {want:?}"))?;
    Ok(format!("(1,4,1) twice; 8 strata, 4 divisors, points {}", names.join(" ")))
}

fn criterion_3() -> Outcome {
    for (n, want) in [(4, vec![1, 5, 1]), (5, vec![1, 16, 16, 1])] {
        let r = ranks(n, RingModel::Keel);
        let o = oracle(n, CatalogKind::DiagInf);
        ensure(r == want && o == want, || format!("n = {n}: presentation {r:?}, oracle {o:?}"))?;
    }
    Ok("(1,5,1) and (1,16,16,1) match the oracle".into())
}

fn criterion_4() -> Outcome {
    for n in 2..=6 {
        let labels = proper_partitions(n).unwrap();
        let mut trees = Vec::new();
        for sigma in &labels {
            let t = partition_to_tree(sigma, n, Space::B).unwrap();
            ensure(sigma_of_two_level(&t).unwrap() == *sigma, || format!("{sigma} does not round trip"))?;
            trees.push(t.to_dot());
        }
        trees.sort();
        trees.dedup();
        ensure(trees.len() == bell(n) - 2, || format!("n = {n}: {} trees", trees.len()))?;
        let ex: Vec<SetPartition> = labels.into_iter().filter(SetPartition::in_ex).collect();
        for a in &ex {
            for b in &ex {
                ensure(exceptional_lt(a, b).unwrap() == lt(a, b), || format!("order mismatch at {a}, {b}"))?;
            }
        }
    }
    let ex5: Vec<SetPartition> = proper_partitions(5).unwrap().into_iter().filter(SetPartition::in_ex).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = 500;
    let mut extensions = 0;
    for _ in 0..samples {
        let mut order = ex5.clone();
        order.shuffle(&mut rng);
        let is_extension = (0..order.len()).all(|i| (0..i).all(|j| !lt(&order[i], &order[j])));
        ensure(is_valid_blowdown_order(&order).unwrap() == is_extension, || "blowdown check disagrees".into())?;
        let mut sorted = order.clone();
        sorted.sort_by_key(|p| p.block_count());
        ensure(is_valid_blowdown_order(&sorted).unwrap(), || "a linear extension was rejected".into())?;
        extensions += 1;
    }
    Ok(format!(
        "Bell(n)-2 two-level trees for n<=6; order agrees on Ex_n; {extensions} linear extensions of Ex_5 ({} elements) accepted",
        ex5.len()
    ))
}

fn criterion_5() -> Outcome {
    let mut pairs = 0;
    let mut relations = 0;
    for n in 2..=5 {
        let ring = ChowRing::build(n, RingModel::Wonderful).unwrap();
        let p = ring.presentation();
        let labels = proper_partitions(n).unwrap();
        for a in &labels {
            for b in &labels {
                if a == b {
                    continue;
                }
                let empty = divisor_intersection(a, b, Space::B).unwrap().is_none();
                let incomparable = !a.leq(b).unwrap() && !b.leq(a).unwrap();
                let prod = ring.multiply(
                    &PolyElement::generator(p.flat_index(a).unwrap()),
                    &PolyElement::generator(p.flat_index(b).unwrap()),
                );
                ensure(empty == incomparable && incomparable == prod.is_zero(), || format!("triangle fails at {a}, {b}"))?;
                pairs += 1;
            }
        }
        let edges: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        for &(i, j) in &edges {
            for &(k, l) in &edges {
                let mut rel = PolyElement::zero();
                for sigma in &labels {
                    let g = PolyElement::generator(p.flat_index(sigma).unwrap());
                    if sigma.same_block(i, j) {
                        rel = rel.add(&g);
                    }
                    if sigma.same_block(k, l) {
                        rel = rel.sub(&g);
                    }
                }
                ensure(ring.normal_form(&rel).unwrap().is_zero(), || format!("relation ({i}{j}, {k}{l}) survives"))?;
                relations += 1;
            }
        }
    }
    Ok(format!("{pairs} ordered pairs consistent; {relations} displayed linear relations reduce to 0"))
}

fn criterion_6() -> Outcome {
    let mut checked = 0;
    for n in 2..=6 {
        let diag = catalog(n, CatalogKind::DiagInf).unwrap();
        for sigma in enumerate_partitions(n).unwrap().into_iter().filter(|s| !s.is_bottom() && !s.is_top()) {
            let s = Subspace::polydiagonal(sigma.clone(), Ambient::HyperplaneH).unwrap();
            let g = diag.g_factors(&s).unwrap();
            let mut got: Vec<Vec<usize>> = g
                .factors
                .iter()
                .map(|f| subset_elements(f.partition().single_non_singleton_block().unwrap()))
                .collect();
            let mut want: Vec<Vec<usize>> = sigma.non_singleton_blocks().into_iter().map(subset_elements).collect();
            got.sort();
            want.sort();
            let codims: usize = g.factors.iter().map(|f| f.codim_in(Ambient::HyperplaneH)).sum();
            ensure(got == want && g.transversal && codims == s.codim_in(Ambient::HyperplaneH), || {
                format!("G-factors of {sigma}: {got:?}")
            })?;
            checked += 1;
        }
    }
    let kinds = [CatalogKind::DiagInf, CatalogKind::PolyInf, CatalogKind::PolyOnly, CatalogKind::PolyUnionPolyInf];
    for n in 2..=5 {
        for kind in kinds {
            ensure(catalog(n, kind).unwrap().is_building_set(), || format!("{kind:?} fails for n = {n}"))?;
        }
    }
    Ok(format!("{checked} polydiagonals factor additively; Diag_inf, Poly_inf, Poly, Poly+Poly_inf are building sets for n<=5"))
}

fn criterion_7() -> Outcome {
    let mut count = 0;
    for n in 2..=5 {
        for s in strata_enumerate(Space::B, n).unwrap() {
            let len = chow_fiber_model(&s).unwrap().len();
            ensure(len == s.codim() + 1, || format!("{s}: chain of {len} curves"))?;
            count += 1;
        }
    }
    Ok(format!("{count} B-strata have fiber chains of codim + 1 curves"))
}

fn criterion_8() -> Outcome {
    for n in 3..=6 {
        let r = cstar_report(n).unwrap();
        let mut want = vec![("t".to_string(), -1)];
        want.extend((3..=n).map(|j| (format!("z1{j}"), 0)));
        ensure(r.chart_weights == want, || format!("n = {n}: chart weights {:?}", r.chart_weights))?;
        let sum: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        ensure(r.linearization[0] == (sum.join("+"), -1), || format!("n = {n}: row {:?}", r.linearization[0]))?;
    }
    Ok("t -> -1, z1j -> 0, x1+...+xn -> -1 for n = 3..6".into())
}

fn criterion_9() -> Outcome {
    let mut computed = Vec::new();
    let cases = (2..=5)
        .map(|n| (n, RingModel::Wonderful))
        .chain((2..=4).map(|n| (n, RingModel::Augmented)))
        .chain((2..=5).map(|n| (n, RingModel::Keel)));
    for (n, model) in cases {
        let report = ChowRing::build(n, model).unwrap().duality_check().unwrap();
        ensure(report.holds, || format!("{model} n = {n}: pairing degenerate"))?;
        let b = &report.betti.ranks;
        ensure(b[0] == 1 && *b.last().unwrap() == 1, || format!("{model} n = {n}: ends {b:?}"))?;
        computed.push(format!("{model}{n}"));
    }
    Ok(format!("nondegenerate with CH^0 = CH^top = 1 for {}", computed.join(" ")))
}

fn criterion_10() -> Outcome {
    for n in 2..=5 {
        let series = fy_hilbert_series(n).unwrap();
        let r = ranks(n, RingModel::Wonderful);
        ensure(series == r, || format!("n = {n}: series {series:?}, linear algebra {r:?}"))?;
    }
    let six = fy_hilbert_series(6).unwrap();
    Ok(format!("chain-sum series equals linear algebra for n<=5; gate open, n=6 gives {six:?}"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Betti of B_n", criterion_1),
        ("A_3 example", criterion_2),
        ("Keel model", criterion_3),
        ("sigma-bijection and blowup order", criterion_4),
        ("ideal-consistency triangle", criterion_5),
        ("G-factors and building sets", criterion_6),
        ("fiber chains", criterion_7),
        ("C*-weights", criterion_8),
        ("duality", criterion_9),
        ("chain-sum Hilbert series", criterion_10),
    ];
    let mut failures = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL {name}: {why}", i + 1);
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
