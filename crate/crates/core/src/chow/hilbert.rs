//! Hilbert series of the wonderful ring from chains of flats.
//!
//! Flats of `M(K_n)` correspond to partitions, with the flat growing as the
//! partition coarsens and `rk = n - #blocks`. A chain of nonempty proper
//! flats `F_1 ⊂ ... ⊂ F_k` contributes
//! `Π_i (t + ... + t^{rk F_i - rk F_{i-1} - 1}) · (1 + t + ... + t^{r - rk F_k - 1})`
//! with `F_0 = ∅` and `r = n - 1`.

use std::sync::OnceLock;

use super::{ChowRing, RingModel};
use crate::error::{Error, Result};
use crate::partitions::proper_partitions;

/// Largest `n` checked against linear algebra before the series is trusted.
pub const VALIDATION_MAX_N: usize = 5;

fn add_into(acc: &mut Vec<u64>, p: &[u64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += b;
    }
}

fn mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `t + ... + t^{g-1}`.
fn gap(g: usize) -> Vec<u64> {
    let mut p = vec![1; g.max(1)];
    p[0] = 0;
    p
}

/// `1 + t + ... + t^{g-1}`.
fn cap(g: usize) -> Vec<u64> {
    vec![1; g]
}

/// Chain-sum series without the validation gate.
pub fn fy_hilbert_series_unchecked(n: usize) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: crate::chow::MAX_RING_N,
        });
    }
    let r = n - 1;
    // Finest partitions first, so every strictly finer one is processed earlier.
    let mut flats = proper_partitions(n)?;
    flats.sort_by_key(|p| std::cmp::Reverse(p.block_count()));
    let mut ending: Vec<Vec<u64>> = Vec::with_capacity(flats.len());
    let mut series = cap(r);
    for (i, sigma) in flats.iter().enumerate() {
        let rk = sigma.rank();
        let mut g = gap(rk);
        for (j, tau) in flats[..i].iter().enumerate() {
            if sigma.lt_unchecked(tau) {
                add_into(&mut g, &mul(&ending[j], &gap(rk - tau.rank())));
            }
        }
        add_into(&mut series, &mul(&g, &cap(r - rk)));
        ending.push(g);
    }
    while series.len() > 1 && series.last() == Some(&0) {
        series.pop();
    }
    Ok(series)
}

fn validate() -> &'static Result<()> {
    static GATE: OnceLock<Result<()>> = OnceLock::new();
    GATE.get_or_init(|| {
        for n in 2..=VALIDATION_MAX_N {
            let chains = fy_hilbert_series_unchecked(n)?;
            let ranks = ChowRing::build(n, RingModel::Wonderful)?.betti_table().ranks;
            if chains != ranks {
                return Err(Error::Internal(format!(
                    "chain-sum series {chains:?} disagrees with linear algebra {ranks:?} for n = {n}; \
                     the exponent convention must be fixed"
                )));
            }
        }
        Ok(())
    })
}

/// Hilbert series of `CH*(B_n)` as coefficients of `1, t, t^2, ...`.
///
/// The convention is checked against exact linear algebra for every
/// `n <= 5` before any value is returned.
pub fn fy_hilbert_series(n: usize) -> Result<Vec<u64>> {
    validate().clone()?;
    fy_hilbert_series_unchecked(n)
}
