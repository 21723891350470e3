//! Exact sparse row echelon forms over the integers.
//!
//! Rows are eliminated fraction-free: when a pivot does not divide the
//! entry it must clear, both rows are scaled by cofactors of their gcd and
//! the result is divided by its content. Elimination first runs on `i64`
//! with checked arithmetic and is replayed on `BigInt` if anything
//! overflows.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sorted `(column, value)` pairs with nonzero values.
pub type SparseRow<T> = Vec<(u32, T)>;

/// Integer arithmetic with overflow reporting.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn sub(&self, other: &Self) -> Option<Self>;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, other: &Self) -> Self;
    fn is_unit(&self) -> bool;
    fn to_big(&self) -> BigInt;
}

impl Coeff for i64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        self.checked_sub(*other)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coeff for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Arithmetic overflow in the machine-integer pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

/// `x*a - y*b` for sorted sparse rows.
fn combine<T: Coeff>(x: &T, a: &[(u32, T)], y: &T, b: &[(u32, T)]) -> Result<SparseRow<T>, Overflow> {
    let one_x = x.is_unit() && !x.is_negative();
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let scale_a = |v: &T| if one_x { Some(v.clone()) } else { v.mul(x) };
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(u32::MAX, |e| e.0);
        let cb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ca < cb {
            out.push((ca, scale_a(&a[i].1).ok_or(Overflow)?));
            i += 1;
        } else if cb < ca {
            out.push((cb, b[j].1.mul(y).ok_or(Overflow)?.neg()));
            j += 1;
        } else {
            let v = scale_a(&a[i].1)
                .ok_or(Overflow)?
                .sub(&b[j].1.mul(y).ok_or(Overflow)?)
                .ok_or(Overflow)?;
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

fn primitive<T: Coeff>(row: &mut SparseRow<T>) {
    let Some(first) = row.first() else { return };
    let mut g = first.1.gcd(&first.1);
    for (_, v) in row.iter().skip(1) {
        if g.is_unit() {
            break;
        }
        g = g.gcd(v);
    }
    if row[0].1.is_negative() {
        g = g.neg();
    }
    if !(g.is_unit() && !g.is_negative()) {
        for (_, v) in row.iter_mut() {
            *v = v.div_exact(&g);
        }
    }
}

/// Row echelon form built one row at a time. Pivot rows are primitive with
/// a positive leading entry.
#[derive(Debug, Clone)]
pub struct Echelon<T> {
    pivot_of_col: BTreeMap<u32, usize>,
    rows: Vec<SparseRow<T>>,
}

impl<T: Coeff> Default for Echelon<T> {
    fn default() -> Self {
        Echelon {
            pivot_of_col: BTreeMap::new(),
            rows: Vec::new(),
        }
    }
}

impl<T: Coeff> Echelon<T> {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the current pivots and keeps it if it is
    /// independent. Returns whether the rank grew.
    pub fn insert(&mut self, mut row: SparseRow<T>) -> Result<bool, Overflow> {
        row.retain(|e| !e.1.is_zero());
        loop {
            let Some((col, lead)) = row.first().cloned() else {
                return Ok(false);
            };
            match self.pivot_of_col.get(&col) {
                None => {
                    primitive(&mut row);
                    self.pivot_of_col.insert(col, self.rows.len());
                    self.rows.push(row);
                    return Ok(true);
                }
                Some(&p) => {
                    let piv = &self.rows[p];
                    let a = &piv[0].1;
                    row = if a.is_unit() {
                        let y = if a.is_negative() { lead.neg() } else { lead };
                        let one = a.div_exact(a);
                        combine(&one, &row[1..], &y, &piv[1..])?
                    } else {
                        let g = a.gcd(&lead);
                        let x = a.div_exact(&g);
                        let y = lead.div_exact(&g);
                        let mut r = combine(&x, &row[1..], &y, &piv[1..])?;
                        primitive(&mut r);
                        r
                    };
                }
            }
        }
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = u32> + '_ {
        self.pivot_of_col.keys().copied()
    }

    pub fn unit_pivots(&self) -> bool {
        self.rows.iter().all(|r| r[0].1.is_unit())
    }

    pub fn has_pivot(&self, col: u32) -> bool {
        self.pivot_of_col.contains_key(&col)
    }

    pub fn into_big(self) -> Echelon<BigInt> {
        Echelon {
            pivot_of_col: self.pivot_of_col,
            rows: self
                .rows
                .into_iter()
                .map(|r| r.into_iter().map(|(c, v)| (c, v.to_big())).collect())
                .collect(),
        }
    }
}

impl Echelon<BigInt> {
    /// Canonical representative of `v` modulo the row space: the unique
    /// vector congruent to `v` that vanishes on every pivot column.
    pub fn reduce(&self, v: &BTreeMap<u32, BigRational>) -> BTreeMap<u32, BigRational> {
        let mut v: BTreeMap<u32, BigRational> = v
            .iter()
            .filter(|(_, x)| !x.is_zero())
            .map(|(c, x)| (*c, x.clone()))
            .collect();
        let mut cursor = 0u32;
        while let Some((&col, _)) = v.range(cursor..).next() {
            if let Some(&p) = self.pivot_of_col.get(&col) {
                let row = &self.rows[p];
                let factor = v[&col].clone() / BigRational::from_integer(row[0].1.clone());
                for (c, a) in row {
                    let entry = v.entry(*c).or_insert_with(BigRational::zero);
                    *entry -= &factor * BigRational::from_integer(a.clone());
                    if entry.is_zero() {
                        v.remove(c);
                    }
                }
            }
            cursor = col + 1;
        }
        v
    }
}

/// Rank of a sparse integer matrix, exact.
pub fn rank_of_rows(rows: impl IntoIterator<Item = SparseRow<i64>> + Clone) -> usize {
    let mut small = Echelon::<i64>::default();
    let mut ok = true;
    for r in rows.clone() {
        if small.insert(r).is_err() {
            ok = false;
            break;
        }
    }
    if ok {
        return small.rank();
    }
    let mut big = Echelon::<BigInt>::default();
    for r in rows {
        let _ = big.insert(r.into_iter().map(|(c, v)| (c, BigInt::from(v))).collect());
    }
    big.rank()
}

/// Rank of a dense rational-entry integer matrix.
pub fn dense_rank(matrix: &[Vec<BigInt>]) -> usize {
    let mut e = Echelon::<BigInt>::default();
    for row in matrix {
        let sparse: SparseRow<BigInt> = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !Zero::is_zero(*v))
            .map(|(c, v)| (c as u32, v.clone()))
            .collect();
        let _ = e.insert(sparse);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(entries: &[(u32, i64)]) -> SparseRow<i64> {
        entries.to_vec()
    }

    /// Rank by dense Gaussian elimination over the rationals.
    fn rational_rank(m: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<BigRational>> = m
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
            .collect();
        let cols = a.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
            a.swap(rank, p);
            for r in 0..a.len() {
                if r != rank && !a[r][c].is_zero() {
                    let f = &a[r][c] / &a[rank][c];
                    for k in 0..cols {
                        let d = &f * &a[rank][k];
                        a[r][k] -= d;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn small_ranks() {
        let rows = vec![row(&[(0, 1), (1, -1)]), row(&[(1, 1), (2, -1)]), row(&[(0, 1), (2, -1)])];
        assert_eq!(rank_of_rows(rows), 2);
        let rows = vec![row(&[(0, 2), (1, 3)]), row(&[(0, 3), (1, 5)])];
        assert_eq!(rank_of_rows(rows), 2);
        assert_eq!(rank_of_rows(Vec::<SparseRow<i64>>::new()), 0);
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = i64::MAX / 3;
        let rows = vec![
            row(&[(0, big), (1, big - 1)]),
            row(&[(0, big - 2), (1, big - 7)]),
            row(&[(0, 1), (2, 1)]),
        ];
        let mut e = Echelon::<i64>::default();
        let overflowed = rows.iter().any(|r| e.insert(r.clone()).is_err());
        assert!(overflowed);
        assert_eq!(rank_of_rows(rows), 3);
    }

    #[test]
    fn reduce_is_canonical() {
        let mut e = Echelon::<BigInt>::default();
        e.insert(vec![(0, 2.into()), (2, 4.into())]).unwrap();
        e.insert(vec![(1, 3.into()), (2, 1.into())]).unwrap();
        let one = |x: i64| BigRational::from_integer(x.into());
        let v: BTreeMap<u32, BigRational> = [(0, one(1)), (1, one(1))].into_iter().collect();
        let r = e.reduce(&v);
        assert_eq!(r.len(), 1);
        assert_eq!(r[&2], one(-2) - BigRational::new(1.into(), 3.into()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rank_matches_dense_rational(m in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 5), 0..7)) {
                let rows: Vec<SparseRow<i64>> = m
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0).map(|(c, v)| (c as u32, *v)).collect())
                    .collect();
                prop_assert_eq!(rank_of_rows(rows), rational_rank(&m));
            }
        }
    }
}
