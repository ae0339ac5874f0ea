//! Exact sparse linear algebra over the rationals, by fraction-free elimination.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rat::Rat;

/// Sparse vector with integer entries, kept primitive with a positive leading entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntVec(BTreeMap<usize, BigInt>);

impl IntVec {
    /// Clear denominators of a rational vector.
    pub fn from_rats<'a>(entries: impl IntoIterator<Item = (usize, &'a Rat)>) -> Self {
        let entries: Vec<(usize, &Rat)> = entries.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        let l = entries.iter().fold(BigInt::one(), |l, (_, x)| l.lcm(x.denom()));
        let mut v = IntVec(entries.into_iter().map(|(k, x)| (k, x.numer() * (&l / x.denom()))).collect());
        v.normalize();
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn lead(&self) -> Option<(usize, &BigInt)> {
        self.0.iter().next().map(|(&k, v)| (k, v))
    }

    fn normalize(&mut self) {
        let g = self.0.values().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            return;
        }
        let flip = self.lead().is_some_and(|(_, x)| x.is_negative());
        let g = if flip { -g } else { g };
        if !g.is_one() {
            for x in self.0.values_mut() {
                *x /= &g;
            }
        }
    }

    /// `a * self - b * o`
    fn combine(&mut self, a: &BigInt, b: &BigInt, o: &IntVec) {
        if !a.is_one() {
            for x in self.0.values_mut() {
                *x *= a;
            }
        }
        for (&k, y) in &o.0 {
            let e = self.0.entry(k).or_insert_with(BigInt::zero);
            *e -= b * y;
            if e.is_zero() {
                self.0.remove(&k);
            }
        }
    }
}

/// Row echelon form built one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, IntVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Eliminate pivot positions from `v`, leading first.
    pub fn reduce(&self, mut v: IntVec) -> IntVec {
        let mut from = 0;
        loop {
            let hit = v.0.range(from..).map(|(&k, _)| k).find(|k| self.pivots.contains_key(k));
            let Some(k) = hit else { break };
            let p = &self.pivots[&k];
            let (pk, vk) = (&p.0[&k], v.0[&k].clone());
            let g = pk.gcd(&vk);
            v.combine(&(pk / &g), &(vk / &g), p);
            v.normalize();
            from = k + 1;
        }
        v
    }

    /// Insert `v`; true if it enlarged the span.
    pub fn insert(&mut self, v: IntVec) -> bool {
        let r = self.reduce(v);
        match r.lead() {
            Some((k, _)) => {
                self.pivots.insert(k, r);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &IntVec) -> bool {
        self.reduce(v.clone()).is_zero()
    }
}

/// Rank of a set of sparse vectors.
pub fn rank<I: IntoIterator<Item = IntVec>>(vs: I) -> usize {
    let mut e = Echelon::new();
    for v in vs {
        e.insert(v);
    }
    e.rank()
}

/// Exact sparse matrix stored by columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<BTreeMap<usize, Rat>>,
}

impl SparseMatrix {
    pub fn new(rows: usize) -> Self {
        SparseMatrix { rows, cols: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMatrix::new(n);
        for i in 0..n {
            m.push_col([(i, Rat::one())].into_iter().collect());
        }
        m
    }

    pub fn push_col(&mut self, col: BTreeMap<usize, Rat>) {
        if let Some((&k, _)) = col.iter().next_back() {
            self.rows = self.rows.max(k + 1);
        }
        self.cols.push(col.into_iter().filter(|(_, x)| !x.is_zero()).collect());
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn col(&self, j: usize) -> &BTreeMap<usize, Rat> {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> Rat {
        self.cols[j].get(&i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn int_cols(&self) -> impl Iterator<Item = IntVec> + '_ {
        self.cols.iter().map(|c| IntVec::from_rats(c.iter().map(|(&k, x)| (k, x))))
    }

    pub fn rank(&self) -> usize {
        rank(self.int_cols())
    }

    /// `self * o`
    pub fn mul(&self, o: &SparseMatrix) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.rows);
        for c in &o.cols {
            let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
            for (&k, x) in c {
                if let Some(col) = self.cols.get(k) {
                    for (&i, y) in col {
                        *acc.entry(i).or_insert_with(Rat::zero) += x * y;
                    }
                }
            }
            out.push_col(acc);
        }
        out.rows = self.rows;
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn col(entries: &[(usize, Rat)]) -> BTreeMap<usize, Rat> {
        entries.iter().cloned().collect()
    }

    #[test]
    fn zero_and_identity() {
        let mut z = SparseMatrix::new(3);
        z.push_col(BTreeMap::new());
        assert_eq!(z.rank(), 0);
        for n in 0..6 {
            assert_eq!(SparseMatrix::identity(n).rank(), n);
        }
    }

    #[test]
    fn dependent_columns() {
        let mut m = SparseMatrix::new(3);
        m.push_col(col(&[(0, rat(1, 2)), (1, int(3))]));
        m.push_col(col(&[(1, int(-1)), (2, rat(2, 3))]));
        m.push_col(col(&[(0, int(1)), (1, int(4)), (2, rat(4, 3))]));
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn membership() {
        let mut e = Echelon::new();
        e.insert(IntVec::from_rats([(0, &int(2)), (3, &int(1))]));
        e.insert(IntVec::from_rats([(1, &int(1)), (3, &int(-1))]));
        assert!(e.contains(&IntVec::from_rats([(0, &int(4)), (1, &int(3)), (3, &int(-1))])));
        assert!(!e.contains(&IntVec::from_rats([(3, &int(1))])));
    }

    #[test]
    fn product_of_matrices() {
        let mut a = SparseMatrix::new(2);
        a.push_col(col(&[(0, int(1)), (1, int(1))]));
        a.push_col(col(&[(0, int(1)), (1, int(1))]));
        let mut b = SparseMatrix::new(2);
        b.push_col(col(&[(0, int(1)), (1, int(-1))]));
        assert!(a.mul(&b).is_zero());
    }
}
