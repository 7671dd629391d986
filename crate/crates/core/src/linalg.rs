//! Exact integer linear algebra: sparse matrices, Smith normal form and the
//! homology of free cochain complexes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) is out of bounds for a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("cannot multiply a {left_rows}x{left_cols} matrix by a {right_rows}x{right_cols} matrix")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("composite of consecutive differentials is nonzero: entry ({row}, {col}) = {value}")]
    NotAComplex { row: usize, col: usize, value: BigInt },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid torsion order {0}: cyclic factors must have order > 1")]
    TrivialTorsion(BigUint),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A sparse matrix of arbitrary-precision integers.
///
/// Entries are kept sorted by `(row, col)` with no stored zeros, so two
/// matrices are equal exactly when their entry lists are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, BigInt)>,
}

impl SparseIntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseIntMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseIntMatrix {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, BigInt::one())).collect(),
        }
    }

    /// Builds a matrix from an unordered entry list. Zeros are dropped;
    /// repeated positions are rejected.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, BigInt)>,
    ) -> Result<Self, LinalgError> {
        let mut map = BTreeMap::new();
        for (row, col, value) in entries {
            if row >= rows || col >= cols {
                return Err(LinalgError::OutOfBounds {
                    row,
                    col,
                    rows,
                    cols,
                });
            }
            if map.insert((row, col), value).is_some() {
                return Err(LinalgError::DuplicateEntry { row, col });
            }
        }
        Self::from_map(rows, cols, map)
    }

    /// Builds a matrix from accumulated `(row, col) -> value` pairs, dropping zeros.
    pub fn from_map(
        rows: usize,
        cols: usize,
        map: BTreeMap<(usize, usize), BigInt>,
    ) -> Result<Self, LinalgError> {
        let mut entries = Vec::with_capacity(map.len());
        for ((row, col), value) in map {
            if row >= rows || col >= cols {
                return Err(LinalgError::OutOfBounds {
                    row,
                    col,
                    rows,
                    cols,
                });
            }
            if !value.is_zero() {
                entries.push((row, col, value));
            }
        }
        Ok(SparseIntMatrix { rows, cols, entries })
    }

    /// Row-major dense constructor, mostly for tests and small examples.
    pub fn from_dense(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "dense data has the wrong length");
        let entries = data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(k, v)| (k / cols, k % cols, BigInt::from(*v)))
            .collect();
        SparseIntMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, BigInt)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> BigInt {
        match self
            .entries
            .binary_search_by(|(r, c, _)| (*r, *c).cmp(&(row, col)))
        {
            Ok(k) => self.entries[k].2.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (r, c, v) in &self.entries {
            out[*r][*c] = v.clone();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|(r, c, v)| (*c, *r, v.clone()))
            .collect();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        SparseIntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut other_rows: Vec<Vec<(usize, &BigInt)>> = vec![Vec::new(); other.rows];
        for (r, c, v) in &other.entries {
            other_rows[*r].push((*c, v));
        }
        let mut acc: BTreeMap<(usize, usize), BigInt> = BTreeMap::new();
        for (r, k, a) in &self.entries {
            for (c, b) in &other_rows[*k] {
                *acc.entry((*r, *c)).or_insert_with(BigInt::zero) += a * *b;
            }
        }
        SparseIntMatrix::from_map(self.rows, other.cols, acc)
    }
}

/// Result of a Smith normal form computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// Positive invariant factors `d_1 | d_2 | ... | d_r`, with `r` the rank.
    pub invariant_factors: Vec<BigInt>,
    pub transforms: Option<SmithTransforms>,
}

/// Unimodular `left` (rows x rows) and `right` (cols x cols) with
/// `left * M * right` equal to the diagonal matrix of invariant factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithTransforms {
    pub left: Vec<Vec<BigInt>>,
    pub right: Vec<Vec<BigInt>>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

struct Eliminator {
    rows: Vec<BTreeMap<usize, BigInt>>,
    col_rows: Vec<BTreeSet<usize>>,
    // left transform, stored by rows
    left: Option<Vec<Vec<BigInt>>>,
    // right transform, stored by columns
    right_cols: Option<Vec<Vec<BigInt>>>,
}

fn identity_dense(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn dense_axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

impl Eliminator {
    fn new(m: &SparseIntMatrix, with_transforms: bool) -> Self {
        let mut rows = vec![BTreeMap::new(); m.rows];
        let mut col_rows = vec![BTreeSet::new(); m.cols];
        for (r, c, v) in &m.entries {
            rows[*r].insert(*c, v.clone());
            col_rows[*c].insert(*r);
        }
        Eliminator {
            rows,
            col_rows,
            left: with_transforms.then(|| identity_dense(m.rows)),
            right_cols: with_transforms.then(|| identity_dense(m.cols)),
        }
    }

    fn choose_pivot(&self) -> Option<(usize, usize)> {
        let mut best: Option<(&BigInt, usize, usize, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                let cost = (row.len() - 1) * (self.col_rows[*c].len() - 1);
                let better = match best {
                    None => true,
                    Some((b, _, _, bcost)) => match v.magnitude().cmp(b.magnitude()) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => cost < bcost,
                        std::cmp::Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((v, r, *c, cost));
                }
            }
        }
        best.map(|(_, r, c, _)| (r, c))
    }

    /// row[target] -= q * row[source]
    fn row_axpy(&mut self, target: usize, q: &BigInt, source: usize) {
        let src: Vec<(usize, BigInt)> = self.rows[source]
            .iter()
            .map(|(c, v)| (*c, v.clone()))
            .collect();
        for (c, v) in src {
            let slot = self.rows[target].entry(c).or_insert_with(BigInt::zero);
            *slot -= q * v;
            if slot.is_zero() {
                self.rows[target].remove(&c);
                self.col_rows[c].remove(&target);
            } else {
                self.col_rows[c].insert(target);
            }
        }
        if let Some(left) = self.left.as_mut() {
            let src = left[source].clone();
            dense_axpy(&mut left[target], q, &src);
        }
    }

    /// col[target] -= q * col[source], where col[source] is known to be
    /// supported only on `pivot_row`.
    fn pivot_col_axpy(&mut self, pivot_row: usize, target: usize, q: &BigInt, source: usize) {
        let delta = q * &self.rows[pivot_row][&source];
        let slot = self.rows[pivot_row]
            .entry(target)
            .or_insert_with(BigInt::zero);
        *slot -= delta;
        if slot.is_zero() {
            self.rows[pivot_row].remove(&target);
            self.col_rows[target].remove(&pivot_row);
        }
        if let Some(right) = self.right_cols.as_mut() {
            let src = right[source].clone();
            dense_axpy(&mut right[target], q, &src);
        }
    }

    /// Reduces to a generalized diagonal; returns the pivots `(row, col, value)`.
    fn run(&mut self) -> Vec<(usize, usize, BigInt)> {
        let mut pivots = Vec::new();
        while let Some((r, c)) = self.choose_pivot() {
            let piv = self.rows[r][&c].clone();
            let mut dirty = false;

            let others: Vec<usize> = self.col_rows[c].iter().copied().filter(|&x| x != r).collect();
            for r2 in others {
                let q = self.rows[r2][&c].div_floor(&piv);
                if !q.is_zero() {
                    self.row_axpy(r2, &q, r);
                }
                if self.rows[r2].contains_key(&c) {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }

            let row_cols: Vec<usize> = self.rows[r].keys().copied().filter(|&x| x != c).collect();
            for c2 in row_cols {
                let q = self.rows[r][&c2].div_floor(&piv);
                if !q.is_zero() {
                    self.pivot_col_axpy(r, c2, &q, c);
                }
                if self.rows[r].contains_key(&c2) {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }

            self.rows[r].clear();
            self.col_rows[c].clear();
            pivots.push((r, c, piv));
        }
        pivots
    }
}

/// Pairwise gcd/lcm normalization of a diagonal into a divisibility chain,
/// optionally tracking the row/column operations.
fn normalize_diagonal(
    diag: &mut [BigInt],
    mut left: Option<&mut Vec<Vec<BigInt>>>,
    mut right_cols: Option<&mut Vec<Vec<BigInt>>>,
) {
    for i in 0..diag.len() {
        if diag[i].is_one() {
            continue;
        }
        for j in (i + 1)..diag.len() {
            if diag[j].is_multiple_of(&diag[i]) {
                continue;
            }
            let a = diag[i].clone();
            let b = diag[j].clone();
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let a_g = &a / &g;
            let b_g = &b / &g;
            if let Some(left) = left.as_deref_mut() {
                let ri = left[i].clone();
                let rj = left[j].clone();
                left[i] = ri.iter().zip(&rj).map(|(u, w)| &x * u + &y * w).collect();
                left[j] = ri.iter().zip(&rj).map(|(u, w)| &a_g * w - &b_g * u).collect();
            }
            if let Some(right) = right_cols.as_deref_mut() {
                let ci = right[i].clone();
                let cj = right[j].clone();
                let c01 = -(&y * &b_g);
                let c11 = &x * &a_g;
                right[i] = ci.iter().zip(&cj).map(|(u, w)| u + w).collect();
                right[j] = ci.iter().zip(&cj).map(|(u, w)| &c01 * u + &c11 * w).collect();
            }
            diag[j] = &a * &b_g;
            diag[i] = g;
        }
    }
}

/// Smith normal form of an integer matrix by sparse pivoting on the entry of
/// least absolute value.
pub fn smith_normal_form(m: &SparseIntMatrix, with_transforms: bool) -> SmithForm {
    let mut elim = Eliminator::new(m, with_transforms);
    let mut pivots = elim.run();
    pivots.sort_by(|a, b| a.2.magnitude().cmp(b.2.magnitude()));

    let mut diag: Vec<BigInt> = pivots.iter().map(|p| p.2.abs()).collect();

    if !with_transforms {
        normalize_diagonal(&mut diag, None, None);
        return SmithForm {
            invariant_factors: diag,
            transforms: None,
        };
    }

    let left_raw = elim.left.take().expect("transforms were requested");
    let right_raw = elim.right_cols.take().expect("transforms were requested");

    // Permute so that pivot k sits at (k, k).
    let mut row_order: Vec<usize> = pivots.iter().map(|p| p.0).collect();
    let used_rows: BTreeSet<usize> = row_order.iter().copied().collect();
    row_order.extend((0..m.rows).filter(|r| !used_rows.contains(r)));
    let mut col_order: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let used_cols: BTreeSet<usize> = col_order.iter().copied().collect();
    col_order.extend((0..m.cols).filter(|c| !used_cols.contains(c)));

    let mut left: Vec<Vec<BigInt>> = row_order.iter().map(|r| left_raw[*r].clone()).collect();
    let mut right_cols: Vec<Vec<BigInt>> = col_order.iter().map(|c| right_raw[*c].clone()).collect();
    for (k, p) in pivots.iter().enumerate() {
        if p.2.sign() == Sign::Minus {
            for v in left[k].iter_mut() {
                *v = -v.clone();
            }
        }
    }
    normalize_diagonal(&mut diag, Some(&mut left), Some(&mut right_cols));

    let right = (0..m.cols)
        .map(|i| (0..m.cols).map(|j| right_cols[j][i].clone()).collect())
        .collect();
    SmithForm {
        invariant_factors: diag,
        transforms: Some(SmithTransforms { left, right }),
    }
}

pub fn rank(m: &SparseIntMatrix) -> usize {
    smith_normal_form(m, false).rank()
}

/// Largest power of `p` dividing `n`.
pub fn p_part(n: &BigUint, p: u64) -> BigUint {
    let p = BigUint::from(p);
    let mut out = BigUint::one();
    let mut rest = n.clone();
    if rest.is_zero() {
        return out;
    }
    while (&rest % &p).is_zero() {
        rest /= &p;
        out *= &p;
    }
    out
}

/// A finitely generated abelian group `Z^r ⊕ Z/n_1 ⊕ ... ⊕ Z/n_k`, with the
/// cyclic orders sorted ascending. Per-prime computations only ever produce
/// prime-power orders.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianPGroup {
    free_rank: usize,
    torsion: Vec<BigUint>,
}

impl AbelianPGroup {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        AbelianPGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn new(free_rank: usize, torsion: impl IntoIterator<Item = BigUint>) -> Result<Self, LinalgError> {
        let mut torsion: Vec<BigUint> = torsion.into_iter().collect();
        if let Some(bad) = torsion.iter().find(|t| **t <= BigUint::one()) {
            return Err(LinalgError::TrivialTorsion(bad.clone()));
        }
        torsion.sort();
        Ok(AbelianPGroup { free_rank, torsion })
    }

    /// `Z/order`; trivial when `order == 1`.
    pub fn cyclic(order: u64) -> Self {
        if order <= 1 {
            return Self::zero();
        }
        AbelianPGroup {
            free_rank: 0,
            torsion: vec![BigUint::from(order)],
        }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigUint] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<BigUint> {
        self.is_finite()
            .then(|| self.torsion.iter().fold(BigUint::one(), |acc, t| acc * t))
    }

    /// Every cyclic factor is a power of `p`.
    pub fn is_p_group(&self, p: u64) -> bool {
        self.torsion.iter().all(|t| p_part(t, p) == *t)
    }

    /// Finite with every cyclic factor of order exactly `p`.
    pub fn is_elementary_abelian(&self, p: u64) -> bool {
        let p = BigUint::from(p);
        self.is_finite() && self.torsion.iter().all(|t| *t == p)
    }

    pub fn direct_sum(&self, other: &AbelianPGroup) -> AbelianPGroup {
        let mut torsion = self.torsion.clone();
        torsion.extend(other.torsion.iter().cloned());
        torsion.sort();
        AbelianPGroup {
            free_rank: self.free_rank + other.free_rank,
            torsion,
        }
    }
}

impl fmt::Display for AbelianPGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// `p`-primary part of `ker(d_out) / im(d_in)` for a cochain complex of free
/// abelian groups `Z^a --d_in--> Z^n --d_out--> Z^b`.
///
/// The free rank is reported exactly; torsion comes from the invariant
/// factors of `d_in` (the kernel of `d_out` is a direct summand).
pub fn chain_homology(
    d_in: &SparseIntMatrix,
    d_out: &SparseIntMatrix,
    p: u64,
) -> Result<AbelianPGroup, LinalgError> {
    if !is_prime(p) {
        return Err(LinalgError::NotPrime(p));
    }
    let composite = d_out.mul(d_in)?;
    if let Some((row, col, value)) = composite.entries().first() {
        return Err(LinalgError::NotAComplex {
            row: *row,
            col: *col,
            value: value.clone(),
        });
    }
    let n = d_in.rows();
    let rank_out = rank(d_out);
    let snf_in = smith_normal_form(d_in, false);
    let free_rank = n - rank_out - snf_in.rank();
    let torsion = snf_in
        .invariant_factors
        .iter()
        .map(|d| p_part(d.magnitude(), p))
        .filter(|t| !t.is_one());
    AbelianPGroup::new(free_rank, torsion)
}
