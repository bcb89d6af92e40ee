//! Exact sparse linear algebra over a [`Field`].
//!
//! Rank and nullspace use incremental row echelon reduction over exact
//! arithmetic. The column set is first split into the connected components
//! of the row/column incidence graph; each component is reduced on its own,
//! which keeps the blocks small for the graded operators in this crate.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graded_space::GramDiagonal;
use crate::scalar::Field;

/// Sparse row-major matrix. Rows hold `(column, value)` pairs sorted by
/// column; zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, T)>>,
}

/// A sparse vector as sorted `(index, value)` pairs without zeros.
pub type SparseVec<T> = Vec<(usize, T)>;

impl<T: Field> SparseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, rows: vec![Vec::new(); nrows] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar_identity(n, T::one())
    }

    pub fn scalar_identity(n: usize, value: T) -> Self {
        if value.is_zero() {
            return Self::zeros(n, n);
        }
        SparseMatrix { nrows: n, ncols: n, rows: (0..n).map(|i| vec![(i, value.clone())]).collect() }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut acc: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); nrows];
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of range {nrows}x{ncols}");
            if v.is_zero() {
                continue;
            }
            accumulate(&mut acc[i], j, v);
        }
        SparseMatrix { nrows, ncols, rows: acc.into_iter().map(|r| r.into_iter().collect()).collect() }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::from_triplets(
            nrows,
            ncols,
            rows.iter().enumerate().flat_map(|(i, r)| {
                assert_eq!(r.len(), ncols, "ragged dense matrix");
                r.iter().enumerate().map(move |(j, v)| (i, j, v.clone()))
            }),
        )
    }

    /// Matrix whose columns are the given sparse vectors.
    pub fn from_columns(nrows: usize, columns: &[SparseVec<T>]) -> Self {
        Self::from_triplets(
            nrows,
            columns.len(),
            columns.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(i, v)| (*i, j, v.clone()))),
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self.rows[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) => self.rows[i][pos].1.clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    /// Column `j` as a sparse vector.
    pub fn column(&self, j: usize) -> SparseVec<T> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.binary_search_by_key(&j, |(c, _)| *c).ok().map(|pos| (i, r[pos].1.clone())))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                rows[*j].push((i, v.clone()));
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, rows }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = BTreeMap::new();
                for (k, a) in r {
                    for (j, b) in &rhs.rows[*k] {
                        accumulate(&mut acc, *j, a.clone() * b.clone());
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        Ok(SparseMatrix { nrows: self.nrows, ncols: rhs.ncols, rows })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!("sum of {:?} and {:?}", self.shape(), rhs.shape())));
        }
        let rows = self.rows.iter().zip(&rhs.rows).map(|(a, b)| merge_rows(a, b)).collect();
        Ok(SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.try_add(&rhs.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Self::zeros(self.nrows, self.ncols);
        }
        let rows = self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, v.clone() * s.clone())).collect()).collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows }
    }

    /// Kronecker product; the left factor indexes slower.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut rows = Vec::with_capacity(self.nrows * rhs.nrows);
        for ra in &self.rows {
            for rb in &rhs.rows {
                let mut row = Vec::with_capacity(ra.len() * rb.len());
                for (ja, a) in ra {
                    for (jb, b) in rb {
                        row.push((ja * rhs.ncols + jb, a.clone() * b.clone()));
                    }
                }
                rows.push(row);
            }
        }
        SparseMatrix { nrows: self.nrows * rhs.nrows, ncols: self.ncols * rhs.ncols, rows }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "vector length does not match matrix");
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .fold(T::zero(), |acc, (j, v)| if x[*j].is_zero() { acc } else { acc + v.clone() * x[*j].clone() })
            })
            .collect()
    }

    pub fn mul_sparse_vec(&self, x: &[(usize, T)]) -> SparseVec<T> {
        let dense = {
            let mut d = vec![T::zero(); self.ncols];
            for (i, v) in x {
                d[*i] = v.clone();
            }
            d
        };
        self.mul_vec(&dense).into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect()
    }

    /// Adjoint with respect to diagonal Gram matrices on domain and codomain:
    /// `A* = G_dom⁻¹ Aᵀ G_cod`, the unique map with `⟨Ax, y⟩ = ⟨x, A*y⟩`.
    pub fn gram_adjoint(&self, domain: &GramDiagonal<T>, codomain: &GramDiagonal<T>) -> Result<Self> {
        if domain.len() != self.ncols || codomain.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "gram sizes ({}, {}) for a {}x{} matrix",
                domain.len(),
                codomain.len(),
                self.nrows,
                self.ncols
            )));
        }
        for (gram, _) in [(domain, ()), (codomain, ())] {
            if let Some(index) = gram.entries.iter().position(|g| !g.is_positive()) {
                return Err(Error::NonPositiveGram { index });
            }
        }
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                let entry = v.clone() * codomain.entries[i].clone() / domain.entries[*j].clone();
                rows[*j].push((i, entry));
            }
        }
        Ok(SparseMatrix { nrows: self.ncols, ncols: self.nrows, rows })
    }

    /// Largest absolute entry, or zero for the zero matrix.
    pub fn max_abs_entry(&self) -> T {
        self.rows.iter().flatten().map(|(_, v)| v.abs()).fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        let ncols = parts.first().map_or(0, |m| m.ncols);
        if let Some(bad) = parts.iter().find(|m| m.ncols != ncols) {
            return Err(Error::DimensionMismatch(format!("vstack of {} and {} columns", ncols, bad.ncols)));
        }
        let rows: Vec<_> = parts.iter().flat_map(|m| m.rows.iter().cloned()).collect();
        Ok(SparseMatrix { nrows: rows.len(), ncols, rows })
    }

    pub fn rank(&self) -> usize {
        self.components().par_iter().map(|c| c.reduce().pivots.len()).sum()
    }

    /// Exact kernel basis in canonical form: the basis vectors are the rows of
    /// the reduced row echelon form of the kernel, leading entries equal to 1,
    /// ordered by leading index.
    pub fn nullspace(&self) -> KernelBasis<T> {
        let mut vectors: Vec<SparseVec<T>> = self
            .components()
            .par_iter()
            .map(|c| {
                let local = c.reduce().rref().nullspace_vectors(c.cols.len());
                canonical_rows(local)
                    .into_iter()
                    .map(|v| v.into_iter().map(|(i, x)| (c.cols[i], x)).collect::<SparseVec<T>>())
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        vectors.sort_by_key(|v| v[0].0);
        let dim = vectors.len();
        KernelBasis { matrix: SparseMatrix::from_columns(self.ncols, &vectors), dim }
    }

    pub fn nullity(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Splits the columns into connected components of the bipartite
    /// row/column incidence graph. The kernel is the direct sum of the
    /// kernels of the components.
    fn components(&self) -> Vec<Component<T>> {
        let mut uf = UnionFind::new(self.ncols);
        for r in &self.rows {
            if let Some((first, _)) = r.first() {
                for (j, _) in &r[1..] {
                    uf.union(*first, *j);
                }
            }
        }
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for j in 0..self.ncols {
            by_root.entry(uf.find(j)).or_default().push(j);
        }
        let mut local_of = vec![(0usize, 0usize); self.ncols];
        let mut comps: Vec<Component<T>> = Vec::with_capacity(by_root.len());
        for cols in by_root.into_values() {
            let id = comps.len();
            for (l, &j) in cols.iter().enumerate() {
                local_of[j] = (id, l);
            }
            comps.push(Component { cols, rows: Vec::new() });
        }
        for r in &self.rows {
            if let Some((first, _)) = r.first() {
                let id = local_of[*first].0;
                comps[id].rows.push(r.iter().map(|(j, v)| (local_of[*j].1, v.clone())).collect());
            }
        }
        comps
    }
}

/// Columns are the kernel vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBasis<T> {
    pub matrix: SparseMatrix<T>,
    pub dim: usize,
}

impl<T: Field> KernelBasis<T> {
    pub fn vectors(&self) -> Vec<SparseVec<T>> {
        let t = self.matrix.transpose();
        (0..self.dim).map(|j| t.row(j).to_vec()).collect()
    }
}

struct Component<T> {
    cols: Vec<usize>,
    rows: Vec<SparseVec<T>>,
}

impl<T: Field> Component<T> {
    fn reduce(&self) -> Echelon<T> {
        let mut ech = Echelon::default();
        for r in &self.rows {
            ech.insert(r.iter().cloned().collect());
        }
        ech
    }
}

/// Row echelon form keyed by pivot column. Each stored row has a leading 1 at
/// its key and no entries to the left of it.
struct Echelon<T> {
    pivots: BTreeMap<usize, SparseVec<T>>,
}

impl<T> Default for Echelon<T> {
    fn default() -> Self {
        Echelon { pivots: BTreeMap::new() }
    }
}

impl<T: Field> Echelon<T> {
    /// Reduces `row` against the current pivots and keeps the remainder as a
    /// new pivot row. Returns whether the rank grew.
    fn insert(&mut self, mut acc: BTreeMap<usize, T>) -> bool {
        let mut cursor = 0;
        loop {
            let next = acc.range(cursor..).find(|(c, _)| self.pivots.contains_key(c)).map(|(c, v)| (*c, v.clone()));
            let Some((col, factor)) = next else { break };
            for (j, pv) in &self.pivots[&col] {
                accumulate(&mut acc, *j, -(factor.clone() * pv.clone()));
            }
            cursor = col + 1;
        }
        let Some((&lead, lead_val)) = acc.iter().next() else { return false };
        let inv = T::one() / lead_val.clone();
        let row: SparseVec<T> = acc.into_iter().map(|(j, v)| (j, v * inv.clone())).collect();
        self.pivots.insert(lead, row);
        true
    }

    /// Back substitution: clears every pivot column above its pivot.
    fn rref(mut self) -> Self {
        let keys: Vec<usize> = self.pivots.keys().rev().copied().collect();
        for col in keys {
            let row = self.pivots.remove(&col).expect("pivot present");
            let mut acc: BTreeMap<usize, T> = row.into_iter().collect();
            let hits: Vec<(usize, T)> = acc
                .iter()
                .filter(|(j, _)| **j != col && self.pivots.contains_key(j))
                .map(|(j, v)| (*j, v.clone()))
                .collect();
            for (j, factor) in hits {
                for (k, pv) in &self.pivots[&j] {
                    accumulate(&mut acc, *k, -(factor.clone() * pv.clone()));
                }
            }
            self.pivots.insert(col, acc.into_iter().collect());
        }
        self
    }

    /// Kernel vectors from a reduced echelon form: one per free column.
    fn nullspace_vectors(&self, ncols: usize) -> Vec<SparseVec<T>> {
        let mut out = Vec::new();
        for free in (0..ncols).filter(|j| !self.pivots.contains_key(j)) {
            let mut v: BTreeMap<usize, T> = BTreeMap::new();
            v.insert(free, T::one());
            for (col, row) in &self.pivots {
                if let Ok(pos) = row.binary_search_by_key(&free, |(c, _)| *c) {
                    v.insert(*col, -row[pos].1.clone());
                }
            }
            out.push(v.into_iter().collect());
        }
        out
    }
}

/// Canonical basis of the span of `vectors`: reduced row echelon form, rows
/// sorted by leading index.
pub fn canonical_rows<T: Field>(vectors: Vec<SparseVec<T>>) -> Vec<SparseVec<T>> {
    let mut ech = Echelon::default();
    for v in vectors {
        ech.insert(v.into_iter().collect());
    }
    ech.rref().pivots.into_values().collect()
}

/// Dimension of the span of the given sparse vectors.
pub fn span_rank<T: Field>(vectors: &[SparseVec<T>]) -> usize {
    let mut ech = Echelon::default();
    vectors.iter().filter(|v| ech.insert(v.iter().cloned().collect())).count()
}

fn accumulate<T: Field>(acc: &mut BTreeMap<usize, T>, j: usize, v: T) {
    use std::collections::btree_map::Entry;
    match acc.entry(j) {
        Entry::Vacant(e) => {
            if !v.is_zero() {
                e.insert(v);
            }
        }
        Entry::Occupied(mut e) => {
            let s = e.get().clone() + v;
            if s.is_zero() {
                e.remove();
            } else {
                e.insert(s);
            }
        }
    }
}

fn merge_rows<T: Field>(a: &[(usize, T)], b: &[(usize, T)]) -> Vec<(usize, T)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j].clone());
            j += 1;
        } else {
            let s = a[i].1.clone() + b[j].1.clone();
            if !s.is_zero() {
                out.push((a[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so component order follows column order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl<T: Field> Add for &SparseMatrix<T> {
    type Output = SparseMatrix<T>;

    fn add(self, rhs: Self) -> SparseMatrix<T> {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl<T: Field> Sub for &SparseMatrix<T> {
    type Output = SparseMatrix<T>;

    fn sub(self, rhs: Self) -> SparseMatrix<T> {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl<T: Field> Mul for &SparseMatrix<T> {
    type Output = SparseMatrix<T>;

    fn mul(self, rhs: Self) -> SparseMatrix<T> {
        self.matmul(rhs).expect("matrix product")
    }
}

impl<T: Field> Neg for &SparseMatrix<T> {
    type Output = SparseMatrix<T>;

    fn neg(self) -> SparseMatrix<T> {
        self.scale(&-T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn m(rows: &[&[i64]]) -> SparseMatrix<Rational> {
        SparseMatrix::from_dense(
            &rows.iter().map(|r| r.iter().map(|&v| Rational::from_int(v)).collect()).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn matmul_examples() {
        let a = SparseMatrix::from_dense(&[vec![r(1, 1), r(1, 2)], vec![r(0, 1), r(1, 1)]]);
        let b = m(&[&[2, 0], &[4, 1]]);
        let want = SparseMatrix::from_dense(&[vec![r(4, 1), r(1, 2)], vec![r(4, 1), r(1, 1)]]);
        assert_eq!(&a * &b, want);
        assert_eq!(&SparseMatrix::identity(2) * &a, a);
        assert!((&a * &SparseMatrix::zeros(2, 3)).is_zero());
        assert!(a.matmul(&SparseMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn nullspace_examples() {
        let z = SparseMatrix::<Rational>::zeros(3, 4);
        assert_eq!(z.nullspace().dim, 4);
        assert_eq!(SparseMatrix::<Rational>::identity(5).nullspace().dim, 0);
        let a = m(&[&[1, -1]]);
        let k = a.nullspace();
        assert_eq!(k.dim, 1);
        assert_eq!(k.vectors(), vec![vec![(0, r(1, 1)), (1, r(1, 1))]]);
        assert!((&a * &k.matrix).is_zero());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(SparseMatrix::<Rational>::identity(4).rank(), 4);
        let outer = m(&[&[1, 2, 3], &[2, 4, 6], &[-1, -2, -3]]);
        assert_eq!(outer.rank(), 1);
        assert_eq!(outer.nullity(), 2);
    }

    #[test]
    fn canonical_kernel_is_rref() {
        // kernel of [1 1 1] is spanned by (1,0,-1), (0,1,-1) in rref
        let k = m(&[&[1, 1, 1]]).nullspace();
        assert_eq!(k.vectors(), vec![vec![(0, r(1, 1)), (2, r(-1, 1))], vec![(1, r(1, 1)), (2, r(-1, 1))]]);
    }

    #[test]
    fn gram_adjoint_basics() {
        let g = GramDiagonal::new(vec![r(2, 1), r(3, 1)]);
        let id = SparseMatrix::<Rational>::identity(2);
        assert_eq!(id.gram_adjoint(&g, &g).unwrap(), id);
        let bad = GramDiagonal::new(vec![r(1, 1), r(0, 1)]);
        assert_eq!(id.gram_adjoint(&bad, &g), Err(Error::NonPositiveGram { index: 1 }));
        assert!(id.gram_adjoint(&GramDiagonal::new(vec![r(1, 1)]), &g).is_err());
    }

    #[test]
    fn kron_layout() {
        let a = m(&[&[1, 2]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.kron(&b), m(&[&[0, 1, 0, 2], &[1, 0, 2, 0]]));
    }

    fn small_matrix() -> impl Strategy<Value = SparseMatrix<Rational>> {
        (1usize..7, 1usize..7).prop_flat_map(|(rows, cols)| {
            proptest::collection::vec(prop_oneof![3 => Just(0i64), 2 => -3i64..4], rows * cols).prop_map(move |vals| {
                SparseMatrix::from_triplets(
                    rows,
                    cols,
                    vals.into_iter().enumerate().map(|(k, v)| (k / cols, k % cols, Rational::from_int(v))),
                )
            })
        })
    }

    /// Dense Gaussian elimination, independent of the sparse engine.
    #[allow(clippy::needless_range_loop)]
    fn dense_rank(a: &SparseMatrix<Rational>) -> usize {
        let mut d: Vec<Vec<Rational>> = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a.get(i, j)).collect()).collect();
        let mut rank = 0;
        for c in 0..a.ncols() {
            let Some(p) = (rank..d.len()).find(|&i| !d[i][c].is_zero()) else { continue };
            d.swap(rank, p);
            for i in 0..d.len() {
                if i != rank && !d[i][c].is_zero() {
                    let f = d[i][c].clone() / d[rank][c].clone();
                    for j in 0..a.ncols() {
                        let t = d[rank][j].clone() * f.clone();
                        d[i][j] -= t;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    proptest! {
        #[test]
        fn nullspace_is_exact_and_complete(a in small_matrix()) {
            let k = a.nullspace();
            prop_assert!((&a * &k.matrix).is_zero());
            prop_assert_eq!(k.matrix.rank(), k.dim);
            prop_assert_eq!(a.rank() + k.dim, a.ncols());
            prop_assert_eq!(a.rank(), dense_rank(&a));
        }

        #[test]
        fn gram_adjoint_is_involutive(a in small_matrix(), seed in proptest::collection::vec(1i64..9, 14)) {
            let dom = GramDiagonal::new(seed[..a.ncols()].iter().map(|&v| r(v, 1 + v % 3)).collect());
            let cod = GramDiagonal::new(seed[7..7 + a.nrows()].iter().map(|&v| r(v, 2)).collect());
            let adj = a.gram_adjoint(&dom, &cod).unwrap();
            prop_assert_eq!(adj.gram_adjoint(&cod, &dom).unwrap(), a.clone());
            // ⟨A e_j, e_i⟩_cod = ⟨e_j, A* e_i⟩_dom
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    prop_assert_eq!(a.get(i, j) * cod.entries[i].clone(), dom.entries[j].clone() * adj.get(j, i));
                }
            }
        }

        #[test]
        fn nullspace_is_canonical_under_row_operations(a in small_matrix()) {
            // adding a multiple of row 0 to every other row keeps the kernel
            let n = a.nrows();
            let ops = SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, Rational::from_int(1)))
                .chain((1..n).map(|i| (i, 0, Rational::from_int(i as i64)))));
            prop_assert_eq!((&ops * &a).nullspace(), a.nullspace());
        }
    }
}
