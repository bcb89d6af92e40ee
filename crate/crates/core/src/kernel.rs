//! Kernel dimensions of the weighted model operator.
//!
//! For Morse index zero `K_w` preserves every block and its kernel on
//! `H^q ⊗ S^p` is `ker Aa ∩ ker Ac`, nonzero only for `q ≤ p`, so the total
//! is a finite exact sum. For other indices the explorer computes the
//! polynomial kernel `{β : Pβ = 0, Qβ = 0}` up to a Hermite degree bound,
//! which is only a lower bound for the true kernel dimension unless the
//! vanishing theorem applies.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use num_integer::binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::MultiIndex;
use crate::error::{Error, Result};
use crate::graded_space::{block_dim, Block};
use crate::ladder::{hermite_range, GradedOperator, LadderFactory};
use crate::linalg::{SparseMatrix, SparseVec};
use crate::model::{assemble_factored, ModelSpec};
use crate::scalar::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Exact,
    LowerBound,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Exact => "exact",
            Status::LowerBound => "lower_bound",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDim {
    pub q: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    pub spec: ModelSpec,
    /// Per Hermite degree; only filled for Morse index zero, where the
    /// kernel splits along blocks.
    pub per_block: Vec<BlockDim>,
    pub total: usize,
    pub exact: bool,
    pub lower_bound: bool,
}

impl KernelReport {
    pub fn status(&self) -> Status {
        if self.exact {
            Status::Exact
        } else {
            Status::LowerBound
        }
    }
}

/// Whether the vanishing theorem covers `(n, p, m)`: a nonzero index with
/// `m ≥ p`, or `m = n`.
pub fn vanishing_applies(n: usize, p: usize, m: usize) -> bool {
    m > 0 && (m >= p || m == n)
}

fn label(spec: &ModelSpec, total: usize) -> (bool, bool) {
    let exact =
        if spec.m == 0 { spec.q_max >= spec.p } else { vanishing_applies(spec.n, spec.p, spec.m) && total == 0 };
    (exact, !exact)
}

/// The explorer's default degree bound, `2p + 2`.
pub fn default_q_max(p: usize) -> usize {
    2 * p + 2
}

/// `Aa = Σ_k A_k ⊗ a_k` and `Ac = Σ_k A_k ⊗ c_k` on `H^q ⊗ S^p`.
/// For `q = 0` both have no rows, and so does `Aa` for `p = 0`.
pub fn reduction_pair<T: Field>(factory: &LadderFactory<T>, block: Block) -> (SparseMatrix<T>, SparseMatrix<T>) {
    let n = factory.n();
    let cols = block_dim(n, block);
    let rows = |dp: i64| match block.shifted(-1, dp) {
        Some(t) => block_dim(n, t),
        None => 0,
    };
    let mut aa = SparseMatrix::zeros(rows(-1), cols);
    let mut ac = SparseMatrix::zeros(rows(1), cols);
    if block.q == 0 {
        return (aa, ac);
    }
    for k in 0..n {
        let a_herm = factory.A(k, block.q);
        if block.p > 0 {
            aa = &aa + &a_herm.kron(&factory.a(k, block.p));
        }
        ac = &ac + &a_herm.kron(&factory.c(k, block.p));
    }
    (aa, ac)
}

/// Kernel of `[Aa; Ac]` on `H^q ⊗ S^p`, as a canonical basis of block
/// coordinate vectors.
pub fn kernel_block_m0<T: Field>(factory: &LadderFactory<T>, p: usize, q: usize) -> Result<(usize, Vec<SparseVec<T>>)> {
    let (aa, ac) = reduction_pair(factory, Block::new(q, p));
    let basis = SparseMatrix::vstack(&[&aa, &ac])?.nullspace();
    Ok((basis.dim, basis.vectors()))
}

/// Exact index-zero kernel dimension: the sum over blocks `q ≤ p`.
#[allow(non_snake_case)]
pub fn K_total_m0<T: Field>(factory: &LadderFactory<T>, p: usize) -> Result<KernelReport> {
    let per_block = (0..=p)
        .into_par_iter()
        .map(|q| kernel_block_m0(factory, p, q).map(|(dim, _)| BlockDim { q, dim }))
        .collect::<Result<Vec<_>>>()?;
    let total = per_block.iter().map(|b| b.dim).sum();
    Ok(KernelReport { spec: ModelSpec::new(factory.n(), p, 0, p)?, per_block, total, exact: true, lower_bound: false })
}

/// Nullity of the diagonal block of `K_w` on `H^q ⊗ S^p` at index zero,
/// assembled as `P*P + Q*Q`.
pub fn kw_block_nullity_m0<T: Field>(factory: &LadderFactory<T>, p: usize, q: usize) -> Result<usize> {
    let spec = ModelSpec::new(factory.n(), p, 0, q)?;
    let k = assemble_factored(factory, &spec)?;
    let b = Block::new(q, p);
    Ok(k.block_or_zero(b, b).nullity())
}

/// A run of consecutive blocks laid out as one coordinate vector.
#[derive(Clone, Debug)]
pub struct BlockLayout {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    index: BTreeMap<Block, usize>,
}

impl BlockLayout {
    pub fn new(n: usize, blocks: Vec<Block>) -> Self {
        let mut offsets = vec![0];
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + block_dim(n, *b));
        }
        let index = blocks.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        BlockLayout { blocks, offsets, index }
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn offset(&self, block: Block) -> Option<usize> {
        self.index.get(&block).map(|&i| self.offsets[i])
    }

    /// Block and in-block position of a global coordinate.
    pub fn locate(&self, global: usize) -> (Block, usize) {
        let i = self.offsets.partition_point(|&o| o <= global) - 1;
        (self.blocks[i], global - self.offsets[i])
    }
}

/// One coefficient of a vector in `⊕ H^q ⊗ S^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEntry<T> {
    pub block: Block,
    pub hermite: MultiIndex,
    pub sym: MultiIndex,
    pub coeff: T,
}

pub type BlockVector<T> = Vec<BasisEntry<T>>;

fn place<T: Field>(
    triplets: &mut Vec<(usize, usize, T)>,
    op: &GradedOperator<T>,
    rows: &BlockLayout,
    row_base: usize,
    cols: &BlockLayout,
) -> Result<()> {
    for (s, t, m) in op.blocks() {
        let r0 = row_base + rows.offset(t).ok_or(Error::Truncated(t))?;
        let c0 = cols.offset(s).ok_or(Error::Truncated(s))?;
        triplets.extend(m.triplets().map(|(i, j, v)| (r0 + i, c0 + j, v.clone())));
    }
    Ok(())
}

/// Kernel of the stacked `[P; Q]` on blocks of Hermite degree `≤ q_max`,
/// together with its canonical basis.
pub fn bounded_kernel_with_basis<T: Field>(
    factory: &LadderFactory<T>,
    spec: &ModelSpec,
) -> Result<(KernelReport, Vec<BlockVector<T>>)> {
    spec.validate()?;
    if spec.n != factory.n() {
        return Err(Error::DimensionMismatch(format!("factory has n={}, spec has n={}", factory.n(), spec.n)));
    }
    let n = spec.n;
    let cols = BlockLayout::new(n, spec.domain());
    let p_rows = BlockLayout::new(n, if spec.p > 0 { hermite_range(spec.q_max + 1, spec.p - 1) } else { Vec::new() });
    let q_rows = BlockLayout::new(n, hermite_range(spec.q_max + 1, spec.p + 1));

    let p_op = factory.build_p(spec.m, cols.blocks())?;
    let q_op = factory.build_q(spec.m, cols.blocks())?;
    let mut triplets = Vec::new();
    place(&mut triplets, &p_op, &p_rows, 0, &cols)?;
    place(&mut triplets, &q_op, &q_rows, p_rows.len(), &cols)?;
    let stacked = SparseMatrix::from_triplets(p_rows.len() + q_rows.len(), cols.len(), triplets);
    let kernel = stacked.nullspace();

    let vectors: Vec<BlockVector<T>> = kernel
        .vectors()
        .into_iter()
        .map(|v| {
            v.into_iter()
                .map(|(g, coeff)| {
                    let (block, pos) = cols.locate(g);
                    let basis = factory.block_basis(block);
                    let (h, s) = basis.pair(pos);
                    BasisEntry { block, hermite: h.clone(), sym: s.clone(), coeff }
                })
                .collect()
        })
        .collect();

    let mut per_block = Vec::new();
    if spec.m == 0 {
        // the canonical basis of a blockwise direct sum is blockwise
        let mut counts = BTreeMap::new();
        for v in &vectors {
            *counts.entry(v[0].block.q).or_insert(0) += 1;
        }
        per_block = (0..=spec.q_max).map(|q| BlockDim { q, dim: counts.get(&q).copied().unwrap_or(0) }).collect();
    }
    let (exact, lower_bound) = label(spec, kernel.dim);
    Ok((KernelReport { spec: *spec, per_block, total: kernel.dim, exact, lower_bound }, vectors))
}

pub fn bounded_kernel<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<KernelReport> {
    bounded_kernel_with_basis(factory, spec).map(|(r, _)| r)
}

/// Index-zero kernel basis through the block reduction, as block vectors.
pub fn kernel_basis_m0<T: Field>(factory: &LadderFactory<T>, p: usize) -> Result<Vec<BlockVector<T>>> {
    let mut out = Vec::new();
    for q in 0..=p {
        let block = Block::new(q, p);
        let basis = factory.block_basis(block);
        for v in kernel_block_m0(factory, p, q)?.1 {
            out.push(
                v.into_iter()
                    .map(|(pos, coeff)| {
                        let (h, s) = basis.pair(pos);
                        BasisEntry { block, hermite: h.clone(), sym: s.clone(), coeff }
                    })
                    .collect(),
            );
        }
    }
    Ok(out)
}

fn check_distinct(n: usize, indices: &[usize], needed: usize) -> Result<()> {
    if indices.len() != needed {
        return Err(Error::InvalidParameters(format!("expected {needed} axes, got {}", indices.len())));
    }
    for (i, &a) in indices.iter().enumerate() {
        if a >= n {
            return Err(Error::InvalidParameters(format!("axis {a} out of range for n={n}")));
        }
        if indices[..i].contains(&a) {
            return Err(Error::InvalidParameters(format!("repeated axis {a}")));
        }
    }
    Ok(())
}

fn assemble_vector<T: Field>(
    factory: &LadderFactory<T>,
    block: Block,
    terms: &[(i64, MultiIndex, MultiIndex)],
) -> SparseVec<T> {
    let basis = factory.block_basis(block);
    let mut acc: BTreeMap<usize, T> = BTreeMap::new();
    for (c, h, s) in terms {
        let pos = basis.position(h, s).expect("index in block");
        let e = acc.entry(pos).or_insert_with(T::zero);
        *e = e.clone() + T::from_int(*c);
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// `H_k e^k e^l - H_l e^k e^k` in `H^1 ⊗ S^2` (axes 0-based, `k ≠ l`).
pub fn special_vectors_l12<T: Field>(factory: &LadderFactory<T>, k: usize, l: usize) -> Result<SparseVec<T>> {
    let n = factory.n();
    check_distinct(n, &[k, l], 2)?;
    let unit = |a| MultiIndex::unit(n, a);
    let pair = |a, b| MultiIndex::pair(n, a, b);
    Ok(assemble_vector(factory, Block::new(1, 2), &[(1, unit(k), pair(k, l)), (-1, unit(l), pair(k, k))]))
}

/// The three families of vectors in `ker Ac` on `H^2 ⊗ S^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecialKind {
    /// two axes `k, l`
    U,
    /// three axes `k, l, j`
    V,
    /// four axes `i, j, k, l`
    W,
}

impl SpecialKind {
    pub fn arity(self) -> usize {
        match self {
            SpecialKind::U => 2,
            SpecialKind::V => 3,
            SpecialKind::W => 4,
        }
    }
}

/// A member of the `u`, `v` or `w` family in `H^2 ⊗ S^2`, where a double
/// subscript `kl` stands for the index `1_k + 1_l` on either side:
///
/// * `u_kl = 2H_kl e^kl - H_ll e^kk - H_kk e^ll`
/// * `v_klj = H_kk e^lj - H_kl e^kj - H_kj e^kl + H_lj e^kk`
/// * `w_ijkl = H_ij e^kl - 2H_ik e^jl + H_il e^jk + H_jk e^il - 2H_jl e^ik + H_kl e^ij`
pub fn special_vectors_l22<T: Field>(
    factory: &LadderFactory<T>,
    kind: SpecialKind,
    indices: &[usize],
) -> Result<SparseVec<T>> {
    let n = factory.n();
    check_distinct(n, indices, kind.arity())?;
    let x = |a, b| MultiIndex::pair(n, a, b);
    let terms = match kind {
        SpecialKind::U => {
            let (k, l) = (indices[0], indices[1]);
            vec![(2, x(k, l), x(k, l)), (-1, x(l, l), x(k, k)), (-1, x(k, k), x(l, l))]
        }
        SpecialKind::V => {
            let (k, l, j) = (indices[0], indices[1], indices[2]);
            vec![(1, x(k, k), x(l, j)), (-1, x(k, l), x(k, j)), (-1, x(k, j), x(k, l)), (1, x(l, j), x(k, k))]
        }
        SpecialKind::W => {
            let (i, j, k, l) = (indices[0], indices[1], indices[2], indices[3]);
            vec![
                (1, x(i, j), x(k, l)),
                (-2, x(i, k), x(j, l)),
                (1, x(i, l), x(j, k)),
                (1, x(j, k), x(i, l)),
                (-2, x(j, l), x(i, k)),
                (1, x(k, l), x(i, j)),
            ]
        }
    };
    Ok(assemble_vector(factory, Block::new(2, 2), &terms))
}

fn ordered_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                let used = t.clone();
                (0..n).filter(move |a| !used.contains(a)).map(move |a| {
                    let mut u = t.clone();
                    u.push(a);
                    u
                })
            })
            .collect();
    }
    out
}

/// Every `u`, `v`, `w` vector over all ordered choices of distinct axes.
pub fn l22_family<T: Field>(factory: &LadderFactory<T>) -> Result<Vec<SparseVec<T>>> {
    let n = factory.n();
    let mut out = Vec::new();
    for kind in [SpecialKind::U, SpecialKind::V, SpecialKind::W] {
        for t in ordered_tuples(n, kind.arity()) {
            out.push(special_vectors_l22(factory, kind, &t)?);
        }
    }
    Ok(out)
}

/// Closed-form block dimensions `dim K^{1,1}`, `dim K^{1,2}`, `dim K^{2,2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaDims {
    pub k11: u64,
    pub k12: u64,
    pub k22: u64,
}

pub fn lemma_dims(n: usize) -> Result<LemmaDims> {
    if n == 0 {
        return Err(Error::InvalidParameters("dimension must be positive".into()));
    }
    let n = n as u64;
    let k12 = if n >= 2 { n * binomial(n + 1, 2) - binomial(n + 2, 3) - n } else { 0 };
    let k22 =
        if n >= 3 { binomial(n + 1, 2) * binomial(n + 1, 2) - n * binomial(n + 2, 3) - binomial(n + 1, 2) } else { 0 };
    Ok(LemmaDims { k11: binomial(n, 2), k12, k22 })
}

/// One table cell. Index zero goes through the exact block reduction; other
/// indices through the bounded explorer at `q_max`.
pub fn table_cell<T: Field>(
    factory: &LadderFactory<T>,
    p: usize,
    m: usize,
    q_max: Option<usize>,
) -> Result<KernelReport> {
    if m == 0 {
        K_total_m0(factory, p)
    } else {
        let spec = ModelSpec::new(factory.n(), p, m, q_max.unwrap_or_else(|| default_q_max(p)))?;
        bounded_kernel(factory, &spec)
    }
}

/// Every cell `(n, p, m)` of the ranges with `m ≤ n`, in key order. Cells
/// are computed in parallel on the current rayon pool.
pub fn generate_table<T: Field>(
    n_range: RangeInclusive<usize>,
    p_range: RangeInclusive<usize>,
    m_range: RangeInclusive<usize>,
    q_max: Option<usize>,
) -> Result<Vec<KernelReport>> {
    if n_range.is_empty() || p_range.is_empty() || m_range.is_empty() {
        return Err(Error::InvalidParameters("empty range".into()));
    }
    if *n_range.start() == 0 {
        return Err(Error::InvalidParameters("dimension must be positive".into()));
    }
    let factories: BTreeMap<usize, LadderFactory<T>> = n_range.clone().map(|n| (n, LadderFactory::new(n))).collect();
    let mut cells = Vec::new();
    for n in n_range {
        for p in p_range.clone() {
            for m in m_range.clone().filter(|&m| m <= n) {
                cells.push((n, p, m));
            }
        }
    }
    cells.par_iter().map(|&(n, p, m)| table_cell(&factories[&n], p, m, q_max)).collect()
}
