use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graded_space::{block_dim, Block};
use crate::ladder::LadderFactory;
use crate::linalg::SparseMatrix;
use crate::scalar::Field;

/// A degree-shifting linear map on `⊕ H^q ⊗ S^p`, stored as homogeneous
/// blocks `source → target`.
///
/// `domain` lists the source blocks on which the operator is fully
/// materialized: every nonzero block leaving a domain block is stored.
/// Blocks that are absent are zero. Composition refuses to read a block
/// outside the left factor's domain, so a product is never silently clipped.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator<T> {
    n: usize,
    p_shift: i64,
    q_shifts: BTreeSet<i64>,
    morse_index: Option<usize>,
    domain: BTreeSet<Block>,
    blocks: BTreeMap<(Block, Block), SparseMatrix<T>>,
}

/// A block where two operators disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiscrepancy<T> {
    pub source: Block,
    pub target: Block,
    pub max_abs: T,
}

impl<T: Field> GradedOperator<T> {
    pub fn new(n: usize, p_shift: i64, q_shifts: impl IntoIterator<Item = i64>) -> Self {
        GradedOperator {
            n,
            p_shift,
            q_shifts: q_shifts.into_iter().collect(),
            morse_index: None,
            domain: BTreeSet::new(),
            blocks: BTreeMap::new(),
        }
    }

    /// The zero operator, materialized on `domain`.
    pub fn zero(n: usize, p_shift: i64, domain: &[Block]) -> Self {
        let mut op = Self::new(n, p_shift, [0]);
        op.domain.extend(domain.iter().copied());
        op
    }

    /// Identity on `domain`.
    pub fn identity(n: usize, domain: &[Block]) -> Self {
        let mut op = Self::new(n, 0, [0]);
        for &b in domain {
            op.insert(b, b, SparseMatrix::identity(block_dim(n, b))).expect("identity block");
        }
        op.domain.extend(domain.iter().copied());
        op
    }

    pub fn with_morse_index(mut self, m: usize) -> Self {
        self.morse_index = Some(m);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_shift(&self) -> i64 {
        self.p_shift
    }

    pub fn q_shifts(&self) -> &BTreeSet<i64> {
        &self.q_shifts
    }

    pub fn morse_index(&self) -> Option<usize> {
        self.morse_index
    }

    pub fn domain(&self) -> &BTreeSet<Block> {
        &self.domain
    }

    pub fn mark_source(&mut self, source: Block) {
        self.domain.insert(source);
    }

    /// Adds `matrix` to the block `source → target`. The source is marked as
    /// part of the domain.
    pub fn insert(&mut self, source: Block, target: Block, matrix: SparseMatrix<T>) -> Result<()> {
        let dq = target.q as i64 - source.q as i64;
        let dp = target.p as i64 - source.p as i64;
        if dp != self.p_shift || !self.q_shifts.contains(&dq) {
            return Err(Error::ShiftMismatch(format!(
                "block {source} -> {target} outside declared shifts (q {:?}, p {})",
                self.q_shifts, self.p_shift
            )));
        }
        if matrix.shape() != (block_dim(self.n, target), block_dim(self.n, source)) {
            return Err(Error::DimensionMismatch(format!("block {source} -> {target} has shape {:?}", matrix.shape())));
        }
        self.domain.insert(source);
        if matrix.is_zero() {
            return Ok(());
        }
        let key = (source, target);
        let merged = match self.blocks.remove(&key) {
            Some(existing) => &existing + &matrix,
            None => matrix,
        };
        if !merged.is_zero() {
            self.blocks.insert(key, merged);
        }
        Ok(())
    }

    pub fn block(&self, source: Block, target: Block) -> Option<&SparseMatrix<T>> {
        self.blocks.get(&(source, target))
    }

    /// Block `source → target`, with zero for absent blocks.
    pub fn block_or_zero(&self, source: Block, target: Block) -> SparseMatrix<T> {
        self.block(source, target)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zeros(block_dim(self.n, target), block_dim(self.n, source)))
    }

    pub fn blocks_from(&self, source: Block) -> impl Iterator<Item = (Block, &SparseMatrix<T>)> + '_ {
        self.blocks
            .range((source, Block::new(0, 0))..=(source, Block::new(usize::MAX, usize::MAX)))
            .map(|((_, t), m)| (*t, m))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (Block, Block, &SparseMatrix<T>)> + '_ {
        self.blocks.iter().map(|((s, t), m)| (*s, *t, m))
    }

    /// Every possible target of `source` under the declared shifts.
    pub fn targets_of(&self, source: Block) -> Vec<Block> {
        self.q_shifts.iter().filter_map(|&dq| source.shifted(dq, self.p_shift)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn restrict(&self, domain: &[Block]) -> Result<Self> {
        let mut out = Self { blocks: BTreeMap::new(), domain: BTreeSet::new(), ..self.clone() };
        for &s in domain {
            if !self.domain.contains(&s) {
                return Err(Error::Truncated(s));
            }
            out.domain.insert(s);
            for (t, m) in self.blocks_from(s) {
                out.blocks.insert((s, t), m.clone());
            }
        }
        Ok(out)
    }

    /// `self ∘ rhs` on the domain of `rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!("composing n={} with n={}", self.n, rhs.n)));
        }
        let q_shifts: BTreeSet<i64> =
            self.q_shifts.iter().flat_map(|a| rhs.q_shifts.iter().map(move |b| a + b)).collect();
        let mut out = Self::new(self.n, self.p_shift + rhs.p_shift, q_shifts);
        out.morse_index = self.morse_index.or(rhs.morse_index);
        for &s in &rhs.domain {
            out.domain.insert(s);
            for (mid, right) in rhs.blocks_from(s) {
                if !self.domain.contains(&mid) {
                    return Err(Error::Truncated(mid));
                }
                for (t, left) in self.blocks_from(mid) {
                    out.insert(s, t, left * right)?;
                }
            }
        }
        Ok(out)
    }

    /// Sum on the common domain.
    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!("adding n={} to n={}", self.n, rhs.n)));
        }
        // a zero operator carries no information about its p-shift
        let p_shift = match (self.is_zero(), rhs.is_zero()) {
            (true, false) => rhs.p_shift,
            (false, true) | (true, true) => self.p_shift,
            (false, false) if self.p_shift == rhs.p_shift => self.p_shift,
            _ => {
                return Err(Error::ShiftMismatch(format!("adding p-shift {} to p-shift {}", self.p_shift, rhs.p_shift)))
            }
        };
        let mut out = Self::new(self.n, p_shift, self.q_shifts.union(&rhs.q_shifts).copied());
        out.morse_index = self.morse_index.or(rhs.morse_index);
        for s in self.domain.intersection(&rhs.domain) {
            out.domain.insert(*s);
            for op in [self, rhs] {
                for (t, m) in op.blocks_from(*s) {
                    out.insert(*s, t, m.clone())?;
                }
            }
        }
        Ok(out)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.try_add(&rhs.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = self.clone();
        if s.is_zero() {
            out.blocks.clear();
        } else {
            for m in out.blocks.values_mut() {
                *m = m.scale(s);
            }
        }
        out
    }

    /// Gram adjoint, materialized on `domain` (blocks of the codomain side).
    ///
    /// The adjoint block `t → s` is the Gram adjoint of `s → t`, so every
    /// possible preimage `s` of a requested `t` has to be in `self.domain`.
    pub fn adjoint(&self, factory: &LadderFactory<T>, domain: &[Block]) -> Result<Self> {
        let mut out = Self::new(self.n, -self.p_shift, self.q_shifts.iter().map(|d| -d));
        out.morse_index = self.morse_index;
        for &t in domain {
            out.domain.insert(t);
            for &dq in &self.q_shifts {
                let Some(s) = t.shifted(-dq, -self.p_shift) else { continue };
                if !self.domain.contains(&s) {
                    return Err(Error::Truncated(s));
                }
                if let Some(m) = self.block(s, t) {
                    out.insert(t, s, m.gram_adjoint(&factory.gram(s), &factory.gram(t))?)?;
                }
            }
        }
        Ok(out)
    }

    /// Blocks on the common domain where `self` and `other` differ.
    pub fn discrepancies(&self, other: &Self) -> Vec<BlockDiscrepancy<T>> {
        let mut out = Vec::new();
        for &s in self.domain.intersection(&other.domain) {
            let targets: BTreeSet<Block> =
                self.blocks_from(s).map(|(t, _)| t).chain(other.blocks_from(s).map(|(t, _)| t)).collect();
            for t in targets {
                let d = &self.block_or_zero(s, t) - &other.block_or_zero(s, t);
                if !d.is_zero() {
                    out.push(BlockDiscrepancy { source: s, target: t, max_abs: d.max_abs_entry() });
                }
            }
        }
        out
    }

    /// Applies the operator to a vector living in the single block `source`.
    pub fn apply(&self, source: Block, x: &[T]) -> Result<BTreeMap<Block, Vec<T>>> {
        if !self.domain.contains(&source) {
            return Err(Error::Truncated(source));
        }
        Ok(self.blocks_from(source).map(|(t, m)| (t, m.mul_vec(x))).collect())
    }

    /// Lifts an operator acting on the Hermite factor alone (stored on
    /// `H^q ⊗ S^0` blocks) to `H^q ⊗ S^p_src → H^q' ⊗ S^p_tgt` by tensoring
    /// with a symmetric-side matrix.
    pub fn tensor_sym(&self, sym: &SparseMatrix<T>, p_source: usize, p_target: usize) -> Result<Self> {
        if self.p_shift != 0 || self.domain.iter().any(|b| b.p != 0) {
            return Err(Error::ShiftMismatch("tensor_sym needs a Hermite-only operator".into()));
        }
        let mut out = Self::new(self.n, p_target as i64 - p_source as i64, self.q_shifts.iter().copied());
        out.morse_index = self.morse_index;
        for s in &self.domain {
            out.domain.insert(Block::new(s.q, p_source));
        }
        for (s, t, m) in self.blocks() {
            out.insert(Block::new(s.q, p_source), Block::new(t.q, p_target), m.kron(sym))?;
        }
        Ok(out)
    }
}
