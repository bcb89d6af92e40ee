//! Ordered bases of `S^p`, `H^q` and the blocks `H^q ⊗ S^p`, with their
//! diagonal Gram matrices.
//!
//! The Gaussian-measure pairing of Hermite polynomials carries a factor
//! `(√π)^n` that is common to every basis vector. It is dropped here so that
//! all Gram entries are rational; adjoints and kernels do not see a uniform
//! rescaling.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::combinatorics::{enumerate_indices, MultiIndex};
use crate::scalar::Field;

/// A graded piece `H^q ⊗ S^p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub q: usize,
    pub p: usize,
}

impl Block {
    pub fn new(q: usize, p: usize) -> Self {
        Block { q, p }
    }

    /// Shift by `(dq, dp)`; `None` if either degree would go negative.
    pub fn shifted(self, dq: i64, dp: i64) -> Option<Block> {
        let q = self.q as i64 + dq;
        let p = self.p as i64 + dp;
        (q >= 0 && p >= 0).then(|| Block::new(q as usize, p as usize))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^{}⊗S^{}", self.q, self.p)
    }
}

/// Ordered list of multi-indices of a fixed order, with reverse lookup.
#[derive(Clone, Debug)]
pub struct IndexBasis {
    n: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

/// Monomials `e^J`, `|J| = p`.
pub type SymBasis = IndexBasis;
/// Hermite polynomials `H_I`, `|I| = q`.
pub type HermiteBasis = IndexBasis;

impl IndexBasis {
    pub fn new(n: usize, degree: usize) -> Self {
        let indices = enumerate_indices(n, degree);
        let positions = indices.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        IndexBasis { n, degree, indices, positions }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.positions.get(index).copied()
    }
}

/// Basis `H_I e^J` of `H^q ⊗ S^p`, Hermite index outer, symmetric index inner.
#[derive(Clone, Debug)]
pub struct BlockBasis {
    pub hermite: Arc<HermiteBasis>,
    pub sym: Arc<SymBasis>,
}

impl BlockBasis {
    pub fn new(hermite: Arc<HermiteBasis>, sym: Arc<SymBasis>) -> Self {
        assert_eq!(hermite.n(), sym.n());
        BlockBasis { hermite, sym }
    }

    pub fn block(&self) -> Block {
        Block::new(self.hermite.degree(), self.sym.degree())
    }

    pub fn len(&self) -> usize {
        self.hermite.len() * self.sym.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair(&self, pos: usize) -> (&MultiIndex, &MultiIndex) {
        let s = self.sym.len();
        (self.hermite.get(pos / s), self.sym.get(pos % s))
    }

    pub fn position(&self, hermite: &MultiIndex, sym: &MultiIndex) -> Option<usize> {
        Some(self.hermite.position(hermite)? * self.sym.len() + self.sym.position(sym)?)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex)> + '_ {
        (0..self.len()).map(move |i| self.pair(i))
    }
}

/// Diagonal of the Gram matrix of an orthogonal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramDiagonal<T> {
    pub entries: Vec<T>,
}

impl<T: Field> GramDiagonal<T> {
    pub fn new(entries: Vec<T>) -> Self {
        GramDiagonal { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn for_block(basis: &BlockBasis) -> Self {
        GramDiagonal::new(basis.pairs().map(|(i, j)| gram_entry(i, j)).collect())
    }

    /// Pairing `⟨x, y⟩ = Σ g_i x_i y_i`.
    pub fn pairing(&self, x: &[T], y: &[T]) -> T {
        assert_eq!(x.len(), self.len());
        assert_eq!(y.len(), self.len());
        let mut acc = T::zero();
        for ((g, a), b) in self.entries.iter().zip(x).zip(y) {
            if !a.is_zero() && !b.is_zero() {
                acc = acc + g.clone() * a.clone() * b.clone();
            }
        }
        acc
    }
}

/// `⟨H_I e^J, H_I e^J⟩ = 2^{|I|} I! J!` (up to the dropped `(√π)^n`).
pub fn gram_entry<T: Field>(hermite: &MultiIndex, sym: &MultiIndex) -> T {
    let scale = (1u128 << hermite.order()) * hermite.factorial() * sym.factorial();
    T::from_u128(scale).expect("gram entry fits in field")
}

/// Pointwise pairing of monomials `⟨e^J, e^J'⟩`: `J!` on the diagonal, else 0.
pub fn sym_inner<T: Field>(j: &MultiIndex, j2: &MultiIndex) -> T {
    assert_eq!(j.order(), j2.order(), "pairing between different symmetric degrees");
    if j == j2 {
        T::from_u128(j.factorial()).expect("factorial fits in field")
    } else {
        T::zero()
    }
}

pub fn build_block<T: Field>(n: usize, q: usize, p: usize) -> (BlockBasis, GramDiagonal<T>) {
    let basis = BlockBasis::new(Arc::new(IndexBasis::new(n, q)), Arc::new(IndexBasis::new(n, p)));
    let gram = GramDiagonal::for_block(&basis);
    (basis, gram)
}

/// Number of basis vectors in `H^q ⊗ S^p`.
pub fn block_dim(n: usize, block: Block) -> usize {
    use crate::combinatorics::sym_rank;
    (sym_rank(n, block.q) * sym_rank(n, block.p)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::{One, Zero};

    fn r(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    /// `⟨e^J, e^J'⟩` from the permutation-sum definition of the symmetric product.
    fn brute_sym_inner(j: &MultiIndex, j2: &MultiIndex) -> i64 {
        let expand = |m: &MultiIndex| -> Vec<usize> {
            m.components().iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c as usize)).collect()
        };
        let a = expand(j);
        let b = expand(j2);
        let mut total = 0;
        for perm in permutations(b.len()) {
            if a.iter().zip(&perm).all(|(x, &s)| *x == b[s]) {
                total += 1;
            }
        }
        total
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = vec![];
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Coefficients of the physicists' Hermite polynomial `H_k` via
    /// `H_{k+1} = 2t H_k - 2k H_{k-1}`.
    fn hermite_coeffs(k: usize) -> Vec<i64> {
        let mut prev = vec![1i64];
        if k == 0 {
            return prev;
        }
        let mut cur = vec![0, 2];
        for j in 1..k {
            let mut next = vec![0i64; j + 2];
            for (d, c) in cur.iter().enumerate() {
                next[d + 1] += 2 * c;
            }
            for (d, c) in prev.iter().enumerate() {
                next[d] -= 2 * j as i64 * c;
            }
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `∫ H_a H_b e^{-t²} dt / √π`, exactly, from the monomial moments
    /// `∫ t^{2j} e^{-t²} dt / √π = (2j-1)!! / 2^j`.
    fn hermite_integral(a: usize, b: usize) -> Rational {
        let (ca, cb) = (hermite_coeffs(a), hermite_coeffs(b));
        let mut total = Rational::zero();
        for (i, x) in ca.iter().enumerate() {
            for (j, y) in cb.iter().enumerate() {
                let d = i + j;
                if d % 2 == 1 {
                    continue;
                }
                let half = d / 2;
                let dfact: i64 = (1..=half as i64).map(|t| 2 * t - 1).product();
                let moment = Rational::new(dfact.into(), (1i64 << half).into());
                total += Rational::from_int(x * y) * moment;
            }
        }
        total
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram_entry::<Rational>(&mi(&[0, 0]), &mi(&[0, 0])), r(1));
        assert_eq!(gram_entry::<Rational>(&mi(&[1, 0]), &mi(&[2, 0])), r(4));
        assert_eq!(gram_entry::<Rational>(&mi(&[1, 1]), &mi(&[1, 1])), r(4));
    }

    #[test]
    fn gram_matches_gaussian_integrals() {
        for a in 0..6 {
            for b in 0..6 {
                let want = hermite_integral(a, b);
                let got = if a == b { gram_entry::<Rational>(&mi(&[a as u32]), &mi(&[0])) } else { Rational::zero() };
                assert_eq!(got, want, "a={a} b={b}");
            }
        }
        // product structure: H_{(1,1)} has norm (2·1!)² with the (√π)² dropped
        let two_d = hermite_integral(1, 1) * hermite_integral(1, 1);
        assert_eq!(two_d, gram_entry::<Rational>(&mi(&[1, 1]), &mi(&[0, 0])));
    }

    #[test]
    fn sym_inner_examples_and_oracle() {
        assert_eq!(sym_inner::<Rational>(&mi(&[2, 0]), &mi(&[2, 0])), r(2));
        assert_eq!(sym_inner::<Rational>(&mi(&[1, 1]), &mi(&[2, 0])), r(0));
        assert_eq!(sym_inner::<Rational>(&mi(&[3, 1]), &mi(&[3, 1])), r(6));
        for n in 1..=3 {
            for p in 0..=4 {
                let basis = IndexBasis::new(n, p);
                for j in basis.indices() {
                    for j2 in basis.indices() {
                        assert_eq!(sym_inner::<Rational>(j, j2), r(brute_sym_inner(j, j2)), "{j} {j2}");
                    }
                    assert_eq!(sym_inner::<Rational>(j, j), r(j.factorial() as i64));
                }
            }
        }
    }

    #[test]
    fn blocks() {
        let (b, g) = build_block::<Rational>(2, 0, 1);
        assert_eq!(b.len(), 2);
        assert_eq!(g.entries, vec![r(1), r(1)]);
        let (b, g) = build_block::<Rational>(2, 1, 1);
        assert_eq!(b.len(), 4);
        assert_eq!(g.entries, vec![r(2); 4]);
        let (b, _) = build_block::<Rational>(3, 2, 2);
        assert_eq!(b.len(), 36);
        assert_eq!(b.pair(0), (&mi(&[2, 0, 0]), &mi(&[2, 0, 0])));
        assert_eq!(b.pair(1), (&mi(&[2, 0, 0]), &mi(&[1, 1, 0])));
        assert_eq!(b.position(&mi(&[1, 1, 0]), &mi(&[2, 0, 0])), Some(6));
    }

    #[test]
    fn gram_entries_positive() {
        for n in 1..=5 {
            for q in 0..=6 {
                for p in 0..=4 {
                    let (b, g) = build_block::<Rational>(n, q, p);
                    assert_eq!(b.len(), block_dim(n, Block::new(q, p)));
                    assert!(g.entries.iter().all(|e| *e >= Rational::one()));
                }
            }
        }
    }
}
