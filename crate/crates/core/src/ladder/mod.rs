//! Ladder operators on both tensor factors and their signed composites.
//!
//! On the symmetric side `c_k: S^p → S^{p+1}` multiplies by `e^k` and
//! `a_k: S^p → S^{p-1}` contracts with `e_k`. On the Hermite side
//! `C_k = 2y_k - ∂_k` raises and `A_k = ½∂_k` lowers. Axes are 0-based here;
//! with Morse index `m` the axes `k < m` carry sign `-1` and the rest `+1`.

mod operator;

pub use operator::{BlockDiscrepancy, GradedOperator};

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::graded_space::{Block, BlockBasis, GramDiagonal, IndexBasis};
use crate::linalg::SparseMatrix;
use crate::scalar::Field;

fn raising<T: Field>(k: usize, from: &IndexBasis, to: &IndexBasis) -> SparseMatrix<T> {
    SparseMatrix::from_triplets(
        to.len(),
        from.len(),
        from.indices().iter().enumerate().map(|(col, idx)| {
            let row = to.position(&idx.incremented(k)).expect("raised index in basis");
            (row, col, T::one())
        }),
    )
}

fn lowering<T: Field>(k: usize, from: &IndexBasis, to: Option<&IndexBasis>, scale: i64) -> SparseMatrix<T> {
    let Some(to) = to else { return SparseMatrix::zeros(0, from.len()) };
    SparseMatrix::from_triplets(
        to.len(),
        from.len(),
        from.indices().iter().enumerate().filter_map(|(col, idx)| {
            let lowered = idx.decremented(k)?;
            let row = to.position(&lowered).expect("lowered index in basis");
            Some((row, col, T::from_int(scale * idx.get(k) as i64)))
        }),
    )
}

fn check_axis(k: usize, n: usize) {
    assert!(k < n, "axis {k} out of range for n={n}");
}

/// `c_k: S^p → S^{p+1}`, `e^J ↦ e^{J+1_k}`.
pub fn matrix_c<T: Field>(k: usize, n: usize, p: usize) -> SparseMatrix<T> {
    check_axis(k, n);
    raising(k, &IndexBasis::new(n, p), &IndexBasis::new(n, p + 1))
}

/// `a_k: S^p → S^{p-1}`, `e^J ↦ j_k e^{J-1_k}`. For `p = 0` this is the
/// empty `0 × 1` map.
pub fn matrix_a<T: Field>(k: usize, n: usize, p: usize) -> SparseMatrix<T> {
    check_axis(k, n);
    let to = (p > 0).then(|| IndexBasis::new(n, p - 1));
    lowering(k, &IndexBasis::new(n, p), to.as_ref(), 1)
}

/// `C_k: H^q → H^{q+1}`, `H_I ↦ H_{I+1_k}`.
#[allow(non_snake_case)]
pub fn matrix_C<T: Field>(k: usize, n: usize, q: usize) -> SparseMatrix<T> {
    check_axis(k, n);
    raising(k, &IndexBasis::new(n, q), &IndexBasis::new(n, q + 1))
}

/// `A_k: H^q → H^{q-1}`, `H_I ↦ i_k H_{I-1_k}`.
#[allow(non_snake_case)]
pub fn matrix_A<T: Field>(k: usize, n: usize, q: usize) -> SparseMatrix<T> {
    check_axis(k, n);
    let to = (q > 0).then(|| IndexBasis::new(n, q - 1));
    lowering(k, &IndexBasis::new(n, q), to.as_ref(), 1)
}

/// Multiplication by `y_k` on `H^q`, split into its parts landing in
/// `H^{q-1}` and `H^{q+1}`: `y_k H_I = i_k H_{I-1_k} + ½ H_{I+1_k}`.
pub fn matrix_y<T: Field>(k: usize, n: usize, q: usize) -> (SparseMatrix<T>, SparseMatrix<T>) {
    check_axis(k, n);
    let from = IndexBasis::new(n, q);
    let down = (q > 0).then(|| IndexBasis::new(n, q - 1));
    let half = T::one() / T::from_int(2);
    (lowering(k, &from, down.as_ref(), 1), raising::<T>(k, &from, &IndexBasis::new(n, q + 1)).scale(&half))
}

/// `∂_k: H^q → H^{q-1}`, `∂_k H_I = 2 i_k H_{I-1_k}`.
pub fn matrix_d<T: Field>(k: usize, n: usize, q: usize) -> SparseMatrix<T> {
    check_axis(k, n);
    let to = (q > 0).then(|| IndexBasis::new(n, q - 1));
    lowering(k, &IndexBasis::new(n, q), to.as_ref(), 2)
}

/// Which axes a signed composite sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    /// axes `k < m`
    Minus,
    /// axes `k >= m`
    Plus,
}

/// Hermite-side factor of a composite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HermiteLadder {
    /// `C_k`
    Raise,
    /// `A_k`
    Lower,
}

/// Symmetric-side factor of a composite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymLadder {
    /// `c_k`
    Raise,
    /// `a_k`
    Lower,
}

impl Sign {
    pub fn axes(self, n: usize, m: usize) -> std::ops::Range<usize> {
        match self {
            Sign::Minus => 0..m,
            Sign::Plus => m..n,
        }
    }
}

/// `s_k`: `-1` on the first `m` axes, `+1` after.
pub fn morse_sign(k: usize, m: usize) -> i64 {
    if k < m {
        -1
    } else {
        1
    }
}

/// Blocks `H^q ⊗ S^p` for `q = 0..=q_max`.
pub fn hermite_range(q_max: usize, p: usize) -> Vec<Block> {
    (0..=q_max).map(|q| Block::new(q, p)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Elementary {
    Raise,
    Lower,
    HalfRaise,
    Derivative,
}

type MatrixCache<T> = HashMap<(Elementary, usize, usize), Arc<SparseMatrix<T>>>;

/// Caching factory for bases, Gram diagonals and ladder matrices in a fixed
/// dimension `n`. Safe to share between threads; cache insertion is
/// serialized by the locks.
pub struct LadderFactory<T> {
    n: usize,
    bases: RwLock<HashMap<usize, Arc<IndexBasis>>>,
    grams: RwLock<HashMap<Block, Arc<GramDiagonal<T>>>>,
    matrices: RwLock<MatrixCache<T>>,
}

impl<T: Field> LadderFactory<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        LadderFactory {
            n,
            bases: RwLock::new(HashMap::new()),
            grams: RwLock::new(HashMap::new()),
            matrices: RwLock::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self, degree: usize) -> Arc<IndexBasis> {
        if let Some(b) = self.bases.read().unwrap().get(&degree) {
            return b.clone();
        }
        let built = Arc::new(IndexBasis::new(self.n, degree));
        self.bases.write().unwrap().entry(degree).or_insert(built).clone()
    }

    pub fn block_basis(&self, block: Block) -> BlockBasis {
        BlockBasis::new(self.basis(block.q), self.basis(block.p))
    }

    pub fn gram(&self, block: Block) -> Arc<GramDiagonal<T>> {
        if let Some(g) = self.grams.read().unwrap().get(&block) {
            return g.clone();
        }
        let built = Arc::new(GramDiagonal::for_block(&self.block_basis(block)));
        self.grams.write().unwrap().entry(block).or_insert(built).clone()
    }

    fn elementary(&self, kind: Elementary, k: usize, degree: usize) -> Arc<SparseMatrix<T>> {
        check_axis(k, self.n);
        let key = (kind, k, degree);
        if let Some(m) = self.matrices.read().unwrap().get(&key) {
            return m.clone();
        }
        let from = self.basis(degree);
        let down = (degree > 0).then(|| self.basis(degree - 1));
        let built = Arc::new(match kind {
            Elementary::Raise => raising(k, &from, &self.basis(degree + 1)),
            Elementary::Lower => lowering(k, &from, down.as_deref(), 1),
            Elementary::HalfRaise => {
                raising::<T>(k, &from, &self.basis(degree + 1)).scale(&(T::one() / T::from_int(2)))
            }
            Elementary::Derivative => lowering(k, &from, down.as_deref(), 2),
        });
        self.matrices.write().unwrap().entry(key).or_insert(built).clone()
    }

    pub fn c(&self, k: usize, p: usize) -> Arc<SparseMatrix<T>> {
        self.elementary(Elementary::Raise, k, p)
    }

    pub fn a(&self, k: usize, p: usize) -> Arc<SparseMatrix<T>> {
        self.elementary(Elementary::Lower, k, p)
    }

    #[allow(non_snake_case)]
    pub fn C(&self, k: usize, q: usize) -> Arc<SparseMatrix<T>> {
        self.elementary(Elementary::Raise, k, q)
    }

    #[allow(non_snake_case)]
    pub fn A(&self, k: usize, q: usize) -> Arc<SparseMatrix<T>> {
        self.elementary(Elementary::Lower, k, q)
    }

    /// `(H^q → H^{q-1}, H^q → H^{q+1})` parts of multiplication by `y_k`.
    pub fn y(&self, k: usize, q: usize) -> (Arc<SparseMatrix<T>>, Arc<SparseMatrix<T>>) {
        (self.elementary(Elementary::Lower, k, q), self.elementary(Elementary::HalfRaise, k, q))
    }

    pub fn d(&self, k: usize, q: usize) -> Arc<SparseMatrix<T>> {
        self.elementary(Elementary::Derivative, k, q)
    }

    fn hermite_matrix(&self, op: HermiteLadder, k: usize, q: usize) -> Arc<SparseMatrix<T>> {
        match op {
            HermiteLadder::Raise => self.C(k, q),
            HermiteLadder::Lower => self.A(k, q),
        }
    }

    fn sym_matrix(&self, op: SymLadder, k: usize, p: usize) -> Arc<SparseMatrix<T>> {
        match op {
            SymLadder::Raise => self.c(k, p),
            SymLadder::Lower => self.a(k, p),
        }
    }

    /// `Σ_k left_k ⊗ right_k` over the axes selected by `sign`, e.g.
    /// `(Cc)^- = Σ_{k<m} C_k c_k`, materialized on `domain`.
    pub fn composite(
        &self,
        sign: Sign,
        left: HermiteLadder,
        right: SymLadder,
        m: usize,
        domain: &[Block],
    ) -> Result<GradedOperator<T>> {
        self.check_morse(m)?;
        let dq = match left {
            HermiteLadder::Raise => 1,
            HermiteLadder::Lower => -1,
        };
        let dp = match right {
            SymLadder::Raise => 1,
            SymLadder::Lower => -1,
        };
        let mut op = GradedOperator::new(self.n, dp, [dq]).with_morse_index(m);
        for &s in domain {
            op.mark_source(s);
            let Some(t) = s.shifted(dq, dp) else { continue };
            for k in sign.axes(self.n, m) {
                let h = self.hermite_matrix(left, k, s.q);
                let y = self.sym_matrix(right, k, s.p);
                op.insert(s, t, h.kron(&y))?;
            }
        }
        Ok(op)
    }

    /// `P = (Ca)^- - 2(Aa)^+`.
    pub fn build_p(&self, m: usize, domain: &[Block]) -> Result<GradedOperator<T>> {
        let ca = self.composite(Sign::Minus, HermiteLadder::Raise, SymLadder::Lower, m, domain)?;
        let aa = self.composite(Sign::Plus, HermiteLadder::Lower, SymLadder::Lower, m, domain)?;
        ca.try_sub(&aa.scale(&T::from_int(2)))
    }

    /// `Q = (Cc)^- - 2(Ac)^+`.
    pub fn build_q(&self, m: usize, domain: &[Block]) -> Result<GradedOperator<T>> {
        let cc = self.composite(Sign::Minus, HermiteLadder::Raise, SymLadder::Raise, m, domain)?;
        let ac = self.composite(Sign::Plus, HermiteLadder::Lower, SymLadder::Raise, m, domain)?;
        cc.try_sub(&ac.scale(&T::from_int(2)))
    }

    /// `P* = 2(Ac)^- - (Cc)^+`, from the adjoint relations `a* = c`, `A* = ½C`.
    pub fn adjoint_p_formula(&self, m: usize, domain: &[Block]) -> Result<GradedOperator<T>> {
        let ac = self.composite(Sign::Minus, HermiteLadder::Lower, SymLadder::Raise, m, domain)?;
        let cc = self.composite(Sign::Plus, HermiteLadder::Raise, SymLadder::Raise, m, domain)?;
        ac.scale(&T::from_int(2)).try_sub(&cc)
    }

    /// `Q* = 2(Aa)^- - (Ca)^+`.
    pub fn adjoint_q_formula(&self, m: usize, domain: &[Block]) -> Result<GradedOperator<T>> {
        let aa = self.composite(Sign::Minus, HermiteLadder::Lower, SymLadder::Lower, m, domain)?;
        let ca = self.composite(Sign::Plus, HermiteLadder::Raise, SymLadder::Lower, m, domain)?;
        aa.scale(&T::from_int(2)).try_sub(&ca)
    }

    /// `P*` as the blockwise Gram adjoint of `P`. `P` is materialized on the
    /// neighbouring degrees so that every adjoint block is complete.
    pub fn adjoint_p(&self, m: usize, domain: &[Block]) -> Result<GradedOperator<T>> {
        let p = self.build_p(m, &preimages(domain, -1))?;
        p.adjoint(self, domain)
    }

    pub fn adjoint_q(&self, m: usize, domain: &[Block]) -> Result<GradedOperator<T>> {
        let q = self.build_q(m, &preimages(domain, 1))?;
        q.adjoint(self, domain)
    }

    /// A Hermite-only operator (on `H^q ⊗ S^0` blocks) for multiplication by `y_k`.
    pub fn hermite_y(&self, k: usize, q_max: usize) -> Result<GradedOperator<T>> {
        let mut op = GradedOperator::new(self.n, 0, [-1, 1]);
        for q in 0..=q_max {
            let s = Block::new(q, 0);
            let (down, up) = self.y(k, q);
            if q > 0 {
                op.insert(s, Block::new(q - 1, 0), (*down).clone())?;
            }
            op.insert(s, Block::new(q + 1, 0), (*up).clone())?;
        }
        Ok(op)
    }

    /// A Hermite-only operator for `∂_k`.
    pub fn hermite_d(&self, k: usize, q_max: usize) -> Result<GradedOperator<T>> {
        let mut op = GradedOperator::new(self.n, 0, [-1]);
        for q in 0..=q_max {
            let s = Block::new(q, 0);
            op.mark_source(s);
            if q > 0 {
                op.insert(s, Block::new(q - 1, 0), (*self.d(k, q)).clone())?;
            }
        }
        Ok(op)
    }

    /// `σ_kl = a_k c_l + c_k a_l` on `S^p`.
    pub fn sym_pair(&self, k: usize, l: usize, p: usize) -> SparseMatrix<T> {
        let first = &*self.a(k, p + 1) * &*self.c(l, p);
        if p == 0 {
            return first;
        }
        &first + &(&*self.c(k, p - 1) * &*self.a(l, p))
    }

    fn check_morse(&self, m: usize) -> Result<()> {
        if m > self.n {
            return Err(Error::InvalidParameters(format!("Morse index {m} exceeds dimension {}", self.n)));
        }
        Ok(())
    }
}

/// Sources whose image (Hermite shift ±1, symmetric shift `p_shift`) can
/// land in `targets`.
fn preimages(targets: &[Block], p_shift: i64) -> Vec<Block> {
    let mut out: Vec<Block> =
        targets.iter().flat_map(|t| [-1i64, 1].into_iter().filter_map(move |dq| t.shifted(dq, -p_shift))).collect();
    out.sort();
    out.dedup();
    out
}
