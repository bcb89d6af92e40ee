//! The weighted model operator `K_w` at a critical point of Morse index `m`,
//! assembled two independent ways.
//!
//! * factored: `K_w = P*P + Q*Q`, with the adjoints taken numerically
//!   through the Gram diagonals;
//! * direct: `w⁻¹D̄w + B̄ + V̄` written out in `y_k`, `∂_k` and the symmetric
//!   ladder operators, with `y_k`, `∂_k` acting on Hermite polynomials.
//!
//! Domain blocks are `H^q ⊗ S^p` with `q ≤ q_max`; every intermediate block a
//! product passes through is materialized, so the restriction of `K_w` to
//! the domain is exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_space::{block_dim, Block};
use crate::ladder::{hermite_range, morse_sign, BlockDiscrepancy, GradedOperator, LadderFactory};
use crate::linalg::SparseMatrix;
use crate::scalar::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelSpec {
    /// ambient dimension
    pub n: usize,
    /// symmetric degree
    pub p: usize,
    /// Morse index
    pub m: usize,
    /// largest Hermite degree of the domain blocks
    pub q_max: usize,
}

impl ModelSpec {
    pub fn new(n: usize, p: usize, m: usize, q_max: usize) -> Result<Self> {
        let spec = ModelSpec { n, p, m, q_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameters("dimension must be positive".into()));
        }
        if self.m > self.n {
            return Err(Error::InvalidParameters(format!("Morse index {} exceeds dimension {}", self.m, self.n)));
        }
        Ok(())
    }

    pub fn domain(&self) -> Vec<Block> {
        hermite_range(self.q_max, self.p)
    }

    pub fn domain_dim(&self) -> usize {
        self.domain().iter().map(|b| block_dim(self.n, *b)).sum()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} p={} m={} q_max={}", self.n, self.p, self.m, self.q_max)
    }
}

/// Outcome of an exact blockwise identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport<T> {
    pub name: String,
    pub spec: ModelSpec,
    pub discrepancies: Vec<BlockDiscrepancy<T>>,
}

impl<T: Field> IdentityReport<T> {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }

    fn compare(name: &str, spec: ModelSpec, lhs: &GradedOperator<T>, rhs: &GradedOperator<T>) -> Self {
        IdentityReport { name: name.to_string(), spec, discrepancies: lhs.discrepancies(rhs) }
    }
}

/// Hermite-degree range `0..=q` on `S^0`, the carrier for Hermite-only operators.
fn hermite_only(q_max: usize) -> Vec<Block> {
    hermite_range(q_max, 0)
}

/// `P*P + Q*Q` on the domain of `spec`.
pub fn assemble_factored<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<GradedOperator<T>> {
    spec.validate()?;
    let domain = spec.domain();
    let p = factory.build_p(spec.m, &domain)?;
    let q = factory.build_q(spec.m, &domain)?;
    let p_targets = if spec.p > 0 { hermite_range(spec.q_max + 1, spec.p - 1) } else { Vec::new() };
    let q_targets = hermite_range(spec.q_max + 1, spec.p + 1);
    let p_star = factory.adjoint_p(spec.m, &p_targets)?;
    let q_star = factory.adjoint_q(spec.m, &q_targets)?;
    let ptp = p_star.compose(&p)?;
    let qtq = q_star.compose(&q)?;
    Ok(ptp.try_add(&qtq)?.with_morse_index(spec.m))
}

struct HermiteOps<T> {
    y: Vec<GradedOperator<T>>,
    d: Vec<GradedOperator<T>>,
    q_max: usize,
}

impl<T: Field> HermiteOps<T> {
    /// `y_k` and `∂_k` on Hermite degrees up to `q_max + 1`, enough for any
    /// product of two of them applied to degrees `≤ q_max`.
    fn new(factory: &LadderFactory<T>, q_max: usize) -> Result<Self> {
        let n = factory.n();
        let y = (0..n).map(|k| factory.hermite_y(k, q_max + 1)).collect::<Result<Vec<_>>>()?;
        let d = (0..n).map(|k| factory.hermite_d(k, q_max + 1)).collect::<Result<Vec<_>>>()?;
        Ok(HermiteOps { y, d, q_max })
    }

    /// `left ∘ right` on Hermite degrees `≤ q_max`.
    fn product(&self, left: &GradedOperator<T>, right: &GradedOperator<T>) -> Result<GradedOperator<T>> {
        left.compose(&right.restrict(&hermite_only(self.q_max))?)
    }

    fn identity(&self, n: usize) -> GradedOperator<T> {
        GradedOperator::identity(n, &hermite_only(self.q_max))
    }
}

fn sum_all<T: Field>(n: usize, domain: &[Block], terms: Vec<GradedOperator<T>>) -> Result<GradedOperator<T>> {
    terms.iter().try_fold(GradedOperator::zero(n, 0, domain), |acc, t| acc.try_add(t))
}

/// `w⁻¹D̄w = -Σ_{k,l} (-δ_kl + y_k y_l - y_k∂_l - y_l∂_k + ∂_k∂_l)(a_k c_l + c_k a_l)`.
pub fn weighted_second_order<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<GradedOperator<T>> {
    spec.validate()?;
    let ops = HermiteOps::new(factory, spec.q_max)?;
    weighted_second_order_with(factory, spec, &ops)
}

fn weighted_second_order_with<T: Field>(
    factory: &LadderFactory<T>,
    spec: &ModelSpec,
    ops: &HermiteOps<T>,
) -> Result<GradedOperator<T>> {
    let n = spec.n;
    let one = T::one();
    let mut terms = Vec::new();
    for k in 0..n {
        for l in 0..n {
            let mut inner = ops.product(&ops.y[k], &ops.y[l])?;
            if k == l {
                inner = inner.try_sub(&ops.identity(n))?;
            }
            inner = inner
                .try_sub(&ops.product(&ops.y[k], &ops.d[l])?)?
                .try_sub(&ops.product(&ops.y[l], &ops.d[k])?)?
                .try_add(&ops.product(&ops.d[k], &ops.d[l])?)?;
            let sym = factory.sym_pair(k, l, spec.p);
            terms.push(inner.scale(&-one.clone()).tensor_sym(&sym, spec.p, spec.p)?);
        }
    }
    sum_all(n, &spec.domain(), terms)
}

/// `B̄ = -Σ_k s_k (a_k c_k + c_k a_k)`, acting on the symmetric factor only.
pub fn model_b<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<GradedOperator<T>> {
    spec.validate()?;
    let dim = block_dim(spec.n, Block::new(0, spec.p));
    let mut fiber = SparseMatrix::zeros(dim, dim);
    for k in 0..spec.n {
        let s = T::from_int(-morse_sign(k, spec.m));
        fiber = &fiber + &factory.sym_pair(k, k, spec.p).scale(&s);
    }
    GradedOperator::identity(spec.n, &hermite_only(spec.q_max)).tensor_sym(&fiber, spec.p, spec.p)
}

/// `V̄ = Σ_{k,l} s_k s_l y_k y_l (a_k c_l + c_k a_l)`.
pub fn model_v<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<GradedOperator<T>> {
    spec.validate()?;
    let ops = HermiteOps::new(factory, spec.q_max)?;
    model_v_with(factory, spec, &ops)
}

fn model_v_with<T: Field>(
    factory: &LadderFactory<T>,
    spec: &ModelSpec,
    ops: &HermiteOps<T>,
) -> Result<GradedOperator<T>> {
    let mut terms = Vec::new();
    for k in 0..spec.n {
        for l in 0..spec.n {
            let s = T::from_int(morse_sign(k, spec.m) * morse_sign(l, spec.m));
            let yy = ops.product(&ops.y[k], &ops.y[l])?.scale(&s);
            terms.push(yy.tensor_sym(&factory.sym_pair(k, l, spec.p), spec.p, spec.p)?);
        }
    }
    sum_all(spec.n, &spec.domain(), terms)
}

/// `w⁻¹D̄w + B̄ + V̄` on the domain of `spec`.
pub fn assemble_direct<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<GradedOperator<T>> {
    spec.validate()?;
    let ops = HermiteOps::new(factory, spec.q_max)?;
    let d = weighted_second_order_with(factory, spec, &ops)?;
    let b = model_b(factory, spec)?;
    let v = model_v_with(factory, spec, &ops)?;
    Ok(d.try_add(&b)?.try_add(&v)?.with_morse_index(spec.m))
}

/// Exact blockwise agreement of the direct and factored assemblies.
pub fn verify_factorization<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<IdentityReport<T>> {
    let direct = assemble_direct(factory, spec)?;
    let factored = assemble_factored(factory, spec)?;
    Ok(IdentityReport::compare("K_w = P*P + Q*Q", *spec, &direct, &factored))
}

/// `Q*Q - QQ* = 2Σ_k C_k A_k + 2Σ_{k<m} c_k a_k - 2Σ_{k≥m} c_k a_k + 2m`.
pub fn verify_commutator_qq<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<IdentityReport<T>> {
    spec.validate()?;
    let domain = spec.domain();
    let q = factory.build_q(spec.m, &domain)?;
    let q_star_up = factory.adjoint_q(spec.m, &hermite_range(spec.q_max + 1, spec.p + 1))?;
    let lhs_first = q_star_up.compose(&q)?;

    let q_star = factory.adjoint_q(spec.m, &domain)?;
    let lower = if spec.p > 0 { hermite_range(spec.q_max + 1, spec.p - 1) } else { Vec::new() };
    let q_lower = factory.build_q(spec.m, &lower)?;
    let lhs = lhs_first.try_sub(&q_lower.compose(&q_star)?)?;

    let two = T::from_int(2);
    let mut rhs = GradedOperator::new(spec.n, 0, [0]);
    for &b in &domain {
        let h_dim = block_dim(spec.n, Block::new(b.q, 0));
        let s_dim = block_dim(spec.n, Block::new(0, b.p));
        let mut number_h = SparseMatrix::zeros(h_dim, h_dim);
        if b.q > 0 {
            for k in 0..spec.n {
                number_h = &number_h + &(&*factory.C(k, b.q - 1) * &*factory.A(k, b.q));
            }
        }
        let mut signed_s = SparseMatrix::zeros(s_dim, s_dim);
        if b.p > 0 {
            for k in 0..spec.n {
                let ca = &*factory.c(k, b.p - 1) * &*factory.a(k, b.p);
                signed_s = &signed_s + &ca.scale(&T::from_int(-morse_sign(k, spec.m)));
            }
        }
        let total = &(&number_h.kron(&SparseMatrix::identity(s_dim)) + &SparseMatrix::identity(h_dim).kron(&signed_s))
            + &SparseMatrix::scalar_identity(h_dim * s_dim, T::from_int(spec.m as i64));
        rhs.insert(b, b, total.scale(&two))?;
    }
    Ok(IdentityReport::compare("Q*Q - QQ* commutator", *spec, &lhs, &rhs))
}

/// `V̄ = 2F*F + R` with `F = Σ_k s_k y_k a_k` and `R` multiplication by `|y|²`.
pub fn verify_v_psd<T: Field>(factory: &LadderFactory<T>, spec: &ModelSpec) -> Result<IdentityReport<T>> {
    spec.validate()?;
    let ops = HermiteOps::new(factory, spec.q_max)?;
    let v = model_v_with(factory, spec, &ops)?;
    let domain = spec.domain();

    let mut r_op = GradedOperator::zero(spec.n, 0, &hermite_only(spec.q_max));
    for k in 0..spec.n {
        r_op = r_op.try_add(&ops.product(&ops.y[k], &ops.y[k])?)?;
    }
    let s_dim = block_dim(spec.n, Block::new(0, spec.p));
    let mut rhs = r_op.tensor_sym(&SparseMatrix::identity(s_dim), spec.p, spec.p)?;

    if spec.p > 0 {
        let mut f_op: Option<GradedOperator<T>> = None;
        for k in 0..spec.n {
            let y = factory.hermite_y(k, spec.q_max + 2)?.scale(&T::from_int(morse_sign(k, spec.m)));
            let term = y.tensor_sym(&factory.a(k, spec.p), spec.p, spec.p - 1)?;
            f_op = Some(match f_op {
                None => term,
                Some(acc) => acc.try_add(&term)?,
            });
        }
        let f_op = f_op.expect("n >= 1");
        let f_star = f_op.adjoint(factory, &hermite_range(spec.q_max + 1, spec.p - 1))?;
        let ftf = f_star.compose(&f_op.restrict(&domain)?)?;
        rhs = rhs.try_add(&ftf.scale(&T::from_int(2)))?;
    }
    Ok(IdentityReport::compare("V = 2F*F + |y|^2", *spec, &v, &rhs))
}

/// Blocks `s → t` with both ends in the domain where the Gram adjoint of
/// `K[s → t]` differs from `K[t → s]`.
pub fn self_adjoint_defects<T: Field>(
    factory: &LadderFactory<T>,
    op: &GradedOperator<T>,
) -> Result<Vec<(Block, Block)>> {
    let mut out = Vec::new();
    for &s in op.domain() {
        for &t in op.domain() {
            let fwd = op.block_or_zero(s, t);
            let back = op.block_or_zero(t, s);
            if fwd.gram_adjoint(&factory.gram(s), &factory.gram(t))? != back {
                out.push((s, t));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn r(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn spec(n: usize, p: usize, m: usize, q_max: usize) -> ModelSpec {
        ModelSpec::new(n, p, m, q_max).unwrap()
    }

    #[test]
    fn scalar_case_is_twice_the_number_operator() {
        // n = 1, p = 0, m = 0: K_w = 4(Ac)*(Ac) = 2 CaAc = 2q on H^q
        let s = spec(1, 0, 0, 4);
        let f = LadderFactory::<Rational>::new(1);
        let k = assemble_factored(&f, &s).unwrap();
        for q in 0..=4 {
            let b = Block::new(q, 0);
            let want = SparseMatrix::scalar_identity(1, r(2 * q as i64));
            assert_eq!(k.block_or_zero(b, b), want, "q={q}");
        }
        assert!(verify_factorization(&f, &s).unwrap().passed());
    }

    #[test]
    fn constants_are_in_the_index_zero_kernel() {
        for n in 1..=3 {
            let f = LadderFactory::<Rational>::new(n);
            for p in 0..=3 {
                let k = assemble_factored(&f, &spec(n, p, 0, 2)).unwrap();
                assert!(k.blocks_from(Block::new(0, p)).next().is_none());
            }
        }
    }

    #[test]
    fn full_index_blocks_are_definite() {
        // n = m = 1, p = 1: every block is 1x1, so definite means a positive entry
        let f = LadderFactory::<Rational>::new(1);
        let k = assemble_factored(&f, &spec(1, 1, 1, 2)).unwrap();
        for q in 0..=2 {
            let b = Block::new(q, 1);
            assert!(k.block_or_zero(b, b).get(0, 0) > r(0), "q={q}");
        }
    }

    #[test]
    fn b_bar_on_one_forms() {
        // m = 0, n = 2, p = 1: -Σ(a_k c_k + c_k a_k) = -(n + 2p) Id = -4 Id
        let f = LadderFactory::<Rational>::new(2);
        let s = spec(2, 1, 0, 0);
        let b = model_b(&f, &s).unwrap();
        let blk = Block::new(0, 1);
        assert_eq!(b.block_or_zero(blk, blk), SparseMatrix::scalar_identity(2, r(-4)));
        // oracle via the commutation relation: a_k c_k = c_k a_k + 1
        for n in 1..=4 {
            let f = LadderFactory::<Rational>::new(n);
            for p in 0..=3 {
                let s = spec(n, p, 0, 0);
                let b = model_b(&f, &s).unwrap();
                let dim = block_dim(n, Block::new(0, p));
                let want = SparseMatrix::scalar_identity(dim, r(-(n as i64 + 2 * p as i64)));
                assert_eq!(b.block_or_zero(Block::new(0, p), Block::new(0, p)), want);
            }
        }
    }

    #[test]
    fn r_on_constants() {
        // |y|² H_0 = (n/2) H_0 + ¼ Σ_k H_{2·1_k}
        let n = 3;
        let f = LadderFactory::<Rational>::new(n);
        let ops = HermiteOps::new(&f, 0).unwrap();
        let mut r_op = GradedOperator::zero(n, 0, &hermite_only(0));
        for k in 0..n {
            r_op = r_op.try_add(&ops.product(&ops.y[k], &ops.y[k]).unwrap()).unwrap();
        }
        let h0 = Block::new(0, 0);
        assert_eq!(r_op.block_or_zero(h0, h0), SparseMatrix::from_dense(&[vec![Rational::new(3.into(), 2.into())]]));
        let up = r_op.block_or_zero(h0, Block::new(2, 0));
        let basis = f.basis(2);
        for (i, idx) in basis.indices().iter().enumerate() {
            let want = if idx.components().contains(&2) { Rational::new(1.into(), 4.into()) } else { r(0) };
            assert_eq!(up.get(i, 0), want);
        }
    }

    #[test]
    fn factorization_examples() {
        for (n, p, m, q_max) in [(2, 1, 0, 4), (3, 2, 2, 3), (1, 1, 1, 4), (2, 2, 1, 3), (1, 0, 1, 3)] {
            let f = LadderFactory::<Rational>::new(n);
            let rep = verify_factorization(&f, &spec(n, p, m, q_max)).unwrap();
            assert!(rep.passed(), "{}: {:?}", rep.spec, rep.discrepancies);
        }
    }

    #[test]
    fn commutator_examples() {
        for (n, p, m, q_max) in [(2, 2, 0, 3), (2, 0, 2, 3), (3, 0, 1, 0), (3, 1, 1, 2), (1, 3, 1, 3)] {
            let f = LadderFactory::<Rational>::new(n);
            let rep = verify_commutator_qq(&f, &spec(n, p, m, q_max)).unwrap();
            assert!(rep.passed(), "{}: {:?}", rep.spec, rep.discrepancies);
        }
    }

    #[test]
    fn commutator_at_index_zero_is_degree_difference() {
        // Q*Q - QQ* = 2(q - p) Id on H^q ⊗ S^p when m = 0
        let n = 2;
        let f = LadderFactory::<Rational>::new(n);
        let s = spec(n, 2, 0, 3);
        let q = f.build_q(0, &s.domain()).unwrap();
        let q_star = f.adjoint_q(0, &hermite_range(4, 3)).unwrap();
        let lhs1 = q_star.compose(&q).unwrap();
        let q_lo = f.build_q(0, &hermite_range(4, 1)).unwrap();
        let lhs = lhs1.try_sub(&q_lo.compose(&f.adjoint_q(0, &s.domain()).unwrap()).unwrap()).unwrap();
        for b in s.domain() {
            let dim = block_dim(n, b);
            assert_eq!(lhs.block_or_zero(b, b), SparseMatrix::scalar_identity(dim, r(2 * (b.q as i64 - 2))));
        }
    }

    #[test]
    fn v_psd_examples() {
        for (n, p, m, q_max) in [(1, 1, 0, 3), (2, 1, 1, 3), (3, 2, 2, 2), (2, 0, 1, 2)] {
            let f = LadderFactory::<Rational>::new(n);
            let rep = verify_v_psd(&f, &spec(n, p, m, q_max)).unwrap();
            assert!(rep.passed(), "{}: {:?}", rep.spec, rep.discrepancies);
        }
    }

    #[test]
    fn k_w_is_self_adjoint_with_even_shifts() {
        for (n, p, m) in [(2, 1, 1), (3, 2, 1), (2, 2, 0)] {
            let f = LadderFactory::<Rational>::new(n);
            let s = spec(n, p, m, 3);
            let k = assemble_factored(&f, &s).unwrap();
            assert!(self_adjoint_defects(&f, &k).unwrap().is_empty());
            for (src, tgt, _) in k.blocks() {
                let dq = tgt.q as i64 - src.q as i64;
                assert!([-2, 0, 2].contains(&dq));
                assert_eq!(src.p, tgt.p);
                if m == 0 {
                    assert_eq!(dq, 0);
                }
            }
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        assert!(ModelSpec::new(2, 1, 3, 2).is_err());
        assert!(ModelSpec::new(0, 1, 0, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quadratic_form_splits_into_squares(
            n in 1usize..=3, p in 0usize..=2, m_seed in 0usize..4, q in 0usize..=2,
            coeffs in proptest::collection::vec(-4i64..5, 60),
        ) {
            let m = m_seed % (n + 1);
            let s = spec(n, p, m, q);
            let f = LadderFactory::<Rational>::new(n);
            let k = assemble_factored(&f, &s).unwrap();
            let src = Block::new(q, p);
            let dim = block_dim(n, src);
            let v: Vec<Rational> = (0..dim).map(|i| r(coeffs[i % coeffs.len()])).collect();
            let kv = k.apply(src, &v).unwrap();
            let lhs = kv.get(&src).map(|w| f.gram(src).pairing(w, &v)).unwrap_or_else(|| r(0));
            let mut rhs = r(0);
            for op in [f.build_p(m, &[src]).unwrap(), f.build_q(m, &[src]).unwrap()] {
                for (t, w) in op.apply(src, &v).unwrap() {
                    rhs += f.gram(t).pairing(&w, &w);
                }
            }
            prop_assert!(lhs >= r(0));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
