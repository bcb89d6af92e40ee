//! Multi-indices and the closed-form counting formulas built on them.

use std::fmt;

use num_integer::binomial;

use crate::error::{Error, Result};

/// Exponent vector `(i_1, ..., i_n)`.
///
/// Used both for Hermite polynomials `H_I` and for symmetric monomials `e^J`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `1_k` (0-based axis).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![0; n];
        v[k] = 1;
        MultiIndex(v)
    }

    /// `1_k + 1_l`; equals `2·1_k` when the axes coincide.
    pub fn pair(n: usize, k: usize, l: usize) -> Self {
        let mut v = vec![0; n];
        v[k] += 1;
        v[l] += 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    /// `|I|`
    pub fn order(&self) -> usize {
        self.0.iter().map(|&i| i as usize).sum()
    }

    pub fn factorial(&self) -> u128 {
        factorial_of(self)
    }

    pub fn incremented(&self, k: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[k] += 1;
        MultiIndex(v)
    }

    /// `I - 1_k`, or `None` when `i_k = 0` (the corresponding basis vector is zero).
    pub fn decremented(&self, k: usize) -> Option<MultiIndex> {
        if self.0[k] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[k] -= 1;
        Some(MultiIndex(v))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn factorial(k: u32) -> u128 {
    (1..=k as u128).product()
}

/// `I! = i_1! ... i_n!`
pub fn factorial_of(index: &MultiIndex) -> u128 {
    index.0.iter().map(|&i| factorial(i)).product()
}

/// All multi-indices of length `n` and order `q`, graded lexicographic with the
/// largest first component first: `(2,0), (1,1), (0,2)`.
pub fn enumerate_indices(n: usize, q: usize) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::with_capacity(sym_rank(n, q) as usize);
    let mut current = vec![0u32; n];
    fill(&mut current, 0, q as u32, &mut out);
    out
}

fn fill(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for i in (0..=remaining).rev() {
        current[pos] = i;
        fill(current, pos + 1, remaining - i, out);
    }
}

/// Dimension of homogeneous degree-`p` polynomials in `n` variables, `C(n+p-1, p)`.
pub fn sym_rank(n: usize, p: usize) -> u64 {
    assert!(n >= 1, "dimension must be positive");
    binomial((n + p - 1) as u64, p as u64)
}

/// Classical upper bound on the dimension of symmetric Killing `p`-tensors,
/// `(1/n)·C(n+p, p+1)·C(n+p-1, p)`.
pub fn killing_bound(n: usize, p: usize) -> u64 {
    assert!(n >= 1 && p >= 1, "killing_bound needs n >= 1 and p >= 1");
    let num = binomial((n + p) as u128, (p + 1) as u128) * binomial((n + p - 1) as u128, p as u128);
    assert_eq!(num % n as u128, 0, "killing bound is not integral for n={n}, p={p}");
    (num / n as u128) as u64
}

/// Index-zero kernel dimension from the closed forms for `p = 1` and `p = 2`.
#[allow(non_snake_case)]
pub fn closed_form_K0(n: usize, p: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidParameters("dimension must be positive".into()));
    }
    let n64 = n as u64;
    match p {
        1 => Ok(binomial(n64 + 1, 2)),
        2 => Ok(match n {
            1 => 1,
            2 => 3,
            _ => {
                let lead = binomial(n64 + 2, 3) * binomial(n64 + 1, 2);
                assert_eq!(lead % n64, 0);
                lead / n64 - n64 * (n64 + 3) / 2
            }
        }),
        other => Err(Error::NoClosedForm(other)),
    }
}
