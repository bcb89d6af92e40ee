//! Exact identity suites: every check compares matrices entry by entry
//! over the rationals, so a pass means a zero residual.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::closed_form_K0;
use crate::error::{Error, Result};
use crate::graded_space::{block_dim, Block};
use crate::kernel::{kernel_block_m0, kw_block_nullity_m0, lemma_dims, reduction_pair, K_total_m0};
use crate::ladder::{hermite_range, GradedOperator, HermiteLadder, LadderFactory, Sign, SymLadder};
use crate::linalg::SparseMatrix;
use crate::model::{
    assemble_factored, self_adjoint_defects, verify_commutator_qq, verify_factorization, verify_v_psd, IdentityReport,
    ModelSpec,
};
use crate::scalar::Field;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ccr,
    HermiteCcr,
    Adjoints,
    Factorization,
    Commutators,
    EigenIdentity,
    Injectivity,
    Psd,
    ClosedForm,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 9] = [
        Suite::Ccr,
        Suite::HermiteCcr,
        Suite::Adjoints,
        Suite::Factorization,
        Suite::Commutators,
        Suite::EigenIdentity,
        Suite::Injectivity,
        Suite::Psd,
        Suite::ClosedForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ccr => "ccr",
            Suite::HermiteCcr => "hermite-ccr",
            Suite::Adjoints => "adjoints",
            Suite::Factorization => "factorization",
            Suite::Commutators => "commutators",
            Suite::EigenIdentity => "eigen-identity",
            Suite::Injectivity => "injectivity",
            Suite::Psd => "psd",
            Suite::ClosedForm => "closed-form",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::CONCRETE
            .iter()
            .chain([Suite::All].iter())
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidParameters(format!("unknown suite {s:?}")))
    }
}

/// Parameter grid for a suite run. `m = None` means every index `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub n: RangeInclusive<usize>,
    pub p: RangeInclusive<usize>,
    pub m: Option<RangeInclusive<usize>>,
    pub q_max: usize,
}

impl VerifyConfig {
    fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for n in self.n.clone() {
            for p in self.p.clone() {
                let ms = self.m.clone().unwrap_or(0..=n);
                for m in ms.filter(|&m| m <= n) {
                    out.push((n, p, m));
                }
            }
        }
        out
    }

    fn np(&self) -> Vec<(usize, usize)> {
        self.n.clone().flat_map(|n| self.p.clone().map(move |p| (n, p))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub check: String,
    pub n: usize,
    pub p: Option<usize>,
    pub m: Option<usize>,
    pub q_max: Option<usize>,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(suite: Suite, check: impl Into<String>, n: usize) -> Self {
        CheckResult {
            suite,
            check: check.into(),
            n,
            p: None,
            m: None,
            q_max: None,
            passed: true,
            detail: String::new(),
        }
    }

    fn p(mut self, p: usize) -> Self {
        self.p = Some(p);
        self
    }

    fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    fn q_max(mut self, q: usize) -> Self {
        self.q_max = Some(q);
        self
    }

    fn fail_if(mut self, failures: Vec<String>) -> Self {
        if !failures.is_empty() {
            self.passed = false;
            self.detail = failures.join("; ");
        }
        self
    }
}

fn from_identity<T: Field>(suite: Suite, rep: &IdentityReport<T>) -> CheckResult {
    let failures = rep
        .discrepancies
        .iter()
        .map(|d| format!("{} -> {}: max |residual| {}", d.source, d.target, d.max_abs.to_fraction_string()))
        .collect();
    CheckResult::new(suite, rep.name.clone(), rep.spec.n)
        .p(rep.spec.p)
        .m(rep.spec.m)
        .q_max(rep.spec.q_max)
        .fail_if(failures)
}

type Ladder<'a> = dyn Fn(usize, usize) -> SparseMatrix<Rational> + 'a;

/// Commutation relations for a raising/lowering pair on degrees `0..=max`:
/// raisings commute, lowerings commute, `R_k L_l - L_l R_k = -δ_kl`.
fn ccr_failures(n: usize, max: usize, dim: &dyn Fn(usize) -> usize, raise: &Ladder, lower: &Ladder) -> Vec<String> {
    let mut out = Vec::new();
    for d in 0..=max {
        let size = dim(d);
        for k in 0..n {
            for l in 0..n {
                if &raise(k, d + 1) * &raise(l, d) != &raise(l, d + 1) * &raise(k, d) {
                    out.push(format!("raisings {k},{l} on degree {d}"));
                }
                if d >= 2 && &lower(k, d - 1) * &lower(l, d) != &lower(l, d - 1) * &lower(k, d) {
                    out.push(format!("lowerings {k},{l} on degree {d}"));
                }
                let rl = if d > 0 { &raise(k, d - 1) * &lower(l, d) } else { SparseMatrix::zeros(size, size) };
                let lr = &lower(l, d + 1) * &raise(k, d);
                let want = if k == l {
                    SparseMatrix::scalar_identity(size, Rational::from_int(-1))
                } else {
                    SparseMatrix::zeros(size, size)
                };
                if &rl - &lr != want {
                    out.push(format!("mixed {k},{l} on degree {d}"));
                }
            }
        }
    }
    out
}

fn ccr(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let p_max = *cfg.p.end();
    cfg.n
        .clone()
        .map(|n| {
            let f = LadderFactory::<Rational>::new(n);
            let dim = |d| block_dim(n, Block::new(0, d));
            let failures = ccr_failures(n, p_max, &dim, &|k, d| (*f.c(k, d)).clone(), &|k, d| (*f.a(k, d)).clone());
            CheckResult::new(Suite::Ccr, "symmetric c/a commutation", n).p(p_max).fail_if(failures)
        })
        .collect()
}

fn hermite_ccr(cfg: &VerifyConfig) -> Vec<CheckResult> {
    cfg.n
        .clone()
        .map(|n| {
            let f = LadderFactory::<Rational>::new(n);
            let dim = |d| block_dim(n, Block::new(d, 0));
            let mut failures =
                ccr_failures(n, cfg.q_max, &dim, &|k, d| (*f.C(k, d)).clone(), &|k, d| (*f.A(k, d)).clone());
            // y_k = A_k + ½C_k and ∂_k = 2A_k
            let half = Rational::new(1.into(), 2.into());
            for q in 0..=cfg.q_max {
                for k in 0..n {
                    let (down, up) = f.y(k, q);
                    if *down != *f.A(k, q) || *up != f.C(k, q).scale(&half) {
                        failures.push(format!("y_{k} on degree {q}"));
                    }
                    if *f.d(k, q) != f.A(k, q).scale(&Rational::from_int(2)) {
                        failures.push(format!("d_{k} on degree {q}"));
                    }
                }
            }
            CheckResult::new(Suite::HermiteCcr, "Hermite C/A commutation", n).q_max(cfg.q_max).fail_if(failures)
        })
        .collect()
}

fn adjoints(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for n in cfg.n.clone() {
        let f = LadderFactory::<Rational>::new(n);
        let mut sym = Vec::new();
        for p in 0..=*cfg.p.end() {
            let (s, t) = (Block::new(0, p), Block::new(0, p + 1));
            for k in 0..n {
                if f.c(k, p).gram_adjoint(&f.gram(s), &f.gram(t))? != *f.a(k, p + 1) {
                    sym.push(format!("c_{k}* on S^{p}"));
                }
            }
        }
        out.push(CheckResult::new(Suite::Adjoints, "c* = a", n).p(*cfg.p.end()).fail_if(sym));
        let mut herm = Vec::new();
        let half = Rational::new(1.into(), 2.into());
        for q in 0..=cfg.q_max {
            let (s, t) = (Block::new(q, 0), Block::new(q + 1, 0));
            for k in 0..n {
                if f.A(k, q + 1).gram_adjoint(&f.gram(t), &f.gram(s))? != f.C(k, q).scale(&half) {
                    herm.push(format!("A_{k}* on H^{}", q + 1));
                }
            }
        }
        out.push(CheckResult::new(Suite::Adjoints, "A* = C/2", n).q_max(cfg.q_max).fail_if(herm));
        for p in cfg.p.clone() {
            for m in cfg.m.clone().unwrap_or(0..=n).filter(|&m| m <= n) {
                let domain = hermite_range(cfg.q_max, p);
                let mut failures = Vec::new();
                for (name, numeric, formula) in [
                    ("P*", f.adjoint_p(m, &domain)?, f.adjoint_p_formula(m, &domain)?),
                    ("Q*", f.adjoint_q(m, &domain)?, f.adjoint_q_formula(m, &domain)?),
                ] {
                    for d in numeric.discrepancies(&formula) {
                        failures.push(format!("{name} {} -> {}", d.source, d.target));
                    }
                }
                out.push(
                    CheckResult::new(Suite::Adjoints, "P*, Q* closed forms", n)
                        .p(p)
                        .m(m)
                        .q_max(cfg.q_max)
                        .fail_if(failures),
                );
            }
        }
    }
    Ok(out)
}

fn per_cell<F>(cfg: &VerifyConfig, check: F) -> Result<Vec<CheckResult>>
where
    F: Fn(&LadderFactory<Rational>, &ModelSpec) -> Result<Vec<CheckResult>> + Sync,
{
    let factories: Vec<LadderFactory<Rational>> = (0..=*cfg.n.end()).map(|n| LadderFactory::new(n.max(1))).collect();
    let cells = cfg.cells();
    let nested = cells
        .par_iter()
        .map(|&(n, p, m)| check(&factories[n], &ModelSpec::new(n, p, m, cfg.q_max)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn psd_checks(f: &LadderFactory<Rational>, spec: &ModelSpec) -> Result<Vec<CheckResult>> {
    let mut out = vec![from_identity(Suite::Psd, &verify_v_psd(f, spec)?)];
    let k = assemble_factored(f, spec)?;
    let failures = self_adjoint_defects(f, &k)?.iter().map(|(s, t)| format!("{s} -> {t}")).collect();
    out.push(
        CheckResult::new(Suite::Psd, "K_w self-adjoint", spec.n)
            .p(spec.p)
            .m(spec.m)
            .q_max(spec.q_max)
            .fail_if(failures),
    );
    Ok(out)
}

/// `Ca Ac - Ac Ca = (q - p)` on `H^q ⊗ S^p` at index zero.
fn eigen_identity(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (n, p) in cfg.np() {
        let f = LadderFactory::<Rational>::new(n);
        let domain = hermite_range(cfg.q_max, p);
        let ca_of = |d: &[Block]| f.composite(Sign::Plus, HermiteLadder::Raise, SymLadder::Lower, 0, d);
        let ac_of = |d: &[Block]| f.composite(Sign::Plus, HermiteLadder::Lower, SymLadder::Raise, 0, d);
        let ac = ac_of(&domain)?;
        let ca = ca_of(&domain)?;
        let ac_targets: Vec<Block> = domain.iter().filter_map(|b| b.shifted(-1, 1)).collect();
        let ca_targets: Vec<Block> = domain.iter().filter_map(|b| b.shifted(1, -1)).collect();
        let lhs = ca_of(&ac_targets)?.compose(&ac)?.try_sub(&ac_of(&ca_targets)?.compose(&ca)?)?;
        let mut rhs = GradedOperator::new(n, 0, [0]);
        for &b in &domain {
            let v = Rational::from_int(b.q as i64 - b.p as i64);
            rhs.insert(b, b, SparseMatrix::scalar_identity(block_dim(n, b), v))?;
        }
        let failures = lhs.discrepancies(&rhs).iter().map(|d| format!("{} -> {}", d.source, d.target)).collect();
        out.push(
            CheckResult::new(Suite::EigenIdentity, "CaAc - AcCa = q - p", n)
                .p(p)
                .m(0)
                .q_max(cfg.q_max)
                .fail_if(failures),
        );
    }
    Ok(out)
}

/// `Ac` injective above the diagonal `q > p`, `Ca` injective below it.
fn injectivity(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (n, p) in cfg.np() {
        let f = LadderFactory::<Rational>::new(n);
        let mut failures = Vec::new();
        for q in 0..=cfg.q_max {
            let b = Block::new(q, p);
            let dim = block_dim(n, b);
            if q > p {
                let (_, ac) = reduction_pair(&f, b);
                if ac.rank() != dim {
                    failures.push(format!("Ac on {b} has rank {} < {dim}", ac.rank()));
                }
            } else if q < p {
                let mut ca = SparseMatrix::zeros(block_dim(n, Block::new(q + 1, p - 1)), dim);
                for k in 0..n {
                    ca = &ca + &f.C(k, q).kron(&f.a(k, p));
                }
                if ca.rank() != dim {
                    failures.push(format!("Ca on {b} has rank {} < {dim}", ca.rank()));
                }
            }
        }
        out.push(
            CheckResult::new(Suite::Injectivity, "injectivity off the diagonal", n)
                .p(p)
                .m(0)
                .q_max(cfg.q_max)
                .fail_if(failures),
        );
    }
    out
}

/// Index-zero totals against the closed forms for `p = 1, 2`, block
/// dimensions against the lemma formulas, and the reduction against the
/// nullity of the assembled operator on small blocks.
fn closed_form(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let rows = cfg
        .n
        .clone()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| -> Result<Vec<CheckResult>> {
            let f = LadderFactory::<Rational>::new(n);
            let mut out = Vec::new();
            for p in 1..=2 {
                let got = K_total_m0(&f, p)?.total as u64;
                let want = closed_form_K0(n, p)?;
                let failures = if got == want { vec![] } else { vec![format!("nullspace {got}, closed form {want}")] };
                out.push(CheckResult::new(Suite::ClosedForm, "K total vs closed form", n).p(p).m(0).fail_if(failures));
            }
            let dims = lemma_dims(n)?;
            let mut failures = Vec::new();
            for (name, p, q, want) in [("K11", 1, 1, dims.k11), ("K12", 2, 1, dims.k12), ("K22", 2, 2, dims.k22)] {
                let got = kernel_block_m0(&f, p, q)?.0 as u64;
                if got != want {
                    failures.push(format!("{name}: nullspace {got}, formula {want}"));
                }
            }
            out.push(CheckResult::new(Suite::ClosedForm, "block dimensions vs formulas", n).m(0).fail_if(failures));
            if n <= 3 {
                let mut failures = Vec::new();
                for p in 0..=2 {
                    for q in 0..=p + 1 {
                        let a = kernel_block_m0(&f, p, q)?.0;
                        let b = kw_block_nullity_m0(&f, p, q)?;
                        if a != b {
                            failures.push(format!("H^{q}⊗S^{p}: reduction {a}, K_w {b}"));
                        }
                    }
                }
                out.push(CheckResult::new(Suite::ClosedForm, "reduction vs K_w nullity", n).m(0).fail_if(failures));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    if cfg.n.is_empty() || cfg.p.is_empty() || cfg.m.as_ref().is_some_and(|m| m.is_empty()) {
        return Err(Error::InvalidParameters("empty range".into()));
    }
    if *cfg.n.start() == 0 {
        return Err(Error::InvalidParameters("dimension must be positive".into()));
    }
    match suite {
        Suite::Ccr => Ok(ccr(cfg)),
        Suite::HermiteCcr => Ok(hermite_ccr(cfg)),
        Suite::Adjoints => adjoints(cfg),
        Suite::Factorization => {
            per_cell(cfg, |f, s| Ok(vec![from_identity(Suite::Factorization, &verify_factorization(f, s)?)]))
        }
        Suite::Commutators => {
            per_cell(cfg, |f, s| Ok(vec![from_identity(Suite::Commutators, &verify_commutator_qq(f, s)?)]))
        }
        Suite::EigenIdentity => eigen_identity(cfg),
        Suite::Injectivity => Ok(injectivity(cfg)),
        Suite::Psd => per_cell(cfg, psd_checks),
        Suite::ClosedForm => closed_form(cfg),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::CONCRETE {
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: RangeInclusive<usize>, p: RangeInclusive<usize>, q_max: usize) -> VerifyConfig {
        VerifyConfig { n, p, m: None, q_max }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::CONCRETE.iter().chain([Suite::All].iter()) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn all_suites_pass_on_small_grid() {
        let results = run_suite(Suite::All, &cfg(1..=2, 0..=2, 3)).unwrap();
        let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        for s in Suite::CONCRETE {
            assert!(results.iter().any(|r| r.suite == s), "{s} produced no checks");
        }
    }

    #[test]
    fn results_are_deterministic() {
        let c = cfg(1..=3, 1..=2, 2);
        assert_eq!(run_suite(Suite::Factorization, &c).unwrap(), run_suite(Suite::Factorization, &c).unwrap());
    }

    #[test]
    fn empty_ranges_are_rejected() {
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert!(run_suite(Suite::Ccr, &cfg(empty, 0..=1, 2)).is_err());
        assert!(run_suite(Suite::Ccr, &cfg(0..=2, 0..=1, 2)).is_err());
    }

    #[test]
    fn a_broken_identity_is_reported() {
        let spec = ModelSpec::new(2, 1, 1, 2).unwrap();
        let f = LadderFactory::<Rational>::new(2);
        let mut rep = verify_factorization(&f, &spec).unwrap();
        assert!(rep.passed());
        rep.discrepancies.push(crate::ladder::BlockDiscrepancy {
            source: Block::new(0, 1),
            target: Block::new(0, 1),
            max_abs: Rational::from_int(3),
        });
        let r = from_identity(Suite::Factorization, &rep);
        assert!(!r.passed);
        assert!(r.detail.contains("3/1"));
    }
}
