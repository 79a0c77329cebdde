//! Convex dependence of L-monomials, convexity degree and HS-kernel chains.
//!
//! Dependence is decided by ℚ-rank of exponent vectors; the kernel
//! membership oracle is run alongside and any disagreement is an error.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    classify, generator_of_set, kernel_equal, member, member_certificate, product, KernelTag, PrincipalKernel,
};
use crate::pl::{Domination, Witness};
use crate::poly::LMonomial;
use crate::rat::{frac, rank, Rat};
use crate::rational::RationalFunction;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpSet {
    pub n: usize,
    pub elems: Vec<LMonomial>,
}

impl HpSet {
    pub fn new(n: usize, elems: Vec<LMonomial>) -> Result<Self> {
        if let Some(e) = elems.iter().find(|e| e.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: e.n() });
        }
        Ok(HpSet { n, elems })
    }

    pub fn variables(n: usize) -> Self {
        HpSet {
            n,
            elems: (0..n).map(|i| LMonomial::var(n, i)).collect(),
        }
    }

    pub fn matrix(&self) -> Vec<Vec<Rat>> {
        self.elems.iter().map(LMonomial::exps_rat).collect()
    }

    pub fn with(&self, f: &LMonomial) -> HpSet {
        let mut elems = self.elems.clone();
        elems.push(f.clone());
        HpSet { n: self.n, elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

/// Rank decision: `f`'s exponent vector lies in the span of `A`'s.
pub fn dependent_by_rank(f: &LMonomial, a: &HpSet) -> bool {
    let m = a.matrix();
    rank(&a.with(f).matrix()) == rank(&m)
}

/// `⟨A ∪ {3/2}⟩`, i.e. `⟨A⟩·⟨F⟩`.
pub fn span_with_bounded(a: &HpSet) -> Result<PrincipalKernel> {
    let mut s: Vec<RationalFunction> = a.elems.iter().map(RationalFunction::from_lmonomial).collect();
    s.push(RationalFunction::constant(a.n, frac(3, 2)));
    generator_of_set(&s)
}

/// Oracle decision: `f ∈ ⟨A⟩·⟨F⟩·R`.
pub fn dependent_by_oracle(f: &LMonomial, a: &HpSet, r: Option<&PrincipalKernel>) -> Result<bool> {
    let mut k = span_with_bounded(a)?;
    if let Some(r) = r {
        k = product(&k, r)?;
    }
    member(&RationalFunction::from_lmonomial(f), &k)
}

/// Both decisions; they must agree.
pub fn convexly_dependent(f: &LMonomial, a: &HpSet, r: Option<&PrincipalKernel>) -> Result<bool> {
    if f.n() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: f.n() });
    }
    let by_rank = dependent_by_rank(f, a);
    let by_oracle = dependent_by_oracle(f, a, r)?;
    if by_rank != by_oracle {
        let elems: Vec<String> = a.elems.iter().map(ToString::to_string).collect();
        let region = r.map_or_else(|| "none".to_string(), ToString::to_string);
        return Err(Error::Disagreement(format!(
            "f = {f}, A = {{{}}}, R = {region}: rank says {by_rank}, membership says {by_oracle}",
            elems.join(", ")
        )));
    }
    Ok(by_rank)
}

/// Greedy basis in input order.
pub fn basis_of(v: &HpSet) -> HpSet {
    let mut b = HpSet { n: v.n, elems: Vec::new() };
    for e in &v.elems {
        if !dependent_by_rank(e, &b) {
            b.elems.push(e.clone());
        }
    }
    b
}

/// [`basis_of`] plus an oracle check that every dropped element is spanned.
pub fn basis_of_verified(v: &HpSet) -> Result<HpSet> {
    let b = basis_of(v);
    for e in &v.elems {
        if !b.elems.contains(e) && !dependent_by_oracle(e, &b, None)? {
            return Err(Error::Disagreement(format!("{e} dropped from basis but not spanned")));
        }
    }
    Ok(b)
}

pub fn condeg(v: &HpSet) -> usize {
    rank(&v.matrix())
}

/// `true` unless the exchange implication fails on this instance.
pub fn steinitz_verify(s: &HpSet, f: &LMonomial, b: &LMonomial) -> bool {
    if dependent_by_rank(f, &s.with(b)) && !dependent_by_rank(f, s) {
        return dependent_by_rank(b, &s.with(f));
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainStep {
    pub factor: LMonomial,
    /// Why `factor` is not in the next kernel down (times `⟨F⟩`).
    pub strictness: Witness,
}

/// `L = K_u ⊋ K_{u-1} ⊋ ... ⊋ K_0 = ⟨1⟩` with `K_j = ∏_{i<=j} ⟨h_i⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct Chain {
    pub kernels: Vec<PrincipalKernel>,
    pub steps: Vec<ChainStep>,
    pub length: usize,
}

impl Chain {
    pub fn factors(&self) -> Vec<LMonomial> {
        self.steps.iter().map(|s| s.factor.clone()).collect()
    }
}

/// HS evidence of `l`, or an error when `l` is not HS/HP.
pub fn hs_evidence(l: &PrincipalKernel) -> Result<HpSet> {
    let c = classify(l)?;
    match c.tag {
        KernelTag::Hp | KernelTag::Hs => HpSet::new(l.n(), c.evidence.hp),
        KernelTag::Trivial => Ok(HpSet { n: l.n(), elems: Vec::new() }),
        t => Err(Error::NotHs(format!("{l} is classified {t}"))),
    }
}

/// Builds the chain from an explicit independent generating list.
pub fn chain_from_basis(l: &PrincipalKernel, basis: &HpSet) -> Result<Chain> {
    let n = l.n();
    if condeg(basis) != basis.len() {
        return Err(Error::Invalid("chain generators are not independent".into()));
    }
    let mut prefix: Vec<PrincipalKernel> = vec![PrincipalKernel::trivial(n)];
    let mut steps = Vec::new();
    for (j, h) in basis.elems.iter().enumerate() {
        let below = HpSet { n, elems: basis.elems[..j].to_vec() };
        let cert = member_certificate(&RationalFunction::from_lmonomial(h), &span_with_bounded(&below)?)?;
        let Domination::Fails { witness } = cert else {
            return Err(Error::Certification(format!("step {} of the chain is not strict", j + 1)));
        };
        let next = if j == 0 {
            PrincipalKernel::hp(h)
        } else {
            product(&prefix[j], &PrincipalKernel::hp(h))?
        };
        prefix.push(next);
        steps.push(ChainStep { factor: h.clone(), strictness: witness });
    }
    let top = prefix.last().expect("nonempty");
    if !kernel_equal(top, l)? {
        return Err(Error::Certification(format!("chain top {top} differs from {l}")));
    }
    prefix.reverse();
    steps.reverse();
    Ok(Chain {
        length: steps.len(),
        kernels: prefix,
        steps,
    })
}

pub fn build_chain(l: &PrincipalKernel) -> Result<Chain> {
    if l.skeleton().is_empty() {
        return Err(Error::EmptySkeleton(l.to_string()));
    }
    let ev = hs_evidence(l)?;
    chain_from_basis(l, &basis_of(&ev))
}

/// A chain through a random basis made of integer combinations of the evidence.
pub fn random_chain<R: Rng>(l: &PrincipalKernel, rng: &mut R) -> Result<Chain> {
    if l.skeleton().is_empty() {
        return Err(Error::EmptySkeleton(l.to_string()));
    }
    let ev = hs_evidence(l)?;
    let target = condeg(&ev);
    let mut basis = HpSet { n: l.n(), elems: Vec::new() };
    let mut attempts = 0;
    while basis.len() < target {
        attempts += 1;
        let mut m: Option<crate::poly::Monomial> = None;
        for e in &ev.elems {
            let k = if attempts > 50 { rng.gen_range(0..=1) } else { rng.gen_range(-2..=2) };
            let p = e.monomial().pow(k);
            m = Some(match m {
                None => p,
                Some(acc) => acc.mul(&p),
            });
        }
        let Some(m) = m else { break };
        let Ok(h) = LMonomial::new(m.coeff, m.exps) else { continue };
        if !dependent_by_rank(&h, &basis) {
            basis.elems.push(h);
        }
    }
    chain_from_basis(l, &basis)
}

/// `hgt(L) = condeg(L)`, cross-checked against the length of a built chain.
pub fn height(l: &PrincipalKernel) -> Result<usize> {
    let ev = hs_evidence(l)?;
    let h = condeg(&ev);
    let chain = build_chain(l)?;
    if chain.length != h {
        return Err(Error::Disagreement(format!("condeg {h} but chain length {}", chain.length)));
    }
    Ok(h)
}

#[derive(Debug, Clone, Serialize)]
pub struct Catenary {
    /// `n - condeg(L)`.
    pub value: usize,
    /// Variables added greedily to a basis of `L`, independent modulo `R`.
    pub extension: Vec<LMonomial>,
    pub agrees: bool,
}

/// `n - condeg(L)`, with the extension count modulo `R` computed by membership.
pub fn catenary_dim(l: &PrincipalKernel, r: &PrincipalKernel) -> Result<Catenary> {
    let n = l.n();
    let lr = product(l, r)?;
    if lr.skeleton().is_empty() {
        return Err(Error::EmptySkeleton(format!("L·R for L = {l}, R = {r}")));
    }
    let ev = hs_evidence(l)?;
    let mut b = basis_of(&ev);
    let value = n - b.len();
    let mut extension = Vec::new();
    for v in HpSet::variables(n).elems {
        if !dependent_by_oracle(&v, &b, Some(r))? {
            b.elems.push(v.clone());
            extension.push(v);
        }
    }
    let agrees = extension.len() == value;
    Ok(Catenary { value, extension, agrees })
}

/// `Hdim = n`, witnessed by a chain below the maximal kernel at the origin.
pub fn hdim(n: usize) -> Result<(usize, Chain)> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let l = crate::kernel::maximal_kernel_at(&vec![Rat::from_integer(0.into()); n])?;
    let chain = build_chain(&l)?;
    let d = condeg(&HpSet::variables(n));
    if chain.length != d {
        return Err(Error::Disagreement(format!("condeg {d} but chain length {}", chain.length)));
    }
    Ok((d, chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;
    use crate::rat::int;
    use rand::SeedableRng;

    fn l(c: i64, e: &[i64]) -> LMonomial {
        LMonomial::new(int(c), e.to_vec()).unwrap()
    }

    fn set(n: usize, v: &[LMonomial]) -> HpSet {
        HpSet::new(n, v.to_vec()).unwrap()
    }

    fn k(s: &str, n: usize) -> PrincipalKernel {
        PrincipalKernel::new(&parse_function(s, Some(n)).unwrap())
    }

    #[test]
    fn dependence_examples() {
        let xy = l(0, &[1, 1]);
        assert!(convexly_dependent(&xy, &set(2, &[l(0, &[1, 0]), l(0, &[0, 1])]), None).unwrap());
        assert!(convexly_dependent(&l(3, &[1]), &set(1, &[l(0, &[1])]), None).unwrap());
        assert!(!convexly_dependent(&l(0, &[1, 0]), &set(2, &[l(0, &[0, 1])]), None).unwrap());
    }

    #[test]
    fn dependence_modulo_order_kernel() {
        let r = PrincipalKernel::order(&l(0, &[0, 1]));
        let a = set(2, &[l(0, &[1, 0])]);
        assert!(!convexly_dependent(&l(0, &[0, 1]), &a, Some(&r)).unwrap());
        assert!(convexly_dependent(&l(2, &[1, 0]), &a, Some(&r)).unwrap());
    }

    #[test]
    fn bounded_region_breaks_the_rank_reduction() {
        // R = box -1 <= x, y <= 1: every monomial becomes bounded modulo R
        let r = k("0 + {-1}*x + {-1}*x^-1 + {-1}*y + {-1}*y^-1", 2);
        let a = set(2, &[l(0, &[1, 0])]);
        assert!(matches!(
            convexly_dependent(&l(0, &[0, 1]), &a, Some(&r)),
            Err(Error::Disagreement(_))
        ));
    }

    #[test]
    fn bases_and_condeg() {
        let v = set(2, &[l(0, &[1, 0]), l(0, &[0, 1]), l(0, &[1, 1])]);
        assert_eq!(basis_of_verified(&v).unwrap().len(), 2);
        let vars = set(3, &[l(1, &[1, 0, 0]), l(-2, &[0, 1, 0]), l(5, &[0, 0, 1])]);
        assert_eq!(basis_of(&vars), vars);
        assert!(basis_of(&set(2, &[])).is_empty());
        assert_eq!(condeg(&HpSet::variables(3)), 3);
        assert_eq!(condeg(&set(1, &[l(0, &[1]), l(0, &[2])])), 1);
        assert_eq!(condeg(&set(1, &[])), 0);
    }

    #[test]
    fn steinitz_examples() {
        let s = set(2, &[l(0, &[1, 0])]);
        assert!(steinitz_verify(&s, &l(0, &[1, 1]), &l(0, &[0, 1])));
        assert!(steinitz_verify(&s, &l(4, &[2, 0]), &l(0, &[0, 1])));
    }

    #[test]
    fn chains_and_heights() {
        let c = build_chain(&k("abs(x) + abs(y)", 2)).unwrap();
        assert_eq!(c.length, 2);
        assert_eq!(c.kernels.len(), 3);
        assert!(kernel_equal(&c.kernels[1], &k("x", 2)).unwrap());
        assert_eq!(c.factors(), vec![l(0, &[0, 1]), l(0, &[1, 0])]);
        assert_eq!(height(&k("abs(x) + abs(y)", 2)).unwrap(), 2);
        assert_eq!(build_chain(&k("x", 2)).unwrap().length, 1);
        assert_eq!(build_chain(&k("abs(x) + abs(x^2)", 1)).unwrap().length, 1);
        assert!(matches!(build_chain(&k("y + 0", 2)), Err(Error::NotHs(_))));
        let la = crate::kernel::maximal_kernel_at(&[int(1), int(0), int(-2)]).unwrap();
        assert_eq!(height(&la).unwrap(), 3);
    }

    #[test]
    fn random_chains_have_equal_length() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let l = k("abs(x*y) + abs(x/y) + abs(x^2)", 2);
        for _ in 0..3 {
            assert_eq!(random_chain(&l, &mut rng).unwrap().length, 2);
        }
    }

    #[test]
    fn catenary_examples() {
        let c = catenary_dim(&k("x", 2), &k("y + 0", 2)).unwrap();
        assert_eq!(c.value, 1);
        assert!(c.agrees);
        let full = k("abs(x) + abs(y) + abs(z)", 3);
        let c = catenary_dim(&full, &PrincipalKernel::trivial(3)).unwrap();
        assert_eq!((c.value, c.agrees), (0, true));
        let c = catenary_dim(&k("x", 2), &PrincipalKernel::trivial(2)).unwrap();
        assert_eq!((c.value, c.agrees), (1, true));
    }

    #[test]
    fn hyperdimension() {
        for n in 1..=3 {
            let (d, chain) = hdim(n).unwrap();
            assert_eq!(d, n);
            assert_eq!(chain.length, n);
        }
    }
}
