//! Principal kernels of the semifield of fractions.
//!
//! `x ∈ ⟨a⟩` iff `|x| <= |a|^N` for some `N`, which in log scale is the
//! domination `|x| <= N·|a|` between nonnegative PL functions.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pl::{dominates, zero_set, CellComplex, Domination, Halfspace, PlFunction, Polyhedron};
use crate::lp::LpOutcome;
use crate::poly::LMonomial;
use crate::rat::{echelon, fmt_rat, frac, primitive, rank, Rat};
use crate::rational::RationalFunction;

/// `⟨gen⟩` with a generator that is `>= 0` everywhere (log scale).
///
/// Kernels built by lattice operations carry their PL function and build the
/// generator only on request: generators of iterated products grow fast.
#[derive(Debug, Clone)]
pub struct PrincipalKernel {
    generator: OnceLock<RationalFunction>,
    recipe: Option<Arc<Recipe>>,
    n: usize,
    pl: OnceLock<PlFunction>,
}

/// How to build a generator that was not computed up front.
#[derive(Debug)]
#[allow(clippy::large_enum_variant)] // always behind an Arc
enum Recipe {
    Abs(RationalFunction),
    Lattice(LatticeOp, PrincipalKernel, PrincipalKernel),
}

impl PrincipalKernel {
    /// `⟨f⟩`, stored through `|f|` unless `f` is already nonnegative.
    pub fn new(f: &RationalFunction) -> Self {
        let pl = PlFunction::from_rational(f);
        if pl.is_nonneg() {
            return Self::from_positive(f.clone(), Some(pl));
        }
        PrincipalKernel {
            n: f.n,
            generator: OnceLock::new(),
            recipe: Some(Arc::new(Recipe::Abs(f.clone()))),
            pl: OnceLock::from(pl.abs()),
        }
    }

    fn from_positive(generator: RationalFunction, pl: Option<PlFunction>) -> Self {
        let cell = OnceLock::new();
        if let Some(p) = pl {
            let _ = cell.set(p);
        }
        PrincipalKernel {
            n: generator.n,
            generator: OnceLock::from(generator),
            recipe: None,
            pl: cell,
        }
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_positive(RationalFunction::one(n), None)
    }

    /// `⟨F⟩`, generated by the constant `3/2`.
    pub fn bounded(n: usize) -> Self {
        Self::from_positive(RationalFunction::constant(n, frac(3, 2)), None)
    }

    pub fn hp(l: &LMonomial) -> Self {
        Self::new(&RationalFunction::from_lmonomial(l))
    }

    /// The order kernel `⟨1 + h⟩`.
    pub fn order(h: &LMonomial) -> Self {
        Self::from_positive(RationalFunction::binomial(h), None)
    }

    pub fn generator(&self) -> &RationalFunction {
        self.generator.get_or_init(|| {
            let g = match &**self.recipe.as_ref().expect("kernel without generator or recipe") {
                Recipe::Abs(f) => return f.abs().simplified(),
                Recipe::Lattice(LatticeOp::Product, k1, k2) => k1.generator().add(k2.generator()),
                Recipe::Lattice(LatticeOp::Intersect, k1, k2) => k1.generator().meet(k2.generator()),
            };
            g.expect("operands share n").simplified()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pl(&self) -> &PlFunction {
        self.pl.get_or_init(|| PlFunction::from_rational(self.generator()))
    }

    pub fn skeleton(&self) -> CellComplex {
        zero_set(self.pl())
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch { expected: self.n, found: n });
        }
        Ok(())
    }
}

impl fmt::Display for PrincipalKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", crate::expr::to_expr(self.generator()))
    }
}

impl Serialize for PrincipalKernel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PrincipalKernel", 3)?;
        st.serialize_field("generator", &crate::expr::to_expr(self.generator()).to_string())?;
        st.serialize_field("function", self.generator())?;
        st.serialize_field("n", &self.n)?;
        st.end()
    }
}

/// Membership with its certificate.
pub fn member_certificate(x: &RationalFunction, k: &PrincipalKernel) -> Result<Domination> {
    k.check(x.n)?;
    dominates(&PlFunction::from_rational(x).abs(), k.pl())
}

pub fn member(x: &RationalFunction, k: &PrincipalKernel) -> Result<bool> {
    Ok(member_certificate(x, k)?.holds())
}

/// `K1 ⊆ K2`.
pub fn contained(k1: &PrincipalKernel, k2: &PrincipalKernel) -> Result<Domination> {
    k2.check(k1.n)?;
    dominates(k1.pl(), k2.pl())
}

pub fn kernel_equal(k1: &PrincipalKernel, k2: &PrincipalKernel) -> Result<bool> {
    Ok(contained(k1, k2)?.holds() && contained(k2, k1)?.holds())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeOp {
    Product,
    Intersect,
}

/// `K1·K2 = ⟨|f| + |g|⟩`, `K1 ∩ K2 = ⟨|f| ∧ |g|⟩`.
pub fn lattice_op(op: LatticeOp, k1: &PrincipalKernel, k2: &PrincipalKernel) -> Result<PrincipalKernel> {
    k1.check(k2.n)?;
    let pl = match op {
        LatticeOp::Product => k1.pl().max(k2.pl())?,
        LatticeOp::Intersect => k1.pl().min(k2.pl())?,
    };
    Ok(PrincipalKernel {
        generator: OnceLock::new(),
        recipe: Some(Arc::new(Recipe::Lattice(op, k1.clone(), k2.clone()))),
        n: k1.n,
        pl: OnceLock::from(pl),
    })
}

pub fn product(k1: &PrincipalKernel, k2: &PrincipalKernel) -> Result<PrincipalKernel> {
    lattice_op(LatticeOp::Product, k1, k2)
}

pub fn intersect(k1: &PrincipalKernel, k2: &PrincipalKernel) -> Result<PrincipalKernel> {
    lattice_op(LatticeOp::Intersect, k1, k2)
}

/// Product of a nonempty list.
pub fn product_all(ks: &[PrincipalKernel]) -> Result<PrincipalKernel> {
    let (first, rest) = ks.split_first().ok_or(Error::EmptySet)?;
    rest.iter().try_fold(first.clone(), |acc, k| product(&acc, k))
}

/// Intersection of a nonempty list.
pub fn intersect_all(ks: &[PrincipalKernel]) -> Result<PrincipalKernel> {
    let (first, rest) = ks.split_first().ok_or(Error::EmptySet)?;
    rest.iter().try_fold(first.clone(), |acc, k| intersect(&acc, k))
}

/// `⟨S⟩ = ⟨Σ |s_i|⟩`.
pub fn generator_of_set(s: &[RationalFunction]) -> Result<PrincipalKernel> {
    let first = s.first().ok_or(Error::EmptySet)?;
    for f in s {
        if f.n != first.n {
            return Err(Error::DimensionMismatch { expected: first.n, found: f.n });
        }
    }
    let ks: Vec<PrincipalKernel> = s.iter().map(PrincipalKernel::new).collect();
    product_all(&ks)
}

/// `L_a = ⟨Σ |λ_i / a_i|⟩`.
pub fn maximal_kernel_at(a: &[Rat]) -> Result<PrincipalKernel> {
    let n = a.len();
    let s: Vec<RationalFunction> = (0..n)
        .map(|i| RationalFunction::from_lmonomial(&LMonomial::shifted_var(n, i, &a[i])))
        .collect();
    generator_of_set(&s)
}

/// `⟨f⟩ = ⟨g⟩` for L-monomials: `(e_f, c_f)` and `(e_g, c_g)` are proportional.
pub fn hp_equal(f: &LMonomial, g: &LMonomial) -> bool {
    if f.n() != g.n() {
        return false;
    }
    let row = |l: &LMonomial| {
        let mut v = l.exps_rat();
        v.push(l.coeff().clone());
        v
    };
    rank(&[row(f), row(g)]) == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelTag {
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "HS")]
    Hs,
    #[serde(rename = "order")]
    Order,
    #[serde(rename = "region")]
    Region,
    #[serde(rename = "HO")]
    Ho,
    #[serde(rename = "bounded_below")]
    BoundedBelow,
    #[serde(rename = "F_kernel")]
    FKernel,
    #[serde(rename = "trivial")]
    Trivial,
    #[serde(rename = "other")]
    Other,
}

impl fmt::Display for KernelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelTag::Hp => "HP",
            KernelTag::Hs => "HS",
            KernelTag::Order => "order",
            KernelTag::Region => "region",
            KernelTag::Ho => "HO",
            KernelTag::BoundedBelow => "bounded_below",
            KernelTag::FKernel => "F_kernel",
            KernelTag::Trivial => "trivial",
            KernelTag::Other => "other",
        };
        f.write_str(s)
    }
}

/// Factorisation data behind a classification.
///
/// `hp` lists L-monomials `f_i` and `order` lists `h_j`, so that the kernel
/// equals `⟨Σ|f_i| + Σ|1 + h_j|⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub hp: Vec<LMonomial>,
    pub order: Vec<LMonomial>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub lower_bound: Option<Rat>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub upper_bound: Option<Rat>,
}

fn ser_opt_rat<S: Serializer>(v: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&fmt_rat(r)),
        None => s.serialize_none(),
    }
}

impl Evidence {
    fn empty() -> Self {
        Evidence {
            hp: Vec::new(),
            order: Vec::new(),
            lower_bound: None,
            upper_bound: None,
        }
    }

    /// `Σ|f_i| + Σ|1 + h_j|`, or `None` when both lists are empty.
    pub fn generator(&self, n: usize) -> Result<Option<RationalFunction>> {
        let mut parts: Vec<RationalFunction> = self.hp.iter().map(RationalFunction::from_lmonomial).collect();
        parts.extend(self.order.iter().map(RationalFunction::binomial));
        if parts.is_empty() {
            return Ok(None);
        }
        Ok(Some(RationalFunction::sum_abs(n, &parts)?))
    }

    pub fn hs_part(&self, n: usize) -> Result<PrincipalKernel> {
        if self.hp.is_empty() {
            return Ok(PrincipalKernel::trivial(n));
        }
        let s: Vec<RationalFunction> = self.hp.iter().map(RationalFunction::from_lmonomial).collect();
        generator_of_set(&s)
    }

    pub fn region_part(&self, n: usize) -> Result<PrincipalKernel> {
        if self.order.is_empty() {
            return Ok(PrincipalKernel::trivial(n));
        }
        let s: Vec<RationalFunction> = self.order.iter().map(RationalFunction::binomial).collect();
        generator_of_set(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelClass {
    pub tag: KernelTag,
    pub evidence: Evidence,
}

fn to_lmonomial(h: &Halfspace) -> Option<LMonomial> {
    // a·p - b, as a monomial with exponents a and coefficient -b
    let exps: Option<Vec<i64>> = h.a.iter().map(|x| x.to_integer().to_i64()).collect();
    LMonomial::new(-&h.b, exps?).ok()
}

fn by_exponents(v: &mut [LMonomial]) {
    v.sort_by(|a, b| b.exps().cmp(a.exps()).then_with(|| a.coeff().cmp(b.coeff())));
}

/// Rows valid on every piece of a skeleton; their intersection is the
/// convex hull's polyhedral outer description when the skeleton is convex.
fn common_rows(skel: &CellComplex) -> Polyhedron {
    let mut cand: Vec<Halfspace> = Vec::new();
    for p in &skel.pieces {
        for r in p.inequality_rows() {
            if !cand.contains(&r) {
                cand.push(r);
            }
        }
    }
    let valid = |h: &Halfspace| {
        skel.pieces.iter().all(|p| match p.maximize(&crate::pl::Affine {
            grad: h.a.clone(),
            offset: Rat::zero(),
        }) {
            LpOutcome::Optimal { value, .. } => value <= h.b,
            LpOutcome::Infeasible => true,
            LpOutcome::Unbounded { .. } => false,
        })
    };
    Polyhedron::from_rows(skel.n, cand.into_iter().filter(valid).collect())
}

/// Splits a convex polyhedron into equality L-monomials and order binomial
/// exponents `h` (with `h <= 0` on the set).
pub fn polyhedron_relations(q: &Polyhedron) -> Option<(Vec<LMonomial>, Vec<LMonomial>)> {
    let n = q.n;
    let implicit = q.implicit_equalities();
    let aug: Vec<Vec<Rat>> = implicit
        .iter()
        .map(|h| {
            let mut v = h.a.clone();
            v.push(h.b.clone());
            v
        })
        .collect();
    let ech = echelon(&aug);
    let mut eqs = Vec::new();
    for row in &ech {
        let (prim, factor) = primitive(&row[..n]);
        let a: Vec<Rat> = prim.into_iter().map(Rat::from_integer).collect();
        let b = &row[n] * factor;
        eqs.push(Halfspace { a, b });
    }
    // order rows are reduced modulo the equalities so they read in the free coordinates
    let mut reduced = Polyhedron { n, rows: Vec::new(), eqs: eqs.clone() };
    for r in q.rows.iter().filter(|r| !implicit.contains(r)) {
        let mut a = r.a.clone();
        let mut b = r.b.clone();
        for e in &ech {
            let Some(c) = e[..n].iter().position(|x| !x.is_zero()) else { continue };
            let m = a[c].clone();
            if !m.is_zero() {
                for (ai, ei) in a.iter_mut().zip(&e[..n]) {
                    *ai -= &m * ei;
                }
                b -= &m * &e[n];
            }
        }
        reduced.push(Halfspace::new(a, b));
    }
    reduced = reduced.without_redundant_rows();
    let mut hp: Vec<LMonomial> = eqs.iter().map(|h| to_lmonomial(h).map(|l| l.normalized())).collect::<Option<_>>()?;
    let mut order: Vec<LMonomial> = reduced.rows.iter().map(to_lmonomial).collect::<Option<_>>()?;
    by_exponents(&mut hp);
    by_exponents(&mut order);
    Some((hp, order))
}

/// Classifies a principal kernel; every reported factorisation is re-verified.
pub fn classify(k: &PrincipalKernel) -> Result<KernelClass> {
    let n = k.n;
    let (lo, hi) = k.pl().range();
    let mut ev = Evidence::empty();
    ev.lower_bound = lo.clone().filter(|v| v.is_positive());
    ev.upper_bound = hi.clone();
    if hi.as_ref().is_some_and(Zero::is_zero) {
        return Ok(KernelClass { tag: KernelTag::Trivial, evidence: ev });
    }
    if lo.as_ref().is_some_and(|v| v.is_positive()) {
        let tag = if hi.is_some() { KernelTag::FKernel } else { KernelTag::BoundedBelow };
        return Ok(KernelClass { tag, evidence: ev });
    }
    let skel = k.skeleton();
    let other = |ev: Evidence| Ok(KernelClass { tag: KernelTag::Other, evidence: ev });
    if skel.is_empty() {
        // inf |f| = 0 without being attained
        return other(ev);
    }
    let q = common_rows(&skel);
    let Some((hp, order)) = polyhedron_relations(&q) else {
        return other(ev);
    };
    ev.hp = hp;
    ev.order = order;
    let Some(g) = ev.generator(n)? else {
        return other(ev);
    };
    if !kernel_equal(&PrincipalKernel::from_positive(g, None), k)? {
        ev.hp.clear();
        ev.order.clear();
        return other(ev);
    }
    let tag = match (ev.hp.len(), ev.order.len()) {
        (1, 0) => KernelTag::Hp,
        (_, 0) => KernelTag::Hs,
        (0, 1) => KernelTag::Order,
        (0, _) if region_condition(&ev.order) && skel.has_full_dimensional_piece() => KernelTag::Region,
        (0, _) => KernelTag::Other,
        _ => KernelTag::Ho,
    };
    Ok(KernelClass { tag, evidence: ev })
}

/// Pairwise `h_i ≇ h_j^{±1}` over the summands of a region fraction.
pub fn region_condition(h: &[LMonomial]) -> bool {
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            if h[i] == h[j] || h[i] == h[j].inv() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;
    use crate::rat::int;

    fn k(s: &str, n: usize) -> PrincipalKernel {
        PrincipalKernel::new(&parse_function(s, Some(n)).unwrap())
    }

    fn f(s: &str, n: usize) -> RationalFunction {
        parse_function(s, Some(n)).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(member(&f("x", 2), &k("x", 2)).unwrap());
        assert!(!member(&f("y", 2), &k("x", 2)).unwrap());
        let m = k("meet(abs(x) + abs(y + 0), abs(x) + abs(y^-1 + 0))", 2);
        assert!(member(&f("x", 2), &m).unwrap());
        assert!(member(m.generator(), &k("x", 2)).unwrap());
        assert!(matches!(member(&f("x", 1), &k("x", 2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn equality_examples() {
        assert!(kernel_equal(&k("x", 1), &k("abs(x)", 1)).unwrap());
        assert!(kernel_equal(&k("x", 1), &k("x^2", 1)).unwrap());
        assert!(!kernel_equal(&k("x", 2), &k("y", 2)).unwrap());
    }

    #[test]
    fn lattice_examples() {
        let a = k("abs(x) + abs(y + 0)", 2);
        let b = k("abs(x) + abs(y^-1 + 0)", 2);
        let c = intersect(&a, &b).unwrap();
        assert!(kernel_equal(&c, &k("x", 2)).unwrap());
        assert!(kernel_equal(&product(&a, &a).unwrap(), &a).unwrap());
        let l = k("y", 2);
        let absorbed = intersect(&a, &product(&a, &l).unwrap()).unwrap();
        assert!(kernel_equal(&absorbed, &a).unwrap());
    }

    #[test]
    fn generated_kernels() {
        let s = generator_of_set(&[f("x", 2), f("y", 2)]).unwrap();
        assert!(member(&f("x", 2), &s).unwrap());
        assert!(member(&f("y", 2), &s).unwrap());
        assert!(kernel_equal(&s, &k("abs(x) + abs(y)", 2)).unwrap());
        assert!(matches!(generator_of_set(&[]), Err(Error::EmptySet)));
        let la = maximal_kernel_at(&[int(2), int(-1)]).unwrap();
        let skel = la.skeleton();
        assert!(skel.contains(&[int(2), int(-1)]));
        assert_eq!(skel.dimension(), Some(0));
        let l1 = maximal_kernel_at(&[int(2)]).unwrap();
        assert!(member(&f("x/2", 1), &l1).unwrap());
    }

    #[test]
    fn hp_equality() {
        let l = |c: i64, e: &[i64]| LMonomial::new(int(c), e.to_vec()).unwrap();
        assert!(hp_equal(&l(0, &[2, 1]), &l(0, &[4, 2])));
        assert!(!hp_equal(&l(0, &[1]), &l(1, &[1])));
        assert!(hp_equal(&l(3, &[1, -1]), &l(3, &[1, -1])));
        for (a, b) in [(l(0, &[2, 1]), l(0, &[4, 2])), (l(0, &[1, 0]), l(1, &[1, 0]))] {
            assert_eq!(hp_equal(&a, &b), kernel_equal(&PrincipalKernel::hp(&a), &PrincipalKernel::hp(&b)).unwrap());
        }
    }

    #[test]
    fn classification_examples() {
        let c = classify(&k("x/y", 2)).unwrap();
        assert_eq!(c.tag, KernelTag::Hp);
        let c = classify(&k("abs(x) + abs(y)", 2)).unwrap();
        assert_eq!(c.tag, KernelTag::Hs);
        let vars: Vec<Vec<i64>> = c.evidence.hp.iter().map(|l| l.exps().to_vec()).collect();
        assert_eq!(vars, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(classify(&k("3", 2)).unwrap().tag, KernelTag::FKernel);
        assert_eq!(classify(&k("0", 2)).unwrap().tag, KernelTag::Trivial);
        assert_eq!(classify(&k("y + 0", 2)).unwrap().tag, KernelTag::Order);
        assert_eq!(classify(&k("abs(x) + abs(y + 0)", 2)).unwrap().tag, KernelTag::Ho);
        assert_eq!(classify(&k("(x + 0) + (y + 0)", 2)).unwrap().tag, KernelTag::Region);
        let bb = classify(&k("abs(x) + 2", 1)).unwrap();
        assert_eq!(bb.tag, KernelTag::BoundedBelow);
        assert_eq!(bb.evidence.lower_bound, Some(int(2)));
    }
}
