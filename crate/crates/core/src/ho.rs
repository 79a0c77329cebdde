//! Decomposition of a principal kernel into HS × region kernels and
//! bounded-below parts, indexed by dominant-monomial patterns, and
//! reducibility of kernels built from HP-kernels.

use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    classify, contained, intersect, intersect_all, kernel_equal, product, product_all, Evidence, KernelTag,
    PrincipalKernel,
};
use crate::pl::{Halfspace, PlFunction, Polyhedron};
use crate::poly::{LMonomial, Monomial, Polynomial};
use crate::rat::{frac, int, Rat};
use crate::rational::RationalFunction;

pub const DEFAULT_MAX_MONOMIALS: usize = 12;

/// Exact argmax sets `(H, G)` of numerator and denominator on a relatively open cell.
#[derive(Debug, Clone, Serialize)]
pub struct DominancePattern {
    pub h: Vec<usize>,
    pub g: Vec<usize>,
    /// Closure of the cell.
    pub cell: Polyhedron,
    #[serde(with = "crate::rat::serde_rat_vec")]
    pub point: Vec<Rat>,
    pub on_skeleton: bool,
    /// `h'/g'` for `h' ∈ H`, `g' ∈ G`, non-constant ones only.
    pub relations_eq: Vec<LMonomial>,
    /// `u` with `1 + u` an order binomial: `h''/h'` and `g''/g'`.
    pub relations_ord: Vec<LMonomial>,
}

fn diff_row(a: &Monomial, b: &Monomial) -> Halfspace {
    // a - b <= 0
    Halfspace::new(
        a.exps.iter().zip(&b.exps).map(|(x, y)| int(x - y)).collect(),
        &b.coeff - &a.coeff,
    )
}

fn closed_cell(f: &RationalFunction, h: &[usize], g: &[usize]) -> Polyhedron {
    let mut p = Polyhedron::whole(f.n);
    for (poly, set) in [(&f.num, h), (&f.den, g)] {
        let t = poly.terms();
        let rep = &t[set[0]];
        for &i in &set[1..] {
            p.push_eq(diff_row(&t[i], rep));
        }
        for (i, ti) in t.iter().enumerate() {
            if !set.contains(&i) {
                p.push(diff_row(ti, rep));
            }
        }
    }
    p
}

fn ratio(a: &Monomial, b: &Monomial) -> Option<LMonomial> {
    let m = a.mul(&b.inv());
    LMonomial::new(m.coeff, m.exps).ok()
}

fn push_unique(v: &mut Vec<LMonomial>, l: LMonomial) {
    if !v.contains(&l) {
        v.push(l);
    }
}

fn dfs_num(f: &RationalFunction, h: &mut Vec<usize>, next: usize, out: &mut Vec<DominancePattern>) {
    for i in next..f.num.len() {
        h.push(i);
        if !closed_cell_num_only(f, h).is_empty() {
            dfs_den(f, h, &mut Vec::new(), 0, out);
            dfs_num(f, h, i + 1, out);
        }
        h.pop();
    }
}

fn dfs_den(f: &RationalFunction, h: &[usize], g: &mut Vec<usize>, next: usize, out: &mut Vec<DominancePattern>) {
    for j in next..f.den.len() {
        g.push(j);
        let cell = closed_cell(f, h, g);
        if !cell.is_empty() {
            if let Some(point) = cell.interior_point() {
                out.push(pattern(f, h.to_vec(), g.clone(), cell, point));
            }
            dfs_den(f, h, g, j + 1, out);
        }
        g.pop();
    }
}

fn closed_cell_num_only(f: &RationalFunction, h: &[usize]) -> Polyhedron {
    let mut p = Polyhedron::whole(f.n);
    let t = f.num.terms();
    let rep = &t[h[0]];
    for &i in &h[1..] {
        p.push_eq(diff_row(&t[i], rep));
    }
    for (i, ti) in t.iter().enumerate() {
        if !h.contains(&i) {
            p.push(diff_row(ti, rep));
        }
    }
    p
}

fn pattern(f: &RationalFunction, h: Vec<usize>, g: Vec<usize>, cell: Polyhedron, point: Vec<Rat>) -> DominancePattern {
    let (tn, td) = (f.num.terms(), f.den.terms());
    let on_skeleton = tn[h[0]].value_at(&point) == td[g[0]].value_at(&point);
    let mut relations_eq = Vec::new();
    for &i in &h {
        for &j in &g {
            if let Some(l) = ratio(&tn[i], &td[j]) {
                push_unique(&mut relations_eq, l.normalized());
            }
        }
    }
    let mut relations_ord = Vec::new();
    for (terms, set) in [(tn, &h), (td, &g)] {
        for (i, t) in terms.iter().enumerate() {
            if !set.contains(&i) {
                if let Some(l) = ratio(t, &terms[set[0]]) {
                    push_unique(&mut relations_ord, l);
                }
            }
        }
    }
    DominancePattern {
        h,
        g,
        cell,
        point,
        on_skeleton,
        relations_eq,
        relations_ord,
    }
}

/// All `(H, G)` realised as exact argmax sets, found by depth-first search
/// over subsets with closed-cell feasibility pruning.
pub fn dominance_patterns(f: &RationalFunction) -> Vec<DominancePattern> {
    let mut out = Vec::new();
    dfs_num(f, &mut Vec::new(), 0, &mut out);
    out
}

impl DominancePattern {
    /// `Σ|θ₁| + Σ|1 + θ₂|`; equals `f` at points with this pattern.
    pub fn generator(&self, n: usize) -> Result<Option<RationalFunction>> {
        Evidence {
            hp: self.relations_eq.clone(),
            order: self.relations_ord.clone(),
            lower_bound: None,
            upper_bound: None,
        }
        .generator(n)
    }

    fn evidence(&self) -> Evidence {
        Evidence {
            hp: self.relations_eq.clone(),
            order: self.relations_ord.clone(),
            lower_bound: None,
            upper_bound: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KPart {
    pub hs: PrincipalKernel,
    pub region: PrincipalKernel,
    pub hs_evidence: Vec<LMonomial>,
    pub region_evidence: Vec<LMonomial>,
    #[serde(skip)]
    pub kernel: PrincipalKernel,
}

#[derive(Debug, Clone, Serialize)]
pub struct NPart {
    pub kernel: PrincipalKernel,
    #[serde(with = "crate::rat::serde_rat")]
    pub lower_bound: Rat,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoDecomposition {
    pub k_parts: Vec<KPart>,
    pub n_parts: Vec<NPart>,
    /// `⟨f⟩ = ⋂K ∩ ⋂N` by mutual containment.
    pub certified: bool,
    /// `⟨f⟩ ∩ ⟨F⟩ = ⋂(K ∩ ⟨F⟩)`.
    pub certified_mod_bounded: bool,
}

impl HoDecomposition {
    pub fn parts(&self) -> Vec<PrincipalKernel> {
        self.k_parts
            .iter()
            .map(|k| k.kernel.clone())
            .chain(self.n_parts.iter().map(|n| n.kernel.clone()))
            .collect()
    }
}

fn bounded_constant(n: usize) -> RationalFunction {
    RationalFunction::constant(n, frac(3, 2))
}

/// `⟨f⟩ = ⋂ Kᵢ ∩ ⋂ Nⱼ` for positive `f`, certified.
pub fn ho_decompose(f: &RationalFunction, max_monomials: usize) -> Result<HoDecomposition> {
    let n = f.n;
    let f = f.simplified();
    let count = f.monomial_count();
    if count > max_monomials {
        return Err(Error::SizeCap { count, cap: max_monomials });
    }
    let pl = PlFunction::from_rational(&f);
    let (lo, _) = pl.range();
    if !lo.as_ref().is_some_and(|v| !v.is_negative()) {
        return Err(Error::NotPositive(crate::expr::to_expr(&f).to_string()));
    }
    let whole = PrincipalKernel::new(&f);
    let fk = PrincipalKernel::bounded(n);

    if crate::pl::zero_set(&pl).is_empty() {
        let lb = lo.expect("checked above");
        return Ok(HoDecomposition {
            k_parts: Vec::new(),
            n_parts: vec![NPart { kernel: whole, lower_bound: lb }],
            certified: true,
            certified_mod_bounded: true,
        });
    }

    let patterns = dominance_patterns(&f);
    let mut k_parts: Vec<KPart> = Vec::new();
    let mut n_parts: Vec<NPart> = Vec::new();
    for p in &patterns {
        if p.on_skeleton {
            let ev = p.evidence();
            let raw = product(&ev.hs_part(n)?, &ev.region_part(n)?)?;
            // the classifier's factorisation reads the skeleton directly and is much smaller
            let c = classify(&raw)?;
            let ev = match c.tag {
                KernelTag::Ho | KernelTag::Hs | KernelTag::Hp | KernelTag::Order | KernelTag::Region => c.evidence,
                _ => ev,
            };
            let hs = ev.hs_part(n)?;
            let region = ev.region_part(n)?;
            let kernel = product(&hs, &region)?;
            k_parts.push(KPart {
                hs,
                region,
                hs_evidence: ev.hp,
                region_evidence: ev.order,
                kernel,
            });
        } else {
            let ev = p.evidence();
            let mut kernel = product(&ev.hs_part(n)?, &ev.region_part(n)?)?;
            if !kernel.pl().inf_abs().is_positive() {
                kernel = product(&kernel, &fk)?;
            }
            let lb = kernel.pl().inf_abs();
            if !lb.is_positive() {
                return Err(Error::Certification("bounded-below part without positive lower bound".into()));
            }
            n_parts.push(NPart { kernel, lower_bound: lb });
        }
    }
    let k_parts = prune_containing(k_parts, |k| &k.kernel)?;
    let n_parts = prune_containing(n_parts, |k| &k.kernel)?;

    let mut d = HoDecomposition {
        k_parts,
        n_parts,
        certified: false,
        certified_mod_bounded: false,
    };
    let all = intersect_pl(&d.parts(), n)?;
    d.certified = crate::pl::dominates(whole.pl(), &all)?.holds() && crate::pl::dominates(&all, whole.pl())?.holds();

    let f_mod = whole.pl().min(fk.pl())?;
    let k_mod: Vec<PlFunction> = d
        .k_parts
        .iter()
        .map(|k| k.kernel.pl().min(fk.pl()))
        .collect::<Result<_>>()?;
    let k_mod = PlFunction::min_all(&k_mod)?;
    d.certified_mod_bounded =
        crate::pl::dominates(&f_mod, &k_mod)?.holds() && crate::pl::dominates(&k_mod, &f_mod)?.holds();
    if !d.certified || !d.certified_mod_bounded {
        return Err(Error::Certification(format!(
            "decomposition of {} did not re-intersect (full: {}, modulo bounded: {})",
            crate::expr::to_expr(&f),
            d.certified,
            d.certified_mod_bounded
        )));
    }
    Ok(d)
}

/// Generator of `⋂ parts` as a PL function (pointwise minimum).
fn intersect_pl(parts: &[PrincipalKernel], n: usize) -> Result<PlFunction> {
    if parts.is_empty() {
        return Ok(PlFunction::from_rational(&bounded_constant(n)));
    }
    let pls: Vec<PlFunction> = parts.iter().map(|k| k.pl().clone()).collect();
    PlFunction::min_all(&pls)
}

/// Drops parts that contain another part; they do not change the intersection.
fn prune_containing<T, F>(items: Vec<T>, key: F) -> Result<Vec<T>>
where
    F: Fn(&T) -> &PrincipalKernel,
{
    let mut kept: Vec<T> = Vec::new();
    'outer: for it in items {
        for k in &kept {
            if contained(key(k), key(&it))?.holds() {
                continue 'outer;
            }
        }
        let mut rest = Vec::new();
        for k in kept {
            if !contained(key(&it), key(&k))?.holds() {
                rest.push(k);
            }
        }
        rest.push(it);
        kept = rest;
    }
    Ok(kept)
}

/// `K = L·R` with `L` HS and `R` a region kernel.
pub fn split_ho(k: &PrincipalKernel) -> Result<(PrincipalKernel, PrincipalKernel)> {
    let c = classify(k)?;
    match c.tag {
        KernelTag::Ho | KernelTag::Hs | KernelTag::Hp | KernelTag::Order | KernelTag::Region | KernelTag::Trivial => {}
        t => return Err(Error::NotHo(format!("{k} is classified {t}"))),
    }
    let l = c.evidence.hs_part(k.n())?;
    let r = c.evidence.region_part(k.n())?;
    if !kernel_equal(&product(&l, &r)?, k)? {
        return Err(Error::Certification(format!("split of {k} does not multiply back")));
    }
    Ok((l, r))
}

/// A kernel built from HP-kernels by products and intersections.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaExpr {
    Hp(LMonomial),
    Prod(Vec<OmegaExpr>),
    Cap(Vec<OmegaExpr>),
}

impl OmegaExpr {
    pub fn n(&self) -> Option<usize> {
        match self {
            OmegaExpr::Hp(l) => Some(l.n()),
            OmegaExpr::Prod(v) | OmegaExpr::Cap(v) => v.first().and_then(OmegaExpr::n),
        }
    }

    pub fn kernel(&self) -> Result<PrincipalKernel> {
        match self {
            OmegaExpr::Hp(l) => Ok(PrincipalKernel::hp(l)),
            OmegaExpr::Prod(v) => product_all(&v.iter().map(OmegaExpr::kernel).collect::<Result<Vec<_>>>()?),
            OmegaExpr::Cap(v) => intersect_all(&v.iter().map(OmegaExpr::kernel).collect::<Result<Vec<_>>>()?),
        }
    }

    /// Intersection of HS-products, distributing products over intersections.
    pub fn normal_form(&self) -> Vec<Vec<LMonomial>> {
        match self {
            OmegaExpr::Hp(l) => vec![vec![l.clone()]],
            OmegaExpr::Cap(v) => v.iter().flat_map(OmegaExpr::normal_form).collect(),
            OmegaExpr::Prod(v) => {
                let mut acc: Vec<Vec<LMonomial>> = vec![Vec::new()];
                for e in v {
                    let nf = e.normal_form();
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &nf {
                            let mut t = a.clone();
                            for l in b {
                                push_unique(&mut t, l.clone());
                            }
                            next.push(t);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }

    /// Parses `cap(e, ...)`, `prod(e, ...)` or an expression denoting one L-monomial.
    pub fn parse(src: &str, n: Option<usize>) -> Result<OmegaExpr> {
        let n = match n {
            Some(n) => n,
            None => crate::expr::parse(&leaves_only(src)).map(|e| e.arity().max(1))?,
        };
        parse_omega(src.trim(), 0, n)
    }
}

/// Rewrites `cap(` and `prod(` into `meet(` so the expression parser can infer the arity.
fn leaves_only(src: &str) -> String {
    src.replace("cap(", "meet(").replace("prod(", "meet(")
}

fn parse_omega(src: &str, offset: usize, n: usize) -> Result<OmegaExpr> {
    let lead = src.len() - src.trim_start().len();
    let s = src.trim();
    let offset = offset + lead;
    for (kw, is_cap) in [("cap", true), ("prod", false)] {
        if let Some(rest) = s.strip_prefix(kw) {
            let rest_trim = rest.trim_start();
            if rest_trim.starts_with('(') && s.ends_with(')') {
                let open = s.len() - rest_trim.len();
                let inner = &s[open + 1..s.len() - 1];
                let mut parts = Vec::new();
                let mut depth = 0i32;
                let mut start = 0;
                for (i, c) in inner.char_indices() {
                    match c {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        ',' if depth == 0 => {
                            parts.push(parse_omega(&inner[start..i], offset + open + 1 + start, n)?);
                            start = i + 1;
                        }
                        _ => {}
                    }
                }
                parts.push(parse_omega(&inner[start..], offset + open + 1 + start, n)?);
                return Ok(if is_cap { OmegaExpr::Cap(parts) } else { OmegaExpr::Prod(parts) });
            }
        }
    }
    let f = match crate::expr::parse_function(s, Some(n)) {
        Ok(f) => f.simplified(),
        Err(Error::Parse { pos, msg }) => return Err(Error::Parse { pos: pos + offset, msg }),
        Err(e) => return Err(e),
    };
    let single = |p: &Polynomial| (p.len() == 1).then(|| p.terms()[0].clone());
    match (single(&f.num), single(&f.den)) {
        (Some(a), Some(b)) => {
            ratio(&a, &b).map(OmegaExpr::Hp).ok_or_else(|| Error::NotInOmega(format!("`{s}` is a constant")))
        }
        _ => Err(Error::NotInOmega(format!("`{s}` is not an L-monomial"))),
    }
}

/// `Some((g, h))` with `K = g ∩ h`, `K ≠ g`, `K ≠ h`, or `None` when the
/// normal form collapses to a single HS-kernel.
pub fn reducible(e: &OmegaExpr) -> Result<Option<(PrincipalKernel, PrincipalKernel)>> {
    let k = e.kernel()?;
    let terms: Vec<PrincipalKernel> = e
        .normal_form()
        .iter()
        .map(|t| product_all(&t.iter().map(PrincipalKernel::hp).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let terms = prune_containing(terms, |k| k)?;
    let Some((first, rest)) = terms.split_first() else {
        return Err(Error::NotInOmega("empty expression".into()));
    };
    if rest.is_empty() {
        return Ok(None);
    }
    let h = intersect_all(rest)?;
    let g = first.clone();
    let cap = intersect(&g, &h)?;
    if !kernel_equal(&cap, &k)? || kernel_equal(&g, &k)? || kernel_equal(&h, &k)? {
        return Err(Error::Certification(format!("reduction of {k} did not verify")));
    }
    Ok(Some((g, h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;
    use crate::kernel::{member, KernelTag};
    use num_traits::Zero;

    fn f(s: &str, n: usize) -> RationalFunction {
        parse_function(s, Some(n)).unwrap()
    }

    fn k(s: &str, n: usize) -> PrincipalKernel {
        PrincipalKernel::new(&f(s, n))
    }

    /// Oracle: the set of exact argmax pairs seen on a grid.
    fn sampled_patterns(g: &RationalFunction) -> std::collections::BTreeSet<(Vec<usize>, Vec<usize>)> {
        let mut seen = std::collections::BTreeSet::new();
        for a in -12..=12 {
            for b in -12..=12 {
                let p = [frac(a, 4), frac(b, 4)];
                seen.insert((g.num.argmax(&p), g.den.argmax(&p)));
            }
        }
        seen
    }

    #[test]
    fn patterns_of_x() {
        let g = f("x", 1).abs().simplified();
        let ps = dominance_patterns(&g);
        assert_eq!(ps.iter().filter(|p| p.on_skeleton).count(), 1);
        assert_eq!(ps.iter().filter(|p| !p.on_skeleton).count(), 2);
    }

    #[test]
    fn patterns_match_sampling() {
        let g = f("abs(x) + abs(y + 0)", 2).simplified();
        let ps = dominance_patterns(&g);
        let got: std::collections::BTreeSet<_> = ps.iter().map(|p| (p.h.clone(), p.g.clone())).collect();
        let seen = sampled_patterns(&g);
        assert!(seen.is_subset(&got));
        assert!(got.len() <= (2usize.pow(g.num.len() as u32) - 1) * (2usize.pow(g.den.len() as u32) - 1));
        for p in ps.iter().filter(|p| p.on_skeleton) {
            assert!(p.point[0].is_zero());
            assert!(!p.point[1].is_positive());
        }
    }

    #[test]
    fn decompose_split_at_y() {
        let g = f("abs(x) + meet(abs(y + 0), abs(y^-1 + 0))", 2);
        let d = ho_decompose(&g, 30).unwrap();
        assert!(d.certified && d.certified_mod_bounded);
        assert_eq!(d.k_parts.len(), 2);
        for kp in &d.k_parts {
            assert!(kernel_equal(&kp.hs, &k("x", 2)).unwrap());
        }
        let regions: Vec<bool> = [k("y + 0", 2), k("y^-1 + 0", 2)]
            .iter()
            .map(|r| d.k_parts.iter().any(|kp| kernel_equal(&kp.region, r).unwrap()))
            .collect();
        assert_eq!(regions, vec![true, true]);
    }

    #[test]
    fn decompose_simple_cases() {
        let d = ho_decompose(&f("3", 2), 12).unwrap();
        assert!(d.k_parts.is_empty());
        assert_eq!(d.n_parts.len(), 1);
        assert!(kernel_equal(&d.n_parts[0].kernel, &PrincipalKernel::bounded(2)).unwrap());

        let d = ho_decompose(&f("abs(x) + abs(y)", 2), 12).unwrap();
        assert_eq!(d.k_parts.len(), 1);
        assert!(kernel_equal(&d.k_parts[0].hs, &k("abs(x) + abs(y)", 2)).unwrap());
        assert_eq!(classify(&d.k_parts[0].region).unwrap().tag, KernelTag::Trivial);

        assert!(matches!(ho_decompose(&f("x", 1), 12), Err(Error::NotPositive(_))));
        assert!(matches!(ho_decompose(&f("abs(x + y + 0 + x*y)", 2), 3), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn split_examples() {
        let (l, r) = split_ho(&k("abs(x) + (y + 0)", 2)).unwrap();
        assert!(kernel_equal(&l, &k("x", 2)).unwrap());
        assert!(kernel_equal(&r, &k("y + 0", 2)).unwrap());
        let (l, r) = split_ho(&k("abs(x) + abs(y)", 2)).unwrap();
        assert!(kernel_equal(&l, &k("abs(x) + abs(y)", 2)).unwrap());
        assert_eq!(classify(&r).unwrap().tag, KernelTag::Trivial);
        let (l, r) = split_ho(&k("(x + 0) + (y + 0)", 2)).unwrap();
        assert_eq!(classify(&l).unwrap().tag, KernelTag::Trivial);
        assert_eq!(classify(&r).unwrap().tag, KernelTag::Region);
    }

    #[test]
    fn reducibility() {
        let e = OmegaExpr::parse("cap(x, y)", None).unwrap();
        let (g, h) = reducible(&e).unwrap().unwrap();
        assert!(!member(h.generator(), &g).unwrap());
        assert!(!member(g.generator(), &h).unwrap());
        assert!(reducible(&OmegaExpr::parse("x", Some(2)).unwrap()).unwrap().is_none());
        assert!(reducible(&OmegaExpr::parse("prod(x, y)", None).unwrap()).unwrap().is_none());
        assert!(reducible(&OmegaExpr::parse("cap(x, x^2)", Some(2)).unwrap()).unwrap().is_none());
        assert!(matches!(OmegaExpr::parse("cap(x, x + y)", None), Err(Error::NotInOmega(_))));
        assert!(matches!(OmegaExpr::parse("cap(x, ?)", None), Err(Error::Parse { .. })));
    }

    #[test]
    fn comparable_pairs_give_trivial_meets() {
        let u = f("x", 2);
        let meet = |a: &RationalFunction, b: &RationalFunction| PrincipalKernel::new(&a.abs().meet(&b.abs()).unwrap());
        let m = meet(&u, &u.pow(2));
        assert!(kernel_equal(&m, &k("x", 2)).unwrap());
        let m = meet(&u, &f("y", 2));
        assert!(!kernel_equal(&m, &k("x", 2)).unwrap());
        assert!(!kernel_equal(&m, &k("y", 2)).unwrap());
    }
}
