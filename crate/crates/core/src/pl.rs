//! Piecewise-linear semantics of tropical fractions and the exact decision
//! procedures built on it.
//!
//! A [`PlFunction`] is a finite list of full-dimensional closed polyhedral
//! cells covering `ℚⁿ`, each carrying the affine form of the function on it.
//! Cells may overlap on boundaries, where their forms agree. Every emptiness,
//! interior and optimisation question is answered by the exact simplex in
//! [`crate::lp`].

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lp::{Lp, LpOutcome, VarKind};
use crate::poly::Polynomial;
use crate::qfast::Q;
use crate::rat::{ceil, dot, fmt_rat, int, primitive, Rat};
use crate::rational::RationalFunction;

/// `p ↦ ⟨grad, p⟩ + offset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    pub grad: Vec<Rat>,
    pub offset: Rat,
}

impl Affine {
    pub fn constant(n: usize, c: Rat) -> Self {
        Affine {
            grad: vec![Rat::zero(); n],
            offset: c,
        }
    }

    pub fn eval(&self, p: &[Rat]) -> Rat {
        dot(&self.grad, p) + &self.offset
    }

    pub fn sub(&self, o: &Affine) -> Affine {
        Affine {
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            offset: &self.offset - &o.offset,
        }
    }

    pub fn add(&self, o: &Affine) -> Affine {
        Affine {
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            offset: &self.offset + &o.offset,
        }
    }

    pub fn neg(&self) -> Affine {
        Affine {
            grad: self.grad.iter().map(|a| -a).collect(),
            offset: -&self.offset,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(Zero::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.is_constant() && self.offset.is_zero()
    }

    /// The half-space `self <= 0`.
    pub fn nonpos(&self) -> Halfspace {
        Halfspace::new(self.grad.clone(), -&self.offset)
    }

    /// The half-space `self >= 0`.
    pub fn nonneg(&self) -> Halfspace {
        self.neg().nonpos()
    }
}

impl Serialize for Affine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Affine", 2)?;
        st.serialize_field("grad", &self.grad.iter().map(fmt_rat).collect::<Vec<_>>())?;
        st.serialize_field("offset", &fmt_rat(&self.offset))?;
        st.end()
    }
}

/// `⟨a, p⟩ <= b`, stored with `a` a primitive integer vector when nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub a: Vec<Rat>,
    pub b: Rat,
}

impl Halfspace {
    pub fn new(a: Vec<Rat>, b: Rat) -> Self {
        let (prim, factor) = primitive(&a);
        if prim.iter().all(Zero::is_zero) {
            return Halfspace { a, b };
        }
        Halfspace {
            a: prim.into_iter().map(Rat::from_integer).collect(),
            b: b * factor,
        }
    }

    pub fn holds(&self, p: &[Rat]) -> bool {
        dot(&self.a, p) <= self.b
    }

    pub fn strict(&self, p: &[Rat]) -> bool {
        dot(&self.a, p) < self.b
    }

    fn is_trivial(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }
}

/// `{p : A p <= b, E p = d}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polyhedron {
    pub n: usize,
    pub rows: Vec<Halfspace>,
    pub eqs: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn whole(n: usize) -> Self {
        Polyhedron {
            n,
            rows: Vec::new(),
            eqs: Vec::new(),
        }
    }

    pub fn from_rows(n: usize, rows: Vec<Halfspace>) -> Self {
        let mut p = Polyhedron {
            n,
            rows: Vec::new(),
            eqs: Vec::new(),
        };
        for r in rows {
            p.push(r);
        }
        p
    }

    /// Adds a row, skipping exact duplicates and keeping the tighter of two parallel rows.
    pub fn push(&mut self, h: Halfspace) {
        if h.is_trivial() && !h.b.is_negative() {
            return;
        }
        if let Some(old) = self.rows.iter_mut().find(|r| r.a == h.a) {
            if h.b < old.b {
                old.b = h.b;
            }
            return;
        }
        self.rows.push(h);
    }

    pub fn push_eq(&mut self, h: Halfspace) {
        if !self.eqs.contains(&h) {
            self.eqs.push(h);
        }
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        let mut p = self.clone();
        for r in &other.rows {
            p.push(r.clone());
        }
        for e in &other.eqs {
            p.push_eq(e.clone());
        }
        p
    }

    pub fn contains(&self, p: &[Rat]) -> bool {
        self.rows.iter().all(|r| r.holds(p)) && self.eqs.iter().all(|e| dot(&e.a, p) == e.b)
    }

    fn base_lp(&self, extra_vars: usize) -> Lp {
        let mut lp = Lp::free(self.n + extra_vars);
        let pad = |a: &[Rat]| {
            let mut v = a.to_vec();
            v.resize(self.n + extra_vars, Rat::zero());
            v
        };
        for r in &self.rows {
            lp.le.push((pad(&r.a), r.b.clone()));
        }
        for e in &self.eqs {
            lp.eq.push((pad(&e.a), e.b.clone()));
        }
        lp
    }

    /// Maximizes an affine objective over the polyhedron.
    pub fn maximize(&self, obj: &Affine) -> LpOutcome {
        let mut lp = self.base_lp(0);
        lp.objective = obj.grad.clone();
        match lp.maximize() {
            LpOutcome::Optimal { point, .. } => {
                let value = obj.eval(&point);
                LpOutcome::Optimal { point, value }
            }
            o => o,
        }
    }

    pub fn feasible_point(&self) -> Option<Vec<Rat>> {
        match self.maximize(&Affine::constant(self.n, Rat::zero())) {
            LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// A point strictly inside every inequality (relative to the equalities),
    /// or `None` when no such point exists.
    pub fn interior_point(&self) -> Option<Vec<Rat>> {
        let n = self.n;
        let mut lp = Lp::free(n + 1);
        lp.objective[n] = Rat::one();
        for r in &self.rows {
            if r.is_trivial() {
                if r.b.is_positive() {
                    continue;
                }
                return None;
            }
            let mut a = r.a.clone();
            a.push(Rat::one());
            lp.le.push((a, r.b.clone()));
        }
        for e in &self.eqs {
            let mut a = e.a.clone();
            a.push(Rat::zero());
            lp.eq.push((a, e.b.clone()));
        }
        let mut cap = vec![Rat::zero(); n + 1];
        cap[n] = Rat::one();
        lp.le.push((cap, Rat::one()));
        match lp.maximize() {
            LpOutcome::Optimal { mut point, value } if value.is_positive() => {
                point.truncate(n);
                Some(point)
            }
            LpOutcome::Unbounded { mut point, .. } => {
                point.truncate(n);
                Some(point)
            }
            _ => None,
        }
    }

    /// Rows that hold with equality on the whole polyhedron (plus the explicit equalities).
    pub fn implicit_equalities(&self) -> Vec<Halfspace> {
        let mut out = self.eqs.clone();
        for r in &self.rows {
            // maximize b - a·p; zero optimum means a·p = b throughout.
            let obj = Affine {
                grad: r.a.iter().map(|x| -x).collect(),
                offset: r.b.clone(),
            };
            // maximize slack = b - a·p -> need min slack == max slack == 0.
            let max_slack = self.maximize(&obj);
            if let LpOutcome::Optimal { value, .. } = max_slack {
                if value.is_zero() {
                    out.push(r.clone());
                }
            }
        }
        out
    }

    /// Dimension of the affine hull; `None` for the empty set.
    pub fn dimension(&self) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let eqs = self.implicit_equalities();
        let rows: Vec<Vec<Rat>> = eqs.iter().map(|h| h.a.clone()).collect();
        Some(self.n - crate::rat::rank(&rows))
    }

    /// Whether `self ⊆ other`, decided by one LP per row of `other`.
    pub fn subset_of(&self, other: &Polyhedron) -> bool {
        let row_ok = |h: &Halfspace| match self.maximize(&Affine {
            grad: h.a.clone(),
            offset: Rat::zero(),
        }) {
            LpOutcome::Optimal { value, .. } => value <= h.b,
            LpOutcome::Unbounded { .. } => false,
            LpOutcome::Infeasible => true,
        };
        other.rows.iter().all(row_ok)
            && other.eqs.iter().all(|e| {
                row_ok(e)
                    && row_ok(&Halfspace {
                        a: e.a.iter().map(|x| -x).collect(),
                        b: -&e.b,
                    })
            })
    }

    /// Drops rows implied by the others. One LP per row.
    pub fn without_redundant_rows(&self) -> Polyhedron {
        let mut kept = self.clone();
        let mut i = 0;
        while i < kept.rows.len() {
            let row = kept.rows.remove(i);
            let implied = match kept.maximize(&Affine {
                grad: row.a.clone(),
                offset: Rat::zero(),
            }) {
                LpOutcome::Optimal { value, .. } => value <= row.b,
                LpOutcome::Infeasible => true,
                LpOutcome::Unbounded { .. } => false,
            };
            if !implied {
                kept.rows.insert(i, row);
                i += 1;
            }
        }
        kept
    }

    /// All constraints as `A p <= b` rows (each equality becomes two rows).
    pub fn inequality_rows(&self) -> Vec<Halfspace> {
        let mut out = self.rows.clone();
        for e in &self.eqs {
            out.push(e.clone());
            out.push(Halfspace {
                a: e.a.iter().map(|x| -x).collect(),
                b: -&e.b,
            });
        }
        out
    }
}

impl Serialize for Polyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.inequality_rows();
        let mut st = s.serialize_struct("Polyhedron", 2)?;
        let a: Vec<Vec<String>> = rows.iter().map(|r| r.a.iter().map(fmt_rat).collect()).collect();
        let b: Vec<String> = rows.iter().map(|r| fmt_rat(&r.b)).collect();
        st.serialize_field("A", &a)?;
        st.serialize_field("b", &b)?;
        st.end()
    }
}

/// A full-dimensional cell of a PL function.
#[derive(Debug, Clone)]
pub struct Cell {
    pub region: Polyhedron,
    pub form: Affine,
    /// Dominant numerator monomials (indices into the original numerator).
    pub active_num: Vec<usize>,
    pub active_den: Vec<usize>,
    /// A point strictly inside the cell.
    pub interior: Vec<Rat>,
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.region.inequality_rows();
        let a: Vec<Vec<String>> = rows.iter().map(|r| r.a.iter().map(fmt_rat).collect()).collect();
        let b: Vec<String> = rows.iter().map(|r| fmt_rat(&r.b)).collect();
        let mut st = s.serialize_struct("Cell", 5)?;
        st.serialize_field("A", &a)?;
        st.serialize_field("b", &b)?;
        st.serialize_field("form", &self.form)?;
        st.serialize_field("active_num", &self.active_num)?;
        st.serialize_field("active_den", &self.active_den)?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlFunction {
    pub n: usize,
    pub cells: Vec<Cell>,
    /// Known to be a max (resp. min) of its forms; lets operations
    /// collapse cells sharing a form.
    #[serde(skip)]
    pub convex: bool,
    #[serde(skip)]
    pub concave: bool,
}

/// A cell with its rows and interior point converted once for the overlay
/// prefilters.
struct Prepared<'a> {
    poly: &'a Polyhedron,
    interior: &'a [Rat],
    rows: Vec<(Vec<Q>, Q)>,
    /// Rows as `a·x <= bn/bd` in machine integers, when they fit.
    int_rows: Option<Vec<(Vec<i64>, i64, i64)>>,
    point: Point,
    /// Integer normals with the smallest offset seen, sorted.
    normals: Vec<(Vec<i64>, Q)>,
}

/// A point, also as `P / D` with integer `P` when that fits.
struct Point {
    q: Vec<Q>,
    int: Option<(Vec<i64>, i64)>,
}

impl Point {
    fn new(p: &[Rat]) -> Point {
        let mut l = BigInt::one();
        for x in p {
            l = num_integer::lcm(l, x.denom().clone());
        }
        let int = l.to_i64().and_then(|d| {
            let scaled: Option<Vec<i64>> = p.iter().map(|x| (x.numer() * (&l / x.denom())).to_i64()).collect();
            scaled.map(|v| (v, d))
        });
        Point { q: p.iter().map(Q::from_rat).collect(), int }
    }
}

fn int_side(a: &[i64], bn: i64, bd: i64, p: &[i64], d: i64) -> Option<Ordering> {
    let mut s: i128 = 0;
    for (c, x) in a.iter().zip(p) {
        s = s.checked_add(*c as i128 * *x as i128)?;
    }
    Some(s.checked_mul(bd as i128)?.cmp(&(bn as i128 * d as i128)))
}

impl<'a> Prepared<'a> {
    fn new(poly: &'a Polyhedron, interior: &'a [Rat]) -> Self {
        let rows: Vec<(Vec<Q>, Q)> = poly
            .rows
            .iter()
            .map(|h| (h.a.iter().map(Q::from_rat).collect(), Q::from_rat(&h.b)))
            .collect();
        let int_rows = poly
            .rows
            .iter()
            .map(|h| {
                let a: Option<Vec<i64>> = h.a.iter().map(|x| x.is_integer().then(|| x.numer().to_i64()).flatten()).collect();
                Some((a?, h.b.numer().to_i64()?, h.b.denom().to_i64()?))
            })
            .collect();
        let mut normals: Vec<(Vec<i64>, Q)> = Vec::new();
        for (h, (_, b)) in poly.rows.iter().zip(&rows) {
            let key: Option<Vec<i64>> = h.a.iter().map(|x| x.is_integer().then(|| x.numer().to_i64()).flatten()).collect();
            if let Some(k) = key {
                normals.push((k, b.clone()));
            }
        }
        normals.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
        normals.dedup_by(|later, first| later.0 == first.0);
        Prepared {
            poly,
            interior,
            point: Point::new(interior),
            rows,
            int_rows,
            normals,
        }
    }

    fn side(&self, r: usize, p: &Point) -> Ordering {
        if let (Some(rows), Some((v, d))) = (&self.int_rows, &p.int) {
            let (a, bn, bd) = &rows[r];
            if let Some(o) = int_side(a, *bn, *bd, v, *d) {
                return o;
            }
        }
        let (a, b) = &self.rows[r];
        let mut s = Q::zero();
        for (c, x) in a.iter().zip(&p.q) {
            if !c.is_zero() {
                s = s.add(&c.mul(x));
            }
        }
        s.cmp(b)
    }

    fn contains_strictly(&self, p: &Point) -> bool {
        (0..self.rows.len()).all(|r| self.side(r, p) == Ordering::Less)
    }

    fn contains(&self, p: &Point) -> bool {
        (0..self.rows.len()).all(|r| self.side(r, p) != Ordering::Greater)
    }

    /// A row here and a row of `o` with opposite normals leave no common interior.
    fn separated(&self, o: &Prepared) -> bool {
        o.normals.iter().any(|(k, b)| {
            let Some(neg) = k.iter().map(|v| v.checked_neg()).collect::<Option<Vec<i64>>>() else {
                return false;
            };
            self.normals
                .binary_search_by(|(m, _)| m.as_slice().cmp(&neg))
                .is_ok_and(|i| !self.normals[i].1.add(b).is_positive())
        })
    }
}

/// Intersects two cells if the intersection has interior.
fn meet_cells(a: &Prepared, b: &Prepared) -> Option<(Polyhedron, Vec<Rat>)> {
    if b.contains_strictly(&a.point) {
        return Some((a.poly.intersect(b.poly), a.interior.to_vec()));
    }
    if a.contains_strictly(&b.point) {
        return Some((a.poly.intersect(b.poly), b.interior.to_vec()));
    }
    if a.separated(b) {
        return None;
    }
    let region = a.poly.intersect(b.poly);
    let mid = Point::new(&a.interior.iter().zip(b.interior).map(|(x, y)| (x + y) / int(2)).collect::<Vec<_>>());
    if a.contains_strictly(&mid) && b.contains_strictly(&mid) {
        let p = mid.q.iter().map(Q::to_rat).collect();
        return Some((region, p));
    }
    let p = region.interior_point()?;
    Some((region, p))
}

type CellRef<'a> = (&'a Polyhedron, &'a [Rat]);
type Part = Option<(Polyhedron, Vec<Rat>)>;

/// Pairs of cells from two subdivisions of `ℚⁿ` whose intersection has
/// interior, with that intersection and a point inside it.
fn overlay(left: &[CellRef], right: &[CellRef]) -> Vec<(usize, usize, Polyhedron, Vec<Rat>)> {
    let theirs: Vec<Prepared> = right.iter().map(|(r, p)| Prepared::new(r, p)).collect();
    // cells of `right` across each facet: keyed by the flipped row
    let mut across: HashMap<Halfspace, Vec<usize>> = HashMap::new();
    for (j, (r, _)) in right.iter().enumerate() {
        for h in &r.rows {
            across.entry(Halfspace { a: h.a.iter().map(|x| -x).collect(), b: -&h.b }).or_default().push(j);
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![usize::MAX; right.len()];
    for (i, (r, p)) in left.iter().enumerate() {
        let mine = Prepared::new(r, p);
        // The cells of `right` meeting this one are connected through shared
        // facets, starting from any cell that holds its interior point.
        let mut found = Vec::new();
        let mut queue: Vec<usize> = (0..theirs.len()).filter(|&j| theirs[j].contains(&mine.point)).collect();
        for &j in &queue {
            seen[j] = i;
        }
        while let Some(j) = queue.pop() {
            let Some(m) = meet_cells(&mine, &theirs[j]) else { continue };
            found.push((j, m));
            for h in &right[j].0.rows {
                for &k in across.get(h).into_iter().flatten() {
                    if seen[k] != i {
                        seen[k] = i;
                        queue.push(k);
                    }
                }
            }
        }
        found.sort_by_key(|f| f.0);
        out.extend(found.into_iter().map(|(j, (region, interior))| (i, j, region, interior)));
    }
    out
}

/// Splits a cell by the sign of `d`; returns the parts with interior
/// (`d >= 0` side first).
fn split(region: &Polyhedron, interior: &[Rat], d: &Affine) -> (Part, Part) {
    if d.is_constant() {
        return if d.offset.is_negative() {
            (None, Some((region.clone(), interior.to_vec())))
        } else {
            (Some((region.clone(), interior.to_vec())), None)
        };
    }
    let mut pos = region.clone();
    pos.push(d.nonneg());
    let mut neg = region.clone();
    neg.push(d.nonpos());
    let v = d.eval(interior);
    let side = |poly: Polyhedron, here: bool| {
        if here {
            Some((poly, interior.to_vec()))
        } else {
            poly.interior_point().map(|p| (poly, p))
        }
    };
    (side(pos, v.is_positive()), side(neg, v.is_negative()))
}

/// Full-dimensional linearity regions of a polynomial: `(monomial index, region, interior point)`.
pub fn pieces(poly: &Polynomial) -> Vec<(usize, Polyhedron, Vec<Rat>)> {
    let n = poly.n();
    let strict = poly.strict_points();
    let terms = poly.terms();
    let mut out = Vec::new();
    for (i, point) in &strict {
        let i = *i;
        let mut rows = Vec::new();
        for &(j, _) in &strict {
            if j == i {
                continue;
            }
            // t_j(p) <= t_i(p)
            let a: Vec<Rat> = terms[j].exps.iter().zip(&terms[i].exps).map(|(x, y)| int(x - y)).collect();
            rows.push(Halfspace::new(a, &terms[i].coeff - &terms[j].coeff));
        }
        let region = Polyhedron::from_rows(n, rows);
        // the LP point beats every monomial, dropped ones included
        let p = point.clone().or_else(|| region.interior_point());
        if let Some(p) = p {
            out.push((i, region, p));
        }
    }
    out
}

/// One cell of a common refinement.
#[derive(Debug, Clone)]
pub struct RefinedCell {
    pub region: Polyhedron,
    pub interior: Vec<Rat>,
    pub left: Affine,
    pub right: Affine,
    /// Indices of the overlapped cells.
    pub parents: (usize, usize),
}

/// Pieces of one parent cell that all share a form become that parent cell
/// again; first over the cells of `left`, then over those of `right`.
fn merge_into_parents(left: &PlFunction, right: &PlFunction, cells: Vec<Cell>, parents: &[(usize, usize)]) -> Vec<Cell> {
    let mut taken = vec![false; cells.len()];
    let mut out = Vec::new();
    for side in 0..2 {
        let (source, key): (&PlFunction, fn(&(usize, usize)) -> usize) = if side == 0 {
            (left, |p| p.0)
        } else {
            (right, |p| p.1)
        };
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); source.cells.len()];
        for (i, p) in parents.iter().enumerate() {
            groups[key(p)].push(i);
        }
        for (g, members) in groups.iter().enumerate() {
            if members.len() < 2 || members.iter().any(|&i| taken[i]) {
                continue;
            }
            let form = &cells[members[0]].form;
            if members.iter().all(|&i| cells[i].form == *form) {
                let parent = &source.cells[g];
                out.push(PlFunction::plain(parent.region.clone(), parent.interior.clone(), form.clone()));
                for &i in members {
                    taken[i] = true;
                }
            }
        }
    }
    out.extend(cells.into_iter().zip(taken).filter(|(_, t)| !t).map(|(c, _)| c));
    out
}

impl PlFunction {
    pub fn constant(n: usize, c: Rat) -> Self {
        PlFunction {
            n,
            cells: vec![Cell {
                region: Polyhedron::whole(n),
                form: Affine::constant(n, c),
                active_num: vec![0],
                active_den: vec![0],
                interior: vec![Rat::zero(); n],
            }],
            convex: true,
            concave: true,
        }
    }

    /// Cells of `num - den`: pairs of numerator and denominator linearity
    /// regions whose intersection has interior.
    pub fn from_rational(f: &RationalFunction) -> Self {
        let n = f.n;
        let np = pieces(&f.num);
        let dp = pieces(&f.den);
        let left: Vec<CellRef> = np.iter().map(|(_, r, p)| (r, p.as_slice())).collect();
        let right: Vec<CellRef> = dp.iter().map(|(_, r, p)| (r, p.as_slice())).collect();
        let cells = overlay(&left, &right)
            .into_iter()
            .map(|(a, b, region, interior)| {
                let (ti, tj) = (&f.num.terms()[np[a].0], &f.den.terms()[dp[b].0]);
                Cell {
                    region,
                    form: Affine {
                        grad: ti.exps.iter().zip(&tj.exps).map(|(x, y)| int(x - y)).collect(),
                        offset: &ti.coeff - &tj.coeff,
                    },
                    active_num: vec![np[a].0],
                    active_den: vec![dp[b].0],
                    interior,
                }
            })
            .collect();
        PlFunction {
            n,
            cells,
            convex: f.den.len() == 1,
            concave: f.num.len() == 1,
        }
    }

    pub fn value_at(&self, p: &[Rat]) -> Option<Rat> {
        self.cells.iter().find(|c| c.region.contains(p)).map(|c| c.form.eval(p))
    }

    /// Overlays two PL functions.
    pub fn refine(&self, other: &PlFunction) -> Result<Vec<RefinedCell>> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mine: Vec<CellRef> = self.cells.iter().map(|c| (&c.region, c.interior.as_slice())).collect();
        let theirs: Vec<CellRef> = other.cells.iter().map(|c| (&c.region, c.interior.as_slice())).collect();
        let out = overlay(&mine, &theirs)
            .into_iter()
            .map(|(i, j, region, interior)| RefinedCell {
                region,
                interior,
                left: self.cells[i].form.clone(),
                right: other.cells[j].form.clone(),
                parents: (i, j),
            })
            .collect();
        Ok(out)
    }

    /// Combines the overlay of `self` and `other` cell by cell, then merges
    /// pieces back into a parent cell when they all carry the same form.
    fn combine_refined<F>(&self, other: &PlFunction, cells: Vec<RefinedCell>, mut combine: F) -> PlFunction
    where
        F: FnMut(&RefinedCell, &mut Vec<Cell>),
    {
        let mut out = Vec::new();
        let mut parents = Vec::new();
        for c in &cells {
            combine(c, &mut out);
            parents.resize(out.len(), c.parents);
        }
        PlFunction {
            n: self.n,
            cells: merge_into_parents(self, other, out, &parents),
            convex: false,
            concave: false,
        }
    }

    fn with_shape(mut self, convex: bool, concave: bool) -> PlFunction {
        self.convex = convex;
        self.concave = concave;
        if convex || concave {
            self.collapse();
        }
        self
    }

    /// Rebuilds the cells of a convex (or concave) function as one cell per
    /// distinct form, `{φ_i >= φ_j for all j}` (or `<=`).
    fn collapse(&mut self) {
        let convex = self.convex;
        let mut forms: Vec<Affine> = Vec::new();
        for c in &self.cells {
            match forms.iter_mut().find(|f| f.grad == c.form.grad) {
                Some(f) => {
                    if (convex && c.form.offset > f.offset) || (!convex && c.form.offset < f.offset) {
                        *f = c.form.clone();
                    }
                }
                None => forms.push(c.form.clone()),
            }
        }
        if forms.len() == self.cells.len() {
            return;
        }
        let mut cells = Vec::new();
        for (i, fi) in forms.iter().enumerate() {
            let rows = forms
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, fj)| if convex { fj.sub(fi).nonpos() } else { fi.sub(fj).nonpos() })
                .collect();
            let region = Polyhedron::from_rows(self.n, rows);
            if let Some(interior) = region.interior_point() {
                cells.push(Self::plain(region, interior, fi.clone()));
            }
        }
        self.cells = cells;
    }

    fn plain(region: Polyhedron, interior: Vec<Rat>, form: Affine) -> Cell {
        Cell {
            region,
            form,
            active_num: Vec::new(),
            active_den: Vec::new(),
            interior,
        }
    }

    fn extremum(&self, other: &PlFunction, take_max: bool) -> Result<PlFunction> {
        let refined = self.refine(other)?;
        let convex = take_max && self.convex && other.convex;
        let concave = !take_max && self.concave && other.concave;
        Ok(self.combine_refined(other, refined, |c, out| {
            let d = c.left.sub(&c.right);
            if d.is_zero() {
                out.push(Self::plain(c.region.clone(), c.interior.clone(), c.left.clone()));
                return;
            }
            let (ge, le) = split(&c.region, &c.interior, &d);
            let (left_side, right_side) = if take_max { (ge, le) } else { (le, ge) };
            if let Some((r, p)) = left_side {
                out.push(Self::plain(r, p, c.left.clone()));
            }
            if let Some((r, p)) = right_side {
                out.push(Self::plain(r, p, c.right.clone()));
            }
        })
        .with_shape(convex, concave))
    }

    pub fn max(&self, other: &PlFunction) -> Result<PlFunction> {
        self.extremum(other, true)
    }

    pub fn min(&self, other: &PlFunction) -> Result<PlFunction> {
        self.extremum(other, false)
    }

    pub fn add(&self, other: &PlFunction) -> Result<PlFunction> {
        let refined = self.refine(other)?;
        Ok(self.combine_refined(other, refined, |c, out| {
            out.push(Self::plain(c.region.clone(), c.interior.clone(), c.left.add(&c.right)));
        })
        .with_shape(self.convex && other.convex, self.concave && other.concave))
    }

    pub fn neg(&self) -> PlFunction {
        PlFunction {
            n: self.n,
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    form: c.form.neg(),
                    ..c.clone()
                })
                .collect(),
            convex: self.concave,
            concave: self.convex,
        }
    }

    /// `|F| = max(F, -F)`, splitting cells where the form changes sign.
    pub fn abs(&self) -> PlFunction {
        let mut out = Vec::new();
        for c in &self.cells {
            let (ge, le) = split(&c.region, &c.interior, &c.form);
            if let Some((r, p)) = ge {
                out.push(Cell {
                    region: r,
                    interior: p,
                    ..c.clone()
                });
            }
            if let Some((r, p)) = le {
                if !c.form.is_zero() {
                    out.push(Cell {
                        region: r,
                        interior: p,
                        form: c.form.neg(),
                        ..c.clone()
                    });
                }
            }
        }
        let affine = self.convex && self.concave;
        PlFunction {
            n: self.n,
            cells: out,
            convex: affine,
            concave: false,
        }
        .with_shape(affine, false)
    }

    /// Pointwise minimum of a nonempty list.
    pub fn min_all(items: &[PlFunction]) -> Result<PlFunction> {
        let (first, rest) = items.split_first().ok_or(Error::EmptySet)?;
        let mut acc = first.clone();
        for f in rest {
            acc = acc.min(f)?;
        }
        Ok(acc)
    }

    pub fn max_all(items: &[PlFunction]) -> Result<PlFunction> {
        let (first, rest) = items.split_first().ok_or(Error::EmptySet)?;
        let mut acc = first.clone();
        for f in rest {
            acc = acc.max(f)?;
        }
        Ok(acc)
    }

    /// Range `(inf, sup)` of the function; `None` stands for an infinite bound.
    pub fn is_nonneg(&self) -> bool {
        self.cells.iter().all(|c| {
            !c.form.eval(&c.interior).is_negative()
                && matches!(c.region.maximize(&c.form.neg()), LpOutcome::Optimal { value, .. } if !value.is_positive())
        })
    }

    pub fn range(&self) -> (Option<Rat>, Option<Rat>) {
        let mut lo: Option<Option<Rat>> = None;
        let mut hi: Option<Option<Rat>> = None;
        for c in &self.cells {
            let cmax = match c.region.maximize(&c.form) {
                LpOutcome::Optimal { value, .. } => Some(value),
                _ => None,
            };
            let cmin = match c.region.maximize(&c.form.neg()) {
                LpOutcome::Optimal { value, .. } => Some(-value),
                _ => None,
            };
            hi = Some(match (hi, cmax) {
                (None, v) => v,
                (Some(None), _) | (_, None) => None,
                (Some(Some(a)), Some(b)) => Some(a.max(b)),
            });
            lo = Some(match (lo, cmin) {
                (None, v) => v,
                (Some(None), _) | (_, None) => None,
                (Some(Some(a)), Some(b)) => Some(a.min(b)),
            });
        }
        (lo.flatten(), hi.flatten())
    }

    /// `inf |F|` over `ℚⁿ` (always attained or zero for PL functions).
    pub fn inf_abs(&self) -> Rat {
        let mut best: Option<Rat> = None;
        for c in &self.cells {
            let cmax = match c.region.maximize(&c.form) {
                LpOutcome::Optimal { value, .. } => Some(value),
                _ => None,
            };
            let cmin = match c.region.maximize(&c.form.neg()) {
                LpOutcome::Optimal { value, .. } => Some(-value),
                _ => None,
            };
            let here = match (cmin, cmax) {
                (Some(lo), _) if lo.is_positive() => lo,
                (_, Some(hi)) if hi.is_negative() => -hi,
                _ => Rat::zero(),
            };
            best = Some(match best {
                None => here,
                Some(b) => b.min(here),
            });
            if best.as_ref().is_some_and(Zero::is_zero) {
                break;
            }
        }
        best.unwrap_or_else(Rat::zero)
    }
}

/// The witness of a failed domination: along `point + t·direction`
/// (`t >= 1`), `F > 10·G`; for `direction = 0` the point has `G = 0 < F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(with = "crate::rat::serde_rat_vec")]
    pub point: Vec<Rat>,
    #[serde(with = "crate::rat::serde_rat_vec")]
    pub direction: Vec<Rat>,
}

impl Witness {
    pub fn at(&self, t: &Rat) -> Vec<Rat> {
        self.point.iter().zip(&self.direction).map(|(p, d)| p + d * t).collect()
    }
}

/// Outcome of deciding `∃N: F <= N·G` pointwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Domination {
    Dominates {
        #[serde(serialize_with = "ser_bigint")]
        n: BigInt,
    },
    Fails { witness: Witness },
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl Domination {
    pub fn holds(&self) -> bool {
        matches!(self, Domination::Dominates { .. })
    }
}

/// Witness scaling: the direction is stretched so that `t = 1` already beats `10·G`.
const WITNESS_FACTOR: i64 = 10;

fn ray_witness(base: Vec<Rat>, ray: Vec<Rat>, f: &Affine, g: &Affine) -> Witness {
    let gain = dot(&f.grad, &ray);
    debug_assert!(gain.is_positive());
    let need = g.eval(&base) * int(WITNESS_FACTOR) - f.eval(&base) + Rat::one();
    let s = if need.is_positive() {
        Rat::from_integer(ceil(&(need / &gain))).max(Rat::one())
    } else {
        Rat::one()
    };
    Witness {
        direction: ray.into_iter().map(|x| x * &s).collect(),
        point: base,
    }
}

/// Decides `∃N ≥ 1: F(p) <= N·G(p)` for all `p`, for nonnegative `F`, `G`.
///
/// On each common cell the smallest admissible `N` is the supremum of `F/G`
/// over `{G > 0}`, found by the Charnes–Cooper linearisation
/// `max ⟨a, y⟩ + α t` s.t. `A y <= b t`, `⟨c, y⟩ + γ t = 1`, `t >= 0`.
/// Unboundedness produces either a point with `G = 0 < F` (`t > 0`) or a
/// recession direction with `G` constant and `F` growing (`t = 0`).
pub fn dominates(f: &PlFunction, g: &PlFunction) -> Result<Domination> {
    let n = f.n;
    let mut best = BigInt::one();
    for cell in f.refine(g)? {
        let (fa, ga) = (&cell.left, &cell.right);
        if fa == ga {
            continue;
        }
        let mut lp = Lp::free(n + 1);
        lp.kinds[n] = VarKind::NonNeg;
        let mut obj = fa.grad.clone();
        obj.push(fa.offset.clone());
        lp.objective = obj;
        for r in &cell.region.rows {
            let mut a = r.a.clone();
            a.push(-&r.b);
            lp.le.push((a, Rat::zero()));
        }
        let mut norm = ga.grad.clone();
        norm.push(ga.offset.clone());
        lp.eq.push((norm, Rat::one()));
        match lp.maximize() {
            LpOutcome::Optimal { value, .. } => {
                let c = ceil(&value);
                if c > best {
                    best = c;
                }
            }
            LpOutcome::Unbounded { point, ray } => {
                let dt = ray[n].clone();
                if dt.is_positive() {
                    let q: Vec<Rat> = ray[..n].iter().map(|y| y / &dt).collect();
                    return Ok(Domination::Fails {
                        witness: Witness {
                            point: q,
                            direction: vec![Rat::zero(); n],
                        },
                    });
                }
                let t0 = point[n].clone();
                let base = if t0.is_positive() {
                    point[..n].iter().map(|y| y / &t0).collect()
                } else {
                    cell.interior.clone()
                };
                return Ok(Domination::Fails {
                    witness: ray_witness(base, ray[..n].to_vec(), fa, ga),
                });
            }
            LpOutcome::Infeasible => {
                // G vanishes on the whole cell, so F must as well.
                match cell.region.maximize(fa) {
                    LpOutcome::Optimal { point, value } => {
                        if value.is_positive() {
                            return Ok(Domination::Fails {
                                witness: Witness {
                                    point,
                                    direction: vec![Rat::zero(); n],
                                },
                            });
                        }
                    }
                    LpOutcome::Unbounded { point, ray } => {
                        return Ok(Domination::Fails {
                            witness: ray_witness(point, ray, fa, ga),
                        });
                    }
                    LpOutcome::Infeasible => {}
                }
            }
        }
    }
    Ok(Domination::Dominates { n: best })
}

/// A finite union of polyhedra.
#[derive(Debug, Clone, Serialize)]
pub struct CellComplex {
    pub n: usize,
    pub pieces: Vec<Polyhedron>,
}

impl CellComplex {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, p: &[Rat]) -> bool {
        self.pieces.iter().any(|c| c.contains(p))
    }

    /// Whether some piece has nonempty interior in `ℚⁿ`.
    pub fn has_full_dimensional_piece(&self) -> bool {
        self.pieces.iter().any(|p| p.eqs.is_empty() && p.interior_point().is_some())
    }

    /// Maximum dimension over pieces.
    pub fn dimension(&self) -> Option<usize> {
        self.pieces.iter().filter_map(Polyhedron::dimension).max()
    }

    /// Drops pieces contained in other pieces.
    pub fn reduced(self) -> CellComplex {
        let mut kept: Vec<Polyhedron> = Vec::new();
        for p in self.pieces {
            if kept.iter().any(|k| p.subset_of(k)) {
                continue;
            }
            kept.retain(|k| !k.subset_of(&p));
            kept.push(p);
        }
        CellComplex { n: self.n, pieces: kept }
    }
}

/// Zero set of a PL function, one piece per cell meeting `{form = 0}`.
pub fn zero_set(f: &PlFunction) -> CellComplex {
    let mut pieces = Vec::new();
    for c in &f.cells {
        if c.form.is_zero() {
            pieces.push(c.region.clone());
            continue;
        }
        if c.form.is_constant() {
            continue;
        }
        let mut p = c.region.clone();
        p.push_eq(Halfspace::new(c.form.grad.clone(), -&c.form.offset));
        if !p.is_empty() {
            pieces.push(p);
        }
    }
    CellComplex { n: f.n, pieces }.reduced()
}

/// `Skel(f) = {p : f(p) ≅ν 1}`.
pub fn skeleton(f: &RationalFunction) -> CellComplex {
    zero_set(&PlFunction::from_rational(f))
}

/// Exact positive infimum of `|f|`, or `None` when it is zero.
pub fn lower_bound(f: &RationalFunction) -> Option<Rat> {
    let v = PlFunction::from_rational(f).inf_abs();
    if v.is_positive() {
        Some(v)
    } else {
        None
    }
}
