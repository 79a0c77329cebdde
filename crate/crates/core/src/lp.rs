//! Exact two-phase simplex over the rationals.
//!
//! Pivoting follows Bland's rule (lowest eligible index enters, ties in the
//! ratio test broken by lowest basic index), so the method terminates on
//! degenerate problems without any perturbation. Problems here have a handful
//! of variables and a few dozen rows, so the simplex runs on the dual
//! `min b·y, Aᵀy = c, y >= 0`, whose tableau has one row per variable.

use num_traits::{One, Signed, Zero};

use std::cmp::Ordering;

use crate::qfast::Q;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Free,
    NonNeg,
}

/// `maximize objective·x` subject to `le` rows (`a·x <= b`) and `eq` rows (`a·x = b`).
#[derive(Debug, Clone)]
pub struct Lp {
    pub kinds: Vec<VarKind>,
    pub objective: Vec<Rat>,
    pub le: Vec<(Vec<Rat>, Rat)>,
    pub eq: Vec<(Vec<Rat>, Rat)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { point: Vec<Rat>, value: Rat },
    /// `point` is feasible and `point + t·ray` stays feasible for all `t >= 0`
    /// while the objective grows without bound along `ray`.
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
    Infeasible,
}

impl Lp {
    pub fn free(nvars: usize) -> Self {
        Lp {
            kinds: vec![VarKind::Free; nvars],
            objective: vec![Rat::zero(); nvars],
            le: Vec::new(),
            eq: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.kinds.len()
    }

    pub fn maximize(&self) -> LpOutcome {
        let (a, b) = self.inequalities();
        solve(&a, &b, &self.objective)
    }

    /// Everything as `a·x <= b` over free variables.
    fn inequalities(&self) -> (Vec<Vec<Rat>>, Vec<Rat>) {
        let d = self.nvars();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, rhs) in &self.le {
            a.push(row.clone());
            b.push(rhs.clone());
        }
        for (row, rhs) in &self.eq {
            a.push(row.clone());
            b.push(rhs.clone());
            a.push(row.iter().map(|x| -x).collect());
            b.push(-rhs);
        }
        for (j, k) in self.kinds.iter().enumerate() {
            if *k == VarKind::NonNeg {
                let mut row = vec![Rat::zero(); d];
                row[j] = -Rat::one();
                a.push(row);
                b.push(Rat::zero());
            }
        }
        (a, b)
    }
}

/// `max c·x` s.t. `A x <= b`, `x` free.
fn solve(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> LpOutcome {
    let d = c.len();
    let mut t = Dual::build(a, c);
    let m = t.m;
    // Phase 1: minimize the sum of artificials.
    let mut cost = vec![Q::zero(); m + d];
    for x in &mut cost[m..] {
        *x = Q::one();
    }
    let mut obj = t.reduced(&cost);
    let _ = t.iterate(&mut obj, m + d);
    let residual = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= m)
        .fold(Q::zero(), |acc, (r, _)| acc.add(&t.rows[r][m + d]));
    if residual.is_positive() {
        // The dual is infeasible, so the primal is unbounded or infeasible.
        // The phase 1 multipliers give A r <= 0 with c·r = residual > 0.
        let ray = t.multipliers(&obj, &Q::one());
        let zero = vec![Rat::zero(); d];
        return match solve(a, b, &zero) {
            LpOutcome::Optimal { point, .. } => LpOutcome::Unbounded { point, ray },
            other => other,
        };
    }
    t.drive_out_artificials();
    let mut cost = vec![Q::zero(); m + d];
    for (x, y) in cost.iter_mut().zip(b) {
        *x = Q::from_rat(y);
    }
    let mut obj = t.reduced(&cost);
    if t.iterate(&mut obj, m).is_some() {
        return LpOutcome::Infeasible;
    }
    let point = t.multipliers(&obj, &Q::zero());
    let value = crate::rat::dot(c, &point);
    LpOutcome::Optimal { point, value }
}

/// Tableau of `S Aᵀ y + art = S c` with `S` flipping rows so the right side is nonnegative.
struct Dual {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    signs: Vec<bool>,
    m: usize,
}

impl Dual {
    fn build(a: &[Vec<Rat>], c: &[Rat]) -> Self {
        let (m, d) = (a.len(), c.len());
        let mut rows = Vec::with_capacity(d);
        let mut signs = Vec::with_capacity(d);
        for i in 0..d {
            let neg = c[i].is_negative();
            let mut row = vec![Q::zero(); m + d + 1];
            for (j, aj) in a.iter().enumerate() {
                if !aj[i].is_zero() {
                    row[j] = Q::from_rat(&if neg { -&aj[i] } else { aj[i].clone() });
                }
            }
            row[m + i] = Q::one();
            row[m + d] = Q::from_rat(&c[i].abs());
            rows.push(row);
            signs.push(neg);
        }
        Dual {
            rows,
            basis: (m..m + d).collect(),
            signs,
            m,
        }
    }

    fn width(&self) -> usize {
        self.rows.first().map_or(self.m, |r| r.len() - 1)
    }

    /// Reduced costs `cost - c_B B⁻¹ N`, with minus the objective value in the last slot.
    fn reduced(&self, cost: &[Q]) -> Vec<Q> {
        let mut obj = cost.to_vec();
        obj.push(Q::zero());
        for (r, &j) in self.basis.iter().enumerate() {
            if cost[j].is_zero() {
                continue;
            }
            for (x, y) in obj.iter_mut().zip(&self.rows[r]) {
                if !y.is_zero() {
                    *x = x.sub(&cost[j].mul(y));
                }
            }
        }
        obj
    }

    fn pivot(&mut self, obj: &mut [Q], r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x = x.div(&p);
                }
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row, &prow, c);
            }
        }
        eliminate(obj, &prow, c);
        self.basis[r] = c;
    }

    /// Bland's rule minimization over columns `< limit`. `Some(col)` means unbounded along `col`.
    fn iterate(&mut self, obj: &mut [Q], limit: usize) -> Option<usize> {
        let rhs = self.width();
        loop {
            let entering = (0..limit).find(|&j| obj[j].is_negative());
            let c = entering?;
            let mut best: Option<(usize, Q)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = row[rhs].div(&row[c]);
                let better = match &best {
                    None => true,
                    Some((br, bv)) => match ratio.cmp(bv) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*br],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                None => return Some(c),
                Some((r, _)) => self.pivot(obj, r, c),
            }
        }
    }

    /// Pivots zero-level artificials out wherever a structural entry allows.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        let mut dummy = vec![Q::zero(); self.width() + 1];
        for r in 0..self.rows.len() {
            if self.basis[r] >= m {
                if let Some(c) = (0..m).find(|&j| !self.rows[r][j].is_zero()) {
                    self.pivot(&mut dummy, r, c);
                }
            }
        }
    }

    /// Simplex multipliers `c_B B⁻¹`, read off the artificial columns whose
    /// cost is `art_cost`, mapped back through the row signs.
    fn multipliers(&self, obj: &[Q], art_cost: &Q) -> Vec<Rat> {
        self.signs
            .iter()
            .enumerate()
            .map(|(i, &neg)| {
                let pi = art_cost.sub(&obj[self.m + i]);
                if neg {
                    pi.neg().to_rat()
                } else {
                    pi.to_rat()
                }
            })
            .collect()
    }
}

fn eliminate(row: &mut [Q], prow: &[Q], c: usize) {
    if row[c].is_zero() {
        return;
    }
    let f = row[c].clone();
    for (x, y) in row.iter_mut().zip(prow) {
        if !y.is_zero() {
            *x = x.sub(&f.mul(y));
        }
    }
}
