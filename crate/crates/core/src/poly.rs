//! Tropical Laurent monomials and polynomials with tangible rational coefficients.
//!
//! In logarithmic scale a monomial `c·λ^e` is the affine function `p ↦ c + ⟨e, p⟩`
//! and a polynomial is the pointwise maximum of its monomials.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Lp, LpOutcome};
use crate::rat::{dot_int, int, Rat};
use crate::scalar::{Layer, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(rename = "c", with = "crate::rat::serde_rat")]
    pub coeff: Rat,
    #[serde(rename = "e")]
    pub exps: Vec<i64>,
}

impl Monomial {
    pub fn new(coeff: Rat, exps: Vec<i64>) -> Self {
        Monomial { coeff, exps }
    }

    pub fn constant(n: usize, coeff: Rat) -> Self {
        Monomial {
            coeff,
            exps: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// `c + ⟨e, p⟩`.
    pub fn value_at(&self, p: &[Rat]) -> Rat {
        &self.coeff + dot_int(&self.exps, p)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            coeff: &self.coeff + &other.coeff,
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            coeff: -&self.coeff,
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Monomial {
        Monomial {
            coeff: &self.coeff * BigInt::from(k),
            exps: self.exps.iter().map(|e| e * k).collect(),
        }
    }

    /// Gradient of the affine function as rationals.
    pub fn grad(&self) -> Vec<Rat> {
        self.exps.iter().map(|&e| int(e)).collect()
    }
}

fn fmt_factors(f: &mut fmt::Formatter<'_>, coeff: &Rat, exps: &[i64]) -> fmt::Result {
    let mut parts = Vec::new();
    if !coeff.is_zero() || exps.iter().all(|&e| e == 0) {
        parts.push(crate::expr::fmt_numeral(coeff));
    }
    for (i, &e) in exps.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    write!(f, "{}", parts.join("*"))
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_factors(f, &self.coeff, &self.exps)
    }
}

/// A non-constant Laurent monomial with tangible coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Monomial", into = "Monomial")]
pub struct LMonomial(Monomial);

impl LMonomial {
    pub fn new(coeff: Rat, exps: Vec<i64>) -> Result<Self> {
        let m = Monomial::new(coeff, exps);
        if m.is_constant() {
            return Err(Error::ConstantMonomial);
        }
        Ok(LMonomial(m))
    }

    /// `λ_i / a_i` in multiplicative notation, i.e. `x_i - a_i` in log scale.
    pub fn shifted_var(n: usize, i: usize, at: &Rat) -> Self {
        let mut exps = vec![0; n];
        exps[i] = 1;
        LMonomial(Monomial::new(-at, exps))
    }

    pub fn var(n: usize, i: usize) -> Self {
        Self::shifted_var(n, i, &Rat::zero())
    }

    pub fn coeff(&self) -> &Rat {
        &self.0.coeff
    }

    pub fn exps(&self) -> &[i64] {
        &self.0.exps
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn monomial(&self) -> &Monomial {
        &self.0
    }

    pub fn value_at(&self, p: &[Rat]) -> Rat {
        self.0.value_at(p)
    }

    pub fn inv(&self) -> LMonomial {
        LMonomial(self.0.inv())
    }

    /// Orientation with the first nonzero exponent positive.
    pub fn normalized(&self) -> LMonomial {
        let first = self.0.exps.iter().find(|&&e| e != 0).copied().unwrap_or(1);
        if first < 0 {
            self.inv()
        } else {
            self.clone()
        }
    }

    pub fn exps_rat(&self) -> Vec<Rat> {
        self.0.grad()
    }
}

impl TryFrom<Monomial> for LMonomial {
    type Error = Error;
    fn try_from(m: Monomial) -> Result<Self> {
        LMonomial::new(m.coeff, m.exps)
    }
}

impl From<LMonomial> for Monomial {
    fn from(l: LMonomial) -> Monomial {
        l.0
    }
}

impl fmt::Display for LMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Tropical Laurent polynomial: a nonempty set of monomials with distinct exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    /// Builds a polynomial, merging equal exponents by maximum coefficient.
    pub fn new(n: usize, terms: Vec<Monomial>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(t) = terms.iter().find(|t| t.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.n(),
            });
        }
        Ok(Self::merged(n, terms))
    }

    fn merged(n: usize, mut terms: Vec<Monomial>) -> Self {
        terms.sort_by(|a, b| a.exps.cmp(&b.exps).then_with(|| b.coeff.cmp(&a.coeff)));
        terms.dedup_by(|later, earlier| later.exps == earlier.exps);
        Polynomial { n, terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        Polynomial {
            n: m.n(),
            terms: vec![m],
        }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        Self::monomial(Monomial::constant(n, c))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value `max_i (c_i + ⟨e_i, p⟩)`.
    pub fn value_at(&self, p: &[Rat]) -> Rat {
        self.terms
            .iter()
            .map(|t| t.value_at(p))
            .max()
            .expect("nonempty polynomial")
    }

    /// Supertropical evaluation: ghost when two or more monomials attain the maximum.
    pub fn eval(&self, p: &[Rat]) -> Scalar {
        let vals: Vec<Rat> = self.terms.iter().map(|t| t.value_at(p)).collect();
        let max = vals.iter().max().expect("nonempty polynomial").clone();
        let ties = vals.iter().filter(|v| **v == max).count();
        Scalar {
            value: max,
            layer: if ties > 1 { Layer::Ghost } else { Layer::Tangible },
        }
    }

    /// Indices of monomials attaining the maximum at `p`.
    pub fn argmax(&self, p: &[Rat]) -> Vec<usize> {
        let vals: Vec<Rat> = self.terms.iter().map(|t| t.value_at(p)).collect();
        let max = vals.iter().max().expect("nonempty polynomial");
        (0..vals.len()).filter(|&i| vals[i] == *max).collect()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::merged(self.n, terms)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        Self::merged(self.n, terms)
    }

    /// Multiplies every monomial by `m`.
    pub fn shift(&self, m: &Monomial) -> Polynomial {
        Self::merged(self.n, self.terms.iter().map(|t| t.mul(m)).collect())
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.n, Rat::zero());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Indices of monomials that are the unique maximum somewhere.
    ///
    /// A monomial that never strictly exceeds all others can be dropped without
    /// changing the function. Decided by one LP per monomial.
    pub fn strict_indices(&self) -> Vec<usize> {
        self.strict_points().into_iter().map(|(i, _)| i).collect()
    }

    /// Like [`Self::strict_indices`], with a point where each monomial is the
    /// unique maximum when the LP produced one.
    pub fn strict_points(&self) -> Vec<(usize, Option<Vec<Rat>>)> {
        if self.terms.len() == 1 {
            return vec![(0, Some(vec![Rat::zero(); self.n]))];
        }
        (0..self.terms.len())
            .filter_map(|i| self.strictly_dominant_somewhere(i).map(|p| (i, p)))
            .collect()
    }

    /// `None` if monomial `i` is nowhere the unique maximum.
    fn strictly_dominant_somewhere(&self, i: usize) -> Option<Option<Vec<Rat>>> {
        let n = self.n;
        let me = &self.terms[i];
        let mut lp = Lp::free(n + 1);
        lp.objective[n] = int(1);
        for (j, t) in self.terms.iter().enumerate() {
            if j == i {
                continue;
            }
            // (t - me)(p) + eps <= 0
            let mut a: Vec<Rat> = t.exps.iter().zip(&me.exps).map(|(x, y)| int(x - y)).collect();
            a.push(int(1));
            lp.le.push((a, &me.coeff - &t.coeff));
        }
        let mut cap = vec![Rat::zero(); n + 1];
        cap[n] = int(1);
        lp.le.push((cap, int(1)));
        match lp.maximize() {
            LpOutcome::Optimal { value, mut point } if value.is_positive() => {
                point.truncate(n);
                Some(Some(point))
            }
            LpOutcome::Optimal { .. } | LpOutcome::Infeasible => None,
            LpOutcome::Unbounded { .. } => Some(None),
        }
    }

    /// Drops monomials that are nowhere the unique maximum.
    pub fn pruned(&self) -> Polynomial {
        let keep = self.strict_indices();
        Polynomial {
            n: self.n,
            terms: keep.into_iter().map(|i| self.terms[i].clone()).collect(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn m(c: i64, e: &[i64]) -> Monomial {
        Monomial::new(int(c), e.to_vec())
    }

    #[test]
    fn merges_equal_exponents_by_max() {
        let p = Polynomial::new(1, vec![m(1, &[1]), m(3, &[1]), m(0, &[0])]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.terms()[1], m(3, &[1]));
    }

    #[test]
    fn evaluation_and_ghosts() {
        let p = Polynomial::new(2, vec![m(0, &[1, 0]), m(0, &[0, 1])]).unwrap();
        assert_eq!(p.eval(&[int(3), int(5)]), Scalar::tangible(int(5)));
        assert_eq!(p.eval(&[int(3), int(3)]), Scalar::ghost(int(3)));
    }

    #[test]
    fn pruning_drops_cross_terms() {
        // (x + 1)^2 = x^2 + x + 1 with x never strictly dominant
        let p = Polynomial::new(1, vec![m(0, &[1]), m(0, &[0])]).unwrap();
        let sq = p.mul(&p);
        assert_eq!(sq.len(), 3);
        let pr = sq.pruned();
        assert_eq!(pr.len(), 2);
        for k in -5..5 {
            let x = [frac(k, 2)];
            assert_eq!(pr.value_at(&x), sq.value_at(&x));
        }
    }

    #[test]
    fn lmonomial_rejects_constants() {
        assert_eq!(LMonomial::new(int(1), vec![0, 0]), Err(Error::ConstantMonomial));
        let l = LMonomial::new(int(2), vec![-1, 3]).unwrap();
        assert_eq!(l.normalized().exps(), &[1, -3]);
    }
}
