//! Elements of the semifield of fractions: quotients of tropical Laurent polynomials.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{LMonomial, Monomial, Polynomial};
use crate::rat::{int, Rat};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Inv,
}

/// `num / den`. Representations are not canonical: two different pairs may
/// define the same function. Functional comparison goes through the
/// polyhedral engine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalFunction {
    pub num: Polynomial,
    pub den: Polynomial,
    pub n: usize,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if num.n() != den.n() {
            return Err(Error::DimensionMismatch {
                expected: num.n(),
                found: den.n(),
            });
        }
        let n = num.n();
        Ok(RationalFunction { num, den, n })
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let n = p.n();
        RationalFunction {
            num: p,
            den: Polynomial::constant(n, Rat::zero()),
            n,
        }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        Self::from_polynomial(Polynomial::constant(n, c))
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rat::zero())
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::from_polynomial(Polynomial::monomial(m))
    }

    /// The variable `x_{i+1}`.
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(LMonomial::var(n, i).into())
    }

    /// `1 + f` for an L-monomial `f`.
    pub fn binomial(f: &LMonomial) -> Self {
        let p = Polynomial::new(
            f.n(),
            vec![Monomial::constant(f.n(), Rat::zero()), f.monomial().clone()],
        )
        .expect("two monomials of equal length");
        Self::from_polynomial(p)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    fn check_point(&self, p: &[Rat]) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        Ok(())
    }

    /// Supertropical value `num(p) ⊗ den(p)*`.
    pub fn eval(&self, p: &[Rat]) -> Result<Scalar> {
        self.check_point(p)?;
        Ok(self.num.eval(p).mul(&self.den.eval(p).star()))
    }

    /// The log-scale value `num(p) - den(p)`; no layer information.
    pub fn value_at(&self, p: &[Rat]) -> Rat {
        self.num.value_at(p) - self.den.value_at(p)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Ok(RationalFunction { num, den, n: self.n })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(RationalFunction {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
            n: self.n,
        })
    }

    pub fn inv(&self) -> Self {
        RationalFunction {
            num: self.den.clone(),
            den: self.num.clone(),
            n: self.n,
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv())
    }

    pub fn arith(op: ArithOp, f: &Self, g: Option<&Self>) -> Result<Self> {
        match (op, g) {
            (ArithOp::Inv, None) => Ok(f.inv()),
            (ArithOp::Add, Some(g)) => f.add(g),
            (ArithOp::Mul, Some(g)) => f.mul(g),
            (ArithOp::Inv, Some(_)) => Err(Error::Invalid("inv takes one argument".into())),
            (_, None) => Err(Error::Invalid("add/mul take two arguments".into())),
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        RationalFunction {
            num: base.num.pow(e),
            den: base.den.pow(e),
            n: self.n,
        }
    }

    /// `|f| = f + f⁻¹`, written as `(h² + g²) / (h g)` for `f = h / g`.
    ///
    /// Squares are taken monomial-wise: `(Σ h_i)² ` and `Σ h_i²` agree as functions.
    pub fn abs(&self) -> Self {
        let sq = |p: &Polynomial| {
            Polynomial::new(p.n(), p.terms().iter().map(|t| t.pow(2)).collect())
                .expect("nonempty")
        };
        RationalFunction {
            num: sq(&self.num).add(&sq(&self.den)),
            den: self.num.mul(&self.den),
            n: self.n,
        }
    }

    /// Lattice infimum `f ∧ g = (f* + g*)*`.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        Ok(self.inv().add(&other.inv())?.inv())
    }

    /// Removes monomials that are nowhere the unique maximum of their side.
    pub fn simplified(&self) -> Self {
        RationalFunction {
            num: self.num.pruned(),
            den: self.den.pruned(),
            n: self.n,
        }
    }

    pub fn monomial_count(&self) -> usize {
        self.num.len() + self.den.len()
    }

    /// Sum `Σ |f_i|` of absolute values.
    pub fn sum_abs<'a, I: IntoIterator<Item = &'a RationalFunction>>(n: usize, items: I) -> Result<Self> {
        let mut acc: Option<RationalFunction> = None;
        for f in items {
            let a = f.abs().simplified();
            acc = Some(match acc {
                None => a,
                Some(s) => s.add(&a)?.simplified(),
            });
        }
        acc.map_or_else(|| Ok(Self::one(n)), Ok)
    }

    pub fn from_lmonomial(l: &LMonomial) -> Self {
        Self::monomial(l.monomial().clone())
    }

    /// The constant `α` with value `v`.
    pub fn scalar(n: usize, v: i64) -> Self {
        Self::constant(n, int(v))
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den_is_one = self.den.len() == 1
            && self.den.terms()[0].is_constant()
            && self.den.terms()[0].coeff.is_zero();
        if den_is_one {
            if self.num.len() == 1 {
                write!(f, "{}", self.num)
            } else {
                write!(f, "({})", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;
    use crate::scalar::Layer;

    fn x(n: usize, i: usize) -> RationalFunction {
        RationalFunction::var(n, i)
    }

    #[test]
    fn eval_examples() {
        let f = x(2, 0).add(&x(2, 1)).unwrap();
        assert_eq!(f.eval(&[int(3), int(5)]).unwrap(), Scalar::tangible(int(5)));
        assert_eq!(f.eval(&[int(3), int(3)]).unwrap(), Scalar::ghost(int(3)));
        assert_eq!(x(2, 0).eval(&[int(0), int(7)]).unwrap(), Scalar::one());
        assert!(matches!(
            f.eval(&[int(1)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn inverse_and_cancellation() {
        let f = x(1, 0).inv();
        assert_eq!(f.eval(&[int(2)]).unwrap(), Scalar::tangible(int(-2)));
        let one = x(1, 0).mul(&x(1, 0).inv()).unwrap();
        for k in -4..4 {
            assert_eq!(one.value_at(&[frac(k, 3)]), int(0));
        }
    }

    #[test]
    fn abs_examples() {
        assert_eq!(RationalFunction::one(2).abs().value_at(&[int(4), int(-1)]), int(0));
        assert_eq!(x(1, 0).abs().value_at(&[int(-3)]), int(3));
        let y1 = x(2, 1).add(&RationalFunction::one(2)).unwrap();
        let a = y1.abs();
        for (p, q) in [(-3, 1), (0, 2), (5, -7), (1, 1)] {
            let pt = [int(p), int(q)];
            assert_eq!(a.value_at(&pt), y1.value_at(&pt));
        }
    }

    #[test]
    fn meet_examples() {
        let m = x(2, 0).abs().meet(&x(2, 1).abs()).unwrap();
        assert_eq!(m.value_at(&[int(2), int(5)]), int(2));
        let mm = x(2, 0).meet(&x(2, 0)).unwrap();
        assert_eq!(mm.value_at(&[int(-2), int(9)]), int(-2));
    }

    #[test]
    fn arith_dispatch() {
        let f = x(1, 0);
        assert_eq!(RationalFunction::arith(ArithOp::Inv, &f, None).unwrap(), f.inv());
        assert!(RationalFunction::arith(ArithOp::Add, &f, None).is_err());
        assert!(RationalFunction::arith(ArithOp::Mul, &f, Some(&x(2, 0))).is_err());
    }

    #[test]
    fn ghost_layer_from_denominator() {
        let den = x(2, 0).add(&x(2, 1)).unwrap();
        let f = RationalFunction::one(2).div(&den).unwrap();
        assert_eq!(f.eval(&[int(1), int(1)]).unwrap().layer, Layer::Ghost);
    }
}
