//! Rationals with an `i64` fast path for the simplex tableau.
//!
//! Values stay `Small` while numerator and denominator fit in `i64`
//! (products are formed in `i128`); anything larger falls back to `Rat`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Q {
    /// Reduced, denominator positive.
    Small(i64, i64),
    Big(Rat),
}

impl Q {
    pub fn zero() -> Q {
        Q::Small(0, 1)
    }

    pub fn one() -> Q {
        Q::Small(1, 1)
    }

    pub fn from_rat(r: &Rat) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(p), Some(q)) => Q::Small(p, q),
            _ => Q::Big(r.clone()),
        }
    }

    pub fn to_rat(&self) -> Rat {
        match self {
            Q::Small(p, q) => Rat::new_raw(BigInt::from(*p), BigInt::from(*q)),
            Q::Big(r) => r.clone(),
        }
    }

    fn big(&self) -> Rat {
        self.to_rat()
    }

    /// Reduces `p/q` (`q != 0`) and demotes to `Small` when it fits.
    fn reduce(p: i128, q: i128) -> Q {
        if q == 1 {
            if let Ok(a) = i64::try_from(p) {
                return Q::Small(a, 1);
            }
        }
        if let (Ok(a), Ok(b)) = (i64::try_from(p), i64::try_from(q)) {
            if a != i64::MIN && b != i64::MIN {
                let g = a.gcd(&b);
                let (mut a, mut b) = (a / g, b / g);
                if b < 0 {
                    a = -a;
                    b = -b;
                }
                return Q::Small(a, b);
            }
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        match (i64::try_from(p), i64::try_from(q)) {
            (Ok(a), Ok(b)) => Q::Small(a, b),
            _ => Q::Big(Rat::new_raw(BigInt::from(p), BigInt::from(q))),
        }
    }

    fn demote(r: Rat) -> Q {
        Q::from_rat(&r)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::Small(p, _) => *p == 0,
            Q::Big(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Q::Small(1, 1))
    }

    pub fn signum(&self) -> i32 {
        match self {
            Q::Small(p, _) => p.signum() as i32,
            Q::Big(r) => {
                if r.is_positive() {
                    1
                } else if r.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn neg(&self) -> Q {
        match self {
            Q::Small(p, q) if *p != i64::MIN => Q::Small(-p, *q),
            _ => Q::demote(-self.big()),
        }
    }

    pub fn add(&self, o: &Q) -> Q {
        if let (Q::Small(a, b), Q::Small(c, d)) = (self, o) {
            if *b == 1 && *d == 1 {
                if let Some(s) = a.checked_add(*c) {
                    return Q::Small(s, 1);
                }
            }
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            if b == d {
                return Q::reduce(a + c, b);
            }
            if let (Some(x), Some(y)) = (a.checked_mul(d), c.checked_mul(b)) {
                if let (Some(n), Some(m)) = (x.checked_add(y), b.checked_mul(d)) {
                    return Q::reduce(n, m);
                }
            }
        }
        Q::demote(self.big() + o.big())
    }

    pub fn sub(&self, o: &Q) -> Q {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Q) -> Q {
        if let (Q::Small(a, b), Q::Small(c, d)) = (self, o) {
            if *a == 0 || *c == 0 {
                return Q::zero();
            }
            if *b == 1 && *d == 1 {
                if let Some(m) = a.checked_mul(*c) {
                    return Q::Small(m, 1);
                }
            }
            return Q::reduce(*a as i128 * *c as i128, *b as i128 * *d as i128);
        }
        Q::demote(self.big() * o.big())
    }

    pub fn div(&self, o: &Q) -> Q {
        if let (Q::Small(a, b), Q::Small(c, d)) = (self, o) {
            assert!(*c != 0, "division by zero");
            return Q::reduce(*a as i128 * *d as i128, *b as i128 * *c as i128);
        }
        Q::demote(self.big() / o.big())
    }

    pub fn cmp(&self, o: &Q) -> Ordering {
        if let (Q::Small(a, b), Q::Small(c, d)) = (self, o) {
            return (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128));
        }
        self.big().cmp(&o.big())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }

    proptest! {
        #[test]
        fn agrees_with_bigrational(
            a in any::<i64>(), b in 1i64..=i64::MAX, c in any::<i64>(), d in 1i64..=i64::MAX,
        ) {
            let (x, y) = (rat(a, b), rat(c, d));
            let (qx, qy) = (Q::from_rat(&x), Q::from_rat(&y));
            prop_assert_eq!(qx.add(&qy).to_rat(), &x + &y);
            prop_assert_eq!(qx.sub(&qy).to_rat(), &x - &y);
            prop_assert_eq!(qx.mul(&qy).to_rat(), &x * &y);
            prop_assert_eq!(qx.cmp(&qy), x.cmp(&y));
            if !y.is_zero() {
                prop_assert_eq!(qx.div(&qy).to_rat(), &x / &y);
            }
            prop_assert_eq!(qx.neg().to_rat(), -x);
        }

        #[test]
        fn small_values_stay_small(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let s = Q::from_rat(&rat(a, b)).mul(&Q::from_rat(&rat(c, d)));
            prop_assert!(matches!(s, Q::Small(..)));
        }
    }
}
