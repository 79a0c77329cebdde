//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Exact rational number. All arithmetic in the crate goes through this type.
pub type Rat = BigRational;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-1.25`.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let t = s.trim();
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("invalid rational `{s}`"),
    };
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip_abs.is_empty() {
            BigInt::zero()
        } else {
            ip_abs.parse().map_err(|_| bad())?
        };
        let frac_part: BigInt = fp.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Rat::new(whole * &scale + frac_part, scale);
        return Ok(if neg { -v } else { v });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(p))
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(a: &[i64], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .filter(|(x, _)| **x != 0)
        .map(|(x, y)| y * BigInt::from(*x))
        .sum()
}

/// Smallest integer `>= r`.
pub fn ceil(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

/// Scales a rational vector to the primitive integer vector with the same direction.
/// Returns the integer vector together with the positive factor applied.
pub fn primitive(v: &[Rat]) -> (Vec<BigInt>, Rat) {
    let mut l = BigInt::one();
    for x in v {
        l = num_integer::lcm(l, x.denom().clone());
    }
    let scaled: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &scaled {
        g = num_integer::gcd(g, x.abs());
    }
    if g.is_zero() {
        return (scaled, Rat::one());
    }
    let out = scaled.iter().map(|x| x / &g).collect();
    (out, Rat::new(l, g))
}

/// Rank of a rational matrix (rows), by Gaussian elimination.
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    echelon(rows).len()
}

/// Row-reduces `rows` and returns the nonzero echelon rows.
pub fn echelon(rows: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut r0 = 0;
    for c in 0..cols {
        let Some(p) = (r0..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(r0, p);
        let pivot = m[r0][c].clone();
        for x in m[r0].iter_mut() {
            *x /= &pivot;
        }
        for r in 0..m.len() {
            if r != r0 && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in c..cols {
                    let d = &f * &m[r0][k];
                    m[r][k] -= d;
                }
            }
        }
        r0 += 1;
        if r0 == m.len() {
            break;
        }
    }
    for row in m.into_iter().take(r0) {
        out.push(row);
    }
    out
}

pub fn int_rows(rows: &[Vec<i64>]) -> Vec<Vec<Rat>> {
    rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

pub mod serde_rat {
    //! Serializes a [`Rat`](super::Rat) as its canonical string.
    use super::{fmt_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rat_vec {
    use super::{fmt_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(fmt_rat).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
