//! The standard supertropical semifield over `(ℚ, +)`, in logarithmic scale.
//!
//! A scalar is a rational value together with a layer. Tangible scalars form
//! a multiplicative group; ghosts are the image of the ghost map `ν`, which
//! forgets nothing but the layer. The multiplicative unit is the tangible `0`.
//!
//! Addition keeps the operand of strictly larger value and turns ties into
//! ghosts; multiplication adds values and is ghost as soon as one factor is.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rat::{fmt_rat, parse_rat, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Tangible,
    Ghost,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scalar {
    #[serde(with = "crate::rat::serde_rat")]
    pub value: Rat,
    pub layer: Layer,
}

impl Scalar {
    pub fn tangible(value: Rat) -> Self {
        Scalar {
            value,
            layer: Layer::Tangible,
        }
    }

    pub fn ghost(value: Rat) -> Self {
        Scalar {
            value,
            layer: Layer::Ghost,
        }
    }

    /// The multiplicative unit `1` (value `0`).
    pub fn one() -> Self {
        Scalar::tangible(Rat::zero())
    }

    pub fn is_ghost(&self) -> bool {
        self.layer == Layer::Ghost
    }

    /// The ghost map `ν`.
    pub fn nu(&self) -> Self {
        Scalar::ghost(self.value.clone())
    }

    /// `a ⊕ b`.
    pub fn add(&self, other: &Scalar) -> Scalar {
        match self.value.cmp(&other.value) {
            Ordering::Greater => self.clone(),
            Ordering::Less => other.clone(),
            Ordering::Equal => self.nu(),
        }
    }

    /// `a ⊗ b`.
    pub fn mul(&self, other: &Scalar) -> Scalar {
        let layer = if self.is_ghost() || other.is_ghost() {
            Layer::Ghost
        } else {
            Layer::Tangible
        };
        Scalar {
            value: &self.value + &other.value,
            layer,
        }
    }

    /// `a*`: value negated, layer kept. For tangibles this is the inverse.
    pub fn star(&self) -> Scalar {
        Scalar {
            value: -&self.value,
            layer: self.layer,
        }
    }

    /// Compares `ν(a)` with `ν(b)`.
    pub fn nu_cmp(&self, other: &Scalar) -> Ordering {
        self.value.cmp(&other.value)
    }

    /// `a ≅ν b`.
    pub fn nu_eq(&self, other: &Scalar) -> bool {
        self.value == other.value
    }
}

/// Folds `⊕` over a nonempty iterator.
pub fn sum<'a, I: IntoIterator<Item = &'a Scalar>>(it: I) -> Option<Scalar> {
    let mut it = it.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, s| acc.add(s)))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Layer::Tangible => write!(f, "{}", fmt_rat(&self.value)),
            Layer::Ghost => write!(f, "{}~g", fmt_rat(&self.value)),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        match t.strip_suffix("~g") {
            Some(v) => Ok(Scalar::ghost(parse_rat(v)?)),
            None => Ok(Scalar::tangible(parse_rat(t)?)),
        }
    }
}
