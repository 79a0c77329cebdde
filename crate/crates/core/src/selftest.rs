//! Randomized property suites behind `supertrop selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ho::ho_decompose;
use crate::kernel::{intersect, intersect_all, kernel_equal, product, PrincipalKernel};
use crate::matroid::{basis_of, condeg, convexly_dependent, random_chain, HpSet};
use crate::pl::{dominates, Domination, PlFunction};
use crate::rat::{int, Rat};
use crate::{random, Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// First few failure messages.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<()>;

const SUITES: &[(&str, Check)] = &[
    ("domination", domination),
    ("dependence", dependence),
    ("basis", basis),
    ("lattice", lattice),
    ("chains", chains),
    ("decomposition", decomposition),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs every suite (or those named in `only`) for `trials` instances each.
/// Each suite gets its own stream derived from `seed`.
pub fn run(seed: u64, trials: usize, only: &[String]) -> Vec<SuiteReport> {
    let mut out = Vec::new();
    for (i, (name, check)) in SUITES.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut rep = SuiteReport { name, passed: 0, failed: 0, failures: Vec::new() };
        for t in 0..trials {
            match check(&mut rng) {
                Ok(()) => rep.passed += 1,
                Err(e) => {
                    rep.failed += 1;
                    if rep.failures.len() < 5 {
                        rep.failures.push(format!("trial {t}: {e}"));
                    }
                }
            }
        }
        out.push(rep);
    }
    out
}

fn fail(msg: impl Into<String>) -> Error {
    Error::Certification(msg.into())
}

fn domination(rng: &mut ChaCha8Rng) -> Result<()> {
    let n = rng.gen_range(1..=3);
    let f = random::function(rng, n, 3).abs();
    let g = random::function(rng, n, 3).abs();
    let g = if rng.gen_bool(0.5) { f.add(&g)?.simplified() } else { g };
    match dominates(&PlFunction::from_rational(&f), &PlFunction::from_rational(&g))? {
        Domination::Dominates { n: big } => {
            let big = Rat::from_integer(big);
            for _ in 0..50 {
                let p = random::point(rng, n, 6);
                if f.value_at(&p) > g.value_at(&p) * &big {
                    return Err(fail(format!("bound {big} violated at {p:?}")));
                }
            }
        }
        Domination::Fails { witness } => {
            for t in [1, 10, 100] {
                let q = witness.at(&int(t));
                if f.value_at(&q) <= g.value_at(&q) * int(10) {
                    return Err(fail(format!("witness does not separate at t = {t}")));
                }
            }
        }
    }
    Ok(())
}

fn dependence(rng: &mut ChaCha8Rng) -> Result<()> {
    let n = rng.gen_range(1..=3);
    let size = rng.gen_range(0..=4);
    let a = HpSet::new(n, (0..size).map(|_| random::lmonomial(rng, n, 3, 5)).collect())?;
    convexly_dependent(&random::lmonomial(rng, n, 3, 5), &a, None).map(|_| ())
}

fn basis(rng: &mut ChaCha8Rng) -> Result<()> {
    let n = rng.gen_range(1..=3);
    let size = rng.gen_range(1..=5);
    let a = HpSet::new(n, (0..size).map(|_| random::lmonomial(rng, n, 3, 5)).collect())?;
    let want = condeg(&a);
    for _ in 0..5 {
        let b = basis_of(&HpSet::new(n, random::shuffled(rng, &a.elems))?);
        if b.len() != want {
            return Err(fail(format!("basis of size {} but condeg {want}", b.len())));
        }
    }
    Ok(())
}

fn lattice(rng: &mut ChaCha8Rng) -> Result<()> {
    let n = rng.gen_range(1..=2);
    let fa = random::function(rng, n, 3);
    let fb = random::function(rng, n, 3);
    let (a, b) = (PrincipalKernel::new(&fa), PrincipalKernel::new(&fb));
    let checks = [
        ("absorption", kernel_equal(&intersect(&a, &product(&a, &b)?)?, &a)?),
        ("absorption", kernel_equal(&product(&a, &intersect(&a, &b)?)?, &a)?),
        ("power", kernel_equal(&a, &PrincipalKernel::new(&fa.pow(2)))?),
        ("commutativity", kernel_equal(&intersect(&a, &b)?, &intersect(&b, &a)?)?),
    ];
    match checks.iter().find(|c| !c.1) {
        Some((name, _)) => Err(fail(format!("{name} fails for {fa} and {fb}"))),
        None => Ok(()),
    }
}

fn chains(rng: &mut ChaCha8Rng) -> Result<()> {
    let n = rng.gen_range(1..=3);
    let count = rng.gen_range(1..=3);
    let (l, gens) = random::hs_kernel(rng, n, count);
    let want = condeg(&HpSet::new(n, gens)?);
    for _ in 0..3 {
        let c = random_chain(&l, rng)?;
        if c.length != want {
            return Err(fail(format!("chain of length {} but condeg {want}", c.length)));
        }
    }
    Ok(())
}

fn decomposition(rng: &mut ChaCha8Rng) -> Result<()> {
    let f = random::positive_with_skeleton(rng, 2, 2, 12);
    let d = ho_decompose(&f, 12)?;
    if !kernel_equal(&intersect_all(&d.parts())?, &PrincipalKernel::new(&f))? {
        return Err(fail(format!("parts do not intersect to <{f}>")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_reproducible() {
        let a = run(3, 3, &[]);
        assert_eq!(a.len(), SUITES.len());
        assert!(a.iter().all(SuiteReport::ok), "{a:?}");
        let b = run(3, 3, &["basis".to_string()]);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].passed, 3);
    }
}
