//! Random instances for property suites and the CLI self-test.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::kernel::{generator_of_set, product_all, PrincipalKernel};
use crate::pl::skeleton;
use crate::poly::{LMonomial, Monomial, Polynomial};
use crate::rat::{frac, int, Rat};
use crate::rational::RationalFunction;

pub fn lmonomial<R: Rng>(rng: &mut R, n: usize, exp: i64, coeff: i64) -> LMonomial {
    loop {
        let exps: Vec<i64> = (0..n).map(|_| rng.gen_range(-exp..=exp)).collect();
        if let Ok(l) = LMonomial::new(int(rng.gen_range(-coeff..=coeff)), exps) {
            return l;
        }
    }
}

pub fn polynomial<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> Polynomial {
    let k = rng.gen_range(1..=max_terms);
    let terms = (0..k)
        .map(|_| {
            let exps = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            Monomial::new(int(rng.gen_range(-3..=3)), exps)
        })
        .collect();
    Polynomial::new(n, terms).expect("nonempty")
}

/// `num / den` with at most `max_terms` monomials per side, pruned.
pub fn function<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> RationalFunction {
    RationalFunction::new(polynomial(rng, n, max_terms), polynomial(rng, n, max_terms))
        .expect("same n")
        .simplified()
}

/// `|g|` for a random `g`, retried until the skeleton is nonempty and the
/// pruned representation has at most `cap` monomials.
pub fn positive_with_skeleton<R: Rng>(rng: &mut R, n: usize, max_terms: usize, cap: usize) -> RationalFunction {
    loop {
        let g = function(rng, n, max_terms);
        let f = g.abs().simplified();
        if f.monomial_count() > cap {
            continue;
        }
        if !skeleton(&f).is_empty() {
            return f;
        }
    }
}

/// L-monomials vanishing at a common random integer point, so the HS-kernel they
/// generate has a nonempty skeleton.
pub fn hs_generators<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<LMonomial> {
    let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    (0..count)
        .map(|_| loop {
            let exps: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            let c: i64 = -exps.iter().zip(&a).map(|(e, x)| e * x).sum::<i64>();
            if let Ok(l) = LMonomial::new(int(c), exps) {
                break l;
            }
        })
        .collect()
}

pub fn hs_kernel<R: Rng>(rng: &mut R, n: usize, count: usize) -> (PrincipalKernel, Vec<LMonomial>) {
    let gens = hs_generators(rng, n, count);
    let s: Vec<RationalFunction> = gens.iter().map(RationalFunction::from_lmonomial).collect();
    (generator_of_set(&s).expect("nonempty"), gens)
}

/// Product of `k` order kernels `⟨1 + h⟩`.
pub fn region_kernel<R: Rng>(rng: &mut R, n: usize, k: usize) -> (PrincipalKernel, Vec<LMonomial>) {
    let hs: Vec<LMonomial> = (0..k).map(|_| lmonomial(rng, n, 2, 3)).collect();
    let ks: Vec<PrincipalKernel> = hs.iter().map(PrincipalKernel::order).collect();
    (product_all(&ks).expect("nonempty"), hs)
}

/// Random rational point with small numerators and denominators.
pub fn point<R: Rng>(rng: &mut R, n: usize, radius: i64) -> Vec<Rat> {
    (0..n)
        .map(|_| frac(rng.gen_range(-radius * 6..=radius * 6), [1, 2, 3, 6][rng.gen_range(0..4)]))
        .collect()
}

pub fn shuffled<T: Clone, R: Rng>(rng: &mut R, v: &[T]) -> Vec<T> {
    let mut w = v.to_vec();
    w.shuffle(rng);
    w
}
