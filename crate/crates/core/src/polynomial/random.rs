use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Monomial, MultilinearPoly};
use crate::error::{Error, Result};
use crate::montecarlo::seeded_rng;

/// Stream id reserved for test-corpus generation.
const RANDOM_POLY_STREAM: u64 = 0x706f_6c79;

/// Random polynomial of degree exactly `k` in `n` variables.
///
/// The support holds `min(#candidates, max(3n, 4))` distinct monomials drawn by
/// picking a size uniformly in `0..=k` (or exactly `k` when `homogeneous`) and
/// then a uniform subset of that size; one monomial of size `k` is always
/// present. Coefficients are i.i.d. standard normal. Deterministic in `seed`.
pub fn random_poly(n: usize, k: usize, homogeneous: bool, seed: u64) -> Result<MultilinearPoly> {
    if k > n {
        return Err(Error::DegreeExceedsVars { k, n });
    }
    let sizes: Vec<usize> = if homogeneous { vec![k] } else { (0..=k).collect() };
    let candidates: f64 = sizes.iter().map(|&j| binomial(n, j)).sum();
    let target = candidates.min((3 * n).max(4) as f64) as usize;

    let mut rng = seeded_rng(seed, RANDOM_POLY_STREAM, 0);
    let draw = |rng: &mut rand_chacha::ChaCha12Rng, j: usize| {
        let mut vars: Vec<u32> = sample(rng, n, j).into_iter().map(|v| v as u32).collect();
        vars.sort_unstable();
        Monomial(vars)
    };

    let mut support = BTreeSet::new();
    support.insert(draw(&mut rng, k));
    let mut attempts = 0;
    while support.len() < target && attempts < 64 * target {
        let j = sizes[rng.random_range(0..sizes.len())];
        support.insert(draw(&mut rng, j));
        attempts += 1;
    }
    let terms: Vec<(Monomial, f64)> = support
        .into_iter()
        .map(|m| {
            let c: f64 = rng.sample(StandardNormal);
            (m, c)
        })
        .collect();
    MultilinearPoly::from_terms(n, terms)
}

fn binomial(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
