#![allow(dead_code)]

use entropylab::MarkovSource;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random chain with Dirichlet(1) rows; all entries are positive, so the
/// chain is irreducible.
pub fn random_chain(rng: &mut ChaCha8Rng, k: usize) -> MarkovSource {
    let rows = (0..k)
        .map(|_| {
            let draws: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
            let s: f64 = draws.iter().sum();
            let mut row: Vec<f64> = draws.iter().map(|x| x / s).collect();
            // push the rounding error into the last entry
            let head: f64 = row[..k - 1].iter().sum();
            row[k - 1] = 1.0 - head;
            row
        })
        .collect();
    MarkovSource::new(rows).expect("positive rows are irreducible")
}

pub fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Typical mass of Bernoulli(q) words of length n, summed over the number
/// of `q`-symbols.
pub fn binomial_band_mass(q: f64, n: u64, h: f64, eps: f64) -> f64 {
    let mut mass = 0.0;
    for k in 0..=n {
        let rate = -(k as f64 / n as f64) * q.ln() - ((n - k) as f64 / n as f64) * (1.0 - q).ln();
        if rate > h - eps && rate < h + eps {
            mass += binom(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
        }
    }
    mass
}
