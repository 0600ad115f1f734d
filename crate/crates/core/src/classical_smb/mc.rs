use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::atoms::{check_band_args, in_band};
use super::MarkovSource;
use crate::error::{invalid, Result};
use crate::info::Z_99;

/// Trajectories per RNG substream. Fixed so that results do not depend on
/// how chunks are scheduled across workers.
const CHUNK: u64 = 4096;

/// Monte-Carlo estimate of a typical-set mass with a 99% normal-approximation
/// confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub samples: u64,
    pub hits: u64,
}

/// Fraction of sampled trajectories `w` of length `n` whose information rate
/// `−(1/n) ln μ(w)` lies in `(h − eps, h + eps)`.
///
/// Chunk `c` of 4096 trajectories draws from ChaCha stream `c` of
/// `seed`, so the estimate is a function of `(seed, samples)` alone.
pub fn typical_mass_mc(
    src: &MarkovSource,
    n: usize,
    h: f64,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_band_args(n, h, eps)?;
    if samples == 0 {
        return invalid("samples must be positive");
    }
    let sampler = PathSampler::new(src)?;
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .filter(|_| in_band(sampler.sample_log_measure(&mut rng, n), n, h, eps))
                .count() as u64
        })
        .sum();
    let estimate = hits as f64 / samples as f64;
    let ci_halfwidth = Z_99 * (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(McEstimate {
        estimate,
        ci_halfwidth,
        samples,
        hits,
    })
}

struct PathSampler {
    initial: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
    log_pi: Vec<f64>,
    log_p: Vec<Vec<f64>>,
}

impl PathSampler {
    fn new(src: &MarkovSource) -> Result<Self> {
        let weighted = |w: &[f64]| {
            WeightedIndex::new(w.iter().copied())
                .map_err(|e| crate::Error::InvalidInput(format!("cannot sample from weights: {e}")))
        };
        Ok(PathSampler {
            initial: weighted(src.stationary())?,
            rows: src
                .transition()
                .iter()
                .map(|r| weighted(r))
                .collect::<Result<_>>()?,
            log_pi: src.stationary().iter().map(|x| x.ln()).collect(),
            log_p: src
                .transition()
                .iter()
                .map(|r| r.iter().map(|x| x.ln()).collect())
                .collect(),
        })
    }

    /// Draws a stationary trajectory and returns `ln μ(w)`.
    fn sample_log_measure(&self, rng: &mut ChaCha8Rng, n: usize) -> f64 {
        let mut s = self.initial.sample(rng);
        let mut log_mu = self.log_pi[s];
        for _ in 1..n {
            let next = self.rows[s].sample(rng);
            log_mu += self.log_p[s][next];
            s = next;
        }
        log_mu
    }
}
