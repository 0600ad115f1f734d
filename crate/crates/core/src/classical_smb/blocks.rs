use serde::Serialize;

use super::atoms::visit_words;
use super::{entropy_rate, pow_u128, Budget, MarkovSource};
use crate::error::{invalid, Result};
use crate::info::shannon;

/// Entropy of the block process: blocks of the first `n − p` symbols of
/// each period of length `n`, advanced by `T^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockEntropy {
    pub n: usize,
    pub p: usize,
    pub value: f64,
    pub normalized: f64,
}

fn check_block_args(n: usize, p: usize) -> Result<()> {
    if p == 0 {
        return invalid("gap p must be at least 1");
    }
    if n <= p {
        return invalid(format!("period n = {n} must exceed gap p = {p}"));
    }
    Ok(())
}

/// Closed form `h(T^n, ξ_{n−p}) = Σ_s π(s) H(P^{p+1}(s,·)) + (n−p−1)·h`.
///
/// Consecutive blocks are separated by `p` unobserved symbols, so the first
/// symbol of the next block follows the last symbol of the current block
/// after `p + 1` transitions; within a block each symbol adds `h`.
pub fn block_entropy(src: &MarkovSource, n: usize, p: usize) -> Result<BlockEntropy> {
    check_block_args(n, p)?;
    let value = junction_entropy(src, p) + (n - p - 1) as f64 * entropy_rate(src);
    Ok(BlockEntropy {
        n,
        p,
        value,
        normalized: value / n as f64,
    })
}

/// `Σ_s π(s) H(P^{p+1}(s,·))`: entropy of the first symbol of a block given
/// the last symbol of the previous one.
pub(crate) fn junction_entropy(src: &MarkovSource, p: usize) -> f64 {
    let q = src.transition_power(p + 1);
    src.stationary()
        .iter()
        .zip(&q)
        .map(|(pi, row)| pi * shannon(row))
        .sum()
}

/// `(p+1)`-step transition kernel by explicit enumeration of the `k^p`
/// intermediate paths.
pub fn gap_kernel(src: &MarkovSource, p: usize) -> Vec<Vec<f64>> {
    let k = src.k();
    let p_mat = src.transition();
    let mut out = vec![vec![0.0; k]; k];
    let mut path = vec![0usize; p];
    for (a, row) in out.iter_mut().enumerate() {
        loop {
            let mut w = 1.0;
            let mut prev = a;
            for &g in &path {
                w *= p_mat[prev][g];
                prev = g;
            }
            if w > 0.0 {
                for (o, &q) in row.iter_mut().zip(&p_mat[prev]) {
                    *o += w * q;
                }
            }
            // odometer over intermediate symbols
            let mut i = 0;
            while i < p {
                path[i] += 1;
                if path[i] < k {
                    break;
                }
                path[i] = 0;
                i += 1;
            }
            if i == p {
                break;
            }
        }
    }
    out
}

/// `H(B₁ | B₀)` by enumerating every pair of consecutive blocks.
///
/// The joint law of a pair is `μ(B₀)·K(last B₀, first B₁)·μ(B₁)/π(first B₁)`
/// with `K` the gap kernel from [`gap_kernel`]. The work is the square of the
/// number of blocks and is charged against `budget`.
pub fn block_entropy_brute_force(
    src: &MarkovSource,
    n: usize,
    p: usize,
    budget: Budget,
) -> Result<f64> {
    check_block_args(n, p)?;
    let len = n - p;
    let blocks_bound = pow_u128(src.k(), len);
    budget.check(
        blocks_bound.saturating_mul(blocks_bound),
        "brute-force block pairs are quadratic in the number of blocks",
    )?;
    let mut blocks: Vec<(usize, usize, f64, f64)> = Vec::new();
    visit_words(src, len, budget, |w, mu, log_mu| {
        blocks.push((w[0] as usize, w[len - 1] as usize, mu, log_mu));
    })?;
    let kernel = gap_kernel(src, p);
    let log_kernel: Vec<Vec<f64>> = kernel
        .iter()
        .map(|r| r.iter().map(|x| x.ln()).collect())
        .collect();
    let pi = src.stationary();
    // μ(B₁ | first symbol) and its logarithm
    let conditional: Vec<(usize, f64, f64)> = blocks
        .iter()
        .map(|&(f, _, mu, log_mu)| (f, mu / pi[f], log_mu - pi[f].ln()))
        .collect();

    let mut h_marginal = Neumaier::default();
    let mut h_joint = Neumaier::default();
    for &(_, last, mu0, log_mu0) in &blocks {
        h_marginal.add(-mu0 * log_mu0);
        let mut row = 0.0;
        for &(first, r1, log_r1) in &conditional {
            let kq = kernel[last][first];
            if kq > 0.0 {
                let joint = mu0 * kq * r1;
                row -= joint * (log_mu0 + log_kernel[last][first] + log_r1);
            }
        }
        h_joint.add(row);
    }
    Ok(h_joint.sum() - h_marginal.sum())
}

/// Compensated summation.
#[derive(Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
