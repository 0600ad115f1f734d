use serde::Serialize;

use super::{pow_u128, Budget, MarkovSource};
use crate::error::{invalid, Result};

const ENUMERATION_HINT: &str = "use the Monte-Carlo estimator (typical_mass_mc) for this size";

/// Depth-first enumeration of every positive-measure word of length `n`, in
/// lexicographic order. The visitor receives the word, its measure and the
/// log-measure accumulated as a sum of logarithms.
pub(crate) fn visit_words<F>(
    src: &MarkovSource,
    n: usize,
    budget: Budget,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[u8], f64, f64),
{
    let k = src.k();
    if k > 256 {
        return invalid("exact enumeration supports alphabets of at most 256 symbols");
    }
    budget.check(pow_u128(k, n), ENUMERATION_HINT)?;
    if n == 0 {
        visit(&[], 1.0, 0.0);
        return Ok(());
    }
    let log_p: Vec<Vec<f64>> = src
        .transition()
        .iter()
        .map(|row| row.iter().map(|x| x.ln()).collect())
        .collect();
    let mut word = vec![0u8; n];
    for (s, &pi) in src.stationary().iter().enumerate() {
        word[0] = s as u8;
        descend(src, &log_p, &mut word, 1, pi, pi.ln(), &mut visit);
    }
    Ok(())
}

fn descend<F>(
    src: &MarkovSource,
    log_p: &[Vec<f64>],
    word: &mut [u8],
    depth: usize,
    mu: f64,
    log_mu: f64,
    visit: &mut F,
) where
    F: FnMut(&[u8], f64, f64),
{
    if depth == word.len() {
        visit(word, mu, log_mu);
        return;
    }
    let prev = word[depth - 1] as usize;
    for (s, &p) in src.transition()[prev].iter().enumerate() {
        if p > 0.0 {
            word[depth] = s as u8;
            descend(
                src,
                log_p,
                word,
                depth + 1,
                mu * p,
                log_mu + log_p[prev][s],
                visit,
            );
        }
    }
}

/// Base-`k` code of a word, first symbol most significant.
pub(crate) fn encode(word: &[u8], k: usize) -> u64 {
    word.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)
}

/// Atoms of `∨_{i<n} T^{−i}ξ` with their measures. Zero-measure words are
/// omitted. Words are stored as base-`k` codes in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionAtoms {
    n: usize,
    k: usize,
    codes: Vec<u64>,
    measures: Vec<f64>,
}

impl PartitionAtoms {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Measure of `word`, or `None` if it is not an atom.
    pub fn get(&self, word: &[u8]) -> Option<f64> {
        if word.len() != self.n {
            return None;
        }
        let code = encode(word, self.k);
        self.codes
            .binary_search(&code)
            .ok()
            .map(|i| self.measures[i])
    }

    pub fn decode(&self, code: u64) -> Vec<u8> {
        let mut word = vec![0u8; self.n];
        let mut c = code;
        for slot in word.iter_mut().rev() {
            *slot = (c % self.k as u64) as u8;
            c /= self.k as u64;
        }
        word
    }

    /// `(word, measure)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u8>, f64)> + '_ {
        self.codes
            .iter()
            .zip(&self.measures)
            .map(move |(&c, &m)| (self.decode(c), m))
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn total(&self) -> f64 {
        self.measures.iter().sum()
    }
}

/// Exact enumeration of the length-`n` cylinder partition.
pub fn atom_measures(src: &MarkovSource, n: usize, budget: Budget) -> Result<PartitionAtoms> {
    if n == 0 {
        return invalid("word length must be positive");
    }
    let k = src.k();
    let mut codes = Vec::new();
    let mut measures = Vec::new();
    visit_words(src, n, budget, |w, mu, _| {
        codes.push(encode(w, k));
        measures.push(mu);
    })?;
    Ok(PartitionAtoms {
        n,
        k,
        codes,
        measures,
    })
}

/// Open band test on the per-symbol information `−(1/n) ln μ`.
#[inline]
pub(crate) fn in_band(log_mu: f64, n: usize, h: f64, eps: f64) -> bool {
    let rate = -log_mu / n as f64;
    rate > h - eps && rate < h + eps
}

pub(crate) fn check_band_args(n: usize, h: f64, eps: f64) -> Result<()> {
    if n == 0 {
        return invalid("word length must be positive");
    }
    if !(eps.is_finite() && eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    if !h.is_finite() {
        return invalid("h must be finite");
    }
    Ok(())
}

/// Total measure of the atoms with `μ(C) ∈ (e^{−n(h+eps)}, e^{−n(h−eps)})`.
pub fn typical_mass_exact(
    src: &MarkovSource,
    n: usize,
    h: f64,
    eps: f64,
    budget: Budget,
) -> Result<f64> {
    check_band_args(n, h, eps)?;
    let mut mass = 0.0;
    visit_words(src, n, budget, |_, mu, log_mu| {
        if in_band(log_mu, n, h, eps) {
            mass += mu;
        }
    })?;
    Ok(mass.min(1.0))
}
