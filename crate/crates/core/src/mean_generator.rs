//! Entropy-defect diagnostics for mean generators, evaluated where the
//! dynamical entropy of an abelian subalgebra reduces to classical partition
//! entropy.
//!
//! For a source with generating partition `ξ`, the static entropy of the
//! window `ξ_{n−p}` is `H(ξ_{n−p})` and its dynamical entropy under `T^n` is
//! the block entropy `h(T^n, ξ_{n−p})`. Their difference is the defect; `ξ`
//! is a mean generator iff `defect/n → 0`.

use serde::Serialize;

use crate::classical_smb::blocks::junction_entropy;
use crate::classical_smb::{
    block_entropy, entropy_rate, gap_kernel, pow_u128, visit_words, Budget, MarkovSource,
};
use crate::error::{invalid, Result};
use crate::info::{neg_xlogx, shannon};

/// Defects below this are treated as rounding noise.
pub const DEFECT_TOL: f64 = 1e-10;

/// Absolute threshold for declaring separated cylinders independent.
pub const INDEPENDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectRow {
    pub n: usize,
    pub h_static: f64,
    pub h_dynamic: f64,
    pub defect_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectSequence {
    pub p: usize,
    pub rows: Vec<DefectRow>,
}

/// Static and dynamical entropies of `ξ_{n−p}` for each `n` in `n_list`:
/// `H_static = H(π) + (n−p−1)h` and `H_dynamic = h(T^n, ξ_{n−p})`.
///
/// For a Markov source the numerator `H(π) − Σ_s π(s) H(P^{p+1}(s,·))` does
/// not depend on `n`.
pub fn markov_defect_sequence(
    src: &MarkovSource,
    p: usize,
    n_list: &[usize],
) -> Result<DefectSequence> {
    let h = entropy_rate(src);
    let h_pi = shannon(src.stationary());
    let rows = n_list
        .iter()
        .map(|&n| {
            let dynamic = block_entropy(src, n, p)?.value;
            let h_static = h_pi + (n - p - 1) as f64 * h;
            Ok(DefectRow {
                n,
                h_static,
                h_dynamic: dynamic,
                defect_over_n: (h_static - dynamic) / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DefectSequence { p, rows })
}

/// Closed-form defect numerator `H(π) − Σ_s π(s) H(P^{p+1}(s,·))`.
pub fn markov_defect(src: &MarkovSource, p: usize) -> f64 {
    shannon(src.stationary()) - junction_entropy(src, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NestedDefectRow {
    pub n: usize,
    pub coarse_defect: f64,
    pub fine_defect: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestedDefectReport {
    pub p: usize,
    pub coarse_map: Vec<usize>,
    pub holds: bool,
    pub rows: Vec<NestedDefectRow>,
}

/// Checks `0 ≤ defect(ζ) ≤ defect(ξ)` for the coarse partition
/// `ζ = coarse_map(ξ)`.
///
/// The image process need not be Markov, so its dynamical entropy is
/// replaced by the one-step conditional entropy `H(ζB₁ | ζB₀)` of
/// consecutive coarse blocks; the coarse defect is then the mutual
/// information `I(ζB₀; ζB₁)`. The fine side uses the closed form.
pub fn nested_defect_check(
    src: &MarkovSource,
    coarse_map: &[usize],
    p: usize,
    n_list: &[usize],
    budget: Budget,
) -> Result<NestedDefectReport> {
    let labels = relabel(src, coarse_map)?;
    let fine_defect = markov_defect(src, p);
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if p == 0 || n <= p {
            return invalid(format!("need n > p >= 1, got n = {n}, p = {p}"));
        }
        let coarse_defect = coarse_block_information(src, &labels, n - p, p, budget)?;
        let holds = coarse_defect >= -DEFECT_TOL && coarse_defect <= fine_defect + DEFECT_TOL;
        rows.push(NestedDefectRow {
            n,
            coarse_defect,
            fine_defect,
            holds,
        });
    }
    Ok(NestedDefectReport {
        p,
        coarse_map: labels.map,
        holds: rows.iter().all(|r| r.holds),
        rows,
    })
}

struct Relabel {
    map: Vec<usize>,
    size: usize,
}

/// Compresses the image of `coarse_map` to `0..size`.
fn relabel(src: &MarkovSource, coarse_map: &[usize]) -> Result<Relabel> {
    if coarse_map.len() != src.k() {
        return invalid(format!(
            "coarse map has {} entries for a {}-symbol alphabet",
            coarse_map.len(),
            src.k()
        ));
    }
    let mut image: Vec<usize> = coarse_map.to_vec();
    image.sort_unstable();
    image.dedup();
    let map = coarse_map
        .iter()
        .map(|c| image.binary_search(c).expect("value is in its own image"))
        .collect();
    Ok(Relabel {
        map,
        size: image.len(),
    })
}

/// `I(ζB₀; ζB₁)` for coarse blocks of length `len` separated by `gap`
/// hidden symbols.
fn coarse_block_information(
    src: &MarkovSource,
    labels: &Relabel,
    len: usize,
    gap: usize,
    budget: Budget,
) -> Result<f64> {
    let k = src.k();
    let codes = pow_u128(labels.size, len);
    budget.check(
        codes.saturating_mul(codes).saturating_mul(k as u128),
        "coarse block pairs are quadratic in the number of coarse blocks",
    )?;
    let codes = codes as usize;
    // ends[U][a] = μ(ζB = U, last = a); starts[U][b] = μ(ζB = U, first = b)
    let mut ends = vec![0.0; codes * k];
    let mut starts = vec![0.0; codes * k];
    visit_words(src, len, budget, |w, mu, _| {
        let u = w
            .iter()
            .fold(0usize, |acc, &s| acc * labels.size + labels.map[s as usize]);
        ends[u * k + w[len - 1] as usize] += mu;
        starts[u * k + w[0] as usize] += mu;
    })?;
    let kernel = gap_kernel(src, gap);
    let pi = src.stationary();
    // forward[U][b] = Σ_a ends[U][a]·K(a, b) / π(b)
    let mut forward = vec![0.0; codes * k];
    for u in 0..codes {
        for b in 0..k {
            let s: f64 = (0..k).map(|a| ends[u * k + a] * kernel[a][b]).sum();
            forward[u * k + b] = s / pi[b];
        }
    }
    let marginal: Vec<f64> = (0..codes)
        .map(|u| ends[u * k..(u + 1) * k].iter().sum())
        .collect();
    let h_marginal: f64 = marginal.iter().copied().map(neg_xlogx).sum();
    let mut h_joint = 0.0;
    for u in (0..codes).filter(|&u| marginal[u] > 0.0) {
        let fwd = &forward[u * k..(u + 1) * k];
        let mut row = 0.0;
        for v in (0..codes).filter(|&v| marginal[v] > 0.0) {
            let joint: f64 = fwd
                .iter()
                .zip(&starts[v * k..(v + 1) * k])
                .map(|(x, y)| x * y)
                .sum();
            row += neg_xlogx(joint);
        }
        h_joint += row;
    }
    Ok(2.0 * h_marginal - h_joint)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub p: usize,
    pub n_probe: usize,
    pub independent: bool,
    pub max_deviation: f64,
}

/// Largest `|μ(u ∩ T^{−(|u|+p)} v) − μ(u)μ(v)|` over cylinders `u`, `v` of
/// length at most `n_probe`, i.e. with `p` unobserved symbols between them.
pub fn independence_check(
    src: &MarkovSource,
    p: usize,
    n_probe: usize,
    budget: Budget,
) -> Result<IndependenceReport> {
    if n_probe == 0 {
        return invalid("n_probe must be at least 1");
    }
    let k = src.k();
    let words: u128 = (1..=n_probe).map(|l| pow_u128(k, l)).sum();
    budget.check(
        words.saturating_mul(words),
        "cylinder pairs are quadratic in the probe length",
    )?;
    // (first, last, μ) for every positive-measure cylinder
    let mut cylinders = Vec::new();
    for len in 1..=n_probe {
        visit_words(src, len, budget, |w, mu, _| {
            cylinders.push((w[0] as usize, w[len - 1] as usize, mu));
        })?;
    }
    let kernel = gap_kernel(src, p);
    let pi = src.stationary();
    let mut max_deviation: f64 = 0.0;
    for &(_, last, mu_u) in &cylinders {
        for &(first, _, mu_v) in &cylinders {
            let joint = mu_u * kernel[last][first] * mu_v / pi[first];
            max_deviation = max_deviation.max((joint - mu_u * mu_v).abs());
        }
    }
    Ok(IndependenceReport {
        p,
        n_probe,
        independent: max_deviation <= INDEPENDENCE_TOL,
        max_deviation,
    })
}
