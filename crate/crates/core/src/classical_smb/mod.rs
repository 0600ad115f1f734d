//! Classical Shannon–McMillan–Breiman machinery for finite-state stationary
//! Markov sources.
//!
//! The generating partition is the alphabet itself, so the atoms of
//! `∨_{i<n} T^{−i}ξ` are the words of length `n` with positive measure
//! `μ(w) = π(w_0) Π P(w_t, w_{t+1})`.

pub(crate) mod atoms;
pub(crate) mod blocks;
mod mc;
mod transfer;

pub use atoms::{atom_measures, typical_mass_exact, PartitionAtoms};
pub use blocks::{block_entropy, block_entropy_brute_force, gap_kernel, BlockEntropy};
pub use mc::{typical_mass_mc, McEstimate};
pub use transfer::{coarsen_transfer_report, refine_transfer_report, TransferKind, TransferReport};

pub(crate) use atoms::visit_words;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::info::shannon;

/// Row sums must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Largest chain solved by a direct linear solve; larger chains use power
/// iteration on the lazy chain.
const DIRECT_SOLVE_MAX: usize = 64;

/// Work budget for exact enumerations, counted in atom (or atom-pair)
/// evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(1 << 24)
    }
}

impl Budget {
    pub(crate) fn check(self, required: u128, hint: &'static str) -> Result<()> {
        if required > self.0 as u128 {
            Err(Error::BudgetExceeded {
                required,
                budget: self.0,
                hint,
            })
        } else {
            Ok(())
        }
    }
}

/// `k^n` without overflow.
pub fn pow_u128(k: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(k as u128);
    }
    acc
}

/// A stationary, irreducible finite-state Markov measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SourceSpec")]
pub struct MarkovSource {
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    pi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// On-disk form of a source: `{"P": [[...]], "labels": [...]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct SourceSpec {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl TryFrom<SourceSpec> for MarkovSource {
    type Error = Error;

    fn try_from(spec: SourceSpec) -> Result<Self> {
        let src = MarkovSource::new(spec.p)?;
        match spec.labels {
            Some(labels) => src.with_labels(labels),
            None => Ok(src),
        }
    }
}

impl MarkovSource {
    /// Validates `p` (square, row-stochastic, irreducible) and computes the
    /// stationary distribution.
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let pi = stationary_distribution(&p)?;
        Ok(MarkovSource {
            p,
            pi,
            labels: None,
        })
    }

    /// The i.i.d. source with one-step law `probs`.
    pub fn iid(probs: &[f64]) -> Result<Self> {
        Self::new(vec![probs.to_vec(); probs.len()])
    }

    /// Two-symbol i.i.d. source emitting symbol 0 with probability `q`.
    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return invalid(format!("Bernoulli parameter must lie in (0,1), got {q}"));
        }
        Self::iid(&[q, 1.0 - q])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.k() {
            return invalid(format!(
                "{} labels given for a {}-symbol alphabet",
                labels.len(),
                self.k()
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Alphabet size.
    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// True when every row equals the stationary law, i.e. the source is a
    /// product measure.
    pub fn is_iid(&self) -> bool {
        self.p.iter().all(|row| {
            row.iter()
                .zip(&self.pi)
                .all(|(a, b)| (a - b).abs() <= ROW_SUM_TOL)
        })
    }

    /// Measure of a word, `π(w_0) Π P(w_t, w_{t+1})`.
    pub fn word_measure(&self, word: &[usize]) -> f64 {
        match word.split_first() {
            None => 1.0,
            Some((&first, _)) => {
                let mut mu = self.pi[first];
                for w in word.windows(2) {
                    mu *= self.p[w[0]][w[1]];
                }
                mu
            }
        }
    }

    /// Renders a word with the source labels, or as digits.
    pub fn render_word(&self, word: &[u8]) -> String {
        match &self.labels {
            Some(labels) => word.iter().map(|&s| labels[s as usize].as_str()).collect(),
            None if self.k() <= 10 => word.iter().map(|&s| char::from(b'0' + s)).collect(),
            None => word
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    /// The `power`-step transition matrix `P^power`.
    pub fn transition_power(&self, power: usize) -> Vec<Vec<f64>> {
        let k = self.k();
        let p = DMatrix::from_fn(k, k, |i, j| self.p[i][j]);
        let mut acc = DMatrix::<f64>::identity(k, k);
        for _ in 0..power {
            acc = &acc * &p;
        }
        (0..k)
            .map(|i| (0..k).map(|j| acc[(i, j)]).collect())
            .collect()
    }
}

fn check_stochastic(p: &[Vec<f64>]) -> Result<()> {
    let k = p.len();
    if k == 0 {
        return invalid("transition matrix is empty");
    }
    for (i, row) in p.iter().enumerate() {
        if row.len() != k {
            return invalid(format!(
                "transition row {i} has {} entries, expected {k}",
                row.len()
            ));
        }
        if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return invalid(format!(
                "transition row {i} has a negative or non-finite entry"
            ));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return invalid(format!("transition row {i} sums to {s:.17}, expected 1"));
        }
    }
    Ok(())
}

/// Strong connectivity of the digraph with an edge `i → j` iff `P_ij > 0`.
fn is_irreducible(p: &[Vec<f64>]) -> bool {
    let k = p.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..k {
                let w = if forward { p[i][j] } else { p[j][i] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// The unique stationary law of an irreducible stochastic matrix.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_stochastic(p)?;
    if !is_irreducible(p) {
        return invalid(
            "transition matrix is reducible: its positive-entry digraph is not strongly connected",
        );
    }
    let k = p.len();
    let mut pi = if k <= DIRECT_SOLVE_MAX {
        // (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
        let mut a = DMatrix::from_fn(k, k, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(k);
        b[k - 1] = 1.0;
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidInput("stationary system is singular".into()))?;
        x.iter().copied().collect::<Vec<f64>>()
    } else {
        power_iteration(p)
    };
    if pi.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return invalid("stationary distribution has a non-positive entry");
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Ok(pi)
}

/// Power iteration on the lazy chain `(I + P)/2`, which shares the
/// stationary law of `P` and is aperiodic.
fn power_iteration(p: &[Vec<f64>]) -> Vec<f64> {
    let k = p.len();
    let mut pi = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    for _ in 0..10_000_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, row) in p.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                next[j] += pi[i] * pij;
            }
        }
        let mut residual = 0.0;
        for j in 0..k {
            residual += (next[j] - pi[j]).abs();
            next[j] = 0.5 * (next[j] + pi[j]);
        }
        std::mem::swap(&mut pi, &mut next);
        if residual < 1e-14 {
            break;
        }
    }
    pi
}

/// Entropy rate `h = −Σ_i π_i Σ_j P_ij ln P_ij` in nats.
pub fn entropy_rate(src: &MarkovSource) -> f64 {
    src.pi
        .iter()
        .zip(&src.p)
        .map(|(pi, row)| pi * shannon(row))
        .sum()
}
