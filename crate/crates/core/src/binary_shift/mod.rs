//! Binary shift algebras `A(X)`.
//!
//! The algebra is generated by symmetries `s_i` that anticommute exactly
//! when `|i − j| ∈ X`. The commutation pattern of `s_0, …, s_{n−1}` is an
//! alternating form over GF(2); if its rank is `2d_n` then
//! `A_n ≅ Mat_{2^{d_n}}(ℂ) ⊗ ℂ^{2^{c_n}}` with `n = 2d_n + c_n`, and every
//! minimal projection of `A_n` has trace `2^{−(d_n+c_n)}`.

mod gf2;

pub use gf2::{gf2_rank, Gf2Matrix, PrefixRanks};

use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tracial_algebra::{MultiMatrix, Summand};

/// The set `X ⊂ ℕ` of anticommuting distances: a finite base set, optionally
/// extended beyond `max(base)` by a periodic residue pattern.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawCommutationSet")]
pub struct CommutationSet {
    base: BTreeSet<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<u64>,
    #[serde(skip_serializing_if = "BTreeSet::is_empty")]
    residues: BTreeSet<u64>,
}

#[derive(Deserialize)]
struct RawCommutationSet {
    #[serde(default)]
    base: Vec<u64>,
    #[serde(default)]
    period: Option<u64>,
    #[serde(default)]
    residues: Vec<u64>,
}

impl TryFrom<RawCommutationSet> for CommutationSet {
    type Error = Error;

    fn try_from(raw: RawCommutationSet) -> Result<Self> {
        CommutationSet::new(raw.base, raw.period, raw.residues)
    }
}

impl CommutationSet {
    pub fn new(base: Vec<u64>, period: Option<u64>, residues: Vec<u64>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for d in base {
            if d == 0 {
                return invalid("distances in X must be positive");
            }
            if !set.insert(d) {
                return invalid(format!("distance {d} listed twice in X"));
            }
        }
        match period {
            Some(0) => return invalid("period must be at least 1"),
            Some(q) => {
                if let Some(r) = residues.iter().find(|&&r| r >= q) {
                    return invalid(format!("residue {r} is not below the period {q}"));
                }
            }
            None if !residues.is_empty() => return invalid("residues given without a period"),
            None => {}
        }
        Ok(CommutationSet {
            base: set,
            period,
            residues: residues.into_iter().collect(),
        })
    }

    /// A purely finite set.
    pub fn finite(base: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::new(base.into_iter().collect(), None, Vec::new())
    }

    /// Parses a comma-separated list such as `"1,3"`; the empty string is `∅`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| Error::InvalidInput(format!("not a positive integer: {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(items, None, Vec::new())
    }

    pub fn with_period(self, period: u64, residues: Vec<u64>) -> Result<Self> {
        Self::new(self.base.into_iter().collect(), Some(period), residues)
    }

    pub fn base(&self) -> &BTreeSet<u64> {
        &self.base
    }

    pub fn period(&self) -> Option<u64> {
        self.period
    }

    pub fn residues(&self) -> &BTreeSet<u64> {
        &self.residues
    }

    /// `d ∈ X`.
    pub fn contains(&self, d: u64) -> bool {
        if d == 0 {
            return false;
        }
        if self.base.contains(&d) {
            return true;
        }
        match self.period {
            Some(q) => {
                d > self.base.last().copied().unwrap_or(0) && self.residues.contains(&(d % q))
            }
            None => false,
        }
    }

    /// True when no distance belongs to `X`.
    pub fn is_empty(&self) -> bool {
        self.base.is_empty() && self.residues.is_empty()
    }
}

/// Commutation form of `s_0, …, s_{n−1}`: entry `(i, j)` is 1 iff
/// `i ≠ j` and `|i − j| ∈ X`.
pub fn form_matrix(x: &CommutationSet, n: usize) -> Gf2Matrix {
    let by_distance: Vec<bool> = (0..n as u64).map(|d| x.contains(d)).collect();
    Gf2Matrix::from_fn(n, |i, j| by_distance[i.abs_diff(j)])
}

/// Structure constants of `A_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureRow {
    pub n: usize,
    pub d_n: usize,
    pub c_n: usize,
}

impl StructureRow {
    fn from_rank(n: usize, rank: usize) -> Self {
        debug_assert!(rank % 2 == 0 && rank <= n);
        StructureRow {
            n,
            d_n: rank / 2,
            c_n: n - rank,
        }
    }

    /// `log₂` of the trace of a minimal projection, `−(d_n + c_n)`.
    pub fn atom_trace_log2(&self) -> i64 {
        -((self.d_n + self.c_n) as i64)
    }

    /// Trace `2^{−(d_n + c_n)}` of a minimal projection.
    pub fn atom_trace(&self) -> f64 {
        2f64.powi(self.atom_trace_log2() as i32)
    }

    /// `H(A_n)/n = (d_n + c_n)·ln 2 / n`.
    pub fn mean_entropy(&self) -> f64 {
        (self.d_n + self.c_n) as f64 * LN_2 / self.n as f64
    }
}

/// Rows for `n = 1..=n_max`, from a single incremental pass.
pub fn structure_sequence(x: &CommutationSet, n_max: usize) -> Result<Vec<StructureRow>> {
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let form = form_matrix(x, n_max);
    let ranks = PrefixRanks::new(&form)?;
    Ok(ranks
        .enumerate()
        .map(|(i, r)| StructureRow::from_rank(i + 1, r))
        .collect())
}

/// Structure constants at a single `n`, by elimination from scratch.
pub fn structure_row(x: &CommutationSet, n: usize) -> Result<StructureRow> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    Ok(StructureRow::from_rank(n, gf2_rank(&form_matrix(x, n))?))
}

/// `A_n` as a multi-matrix algebra: `2^{c_n}` summands of rank `2^{d_n}`,
/// stored as a single summand family.
pub fn structure_algebra(x: &CommutationSet, n: usize) -> Result<MultiMatrix> {
    let row = structure_row(x, n)?;
    let exponent = row.d_n + row.c_n;
    if exponent > 62 {
        return Err(Error::Overflow(format!(
            "d_n + c_n = {exponent} at n = {n} exceeds 62"
        )));
    }
    MultiMatrix::new(vec![Summand::family(
        1u64 << row.c_n,
        1u64 << row.d_n,
        row.atom_trace(),
    )])
}

/// Finite-`n` diagnostics for the equivalence of: the trace band at level
/// `½ ln 2` holding for `A_n`; `c_n/n → 0`; and `H(A_n)/n` converging to the
/// dynamical entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n_max: usize,
    pub eps: f64,
    /// `c_n/n` below `2·eps/ln 2` across the upper half `⌈n_max/2⌉..=n_max`.
    pub cond_ii: bool,
    pub c_over_n_final: f64,
    pub c_over_n_tail_max: f64,
    /// Smallest `n₀` such that the band holds with `z_n = 0` for every
    /// `n₀ ≤ n ≤ n_max`.
    pub band_ok_from: Option<usize>,
    pub mean_entropy_limit_estimate: f64,
    /// `|estimate − ½ ln 2|`.
    pub limit_gap: f64,
    /// A limit estimate within `eps` of `½ ln 2` comes with a finite
    /// `band_ok_from`.
    pub consistent: bool,
    /// Cases where the equivalence is not asserted, with the reason.
    pub flag: Option<String>,
}

/// Band at level `½ ln 2` for `A_n`: all minimal projections share the
/// trace `2^{−(d_n+c_n)}`, so the band holds with `z_n = 0` or fails for
/// every atom at once.
pub fn half_log2_band_holds(row: &StructureRow, eps: f64) -> bool {
    let h = 0.5 * LN_2;
    let nf = row.n as f64;
    let log_t = row.atom_trace_log2() as f64 * LN_2;
    -nf * (h + eps) < log_t && log_t < -nf * (h - eps)
}

pub fn equivalence_report(x: &CommutationSet, n_max: usize, eps: f64) -> Result<EquivalenceReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let rows = structure_sequence(x, n_max)?;
    Ok(equivalence_from_rows(&rows, eps, x.is_empty()))
}

pub fn equivalence_from_rows(rows: &[StructureRow], eps: f64, x_empty: bool) -> EquivalenceReport {
    let last = *rows.last().expect("at least one structure row");
    let n_max = last.n;
    let tail_start = n_max.div_ceil(2).max(1);
    let c_over_n_tail_max = rows
        .iter()
        .filter(|r| r.n >= tail_start)
        .map(|r| r.c_n as f64 / r.n as f64)
        .fold(0.0, f64::max);
    let cond_ii = c_over_n_tail_max < 2.0 * eps / LN_2;

    let band_ok_from = rows
        .iter()
        .rev()
        .take_while(|r| half_log2_band_holds(r, eps))
        .last()
        .map(|r| r.n);

    let estimate = last.mean_entropy();
    let limit_gap = (estimate - 0.5 * LN_2).abs();
    let consistent = limit_gap >= eps || band_ok_from.is_some();
    let flag = if x_empty {
        Some("degenerate: X is empty, the classical Bernoulli case with mean entropy ln 2 and c_n/n = 1".to_string())
    } else if limit_gap >= eps {
        Some(format!(
            "limit estimate {estimate:.6} is not within eps of ln(2)/2; equivalence not asserted"
        ))
    } else {
        None
    };
    EquivalenceReport {
        n_max,
        eps,
        cond_ii,
        c_over_n_final: last.c_n as f64 / n_max as f64,
        c_over_n_tail_max,
        band_ok_from,
        mean_entropy_limit_estimate: estimate,
        limit_gap,
        consistent,
        flag,
    }
}
