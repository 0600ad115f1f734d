//! Finite-`n` harnesses for the two partition-transfer lemmas used to pass
//! the McMillan band between comparable partitions.
//!
//! `refine`: a coarser sequence `ζ_n ≺ ξ_n` (here the prefix coarsening onto
//! the first `n − p` symbols) with a tight band of width `ε₁` transfers the
//! band to `ξ_n` with width `eps`, where `2ε₁ + 3√ε₁ = eps`.
//!
//! `coarsen`: a band for `ξ_n ∨ ζ` with width `eps` gives a band for `ξ_n`
//! with width `2·eps`, for a fixed finite `ζ` (here the partition by the
//! first `m` symbols).

use serde::Serialize;

use super::atoms::{check_band_args, in_band, visit_words};
use super::{entropy_rate, pow_u128, Budget, MarkovSource};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Refine,
    Coarsen,
}

/// Index-set masses from one run of a transfer harness.
///
/// Refine runs fill `eps1`, `h1`, `not_x_double_prime_mass` and
/// `tilde_x_in_band`; coarsen runs fill `z_mass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub kind: TransferKind,
    pub n: usize,
    /// Gap `p` for refine runs, prefix depth `m` for coarsen runs.
    pub param: usize,
    pub h: f64,
    pub eps: f64,
    pub eps1: Option<f64>,
    pub h1: Option<f64>,
    /// Mass of the band on the side the lemma assumes.
    pub hypothesis_mass: f64,
    /// Whether the lemma's hypothesis holds at this `n`.
    pub hypothesis_holds: bool,
    pub not_x_prime_mass: f64,
    pub not_x_double_prime_mass: Option<f64>,
    pub z_mass: Option<f64>,
    pub tilde_x_mass: f64,
    pub tilde_x_in_band: Option<bool>,
    /// Threshold the verdict compares against.
    pub bound: f64,
    pub verdict: bool,
}

/// Largest `ε₁` with `2ε₁ + 3√ε₁ ≤ eps`.
pub fn refine_tolerance(eps: f64) -> f64 {
    let x = (-3.0 + (9.0 + 8.0 * eps).sqrt()) / 4.0;
    x * x
}

/// Atoms of `ξ_n` in lexicographic order, grouped by their first
/// `prefix_len` symbols: `(group index, μ, ln μ)` plus per-group measures.
struct Grouped {
    atoms: Vec<(usize, f64, f64)>,
    groups: Vec<f64>,
}

fn enumerate_grouped(
    src: &MarkovSource,
    n: usize,
    prefix_len: usize,
    budget: Budget,
) -> Result<Grouped> {
    let mut atoms = Vec::new();
    let mut groups: Vec<f64> = Vec::new();
    let mut last_prefix: Option<Vec<u8>> = None;
    visit_words(src, n, budget, |w, mu, log_mu| {
        let prefix = &w[..prefix_len];
        if last_prefix.as_deref() != Some(prefix) {
            groups.push(0.0);
            last_prefix = Some(prefix.to_vec());
        }
        let g = groups.len() - 1;
        groups[g] += mu;
        atoms.push((g, mu, log_mu));
    })?;
    Ok(Grouped { atoms, groups })
}

/// Lemma harness for a refinement `ζ_n ≺ ξ_n`, with `ζ_n` the coarsening of
/// length-`n` words onto their first `n − p` symbols.
///
/// `h` is the entropy rate of the source and `h₁ = H(ζ_n)/n` is the
/// finite-`n` value of the sequence defining the coarse entropy rate. Both
/// bands are normalised by `n`.
pub fn refine_transfer_report(
    src: &MarkovSource,
    n: usize,
    p: usize,
    eps: f64,
    budget: Budget,
) -> Result<TransferReport> {
    check_band_args(n, 0.0, eps)?;
    if p >= n {
        return invalid(format!("gap p = {p} must be smaller than n = {n}"));
    }
    budget.check(
        pow_u128(src.k(), n),
        "refine harness needs the full length-n partition",
    )?;
    let h = entropy_rate(src);
    let eps1 = refine_tolerance(eps);
    let root = eps1.sqrt();
    let nf = n as f64;

    let grouped = enumerate_grouped(src, n, n - p, budget)?;
    let log_groups: Vec<f64> = grouped.groups.iter().map(|d| d.ln()).collect();
    let h1 = grouped
        .groups
        .iter()
        .zip(&log_groups)
        .map(|(d, ld)| -d * ld)
        .sum::<f64>()
        / nf;
    let tilde_y: Vec<bool> = log_groups
        .iter()
        .map(|&ld| in_band(ld, n, h1, eps1))
        .collect();
    let hypothesis_mass: f64 = grouped
        .groups
        .iter()
        .zip(&tilde_y)
        .filter(|(_, &y)| y)
        .map(|(d, _)| d)
        .sum();

    let mut not_x_prime = 0.0;
    let mut not_x_double_prime = 0.0;
    let mut tilde_x = 0.0;
    let mut not_tilde_x = 0.0;
    let mut tilde_x_in_band = true;
    for &(g, mu, log_mu) in &grouped.atoms {
        let in_xp = tilde_y[g];
        // μ(D_{j(i)}) < e^{n√ε₁} μ(C_i)
        let in_xpp = log_groups[g] - log_mu < nf * root;
        if !in_xp {
            not_x_prime += mu;
        }
        if !in_xpp {
            not_x_double_prime += mu;
        }
        if in_xp && in_xpp {
            tilde_x += mu;
            tilde_x_in_band &= in_band(log_mu, n, h, eps);
        } else {
            not_tilde_x += mu;
        }
    }
    let bound = eps1 + 3.0 * root;
    Ok(TransferReport {
        kind: TransferKind::Refine,
        n,
        param: p,
        h,
        eps,
        eps1: Some(eps1),
        h1: Some(h1),
        hypothesis_mass,
        hypothesis_holds: hypothesis_mass > 1.0 - eps1 && (h - h1).abs() < eps1,
        not_x_prime_mass: not_x_prime,
        not_x_double_prime_mass: Some(not_x_double_prime),
        z_mass: None,
        tilde_x_mass: tilde_x,
        tilde_x_in_band: Some(tilde_x_in_band),
        bound,
        verdict: not_tilde_x < bound && tilde_x_in_band,
    })
}

/// Lemma harness for joining a fixed finite partition `ζ` (first `m`
/// symbols) onto `ξ_n`. For `n ≥ m` every atom of `ξ_n` lies inside one atom
/// of `ζ`, so `ξ_n ∨ ζ = ξ_n` and the hypothesis is checked on `ξ_n` itself.
pub fn coarsen_transfer_report(
    src: &MarkovSource,
    n: usize,
    m: usize,
    eps: f64,
    budget: Budget,
) -> Result<TransferReport> {
    check_band_args(n, 0.0, eps)?;
    if m == 0 || m > n {
        return invalid(format!(
            "prefix depth m = {m} must satisfy 1 <= m <= n = {n}"
        ));
    }
    budget.check(
        pow_u128(src.k(), n),
        "coarsen harness needs the full length-n partition",
    )?;
    let h = entropy_rate(src);
    let grouped = enumerate_grouped(src, n, m, budget)?;

    let mut not_x_prime = 0.0;
    let mut z_mass = 0.0;
    let mut tilde_x = 0.0;
    for &(_, mu, log_mu) in &grouped.atoms {
        // C_i ⊂ D_{j(i)}, so μ(C_i ∩ D_{j(i)}) = μ(C_i) and every other
        // intersection is empty.
        let (meet, log_meet) = (mu, log_mu);
        let in_xp = meet > (1.0 - eps / 2.0) * mu;
        let in_z = in_band(log_meet, n, h, eps);
        if !in_xp {
            not_x_prime += mu;
        }
        if in_z {
            z_mass += meet;
        }
        if in_xp && in_z {
            tilde_x += mu;
        }
    }
    let bound = 1.0 - 2.0 * eps;
    Ok(TransferReport {
        kind: TransferKind::Coarsen,
        n,
        param: m,
        h,
        eps,
        eps1: None,
        h1: None,
        hypothesis_mass: z_mass,
        hypothesis_holds: z_mass > 1.0 - eps,
        not_x_prime_mass: not_x_prime,
        not_x_double_prime_mass: None,
        z_mass: Some(z_mass),
        tilde_x_mass: tilde_x,
        tilde_x_in_band: None,
        bound,
        verdict: tilde_x > bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_smb::typical_mass_exact;

    #[test]
    fn tolerance_solves_rule() {
        for eps in [0.01, 0.2, 0.4, 0.5, 2.0] {
            let e1 = refine_tolerance(eps);
            assert!((2.0 * e1 + 3.0 * e1.sqrt() - eps).abs() < 1e-14);
        }
    }

    #[test]
    fn fair_coin_refines() {
        let src = MarkovSource::bernoulli(0.5).unwrap();
        let r = refine_transfer_report(&src, 12, 2, 0.5, Budget::default()).unwrap();
        assert_eq!(r.tilde_x_mass, 1.0);
        assert_eq!(r.not_x_prime_mass, 0.0);
        assert_eq!(r.not_x_double_prime_mass, Some(0.0));
        assert_eq!(r.tilde_x_in_band, Some(true));
        assert!(r.verdict);
    }

    #[test]
    fn degenerate_refinement() {
        let src = MarkovSource::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let r = refine_transfer_report(&src, 10, 0, 0.4, Budget::default()).unwrap();
        assert_eq!(r.not_x_double_prime_mass, Some(0.0));
        // tilde-X = tilde-Y when ζ_n = ξ_n.
        assert!((r.tilde_x_mass - r.hypothesis_mass).abs() < 1e-15);
    }

    #[test]
    fn refine_rejects_bad_gap() {
        let src = MarkovSource::bernoulli(0.5).unwrap();
        assert!(refine_transfer_report(&src, 4, 4, 0.5, Budget::default()).is_err());
        assert!(refine_transfer_report(&src, 30, 1, 0.5, Budget::default()).is_err());
    }

    #[test]
    fn coarsen_prefix_membership_is_automatic() {
        let src = MarkovSource::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        for (n, m) in [(5, 1), (8, 3), (10, 10)] {
            let r = coarsen_transfer_report(&src, n, m, 0.3, Budget::default()).unwrap();
            assert_eq!(r.not_x_prime_mass, 0.0);
        }
    }

    #[test]
    fn coarsen_matches_band_mass() {
        let src = MarkovSource::bernoulli(0.3).unwrap();
        let h = entropy_rate(&src);
        let r = coarsen_transfer_report(&src, 16, 3, 0.2, Budget::default()).unwrap();
        let band = typical_mass_exact(&src, 16, h, 0.2, Budget::default()).unwrap();
        assert!((r.tilde_x_mass - band).abs() < 1e-12);
        assert_eq!(r.verdict, band > 1.0 - 0.4);
        assert!(r.verdict && r.hypothesis_holds);

        let fair = MarkovSource::bernoulli(0.5).unwrap();
        let r = coarsen_transfer_report(&fair, 10, 2, 0.1, Budget::default()).unwrap();
        assert!(r.verdict);
        assert_eq!(r.tilde_x_mass, 1.0);
    }

    #[test]
    fn coarsen_rejects_bad_depth() {
        let src = MarkovSource::bernoulli(0.5).unwrap();
        assert!(coarsen_transfer_report(&src, 4, 0, 0.1, Budget::default()).is_err());
        assert!(coarsen_transfer_report(&src, 4, 5, 0.1, Budget::default()).is_err());
    }
}
