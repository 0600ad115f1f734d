//! Finite-dimensional algebras with a fixed tracial state.
//!
//! A multi-matrix algebra `⊕_i Mat_{m_i}(ℂ)` with a trace is determined by the
//! trace `t_i` of a minimal projection in each summand. A [`MultiMatrix`]
//! stores exactly that data, with an optional multiplicity so that families of
//! identical summands (for instance the `2^c` diagonal blocks of a binary shift
//! structure algebra) never need to be materialised.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::info::neg_xlogx;

/// Tolerance on `Σ count·m·t = 1` for constructed algebras.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A family of `count` identical central summands `Mat_m(ℂ)`, each of whose
/// minimal projections has trace `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summand {
    pub m: u64,
    pub t: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub count: u64,
}

fn one() -> u64 {
    1
}

fn is_one(c: &u64) -> bool {
    *c == 1
}

impl Summand {
    pub fn new(m: u64, t: f64) -> Self {
        Summand { m, t, count: 1 }
    }

    pub fn family(count: u64, m: u64, t: f64) -> Self {
        Summand { m, t, count }
    }

    /// Trace of the central support of the whole family.
    pub fn weight(&self) -> f64 {
        self.count as f64 * self.m as f64 * self.t
    }
}

/// A multi-matrix algebra together with its tracial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMultiMatrix")]
pub struct MultiMatrix {
    summands: Vec<Summand>,
}

#[derive(Deserialize)]
struct RawMultiMatrix {
    summands: Vec<Summand>,
}

impl TryFrom<RawMultiMatrix> for MultiMatrix {
    type Error = crate::Error;

    fn try_from(raw: RawMultiMatrix) -> Result<Self> {
        MultiMatrix::new(raw.summands)
    }
}

impl MultiMatrix {
    /// Validates the summand list: every rank and count is at least one,
    /// every trace is positive and the trace is a state.
    pub fn new(summands: Vec<Summand>) -> Result<Self> {
        if summands.is_empty() {
            return invalid("a multi-matrix algebra needs at least one summand");
        }
        for (i, s) in summands.iter().enumerate() {
            if s.m == 0 || s.count == 0 {
                return invalid(format!("summand {i}: rank and count must be at least 1"));
            }
            if !(s.t.is_finite() && s.t > 0.0) {
                return invalid(format!(
                    "summand {i}: minimal-projection trace {} must be positive",
                    s.t
                ));
            }
        }
        let total: f64 = summands.iter().map(Summand::weight).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return invalid(format!(
                "trace is not a state: sum of count*m*t = {total:.17}, expected 1"
            ));
        }
        Ok(MultiMatrix { summands })
    }

    /// Convenience constructor from `(m, t)` pairs.
    pub fn from_pairs(pairs: &[(u64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(m, t)| Summand::new(m, t)).collect())
    }

    /// `Mat_m(ℂ)` with its normalised trace.
    pub fn full_matrix(m: u64) -> Self {
        MultiMatrix {
            summands: vec![Summand::new(m, 1.0 / m as f64)],
        }
    }

    /// The one-dimensional algebra `ℂ`.
    pub fn unit() -> Self {
        Self::full_matrix(1)
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    /// Entropy `−Σ m_i t_i ln t_i` of the trace restricted to the algebra.
    pub fn entropy(&self) -> f64 {
        self.summands
            .iter()
            .map(|s| s.count as f64 * s.m as f64 * neg_xlogx(s.t))
            .sum()
    }

    /// Number of atoms of a masa, i.e. `Σ m_i` counted with multiplicity.
    pub fn rank_total(&self) -> u128 {
        self.summands
            .iter()
            .map(|s| s.count as u128 * s.m as u128)
            .sum()
    }

    /// Excises every central summand whose minimal projections fall outside
    /// the open band `(e^{−n(h+eps)}, e^{−n(h−eps)})`.
    ///
    /// All minimal projections of one summand share the same trace, so the
    /// excised part is a central projection; its trace is reported as
    /// `z_mass`. An atom lying exactly on an endpoint counts as out of band.
    pub fn band_report(&self, n: u64, h: f64, eps: f64) -> Result<BandReport> {
        if n == 0 {
            return invalid("band length n must be positive");
        }
        if !(eps.is_finite() && eps > 0.0) {
            return invalid(format!("band half-width eps must be positive, got {eps}"));
        }
        if !(h.is_finite() && h >= 0.0) {
            return invalid(format!(
                "entropy level h must be finite and nonnegative, got {h}"
            ));
        }
        let nf = n as f64;
        let (lo, hi) = (-nf * (h + eps), -nf * (h - eps));
        let mut z_mass = 0.0;
        let mut out_summands = Vec::new();
        for (i, s) in self.summands.iter().enumerate() {
            let lt = s.t.ln();
            if !(lo < lt && lt < hi) {
                z_mass += s.weight();
                out_summands.push(i);
            }
        }
        let z_mass = z_mass.clamp(0.0, 1.0);
        Ok(BandReport {
            n,
            h,
            eps,
            z_mass,
            in_band_mass: 1.0 - z_mass,
            out_summands,
        })
    }

    /// Tensor product with the product trace.
    pub fn join_independent(&self, other: &MultiMatrix) -> MultiMatrix {
        let mut summands = Vec::with_capacity(self.summands.len() * other.summands.len());
        for a in &self.summands {
            for b in &other.summands {
                summands.push(Summand {
                    m: a.m * b.m,
                    t: a.t * b.t,
                    count: a.count * b.count,
                });
            }
        }
        MultiMatrix { summands }
    }

    /// A random algebra with 1–5 summands of rank 1–4 and Dirichlet weights.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> MultiMatrix {
        let k = rng.random_range(1..=5usize);
        let ranks: Vec<u64> = (0..k).map(|_| rng.random_range(1..=4u64)).collect();
        let weights = dirichlet_ones(rng, k);
        let summands = ranks
            .iter()
            .zip(&weights)
            .map(|(&m, &w)| Summand::new(m, w / m as f64))
            .collect();
        MultiMatrix { summands }
    }
}

/// The minimal central projection removing out-of-band atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub n: u64,
    pub h: f64,
    pub eps: f64,
    pub z_mass: f64,
    pub in_band_mass: f64,
    pub out_summands: Vec<usize>,
}

/// Two commuting algebras `M_1`, `M_2` described through masa atoms `e_i` of
/// `A_1 ⊂ M_1` and `f_j` of `A_2 ⊂ M_2`: `joint[i][j] = τ(e_i f_j)` and the
/// corner over `e_i f_j` is a factor of rank `left_atoms[i] · right_atoms[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPairModel")]
pub struct CommutingPairModel {
    left_atoms: Vec<u64>,
    right_atoms: Vec<u64>,
    joint: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPairModel {
    left_atoms: Vec<u64>,
    right_atoms: Vec<u64>,
    joint: Vec<Vec<f64>>,
}

impl TryFrom<RawPairModel> for CommutingPairModel {
    type Error = crate::Error;

    fn try_from(raw: RawPairModel) -> Result<Self> {
        CommutingPairModel::new(raw.left_atoms, raw.right_atoms, raw.joint)
    }
}

/// Entropies of the joins `M_1 ∨ M_2` and `A_1 ∨ A_2` and the per-side defects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEntropies {
    pub h_join_full: f64,
    pub h_join_abelian: f64,
    pub defect_left: f64,
    pub defect_right: f64,
}

impl PairEntropies {
    /// `(H_full − H_abelian) − (defect_left + defect_right)`, zero up to rounding.
    pub fn residual(&self) -> f64 {
        (self.h_join_full - self.h_join_abelian) - (self.defect_left + self.defect_right)
    }
}

impl CommutingPairModel {
    pub fn new(left_atoms: Vec<u64>, right_atoms: Vec<u64>, joint: Vec<Vec<f64>>) -> Result<Self> {
        if left_atoms.is_empty() || right_atoms.is_empty() {
            return invalid("both sides need at least one atom");
        }
        if left_atoms.iter().chain(&right_atoms).any(|&m| m == 0) {
            return invalid("corner ranks must be at least 1");
        }
        if joint.len() != left_atoms.len() {
            return invalid(format!(
                "joint table has {} rows, expected {}",
                joint.len(),
                left_atoms.len()
            ));
        }
        let mut total = 0.0;
        for (i, row) in joint.iter().enumerate() {
            if row.len() != right_atoms.len() {
                return invalid(format!(
                    "joint row {i} has {} entries, expected {}",
                    row.len(),
                    right_atoms.len()
                ));
            }
            for &p in row {
                if !(p.is_finite() && p >= 0.0) {
                    return invalid(format!(
                        "joint row {i} has a negative or non-finite entry {p}"
                    ));
                }
                total += p;
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return invalid(format!("joint table sums to {total:.17}, expected 1"));
        }
        Ok(CommutingPairModel {
            left_atoms,
            right_atoms,
            joint,
        })
    }

    pub fn left_atoms(&self) -> &[u64] {
        &self.left_atoms
    }

    pub fn right_atoms(&self) -> &[u64] {
        &self.right_atoms
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    /// Evaluates both sides of the defect identity.
    ///
    /// The join entropies are summed cell by cell over the joint table, the
    /// defects only through the marginals, so the two sides share no
    /// intermediate values.
    pub fn pair_entropies(&self) -> PairEntropies {
        let mut h_join_full = 0.0;
        let mut h_join_abelian = 0.0;
        for (row, &mi) in self.joint.iter().zip(&self.left_atoms) {
            for (&p, &nj) in row.iter().zip(&self.right_atoms) {
                if p > 0.0 {
                    h_join_full -= p * (p / (mi as f64 * nj as f64)).ln();
                    h_join_abelian -= p * p.ln();
                }
            }
        }
        let defect_left = self
            .joint
            .iter()
            .zip(&self.left_atoms)
            .map(|(row, &mi)| row.iter().sum::<f64>() * (mi as f64).ln())
            .sum();
        let defect_right = self
            .right_atoms
            .iter()
            .enumerate()
            .map(|(j, &nj)| self.joint.iter().map(|row| row[j]).sum::<f64>() * (nj as f64).ln())
            .sum();
        PairEntropies {
            h_join_full,
            h_join_abelian,
            defect_left,
            defect_right,
        }
    }

    /// A random instance: `rows × cols` atoms with corner ranks uniform in
    /// `1..=max_rank` and a symmetric Dirichlet(1) joint table. Each cell is
    /// zeroed with probability `zero_fraction`; rows and columns left empty are
    /// removed before renormalising.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        rows: usize,
        cols: usize,
        max_rank: u64,
        zero_fraction: f64,
    ) -> CommutingPairModel {
        assert!(rows > 0 && cols > 0 && max_rank > 0);
        let left: Vec<u64> = (0..rows).map(|_| rng.random_range(1..=max_rank)).collect();
        let right: Vec<u64> = (0..cols).map(|_| rng.random_range(1..=max_rank)).collect();
        let cells = dirichlet_ones(rng, rows * cols);
        let mut joint: Vec<Vec<f64>> = cells
            .chunks(cols)
            .map(|row| {
                row.iter()
                    .map(|&p| {
                        if rng.random::<f64>() < zero_fraction {
                            0.0
                        } else {
                            p
                        }
                    })
                    .collect()
            })
            .collect();
        if joint.iter().flatten().all(|&p| p == 0.0) {
            joint[0][0] = 1.0;
        }
        let keep_rows: Vec<usize> = (0..rows)
            .filter(|&i| joint[i].iter().any(|&p| p > 0.0))
            .collect();
        let keep_cols: Vec<usize> = (0..cols)
            .filter(|&j| joint.iter().any(|r| r[j] > 0.0))
            .collect();
        let mut joint: Vec<Vec<f64>> = keep_rows
            .iter()
            .map(|&i| keep_cols.iter().map(|&j| joint[i][j]).collect())
            .collect();
        let total: f64 = joint.iter().flatten().sum();
        joint.iter_mut().flatten().for_each(|p| *p /= total);
        CommutingPairModel {
            left_atoms: keep_rows.iter().map(|&i| left[i]).collect(),
            right_atoms: keep_cols.iter().map(|&j| right[j]).collect(),
            joint,
        }
    }

    /// The `trial`-th instance of a seeded battery: shapes up to 5×5, ranks in
    /// `1..=4`, and every third instance sparse. Each trial draws from its own
    /// ChaCha stream, so instances do not depend on evaluation order.
    pub fn seeded_trial(seed: u64, trial: u64) -> CommutingPairModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let rows = rng.random_range(1..=5);
        let cols = rng.random_range(1..=5);
        let zero_fraction = if trial % 3 == 2 { 0.4 } else { 0.0 };
        Self::random(&mut rng, rows, cols, 4, zero_fraction)
    }
}

/// Sample from the symmetric Dirichlet distribution with all parameters 1.
fn dirichlet_ones<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    /// Von Neumann entropy from the explicit spectrum: each summand
    /// contributes `m` eigenvalues equal to `t` (per copy).
    fn spectral_entropy(m: &MultiMatrix) -> f64 {
        let mut eig = Vec::new();
        for s in m.summands() {
            for _ in 0..s.count * s.m {
                eig.push(s.t);
            }
        }
        eig.iter().map(|&l| -l * l.ln()).sum()
    }

    #[test]
    fn entropy_of_examples() {
        let mat2 = MultiMatrix::from_pairs(&[(2, 0.5)]).unwrap();
        assert!((mat2.entropy() - LN2).abs() < 1e-12);
        let coin = MultiMatrix::from_pairs(&[(1, 0.5), (1, 0.5)]).unwrap();
        assert!((coin.entropy() - LN2).abs() < 1e-12);
        let mixed = MultiMatrix::from_pairs(&[(2, 0.25), (1, 0.5)]).unwrap();
        let oracle = spectral_entropy(&mixed);
        assert!((oracle - 1.5 * LN2).abs() < 1e-12);
        assert!((mixed.entropy() - oracle).abs() < 1e-12);
    }

    #[test]
    fn rank_totals() {
        assert_eq!(
            MultiMatrix::from_pairs(&[(2, 0.5)]).unwrap().rank_total(),
            2
        );
        assert_eq!(
            MultiMatrix::from_pairs(&[(1, 0.5), (1, 0.5)])
                .unwrap()
                .rank_total(),
            2
        );
        assert_eq!(
            MultiMatrix::from_pairs(&[(2, 0.25), (1, 0.5)])
                .unwrap()
                .rank_total(),
            3
        );
    }

    #[test]
    fn rejects_bad_states() {
        assert!(MultiMatrix::from_pairs(&[(2, 0.4)]).is_err());
        assert!(MultiMatrix::from_pairs(&[(0, 1.0)]).is_err());
        assert!(MultiMatrix::from_pairs(&[(1, -1.0), (1, 2.0)]).is_err());
        assert!(MultiMatrix::from_pairs(&[]).is_err());
    }

    #[test]
    fn band_examples() {
        let m = MultiMatrix::from_pairs(&[(1, (-5f64).exp())]);
        // The single summand does not form a state, so build it as part of
        // a normalised algebra and check only its membership.
        assert!(m.is_err());
        let t = (-5f64).exp();
        let m = MultiMatrix::from_pairs(&[(1, t), (1, 1.0 - t)]).unwrap();
        let r = m.band_report(5, 1.0, 0.01).unwrap();
        assert_eq!(r.out_summands, vec![1]);
        assert!((r.z_mass - (1.0 - t)).abs() < 1e-15);

        let shift = MultiMatrix::new(vec![Summand::new(32, 2f64.powi(-5))]).unwrap();
        let r = shift.band_report(10, 0.5 * LN2, 0.1).unwrap();
        assert_eq!(r.z_mass, 0.0);
        assert_eq!(r.in_band_mass, 1.0);

        let coin = MultiMatrix::from_pairs(&[(1, 0.5), (1, 0.5)]).unwrap();
        let r = coin.band_report(10, 0.5 * LN2, 0.01).unwrap();
        assert_eq!(r.z_mass, 1.0);
        assert_eq!(r.out_summands, vec![0, 1]);
    }

    #[test]
    fn band_endpoint_is_out() {
        // t = 1/4 = e^{-2 ln 2}; with n = 1, h = ln 2 and eps = ln 2 the
        // lower endpoint e^{-n(h+eps)} equals t.
        let m = MultiMatrix::from_pairs(&[(4, 0.25)]).unwrap();
        let r = m.band_report(1, LN2, LN2).unwrap();
        assert_eq!(r.z_mass, 1.0);
    }

    #[test]
    fn band_rejects_nonpositive_eps() {
        let m = MultiMatrix::unit();
        assert!(m.band_report(1, 0.0, 0.0).is_err());
        assert!(m.band_report(1, 0.0, -1.0).is_err());
        assert!(m.band_report(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn join_examples() {
        let mat2 = MultiMatrix::full_matrix(2);
        let j = mat2.join_independent(&mat2);
        assert_eq!(j.summands(), &[Summand::new(4, 0.25)]);
        assert!((j.entropy() - 2.0 * LN2).abs() < 1e-12);

        let m = MultiMatrix::from_pairs(&[(2, 0.25), (1, 0.5)]).unwrap();
        assert_eq!(MultiMatrix::unit().join_independent(&m), m);

        let coin = MultiMatrix::from_pairs(&[(1, 0.5), (1, 0.5)]).unwrap();
        let j = m.join_independent(&coin);
        assert_eq!(j.summands().len(), 4);
        assert!((spectral_entropy(&j) - 2.5 * LN2).abs() < 1e-12);
        assert!((j.entropy() - 2.5 * LN2).abs() < 1e-12);
    }

    #[test]
    fn pair_examples() {
        let abelian = CommutingPairModel::new(
            vec![1, 1],
            vec![1, 1, 1],
            vec![vec![0.1, 0.2, 0.3], vec![0.25, 0.05, 0.1]],
        )
        .unwrap();
        let e = abelian.pair_entropies();
        assert_eq!(e.defect_left, 0.0);
        assert_eq!(e.defect_right, 0.0);
        assert_eq!(e.h_join_full, e.h_join_abelian);

        let single = CommutingPairModel::new(vec![2], vec![1], vec![vec![1.0]]).unwrap();
        let e = single.pair_entropies();
        assert!((e.h_join_full - LN2).abs() < 1e-15);
        assert_eq!(e.h_join_abelian, 0.0);
        assert!((e.defect_left - LN2).abs() < 1e-15);
        assert_eq!(e.defect_right, 0.0);
    }

    #[test]
    fn pair_model_validation() {
        assert!(CommutingPairModel::new(vec![1], vec![1], vec![vec![0.5]]).is_err());
        assert!(CommutingPairModel::new(vec![0], vec![1], vec![vec![1.0]]).is_err());
        assert!(CommutingPairModel::new(vec![1, 1], vec![1], vec![vec![1.0]]).is_err());
        assert!(CommutingPairModel::new(vec![1], vec![1, 1], vec![vec![1.5, -0.5]]).is_err());
    }

    #[test]
    fn json_shape() {
        let m: MultiMatrix =
            serde_json::from_str(r#"{"summands":[{"m":2,"t":0.25},{"m":1,"t":0.5}]}"#).unwrap();
        assert_eq!(m.rank_total(), 3);
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"summands":[{"m":2,"t":0.25},{"m":1,"t":0.5}]}"#
        );
        let bad = serde_json::from_str::<MultiMatrix>(r#"{"summands":[{"m":2,"t":0.3}]}"#);
        assert!(bad.is_err());
        let fam: MultiMatrix =
            serde_json::from_str(r#"{"summands":[{"m":2,"t":0.125,"count":4}]}"#).unwrap();
        assert_eq!(fam.rank_total(), 8);
    }

    #[test]
    fn seeded_trials_are_reproducible() {
        for trial in 0..20 {
            assert_eq!(
                CommutingPairModel::seeded_trial(11, trial),
                CommutingPairModel::seeded_trial(11, trial)
            );
        }
    }

    fn arb_algebra() -> impl Strategy<Value = MultiMatrix> {
        any::<u64>().prop_map(|seed| MultiMatrix::random(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    proptest! {
        #[test]
        fn entropy_bounds(m in arb_algebra()) {
            let h = m.entropy();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (m.rank_total() as f64).ln() + 1e-12);
            prop_assert!((h - spectral_entropy(&m)).abs() < 1e-12);
        }

        #[test]
        fn tensor_additivity(a in arb_algebra(), b in arb_algebra()) {
            let j = a.join_independent(&b);
            prop_assert!(MultiMatrix::new(j.summands().to_vec()).is_ok());
            prop_assert!((j.entropy() - a.entropy() - b.entropy()).abs() < 1e-12);
        }

        #[test]
        fn band_partition_and_monotonicity(
            m in arb_algebra(),
            n in 1u64..40,
            h in 0.0f64..2.0,
            eps in 0.001f64..1.0,
            grow in 0.0f64..1.0,
        ) {
            let r = m.band_report(n, h, eps).unwrap();
            prop_assert!((r.z_mass + r.in_band_mass - 1.0).abs() < 1e-12);
            let wider = m.band_report(n, h, eps + grow).unwrap();
            prop_assert!(wider.z_mass <= r.z_mass);
        }

        #[test]
        fn defect_identity(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, sparse in prop::bool::ANY) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = CommutingPairModel::random(&mut rng, rows, cols, 4, if sparse { 0.5 } else { 0.0 });
            prop_assert!(c.pair_entropies().residual().abs() < 1e-10);
        }
    }
}
