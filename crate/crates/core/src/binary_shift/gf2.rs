//! Dense GF(2) matrices with 64-bit packed rows.

use crate::error::{invalid, Result};

const W: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(W)
}

#[inline]
fn parity_and(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones())
        .sum::<u32>()
        & 1
        == 1
}

#[inline]
fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Square matrix over GF(2), row-major, each row packed into `⌈n/64⌉` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(n: usize) -> Self {
        let words = words_for(n);
        Gf2Matrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.row(i)[j / W] >> (j % W)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[i * self.words + j / W];
        let mask = 1u64 << (j % W);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Symmetric with zero diagonal, i.e. the matrix of an alternating form.
    pub fn is_alternating(&self) -> bool {
        (0..self.n).all(|i| !self.get(i, i) && (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Rank by Gaussian elimination on a copy of the packed rows.
    pub fn rank(&self) -> usize {
        let mut rows = self.bits.clone();
        let words = self.words;
        let mut rank = 0;
        for col in 0..self.n {
            let (wi, mask) = (col / W, 1u64 << (col % W));
            let Some(pivot) = (rank..self.n).find(|&r| rows[r * words + wi] & mask != 0) else {
                continue;
            };
            if pivot != rank {
                for w in wi..words {
                    rows.swap(pivot * words + w, rank * words + w);
                }
            }
            let (head, tail) = rows.split_at_mut((rank + 1) * words);
            let pivot_row = &head[rank * words..];
            for r in tail.chunks_exact_mut(words) {
                if r[wi] & mask != 0 {
                    xor_into(&mut r[wi..], &pivot_row[wi..]);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// GF(2) rank of an alternating form. The rank of such a form is always
/// even; an odd result means the elimination is broken and panics.
pub fn gf2_rank(t: &Gf2Matrix) -> Result<usize> {
    if !t.is_alternating() {
        return invalid("GF(2) commutation form must be symmetric with zero diagonal");
    }
    let r = t.rank();
    assert!(r % 2 == 0, "alternating form has odd rank {r}");
    Ok(r)
}

/// Ranks of all leading principal submatrices of an alternating form,
/// computed in one pass by symplectic reduction.
///
/// Basis vectors `e_0, e_1, …` are added in order. Each is made orthogonal
/// to the hyperbolic pairs found so far; if it then pairs with a vector of
/// the current radical a new hyperbolic pair is formed, otherwise it joins
/// the radical. The rank of the form on `span(e_0..e_{n−1})` is twice the
/// number of pairs. Every vector carries its image under the form so that
/// each pairing costs one masked popcount.
pub struct PrefixRanks<'a> {
    form: &'a Gf2Matrix,
    next: usize,
    pairs: Vec<[Vector; 2]>,
    radical: Vec<Vector>,
}

#[derive(Clone)]
struct Vector {
    coords: Vec<u64>,
    image: Vec<u64>,
}

impl Vector {
    fn pair(&self, other: &Vector) -> bool {
        parity_and(&self.image, &other.coords)
    }

    fn add(&mut self, other: &Vector) {
        xor_into(&mut self.coords, &other.coords);
        xor_into(&mut self.image, &other.image);
    }
}

impl<'a> PrefixRanks<'a> {
    pub fn new(form: &'a Gf2Matrix) -> Result<Self> {
        if !form.is_alternating() {
            return invalid("GF(2) commutation form must be symmetric with zero diagonal");
        }
        Ok(PrefixRanks {
            form,
            next: 0,
            pairs: Vec::new(),
            radical: Vec::new(),
        })
    }

    /// Current prefix size.
    pub fn size(&self) -> usize {
        self.next
    }

    pub fn rank(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Extends the prefix by one coordinate and returns the new rank, or
    /// `None` once the whole matrix has been consumed.
    pub fn advance(&mut self) -> Option<usize> {
        let n = self.next;
        if n >= self.form.dim() {
            return None;
        }
        self.next += 1;
        let mut coords = vec![0u64; self.form.words];
        coords[n / W] |= 1 << (n % W);
        let mut v = Vector {
            coords,
            image: self.form.row(n).to_vec(),
        };
        for [a, b] in &self.pairs {
            let (va, vb) = (v.pair(a), v.pair(b));
            if vb {
                v.add(a);
            }
            if va {
                v.add(b);
            }
        }
        match self.radical.iter().position(|r| v.pair(r)) {
            None => self.radical.push(v),
            Some(idx) => {
                let partner = self.radical.swap_remove(idx);
                for r in &mut self.radical {
                    if r.pair(&v) {
                        r.add(&partner);
                    }
                }
                self.pairs.push([partner, v]);
            }
        }
        Some(self.rank())
    }
}

impl Iterator for PrefixRanks<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        self.advance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook elimination over `Vec<Vec<bool>>`.
    fn naive_rank(m: &[Vec<bool>]) -> usize {
        let mut a = m.to_vec();
        let n = a.len();
        let cols = a.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..n).find(|&r| a[r][c]) {
                a.swap(p, rank);
                for r in 0..n {
                    if r != rank && a[r][c] {
                        for k in 0..cols {
                            let x = a[rank][k];
                            a[r][k] ^= x;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    fn random_alternating(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..i {
                let b = rng.random::<f64>() < density;
                m[i][j] = b;
                m[j][i] = b;
            }
        }
        m
    }

    fn pack(m: &[Vec<bool>]) -> Gf2Matrix {
        Gf2Matrix::from_fn(m.len(), |i, j| m[i][j])
    }

    #[test]
    fn small_examples() {
        assert_eq!(gf2_rank(&Gf2Matrix::zeros(5)).unwrap(), 0);
        let tri = |n| Gf2Matrix::from_fn(n, |i: usize, j: usize| i.abs_diff(j) == 1);
        assert_eq!(gf2_rank(&tri(4)).unwrap(), 4);
        assert_eq!(gf2_rank(&tri(5)).unwrap(), 4);
        assert_eq!(gf2_rank(&Gf2Matrix::zeros(0)).unwrap(), 0);
    }

    #[test]
    fn rejects_non_alternating() {
        let mut m = Gf2Matrix::zeros(3);
        m.set(0, 1, true);
        assert!(gf2_rank(&m).is_err());
        let mut d = Gf2Matrix::zeros(3);
        d.set(1, 1, true);
        assert!(gf2_rank(&d).is_err());
        assert!(PrefixRanks::new(&d).is_err());
    }

    #[test]
    fn general_rank_on_non_symmetric() {
        let rows = vec![
            vec![true, true, false],
            vec![false, true, true],
            vec![true, false, true],
        ];
        assert_eq!(pack(&rows).rank(), naive_rank(&rows));
        assert_eq!(pack(&rows).rank(), 2);
    }

    #[test]
    fn packed_matches_naive_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..50 {
            let n = rng.random_range(1..=64);
            let density = [0.05, 0.2, 0.5][trial % 3];
            let m = random_alternating(&mut rng, n, density);
            let r = gf2_rank(&pack(&m)).unwrap();
            assert_eq!(r, naive_rank(&m), "trial {trial}, n = {n}");
            assert_eq!(r % 2, 0);
        }
    }

    #[test]
    fn prefix_ranks_match_scratch_across_word_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for density in [0.02, 0.1, 0.5] {
            let m = random_alternating(&mut rng, 150, density);
            let form = pack(&m);
            let ranks: Vec<usize> = PrefixRanks::new(&form).unwrap().collect();
            assert_eq!(ranks.len(), 150);
            for n in [1, 2, 3, 63, 64, 65, 100, 127, 128, 129, 150] {
                let sub: Vec<Vec<bool>> = m[..n].iter().map(|r| r[..n].to_vec()).collect();
                assert_eq!(ranks[n - 1], naive_rank(&sub), "prefix {n}");
            }
        }
    }

    proptest! {
        #[test]
        fn prefix_ranks_are_monotone_and_even(seed in any::<u64>(), n in 1usize..90) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let form = pack(&random_alternating(&mut rng, n, 0.3));
            let ranks: Vec<usize> = PrefixRanks::new(&form).unwrap().collect();
            prop_assert_eq!(*ranks.last().unwrap(), form.rank());
            for w in ranks.windows(2) {
                prop_assert!(w[1] >= w[0] && w[1] <= w[0] + 2);
            }
            prop_assert!(ranks.iter().all(|r| r % 2 == 0));
        }
    }
}
